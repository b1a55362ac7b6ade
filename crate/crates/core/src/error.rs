use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("simulation out of bounds: head {head} moved {direction} on a tape of {len} cells")]
    SimulationBounds {
        head: usize,
        len: usize,
        direction: &'static str,
    },

    #[error("resource limit exceeded: {what} is {actual}, ceiling {limit}{}", layer_suffix(*.layer))]
    ResourceLimit {
        what: &'static str,
        actual: usize,
        limit: usize,
        layer: Option<usize>,
    },

    #[error("policy undefined at step {step} on state {state}")]
    InvalidPolicy { step: usize, state: String },

    #[error("fixed-point overflow in layer {layer}: {value} exceeds the representable range")]
    Overflow { layer: usize, value: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn layer_suffix(layer: Option<usize>) -> String {
    match layer {
        Some(h) => format!(" (layer {h})"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn is_resource_limit(&self) -> bool {
        matches!(self, Error::ResourceLimit { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
