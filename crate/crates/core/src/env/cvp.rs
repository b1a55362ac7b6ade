use serde::{Deserialize, Serialize};

use super::{computable, node_output, Mdp, NodeValue, StepOutcome};
use crate::circuit::GateCircuit;
use crate::error::{Error, Result};
use crate::rational::{one, zero};

/// CVP MDP over a constant-input circuit; actions are node indices `1..=n`,
/// horizon `n+1`.
#[derive(Clone, Debug)]
pub struct CvpMdp {
    circuit: GateCircuit,
    horizon: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CvpState {
    pub v: Vec<NodeValue>,
}

impl CvpState {
    pub fn unknown(n: usize) -> Self {
        CvpState { v: vec![NodeValue::Unknown; n] }
    }
}

impl CvpMdp {
    pub fn new(circuit: GateCircuit) -> Result<Self> {
        if circuit.has_inputs() {
            return Err(Error::invalid("CVP circuits may not contain INPUT gates"));
        }
        let horizon = circuit.size() + 1;
        Ok(CvpMdp { circuit, horizon })
    }

    pub fn with_horizon(mut self, h: usize) -> Self {
        self.horizon = h;
        self
    }

    pub fn circuit(&self) -> &GateCircuit {
        &self.circuit
    }

    pub fn n(&self) -> usize {
        self.circuit.size()
    }

    pub fn policy(&self, s: &CvpState) -> usize {
        cvp_optimal_policy(&self.circuit, s)
    }
}

/// Successor values after acting on node `a`; out-of-range is a no-op.
pub(crate) fn recompute(
    circuit: &GateCircuit,
    v: &[NodeValue],
    a: usize,
    x: Option<&[bool]>,
) -> Vec<NodeValue> {
    let mut next = v.to_vec();
    if (1..=circuit.size()).contains(&a) {
        next[a - 1] = match node_output(circuit.node(a), v, x) {
            Some(b) => NodeValue::from_bool(b),
            None => NodeValue::Unknown,
        };
    }
    next
}

impl Mdp for CvpMdp {
    type State = CvpState;
    type Action = usize;

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn initial_state(&self) -> CvpState {
        CvpState::unknown(self.n())
    }

    fn actions(&self) -> Vec<usize> {
        (1..=self.n()).collect()
    }

    fn step(&self, s: &CvpState, a: usize) -> StepOutcome<CvpState> {
        let reward = if s.v[self.n() - 1] == NodeValue::One { one() } else { zero() };
        let v = recompute(&self.circuit, &s.v, a, None);
        StepOutcome::deterministic(CvpState { v }, reward)
    }
}

/// Smallest node whose inputs are computed and whose own value is not;
/// `n` when there is none.
pub fn cvp_optimal_policy(circuit: &GateCircuit, s: &CvpState) -> usize {
    let n = circuit.size();
    (1..=n).find(|&i| computable(circuit, &s.v, i, false)).unwrap_or(n)
}
