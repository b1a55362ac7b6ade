//! Fixed-precision ReLU networks and the constructions that realize the
//! MDP models and policies with a constant number of layers.

pub mod builder;
pub mod check;
pub mod embed;
pub mod gates;
pub mod model;
pub mod network;
pub mod policy;

pub use builder::{Lin, NetBuilder};
pub use check::{
    check_cvp_mlps, check_cvp_policy_mlp, check_np_mlps, check_p_mlps, check_p_policy_mlp, check_sat_mlps,
    mlp_equiv_check,
};
pub use embed::Embedding;
pub use gates::{build_gate_mlp, build_lookup_mlp, build_lookup_mlp_f64, GateMlpKind};
pub use model::{build_model_mlp, declared_width_exponent, cvp_model_mlps, np_model_mlps, p_model_mlps, sat_model_mlps, ModelMlps, MLP_MAX_N};
pub use network::{Layer, Mlp, DEFAULT_PRECISION_BITS, INTEGER_BITS};
pub use policy::{build_policy_mlp, cvp_policy_mlp, p_policy_mlp};

/// Forward pass with fixed-point rounding.
pub fn mlp_forward(m: &Mlp, x: &[f64]) -> crate::error::Result<Vec<f64>> {
    m.forward(x)
}
