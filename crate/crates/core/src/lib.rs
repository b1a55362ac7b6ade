//! Constructed finite-horizon MDP families for 3-SAT, NP, CVP and P, an
//! exact rational dynamic-programming oracle, the reductions between the
//! decision problems and optimal values, and constant-depth circuit and
//! constant-layer ReLU network realizations of rewards, transitions and
//! optimal policies.

pub mod acz;
pub mod circuit;
pub mod env;
pub mod equiv;
pub mod error;
pub mod formula;
pub mod generate;
pub mod mlp;
pub mod ndtm;
pub mod oracle;
pub mod rational;
pub mod reductions;
pub mod verify;

pub use circuit::{GateCircuit, GateKind, Node};
pub use env::{Family, FamilyInstance, Mdp, NodeValue, StepOutcome};
pub use error::{Error, Result};
pub use formula::{Assignment, Cnf, Cnf3Formula, Literal};
pub use ndtm::{Configuration, NdtmSpec};
pub use oracle::{exact_dp, Ceiling, DpSolution};
pub use rational::Rational;
