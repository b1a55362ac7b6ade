//! The constructed MDP families behind one finite-horizon step contract.
//!
//! Each family value holds the fixed instance data (formula, circuit,
//! machine, input string) and its horizon; states carry only the parts
//! that change along a trajectory.

use std::fmt::Debug;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::circuit::{GateCircuit, GateKind, Node};
use crate::rational::{one, Rational};

mod cvp;
mod instance;
mod np;
mod p;
mod sat;
mod stoch_cvp;
mod stoch_sat;

pub use cvp::{cvp_optimal_policy, CvpMdp, CvpState};
pub use instance::{Family, FamilyInstance, InstanceFile};
pub use np::{NpMdp, NpState};
pub use p::{p_optimal_policy, PMdp, PState};
pub use sat::{SatMdp, SatState};
pub use stoch_cvp::StochCvpMdp;
pub use stoch_sat::{StochAction, StochSatMdp};

/// Successor distribution plus the reward collected at `(s, a)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepOutcome<S> {
    pub successors: Vec<(S, Rational)>,
    pub reward: Rational,
}

impl<S> StepOutcome<S> {
    pub fn deterministic(next: S, reward: Rational) -> Self {
        StepOutcome { successors: vec![(next, one())], reward }
    }
}

pub trait Mdp: Sync {
    type State: Clone + Eq + Hash + Ord + Debug + Send + Sync + Serialize;
    type Action: Copy + Eq + Ord + Debug + Send + Sync + Serialize;

    fn horizon(&self) -> usize;

    fn initial_state(&self) -> Self::State;

    /// The action set, in tie-break order (smallest first).
    fn actions(&self) -> Vec<Self::Action>;

    fn step(&self, s: &Self::State, a: Self::Action) -> StepOutcome<Self::State>;

    fn is_deterministic(&self) -> bool {
        true
    }
}

/// Node value in CVP-style states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeValue {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "U")]
    Unknown,
}

impl NodeValue {
    pub fn from_bool(b: bool) -> Self {
        if b {
            NodeValue::One
        } else {
            NodeValue::Zero
        }
    }

    pub fn known(self) -> Option<bool> {
        match self {
            NodeValue::Zero => Some(false),
            NodeValue::One => Some(true),
            NodeValue::Unknown => None,
        }
    }

    pub fn is_unknown(self) -> bool {
        self == NodeValue::Unknown
    }

    /// Embedding code {0→1, 1→2, Unknown→3}.
    pub fn code(self) -> i64 {
        match self {
            NodeValue::Zero => 1,
            NodeValue::One => 2,
            NodeValue::Unknown => 3,
        }
    }
}

/// Output of node `i` given the current values, or `None` when some input
/// has not been computed. INPUT nodes read `x` (None for CVP circuits).
pub(crate) fn node_output(node: &Node, v: &[NodeValue], x: Option<&[bool]>) -> Option<bool> {
    let val = |j: usize| v[j - 1].known();
    match node.gate {
        GateKind::And => Some(val(node.in1)? & val(node.in2)?),
        GateKind::Or => Some(val(node.in1)? | val(node.in2)?),
        GateKind::Not => Some(!val(node.in1)?),
        GateKind::Const0 => Some(false),
        GateKind::Const1 => Some(true),
        GateKind::Input => x.and_then(|x| x.get(node.in1 - 1).copied()),
    }
}

/// Member test for the computable set G(s) (or its INPUT-extended variant).
pub(crate) fn computable(circuit: &GateCircuit, v: &[NodeValue], i: usize, allow_input: bool) -> bool {
    if !v[i - 1].is_unknown() {
        return false;
    }
    let node = circuit.node(i);
    let known = |j: usize| !v[j - 1].is_unknown();
    match node.gate {
        GateKind::And | GateKind::Or => known(node.in1) && known(node.in2),
        GateKind::Not => known(node.in1),
        GateKind::Const0 | GateKind::Const1 => true,
        GateKind::Input => allow_input,
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use num_traits::Zero;

    /// Checks the step contract on every reachable (s, a) up to the horizon.
    pub fn check_contract<M: Mdp>(mdp: &M) {
        use std::collections::BTreeSet;
        let mut layer: BTreeSet<M::State> = [mdp.initial_state()].into();
        for _ in 0..mdp.horizon() {
            let mut next = BTreeSet::new();
            for s in &layer {
                for a in mdp.actions() {
                    let out = mdp.step(s, a);
                    let r = out.reward;
                    assert!(
                        r.is_zero() || r == crate::rational::half() || r == one(),
                        "reward {r} out of range"
                    );
                    let total: Rational = out.successors.iter().map(|(_, p)| *p).sum();
                    assert_eq!(total, one());
                    assert!(out.successors.iter().all(|(_, p)| *p > Rational::zero()));
                    if mdp.is_deterministic() {
                        assert_eq!(out.successors.len(), 1);
                    }
                    next.extend(out.successors.into_iter().map(|(s, _)| s));
                }
            }
            layer = next;
        }
    }
}
