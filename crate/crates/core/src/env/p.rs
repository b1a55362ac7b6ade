use serde::{Deserialize, Serialize};

use super::cvp::recompute;
use super::{computable, Mdp, NodeValue, StepOutcome};
use crate::circuit::{GateCircuit, GateKind};
use crate::error::{Error, Result};
use crate::rational::{one, zero};

/// P MDP for a language circuit and a fixed input string `x`.
///
/// The action range is `[P]` with `P` equal to the circuit size, and the
/// horizon is `P+1`. Circuits use AND/OR/NOT/INPUT gates only.
#[derive(Clone, Debug)]
pub struct PMdp {
    circuit: GateCircuit,
    x: Vec<bool>,
    horizon: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PState {
    pub v: Vec<NodeValue>,
}

impl PMdp {
    pub fn new(circuit: GateCircuit, x: Vec<bool>) -> Result<Self> {
        if let Some((i, node)) = circuit
            .nodes()
            .iter()
            .enumerate()
            .find(|(_, nd)| matches!(nd.gate, GateKind::Const0 | GateKind::Const1))
        {
            return Err(Error::invalid(format!(
                "P circuits use AND/OR/NOT/INPUT only; node {} is {:?}",
                i + 1,
                node.gate
            )));
        }
        if circuit.input_arity() > x.len() {
            return Err(Error::invalid(format!(
                "circuit reads x[{}] but |x| = {}",
                circuit.input_arity(),
                x.len()
            )));
        }
        let horizon = circuit.size() + 1;
        Ok(PMdp { circuit, x, horizon })
    }

    pub fn with_horizon(mut self, h: usize) -> Self {
        self.horizon = h;
        self
    }

    pub fn circuit(&self) -> &GateCircuit {
        &self.circuit
    }

    pub fn x(&self) -> &[bool] {
        &self.x
    }

    /// `P(n)`: the number of value slots and the largest action.
    pub fn p(&self) -> usize {
        self.circuit.size()
    }

    pub fn policy(&self, s: &PState) -> usize {
        p_optimal_policy(&self.circuit, s)
    }
}

impl Mdp for PMdp {
    type State = PState;
    type Action = usize;

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn initial_state(&self) -> PState {
        PState { v: vec![NodeValue::Unknown; self.p()] }
    }

    fn actions(&self) -> Vec<usize> {
        (1..=self.p()).collect()
    }

    fn step(&self, s: &PState, a: usize) -> StepOutcome<PState> {
        let reward = if s.v[self.p() - 1] == NodeValue::One { one() } else { zero() };
        let v = recompute(&self.circuit, &s.v, a, Some(&self.x));
        StepOutcome::deterministic(PState { v }, reward)
    }
}

/// Smallest index in the computable set with INPUT nodes included; `P` if empty.
pub fn p_optimal_policy(circuit: &GateCircuit, s: &PState) -> usize {
    let p = circuit.size();
    (1..=p).find(|&i| computable(circuit, &s.v, i, true)).unwrap_or(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Node;
    use crate::env::test_support::check_contract;
    use NodeValue::*;

    #[test]
    fn input_gate_reads_x() {
        let c = GateCircuit::new(vec![Node::input(1), Node::not(1)]).unwrap();
        let m = PMdp::new(c, vec![true, false]).unwrap();
        let out = m.step(&m.initial_state(), 1);
        assert_eq!(out.successors[0].0.v, vec![One, Unknown]);
    }

    #[test]
    fn recomputing_is_idempotent() {
        let c = GateCircuit::new(vec![Node::input(2), Node::not(1)]).unwrap();
        let m = PMdp::new(c, vec![true, false]).unwrap();
        let s = PState { v: vec![Zero, One] };
        for a in [1, 2] {
            assert_eq!(m.step(&s, a).successors[0].0, s);
        }
        // beyond the circuit: no-op
        assert_eq!(m.step(&s, 7).successors[0].0, s);
    }

    #[test]
    fn policy_examples() {
        let c = GateCircuit::new(vec![Node::input(1), Node::input(2), Node::and(1, 2)]).unwrap();
        assert_eq!(p_optimal_policy(&c, &PState { v: vec![Unknown; 3] }), 1);
        assert_eq!(p_optimal_policy(&c, &PState { v: vec![One, Unknown, Unknown] }), 2);
        assert_eq!(p_optimal_policy(&c, &PState { v: vec![One, Zero, Unknown] }), 3);
        assert_eq!(p_optimal_policy(&c, &PState { v: vec![One, Zero, Zero] }), 3);
    }

    #[test]
    fn validation() {
        let c = GateCircuit::new(vec![Node::constant(true)]).unwrap();
        assert!(PMdp::new(c, vec![]).is_err());
        let c = GateCircuit::new(vec![Node::input(3)]).unwrap();
        assert!(PMdp::new(c, vec![true]).is_err());
    }

    #[test]
    fn contract() {
        let c = GateCircuit::new(vec![Node::input(1), Node::input(2), Node::or(1, 2)]).unwrap();
        check_contract(&PMdp::new(c, vec![false, true]).unwrap());
    }
}
