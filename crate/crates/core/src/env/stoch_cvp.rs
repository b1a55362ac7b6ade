use super::cvp::CvpState;
use super::{node_output, Mdp, NodeValue, StepOutcome};
use crate::circuit::GateCircuit;
use crate::error::{Error, Result};
use crate::rational::{one, rat, zero};

/// Stochastic CVP MDP: computing a node succeeds with probability 2/3 and
/// otherwise leaves it Unknown. The horizon is a parameter (default `3n²`).
#[derive(Clone, Debug)]
pub struct StochCvpMdp {
    circuit: GateCircuit,
    truth: Vec<bool>,
    horizon: usize,
}

impl StochCvpMdp {
    pub fn new(circuit: GateCircuit) -> Result<Self> {
        if circuit.has_inputs() {
            return Err(Error::invalid("CVP circuits may not contain INPUT gates"));
        }
        let n = circuit.size();
        let truth = circuit.node_values(None)?;
        Ok(StochCvpMdp { circuit, truth, horizon: 3 * n * n })
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
}

impl Mdp for StochCvpMdp {
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

    fn is_deterministic(&self) -> bool {
        false
    }

    fn step(&self, s: &CvpState, a: usize) -> StepOutcome<CvpState> {
        let all_correct = s
            .v
            .iter()
            .zip(&self.truth)
            .all(|(v, &t)| v.known() == Some(t));
        let reward = if all_correct && s.v[self.n() - 1] == NodeValue::One { one() } else { zero() };
        let mut unknown = s.clone();
        unknown.v[a - 1] = NodeValue::Unknown;
        match node_output(self.circuit.node(a), &s.v, None) {
            Some(b) => {
                let mut hit = s.clone();
                hit.v[a - 1] = NodeValue::from_bool(b);
                StepOutcome { successors: vec![(hit, rat(2, 3)), (unknown, rat(1, 3))], reward }
            }
            None => StepOutcome::deterministic(unknown, reward),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Node;
    use crate::env::test_support::check_contract;
    use NodeValue::*;

    fn mdp() -> StochCvpMdp {
        let c = GateCircuit::new(vec![Node::constant(true), Node::constant(true), Node::and(1, 2)])
            .unwrap();
        StochCvpMdp::new(c).unwrap().with_horizon(5)
    }

    #[test]
    fn computable_node_branches() {
        let m = mdp();
        let s = CvpState { v: vec![One, One, Unknown] };
        let out = m.step(&s, 3);
        assert_eq!(
            out.successors,
            vec![
                (CvpState { v: vec![One, One, One] }, rat(2, 3)),
                (CvpState { v: vec![One, One, Unknown] }, rat(1, 3)),
            ]
        );
        let out = m.step(&m.initial_state(), 3);
        assert_eq!(out.successors, vec![(CvpState { v: vec![Unknown; 3] }, one())]);
    }

    #[test]
    fn reward_requires_all_correct() {
        let m = mdp();
        assert_eq!(m.step(&CvpState { v: vec![One, One, One] }, 1).reward, one());
        assert_eq!(m.step(&CvpState { v: vec![Unknown, One, One] }, 1).reward, zero());
    }

    #[test]
    fn contract() {
        check_contract(&mdp());
    }
}
