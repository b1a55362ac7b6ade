use serde::{Deserialize, Serialize};

use super::{Mdp, SatState, StepOutcome};
use crate::formula::{Assignment, Cnf3Formula};
use crate::rational::{half, one, rat, zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StochAction {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    Next,
}

/// Stochastic 3-SAT MDP: actions {0, 1, Next}, `k ∈ {0} ∪ [n²+2n+2]`,
/// horizon `n²+n+2`. Setting a bit succeeds with probability 2/3.
#[derive(Clone, Debug)]
pub struct StochSatMdp {
    psi: Cnf3Formula,
    horizon: usize,
}

impl StochSatMdp {
    pub fn new(psi: Cnf3Formula) -> Self {
        let n = psi.n();
        StochSatMdp { psi, horizon: n * n + n + 2 }
    }

    pub fn with_horizon(mut self, h: usize) -> Self {
        self.horizon = h;
        self
    }

    pub fn formula(&self) -> &Cnf3Formula {
        &self.psi
    }

    pub fn n(&self) -> usize {
        self.psi.n()
    }

    pub fn max_k(&self) -> usize {
        let n = self.n();
        n * n + 2 * n + 2
    }
}

impl Mdp for StochSatMdp {
    type State = SatState;
    type Action = StochAction;

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn initial_state(&self) -> SatState {
        SatState { v: Assignment::zeros(self.n()), k: 0 }
    }

    fn actions(&self) -> Vec<StochAction> {
        vec![StochAction::Zero, StochAction::One, StochAction::Next]
    }

    fn is_deterministic(&self) -> bool {
        false
    }

    fn step(&self, s: &SatState, a: StochAction) -> StepOutcome<SatState> {
        let n = self.n();
        let reward = if a == StochAction::Next && s.k == n + 1 && self.psi.eval_unchecked(&s.v) {
            one()
        } else if s.k == self.max_k() {
            half()
        } else {
            zero()
        };
        let with_k = |k: usize| SatState { v: s.v.clone(), k };
        let outcome = match (a, s.k) {
            (StochAction::Zero, 0) => StepOutcome::deterministic(with_k(n + 2), reward),
            (StochAction::One, 0) => StepOutcome::deterministic(with_k(1), reward),
            (StochAction::Next, k) => {
                StepOutcome::deterministic(with_k((k + 1).min(self.max_k())), reward)
            }
            (bit, k) if k <= n => {
                let b = bit == StochAction::One;
                let mut hit = s.clone();
                hit.v.set(k, b);
                let mut miss = s.clone();
                miss.v.set(k, !b);
                StepOutcome { successors: vec![(hit, rat(2, 3)), (miss, rat(1, 3))], reward }
            }
            _ => StepOutcome::deterministic(s.clone(), reward),
        };
        outcome
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::test_support::check_contract;

    fn mdp() -> StochSatMdp {
        StochSatMdp::new(Cnf3Formula::from_signed(2, &[[1, 1, 1], [2, 2, 2]]).unwrap())
    }

    #[test]
    fn bit_setting_is_two_thirds() {
        let m = mdp();
        let s = SatState { v: Assignment::zeros(2), k: 1 };
        let out = m.step(&s, StochAction::One);
        assert_eq!(
            out.successors,
            vec![
                (SatState { v: Assignment(vec![true, false]), k: 1 }, rat(2, 3)),
                (SatState { v: Assignment(vec![false, false]), k: 1 }, rat(1, 3)),
            ]
        );
        assert_eq!(out.reward, zero());
        let total: crate::rational::Rational = out.successors.iter().map(|x| x.1).sum();
        assert_eq!(total, one());
    }

    #[test]
    fn next_increments() {
        let m = mdp();
        for k in [0, 1, 3, 5] {
            let s = SatState { v: Assignment(vec![true, false]), k };
            let out = m.step(&s, StochAction::Next);
            assert_eq!(out.successors.len(), 1);
            assert_eq!(out.successors[0], (SatState { k: k + 1, ..s }, one()));
        }
    }

    #[test]
    fn reward_needs_next() {
        let m = mdp();
        let s = SatState { v: Assignment(vec![true, true]), k: 3 };
        assert_eq!(m.step(&s, StochAction::Next).reward, one());
        assert_eq!(m.step(&s, StochAction::One).reward, zero());
        let end = SatState { v: Assignment(vec![true, true]), k: m.max_k() };
        assert_eq!(m.step(&end, StochAction::Zero).reward, half());
        assert_eq!(m.horizon(), 8);
    }

    #[test]
    fn contract() {
        check_contract(&mdp());
    }
}
