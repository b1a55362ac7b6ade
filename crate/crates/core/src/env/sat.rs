use serde::{Deserialize, Serialize};

use super::{Mdp, StepOutcome};
use crate::error::{Error, Result};
use crate::formula::{Assignment, Cnf3Formula};
use crate::rational::{half, one, zero};

/// 3-SAT MDP over a fixed formula. `k ∈ {0} ∪ [2n+2]`, horizon `n+2`.
#[derive(Clone, Debug)]
pub struct SatMdp {
    psi: Cnf3Formula,
    horizon: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SatState {
    pub v: Assignment,
    pub k: usize,
}

impl SatMdp {
    pub fn new(psi: Cnf3Formula) -> Self {
        let horizon = psi.n() + 2;
        SatMdp { psi, horizon }
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
        2 * self.n() + 2
    }

    pub fn state(&self, v: Assignment, k: usize) -> Result<SatState> {
        if v.len() != self.n() || k > self.max_k() {
            return Err(Error::invalid(format!(
                "invalid 3-SAT state (|v|={}, k={k}) for n={}",
                v.len(),
                self.n()
            )));
        }
        Ok(SatState { v, k })
    }
}

impl Mdp for SatMdp {
    type State = SatState;
    type Action = u8;

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn initial_state(&self) -> SatState {
        SatState { v: Assignment::zeros(self.n()), k: 0 }
    }

    fn actions(&self) -> Vec<u8> {
        vec![0, 1]
    }

    fn step(&self, s: &SatState, a: u8) -> StepOutcome<SatState> {
        let n = self.n();
        let reward = if s.k == n + 1 && self.psi.eval_unchecked(&s.v) {
            one()
        } else if s.k == 2 * n + 2 {
            half()
        } else {
            zero()
        };
        let mut next = s.clone();
        match (a, s.k) {
            (0, 0) => next.k = n + 2,
            (_, 0) => next.k = 1,
            (_, k) if k <= n => {
                next.v.set(k, a == 1);
                next.k = k + 1;
            }
            // the last index is absorbing; it is only ever reached at step H
            (_, k) => next.k = (k + 1).min(self.max_k()),
        }
        StepOutcome::deterministic(next, reward)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::test_support::check_contract;

    fn mdp(n: usize, c: &[[i64; 3]]) -> SatMdp {
        SatMdp::new(Cnf3Formula::from_signed(n, c).unwrap())
    }

    #[test]
    fn transition_cases() {
        let m = mdp(3, &[[1, 2, 3], [1, 2, 3], [1, 2, 3]]);
        let s0 = m.initial_state();
        assert_eq!(s0, SatState { v: Assignment::zeros(3), k: 0 });
        let out = m.step(&s0, 0);
        assert_eq!(out.successors[0].0.k, 5);
        assert_eq!(out.reward, zero());
        let s = m.state(Assignment::zeros(3), 1).unwrap();
        let out = m.step(&s, 1);
        assert_eq!(out.successors[0].0, SatState { v: Assignment(vec![true, false, false]), k: 2 });
        assert_eq!(out.reward, zero());
        let s = m.state(Assignment::zeros(3), 7).unwrap();
        let next = m.step(&s, 1).successors[0].0.clone();
        assert_eq!(next.k, 8);
        assert_eq!(m.step(&next, 0).reward, half());
        assert!(m.state(Assignment::zeros(3), 9).is_err());
    }

    #[test]
    fn reward_on_satisfying_assignment() {
        let m = mdp(2, &[[1, 1, 1], [2, 2, 2]]);
        let s = m.state(Assignment(vec![true, true]), 3).unwrap();
        assert_eq!(m.step(&s, 0).reward, one());
        let s = m.state(Assignment(vec![true, false]), 3).unwrap();
        assert_eq!(m.step(&s, 0).reward, zero());
    }

    #[test]
    fn contract_and_k_monotone() {
        for psi in Cnf3Formula::enumerate_all(1) {
            let m = SatMdp::new(psi);
            check_contract(&m);
            let mut s = m.initial_state();
            for a in [1, 0, 1, 1] {
                let next = m.step(&s, a).successors[0].0.clone();
                assert!(next.k >= s.k);
                s = next;
            }
        }
    }
}
