use serde::{Deserialize, Serialize};

use super::{Mdp, StepOutcome};
use crate::error::Result;
use crate::ndtm::{Configuration, NdtmSpec};
use crate::rational::{half, one, zero};

/// NP MDP for a machine and a fixed input. `P = stepBound`, horizon `P+2`.
#[derive(Clone, Debug)]
pub struct NpMdp {
    spec: NdtmSpec,
    input: Vec<bool>,
    c0: Configuration,
    horizon: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NpState {
    pub c: Configuration,
    pub k: usize,
}

impl NpMdp {
    pub fn new(spec: NdtmSpec, input: Vec<bool>) -> Result<Self> {
        let c0 = spec.initial_config(&input)?;
        let horizon = spec.step_bound() + 2;
        Ok(NpMdp { spec, input, c0, horizon })
    }

    pub fn with_horizon(mut self, h: usize) -> Self {
        self.horizon = h;
        self
    }

    pub fn spec(&self) -> &NdtmSpec {
        &self.spec
    }

    pub fn input(&self) -> &[bool] {
        &self.input
    }

    pub fn p(&self) -> usize {
        self.spec.step_bound()
    }

    pub fn max_k(&self) -> usize {
        2 * self.p() + 2
    }
}

impl Mdp for NpMdp {
    type State = NpState;
    type Action = u8;

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn initial_state(&self) -> NpState {
        NpState { c: self.c0.clone(), k: 0 }
    }

    fn actions(&self) -> Vec<u8> {
        vec![0, 1]
    }

    fn step(&self, s: &NpState, a: u8) -> StepOutcome<NpState> {
        let p = self.p();
        let reward = if s.k == p + 1 && s.c.state == self.spec.accept() {
            one()
        } else if s.k == 2 * p + 2 {
            half()
        } else {
            zero()
        };
        let next = match (a, s.k) {
            (0, 0) => NpState { c: s.c.clone(), k: p + 2 },
            (_, 0) => NpState { c: s.c.clone(), k: 1 },
            (_, k) if k <= p => NpState { c: self.spec.advance(&s.c, a == 1), k: k + 1 },
            (_, k) => NpState { c: s.c.clone(), k: (k + 1).min(self.max_k()) },
        };
        StepOutcome::deterministic(next, reward)
    }
}
