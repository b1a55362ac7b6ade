use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::env::Mdp;
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Exact expected return of a deterministic, possibly step-dependent policy
/// over `horizon` steps. `policy(h, s)` with `h` starting at 1.
pub fn policy_value<M, P>(mdp: &M, s0: M::State, horizon: usize, policy: P) -> Result<Rational>
where
    M: Mdp,
    P: Fn(usize, &M::State) -> Option<M::Action>,
{
    let mut dist: BTreeMap<M::State, Rational> = [(s0, Rational::from_integer(1))].into();
    let mut total = Rational::zero();
    for h in 1..=horizon {
        let mut next: BTreeMap<M::State, Rational> = BTreeMap::new();
        for (s, p) in &dist {
            let a = policy(h, s).ok_or_else(|| Error::InvalidPolicy {
                step: h,
                state: format!("{s:?}"),
            })?;
            let out = mdp.step(s, a);
            total += *p * out.reward;
            if h < horizon {
                for (s2, q) in out.successors {
                    *next.entry(s2).or_insert_with(Rational::zero) += *p * q;
                }
            }
        }
        dist = next;
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory<S, A> {
    /// `(state, action, reward)` for each of the H steps.
    pub steps: Vec<(S, A, Rational)>,
    pub ret: Rational,
}

/// Samples one trajectory. Single-successor steps draw nothing from the RNG,
/// so deterministic families give seed-independent trajectories.
pub fn rollout<M, P>(
    mdp: &M,
    s0: M::State,
    horizon: usize,
    policy: P,
    seed: u64,
) -> Result<Trajectory<M::State, M::Action>>
where
    M: Mdp,
    P: Fn(usize, &M::State) -> Option<M::Action>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = s0;
    let mut steps = Vec::with_capacity(horizon);
    let mut ret = Rational::zero();
    for h in 1..=horizon {
        let a = policy(h, &s).ok_or_else(|| Error::InvalidPolicy {
            step: h,
            state: format!("{s:?}"),
        })?;
        let mut out = mdp.step(&s, a);
        ret += out.reward;
        let next = if out.successors.len() == 1 {
            out.successors.pop().unwrap().0
        } else {
            let denom = out
                .successors
                .iter()
                .fold(1i128, |acc, (_, p)| acc.lcm(p.denom()));
            let draw = rng.gen_range(0..denom);
            let mut acc = 0i128;
            let mut chosen = None;
            for (s2, p) in out.successors {
                acc += p.numer() * (denom / p.denom());
                if draw < acc {
                    chosen = Some(s2);
                    break;
                }
            }
            chosen.expect("probabilities sum to one")
        };
        steps.push((s, a, out.reward));
        s = next;
    }
    Ok(Trajectory { steps, ret })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{GateCircuit, Node};
    use crate::env::{cvp_optimal_policy, CvpMdp, SatMdp, StochAction, StochSatMdp};
    use crate::formula::Cnf3Formula;
    use crate::oracle::{exact_dp, Ceiling};
    use crate::rational::{half, rational_to_f64};

    fn psi() -> Cnf3Formula {
        Cnf3Formula::from_signed(2, &[[1, 2, 1], [-1, 2, -2]]).unwrap()
    }

    #[test]
    fn give_up_policy_is_half() {
        let m = SatMdp::new(psi());
        let v = policy_value(&m, m.initial_state(), m.horizon(), |_, _| Some(0)).unwrap();
        assert_eq!(v, half());
    }

    #[test]
    fn unit_horizon() {
        let m = SatMdp::new(psi());
        let s0 = m.initial_state();
        let v = policy_value(&m, s0.clone(), 1, |_, _| Some(1)).unwrap();
        assert_eq!(v, m.step(&s0, 1).reward);
    }

    #[test]
    fn undefined_policy_names_the_state() {
        let m = SatMdp::new(psi());
        let err = policy_value(&m, m.initial_state(), m.horizon(), |h, _| (h < 2).then_some(1))
            .unwrap_err();
        match err {
            Error::InvalidPolicy { step, state } => {
                assert_eq!(step, 2);
                assert!(state.contains("k: 1"), "{state}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn greedy_cvp_matches_dp_on_full_cone() {
        let c = GateCircuit::new(vec![
            Node::constant(true),
            Node::not(1),
            Node::or(1, 2),
        ])
        .unwrap();
        let m = CvpMdp::new(c.clone()).unwrap();
        let sol = exact_dp(&m, &Ceiling::default()).unwrap();
        let v = policy_value(&m, m.initial_state(), m.horizon(), |_, s| {
            Some(cvp_optimal_policy(&c, s))
        })
        .unwrap();
        assert_eq!(v, sol.v1());
    }

    #[test]
    fn deterministic_rollouts_ignore_seed() {
        let m = SatMdp::new(psi());
        let a = rollout(&m, m.initial_state(), m.horizon(), |_, _| Some(1), 1).unwrap();
        let b = rollout(&m, m.initial_state(), m.horizon(), |_, _| Some(1), 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.steps.len(), m.horizon());
    }

    #[test]
    fn stochastic_rollouts_track_exact_value() {
        let m = StochSatMdp::new(psi());
        let sol = exact_dp(&m, &Ceiling::default()).unwrap();
        let pi = |h: usize, s: &crate::env::SatState| sol.policy(h, s);
        let exact = policy_value(&m, m.initial_state(), m.horizon(), pi).unwrap();
        assert_eq!(exact, sol.v1());
        let runs = 100_000u64;
        let mut sum = 0.0;
        let mut sq = 0.0;
        for seed in 0..runs {
            let t = rollout(&m, m.initial_state(), m.horizon(), pi, seed).unwrap();
            let r = rational_to_f64(&t.ret);
            sum += r;
            sq += r * r;
        }
        let mean = sum / runs as f64;
        let var = sq / runs as f64 - mean * mean;
        let se = (var / runs as f64).sqrt();
        assert!((mean - rational_to_f64(&exact)).abs() <= 3.0 * se + 1e-12, "{mean} vs {exact}");
        let t = rollout(&m, m.initial_state(), m.horizon(), |_, _| Some(StochAction::Next), 3).unwrap();
        assert_eq!(t.steps.len(), m.horizon());
    }
}
