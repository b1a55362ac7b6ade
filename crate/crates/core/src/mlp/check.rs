//! Exact agreement of built networks with the step functions and policies.

use std::fmt::Debug;

use super::embed;
use super::{Mlp, ModelMlps};
use crate::acz::check::{reachable_pairs, reachable_states};
use crate::env::{CvpMdp, Mdp, NpMdp, PMdp, SatMdp};
use crate::equiv::{EquivReport, Mismatch};
use crate::error::Result;
use crate::oracle::Ceiling;
use crate::rational::{format_rational, rat, Rational};

fn show(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().map(format_rational).collect();
    format!("[{}]", parts.join(","))
}

fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| rat(x as i128, 1)).collect()
}

/// Compares the rounded forward pass with `reference` on every point, and
/// also requires every intermediate to match the unrounded pass.
pub fn mlp_equiv_check<P: Sync + Debug>(
    m: &Mlp,
    points: &[P],
    input: impl Fn(&P) -> Vec<f64> + Sync,
    reference: impl Fn(&P) -> Vec<Rational> + Sync,
) -> EquivReport {
    EquivReport::run(points, |p| {
        let x = input(p);
        let want = reference(p);
        let got = m.forward_rational(&x).and_then(|out| Ok((out, m.rounding_is_exact(&x)?)));
        match got {
            Ok((out, true)) if out == want => None,
            Ok((out, exact)) => Some(Mismatch {
                point: format!("{p:?}"),
                expected: show(&want),
                got: if exact { show(&out) } else { format!("{} (rounding differs)", show(&out)) },
            }),
            Err(e) => Some(Mismatch { point: format!("{p:?}"), expected: show(&want), got: format!("error: {e}") }),
        }
    })
}

fn compare<M: Mdp>(
    mdp: &M,
    mlps: &ModelMlps,
    ceiling: &Ceiling,
    state: impl Fn(&M::State) -> Vec<i64> + Sync,
    action: impl Fn(M::Action) -> i64 + Sync,
) -> Result<EquivReport> {
    let pairs = reachable_pairs(mdp, ceiling)?;
    let input = |(s, a): &(M::State, M::Action)| -> Vec<f64> {
        let mut e = state(s);
        e.push(action(*a));
        e.iter().map(|&v| v as f64).collect()
    };
    let mut report = mlp_equiv_check(&mlps.reward, &pairs, input, |(s, a)| vec![mdp.step(s, *a).reward]);
    report.merge(mlp_equiv_check(&mlps.transition, &pairs, input, |(s, a)| {
        ints(&state(&mdp.step(s, *a).successors[0].0))
    }));
    Ok(report)
}

pub fn check_sat_mlps(mdp: &SatMdp, mlps: &ModelMlps, ceiling: &Ceiling) -> Result<EquivReport> {
    let psi = mdp.formula();
    compare(mdp, mlps, ceiling, |s| embed::sat_state(psi, s), |a| a as i64)
}

pub fn check_np_mlps(mdp: &NpMdp, mlps: &ModelMlps, ceiling: &Ceiling) -> Result<EquivReport> {
    compare(mdp, mlps, ceiling, embed::np_state, |a| a as i64)
}

pub fn check_cvp_mlps(mdp: &CvpMdp, mlps: &ModelMlps, ceiling: &Ceiling) -> Result<EquivReport> {
    let c = mdp.circuit();
    compare(mdp, mlps, ceiling, |s| embed::cvp_state(c, &s.v), |a| a as i64)
}

pub fn check_p_mlps(mdp: &PMdp, mlps: &ModelMlps, ceiling: &Ceiling) -> Result<EquivReport> {
    let (c, x) = (mdp.circuit(), mdp.x());
    compare(mdp, mlps, ceiling, |s| embed::p_state(c, x, &s.v), |a| a as i64)
}

fn check_policy<M: Mdp>(
    mdp: &M,
    m: &Mlp,
    ceiling: &Ceiling,
    state: impl Fn(&M::State) -> Vec<i64> + Sync,
    policy: impl Fn(&M::State) -> usize + Sync,
) -> Result<EquivReport> {
    let states = reachable_states(mdp, ceiling)?;
    Ok(mlp_equiv_check(
        m,
        &states,
        |s| state(s).iter().map(|&v| v as f64).collect(),
        |s| vec![rat(policy(s) as i128, 1)],
    ))
}

pub fn check_cvp_policy_mlp(mdp: &CvpMdp, m: &Mlp, ceiling: &Ceiling) -> Result<EquivReport> {
    let c = mdp.circuit();
    check_policy(mdp, m, ceiling, |s| embed::cvp_state(c, &s.v), |s| mdp.policy(s))
}

pub fn check_p_policy_mlp(mdp: &PMdp, m: &Mlp, ceiling: &Ceiling) -> Result<EquivReport> {
    let (c, x) = (mdp.circuit(), mdp.x());
    check_policy(mdp, m, ceiling, |s| embed::p_state(c, x, &s.v), |s| mdp.policy(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{GateCircuit, Node};
    use crate::env::{Family, NodeValue};
    use crate::formula::Cnf3Formula;
    use crate::generate::{random_bits, random_circuit, random_formula, random_input_circuit};
    use crate::mlp::gates::{build_gate_mlp, GateMlpKind};
    use crate::mlp::{build_model_mlp, build_policy_mlp, cvp_model_mlps, cvp_policy_mlp, np_model_mlps,
        p_model_mlps, p_policy_mlp, sat_model_mlps};
    use crate::ndtm::fixtures;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn at_precisions(mlps: &ModelMlps, f: impl Fn(&ModelMlps) -> EquivReport) {
        for bits in [8, 16, 32] {
            let m = ModelMlps {
                reward: mlps.reward.with_precision(bits).unwrap(),
                transition: mlps.transition.with_precision(bits).unwrap(),
            };
            let r = f(&m);
            assert!(r.passed(), "precision {bits}: {:?}", r.witnesses);
        }
    }

    #[test]
    fn sat_exhaustive_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..=3 {
            let mlps = sat_model_mlps(n).unwrap();
            for _ in 0..3 {
                let mdp = SatMdp::new(random_formula(n, &mut rng));
                at_precisions(&mlps, |m| check_sat_mlps(&mdp, m, &Ceiling::default()).unwrap());
            }
        }
        // a satisfiable instance exercises the reward-1 branch
        let psi = Cnf3Formula::from_signed(2, &[[1, 1, 2], [-2, 1, 1]]).unwrap();
        let r = check_sat_mlps(&SatMdp::new(psi), &sat_model_mlps(2).unwrap(), &Ceiling::default()).unwrap();
        assert!(r.passed(), "{:?}", r.witnesses);
    }

    #[test]
    fn cvp_and_policy() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in 2..=3 {
            let mlps = cvp_model_mlps(n).unwrap();
            let pol = cvp_policy_mlp(n).unwrap();
            for _ in 0..4 {
                let mdp = CvpMdp::new(random_circuit(n, &mut rng)).unwrap();
                at_precisions(&mlps, |m| check_cvp_mlps(&mdp, m, &Ceiling::default()).unwrap());
                let r = check_cvp_policy_mlp(&mdp, &pol, &Ceiling::default()).unwrap();
                assert!(r.passed(), "{:?}", r.witnesses);
            }
        }
    }

    #[test]
    fn policy_leaf_first() {
        let c = GateCircuit::new(vec![Node::constant(false), Node::not(1), Node::or(1, 2)]).unwrap();
        let pol = cvp_policy_mlp(3).unwrap();
        let x: Vec<f64> = embed::cvp_state(&c, &[NodeValue::Unknown; 3]).iter().map(|&v| v as f64).collect();
        assert_eq!(pol.forward(&x).unwrap(), vec![1.0]);
    }

    #[test]
    fn p_and_policy() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for n in 2..=3 {
            let (size, m) = (2 * n - 1, n);
            let mlps = p_model_mlps(size, m).unwrap();
            let pol = p_policy_mlp(size, m).unwrap();
            for _ in 0..3 {
                let c = random_input_circuit(size, m, &mut rng);
                let x = random_bits(m, &mut rng);
                let mdp = PMdp::new(c, x).unwrap();
                at_precisions(&mlps, |mm| check_p_mlps(&mdp, mm, &Ceiling::default()).unwrap());
                let r = check_p_policy_mlp(&mdp, &pol, &Ceiling::default()).unwrap();
                assert!(r.passed(), "{:?}", r.witnesses);
            }
        }
    }

    #[test]
    fn np_fixtures() {
        for n in 2..=3 {
            let spec = fixtures::guess_match(&fixtures::alternating(n), n + 2).unwrap();
            let mlps = np_model_mlps(&spec).unwrap();
            for input in [vec![], vec![true], vec![false, true]] {
                let mdp = NpMdp::new(spec.clone(), input).unwrap();
                at_precisions(&mlps, |m| check_np_mlps(&mdp, m, &Ceiling::default()).unwrap());
            }
        }
        let spec = fixtures::contains_one(4);
        let mlps = np_model_mlps(&spec).unwrap();
        let mdp = NpMdp::new(spec, vec![false, true]).unwrap();
        assert!(check_np_mlps(&mdp, &mlps, &Ceiling::default()).unwrap().passed());
    }

    #[test]
    fn corrupted_weight_is_caught() {
        let mut m = build_gate_mlp(GateMlpKind::And, 3).unwrap();
        m.layers_mut()[0].bias[0] = -1.0;
        let pts: Vec<Vec<bool>> = (0..8usize).map(|c| (0..3).map(|i| c >> i & 1 == 1).collect()).collect();
        let r = mlp_equiv_check(
            &m,
            &pts,
            |x| x.iter().map(|&b| b as u8 as f64).collect(),
            |x| vec![rat(GateMlpKind::And.truth(x) as i128, 1)],
        );
        assert!(r.mismatches >= 1);
        assert!(r.witnesses[0].point.contains("true"));
        let empty: Vec<Vec<bool>> = vec![];
        let r = mlp_equiv_check(&m, &empty, |_| vec![], |_| vec![]);
        assert_eq!(r.points, 0);
        assert!(r.empty_domain && !r.passed());
    }

    #[test]
    fn constant_layer_counts() {
        for fam in [Family::Sat, Family::Np, Family::Cvp, Family::P] {
            let counts: Vec<(usize, usize)> = (2..=6)
                .map(|n| {
                    let m = build_model_mlp(fam, n).unwrap();
                    (m.reward.layer_count(), m.transition.layer_count())
                })
                .collect();
            assert!(counts.windows(2).all(|w| w[0] == w[1]), "{fam}: {counts:?}");
        }
        for fam in [Family::Cvp, Family::P] {
            let counts: Vec<usize> = (2..=6).map(|n| build_policy_mlp(fam, n).unwrap().layer_count()).collect();
            assert!(counts.windows(2).all(|w| w[0] == w[1]), "{fam}: {counts:?}");
        }
    }

    #[test]
    #[ignore]
    fn print_stats() {
        for fam in [Family::Sat, Family::Np, Family::Cvp, Family::P] {
            for n in 2..=6 {
                let m = build_model_mlp(fam, n).unwrap();
                println!(
                    "{fam} n={n} reward L={} w={} transition L={} w={}",
                    m.reward.layer_count(),
                    m.reward.max_hidden_width(),
                    m.transition.layer_count(),
                    m.transition.max_hidden_width()
                );
            }
        }
        for fam in [Family::Cvp, Family::P] {
            for n in 2..=6 {
                let m = build_policy_mlp(fam, n).unwrap();
                println!("{fam} policy n={n} L={} w={}", m.layer_count(), m.max_hidden_width());
            }
        }
    }
}
