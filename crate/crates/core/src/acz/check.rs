//! Equivalence of built circuits with the direct step functions over the
//! reachable state space of a concrete instance.

use super::{decode_reward, encode_reward, CvpLayout, ModelCircuits, NpLayout, SatLayout};
use super::BoolCircuit;
use crate::circuit::GateCircuit;
use crate::env::{CvpMdp, Mdp, NpMdp, PMdp, SatMdp};
use crate::equiv::{EquivReport, Mismatch};
use crate::error::Result;
use crate::oracle::{enumerate_reachable, Ceiling};

fn bits(b: &[bool]) -> String {
    b.iter().map(|&x| if x { '1' } else { '0' }).collect()
}

/// All `(state, action)` pairs reachable within the horizon.
pub fn reachable_pairs<M: Mdp>(mdp: &M, ceiling: &Ceiling) -> Result<Vec<(M::State, M::Action)>> {
    let layers = enumerate_reachable(mdp, mdp.initial_state(), mdp.horizon(), ceiling)?;
    let mut seen = std::collections::BTreeSet::new();
    for s in layers.into_iter().flatten() {
        seen.insert(s);
    }
    let actions = mdp.actions();
    Ok(seen
        .into_iter()
        .flat_map(|s| actions.iter().map(move |&a| (s.clone(), a)))
        .collect())
}

/// Distinct reachable states.
pub fn reachable_states<M: Mdp>(mdp: &M, ceiling: &Ceiling) -> Result<Vec<M::State>> {
    let layers = enumerate_reachable(mdp, mdp.initial_state(), mdp.horizon(), ceiling)?;
    let set: std::collections::BTreeSet<M::State> = layers.into_iter().flatten().collect();
    Ok(set.into_iter().collect())
}

fn compare<M: Mdp>(
    mdp: &M,
    circuits: &ModelCircuits,
    pairs: &[(M::State, M::Action)],
    input: impl Fn(&M::State, M::Action) -> Vec<bool> + Sync,
    encode_next: impl Fn(&M::State) -> Vec<bool> + Sync,
) -> EquivReport {
    EquivReport::run(pairs, |(s, a)| {
        let x = input(s, *a);
        let out = mdp.step(s, *a);
        let want_r = encode_reward(&out.reward);
        let got_r = circuits.reward.eval(&x);
        let want_s = encode_next(&out.successors[0].0);
        let got_s = circuits.transition.eval(&x);
        if got_r[..] == want_r[..] && got_s == want_s {
            return None;
        }
        let got_reward = decode_reward(&got_r).map_or("invalid".to_string(), |r| r.to_string());
        Some(Mismatch {
            point: format!("{s:?} a={a:?}"),
            expected: format!("r={} s'={}", out.reward, bits(&want_s)),
            got: format!("r={got_reward} s'={}", bits(&got_s)),
        })
    })
}

pub fn check_sat_circuits(mdp: &SatMdp, circuits: &ModelCircuits, ceiling: &Ceiling) -> Result<EquivReport> {
    let lay = SatLayout::new(mdp.n());
    let psi = mdp.formula();
    let pairs = reachable_pairs(mdp, ceiling)?;
    Ok(compare(
        mdp,
        circuits,
        &pairs,
        |s, a| lay.encode_input(psi, s, a == 1),
        |s| lay.encode_state(psi, s),
    ))
}

pub fn check_cvp_circuits(mdp: &CvpMdp, circuits: &ModelCircuits, ceiling: &Ceiling) -> Result<EquivReport> {
    let lay = CvpLayout::new(mdp.n(), 0);
    let c = mdp.circuit();
    let pairs = reachable_pairs(mdp, ceiling)?;
    Ok(compare(
        mdp,
        circuits,
        &pairs,
        |s, a| lay.encode_input(c, &[], &s.v, a),
        |s| lay.encode_state(c, &[], &s.v),
    ))
}

pub fn check_p_circuits(mdp: &PMdp, circuits: &ModelCircuits, ceiling: &Ceiling) -> Result<EquivReport> {
    let lay = CvpLayout::new(mdp.p(), mdp.x().len());
    let (c, x) = (mdp.circuit(), mdp.x());
    let pairs = reachable_pairs(mdp, ceiling)?;
    Ok(compare(
        mdp,
        circuits,
        &pairs,
        |s, a| lay.encode_input(c, x, &s.v, a),
        |s| lay.encode_state(c, x, &s.v),
    ))
}

pub fn check_np_circuits(mdp: &NpMdp, circuits: &ModelCircuits, ceiling: &Ceiling) -> Result<EquivReport> {
    let lay = NpLayout::new(mdp.spec());
    let pairs = reachable_pairs(mdp, ceiling)?;
    Ok(compare(
        mdp,
        circuits,
        &pairs,
        |s, a| lay.encode_input(s, a == 1),
        |s| lay.encode_state(s),
    ))
}

fn check_policy<S: Sync + std::fmt::Debug>(
    states: &[S],
    circuit: &BoolCircuit,
    lay: &CvpLayout,
    encode: impl Fn(&S) -> Vec<bool> + Sync,
    policy: impl Fn(&S) -> usize + Sync,
) -> EquivReport {
    EquivReport::run(states, |s| {
        let want = lay.encode_action(policy(s));
        let got = circuit.eval(&encode(s));
        (got != want).then(|| Mismatch {
            point: format!("{s:?}"),
            expected: format!("{} ({})", policy(s), bits(&want)),
            got: format!("{} ({})", super::from_bits(&got), bits(&got)),
        })
    })
}

pub fn check_cvp_policy_circuit(mdp: &CvpMdp, circuit: &BoolCircuit, ceiling: &Ceiling) -> Result<EquivReport> {
    let lay = CvpLayout::new(mdp.n(), 0);
    let c: &GateCircuit = mdp.circuit();
    let states = reachable_states(mdp, ceiling)?;
    Ok(check_policy(&states, circuit, &lay, |s| lay.encode_state(c, &[], &s.v), |s| mdp.policy(s)))
}

pub fn check_p_policy_circuit(mdp: &PMdp, circuit: &BoolCircuit, ceiling: &Ceiling) -> Result<EquivReport> {
    let lay = CvpLayout::new(mdp.p(), mdp.x().len());
    let (c, x) = (mdp.circuit(), mdp.x());
    let states = reachable_states(mdp, ceiling)?;
    Ok(check_policy(&states, circuit, &lay, |s| lay.encode_state(c, x, &s.v), |s| mdp.policy(s)))
}
