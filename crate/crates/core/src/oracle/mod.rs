//! Exact finite-horizon dynamic programming over the reachable state graph.

use std::collections::HashMap;

use num_traits::Zero;
use rayon::prelude::*;

use crate::env::{Mdp, StepOutcome};
use crate::error::{Error, Result};
use crate::rational::Rational;

mod export;
mod policy;

pub use policy::{policy_value, rollout, Trajectory};

pub const DEFAULT_CEILING_STATES: usize = 5_000_000;
pub const CEILING_ENV: &str = "MDPZOO_CEILING_STATES";

/// Upper bound on the number of states in any single horizon layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ceiling {
    pub max_layer_states: usize,
}

impl Ceiling {
    pub fn new(max_layer_states: usize) -> Self {
        Ceiling { max_layer_states }
    }

    /// The default, overridden by `MDPZOO_CEILING_STATES` when set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(CEILING_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map(Ceiling::new)
                .map_err(|_| Error::invalid(format!("{CEILING_ENV}={v:?} is not a count"))),
            Err(_) => Ok(Ceiling::new(DEFAULT_CEILING_STATES)),
        }
    }
}

impl Default for Ceiling {
    fn default() -> Self {
        Ceiling::new(DEFAULT_CEILING_STATES)
    }
}

fn limit_error(h: usize, actual: usize, ceiling: &Ceiling) -> Error {
    Error::ResourceLimit {
        what: "reachable states in layer",
        actual,
        limit: ceiling.max_layer_states,
        layer: Some(h),
    }
}

/// Layer `h` (0-based index `h-1`) holds the states reachable in `h-1` steps.
pub fn enumerate_reachable<M: Mdp>(
    mdp: &M,
    s0: M::State,
    horizon: usize,
    ceiling: &Ceiling,
) -> Result<Vec<Vec<M::State>>> {
    let actions = mdp.actions();
    let mut layers = vec![vec![s0]];
    for h in 2..=horizon {
        let prev = layers.last().unwrap();
        let outcomes: Vec<Vec<StepOutcome<M::State>>> = prev
            .par_iter()
            .map(|s| actions.iter().map(|&a| mdp.step(s, a)).collect())
            .collect();
        let mut index: HashMap<M::State, u32> = HashMap::new();
        let mut next = Vec::new();
        for out in outcomes.into_iter().flatten() {
            for (s, _) in out.successors {
                if !index.contains_key(&s) {
                    if next.len() >= ceiling.max_layer_states {
                        return Err(limit_error(h, next.len() + 1, ceiling));
                    }
                    index.insert(s.clone(), next.len() as u32);
                    next.push(s);
                }
            }
        }
        layers.push(next);
    }
    Ok(layers)
}

#[derive(Clone, Debug)]
struct Edge {
    reward: Rational,
    successors: Vec<(u32, Rational)>,
}

/// One horizon layer of the solution.
#[derive(Clone, Debug)]
pub struct DpLayer<S> {
    pub states: Vec<S>,
    index: HashMap<S, u32>,
    /// `V*_h` per state.
    pub values: Vec<Rational>,
    /// `Q*_h` per state, indexed like `DpSolution::actions`.
    pub q: Vec<Vec<Rational>>,
    /// Index into `DpSolution::actions` of the tie-broken argmax.
    pub policy: Vec<usize>,
    edges: Vec<Vec<Edge>>,
}

impl<S: std::hash::Hash + Eq> DpLayer<S> {
    pub fn position(&self, s: &S) -> Option<usize> {
        self.index.get(s).map(|&i| i as usize)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct DpSolution<S, A> {
    pub horizon: usize,
    pub actions: Vec<A>,
    pub layers: Vec<DpLayer<S>>,
}

pub fn exact_dp<M: Mdp>(mdp: &M, ceiling: &Ceiling) -> Result<DpSolution<M::State, M::Action>> {
    exact_dp_from(mdp, mdp.initial_state(), mdp.horizon(), ceiling)
}

pub fn exact_dp_from<M: Mdp>(
    mdp: &M,
    s0: M::State,
    horizon: usize,
    ceiling: &Ceiling,
) -> Result<DpSolution<M::State, M::Action>> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    let mut actions = mdp.actions();
    actions.sort();
    let mut layers: Vec<DpLayer<M::State>> = Vec::with_capacity(horizon);
    let mut states = vec![s0.clone()];
    let mut index: HashMap<M::State, u32> = [(s0, 0)].into_iter().collect();

    // forward pass: layer h's edges point into layer h+1
    for h in 1..=horizon {
        let outcomes: Vec<Vec<StepOutcome<M::State>>> = states
            .par_iter()
            .map(|s| actions.iter().map(|&a| mdp.step(s, a)).collect())
            .collect();
        let mut next_states = Vec::new();
        let mut next_index: HashMap<M::State, u32> = HashMap::new();
        let mut edges = Vec::with_capacity(outcomes.len());
        let last = h == horizon;
        for outs in outcomes {
            let mut row = Vec::with_capacity(outs.len());
            for out in outs {
                let mut succ = Vec::with_capacity(if last { 0 } else { out.successors.len() });
                if !last {
                    for (s, p) in out.successors {
                        let id = match next_index.get(&s) {
                            Some(&id) => id,
                            None => {
                                if next_states.len() >= ceiling.max_layer_states {
                                    return Err(limit_error(h + 1, next_states.len() + 1, ceiling));
                                }
                                let id = next_states.len() as u32;
                                next_index.insert(s.clone(), id);
                                next_states.push(s);
                                id
                            }
                        };
                        succ.push((id, p));
                    }
                }
                row.push(Edge { reward: out.reward, successors: succ });
            }
            edges.push(row);
        }
        let n = states.len();
        layers.push(DpLayer {
            states: std::mem::replace(&mut states, next_states),
            index: std::mem::replace(&mut index, next_index),
            values: vec![Rational::zero(); n],
            q: Vec::new(),
            policy: Vec::new(),
            edges,
        });
    }

    // backward induction
    let mut next_values: Vec<Rational> = Vec::new();
    for layer in layers.iter_mut().rev() {
        let solved: Vec<(Vec<Rational>, usize, Rational)> = layer
            .edges
            .par_iter()
            .map(|row| {
                let q: Vec<Rational> = row
                    .iter()
                    .map(|e| {
                        e.successors
                            .iter()
                            .fold(e.reward, |acc, &(id, p)| acc + p * next_values[id as usize])
                    })
                    .collect();
                let mut best = 0;
                for (i, qa) in q.iter().enumerate() {
                    if *qa > q[best] {
                        best = i;
                    }
                }
                let v = q[best];
                (q, best, v)
            })
            .collect();
        let mut qs = Vec::with_capacity(solved.len());
        let mut pol = Vec::with_capacity(solved.len());
        let mut vals = Vec::with_capacity(solved.len());
        for (q, best, v) in solved {
            qs.push(q);
            pol.push(best);
            vals.push(v);
        }
        layer.q = qs;
        layer.policy = pol;
        layer.values = vals;
        next_values = layer.values.clone();
    }

    Ok(DpSolution { horizon, actions, layers })
}

impl<S, A> DpSolution<S, A>
where
    S: Clone + Eq + std::hash::Hash + std::fmt::Debug,
    A: Copy + Eq + std::fmt::Debug,
{
    fn action_index(&self, a: A) -> usize {
        self.actions
            .iter()
            .position(|&b| b == a)
            .unwrap_or_else(|| panic!("{a:?} is not an action of this MDP"))
    }

    pub fn initial_state(&self) -> &S {
        &self.layers[0].states[0]
    }

    /// `V*_1(s0)`.
    pub fn v1(&self) -> Rational {
        self.layers[0].values[0]
    }

    /// `Q*_1(s0, a)`.
    pub fn q1(&self, a: A) -> Rational {
        self.layers[0].q[0][self.action_index(a)]
    }

    /// `π*_1(s0)`.
    pub fn pi1(&self) -> A {
        self.actions[self.layers[0].policy[0]]
    }

    pub fn value(&self, h: usize, s: &S) -> Option<Rational> {
        let layer = self.layers.get(h.checked_sub(1)?)?;
        layer.position(s).map(|i| layer.values[i])
    }

    pub fn q(&self, h: usize, s: &S, a: A) -> Option<Rational> {
        let layer = self.layers.get(h.checked_sub(1)?)?;
        layer.position(s).map(|i| layer.q[i][self.action_index(a)])
    }

    pub fn policy(&self, h: usize, s: &S) -> Option<A> {
        let layer = self.layers.get(h.checked_sub(1)?)?;
        layer.position(s).map(|i| self.actions[layer.policy[i]])
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(|l| l.len()).collect()
    }

    pub fn total_states(&self) -> usize {
        self.layers.iter().map(|l| l.len()).sum()
    }

    /// Re-derives every stored `Q*_h(s,a)` from a fresh call to `step` and
    /// the stored `V*_{h+1}`, and checks `V* = max Q*`, the terminal layer,
    /// and the `[0, H]` value range. Returns the first violation.
    pub fn check_bellman<M>(&self, mdp: &M) -> std::result::Result<(), String>
    where
        M: Mdp<State = S, Action = A>,
    {
        let h_max = Rational::from_integer(self.horizon as i128);
        for (hi, layer) in self.layers.iter().enumerate() {
            let h = hi + 1;
            let next = self.layers.get(hi + 1);
            for (si, s) in layer.states.iter().enumerate() {
                let mut max = None::<Rational>;
                for (ai, &a) in self.actions.iter().enumerate() {
                    let out = mdp.step(s, a);
                    let mut expect = Rational::zero();
                    if let Some(next) = next {
                        for (s2, p) in &out.successors {
                            let v = next
                                .position(s2)
                                .map(|j| next.values[j])
                                .ok_or_else(|| format!("h={h}: successor {s2:?} of {s:?} not stored"))?;
                            expect += *p * v;
                        }
                    }
                    let q = layer.q[si][ai];
                    if q - out.reward != expect {
                        return Err(format!(
                            "h={h} s={s:?} a={a:?}: Q-r = {} but E[V'] = {expect}",
                            q - out.reward
                        ));
                    }
                    max = Some(max.map_or(q, |m: Rational| m.max(q)));
                }
                let v = layer.values[si];
                if Some(v) != max {
                    return Err(format!("h={h} s={s:?}: V {v} is not max Q"));
                }
                if layer.q[si][layer.policy[si]] != v {
                    return Err(format!("h={h} s={s:?}: policy action is not an argmax"));
                }
                if v < Rational::zero() || v > h_max {
                    return Err(format!("h={h} s={s:?}: V {v} outside [0, H]"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{GateCircuit, Node};
    use crate::env::{CvpMdp, SatMdp, SatState, StochSatMdp};
    use crate::formula::{Assignment, Cnf3Formula};
    use crate::rational::{half, one, zero};

    fn sat(c: &[[i64; 3]]) -> SatMdp {
        SatMdp::new(Cnf3Formula::from_signed(2, c).unwrap())
    }

    // brute force over all 2^H open-loop action sequences (deterministic MDP)
    fn best_sequence_value(m: &SatMdp, first: Option<u8>) -> crate::rational::Rational {
        let h = m.horizon();
        let mut best = None;
        for seq in 0u32..(1 << h) {
            let acts: Vec<u8> = (0..h).map(|t| ((seq >> t) & 1) as u8).collect();
            if first.is_some_and(|f| acts[0] != f) {
                continue;
            }
            let mut s = m.initial_state();
            let mut total = zero();
            for &a in &acts {
                let out = m.step(&s, a);
                total += out.reward;
                s = out.successors[0].0.clone();
            }
            best = Some(best.map_or(total, |b: crate::rational::Rational| b.max(total)));
        }
        best.unwrap()
    }

    #[test]
    fn contradiction_example() {
        let m = sat(&[[1, 1, 1], [-1, -1, -1]]);
        let sol = exact_dp(&m, &Ceiling::default()).unwrap();
        assert_eq!(sol.q1(1), zero());
        assert_eq!(sol.q1(0), half());
        assert_eq!(sol.pi1(), 0);
        assert_eq!(best_sequence_value(&m, Some(1)), zero());
        assert_eq!(best_sequence_value(&m, Some(0)), half());
    }

    #[test]
    fn padded_tautology_example() {
        let m = sat(&[[1, -1, 1], [1, -1, 1]]);
        let sol = exact_dp(&m, &Ceiling::default()).unwrap();
        assert_eq!(sol.q1(1), one());
        assert_eq!(best_sequence_value(&m, Some(1)), one());
    }

    #[test]
    fn reachable_counts_and_terminal_layer() {
        for psi in Cnf3Formula::enumerate_all(2).step_by(61) {
            let m = SatMdp::new(psi);
            let layers =
                enumerate_reachable(&m, m.initial_state(), m.horizon(), &Ceiling::default()).unwrap();
            assert_eq!(layers[0], vec![m.initial_state()]);
            let total: usize = layers.iter().map(Vec::len).sum();
            assert!(total <= 28);
            let sol = exact_dp(&m, &Ceiling::default()).unwrap();
            let last = sol.layers.last().unwrap();
            for (i, s) in last.states.iter().enumerate() {
                let best = m.actions().iter().map(|&a| m.step(s, a).reward).max().unwrap();
                assert_eq!(last.values[i], best);
            }
            sol.check_bellman(&m).unwrap();
        }
    }

    #[test]
    fn cvp_layers_bounded() {
        let c = GateCircuit::new(vec![
            Node::constant(true),
            Node::not(1),
            Node::and(1, 2),
            Node::or(2, 3),
        ])
        .unwrap();
        let m = CvpMdp::new(c).unwrap();
        let layers =
            enumerate_reachable(&m, m.initial_state(), m.horizon(), &Ceiling::default()).unwrap();
        assert!(layers.iter().all(|l| l.len() <= 16));
    }

    #[test]
    fn ceiling_names_the_layer() {
        let m = sat(&[[1, 2, 1], [2, 1, 2]]);
        let err = exact_dp(&m, &Ceiling::new(2)).unwrap_err();
        match err {
            Error::ResourceLimit { layer: Some(h), .. } => assert_eq!(h, 3),
            other => panic!("{other:?}"),
        }
        assert!(enumerate_reachable(&m, m.initial_state(), 4, &Ceiling::new(2)).is_err());
    }

    #[test]
    fn arbitrary_start_state() {
        let m = sat(&[[1, 1, 1], [2, 2, 2]]);
        let s = SatState { v: Assignment(vec![true, true]), k: 3 };
        let sol = exact_dp_from(&m, s, 1, &Ceiling::default()).unwrap();
        assert_eq!(sol.v1(), one());
    }

    #[test]
    fn repeated_runs_are_identical() {
        let m = StochSatMdp::new(Cnf3Formula::from_signed(2, &[[1, 2, 1], [-1, 2, 2]]).unwrap());
        let a = exact_dp(&m, &Ceiling::default()).unwrap();
        let b = exact_dp(&m, &Ceiling::default()).unwrap();
        assert_eq!(a.to_json().to_string(), b.to_json().to_string());
        a.check_bellman(&m).unwrap();
    }

    #[test]
    fn ceiling_env_parsing() {
        assert_eq!(Ceiling::default().max_layer_states, 5_000_000);
    }
}
