//! Integer embeddings of states and actions for the network inputs.
//!
//! | family | state layout | dims |
//! |---|---|---|
//! | sat | literal codes (`i` / `i+n`), `v`, `k` | `4n+1` |
//! | np | state index, tape symbols, head, `k` | `P+3` |
//! | cvp | `(in1, in2, type)` per node, then value codes | `4n` |
//! | p | `x`, `(in1, in2, type)` per node, value codes | `m+4P` |
//!
//! Value codes are 0→1, 1→2, unknown→3; gate types use the circuit codes.
//! Actions embed as one scalar appended after the state.

use crate::circuit::GateCircuit;
use crate::env::{NodeValue, NpState, SatState};
use crate::formula::Cnf3Formula;
use crate::ndtm::NdtmSpec;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedding {
    pub state: Vec<i64>,
    pub action: Option<i64>,
}

impl Embedding {
    pub fn input(&self) -> Vec<f64> {
        self.state.iter().chain(self.action.iter()).map(|&v| v as f64).collect()
    }
}

pub fn sat_state(psi: &Cnf3Formula, s: &SatState) -> Vec<i64> {
    let n = psi.n();
    let mut e: Vec<i64> = psi.literals().map(|l| l.code(n) as i64).collect();
    e.extend(s.v.bits().iter().map(|&b| b as i64));
    e.push(s.k as i64);
    e
}

/// Ranges of the state entries, then the action.
pub fn sat_ranges(n: usize) -> Vec<(i64, i64)> {
    let n = n as i64;
    let mut r = vec![(1, 2 * n); 3 * n as usize];
    r.extend(std::iter::repeat_n((0, 1), n as usize));
    r.push((0, 2 * n + 2));
    r.push((0, 1));
    r
}

pub fn np_state(s: &NpState) -> Vec<i64> {
    let mut e = vec![s.c.state as i64];
    e.extend(s.c.tape.iter().map(|&t| t as i64));
    e.push(s.c.head as i64);
    e.push(s.k as i64);
    e
}

pub fn np_ranges(spec: &NdtmSpec) -> Vec<(i64, i64)> {
    let p = spec.step_bound() as i64;
    let mut r = vec![(0, spec.states().len() as i64 - 1)];
    r.extend(std::iter::repeat_n((0, spec.alphabet().len() as i64 - 1), p as usize));
    r.push((0, p - 1));
    r.push((0, 2 * p + 2));
    r.push((0, 1));
    r
}

fn circuit_part(c: &GateCircuit, e: &mut Vec<i64>) {
    for node in c.nodes() {
        e.extend([node.in1 as i64, node.in2 as i64, node.gate.code() as i64]);
    }
}

pub fn cvp_state(c: &GateCircuit, v: &[NodeValue]) -> Vec<i64> {
    let mut e = Vec::with_capacity(4 * c.size());
    circuit_part(c, &mut e);
    e.extend(v.iter().map(|x| x.code()));
    e
}

pub fn cvp_ranges(n: usize) -> Vec<(i64, i64)> {
    let ni = n as i64;
    let mut r = Vec::with_capacity(4 * n + 1);
    for _ in 0..n {
        r.extend([(0, ni), (0, ni), (1, 5)]);
    }
    r.extend(std::iter::repeat_n((1, 3), n));
    r.push((1, ni));
    r
}

pub fn p_state(c: &GateCircuit, x: &[bool], v: &[NodeValue]) -> Vec<i64> {
    let mut e: Vec<i64> = x.iter().map(|&b| b as i64).collect();
    circuit_part(c, &mut e);
    e.extend(v.iter().map(|x| x.code()));
    e
}

pub fn p_ranges(size: usize, m: usize) -> Vec<(i64, i64)> {
    let (p, idx) = (size as i64, size.max(m) as i64);
    let mut r = vec![(0, 1); m];
    for _ in 0..size {
        r.extend([(0, idx), (0, p), (1, 6)]);
    }
    r.extend(std::iter::repeat_n((1, 3), size));
    r.push((1, p));
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Mdp, SatMdp};
    use crate::oracle::{enumerate_reachable, Ceiling};

    #[test]
    fn sat_dims_and_injectivity() {
        let psi = Cnf3Formula::from_signed(2, &[[1, -2, 1], [-1, 2, 2]]).unwrap();
        let m = SatMdp::new(psi.clone());
        let s0 = m.initial_state();
        assert_eq!(sat_state(&psi, &s0).len(), 9);
        assert_eq!(&sat_state(&psi, &s0)[..6], &[1, 4, 1, 3, 2, 2]);
        let layers = enumerate_reachable(&m, s0, m.horizon(), &Ceiling::default()).unwrap();
        let states: std::collections::BTreeSet<_> = layers.into_iter().flatten().collect();
        let embedded: std::collections::BTreeSet<_> = states.iter().map(|s| sat_state(&psi, s)).collect();
        assert_eq!(states.len(), embedded.len());
        assert_eq!(sat_ranges(2).len(), 10);
    }

    #[test]
    fn cvp_unknown_code() {
        let c = GateCircuit::new(vec![crate::circuit::Node::constant(true), crate::circuit::Node::not(1)]).unwrap();
        let e = cvp_state(&c, &[NodeValue::One, NodeValue::Unknown]);
        assert_eq!(e, vec![0, 0, 5, 1, 0, 3, 2, 3]);
        assert_eq!(e.len(), 4 * 2);
    }
}
