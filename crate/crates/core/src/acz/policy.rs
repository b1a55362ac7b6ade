//! Circuits for the smallest-computable-node policies.

use super::{BoolCircuit, CircuitBuilder, CvpLayout, Wire};
use crate::circuit::GateKind;
use crate::env::Family;
use crate::error::{Error, Result};

use super::model::ACZ_MAX_N;

/// `cvp`: circuits of size `n`; `p`: size `2n-1` over `n` input bits.
pub fn build_policy_circuit(family: Family, n: usize) -> Result<BoolCircuit> {
    if n == 0 || n > ACZ_MAX_N {
        return Err(Error::ResourceLimit { what: "circuit size parameter", actual: n, limit: ACZ_MAX_N, layer: None });
    }
    match family {
        Family::Cvp => cvp_policy_circuit(n),
        Family::P => p_policy_circuit(2 * n - 1, n),
        other => Err(Error::invalid(format!("no policy circuit for the {other} family"))),
    }
}

pub fn cvp_policy_circuit(n: usize) -> Result<BoolCircuit> {
    Ok(policy(CvpLayout::new(n, 0), false))
}

pub fn p_policy_circuit(size: usize, m: usize) -> Result<BoolCircuit> {
    Ok(policy(CvpLayout::new(size, m), true))
}

/// Input layout is the state part of [`CvpLayout`]; output is the action bits.
fn policy(lay: CvpLayout, with_input: bool) -> BoolCircuit {
    let n = lay.size;
    let mut b = CircuitBuilder::new(lay.state_bits());
    let mut upsilon = Vec::with_capacity(n);
    for i in 1..=n {
        let in1 = b.inputs(lay.in1(i));
        let in2 = b.inputs(lay.in2(i));
        let ty = b.inputs(lay.gate_type(i));
        let unknown_of = |b: &mut CircuitBuilder, idx: &[Wire]| {
            let terms: Vec<Wire> = (1..=n)
                .map(|j| {
                    let mut lits = b.eq_literals(idx, j);
                    lits.push(Wire::Input(lay.value(j).0));
                    b.and(lits)
                })
                .collect();
            b.or(terms)
        };
        let u1 = unknown_of(&mut b, &in1);
        let u2 = unknown_of(&mut b, &in2);
        let k1 = b.not(u1);
        let k2 = b.not(u2);
        let is = |b: &mut CircuitBuilder, g: GateKind| b.eq(&ty, g.code());
        let and_t = is(&mut b, GateKind::And);
        let or_t = is(&mut b, GateKind::Or);
        let binary = b.or(vec![and_t, or_t]);
        let not_t = is(&mut b, GateKind::Not);
        let c0 = is(&mut b, GateKind::Const0);
        let c1 = is(&mut b, GateKind::Const1);
        let leaf = b.or(vec![c0, c1]);
        let both = b.and(vec![binary, k1, k2]);
        let one = b.and(vec![not_t, k1]);
        let mut ready = vec![both, one, leaf];
        if with_input {
            ready.push(is(&mut b, GateKind::Input));
        }
        let ready = b.or(ready);
        let own_unknown = b.input(lay.value(i).0);
        upsilon.push(b.and(vec![own_unknown, ready]));
    }
    let mut first = Vec::with_capacity(n);
    first.push(upsilon[0]);
    for i in 2..=n {
        let earlier = b.or(upsilon[..i - 1].to_vec());
        let none_earlier = b.not(earlier);
        first.push(b.and(vec![none_earlier, upsilon[i - 1]]));
    }
    let any = b.or(upsilon.clone());
    let empty = b.not(any);
    let outs = (0..lay.act_w)
        .map(|bit| {
            let mut terms: Vec<Wire> = (1..=n)
                .filter(|i| (i >> bit) & 1 == 1)
                .map(|i| first[i - 1])
                .collect();
            if (n >> bit) & 1 == 1 {
                terms.push(empty);
            }
            b.or(terms)
        })
        .collect();
    b.finish(outs)
}
