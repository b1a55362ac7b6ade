//! Networks for the smallest-computable-node policies. The output is the
//! action index itself.

use super::builder::{grid, Lin, NetBuilder};
use super::model::{check_n, fetch, CvpIndex};
use super::network::{Mlp, DEFAULT_PRECISION_BITS};
use crate::circuit::GateKind;
use crate::env::Family;
use crate::error::{Error, Result};
use crate::rational::{one, zero, Rational};

/// `cvp`: circuits of size `n`; `p`: size `2n-1` over `n` input bits.
pub fn build_policy_mlp(family: Family, n: usize) -> Result<Mlp> {
    check_n(n)?;
    match family {
        Family::Cvp => cvp_policy_mlp(n),
        Family::P => p_policy_mlp(2 * n - 1, n),
        other => Err(Error::invalid(format!("no policy MLP for the {other} family"))),
    }
}

pub fn cvp_policy_mlp(n: usize) -> Result<Mlp> {
    check_n(n)?;
    policy(CvpIndex { size: n, m: 0 })
}

pub fn p_policy_mlp(size: usize, m: usize) -> Result<Mlp> {
    check_n(size)?;
    check_n(m)?;
    policy(CvpIndex { size, m })
}

/// Whether a node of type `g` with operand codes `v1`, `v2` and own code
/// `own` may be evaluated now.
fn ready(g: i64, v1: i64, v2: i64, own: i64, allow_input: bool) -> Rational {
    let known = |c: i64| c == 1 || c == 2;
    let ok = own == 3
        && match GateKind::from_code(g as usize) {
            Some(GateKind::And | GateKind::Or) => known(v1) && known(v2),
            Some(GateKind::Not) => known(v1),
            Some(GateKind::Const0 | GateKind::Const1) => true,
            Some(GateKind::Input) => allow_input,
            None => false,
        };
    if ok {
        one()
    } else {
        zero()
    }
}

fn policy(ix: CvpIndex) -> Result<Mlp> {
    let size = ix.size;
    let p = size as i64;
    let allow_input = ix.m > 0;
    // the action input is not part of the policy's domain
    let mut ranges = ix.ranges();
    ranges.pop();
    let mut b = NetBuilder::new(&ranges);
    let dom = grid(&[(1, ix.max_type()), (0, 3), (0, 3), (1, 3)]);
    let mut upsilon = Vec::with_capacity(size);
    for i in 1..=size {
        let in1 = b.input(ix.in1(i));
        let in2 = b.input(ix.in2(i));
        let v1 = fetch(&mut b, &in1, ix.max_index(), size, |b, j| b.input(ix.value(j)), 3)?;
        let v2 = fetch(&mut b, &in2, p, size, |b, j| b.input(ix.value(j)), 3)?;
        let g = b.input(ix.gate(i));
        let own = b.input(ix.value(i));
        upsilon.push(b.lookup(&[g, v1, v2, own], &dom, |u| ready(u[0], u[1], u[2], u[3], allow_input))?);
    }
    // first[i] = 1 while no earlier node is computable
    let mut first: Vec<Lin> = Vec::with_capacity(size);
    for i in 0..size {
        let earlier = b.sum(&upsilon[..i]);
        first.push(b.relu(&earlier.rsub(1)));
    }
    let total = b.sum(&first);
    let out = b.relu(&total);
    b.finish(&[out], DEFAULT_PRECISION_BITS)
}
