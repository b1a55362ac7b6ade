//! Reward and transition networks over the integer embeddings.
//!
//! Indicators and small finite maps go through the lookup gadget, one-hot
//! selections through `ReLU(x - M(1-b))`. Inputs are the state embedding
//! followed by the action scalar.

use super::builder::{grid, Lin, NetBuilder};
use super::embed;
use super::network::{Mlp, DEFAULT_PRECISION_BITS};
use crate::acz::Part;
use crate::circuit::GateKind;
use crate::env::{Family, NodeValue};
use crate::error::{Error, Result};
use crate::ndtm::{fixtures, Move, NdtmSpec};
use crate::rational::{half, one, rat, zero, Rational};

/// Largest size parameter the builders accept.
pub const MLP_MAX_N: usize = 64;

#[derive(Clone, Debug)]
pub struct ModelMlps {
    pub reward: Mlp,
    pub transition: Mlp,
}

pub(crate) fn check_n(n: usize) -> Result<()> {
    if n > MLP_MAX_N {
        return Err(Error::ResourceLimit { what: "MLP size parameter", actual: n, limit: MLP_MAX_N, layer: None });
    }
    if n == 0 {
        return Err(Error::invalid("size parameter must be positive"));
    }
    Ok(())
}

/// Declared polynomial degree of the widest hidden layer in `n`.
pub fn declared_width_exponent(family: Family, part: Part) -> Option<u32> {
    match (family, part) {
        (Family::Sat, Part::Reward) => Some(2),
        (Family::Sat | Family::Np | Family::Cvp | Family::P, Part::Transition) => Some(1),
        (Family::Np, Part::Reward) => Some(1),
        (Family::Cvp | Family::P, Part::Reward) => Some(0),
        (Family::Cvp | Family::P, Part::Policy) => Some(2),
        _ => None,
    }
}

fn indicator(b: bool) -> Rational {
    if b {
        one()
    } else {
        zero()
    }
}

fn lookup_grid(
    b: &mut NetBuilder,
    xs: &[Lin],
    ranges: &[(i64, i64)],
    f: impl Fn(&[i64]) -> Rational,
) -> Result<Lin> {
    b.lookup(xs, &grid(ranges), f)
}

/// `k` update shared by the two-phase families with phase length `n`.
fn next_phase(k: i64, a: i64, n: i64) -> i64 {
    match (a, k) {
        (0, 0) => n + 2,
        (_, 0) => 1,
        (_, k) => (k + 1).min(2 * n + 2),
    }
}

/// Same family conventions as the circuit builders: `np` runs the
/// guess-match machine on an alternating target of length `n` with
/// `P = n+2`; `p` uses circuits of size `2n-1` over `n` bits.
pub fn build_model_mlp(family: Family, n: usize) -> Result<ModelMlps> {
    check_n(n)?;
    match family {
        Family::Sat => sat_model_mlps(n),
        Family::Cvp => cvp_model_mlps(n),
        Family::P => p_model_mlps(2 * n - 1, n),
        Family::Np => np_model_mlps(&fixtures::guess_match(&fixtures::alternating(n), n + 2)?),
        other => Err(Error::invalid(format!("no model MLP for the {other} family"))),
    }
}

pub fn sat_model_mlps(n: usize) -> Result<ModelMlps> {
    check_n(n)?;
    let ranges = embed::sat_ranges(n);
    let ni = n as i64;
    let code_dom = [(1, 2 * ni)];
    let k_dom = (0, 2 * ni + 2);
    let (v_at, k_at, a_at) = (3 * n, 4 * n, 4 * n + 1);

    // substitute v into every literal slot, then OR within clauses and AND across
    let mut b = NetBuilder::new(&ranges);
    let mut clauses = Vec::with_capacity(n);
    for j in 0..n {
        let mut alphas = Vec::with_capacity(3);
        for slot in 3 * j..3 * j + 3 {
            let code = b.input(slot);
            let mut terms = Vec::with_capacity(2 * n);
            for i in 1..=n as i64 {
                let pos = lookup_grid(&mut b, &[code.clone()], &code_dom, |u| indicator(u[0] == i))?;
                let neg = lookup_grid(&mut b, &[code.clone()], &code_dom, |u| indicator(u[0] == i + ni))?;
                let vi = b.input(v_at + i as usize - 1);
                let t1 = b.combine(&[(one(), &pos), (one(), &vi)], -one());
                terms.push(b.relu(&t1));
                let t2 = b.sub(&neg, &vi);
                terms.push(b.relu(&t2));
            }
            alphas.push(b.sum(&terms));
        }
        let s = b.sum(&alphas);
        let hi = b.relu(&s);
        let lo = b.relu(&s.add_const(-one()));
        clauses.push(b.sub(&hi, &lo));
    }
    let total = b.sum(&clauses);
    let sat = b.relu(&total.add_const(rat(1 - n as i128, 1)));
    let k = b.input(k_at);
    let reward = lookup_grid(&mut b, &[sat, k], &[(0, 1), k_dom], |u| {
        if u[0] == 1 && u[1] == ni + 1 {
            one()
        } else if u[1] == 2 * ni + 2 {
            half()
        } else {
            zero()
        }
    })?;
    let reward = b.finish(&[reward], DEFAULT_PRECISION_BITS)?;

    let mut b = NetBuilder::new(&ranges);
    let (k, a) = (b.input(k_at), b.input(a_at));
    let mut outs: Vec<Lin> = (0..3 * n).map(|i| b.input(i)).collect();
    for i in 1..=ni {
        let vi = b.input(v_at + i as usize - 1);
        outs.push(lookup_grid(&mut b, &[vi, k.clone(), a.clone()], &[(0, 1), k_dom, (0, 1)], |u| {
            rat(if u[1] == i { u[2] } else { u[0] } as i128, 1)
        })?);
    }
    outs.push(lookup_grid(&mut b, &[k, a], &[k_dom, (0, 1)], |u| rat(next_phase(u[0], u[1], ni) as i128, 1))?);
    let transition = b.finish(&outs, DEFAULT_PRECISION_BITS)?;
    Ok(ModelMlps { reward, transition })
}

pub fn cvp_model_mlps(n: usize) -> Result<ModelMlps> {
    check_n(n)?;
    cvp_like(n, 0)
}

pub fn p_model_mlps(size: usize, m: usize) -> Result<ModelMlps> {
    check_n(size)?;
    check_n(m)?;
    cvp_like(size, m)
}

fn decode_value(code: i64) -> Option<bool> {
    match code {
        1 => Some(false),
        2 => Some(true),
        _ => None,
    }
}

/// Output code of a node of type `g` whose operands have codes `v1`, `v2`
/// (0 when the operand index is 0) and whose input bit is `x`.
fn output_code(g: i64, v1: i64, v2: i64, x: i64) -> Rational {
    let (p, q) = (decode_value(v1), decode_value(v2));
    let out = match GateKind::from_code(g as usize) {
        Some(GateKind::And) => p.zip(q).map(|(p, q)| p & q),
        Some(GateKind::Or) => p.zip(q).map(|(p, q)| p | q),
        Some(GateKind::Not) => p.map(|p| !p),
        Some(GateKind::Const0) => Some(false),
        Some(GateKind::Const1) => Some(true),
        Some(GateKind::Input) => Some(x == 1),
        None => None,
    };
    let v = out.map_or(NodeValue::Unknown, NodeValue::from_bool);
    rat(v.code() as i128, 1)
}

/// Entry positions of the cvp/p embedding.
#[derive(Clone, Copy)]
pub(crate) struct CvpIndex {
    pub size: usize,
    pub m: usize,
}

impl CvpIndex {
    pub fn x(self, j: usize) -> usize {
        j - 1
    }
    pub fn in1(self, i: usize) -> usize {
        self.m + 3 * (i - 1)
    }
    pub fn in2(self, i: usize) -> usize {
        self.in1(i) + 1
    }
    pub fn gate(self, i: usize) -> usize {
        self.in1(i) + 2
    }
    pub fn value(self, i: usize) -> usize {
        self.m + 3 * self.size + i - 1
    }
    pub fn action(self) -> usize {
        self.m + 4 * self.size
    }
    pub fn ranges(self) -> Vec<(i64, i64)> {
        if self.m == 0 {
            embed::cvp_ranges(self.size)
        } else {
            embed::p_ranges(self.size, self.m)
        }
    }
    pub fn max_type(self) -> i64 {
        if self.m == 0 {
            5
        } else {
            6
        }
    }
    pub fn max_index(self) -> i64 {
        self.size.max(self.m) as i64
    }
}

/// `Σ_j 1[idx = j] · column(j)` for `j ∈ 1..=count`.
pub(crate) fn fetch(
    b: &mut NetBuilder,
    idx: &Lin,
    idx_hi: i64,
    count: usize,
    column: impl Fn(&NetBuilder, usize) -> Lin,
    hi: i64,
) -> Result<Lin> {
    let mut parts = Vec::with_capacity(count);
    for j in 1..=count as i64 {
        let hit = lookup_grid(b, &[idx.clone()], &[(0, idx_hi)], |u| indicator(u[0] == j))?;
        let col = column(b, j as usize);
        parts.push(b.select(&hit, &col));
    }
    Ok(b.sum(&parts).assume_range(0, hi))
}

fn cvp_like(size: usize, m: usize) -> Result<ModelMlps> {
    let ix = CvpIndex { size, m };
    let ranges = ix.ranges();
    let p = size as i64;

    let mut b = NetBuilder::new(&ranges);
    let vn = b.input(ix.value(size));
    let out = lookup_grid(&mut b, &[vn], &[(1, 3)], |u| indicator(u[0] == 2))?;
    let reward = b.finish(&[out], DEFAULT_PRECISION_BITS)?;

    let mut b = NetBuilder::new(&ranges);
    let a = b.input(ix.action());
    let mut chosen = Vec::with_capacity(size);
    for j in 1..=p {
        chosen.push(lookup_grid(&mut b, &[a.clone()], &[(1, p)], |u| indicator(u[0] == j))?);
    }
    // fields of node a
    let pick = |b: &mut NetBuilder, at: &dyn Fn(usize) -> usize, hi: i64| {
        let parts: Vec<Lin> = (1..=size)
            .map(|j| {
                let col = b.input(at(j));
                b.select(&chosen[j - 1], &col)
            })
            .collect();
        b.sum(&parts).assume_range(0, hi)
    };
    let f1 = pick(&mut b, &|j| ix.in1(j), ix.max_index());
    let f2 = pick(&mut b, &|j| ix.in2(j), p);
    let g = pick(&mut b, &|j| ix.gate(j), ix.max_type()).assume_range(1, ix.max_type());
    // operand values and input bit
    let v1 = fetch(&mut b, &f1, ix.max_index(), size, |b, j| b.input(ix.value(j)), 3)?;
    let v2 = fetch(&mut b, &f2, p, size, |b, j| b.input(ix.value(j)), 3)?;
    let out = if m == 0 {
        lookup_grid(&mut b, &[g, v1, v2], &[(1, 5), (0, 3), (0, 3)], |u| output_code(u[0], u[1], u[2], 0))?
    } else {
        let x = fetch(&mut b, &f1, ix.max_index(), m, |b, j| b.input(ix.x(j)), 1)?;
        lookup_grid(&mut b, &[g, v1, v2, x], &[(1, 6), (0, 3), (0, 3), (0, 1)], |u| {
            output_code(u[0], u[1], u[2], u[3])
        })?
    };
    let out = out.assume_range(1, 3);
    let mut outs: Vec<Lin> = (0..ix.value(1)).map(|i| b.input(i)).collect();
    for i in 1..=size {
        let vi = b.input(ix.value(i));
        let other = chosen[i - 1].rsub(1);
        let keep = b.select(&other, &vi);
        let set = b.select(&chosen[i - 1], &out);
        outs.push(b.add(&keep, &set));
    }
    let transition = b.finish(&outs, DEFAULT_PRECISION_BITS)?;
    Ok(ModelMlps { reward, transition })
}

pub fn np_model_mlps(spec: &NdtmSpec) -> Result<ModelMlps> {
    let p = spec.step_bound();
    check_n(p)?;
    let pi = p as i64;
    let ranges = embed::np_ranges(spec);
    let states = spec.states().len() as i64;
    let symbols = spec.alphabet().len() as i64;
    let (q_at, head_at, k_at, a_at) = (0, p + 1, p + 2, p + 3);
    let k_dom = (0, 2 * pi + 2);
    let accept = spec.accept() as i64;

    let mut b = NetBuilder::new(&ranges);
    let (q, k) = (b.input(q_at), b.input(k_at));
    let out = lookup_grid(&mut b, &[q, k], &[(0, states - 1), k_dom], |u| {
        if u[0] == accept && u[1] == pi + 1 {
            one()
        } else if u[1] == 2 * pi + 2 {
            half()
        } else {
            zero()
        }
    })?;
    let reward = b.finish(&[out], DEFAULT_PRECISION_BITS)?;

    let mut b = NetBuilder::new(&ranges);
    let (q, head, k, a) = (b.input(q_at), b.input(head_at), b.input(k_at), b.input(a_at));
    let cells: Vec<Lin> = (0..p).map(|i| b.input(1 + i)).collect();
    let at: Vec<Lin> = (0..pi)
        .map(|i| lookup_grid(&mut b, &[head.clone()], &[(0, pi - 1)], |u| indicator(u[0] == i)))
        .collect::<Result<_>>()?;
    let active = lookup_grid(&mut b, &[k.clone()], &[k_dom], |u| indicator((1..=pi).contains(&u[0])))?;
    let next_k = lookup_grid(&mut b, &[k, a.clone()], &[k_dom, (0, 1)], |u| rat(next_phase(u[0], u[1], pi) as i128, 1))?;
    let read: Vec<Lin> = (0..p).map(|i| b.select(&at[i], &cells[i])).collect();
    let chi = b.sum(&read).assume_range(0, symbols - 1);

    // (q, a, χ, active, at left end, at right end) → (q', written symbol, head move)
    let step_of = |u: &[i64]| -> (i64, i64, i64) {
        let (qv, sym) = (u[0] as usize, u[2]);
        if u[3] == 0 || spec.is_terminal(qv) {
            return (u[0], sym, 0);
        }
        let t = spec.transition(u[1] == 1, qv, sym as u8).expect("total on non-terminal states");
        let off = (u[4] == 1 && t.mv == Move::Left) || (u[5] == 1 && t.mv == Move::Right);
        if off {
            (spec.halt() as i64, sym, 0)
        } else {
            (t.next as i64, t.write as i64, t.mv.delta())
        }
    };
    let xs = [q, a, chi, active, at[0].clone(), at[p - 1].clone()];
    let dom = grid(&[(0, states - 1), (0, 1), (0, symbols - 1), (0, 1), (0, 1), (0, 1)]);
    let next_q = b.lookup(&xs, &dom, |u| rat(step_of(u).0 as i128, 1))?.assume_range(0, states - 1);
    let write = b.lookup(&xs, &dom, |u| rat(step_of(u).1 as i128, 1))?.assume_range(0, symbols - 1);
    let moved = b.lookup(&xs, &dom, |u| rat(step_of(u).2 as i128, 1))?;

    let mut outs = vec![next_q];
    for i in 0..p {
        let other = at[i].rsub(1);
        let keep = b.select(&other, &cells[i]);
        let set = b.select(&at[i], &write);
        outs.push(b.add(&keep, &set));
    }
    let next_head = b.add(&head, &moved).assume_range(0, pi - 1);
    outs.push(next_head);
    outs.push(next_k);
    let transition = b.finish(&outs, DEFAULT_PRECISION_BITS)?;
    Ok(ModelMlps { reward, transition })
}
