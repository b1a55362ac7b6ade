//! Reward and transition circuits over the binary layouts.

use std::ops::Range;

use super::encode::{value_bits, TYPE_W};
use super::{to_bits, BoolCircuit, CircuitBuilder, CvpLayout, NpLayout, SatLayout, Wire};
use crate::circuit::GateKind;
use crate::env::{Family, NodeValue};
use crate::error::{Error, Result};
use crate::ndtm::{fixtures, NdtmSpec};

/// Largest size parameter the builders accept.
pub const ACZ_MAX_N: usize = 64;

#[derive(Clone, Debug)]
pub struct ModelCircuits {
    pub reward: BoolCircuit,
    pub transition: BoolCircuit,
}

fn check_n(n: usize) -> Result<()> {
    if n > ACZ_MAX_N {
        return Err(Error::ResourceLimit { what: "circuit size parameter", actual: n, limit: ACZ_MAX_N, layer: None });
    }
    if n == 0 {
        return Err(Error::invalid("size parameter must be positive"));
    }
    Ok(())
}

fn field(b: &CircuitBuilder, r: Range<usize>) -> Vec<Wire> {
    b.inputs(r)
}

/// Family-level builders. `np` uses the guess-match machine on the
/// alternating target of length `n` with `P = n+2`; `p` uses circuits of
/// size `2n-1` over `n` input bits.
pub fn build_model_circuit(family: Family, n: usize) -> Result<ModelCircuits> {
    check_n(n)?;
    match family {
        Family::Sat => sat_model_circuits(n),
        Family::Cvp => cvp_model_circuits(n),
        Family::P => p_model_circuits(2 * n - 1, n),
        Family::Np => np_model_circuits(&fixtures::guess_match(&fixtures::alternating(n), n + 2)?),
        other => Err(Error::invalid(format!("no model circuit for the {other} family"))),
    }
}

pub fn sat_model_circuits(n: usize) -> Result<ModelCircuits> {
    check_n(n)?;
    let lay = SatLayout::new(n);
    let codes: Vec<Range<usize>> = (0..3 * n).map(|p| lay.code(p)).collect();

    // reward: [ψ(v) ∧ k = n+1, k = 2n+2]
    let mut b = CircuitBuilder::new(lay.input_bits());
    let k = field(&b, lay.k());
    let mut clauses = Vec::with_capacity(n);
    for j in 0..n {
        let mut lits = Vec::with_capacity(3);
        for slot in 3 * j..3 * j + 3 {
            let code = field(&b, codes[slot].clone());
            let mut terms = Vec::with_capacity(2 * n);
            for i in 1..=n {
                let vi = b.input(lay.v(i));
                let mut pos = b.eq_literals(&code, i);
                pos.push(vi);
                terms.push(b.and(pos));
                let mut neg = b.eq_literals(&code, i + n);
                neg.push(b.not(vi));
                terms.push(b.and(neg));
            }
            lits.push(b.or(terms));
        }
        clauses.push(b.or(lits));
    }
    let mut sat = clauses;
    sat.extend(b.eq_literals(&k, n + 1));
    let r1 = b.and(sat);
    let r_half = b.eq(&k, 2 * n + 2);
    let reward = b.finish(vec![r1, r_half]);

    // transition
    let mut b = CircuitBuilder::new(lay.input_bits());
    let k = field(&b, lay.k());
    let a = b.input(lay.action());
    let mut outs: Vec<Wire> = (0..3 * n * lay.code_w).map(|i| b.input(i)).collect();
    for i in 1..=n {
        let vi = b.input(lay.v(i));
        let at_i = b.eq(&k, i);
        let not_at_i = b.not(at_i);
        let keep = b.and(vec![vi, not_at_i]);
        let set = b.and(vec![a, at_i]);
        outs.push(b.or(vec![keep, set]));
    }
    let mut addr = k.clone();
    addr.push(a);
    let k_w = lay.k_w;
    let next_k = b.lookup(&addr, k_w, |u| {
        let kv = u & ((1 << k_w) - 1);
        let av = u >> k_w;
        let nk = match (av, kv) {
            _ if kv > 2 * n + 2 => 0,
            (0, 0) => n + 2,
            (_, 0) => 1,
            (_, kv) => (kv + 1).min(2 * n + 2),
        };
        to_bits(nk, k_w)
    });
    outs.extend(next_k);
    let transition = b.finish(outs);
    Ok(ModelCircuits { reward, transition })
}

pub fn cvp_model_circuits(n: usize) -> Result<ModelCircuits> {
    check_n(n)?;
    cvp_like(CvpLayout::new(n, 0))
}

/// P-family circuits for circuits of `size` nodes over `m` input bits.
pub fn p_model_circuits(size: usize, m: usize) -> Result<ModelCircuits> {
    check_n(size)?;
    check_n(m)?;
    cvp_like(CvpLayout::new(size, m))
}

/// Node output table over `(type, V1, V2, X)`, returns `[is_unknown, value]`.
fn node_output_row(u: usize) -> Vec<bool> {
    let t = u & 0b111;
    let tri = |bits: usize| -> Option<bool> {
        match bits {
            0b00 => Some(false),
            0b10 => Some(true),
            _ => None,
        }
    };
    // address bits: [is_unknown, value] little-endian within each pair
    let v1 = tri(((u >> 3) & 1) | (((u >> 4) & 1) << 1));
    let v2 = tri(((u >> 5) & 1) | (((u >> 6) & 1) << 1));
    let x = (u >> 7) & 1 == 1;
    let out = match GateKind::from_code(t) {
        Some(GateKind::And) => v1.zip(v2).map(|(p, q)| p & q),
        Some(GateKind::Or) => v1.zip(v2).map(|(p, q)| p | q),
        Some(GateKind::Not) => v1.map(|p| !p),
        Some(GateKind::Const0) => Some(false),
        Some(GateKind::Const1) => Some(true),
        Some(GateKind::Input) => Some(x),
        None => None,
    };
    let v = match out {
        Some(b) => NodeValue::from_bool(b),
        None => NodeValue::Unknown,
    };
    value_bits(v).to_vec()
}

/// `OR_j (bits == j ∧ src_j)` over candidate indices `1..=count`.
fn select_bit(b: &mut CircuitBuilder, bits: &[Wire], count: usize, src: impl Fn(usize) -> Wire) -> Wire {
    let mut terms = Vec::with_capacity(count);
    for j in 1..=count {
        let mut lits = b.eq_literals(bits, j);
        lits.push(src(j));
        terms.push(b.and(lits));
    }
    b.or(terms)
}

fn cvp_like(lay: CvpLayout) -> Result<ModelCircuits> {
    let n = lay.size;

    // reward: [v[n] = 1, 0]
    let mut b = CircuitBuilder::new(lay.input_bits());
    let (unk, val) = lay.value(n);
    let (unk, val) = (b.input(unk), b.input(val));
    let known = b.not(unk);
    let r1 = b.and(vec![known, val]);
    let zero = b.konst(false);
    let reward = b.finish(vec![r1, zero]);

    // transition
    let mut b = CircuitBuilder::new(lay.input_bits());
    let a = field(&b, lay.action());
    let fetch = |b: &mut CircuitBuilder, r: fn(&CvpLayout, usize) -> Range<usize>, width: usize| -> Vec<Wire> {
        (0..width)
            .map(|bit| select_bit(b, &a, n, |j| Wire::Input(r(&lay, j).start + bit)))
            .collect()
    };
    let f1 = fetch(&mut b, CvpLayout::in1, lay.idx_w);
    let f2 = fetch(&mut b, CvpLayout::in2, lay.idx_w);
    let ty = fetch(&mut b, CvpLayout::gate_type, TYPE_W);
    let fetch_value = |b: &mut CircuitBuilder, f: &[Wire]| -> Vec<Wire> {
        let unk = select_bit(b, f, n, |j| Wire::Input(lay.value(j).0));
        let val = select_bit(b, f, n, |j| Wire::Input(lay.value(j).1));
        vec![unk, val]
    };
    let v1 = fetch_value(&mut b, &f1);
    let v2 = fetch_value(&mut b, &f2);
    let mut addr = ty;
    addr.extend(v1);
    addr.extend(v2);
    if lay.x_len > 0 {
        let x = select_bit(&mut b, &f1, lay.x_len, |j| Wire::Input(lay.x(j)));
        addr.push(x);
    }
    let o = b.lookup(&addr, 2, node_output_row);

    let mut outs: Vec<Wire> = (0..lay.value(1).0).map(|i| b.input(i)).collect();
    for i in 1..=n {
        let sel = b.eq(&a, i);
        let not_sel = b.not(sel);
        let (ui, vi) = lay.value(i);
        for (new, old) in [(o[0], ui), (o[1], vi)] {
            let set = b.and(vec![sel, new]);
            let old = b.input(old);
            let keep = b.and(vec![not_sel, old]);
            outs.push(b.or(vec![set, keep]));
        }
    }
    let transition = b.finish(outs);
    Ok(ModelCircuits { reward, transition })
}

pub fn np_model_circuits(spec: &NdtmSpec) -> Result<ModelCircuits> {
    let lay = NpLayout::new(spec);
    let p = lay.p;
    check_n(p)?;

    // reward: [s_M = accept ∧ k = P+1, k = 2P+2]
    let mut b = CircuitBuilder::new(lay.input_bits());
    let s = field(&b, lay.state());
    let k = field(&b, lay.k());
    let mut acc = b.eq_literals(&s, spec.accept());
    acc.extend(b.eq_literals(&k, p + 1));
    let r1 = b.and(acc);
    let r_half = b.eq(&k, 2 * p + 2);
    let reward = b.finish(vec![r1, r_half]);

    // transition
    let mut b = CircuitBuilder::new(lay.input_bits());
    let s = field(&b, lay.state());
    let k = field(&b, lay.k());
    let head = field(&b, lay.head());
    let a = b.input(lay.action());
    let cells: Vec<Vec<Wire>> = (0..p).map(|i| field(&b, lay.cell(i))).collect();
    let at: Vec<Wire> = (0..p).map(|i| b.eq(&head, i)).collect();

    // symbol under the head
    let chi: Vec<Wire> = (0..lay.sym_w)
        .map(|bit| {
            let terms: Vec<Wire> = (0..p)
                .map(|i| {
                    let mut lits = b.eq_literals(&head, i);
                    lits.push(cells[i][bit]);
                    b.and(lits)
                })
                .collect();
            b.or(terms)
        })
        .collect();

    let k_w = lay.k_w;
    let active = b.lookup(&k, 1, |kv| vec![(1..=p).contains(&kv)])[0];

    // (state, a, χ) → (next state, written symbol, move left, move right)
    let (sw, yw) = (lay.state_w, lay.sym_w);
    let mut addr = s.clone();
    addr.push(a);
    addr.extend(chi.iter().copied());
    let rows = sw + yw + 2;
    let step = b.lookup(&addr, rows, |u| {
        let q = u & ((1 << sw) - 1);
        let branch = (u >> sw) & 1 == 1;
        let sym = u >> (sw + 1);
        if q >= lay.states || sym >= lay.symbols {
            return vec![false; rows];
        }
        let (next, write, mv) = if spec.is_terminal(q) {
            (q, sym, crate::ndtm::Move::Stay)
        } else {
            let t = spec.transition(branch, q, sym as u8).expect("total on non-terminal states");
            (t.next, t.write as usize, t.mv)
        };
        let mut row = to_bits(next, sw);
        row.extend(to_bits(write, yw));
        row.push(mv == crate::ndtm::Move::Left);
        row.push(mv == crate::ndtm::Move::Right);
        row
    });
    let next_state = &step[..sw];
    let write = &step[sw..sw + yw];
    let (mv_l, mv_r) = (step[sw + yw], step[sw + yw + 1]);

    let off_right = b.and(vec![at[p - 1], mv_r]);
    let off_left = b.and(vec![at[0], mv_l]);
    let overflow = b.or(vec![off_right, off_left]);
    let no_overflow = b.not(overflow);
    let go = b.and(vec![active, no_overflow]);
    let halt_now = b.and(vec![active, overflow]);
    let idle = b.not(active);

    let mut outs = Vec::with_capacity(lay.state_bits());
    let halt_bits = to_bits(spec.halt(), sw);
    for bit in 0..sw {
        let stepped = b.and(vec![go, next_state[bit]]);
        let kept = b.and(vec![idle, s[bit]]);
        let mut terms = vec![stepped, kept];
        if halt_bits[bit] {
            terms.push(halt_now);
        }
        outs.push(b.or(terms));
    }
    for i in 0..p {
        let here = b.and(vec![at[i], go]);
        let elsewhere = b.not(here);
        for bit in 0..yw {
            let w = b.and(vec![here, write[bit]]);
            let keep = b.and(vec![elsewhere, cells[i][bit]]);
            outs.push(b.or(vec![w, keep]));
        }
    }
    let hw = lay.head_w;
    let mut haddr = head.clone();
    haddr.push(mv_l);
    haddr.push(mv_r);
    let moved = b.lookup(&haddr, hw, |u| {
        let h = u & ((1 << hw) - 1);
        let (l, r) = ((u >> hw) & 1 == 1, (u >> (hw + 1)) & 1 == 1);
        let nh = match (l, r) {
            (true, false) => h.wrapping_sub(1),
            (false, true) => h + 1,
            _ => h,
        };
        if nh < p && h < p {
            to_bits(nh, hw)
        } else {
            vec![false; hw]
        }
    });
    let stay = b.not(go);
    for bit in 0..hw {
        let m = b.and(vec![go, moved[bit]]);
        let keep = b.and(vec![stay, head[bit]]);
        outs.push(b.or(vec![m, keep]));
    }
    let mut kaddr = k.clone();
    kaddr.push(a);
    let next_k = b.lookup(&kaddr, k_w, |u| {
        let kv = u & ((1 << k_w) - 1);
        let av = u >> k_w;
        let nk = match (av, kv) {
            _ if kv > 2 * p + 2 => 0,
            (0, 0) => p + 2,
            (_, 0) => 1,
            (_, kv) => (kv + 1).min(2 * p + 2),
        };
        to_bits(nk, k_w)
    });
    outs.extend(next_k);
    let transition = b.finish(outs);
    Ok(ModelCircuits { reward, transition })
}
