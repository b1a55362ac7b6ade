//! Bit-exact layouts of states, actions and rewards. Integer fields are
//! little-endian; a node value takes two bits `[is_unknown, value]` and the
//! reward two bits `[is_one, is_half]`.

use super::to_bits;
use crate::circuit::GateCircuit;
use crate::env::{NodeValue, NpState, SatState};
use crate::formula::Cnf3Formula;
use crate::ndtm::NdtmSpec;
use crate::rational::{half, one, zero, Rational};

/// Bits needed for the values `0..=max_value` (at least one).
pub fn bits_for(max_value: usize) -> usize {
    (usize::BITS - max_value.leading_zeros()).max(1) as usize
}

pub fn encode_reward(r: &Rational) -> [bool; 2] {
    if *r == one() {
        [true, false]
    } else if *r == half() {
        [false, true]
    } else {
        [false, false]
    }
}

pub fn decode_reward(bits: &[bool]) -> Option<Rational> {
    match bits {
        [false, false] => Some(zero()),
        [false, true] => Some(half()),
        [true, false] => Some(one()),
        _ => None,
    }
}

fn push_int(out: &mut Vec<bool>, value: usize, width: usize) {
    debug_assert!(width >= usize::BITS as usize || value >> width == 0);
    out.extend(to_bits(value, width));
}

pub(crate) fn value_bits(v: NodeValue) -> [bool; 2] {
    match v {
        NodeValue::Zero => [false, false],
        NodeValue::One => [false, true],
        NodeValue::Unknown => [true, false],
    }
}

/// `(ψ as 3n literal codes, v, k)` followed by the action bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SatLayout {
    pub n: usize,
    pub code_w: usize,
    pub k_w: usize,
}

impl SatLayout {
    pub fn new(n: usize) -> Self {
        SatLayout { n, code_w: bits_for(2 * n), k_w: bits_for(2 * n + 2) }
    }

    pub fn code(&self, slot: usize) -> std::ops::Range<usize> {
        slot * self.code_w..(slot + 1) * self.code_w
    }

    /// 1-based variable.
    pub fn v(&self, i: usize) -> usize {
        3 * self.n * self.code_w + i - 1
    }

    pub fn k(&self) -> std::ops::Range<usize> {
        let start = 3 * self.n * self.code_w + self.n;
        start..start + self.k_w
    }

    pub fn state_bits(&self) -> usize {
        self.k().end
    }

    pub fn action(&self) -> usize {
        self.state_bits()
    }

    pub fn input_bits(&self) -> usize {
        self.state_bits() + 1
    }

    pub fn encode_state(&self, psi: &Cnf3Formula, s: &SatState) -> Vec<bool> {
        let mut out = Vec::with_capacity(self.input_bits());
        for l in psi.literals() {
            push_int(&mut out, l.code(self.n), self.code_w);
        }
        out.extend(s.v.bits());
        push_int(&mut out, s.k, self.k_w);
        out
    }

    pub fn encode_input(&self, psi: &Cnf3Formula, s: &SatState, a: bool) -> Vec<bool> {
        let mut out = self.encode_state(psi, s);
        out.push(a);
        out
    }
}

/// Layout shared by CVP (`x_len = 0`) and P states:
/// `x`, then per node `(in1, in2, type)`, then per node value bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CvpLayout {
    pub size: usize,
    pub x_len: usize,
    pub idx_w: usize,
    pub act_w: usize,
}

pub const TYPE_W: usize = 3;

impl CvpLayout {
    pub fn new(size: usize, x_len: usize) -> Self {
        CvpLayout {
            size,
            x_len,
            idx_w: bits_for(size.max(x_len)),
            act_w: bits_for(size),
        }
    }

    fn node_w(&self) -> usize {
        2 * self.idx_w + TYPE_W
    }

    /// 1-based input bit.
    pub fn x(&self, j: usize) -> usize {
        j - 1
    }

    fn node_base(&self, i: usize) -> usize {
        self.x_len + (i - 1) * self.node_w()
    }

    pub fn in1(&self, i: usize) -> std::ops::Range<usize> {
        let b = self.node_base(i);
        b..b + self.idx_w
    }

    pub fn in2(&self, i: usize) -> std::ops::Range<usize> {
        let b = self.node_base(i) + self.idx_w;
        b..b + self.idx_w
    }

    pub fn gate_type(&self, i: usize) -> std::ops::Range<usize> {
        let b = self.node_base(i) + 2 * self.idx_w;
        b..b + TYPE_W
    }

    /// `(is_unknown, value)` bit positions of node `i`.
    pub fn value(&self, i: usize) -> (usize, usize) {
        let b = self.x_len + self.size * self.node_w() + 2 * (i - 1);
        (b, b + 1)
    }

    pub fn state_bits(&self) -> usize {
        self.x_len + self.size * (self.node_w() + 2)
    }

    pub fn action(&self) -> std::ops::Range<usize> {
        self.state_bits()..self.state_bits() + self.act_w
    }

    pub fn input_bits(&self) -> usize {
        self.action().end
    }

    pub fn encode_state(&self, c: &GateCircuit, x: &[bool], v: &[NodeValue]) -> Vec<bool> {
        debug_assert_eq!(x.len(), self.x_len);
        let mut out = Vec::with_capacity(self.input_bits());
        out.extend(x);
        for node in c.nodes() {
            push_int(&mut out, node.in1, self.idx_w);
            push_int(&mut out, node.in2, self.idx_w);
            push_int(&mut out, node.gate.code(), TYPE_W);
        }
        for &val in v {
            out.extend(value_bits(val));
        }
        out
    }

    pub fn encode_action(&self, a: usize) -> Vec<bool> {
        to_bits(a, self.act_w)
    }

    pub fn encode_input(&self, c: &GateCircuit, x: &[bool], v: &[NodeValue], a: usize) -> Vec<bool> {
        let mut out = self.encode_state(c, x, v);
        out.extend(self.encode_action(a));
        out
    }
}

/// `(machine state, tape symbols, head, k)` followed by the action bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NpLayout {
    pub states: usize,
    pub symbols: usize,
    pub p: usize,
    pub state_w: usize,
    pub sym_w: usize,
    pub head_w: usize,
    pub k_w: usize,
}

impl NpLayout {
    pub fn new(spec: &NdtmSpec) -> Self {
        let p = spec.step_bound();
        NpLayout {
            states: spec.states().len(),
            symbols: spec.alphabet().len(),
            p,
            state_w: bits_for(spec.states().len() - 1),
            sym_w: bits_for(spec.alphabet().len() - 1),
            head_w: bits_for(p - 1),
            k_w: bits_for(2 * p + 2),
        }
    }

    pub fn state(&self) -> std::ops::Range<usize> {
        0..self.state_w
    }

    /// 0-based tape cell.
    pub fn cell(&self, i: usize) -> std::ops::Range<usize> {
        let b = self.state_w + i * self.sym_w;
        b..b + self.sym_w
    }

    pub fn head(&self) -> std::ops::Range<usize> {
        let b = self.state_w + self.p * self.sym_w;
        b..b + self.head_w
    }

    pub fn k(&self) -> std::ops::Range<usize> {
        let b = self.head().end;
        b..b + self.k_w
    }

    pub fn state_bits(&self) -> usize {
        self.k().end
    }

    pub fn action(&self) -> usize {
        self.state_bits()
    }

    pub fn input_bits(&self) -> usize {
        self.state_bits() + 1
    }

    pub fn encode_state(&self, s: &NpState) -> Vec<bool> {
        let mut out = Vec::with_capacity(self.input_bits());
        push_int(&mut out, s.c.state, self.state_w);
        for &sym in &s.c.tape {
            push_int(&mut out, sym as usize, self.sym_w);
        }
        push_int(&mut out, s.c.head, self.head_w);
        push_int(&mut out, s.k, self.k_w);
        out
    }

    pub fn encode_input(&self, s: &NpState, a: bool) -> Vec<bool> {
        let mut out = self.encode_state(s);
        out.push(a);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn widths() {
        assert_eq!(bits_for(0), 1);
        assert_eq!(bits_for(1), 1);
        assert_eq!(bits_for(2), 2);
        assert_eq!(bits_for(7), 3);
        assert_eq!(bits_for(8), 4);
        let l = SatLayout::new(2);
        assert_eq!((l.code_w, l.k_w), (3, 3));
        assert_eq!(l.input_bits(), 6 * 3 + 2 + 3 + 1);
    }

    #[test]
    fn reward_codes() {
        for r in [zero(), half(), one()] {
            assert_eq!(decode_reward(&encode_reward(&r)), Some(r));
        }
        assert_eq!(encode_reward(&one()), [true, false]);
        assert_eq!(encode_reward(&half()), [false, true]);
        assert_eq!(decode_reward(&[true, true]), None);
    }
}
