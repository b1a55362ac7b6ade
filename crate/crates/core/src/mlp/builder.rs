//! Incremental construction of ReLU networks from linear expressions.
//!
//! A [`Lin`] is an affine combination of neurons that all live in one layer
//! (layer 0 being the input). [`NetBuilder::relu`] places a new neuron one
//! layer deeper; combining expressions of different depths carries the
//! shallower ones forward through identity ReLUs.

use std::collections::{HashMap, HashSet};

use num_traits::{One, ToPrimitive, Zero};

use super::network::{Layer, Mlp};
use crate::error::{Error, Result};
use crate::rational::{rat, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    layer: u32,
    idx: u32,
}

#[derive(Clone, Debug)]
pub struct Lin {
    depth: u32,
    terms: Vec<(NodeId, Rational)>,
    bias: Rational,
    lo: Rational,
    hi: Rational,
}

impl Lin {
    pub fn constant(c: Rational) -> Self {
        Lin { depth: 0, terms: Vec::new(), bias: c, lo: c, hi: c }
    }

    pub fn int(c: i64) -> Self {
        Lin::constant(rat(c as i128, 1))
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn range(&self) -> (Rational, Rational) {
        (self.lo, self.hi)
    }

    /// Narrows the interval to what is known to hold on the inputs of interest.
    pub fn assume_range(mut self, lo: i64, hi: i64) -> Self {
        self.lo = self.lo.max(rat(lo as i128, 1));
        self.hi = self.hi.min(rat(hi as i128, 1));
        self
    }

    pub fn scale(&self, c: Rational) -> Lin {
        if c.is_zero() {
            return Lin::constant(Rational::zero());
        }
        let (a, b) = (self.lo * c, self.hi * c);
        Lin {
            depth: self.depth,
            terms: self.terms.iter().map(|&(n, w)| (n, w * c)).collect(),
            bias: self.bias * c,
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    pub fn neg(&self) -> Lin {
        self.scale(-Rational::one())
    }

    pub fn add_const(&self, c: Rational) -> Lin {
        Lin { bias: self.bias + c, lo: self.lo + c, hi: self.hi + c, ..self.clone() }
    }

    /// `c - self`.
    pub fn rsub(&self, c: i64) -> Lin {
        self.neg().add_const(rat(c as i128, 1))
    }

    fn merged(depth: u32, parts: impl IntoIterator<Item = Lin>) -> Lin {
        let mut acc: HashMap<NodeId, Rational> = HashMap::new();
        let (mut bias, mut lo, mut hi) = (Rational::zero(), Rational::zero(), Rational::zero());
        for p in parts {
            debug_assert!(p.is_constant() || p.depth == depth);
            for (n, w) in p.terms {
                *acc.entry(n).or_insert_with(Rational::zero) += w;
            }
            bias += p.bias;
            lo += p.lo;
            hi += p.hi;
        }
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, w)| !w.is_zero()).collect();
        terms.sort();
        let depth = if terms.is_empty() { 0 } else { depth };
        Lin { depth, terms, bias, lo, hi }
    }
}

#[derive(Clone, Debug)]
struct Neuron {
    terms: Vec<(NodeId, Rational)>,
    bias: Rational,
}

type NeuronKey = (u32, Vec<(NodeId, Rational)>, Rational);

#[derive(Debug)]
pub struct NetBuilder {
    input_ranges: Vec<(Rational, Rational)>,
    layers: Vec<Vec<Neuron>>,
    ranges: HashMap<NodeId, (Rational, Rational)>,
    dedup: HashMap<NeuronKey, NodeId>,
}

impl NetBuilder {
    /// One input per `(lo, hi)` pair.
    pub fn new(input_ranges: &[(i64, i64)]) -> Self {
        let input_ranges: Vec<_> =
            input_ranges.iter().map(|&(lo, hi)| (rat(lo as i128, 1), rat(hi as i128, 1))).collect();
        let mut ranges = HashMap::new();
        for (i, &r) in input_ranges.iter().enumerate() {
            ranges.insert(NodeId { layer: 0, idx: i as u32 }, r);
        }
        NetBuilder { input_ranges, layers: Vec::new(), ranges, dedup: HashMap::new() }
    }

    pub fn input(&self, i: usize) -> Lin {
        assert!(i < self.input_ranges.len(), "input {i} out of range");
        let (lo, hi) = self.input_ranges[i];
        Lin {
            depth: 0,
            terms: vec![(NodeId { layer: 0, idx: i as u32 }, Rational::one())],
            bias: Rational::zero(),
            lo,
            hi,
        }
    }

    pub fn inputs(&self) -> Vec<Lin> {
        (0..self.input_ranges.len()).map(|i| self.input(i)).collect()
    }

    fn node_lin(&self, id: NodeId) -> Lin {
        let (lo, hi) = self.ranges[&id];
        Lin { depth: id.layer, terms: vec![(id, Rational::one())], bias: Rational::zero(), lo, hi }
    }

    fn push_neuron(&mut self, lin: &Lin) -> NodeId {
        let layer = lin.depth + 1;
        let key = (layer, lin.terms.clone(), lin.bias);
        if let Some(&id) = self.dedup.get(&key) {
            let r = self.ranges.get_mut(&id).unwrap();
            // same function, keep the tighter knowledge
            r.0 = r.0.max(lin.lo.max(Rational::zero()));
            r.1 = r.1.min(lin.hi.max(Rational::zero()));
            return id;
        }
        while self.layers.len() < layer as usize {
            self.layers.push(Vec::new());
        }
        let slot = &mut self.layers[layer as usize - 1];
        let id = NodeId { layer, idx: slot.len() as u32 };
        slot.push(Neuron { terms: lin.terms.clone(), bias: lin.bias });
        self.ranges.insert(id, (lin.lo.max(Rational::zero()), lin.hi.max(Rational::zero())));
        self.dedup.insert(key, id);
        id
    }

    /// `ReLU(lin)` as a neuron one layer below `lin`.
    pub fn relu(&mut self, lin: &Lin) -> Lin {
        if lin.is_constant() {
            return Lin::constant(lin.bias.max(Rational::zero()));
        }
        let id = self.push_neuron(lin);
        self.node_lin(id)
    }

    /// Re-express `lin` in terms of neurons at layer `depth`.
    pub fn lift(&mut self, lin: &Lin, depth: u32) -> Lin {
        assert!(depth >= lin.depth || lin.is_constant(), "cannot lift downwards");
        if lin.is_constant() || lin.depth == depth {
            return lin.clone();
        }
        let zero = Rational::zero();
        if lin.lo >= zero {
            let mut cur = self.relu(lin);
            while cur.depth < depth {
                cur = self.relu(&cur);
            }
            return cur;
        }
        if lin.hi <= zero {
            let neg = lin.neg();
            return self.lift(&neg, depth).neg();
        }
        let pos = lin.clone().with_lo(zero);
        let neg = lin.neg().with_lo(zero);
        let p = self.lift_nonneg(&pos, depth);
        let n = self.lift_nonneg(&neg, depth);
        let mut out = Lin::merged(depth, [p, n.neg()]);
        out.lo = lin.lo;
        out.hi = lin.hi;
        out
    }

    fn lift_nonneg(&mut self, lin: &Lin, depth: u32) -> Lin {
        let mut cur = self.relu(lin);
        while cur.depth < depth {
            cur = self.relu(&cur);
        }
        cur
    }

    /// `Σ c_i lin_i + bias`, lifting every part to the deepest one.
    pub fn combine(&mut self, parts: &[(Rational, &Lin)], bias: Rational) -> Lin {
        let depth = parts.iter().filter(|(_, l)| !l.is_constant()).map(|(_, l)| l.depth).max().unwrap_or(0);
        let mut lifted = Vec::with_capacity(parts.len() + 1);
        for &(c, l) in parts {
            lifted.push(self.lift(l, depth).scale(c));
        }
        lifted.push(Lin::constant(bias));
        Lin::merged(depth, lifted)
    }

    pub fn sum(&mut self, parts: &[Lin]) -> Lin {
        let refs: Vec<(Rational, &Lin)> = parts.iter().map(|l| (Rational::one(), l)).collect();
        self.combine(&refs, Rational::zero())
    }

    pub fn add(&mut self, a: &Lin, b: &Lin) -> Lin {
        self.combine(&[(Rational::one(), a), (Rational::one(), b)], Rational::zero())
    }

    pub fn sub(&mut self, a: &Lin, b: &Lin) -> Lin {
        self.combine(&[(Rational::one(), a), (-Rational::one(), b)], Rational::zero())
    }

    /// `b · x` for `b ∈ {0,1}` and non-negative bounded `x`, as `ReLU(x - M(1-b))`.
    pub fn select(&mut self, b: &Lin, x: &Lin) -> Lin {
        assert!(x.lo >= Rational::zero(), "select needs a non-negative operand");
        let m = x.hi.ceil();
        if m.is_zero() {
            return Lin::int(0);
        }
        let pre = self.combine(&[(Rational::one(), x), (m, b)], -m);
        let out = self.relu(&pre);
        out.with_lo(Rational::zero()).with_hi(x.hi)
    }

    /// Lookup gadget: exact on every point of `domain`, unconstrained elsewhere.
    pub fn lookup(
        &mut self,
        xs: &[Lin],
        domain: &[Vec<i64>],
        table: impl Fn(&[i64]) -> Rational,
    ) -> Result<Lin> {
        if domain.is_empty() {
            return Err(Error::invalid("lookup domain is empty"));
        }
        let l = xs.len();
        if domain.iter().any(|u| u.len() != l) {
            return Err(Error::invalid("lookup domain point has the wrong arity"));
        }
        let mut seen = HashSet::with_capacity(domain.len());
        for u in domain {
            if !seen.insert(u) {
                return Err(Error::invalid(format!("duplicate lookup domain point {u:?}")));
            }
        }
        // any gap up to the minimum works; a power of two keeps 1/δ on the grid
        let gap = min_gap(domain);
        let delta = rat(1i128 << (63 - gap.leading_zeros()), 1);
        let values: Vec<Rational> = domain.iter().map(|u| table(u)).collect();
        if values.iter().all(Zero::is_zero) {
            return Ok(Lin::int(0));
        }
        if domain.len() == 1 {
            return Ok(Lin::constant(values[0]));
        }
        let depth = xs.iter().filter(|x| !x.is_constant()).map(Lin::depth).max().unwrap_or(0);
        let xs: Vec<Lin> = xs.iter().map(|x| self.lift(x, depth)).collect();
        let one = Rational::one();
        let two = rat(2, 1);
        let mut parts = Vec::new();
        let (mut lo, mut hi) = (Rational::zero(), Rational::zero());
        for (u, &fu) in domain.iter().zip(&values) {
            if fu.is_zero() {
                continue;
            }
            lo = lo.min(fu);
            hi = hi.max(fu);
            let mut matches = Vec::with_capacity(l);
            for (x, &ui) in xs.iter().zip(u) {
                let ui = rat(ui as i128, 1);
                let r1 = self.relu(&x.add_const(-ui));
                let r2 = self.relu(&x.neg().add_const(ui + delta));
                let pre = self.combine(&[(-two, &r1), (-one, &r2)], two * delta);
                let f = self.relu(&pre.clone().with_hi(delta));
                matches.push(self.lift(&f, depth + 2));
            }
            let mut s = self.sum(&matches);
            s = s.add_const(-rat(l as i128 - 1, 1) * delta).with_hi(delta);
            let fu_node = self.relu(&s);
            parts.push((fu / delta, fu_node));
        }
        let refs: Vec<(Rational, &Lin)> = parts.iter().map(|(c, n)| (*c, n)).collect();
        let out = self.combine(&refs, Rational::zero());
        Ok(out.with_lo(lo).with_hi(hi))
    }

    pub fn depth(&self) -> u32 {
        self.layers.len() as u32
    }

    /// Lifts every output to a common depth, drops dead neurons, and emits
    /// the network.
    pub fn finish(mut self, outputs: &[Lin], precision_bits: u32) -> Result<Mlp> {
        let depth = outputs.iter().filter(|o| !o.is_constant()).map(Lin::depth).max().unwrap_or(0);
        let outs: Vec<Lin> = outputs.iter().map(|o| self.lift(o, depth)).collect();
        // liveness, deepest layer first
        let mut live: Vec<Vec<bool>> = (0..=depth).map(|d| vec![false; self.width(d)]).collect();
        for o in &outs {
            for (n, _) in &o.terms {
                live[n.layer as usize][n.idx as usize] = true;
            }
        }
        for d in (1..=depth).rev() {
            for (i, neuron) in self.layers[d as usize - 1].iter().enumerate() {
                if live[d as usize][i] {
                    for (n, _) in &neuron.terms {
                        live[n.layer as usize][n.idx as usize] = true;
                    }
                }
            }
        }
        // inputs keep their positions
        live[0].iter_mut().for_each(|b| *b = true);
        let remap: Vec<Vec<Option<usize>>> = live
            .iter()
            .map(|l| {
                let mut next = 0;
                l.iter()
                    .map(|&b| {
                        b.then(|| {
                            next += 1;
                            next - 1
                        })
                    })
                    .collect()
            })
            .collect();
        let row = |terms: &[(NodeId, Rational)]| -> Result<Vec<(usize, f64)>> {
            terms
                .iter()
                .map(|&(n, w)| Ok((remap[n.layer as usize][n.idx as usize].unwrap(), to_f64(w)?)))
                .collect()
        };
        let mut layers = Vec::with_capacity(depth as usize + 1);
        let mut in_dim = self.input_ranges.len();
        for d in 1..=depth {
            let mut rows = Vec::new();
            let mut bias = Vec::new();
            for (i, neuron) in self.layers[d as usize - 1].iter().enumerate() {
                if live[d as usize][i] {
                    rows.push(row(&neuron.terms)?);
                    bias.push(to_f64(neuron.bias)?);
                }
            }
            let out_dim = rows.len();
            layers.push(Layer { in_dim, rows, bias });
            in_dim = out_dim;
        }
        let mut rows = Vec::with_capacity(outs.len());
        let mut bias = Vec::with_capacity(outs.len());
        for o in &outs {
            rows.push(row(&o.terms)?);
            bias.push(to_f64(o.bias)?);
        }
        layers.push(Layer { in_dim, rows, bias });
        Mlp::new(self.input_ranges.len(), layers, precision_bits)
    }

    fn width(&self, d: u32) -> usize {
        if d == 0 {
            self.input_ranges.len()
        } else {
            self.layers.get(d as usize - 1).map_or(0, Vec::len)
        }
    }
}

impl Lin {
    fn with_lo(mut self, lo: Rational) -> Self {
        self.lo = self.lo.max(lo);
        self
    }

    fn with_hi(mut self, hi: Rational) -> Self {
        self.hi = self.hi.min(hi);
        self
    }
}

fn to_f64(r: Rational) -> Result<f64> {
    // only dyadic values are exactly representable
    let d = *r.denom();
    if d & (d - 1) != 0 {
        return Err(Error::invalid(format!("coefficient {r} is not dyadic")));
    }
    Ok(r.numer().to_f64().unwrap() / d.to_f64().unwrap())
}

/// Smallest ∞-norm distance between two points (1 for singletons).
pub fn min_gap(domain: &[Vec<i64>]) -> i64 {
    let mut best = i64::MAX;
    for (i, a) in domain.iter().enumerate() {
        for b in &domain[i + 1..] {
            let d = a.iter().zip(b).map(|(x, y)| (x - y).abs()).max().unwrap_or(0);
            best = best.min(d);
            if best <= 1 {
                return best.max(1);
            }
        }
    }
    if best == i64::MAX {
        1
    } else {
        best
    }
}

/// All integer points of a box, first coordinate varying slowest.
pub fn grid(ranges: &[(i64, i64)]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for &(lo, hi) in ranges {
        let mut next = Vec::with_capacity(out.len() * (hi - lo + 1).max(0) as usize);
        for p in &out {
            for v in lo..=hi {
                let mut q = p.clone();
                q.push(v);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(m: &Mlp, x: &[i64]) -> Vec<Rational> {
        let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        assert!(m.rounding_is_exact(&xf).unwrap());
        m.forward_rational(&xf).unwrap()
    }

    #[test]
    fn lift_signed_expression() {
        let mut b = NetBuilder::new(&[(-3, 3)]);
        let x = b.input(0);
        let deep = b.lift(&x, 3);
        assert_eq!(deep.depth(), 3);
        let m = b.finish(&[deep], 16).unwrap();
        assert_eq!(m.layer_count(), 4);
        for v in -3..=3 {
            assert_eq!(eval(&m, &[v]), vec![rat(v as i128, 1)]);
        }
    }

    #[test]
    fn mixed_depth_outputs_align() {
        let mut b = NetBuilder::new(&[(0, 5), (0, 5)]);
        let x = b.input(0);
        let y = b.input(1);
        let d = b.sub(&x, &y);
        let r = b.relu(&d);
        let r2 = b.relu(&r.add_const(-Rational::one()));
        let m = b.finish(&[r2, x.clone(), Lin::int(7)], 16).unwrap();
        assert_eq!(m.layer_count(), 3);
        assert_eq!(eval(&m, &[4, 1]), vec![rat(2, 1), rat(4, 1), rat(7, 1)]);
    }

    #[test]
    fn lookup_matches_table() {
        let domain = grid(&[(0, 3), (1, 2)]);
        let mut b = NetBuilder::new(&[(0, 3), (1, 2)]);
        let xs = b.inputs();
        let f = |u: &[i64]| rat((u[0] * 3 - u[1]) as i128, 2);
        let out = b.lookup(&xs, &domain, f).unwrap();
        let m = b.finish(&[out], 16).unwrap();
        for u in &domain {
            assert_eq!(eval(&m, u), vec![f(u)], "{u:?}");
        }
    }

    #[test]
    fn lookup_with_wide_gap() {
        let domain = vec![vec![0], vec![3], vec![10]];
        assert_eq!(min_gap(&domain), 3);
        let mut b = NetBuilder::new(&[(0, 10)]);
        let x = b.input(0);
        let out = b.lookup(&[x], &domain, |u| rat(u[0] as i128 + 1, 1)).unwrap();
        let m = b.finish(&[out], 16).unwrap();
        for u in &domain {
            assert_eq!(eval(&m, u), vec![rat(u[0] as i128 + 1, 1)]);
        }
    }

    #[test]
    fn select_gadget() {
        let mut b = NetBuilder::new(&[(0, 1), (0, 3)]);
        let (g, x) = (b.input(0), b.input(1));
        let s = b.select(&g, &x);
        let m = b.finish(&[s], 16).unwrap();
        for gv in 0..=1 {
            for xv in 0..=3 {
                assert_eq!(eval(&m, &[gv, xv]), vec![rat((gv * xv) as i128, 1)]);
            }
        }
    }

    #[test]
    fn duplicate_points_rejected() {
        let mut b = NetBuilder::new(&[(0, 1)]);
        let x = b.input(0);
        assert!(b.lookup(&[x], &[vec![0], vec![0]], |_| Rational::one()).is_err());
    }

    #[test]
    fn dead_neurons_pruned() {
        let mut b = NetBuilder::new(&[(0, 1)]);
        let x = b.input(0);
        let _unused = b.relu(&x.rsub(1));
        let used = b.relu(&x);
        let m = b.finish(&[used], 16).unwrap();
        assert_eq!(m.layers()[0].out_dim(), 1);
    }
}
