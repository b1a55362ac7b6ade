use super::{BoolCircuit, CircuitBuilder, Wire};
use crate::error::{Error, Result};

pub const LOOKUP_MAX_BITS: usize = 20;

impl CircuitBuilder {
    /// Disjunction-of-minterms lookup over `inputs` (little-endian address).
    /// Only addresses with some output bit set get a minterm; an output bit
    /// that is never set becomes CONST0. Depth ≤ 3 above the inputs.
    pub fn lookup(
        &mut self,
        inputs: &[Wire],
        outputs: usize,
        table: impl Fn(usize) -> Vec<bool>,
    ) -> Vec<Wire> {
        let l = inputs.len();
        assert!(l <= LOOKUP_MAX_BITS, "lookup over {l} bits exceeds the ceiling");
        let mut terms: Vec<Vec<Wire>> = vec![Vec::new(); outputs];
        for u in 0..(1usize << l) {
            let row = table(u);
            debug_assert_eq!(row.len(), outputs);
            if !row.iter().any(|&b| b) {
                continue;
            }
            let lits = self.eq_literals(inputs, u);
            let minterm = self.and(lits);
            for (j, &b) in row.iter().enumerate() {
                if b {
                    terms[j].push(minterm);
                }
            }
        }
        terms.into_iter().map(|t| self.or(t)).collect()
    }
}

/// Standalone lookup circuit for a table over `l` input bits and `m` output
/// bits. Size is at most `l + 2^l + m`.
pub fn lookup_circuit(l: usize, m: usize, table: impl Fn(usize) -> Vec<bool>) -> Result<BoolCircuit> {
    if l > LOOKUP_MAX_BITS {
        return Err(Error::ResourceLimit {
            what: "lookup input bits",
            actual: l,
            limit: LOOKUP_MAX_BITS,
            layer: None,
        });
    }
    let mut b = CircuitBuilder::new(l);
    let inputs = b.inputs(0..l);
    let outs = b.lookup(&inputs, m, table);
    Ok(b.finish(outs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acz::{to_bits, GateOp};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn xor() {
        let c = lookup_circuit(2, 1, |u| vec![(u & 1) ^ (u >> 1) == 1]).unwrap();
        for u in 0..4 {
            assert_eq!(c.eval(&to_bits(u, 2)), vec![(u & 1) ^ (u >> 1) == 1]);
        }
    }

    #[test]
    fn constant_zero_table() {
        let c = lookup_circuit(3, 2, |_| vec![false, false]).unwrap();
        assert_eq!(c.gates().len(), 1);
        assert_eq!(c.gates()[0].op, GateOp::Const0);
        for u in 0..8 {
            assert_eq!(c.eval(&to_bits(u, 3)), vec![false, false]);
        }
    }

    #[test]
    fn random_tables_and_size_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for l in 1..=6 {
            for _ in 0..20 {
                let m = rng.gen_range(1..5);
                let table: Vec<Vec<bool>> =
                    (0..1 << l).map(|_| (0..m).map(|_| rng.gen()).collect()).collect();
                let c = lookup_circuit(l, m, |u| table[u].clone()).unwrap();
                for (u, row) in table.iter().enumerate() {
                    assert_eq!(&c.eval(&to_bits(u, l)), row);
                }
                let st = c.stats();
                assert!(st.size <= l + (1 << l) + m);
                assert!(st.depth <= 3);
            }
        }
    }

    #[test]
    fn ceiling() {
        assert!(lookup_circuit(LOOKUP_MAX_BITS + 1, 1, |_| vec![false]).is_err());
    }
}
