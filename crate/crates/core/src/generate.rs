//! Seeded random instance generators.

use rand::Rng;

use crate::circuit::{GateCircuit, Node};
use crate::formula::{Cnf3Formula, Literal};

/// Uniform over all `(2n)^(3n)` literal tuples.
pub fn random_formula<R: Rng>(n: usize, rng: &mut R) -> Cnf3Formula {
    let clauses = (0..n)
        .map(|_| [0; 3].map(|_| Literal::from_code(rng.gen_range(1..=2 * n), n).unwrap()))
        .collect();
    Cnf3Formula::new(n, clauses).expect("generated formula is well formed")
}

/// Node 1 is a uniform constant; every later node picks a gate type
/// uniformly from AND/OR/NOT/CONST0/CONST1 and its inputs uniformly among
/// earlier nodes.
pub fn random_circuit<R: Rng>(n: usize, rng: &mut R) -> GateCircuit {
    assert!(n >= 1);
    let mut nodes = vec![Node::constant(rng.gen())];
    for i in 2..=n {
        let node = match rng.gen_range(0..5) {
            0 => Node::and(rng.gen_range(1..i), rng.gen_range(1..i)),
            1 => Node::or(rng.gen_range(1..i), rng.gen_range(1..i)),
            2 => Node::not(rng.gen_range(1..i)),
            3 => Node::constant(false),
            _ => Node::constant(true),
        };
        nodes.push(node);
    }
    GateCircuit::new(nodes).expect("generated circuit is topological")
}

/// Random circuit of size `size` over AND/OR/NOT/INPUT reading bits of an
/// `m`-bit input string (node 1 is always an INPUT).
pub fn random_input_circuit<R: Rng>(size: usize, m: usize, rng: &mut R) -> GateCircuit {
    assert!(size >= 1 && m >= 1);
    let mut nodes = vec![Node::input(rng.gen_range(1..=m))];
    for i in 2..=size {
        let node = match rng.gen_range(0..4) {
            0 => Node::and(rng.gen_range(1..i), rng.gen_range(1..i)),
            1 => Node::or(rng.gen_range(1..i), rng.gen_range(1..i)),
            2 => Node::not(rng.gen_range(1..i)),
            _ => Node::input(rng.gen_range(1..=m)),
        };
        nodes.push(node);
    }
    GateCircuit::new(nodes).expect("generated circuit is topological")
}

pub fn random_bits<R: Rng>(m: usize, rng: &mut R) -> Vec<bool> {
    (0..m).map(|_| rng.gen()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn deterministic_given_seed() {
        let a = random_formula(4, &mut ChaCha8Rng::seed_from_u64(1));
        let b = random_formula(4, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a, b);
        let c = random_circuit(9, &mut ChaCha8Rng::seed_from_u64(5));
        let d = random_circuit(9, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(c, d);
        assert!(!c.has_inputs());
    }

    #[test]
    fn input_circuits() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let c = random_input_circuit(6, 3, &mut rng);
            assert!(c.input_arity() <= 3);
            assert!(c.evaluate(Some(&[true, false, true])).is_ok());
        }
    }
}
