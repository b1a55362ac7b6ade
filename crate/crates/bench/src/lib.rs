//! Fixed benchmark inputs shared by the criterion targets.

use mdpzoo::formula::Cnf3Formula;
use mdpzoo::generate::{random_circuit, random_formula};
use mdpzoo::GateCircuit;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn formula(n: usize) -> Cnf3Formula {
    random_formula(n, &mut ChaCha8Rng::seed_from_u64(n as u64))
}

pub fn circuit(n: usize) -> GateCircuit {
    random_circuit(n, &mut ChaCha8Rng::seed_from_u64(100 + n as u64))
}
