//! Decision problems as MDP optimal values, and the brute-force deciders
//! they are checked against.

use serde::Serialize;

use crate::circuit::{GateCircuit, Node};
use crate::env::{CvpMdp, FamilyInstance, Mdp, NpMdp, PMdp, SatMdp};
use crate::error::{Error, Result};
use crate::formula::{Assignment, Cnf, Cnf3Formula, Literal};
use crate::ndtm::NdtmSpec;
use crate::oracle::{exact_dp, Ceiling};
use crate::rational::{one, rat, Rational};

pub const SAT_BRUTE_FORCE_MAX_N: usize = 24;

/// Pads a width-≤3 CNF over at most `n` variables with at most `n` clauses
/// to exactly `n` three-literal clauses: short clauses repeat their literals,
/// missing clauses are `(u1 ∨ ¬u1 ∨ u1)`.
pub fn pad_to_3cnf(cnf: &Cnf, n: usize) -> Result<Cnf3Formula> {
    if cnf.vars > n || cnf.clauses.len() > n {
        return Err(Error::invalid(format!(
            "{} clauses over {} variables do not fit n={n}",
            cnf.clauses.len(),
            cnf.vars
        )));
    }
    let mut clauses = Vec::with_capacity(n);
    for c in &cnf.clauses {
        let padded = match c.as_slice() {
            [a] => [*a, *a, *a],
            [a, b] => [*a, *b, *a],
            [a, b, c] => [*a, *b, *c],
            other => {
                return Err(Error::invalid(format!("clause width {} outside 1..=3", other.len())))
            }
        };
        clauses.push(padded);
    }
    while clauses.len() < n {
        clauses.push([Literal::pos(1), Literal::neg(1), Literal::pos(1)]);
    }
    Cnf3Formula::new(n, clauses)
}

/// Enumerates assignments in binary counting order with `u1` as the least
/// significant bit; returns the first satisfying one.
pub fn sat_brute_force(psi: &Cnf3Formula) -> Result<(bool, Option<Assignment>)> {
    let n = psi.n();
    if n > SAT_BRUTE_FORCE_MAX_N {
        return Err(Error::ResourceLimit {
            what: "brute-force variable count",
            actual: n,
            limit: SAT_BRUTE_FORCE_MAX_N,
            layer: None,
        });
    }
    for code in 0..(1u64 << n) {
        let v = Assignment::from_index(code, n);
        if psi.eval_unchecked(&v) {
            return Ok((true, Some(v)));
        }
    }
    Ok((false, None))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DecisionReport {
    pub id: String,
    pub family: String,
    pub oracle_answer: bool,
    pub mdp_answer: bool,
    #[serde(with = "crate::rational::serde_rational")]
    pub q1_value: Rational,
    pub agree: bool,
}

impl DecisionReport {
    fn new(id: &str, family: &str, oracle: bool, mdp: bool, q1: Rational) -> Self {
        DecisionReport {
            id: id.to_string(),
            family: family.to_string(),
            oracle_answer: oracle,
            mdp_answer: mdp,
            q1_value: q1,
            agree: oracle == mdp,
        }
    }
}

fn threshold() -> Rational {
    rat(3, 4)
}

pub fn decide_sat(id: &str, psi: &Cnf3Formula, ceiling: &Ceiling) -> Result<DecisionReport> {
    let (oracle, _) = sat_brute_force(psi)?;
    let m = SatMdp::new(psi.clone());
    let q1 = exact_dp(&m, ceiling)?.q1(1);
    Ok(DecisionReport::new(id, "sat", oracle, q1 > threshold(), q1))
}

pub fn decide_np(id: &str, spec: &NdtmSpec, x: &[bool], ceiling: &Ceiling) -> Result<DecisionReport> {
    let oracle = spec.accepts(x)?;
    let m = NpMdp::new(spec.clone(), x.to_vec())?;
    let q1 = exact_dp(&m, ceiling)?.q1(1);
    Ok(DecisionReport::new(id, "np", oracle, q1 > threshold(), q1))
}

pub fn decide_cvp(id: &str, circuit: &GateCircuit, ceiling: &Ceiling) -> Result<DecisionReport> {
    let oracle = circuit.evaluate(None)?;
    let m = CvpMdp::new(circuit.clone())?;
    let s0 = m.initial_state();
    let q1 = exact_dp(&m, ceiling)?.q1(m.policy(&s0));
    Ok(DecisionReport::new(id, "cvp", oracle, q1 == one(), q1))
}

pub fn decide_p(id: &str, circuit: &GateCircuit, x: &[bool], ceiling: &Ceiling) -> Result<DecisionReport> {
    let oracle = circuit.evaluate(Some(x))?;
    let m = PMdp::new(circuit.clone(), x.to_vec())?;
    let s0 = m.initial_state();
    let q1 = exact_dp(&m, ceiling)?.q1(m.policy(&s0));
    Ok(DecisionReport::new(id, "p", oracle, q1 == one(), q1))
}

pub fn decide_via_mdp(id: &str, inst: &FamilyInstance, ceiling: &Ceiling) -> Result<DecisionReport> {
    match inst {
        FamilyInstance::Sat(m) => decide_sat(id, m.formula(), ceiling),
        FamilyInstance::Np(m) => decide_np(id, m.spec(), m.input(), ceiling),
        FamilyInstance::Cvp(m) => decide_cvp(id, m.circuit(), ceiling),
        FamilyInstance::P(m) => decide_p(id, m.circuit(), m.x(), ceiling),
        other => Err(Error::invalid(format!(
            "no decision rule for the {} family",
            other.family()
        ))),
    }
}

pub const LANGUAGES: [&str; 3] = ["first-bit-1", "all-ones", "contains-a-1"];

/// Circuits over INPUT/AND/OR deciding built-in languages on length-`n` strings.
pub fn make_p_language_circuit(language: &str, n: usize) -> Result<GateCircuit> {
    if n == 0 {
        return Err(Error::invalid("language circuits need n >= 1"));
    }
    let tree = |combine: fn(usize, usize) -> Node| {
        let mut nodes: Vec<Node> = (1..=n).map(Node::input).collect();
        let mut level: Vec<usize> = (1..=n).collect();
        while level.len() > 1 {
            let mut next = Vec::new();
            for pair in level.chunks(2) {
                match pair {
                    [a, b] => {
                        nodes.push(combine(*a, *b));
                        next.push(nodes.len());
                    }
                    [a] => next.push(*a),
                    _ => unreachable!(),
                }
            }
            level = next;
        }
        GateCircuit::new(nodes)
    };
    match language {
        "first-bit-1" => GateCircuit::new(vec![Node::input(1)]),
        "all-ones" => tree(Node::and),
        "contains-a-1" => tree(Node::or),
        other => Err(Error::invalid(format!(
            "unknown language {other:?} (known: {})",
            LANGUAGES.join(", ")
        ))),
    }
}

pub fn language_member(language: &str, x: &[bool]) -> Result<bool> {
    match language {
        "first-bit-1" => Ok(x.first() == Some(&true)),
        "all-ones" => Ok(x.iter().all(|&b| b)),
        "contains-a-1" => Ok(x.contains(&true)),
        other => Err(Error::invalid(format!("unknown language {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ndtm::fixtures;
    use crate::rational::zero;

    fn lits(c: &[i64]) -> Vec<Literal> {
        c.iter().map(|&x| Literal::try_from(x).unwrap()).collect()
    }

    #[test]
    fn padding_examples() {
        let cnf = Cnf::new(2, vec![lits(&[1, 2])]).unwrap();
        let psi = pad_to_3cnf(&cnf, 2).unwrap();
        assert_eq!(psi.clauses()[1], [Literal::pos(1), Literal::neg(1), Literal::pos(1)]);
        let full = Cnf3Formula::from_signed(2, &[[1, 2, -1], [2, 2, 1]]).unwrap();
        let cnf = Cnf::new(2, vec![lits(&[1, 2, -1]), lits(&[2, 2, 1])]).unwrap();
        assert_eq!(pad_to_3cnf(&cnf, 2).unwrap(), full);
        assert!(pad_to_3cnf(&Cnf::new(3, vec![lits(&[3])]).unwrap(), 2).is_err());
    }

    #[test]
    fn padding_preserves_satisfiability_exhaustively() {
        // every CNF with up to 2 clauses of width 1..=3 over at most 2 variables
        let all_lits = [1i64, -1, 2, -2];
        let mut clauses = vec![];
        for w in 1..=3u32 {
            for code in 0..4usize.pow(w) {
                let mut c = vec![];
                let mut x = code;
                for _ in 0..w {
                    c.push(all_lits[x % 4]);
                    x /= 4;
                }
                clauses.push(lits(&c));
            }
        }
        let mut checked = 0;
        for count in 0..=2 {
            let combos: Vec<Vec<Vec<Literal>>> = match count {
                0 => vec![vec![]],
                1 => clauses.iter().map(|c| vec![c.clone()]).collect(),
                _ => clauses
                    .iter()
                    .flat_map(|a| clauses.iter().map(move |b| vec![a.clone(), b.clone()]))
                    .collect(),
            };
            for cs in combos {
                let cnf = Cnf::new(2, cs).unwrap();
                let psi = pad_to_3cnf(&cnf, 2).unwrap();
                let orig = (0..4).any(|i| cnf.satisfied_by(&Assignment::from_index(i, 2)));
                assert_eq!(sat_brute_force(&psi).unwrap().0, orig);
                checked += 1;
            }
        }
        assert_eq!(checked, 1 + 84 + 84 * 84);
    }

    #[test]
    fn brute_force_examples() {
        let taut = Cnf3Formula::from_signed(2, &[[1, -1, 1], [2, -2, 2]]).unwrap();
        assert_eq!(sat_brute_force(&taut).unwrap(), (true, Some(Assignment::zeros(2))));
        let contra = Cnf3Formula::from_signed(2, &[[1, 1, 1], [-1, -1, -1]]).unwrap();
        assert_eq!(sat_brute_force(&contra).unwrap(), (false, None));
        let psi = Cnf3Formula::from_signed(2, &[[1, 2, 1], [-1, -2, -1]]).unwrap();
        assert_eq!(
            sat_brute_force(&psi).unwrap(),
            (true, Some(Assignment(vec![true, false])))
        );
    }

    #[test]
    fn decision_examples() {
        let c = Ceiling::default();
        let sat = Cnf3Formula::from_signed(2, &[[1, -1, 1], [2, 2, 2]]).unwrap();
        let r = decide_sat("a", &sat, &c).unwrap();
        assert_eq!((r.q1_value, r.mdp_answer, r.agree), (one(), true, true));
        let unsat = Cnf3Formula::from_signed(2, &[[1, 1, 1], [-1, -1, -1]]).unwrap();
        let r = decide_sat("b", &unsat, &c).unwrap();
        assert_eq!((r.q1_value, r.mdp_answer, r.agree), (zero(), false, true));
        let circ = GateCircuit::new(vec![Node::constant(true), Node::not(1)]).unwrap();
        let r = decide_cvp("c", &circ, &c).unwrap();
        assert_eq!((r.q1_value, r.oracle_answer, r.agree), (zero(), false, true));
        let r = decide_np("d", &fixtures::accept_all(4), &[true], &c).unwrap();
        assert!(r.agree && r.mdp_answer);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains(r#""q1Value":"1/1""#), "{json}");
    }

    #[test]
    fn language_circuits() {
        let c = make_p_language_circuit("first-bit-1", 3).unwrap();
        assert_eq!(c.size(), 1);
        assert!(c.evaluate(Some(&[true, false, false])).unwrap());
        let c = make_p_language_circuit("all-ones", 2).unwrap();
        assert_eq!(c.nodes().last().unwrap(), &Node::and(1, 2));
        assert!(!c.evaluate(Some(&[true, false])).unwrap());
        for lang in LANGUAGES {
            for n in 1..=5 {
                let c = make_p_language_circuit(lang, n).unwrap();
                for code in 0..(1u32 << n) {
                    let x: Vec<bool> = (0..n).map(|i| (code >> i) & 1 == 1).collect();
                    assert_eq!(c.evaluate(Some(&x)).unwrap(), language_member(lang, &x).unwrap());
                }
            }
        }
        assert!(make_p_language_circuit("palindromes", 3).is_err());
    }
}
