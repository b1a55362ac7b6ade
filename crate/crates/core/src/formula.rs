//! 3-CNF formulas and assignments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A signed literal: `+i` is `u_i`, `-i` is `¬u_i` (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub struct Literal(i32);

impl Literal {
    pub fn pos(var: usize) -> Self {
        assert!(var >= 1);
        Literal(var as i32)
    }

    pub fn neg(var: usize) -> Self {
        assert!(var >= 1);
        Literal(-(var as i32))
    }

    pub fn var(self) -> usize {
        self.0.unsigned_abs() as usize
    }

    pub fn is_negated(self) -> bool {
        self.0 < 0
    }

    pub fn signed(self) -> i64 {
        self.0 as i64
    }

    /// Integer code used by embeddings: `i` for `u_i`, `i + n` for `¬u_i`.
    pub fn code(self, n: usize) -> usize {
        if self.is_negated() {
            self.var() + n
        } else {
            self.var()
        }
    }

    pub fn from_code(code: usize, n: usize) -> Option<Self> {
        match code {
            c if (1..=n).contains(&c) => Some(Literal::pos(c)),
            c if (n + 1..=2 * n).contains(&c) => Some(Literal::neg(c - n)),
            _ => None,
        }
    }

    pub fn eval(self, v: &Assignment) -> bool {
        v.get(self.var()) != self.is_negated()
    }
}

impl TryFrom<i64> for Literal {
    type Error = String;

    fn try_from(x: i64) -> std::result::Result<Self, String> {
        if x == 0 || x.unsigned_abs() > i32::MAX as u64 {
            return Err(format!("literal {x} out of range"));
        }
        Ok(Literal(x as i32))
    }
}

impl From<Literal> for i64 {
    fn from(l: Literal) -> i64 {
        l.0 as i64
    }
}

/// Truth assignment `v ∈ {0,1}^n`; index 1 is the first variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(pub Vec<bool>);

impl Assignment {
    pub fn zeros(n: usize) -> Self {
        Assignment(vec![false; n])
    }

    /// Assignment whose i-th bit is bit `i-1` of `code` (u1 least significant).
    pub fn from_index(code: u64, n: usize) -> Self {
        Assignment((0..n).map(|i| (code >> i) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// 1-based access.
    pub fn get(&self, i: usize) -> bool {
        self.0[i - 1]
    }

    pub fn set(&mut self, i: usize, b: bool) {
        self.0[i - 1] = b;
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }
}

/// A 3-CNF formula with exactly `n` clauses over `n` variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Cnf3Formula {
    n: usize,
    clauses: Vec<[Literal; 3]>,
}

#[derive(Deserialize)]
struct RawFormula {
    n: usize,
    clauses: Vec<Vec<i64>>,
}

impl<'de> Deserialize<'de> for Cnf3Formula {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawFormula::deserialize(d)?;
        let mut clauses = Vec::with_capacity(raw.clauses.len());
        for c in &raw.clauses {
            if c.len() != 3 {
                return Err(serde::de::Error::custom(format!(
                    "clause {c:?} does not have exactly 3 literals"
                )));
            }
            let mut lits = [Literal(1); 3];
            for (slot, &x) in lits.iter_mut().zip(c) {
                *slot = Literal::try_from(x).map_err(serde::de::Error::custom)?;
            }
            clauses.push(lits);
        }
        Cnf3Formula::new(raw.n, clauses).map_err(serde::de::Error::custom)
    }
}

impl Cnf3Formula {
    pub fn new(n: usize, clauses: Vec<[Literal; 3]>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("formula must have n >= 1"));
        }
        if clauses.len() != n {
            return Err(Error::invalid(format!(
                "formula over n={n} needs exactly {n} clauses, got {}",
                clauses.len()
            )));
        }
        for (j, c) in clauses.iter().enumerate() {
            for l in c {
                if l.var() > n {
                    return Err(Error::invalid(format!(
                        "clause {} references u{} beyond n={n}",
                        j + 1,
                        l.var()
                    )));
                }
            }
        }
        Ok(Cnf3Formula { n, clauses })
    }

    /// Builds from signed integers, e.g. `[[1,-1,1],[2,-2,2]]`.
    pub fn from_signed(n: usize, clauses: &[[i64; 3]]) -> Result<Self> {
        let mut out = Vec::with_capacity(clauses.len());
        for c in clauses {
            let mut lits = [Literal(1); 3];
            for (slot, &x) in lits.iter_mut().zip(c) {
                *slot = Literal::try_from(x).map_err(Error::InvalidInput)?;
            }
            out.push(lits);
        }
        Cnf3Formula::new(n, out)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn clauses(&self) -> &[[Literal; 3]] {
        &self.clauses
    }

    /// The 3n literals in clause order.
    pub fn literals(&self) -> impl Iterator<Item = Literal> + '_ {
        self.clauses.iter().flatten().copied()
    }

    pub fn evaluate(&self, v: &Assignment) -> Result<bool> {
        if v.len() != self.n {
            return Err(Error::invalid(format!(
                "assignment has {} bits, formula has n={}",
                v.len(),
                self.n
            )));
        }
        Ok(self.eval_unchecked(v))
    }

    pub(crate) fn eval_unchecked(&self, v: &Assignment) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|l| l.eval(v)))
    }

    /// All formulas over `n` variables with `n` clauses, in lexicographic code order.
    /// There are `(2n)^(3n)` of them, so only sensible for n ≤ 2.
    pub fn enumerate_all(n: usize) -> impl Iterator<Item = Cnf3Formula> {
        let m = 2 * n;
        let slots = 3 * n;
        let total = (m as u64).pow(slots as u32);
        (0..total).map(move |mut idx| {
            let mut codes = Vec::with_capacity(slots);
            for _ in 0..slots {
                codes.push((idx % m as u64) as usize + 1);
                idx /= m as u64;
            }
            let clauses = codes
                .chunks(3)
                .map(|c| {
                    [
                        Literal::from_code(c[0], n).unwrap(),
                        Literal::from_code(c[1], n).unwrap(),
                        Literal::from_code(c[2], n).unwrap(),
                    ]
                })
                .collect();
            Cnf3Formula { n, clauses }
        })
    }
}

/// A CNF with clause widths 1..=3, as read from DIMACS before padding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cnf {
    pub vars: usize,
    pub clauses: Vec<Vec<Literal>>,
}

impl Cnf {
    pub fn new(vars: usize, clauses: Vec<Vec<Literal>>) -> Result<Self> {
        for c in &clauses {
            if c.is_empty() || c.len() > 3 {
                return Err(Error::invalid(format!(
                    "clause width {} outside 1..=3",
                    c.len()
                )));
            }
            if let Some(l) = c.iter().find(|l| l.var() > vars) {
                return Err(Error::invalid(format!("literal {} beyond {vars} variables", l.0)));
            }
        }
        Ok(Cnf { vars, clauses })
    }

    pub fn parse_dimacs(text: &str) -> Result<Self> {
        let mut vars = None;
        let mut clauses = Vec::new();
        let mut current = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
                continue;
            }
            if line.starts_with('p') {
                let parts: Vec<&str> = line.split_whitespace().collect();
                if parts.len() != 4 || parts[1] != "cnf" {
                    return Err(Error::invalid(format!("bad DIMACS header {line:?}")));
                }
                vars = Some(
                    parts[2]
                        .parse::<usize>()
                        .map_err(|_| Error::invalid(format!("bad variable count in {line:?}")))?,
                );
                continue;
            }
            for tok in line.split_whitespace() {
                let x: i64 = tok
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad DIMACS token {tok:?}")))?;
                if x == 0 {
                    clauses.push(std::mem::take(&mut current));
                } else {
                    current.push(Literal::try_from(x).map_err(Error::InvalidInput)?);
                }
            }
        }
        if !current.is_empty() {
            clauses.push(current);
        }
        let vars = vars.ok_or_else(|| Error::invalid("missing DIMACS `p cnf` header"))?;
        Cnf::new(vars, clauses)
    }

    pub fn satisfied_by(&self, v: &Assignment) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|l| l.eval(v)))
    }
}
