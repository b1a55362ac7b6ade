//! Boolean gates and table lookups as small ReLU networks.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::builder::NetBuilder;
use super::network::{Layer, Mlp, DEFAULT_PRECISION_BITS};
use crate::error::{Error, Result};
use crate::rational::{rational_from_f64, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateMlpKind {
    And,
    Or,
    Not,
    Maj,
}

impl FromStr for GateMlpKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "AND" => Ok(GateMlpKind::And),
            "OR" => Ok(GateMlpKind::Or),
            "NOT" => Ok(GateMlpKind::Not),
            "MAJ" => Ok(GateMlpKind::Maj),
            _ => Err(Error::invalid(format!("unknown gate kind {s:?}"))),
        }
    }
}

impl GateMlpKind {
    /// Boolean semantics; MAJ is strict majority.
    pub fn truth(self, x: &[bool]) -> bool {
        let ones = x.iter().filter(|&&b| b).count();
        match self {
            GateMlpKind::And => ones == x.len(),
            GateMlpKind::Or => ones > 0,
            GateMlpKind::Not => !x[0],
            GateMlpKind::Maj => 2 * ones > x.len(),
        }
    }
}

/// One hidden layer, affine readout.
///
/// * AND: `ReLU(Σx - n + 1)`
/// * OR: `1 - ReLU(1 - Σx)`
/// * NOT: `1 - ReLU(x)`
/// * MAJ: `ReLU(2Σx - n) - ReLU(2Σx - n - 1)`
pub fn build_gate_mlp(kind: GateMlpKind, fanin: usize) -> Result<Mlp> {
    if fanin == 0 {
        return Err(Error::invalid("gate fan-in must be at least 1"));
    }
    if kind == GateMlpKind::Not && fanin != 1 {
        return Err(Error::invalid("NOT takes exactly one input"));
    }
    let n = fanin as f64;
    let all = |w: f64| -> Vec<(usize, f64)> { (0..fanin).map(|i| (i, w)).collect() };
    let (hidden, hidden_b, out, out_b) = match kind {
        GateMlpKind::And => (vec![all(1.0)], vec![1.0 - n], vec![(0, 1.0)], 0.0),
        GateMlpKind::Or => (vec![all(-1.0)], vec![1.0], vec![(0, -1.0)], 1.0),
        GateMlpKind::Not => (vec![all(1.0)], vec![0.0], vec![(0, -1.0)], 1.0),
        GateMlpKind::Maj => (vec![all(2.0), all(2.0)], vec![-n, -n - 1.0], vec![(0, 1.0), (1, -1.0)], 0.0),
    };
    let width = hidden.len();
    Mlp::new(
        fanin,
        vec![
            Layer { in_dim: fanin, rows: hidden, bias: hidden_b },
            Layer { in_dim: width, rows: vec![out], bias: vec![out_b] },
        ],
        DEFAULT_PRECISION_BITS,
    )
}

/// A network that reproduces `table` on every point of `domain`.
pub fn build_lookup_mlp(domain: &[Vec<i64>], table: impl Fn(&[i64]) -> Rational) -> Result<Mlp> {
    let first = domain.first().ok_or_else(|| Error::invalid("lookup domain is empty"))?;
    let dim = first.len();
    let ranges: Vec<(i64, i64)> = (0..dim)
        .map(|c| {
            let col = domain.iter().map(|u| u.get(c).copied().unwrap_or(0));
            (col.clone().min().unwrap(), col.max().unwrap())
        })
        .collect();
    let mut b = NetBuilder::new(&ranges);
    let xs = b.inputs();
    let out = b.lookup(&xs, domain, table)?;
    b.finish(&[out], DEFAULT_PRECISION_BITS)
}

/// Convenience for tables given as floats.
pub fn build_lookup_mlp_f64(domain: &[Vec<i64>], values: &[f64]) -> Result<Mlp> {
    if values.len() != domain.len() {
        return Err(Error::invalid("table and domain differ in length"));
    }
    let vals: Vec<Rational> = values
        .iter()
        .map(|&v| rational_from_f64(v).ok_or_else(|| Error::invalid(format!("non-finite table value {v}"))))
        .collect::<Result<_>>()?;
    let index: std::collections::HashMap<&[i64], Rational> =
        domain.iter().map(Vec::as_slice).zip(vals).collect();
    build_lookup_mlp(domain, |u| index[u])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bools(code: usize, n: usize) -> Vec<bool> {
        (0..n).map(|i| code >> i & 1 == 1).collect()
    }

    #[test]
    fn examples() {
        let and = build_gate_mlp(GateMlpKind::And, 3).unwrap();
        assert_eq!(and.forward(&[1.0, 1.0, 1.0]).unwrap(), vec![1.0]);
        let maj = build_gate_mlp(GateMlpKind::Maj, 2).unwrap();
        assert_eq!(maj.forward(&[1.0, 0.0]).unwrap(), vec![0.0]);
        assert!(build_gate_mlp(GateMlpKind::Or, 0).is_err());
        assert!(build_gate_mlp(GateMlpKind::Not, 2).is_err());
    }

    #[test]
    fn exhaustive_up_to_fanin_10() {
        for kind in [GateMlpKind::And, GateMlpKind::Or, GateMlpKind::Maj, GateMlpKind::Not] {
            let max = if kind == GateMlpKind::Not { 1 } else { 10 };
            for fanin in 1..=max {
                let m = build_gate_mlp(kind, fanin).unwrap();
                for code in 0..1usize << fanin {
                    let x = bools(code, fanin);
                    let xf: Vec<f64> = x.iter().map(|&b| b as u8 as f64).collect();
                    let want = kind.truth(&x) as u8 as f64;
                    assert_eq!(m.forward(&xf).unwrap(), vec![want], "{kind:?} {x:?}");
                    assert!(m.rounding_is_exact(&xf).unwrap());
                }
            }
        }
    }

    #[test]
    fn lookup_examples() {
        let m = build_lookup_mlp(&[vec![4, -2]], |_| rat(9, 4)).unwrap();
        assert_eq!(m.forward(&[4.0, -2.0]).unwrap(), vec![2.25]);
        let m = build_lookup_mlp_f64(&[vec![0], vec![1]], &[5.0, 7.0]).unwrap();
        assert_eq!(m.forward(&[0.0]).unwrap(), vec![5.0]);
        assert_eq!(m.forward(&[1.0]).unwrap(), vec![7.0]);
        assert!(build_lookup_mlp(&[vec![1], vec![1]], |_| rat(0, 1)).is_err());
        assert!(build_lookup_mlp(&[], |_| rat(0, 1)).is_err());
    }

    #[test]
    fn random_sixteen_point_domain() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut domain: Vec<Vec<i64>> = Vec::new();
        while domain.len() < 16 {
            let p = vec![rng.gen_range(-6..=6), rng.gen_range(0..=9)];
            if !domain.contains(&p) {
                domain.push(p);
            }
        }
        let values: Vec<f64> = (0..16).map(|_| rng.gen_range(-40..=40) as f64 / 4.0).collect();
        let m = build_lookup_mlp_f64(&domain, &values).unwrap();
        for (u, &want) in domain.iter().zip(&values) {
            let x: Vec<f64> = u.iter().map(|&v| v as f64).collect();
            assert_eq!(m.forward(&x).unwrap(), vec![want], "{u:?}");
            assert!(m.rounding_is_exact(&x).unwrap());
        }
    }
}
