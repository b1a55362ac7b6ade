//! ReLU networks with fixed-point evaluation.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{rational_from_f64, Rational};

pub const DEFAULT_PRECISION_BITS: u32 = 16;
/// Integer bits above the fractional part (sign included).
pub const INTEGER_BITS: u32 = 16;

/// One affine map. Rows are sparse `(column, weight)` lists.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub in_dim: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn out_dim(&self) -> usize {
        self.rows.len()
    }

    pub fn weight_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
}

/// Hidden layers apply ReLU; the last layer is affine.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    input_dim: usize,
    layers: Vec<Layer>,
    precision_bits: u32,
}

#[derive(Serialize, Deserialize)]
struct DenseLayer {
    w: Vec<Vec<f64>>,
    b: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct DenseMlp {
    layers: Vec<DenseLayer>,
    precision_bits: u32,
}

fn round_shift(acc: i128, shift: u32) -> i128 {
    // round half to even
    if shift == 0 {
        return acc;
    }
    let q = acc >> shift;
    let rem = acc - (q << shift);
    let half = 1i128 << (shift - 1);
    if rem > half || (rem == half && q & 1 == 1) {
        q + 1
    } else {
        q
    }
}

impl Mlp {
    pub fn new(input_dim: usize, layers: Vec<Layer>, precision_bits: u32) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::invalid("an MLP needs at least one layer"));
        }
        let mut dim = input_dim;
        for (li, l) in layers.iter().enumerate() {
            if l.in_dim != dim || l.bias.len() != l.rows.len() {
                return Err(Error::invalid(format!("layer {} dimensions do not chain", li + 1)));
            }
            if l.rows.iter().flatten().any(|&(c, _)| c >= dim) {
                return Err(Error::invalid(format!("layer {} reads past its input", li + 1)));
            }
            dim = l.out_dim();
        }
        let m = Mlp { input_dim, layers, precision_bits };
        m.check_grid()?;
        Ok(m)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    /// Largest hidden width (output width if there are no hidden layers).
    pub fn max_hidden_width(&self) -> usize {
        let hidden = &self.layers[..self.layers.len() - 1];
        hidden.iter().map(Layer::out_dim).max().unwrap_or_else(|| self.output_dim())
    }

    pub fn weight_count(&self) -> usize {
        self.layers.iter().map(Layer::weight_count).sum()
    }

    pub fn with_precision(&self, bits: u32) -> Result<Self> {
        let m = Mlp { precision_bits: bits, ..self.clone() };
        m.check_grid()?;
        Ok(m)
    }

    fn scale(&self) -> f64 {
        (2.0f64).powi(self.precision_bits as i32)
    }

    fn limit(&self) -> i128 {
        1i128 << (self.precision_bits + INTEGER_BITS - 1)
    }

    fn quantize(&self, x: f64, what: &str) -> Result<i128> {
        let scaled = x * self.scale();
        if scaled.fract() != 0.0 || !scaled.is_finite() {
            return Err(Error::invalid(format!(
                "{what} {x} is not on the 2^-{} grid",
                self.precision_bits
            )));
        }
        let q = scaled as i128;
        if q.abs() >= self.limit() {
            return Err(Error::invalid(format!("{what} {x} exceeds the fixed-point range")));
        }
        Ok(q)
    }

    fn check_grid(&self) -> Result<()> {
        for (li, l) in self.layers.iter().enumerate() {
            for &(_, w) in l.rows.iter().flatten() {
                self.quantize(w, &format!("layer {} weight", li + 1))?;
            }
            for &b in &l.bias {
                self.quantize(b, &format!("layer {} bias", li + 1))?;
            }
        }
        Ok(())
    }

    /// Fixed-point forward pass on scaled integers; returns every layer's
    /// output (post-ReLU for hidden layers).
    pub fn forward_trace_fixed(&self, x: &[f64]) -> Result<Vec<Vec<i128>>> {
        if x.len() != self.input_dim {
            return Err(Error::invalid(format!(
                "input has {} entries, network expects {}",
                x.len(),
                self.input_dim
            )));
        }
        let p = self.precision_bits;
        let mut h: Vec<i128> = x
            .iter()
            .map(|&v| {
                let q = (v * self.scale()).round_ties_even() as i128;
                if q.abs() >= self.limit() {
                    Err(Error::Overflow { layer: 0, value: v.to_string() })
                } else {
                    Ok(q)
                }
            })
            .collect::<Result<_>>()?;
        let last = self.layers.len() - 1;
        let mut trace = Vec::with_capacity(self.layers.len());
        for (li, l) in self.layers.iter().enumerate() {
            let mut out = Vec::with_capacity(l.out_dim());
            for (row, &b) in l.rows.iter().zip(&l.bias) {
                let mut acc: i128 = (self.quantize(b, "bias")?) << p;
                for &(c, w) in row {
                    acc += (w * self.scale()) as i128 * h[c];
                }
                let mut v = round_shift(acc, p);
                if v.abs() >= self.limit() {
                    return Err(Error::Overflow {
                        layer: li + 1,
                        value: format!("{}", v as f64 / self.scale()),
                    });
                }
                if li < last && v < 0 {
                    v = 0;
                }
                out.push(v);
            }
            trace.push(out.clone());
            h = out;
        }
        Ok(trace)
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let trace = self.forward_trace_fixed(x)?;
        let s = self.scale();
        Ok(trace.last().unwrap().iter().map(|&v| v as f64 / s).collect())
    }

    /// Output of the fixed-point pass as exact rationals.
    pub fn forward_rational(&self, x: &[f64]) -> Result<Vec<Rational>> {
        let trace = self.forward_trace_fixed(x)?;
        let d = 1i128 << self.precision_bits;
        Ok(trace.last().unwrap().iter().map(|&v| Rational::new(v, d)).collect())
    }

    /// Unrounded evaluation in exact rationals, every layer.
    pub fn forward_trace_exact(&self, x: &[Rational]) -> Vec<Vec<Rational>> {
        let last = self.layers.len() - 1;
        let mut h = x.to_vec();
        let mut trace = Vec::with_capacity(self.layers.len());
        for (li, l) in self.layers.iter().enumerate() {
            let out: Vec<Rational> = l
                .rows
                .iter()
                .zip(&l.bias)
                .map(|(row, &b)| {
                    let mut acc = rational_from_f64(b).expect("finite bias");
                    for &(c, w) in row {
                        acc += rational_from_f64(w).expect("finite weight") * h[c];
                    }
                    if li < last && acc.is_negative() {
                        Rational::zero()
                    } else {
                        acc
                    }
                })
                .collect();
            trace.push(out.clone());
            h = out;
        }
        trace
    }

    /// Whether the rounded pass reproduces the exact pass at every neuron.
    pub fn rounding_is_exact(&self, x: &[f64]) -> Result<bool> {
        let fixed = self.forward_trace_fixed(x)?;
        let xr: Vec<Rational> = x.iter().map(|&v| rational_from_f64(v).expect("finite input")).collect();
        let exact = self.forward_trace_exact(&xr);
        let d = 1i128 << self.precision_bits;
        Ok(fixed
            .iter()
            .zip(&exact)
            .all(|(f, e)| f.iter().zip(e).all(|(&a, b)| Rational::new(a, d) == *b)))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let layers = self
            .layers
            .iter()
            .map(|l| {
                let w = l
                    .rows
                    .iter()
                    .map(|row| {
                        let mut dense = vec![0.0; l.in_dim];
                        for &(c, v) in row {
                            dense[c] = v;
                        }
                        dense
                    })
                    .collect();
                DenseLayer { w, b: l.bias.clone() }
            })
            .collect();
        serde_json::to_value(DenseMlp { layers, precision_bits: self.precision_bits })
            .expect("finite weights serialize")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let d: DenseMlp = serde_json::from_value(v.clone())?;
        let first = d.layers.first().ok_or_else(|| Error::invalid("no layers"))?;
        let input_dim = first.w.first().map_or(0, Vec::len);
        let mut layers = Vec::with_capacity(d.layers.len());
        let mut dim = input_dim;
        for (li, dl) in d.layers.into_iter().enumerate() {
            if dl.w.iter().any(|r| r.len() != dim) {
                return Err(Error::invalid(format!("layer {} rows have the wrong width", li + 1)));
            }
            let rows: Vec<Vec<(usize, f64)>> = dl
                .w
                .iter()
                .map(|r| r.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(c, &v)| (c, v)).collect())
                .collect();
            layers.push(Layer { in_dim: dim, rows, bias: dl.b });
            dim = layers.last().unwrap().out_dim();
        }
        Mlp::new(input_dim, layers, d.precision_bits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity() -> Mlp {
        Mlp::new(1, vec![Layer { in_dim: 1, rows: vec![vec![(0, 1.0)]], bias: vec![0.0] }], 16).unwrap()
    }

    #[test]
    fn identity_layer() {
        assert_eq!(identity().forward(&[3.0]).unwrap(), vec![3.0]);
    }

    #[test]
    fn relu_clips() {
        let m = Mlp::new(
            1,
            vec![
                Layer { in_dim: 1, rows: vec![vec![(0, 1.0)]], bias: vec![0.0] },
                Layer { in_dim: 1, rows: vec![vec![(0, 2.0)]], bias: vec![1.0] },
            ],
            16,
        )
        .unwrap();
        assert_eq!(m.forward(&[-1.0]).unwrap(), vec![1.0]);
        assert_eq!(m.forward(&[2.0]).unwrap(), vec![5.0]);
    }

    #[test]
    fn rounding_half_even() {
        assert_eq!(round_shift(5, 1), 2);
        assert_eq!(round_shift(7, 1), 4);
        assert_eq!(round_shift(-5, 1), -2);
        assert_eq!(round_shift(6, 2), 2);
        // 0.75 * 0.5 = 0.375 rounds at 2 fractional bits to 0.5 (even neighbour of 0.25/0.5)
        let m = Mlp::new(1, vec![Layer { in_dim: 1, rows: vec![vec![(0, 0.75)]], bias: vec![0.0] }], 2).unwrap();
        assert_eq!(m.forward(&[0.5]).unwrap(), vec![0.5]);
        assert!(!m.rounding_is_exact(&[0.5]).unwrap());
    }

    #[test]
    fn overflow_names_layer() {
        let m = Mlp::new(
            1,
            vec![
                Layer { in_dim: 1, rows: vec![vec![(0, 1.0)]], bias: vec![0.0] },
                Layer { in_dim: 1, rows: vec![vec![(0, 256.0)]], bias: vec![0.0] },
            ],
            16,
        )
        .unwrap();
        match m.forward(&[200.0]) {
            Err(Error::Overflow { layer, .. }) => assert_eq!(layer, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn off_grid_weights_rejected() {
        let l = Layer { in_dim: 1, rows: vec![vec![(0, 0.1)]], bias: vec![0.0] };
        assert!(Mlp::new(1, vec![l], 16).is_err());
        let l = Layer { in_dim: 1, rows: vec![vec![(0, 0.5)]], bias: vec![0.0] };
        let m = Mlp::new(1, vec![l], 16).unwrap();
        assert!(m.with_precision(0).is_err());
    }

    #[test]
    fn dense_json_round_trip() {
        let m = Mlp::new(
            2,
            vec![
                Layer { in_dim: 2, rows: vec![vec![(1, -1.0)], vec![(0, 0.5), (1, 2.0)]], bias: vec![1.0, 0.0] },
                Layer { in_dim: 2, rows: vec![vec![(0, 1.0), (1, 1.0)]], bias: vec![0.0] },
            ],
            8,
        )
        .unwrap();
        let j = m.to_json();
        assert_eq!(j["precisionBits"], 8);
        assert_eq!(j["layers"][0]["w"][0], serde_json::json!([0.0, -1.0]));
        assert_eq!(Mlp::from_json(&j).unwrap(), m);
    }
}
