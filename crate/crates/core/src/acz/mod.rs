//! Unbounded fan-in boolean circuits and the constant-depth builders for
//! rewards, transitions and optimal policies.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod check;
mod encode;
mod lookup;
mod model;
mod policy;

pub use encode::{bits_for, decode_reward, encode_reward, CvpLayout, NpLayout, SatLayout};
pub use lookup::{lookup_circuit, LOOKUP_MAX_BITS};
pub use model::{
    build_model_circuit, cvp_model_circuits, np_model_circuits, p_model_circuits,
    sat_model_circuits, ModelCircuits, ACZ_MAX_N,
};
pub use policy::{build_policy_circuit, cvp_policy_circuit, p_policy_circuit};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Wire {
    /// 0-based input bit.
    Input(usize),
    /// 0-based gate index.
    Gate(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateOp {
    #[serde(rename = "AND")]
    And,
    #[serde(rename = "OR")]
    Or,
    #[serde(rename = "NOT")]
    Not,
    #[serde(rename = "CONST0")]
    Const0,
    #[serde(rename = "CONST1")]
    Const1,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Gate {
    pub op: GateOp,
    pub inputs: Vec<Wire>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitStats {
    pub size: usize,
    pub depth: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoolCircuit {
    inputs: usize,
    gates: Vec<Gate>,
    outputs: Vec<Wire>,
}

impl BoolCircuit {
    pub fn new(inputs: usize, gates: Vec<Gate>, outputs: Vec<Wire>) -> Result<Self> {
        let check = |w: &Wire, limit: usize| match *w {
            Wire::Input(i) if i >= inputs => Err(Error::invalid(format!("input {i} out of range"))),
            Wire::Gate(g) if g >= limit => {
                Err(Error::invalid(format!("gate {g} referenced before definition")))
            }
            _ => Ok(()),
        };
        for (gi, g) in gates.iter().enumerate() {
            for w in &g.inputs {
                check(w, gi)?;
            }
            let arity_ok = match g.op {
                GateOp::Not => g.inputs.len() == 1,
                GateOp::Const0 | GateOp::Const1 => g.inputs.is_empty(),
                GateOp::And | GateOp::Or => !g.inputs.is_empty(),
            };
            if !arity_ok {
                return Err(Error::invalid(format!("gate {gi} has bad fan-in for {:?}", g.op)));
            }
        }
        for w in &outputs {
            check(w, gates.len())?;
        }
        Ok(BoolCircuit { inputs, gates, outputs })
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn outputs(&self) -> &[Wire] {
        &self.outputs
    }

    pub fn eval(&self, x: &[bool]) -> Vec<bool> {
        assert_eq!(x.len(), self.inputs, "circuit expects {} input bits", self.inputs);
        let mut vals = Vec::with_capacity(self.gates.len());
        let read = |vals: &Vec<bool>, w: &Wire| match *w {
            Wire::Input(i) => x[i],
            Wire::Gate(g) => vals[g],
        };
        for g in &self.gates {
            let b = match g.op {
                GateOp::And => g.inputs.iter().all(|w| read(&vals, w)),
                GateOp::Or => g.inputs.iter().any(|w| read(&vals, w)),
                GateOp::Not => !read(&vals, &g.inputs[0]),
                GateOp::Const0 => false,
                GateOp::Const1 => true,
            };
            vals.push(b);
        }
        self.outputs.iter().map(|w| read(&vals, w)).collect()
    }

    /// Gate count and the longest input-to-output path in gates. Inputs and
    /// constants sit at depth 0; every other gate, NOT included, adds one.
    pub fn stats(&self) -> CircuitStats {
        let mut depth = Vec::with_capacity(self.gates.len());
        let of = |depth: &Vec<usize>, w: &Wire| match *w {
            Wire::Input(_) => 0,
            Wire::Gate(g) => depth[g],
        };
        for g in &self.gates {
            let d = match g.op {
                GateOp::Const0 | GateOp::Const1 => 0,
                _ => 1 + g.inputs.iter().map(|w| of(&depth, w)).max().unwrap_or(0),
            };
            depth.push(d);
        }
        CircuitStats {
            size: self.gates.len(),
            depth: self.outputs.iter().map(|w| of(&depth, w)).max().unwrap_or(0),
        }
    }

    /// JSON with wires written as `"x<i>"` (input bit) or `"g<j>"` (gate), 1-based.
    pub fn to_json(&self) -> serde_json::Value {
        let wire = |w: &Wire| match *w {
            Wire::Input(i) => format!("x{}", i + 1),
            Wire::Gate(g) => format!("g{}", g + 1),
        };
        let nodes: Vec<serde_json::Value> = self
            .gates
            .iter()
            .map(|g| {
                serde_json::json!({
                    "gate": g.op,
                    "in": g.inputs.iter().map(wire).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::json!({
            "n": self.gates.len(),
            "inputs": self.inputs,
            "nodes": nodes,
            "outputs": self.outputs.iter().map(wire).collect::<Vec<_>>(),
        })
    }
}

/// Hash-consing builder: structurally identical gates are created once.
#[derive(Debug)]
pub struct CircuitBuilder {
    inputs: usize,
    gates: Vec<Gate>,
    cache: HashMap<Gate, usize>,
}

impl CircuitBuilder {
    pub fn new(inputs: usize) -> Self {
        CircuitBuilder { inputs, gates: Vec::new(), cache: HashMap::new() }
    }

    pub fn input(&self, i: usize) -> Wire {
        assert!(i < self.inputs);
        Wire::Input(i)
    }

    pub fn inputs(&self, range: std::ops::Range<usize>) -> Vec<Wire> {
        range.map(|i| self.input(i)).collect()
    }

    fn gate(&mut self, op: GateOp, inputs: Vec<Wire>) -> Wire {
        let g = Gate { op, inputs };
        if let Some(&id) = self.cache.get(&g) {
            return Wire::Gate(id);
        }
        let id = self.gates.len();
        self.cache.insert(g.clone(), id);
        self.gates.push(g);
        Wire::Gate(id)
    }

    pub fn konst(&mut self, b: bool) -> Wire {
        self.gate(if b { GateOp::Const1 } else { GateOp::Const0 }, vec![])
    }

    pub fn not(&mut self, w: Wire) -> Wire {
        self.gate(GateOp::Not, vec![w])
    }

    pub fn and(&mut self, ws: Vec<Wire>) -> Wire {
        if ws.is_empty() {
            return self.konst(true);
        }
        self.gate(GateOp::And, ws)
    }

    pub fn or(&mut self, ws: Vec<Wire>) -> Wire {
        if ws.is_empty() {
            return self.konst(false);
        }
        self.gate(GateOp::Or, ws)
    }

    /// Literals whose conjunction tests `bits == value` (little-endian).
    pub fn eq_literals(&mut self, bits: &[Wire], value: usize) -> Vec<Wire> {
        if bits.len() < usize::BITS as usize && value >> bits.len() != 0 {
            // value not representable: the test is constantly false
            return vec![self.konst(false)];
        }
        bits.iter()
            .enumerate()
            .map(|(i, &w)| if (value >> i) & 1 == 1 { w } else { self.not(w) })
            .collect()
    }

    pub fn eq(&mut self, bits: &[Wire], value: usize) -> Wire {
        let lits = self.eq_literals(bits, value);
        self.and(lits)
    }

    pub fn finish(self, outputs: Vec<Wire>) -> BoolCircuit {
        BoolCircuit { inputs: self.inputs, gates: self.gates, outputs }
    }
}

/// Little-endian bits of `value` in `width` bits.
pub fn to_bits(value: usize, width: usize) -> Vec<bool> {
    (0..width).map(|i| (value >> i) & 1 == 1).collect()
}

pub fn from_bits(bits: &[bool]) -> usize {
    bits.iter().enumerate().map(|(i, &b)| (b as usize) << i).sum()
}

/// Fitted slope of log(size) against log(n) by least squares.
/// Which circuit or network of a family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Reward,
    Transition,
    Policy,
}

impl Part {
    pub const ALL: [Part; 3] = [Part::Reward, Part::Transition, Part::Policy];
}

/// Declared polynomial degree of circuit size in `n`; `None` when the
/// family has no such circuit.
pub fn declared_size_exponent(family: crate::env::Family, part: Part) -> Option<u32> {
    use crate::env::Family::*;
    match (family, part) {
        (Sat, Part::Reward) => Some(2),
        (Sat | Np | Cvp | P, Part::Transition) => Some(1),
        (Np, Part::Reward) => Some(1),
        (Cvp | P, Part::Reward) => Some(0),
        (Cvp | P, Part::Policy) => Some(2),
        _ => None,
    }
}

pub fn log_log_slope(points: &[(usize, usize)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, s)| (s as f64).ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}
