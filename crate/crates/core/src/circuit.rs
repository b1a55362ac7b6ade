//! Gate circuits: topologically indexed DAGs whose last node is the output.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
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
    #[serde(rename = "INPUT")]
    Input,
}

impl GateKind {
    pub const ALL: [GateKind; 6] = [
        GateKind::And,
        GateKind::Or,
        GateKind::Not,
        GateKind::Const0,
        GateKind::Const1,
        GateKind::Input,
    ];

    /// Integer type code used by embeddings and binary layouts (1..=6).
    pub fn code(self) -> usize {
        match self {
            GateKind::And => 1,
            GateKind::Or => 2,
            GateKind::Not => 3,
            GateKind::Const0 => 4,
            GateKind::Const1 => 5,
            GateKind::Input => 6,
        }
    }

    pub fn from_code(code: usize) -> Option<GateKind> {
        GateKind::ALL.get(code.wrapping_sub(1)).copied()
    }

    /// Number of node-valued inputs.
    pub fn node_arity(self) -> usize {
        match self {
            GateKind::And | GateKind::Or => 2,
            GateKind::Not => 1,
            _ => 0,
        }
    }
}

/// One node. `in1`/`in2` are 1-based; fields a gate does not use are stored as 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Node {
    pub in1: usize,
    pub in2: usize,
    pub gate: GateKind,
}

impl Node {
    pub fn and(a: usize, b: usize) -> Node {
        Node { in1: a, in2: b, gate: GateKind::And }
    }
    pub fn or(a: usize, b: usize) -> Node {
        Node { in1: a, in2: b, gate: GateKind::Or }
    }
    pub fn not(a: usize) -> Node {
        Node { in1: a, in2: 0, gate: GateKind::Not }
    }
    pub fn constant(b: bool) -> Node {
        let gate = if b { GateKind::Const1 } else { GateKind::Const0 };
        Node { in1: 0, in2: 0, gate }
    }
    pub fn input(bit: usize) -> Node {
        Node { in1: bit, in2: 0, gate: GateKind::Input }
    }

    fn normalized(self) -> Node {
        match self.gate {
            GateKind::And | GateKind::Or => self,
            GateKind::Not | GateKind::Input => Node { in2: 0, ..self },
            GateKind::Const0 | GateKind::Const1 => Node { in1: 0, in2: 0, ..self },
        }
    }

    /// Node indices this node reads.
    pub fn node_inputs(&self) -> &'static [u8] {
        match self.gate.node_arity() {
            2 => &[1, 2],
            1 => &[1],
            _ => &[],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GateCircuit {
    nodes: Vec<Node>,
}

#[derive(Serialize, Deserialize)]
struct RawCircuit {
    n: usize,
    nodes: Vec<Node>,
}

impl Serialize for GateCircuit {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawCircuit { n: self.nodes.len(), nodes: self.nodes.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GateCircuit {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawCircuit::deserialize(d)?;
        if raw.n != raw.nodes.len() {
            return Err(serde::de::Error::custom(format!(
                "circuit declares n={} but lists {} nodes",
                raw.n,
                raw.nodes.len()
            )));
        }
        GateCircuit::new(raw.nodes).map_err(serde::de::Error::custom)
    }
}

impl GateCircuit {
    pub fn new(nodes: Vec<Node>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::invalid("circuit must have at least one node"));
        }
        let nodes: Vec<Node> = nodes.into_iter().map(Node::normalized).collect();
        for (idx, node) in nodes.iter().enumerate() {
            let i = idx + 1;
            let refs: &[usize] = match node.gate.node_arity() {
                2 => &[node.in1, node.in2],
                1 => &[node.in1],
                _ => &[],
            };
            for &r in refs {
                if r == 0 || r >= i {
                    return Err(Error::invalid(format!(
                        "node {i} ({:?}) reads node {r}, which is not an earlier node",
                        node.gate
                    )));
                }
            }
            if node.gate == GateKind::Input && node.in1 == 0 {
                return Err(Error::invalid(format!("INPUT node {i} needs a 1-based bit index")));
            }
        }
        Ok(GateCircuit { nodes })
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    /// 1-based.
    pub fn node(&self, i: usize) -> &Node {
        &self.nodes[i - 1]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn has_inputs(&self) -> bool {
        self.nodes.iter().any(|n| n.gate == GateKind::Input)
    }

    /// Largest input-bit index referenced by an INPUT node (0 if none).
    pub fn input_arity(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.gate == GateKind::Input)
            .map(|n| n.in1)
            .max()
            .unwrap_or(0)
    }

    /// Values of all nodes in topological order.
    pub fn node_values(&self, x: Option<&[bool]>) -> Result<Vec<bool>> {
        let mut vals = Vec::with_capacity(self.nodes.len());
        for (idx, node) in self.nodes.iter().enumerate() {
            let b = match node.gate {
                GateKind::And => vals[node.in1 - 1] && vals[node.in2 - 1],
                GateKind::Or => vals[node.in1 - 1] || vals[node.in2 - 1],
                GateKind::Not => !vals[node.in1 - 1],
                GateKind::Const0 => false,
                GateKind::Const1 => true,
                GateKind::Input => {
                    let x = x.ok_or_else(|| {
                        Error::invalid(format!("node {} is INPUT but no input string given", idx + 1))
                    })?;
                    *x.get(node.in1 - 1).ok_or_else(|| {
                        Error::invalid(format!(
                            "node {} reads x[{}] but |x| = {}",
                            idx + 1,
                            node.in1,
                            x.len()
                        ))
                    })?
                }
            };
            vals.push(b);
        }
        Ok(vals)
    }

    pub fn evaluate(&self, x: Option<&[bool]>) -> Result<bool> {
        Ok(*self.node_values(x)?.last().unwrap())
    }

    /// Nodes the output depends on (the output's cone), as a 1-based mask.
    pub fn output_cone(&self) -> Vec<bool> {
        let n = self.size();
        let mut live = vec![false; n + 1];
        live[n] = true;
        for i in (1..=n).rev() {
            if !live[i] {
                continue;
            }
            let node = self.node(i);
            match node.gate.node_arity() {
                2 => {
                    live[node.in1] = true;
                    live[node.in2] = true;
                }
                1 => live[node.in1] = true,
                _ => {}
            }
        }
        live.remove(0);
        live
    }
}
