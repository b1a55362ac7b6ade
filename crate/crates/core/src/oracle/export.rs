use serde::Serialize;
use serde_json::{json, Value};

use super::DpSolution;
use crate::rational::format_rational;

impl<S: Serialize, A: Serialize + Copy> DpSolution<S, A> {
    /// Every stored state with its value, Q-values and policy action.
    pub fn to_json(&self) -> Value {
        let layers: Vec<Value> = self
            .layers
            .iter()
            .enumerate()
            .map(|(hi, layer)| {
                let states: Vec<Value> = layer
                    .states
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        let q: Vec<Value> = self
                            .actions
                            .iter()
                            .zip(&layer.q[i])
                            .map(|(a, q)| json!({"action": a, "value": format_rational(q)}))
                            .collect();
                        json!({
                            "state": s,
                            "value": format_rational(&layer.values[i]),
                            "q": q,
                            "policy": self.actions[layer.policy[i]],
                        })
                    })
                    .collect();
                json!({"h": hi + 1, "states": states})
            })
            .collect();
        json!({
            "horizon": self.horizon,
            "actions": self.actions,
            "v1": format_rational(&self.layers[0].values[0]),
            "pi1": self.actions[self.layers[0].policy[0]],
            "layers": layers,
        })
    }

    /// `h,states,v1` per layer.
    pub fn to_csv(&self) -> String {
        let v1 = format_rational(&self.layers[0].values[0]);
        let mut out = String::from("h,states,v1\n");
        for (hi, layer) in self.layers.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", hi + 1, layer.states.len(), v1));
        }
        out
    }
}
