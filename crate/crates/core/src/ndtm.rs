//! Nondeterministic Turing machines with two transition functions and a
//! fixed-length tape of `stepBound` cells.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Symbol = u8;

pub const BLANK: Symbol = 0;
pub const START: Symbol = 1;
pub const ZERO: Symbol = 2;
pub const ONE: Symbol = 3;

const BASE_ALPHABET: [&str; 4] = ["_", ">", "0", "1"];

/// Default ceiling on `stepBound` for brute-force acceptance.
pub const BRUTE_FORCE_MAX_STEPS: usize = 20;

pub fn bit_symbol(b: bool) -> Symbol {
    if b {
        ONE
    } else {
        ZERO
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Move {
    #[serde(rename = "L")]
    Left,
    #[serde(rename = "S")]
    Stay,
    #[serde(rename = "R")]
    Right,
}

impl Move {
    pub fn delta(self) -> i64 {
        match self {
            Move::Left => -1,
            Move::Stay => 0,
            Move::Right => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Transition {
    pub next: usize,
    pub write: Symbol,
    pub mv: Move,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Configuration {
    pub state: usize,
    pub tape: Vec<Symbol>,
    pub head: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NdtmSpec {
    states: Vec<String>,
    alphabet: Vec<String>,
    start: usize,
    accept: usize,
    halt: usize,
    /// `delta[branch][state][symbol]`; `None` only for accept/halt.
    delta: [Vec<Vec<Option<Transition>>>; 2],
    step_bound: usize,
}

impl NdtmSpec {
    /// Builds a machine over the base alphabet `{_, >, 0, 1}` from a rule function.
    /// The rule is not consulted for the accept and halt states.
    pub fn from_fn(
        states: &[&str],
        start: usize,
        accept: usize,
        halt: usize,
        step_bound: usize,
        rule: impl Fn(bool, usize, Symbol) -> Transition,
    ) -> Result<Self> {
        let alphabet: Vec<String> = BASE_ALPHABET.iter().map(|s| s.to_string()).collect();
        let mut delta = [Vec::new(), Vec::new()];
        for (b, table) in delta.iter_mut().enumerate() {
            for q in 0..states.len() {
                let row = (0..alphabet.len() as Symbol)
                    .map(|sym| (q != accept && q != halt).then(|| rule(b == 1, q, sym)))
                    .collect();
                table.push(row);
            }
        }
        let spec = NdtmSpec {
            states: states.iter().map(|s| s.to_string()).collect(),
            alphabet,
            start,
            accept,
            halt,
            delta,
            step_bound,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let nq = self.states.len();
        let ns = self.alphabet.len();
        if [self.start, self.accept, self.halt].iter().any(|&q| q >= nq) {
            return Err(Error::invalid("start/accept/halt must name machine states"));
        }
        if self.accept == self.halt {
            return Err(Error::invalid("accept and halt states must differ"));
        }
        if self.step_bound == 0 {
            return Err(Error::invalid("stepBound must be positive"));
        }
        for (b, table) in self.delta.iter().enumerate() {
            for q in 0..nq {
                let terminal = q == self.accept || q == self.halt;
                for sym in 0..ns {
                    match table[q][sym] {
                        None if !terminal => {
                            return Err(Error::invalid(format!(
                                "delta{b} undefined on ({}, {})",
                                self.states[q], self.alphabet[sym]
                            )))
                        }
                        None => {}
                        Some(t) => {
                            if t.next >= nq || t.write as usize >= ns {
                                return Err(Error::invalid(format!(
                                    "delta{b} on ({}, {}) points outside the machine",
                                    self.states[q], self.alphabet[sym]
                                )));
                            }
                            let reads_start = sym as Symbol == START;
                            if reads_start && (t.mv == Move::Left || t.write != START) {
                                return Err(Error::invalid(format!(
                                    "delta{b} on ({}, >) must keep the start marker and not move left",
                                    self.states[q]
                                )));
                            }
                            if !reads_start && t.write == START {
                                return Err(Error::invalid(format!(
                                    "delta{b} on ({}, {}) writes the start marker",
                                    self.states[q], self.alphabet[sym]
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }
    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }
    pub fn start(&self) -> usize {
        self.start
    }
    pub fn accept(&self) -> usize {
        self.accept
    }
    pub fn halt(&self) -> usize {
        self.halt
    }
    pub fn step_bound(&self) -> usize {
        self.step_bound
    }
    pub fn is_terminal(&self, q: usize) -> bool {
        q == self.accept || q == self.halt
    }

    pub fn with_step_bound(&self, step_bound: usize) -> Result<Self> {
        let spec = NdtmSpec { step_bound, ..self.clone() };
        spec.validate()?;
        Ok(spec)
    }

    pub fn transition(&self, branch: bool, q: usize, sym: Symbol) -> Option<Transition> {
        self.delta[branch as usize][q][sym as usize]
    }

    pub fn initial_config(&self, x: &[bool]) -> Result<Configuration> {
        if self.step_bound < x.len() + 1 {
            return Err(Error::invalid(format!(
                "stepBound {} cannot hold an input of length {} plus the start marker",
                self.step_bound,
                x.len()
            )));
        }
        let mut tape = vec![BLANK; self.step_bound];
        tape[0] = START;
        for (i, &b) in x.iter().enumerate() {
            tape[i + 1] = bit_symbol(b);
        }
        Ok(Configuration { state: self.start, tape, head: 0 })
    }

    /// One step of `delta_branch`. Accept and halt are absorbing.
    pub fn step(&self, c: &Configuration, branch: bool) -> Result<Configuration> {
        if self.is_terminal(c.state) {
            return Ok(c.clone());
        }
        let t = self
            .transition(branch, c.state, c.tape[c.head])
            .expect("validated spec is total on non-terminal states");
        let head = c.head as i64 + t.mv.delta();
        if head < 0 || head >= c.tape.len() as i64 {
            return Err(Error::SimulationBounds {
                head: c.head,
                len: c.tape.len(),
                direction: if head < 0 { "left" } else { "right" },
            });
        }
        let mut tape = c.tape.clone();
        tape[c.head] = t.write;
        Ok(Configuration { state: t.next, tape, head: head as usize })
    }

    /// Total version of [`step`](Self::step): a branch that would leave the
    /// tape is sent to the halt state with tape and head untouched.
    pub fn advance(&self, c: &Configuration, branch: bool) -> Configuration {
        match self.step(c, branch) {
            Ok(next) => next,
            Err(_) => Configuration { state: self.halt, ..c.clone() },
        }
    }

    /// Brute force over all `2^stepBound` branch sequences.
    pub fn accepts(&self, x: &[bool]) -> Result<bool> {
        self.accepts_with_ceiling(x, BRUTE_FORCE_MAX_STEPS)
    }

    pub fn accepts_with_ceiling(&self, x: &[bool], max_steps: usize) -> Result<bool> {
        let p = self.step_bound;
        if p > max_steps {
            return Err(Error::ResourceLimit {
                what: "ndtm brute-force stepBound",
                actual: p,
                limit: max_steps,
                layer: None,
            });
        }
        let c0 = self.initial_config(x)?;
        for seq in 0u64..(1u64 << p) {
            let mut c = c0.clone();
            for t in 0..p {
                c = self.advance(&c, (seq >> t) & 1 == 1);
            }
            if c.state == self.accept {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Whether some branch sequence of length `remaining` from `c` ends in accept.
    pub fn accepts_from(&self, c: &Configuration, remaining: usize) -> bool {
        if c.state == self.accept {
            return true;
        }
        if remaining == 0 || c.state == self.halt {
            return false;
        }
        [false, true]
            .iter()
            .any(|&b| self.accepts_from(&self.advance(c, b), remaining - 1))
    }

    pub fn symbol_name(&self, s: Symbol) -> &str {
        &self.alphabet[s as usize]
    }
}

// JSON form: delta maps state name -> symbol name -> [state, symbol, move].
type RawDelta = BTreeMap<String, BTreeMap<String, (String, String, Move)>>;

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawNdtm {
    states: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alphabet: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    start: Option<String>,
    accept: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    halt: Option<String>,
    delta0: RawDelta,
    delta1: RawDelta,
    step_bound: usize,
}

impl Serialize for NdtmSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut deltas: [RawDelta; 2] = Default::default();
        for (b, out) in deltas.iter_mut().enumerate() {
            for (q, row) in self.delta[b].iter().enumerate() {
                let mut m = BTreeMap::new();
                for (sym, t) in row.iter().enumerate() {
                    if let Some(t) = t {
                        m.insert(
                            self.alphabet[sym].clone(),
                            (
                                self.states[t.next].clone(),
                                self.alphabet[t.write as usize].clone(),
                                t.mv,
                            ),
                        );
                    }
                }
                if !m.is_empty() {
                    out.insert(self.states[q].clone(), m);
                }
            }
        }
        let [delta0, delta1] = deltas;
        let extra = self.alphabet.len() > BASE_ALPHABET.len();
        RawNdtm {
            states: self.states.clone(),
            alphabet: extra.then(|| self.alphabet.clone()),
            start: Some(self.states[self.start].clone()),
            accept: self.states[self.accept].clone(),
            halt: Some(self.states[self.halt].clone()),
            delta0,
            delta1,
            step_bound: self.step_bound,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for NdtmSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawNdtm::deserialize(d)?;
        NdtmSpec::from_raw(raw).map_err(serde::de::Error::custom)
    }
}

impl NdtmSpec {
    fn from_raw(raw: RawNdtm) -> Result<Self> {
        let mut states = raw.states;
        let alphabet = raw
            .alphabet
            .unwrap_or_else(|| BASE_ALPHABET.iter().map(|s| s.to_string()).collect());
        if alphabet.len() < 4 || alphabet[..4].iter().zip(BASE_ALPHABET).any(|(a, b)| a != b) {
            return Err(Error::invalid("alphabet must begin with _, >, 0, 1"));
        }
        if alphabet.len() > 255 {
            return Err(Error::invalid("alphabet too large"));
        }
        let state_idx = |states: &[String], name: &str| {
            states
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| Error::invalid(format!("unknown state {name:?}")))
        };
        let sym_idx = |name: &str| {
            alphabet
                .iter()
                .position(|s| s == name)
                .map(|i| i as Symbol)
                .ok_or_else(|| Error::invalid(format!("unknown symbol {name:?}")))
        };
        let halt_name = raw.halt.unwrap_or_else(|| "halt".to_string());
        if !states.contains(&halt_name) {
            states.push(halt_name.clone());
        }
        let start = match &raw.start {
            Some(name) => state_idx(&states, name)?,
            None => 0,
        };
        let accept = state_idx(&states, &raw.accept)?;
        let halt = state_idx(&states, &halt_name)?;
        let mut delta = [
            vec![vec![None; alphabet.len()]; states.len()],
            vec![vec![None; alphabet.len()]; states.len()],
        ];
        for (b, raw_delta) in [raw.delta0, raw.delta1].into_iter().enumerate() {
            for (q, row) in raw_delta {
                let qi = state_idx(&states, &q)?;
                for (sym, (next, write, mv)) in row {
                    delta[b][qi][sym_idx(&sym)? as usize] = Some(Transition {
                        next: state_idx(&states, &next)?,
                        write: sym_idx(&write)?,
                        mv,
                    });
                }
            }
        }
        let spec = NdtmSpec { states, alphabet, start, accept, halt, delta, step_bound: raw.step_bound };
        spec.validate()?;
        Ok(spec)
    }
}

/// Small machines used as test fixtures and CLI presets.
pub mod fixtures {
    use super::*;

    /// Accepts on its first step, whatever the input.
    pub fn accept_all(step_bound: usize) -> NdtmSpec {
        NdtmSpec::from_fn(&["q0", "acc", "rej"], 0, 1, 2, step_bound, |_, _, sym| Transition {
            next: 1,
            write: sym,
            mv: Move::Stay,
        })
        .unwrap()
    }

    /// Never reaches accept.
    pub fn reject_all(step_bound: usize) -> NdtmSpec {
        NdtmSpec::from_fn(&["q0", "acc", "rej"], 0, 1, 2, step_bound, |_, _, sym| Transition {
            next: 0,
            write: sym,
            mv: Move::Stay,
        })
        .unwrap()
    }

    /// Guesses one bit per input cell and accepts iff every guess equals both
    /// the hardwired `target` bit and the tape bit, and the input ends exactly
    /// after `target.len()` cells. Accepts exactly `x == target`.
    pub fn guess_match(target: &[bool], step_bound: usize) -> Result<NdtmSpec> {
        let k = target.len();
        if step_bound < k + 2 {
            return Err(Error::invalid(format!(
                "guess-match on {k} bits needs stepBound >= {}",
                k + 2
            )));
        }
        // states: 0 = start, 1..=k+1 = "checking cell i", k+2 = acc, k+3 = rej
        let names: Vec<String> = std::iter::once("q0".to_string())
            .chain((1..=k + 1).map(|i| format!("c{i}")))
            .chain(["acc".to_string(), "rej".to_string()])
            .collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let (acc, rej) = (k + 2, k + 3);
        let target = target.to_vec();
        NdtmSpec::from_fn(&refs, 0, acc, rej, step_bound, move |branch, q, sym| {
            let reject = Transition { next: rej, write: sym, mv: Move::Stay };
            match (q, sym) {
                (0, START) => Transition { next: 1, write: START, mv: Move::Right },
                (0, _) => reject,
                (q, BLANK) if q == k + 1 => Transition { next: acc, write: BLANK, mv: Move::Stay },
                (q, s) if q <= k && (s == ZERO || s == ONE) => {
                    let want = target[q - 1];
                    if branch == want && s == bit_symbol(want) {
                        Transition { next: q + 1, write: s, mv: Move::Right }
                    } else {
                        reject
                    }
                }
                _ => reject,
            }
        })
    }

    /// Scans right and nondeterministically accepts on any cell holding 1.
    pub fn contains_one(step_bound: usize) -> NdtmSpec {
        NdtmSpec::from_fn(&["q0", "scan", "acc", "rej"], 0, 2, 3, step_bound, |branch, q, sym| {
            match (q, sym) {
                (0, START) => Transition { next: 1, write: START, mv: Move::Right },
                (1, ONE) if branch => Transition { next: 2, write: ONE, mv: Move::Stay },
                (1, ONE) | (1, ZERO) => Transition { next: 1, write: sym, mv: Move::Right },
                _ => Transition {
                    next: 3,
                    write: sym,
                    mv: Move::Stay,
                },
            }
        })
        .unwrap()
    }

    /// Named fixture lookup for the CLI.
    pub fn by_name(name: &str, n: usize, step_bound: Option<usize>) -> Result<NdtmSpec> {
        let p = step_bound.unwrap_or(n + 2);
        match name {
            "accept-all" => Ok(accept_all(p)),
            "reject-all" => Ok(reject_all(p)),
            "contains-one" => Ok(contains_one(p)),
            "guess-match" => guess_match(&alternating(n), p),
            other => Err(Error::invalid(format!(
                "unknown fixture {other:?} (accept-all, reject-all, contains-one, guess-match)"
            ))),
        }
    }

    /// Target `1010...` of length n, used by size-indexed guess-match machines.
    pub fn alternating(n: usize) -> Vec<bool> {
        (0..n).map(|i| i % 2 == 0).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    fn all_inputs(max_len: usize) -> Vec<Vec<bool>> {
        let mut out = vec![];
        for len in 0..=max_len {
            for code in 0..(1u32 << len) {
                out.push((0..len).map(|i| (code >> i) & 1 == 1).collect());
            }
        }
        out
    }

    // q0 moves right over >, writes 1 over 0 and moves right, accepts on blank
    fn write_ones(step_bound: usize) -> NdtmSpec {
        NdtmSpec::from_fn(&["q0", "acc", "rej"], 0, 1, 2, step_bound, |_, _, sym| match sym {
            START => Transition { next: 0, write: START, mv: Move::Right },
            ZERO | ONE => Transition { next: 0, write: ONE, mv: Move::Right },
            _ => Transition { next: 1, write: BLANK, mv: Move::Stay },
        })
        .unwrap()
    }

    #[test]
    fn single_transition_trace() {
        let spec = write_ones(3);
        let c = Configuration { state: 0, tape: vec![START, ZERO, ZERO], head: 1 };
        let next = spec.step(&c, false).unwrap();
        assert_eq!(next, Configuration { state: 0, tape: vec![START, ONE, ZERO], head: 2 });
        // moving right off the last cell
        assert!(matches!(spec.step(&next, false), Err(Error::SimulationBounds { .. })));
        let halted = spec.advance(&next, false);
        assert_eq!(halted.state, spec.halt());
        assert_eq!(halted.tape, next.tape);
    }

    #[test]
    fn accept_is_absorbing() {
        let spec = accept_all(3);
        let c = Configuration { state: spec.accept(), tape: vec![START, ONE, BLANK], head: 2 };
        assert_eq!(spec.step(&c, false).unwrap(), c);
        assert_eq!(spec.step(&c, true).unwrap(), c);
    }

    #[test]
    fn start_state_reading_marker_accepts() {
        let spec = accept_all(3);
        let c0 = spec.initial_config(&[true]).unwrap();
        assert_eq!(c0.tape, vec![START, ONE, BLANK]);
        assert_eq!(c0.head, 0);
        assert_eq!(spec.step(&c0, true).unwrap().state, spec.accept());
    }

    #[test]
    fn fixture_languages() {
        let target = [true, false];
        let gm = guess_match(&target, 8).unwrap();
        let acc = accept_all(8);
        let rej = reject_all(8);
        let one = contains_one(8);
        for x in all_inputs(4) {
            assert!(acc.accepts(&x).unwrap());
            assert!(!rej.accepts(&x).unwrap());
            assert_eq!(gm.accepts(&x).unwrap(), x == target, "{x:?}");
            assert_eq!(one.accepts(&x).unwrap(), x.contains(&true), "{x:?}");
        }
    }

    #[test]
    fn ceilings_and_bounds() {
        let spec = accept_all(25);
        assert!(matches!(spec.accepts(&[]), Err(Error::ResourceLimit { .. })));
        assert!(accept_all(2).initial_config(&[true, true]).is_err());
        assert!(guess_match(&[true, true], 3).is_err());
    }

    #[test]
    fn static_checks() {
        // moving left off the start marker
        let bad = NdtmSpec::from_fn(&["q0", "acc", "rej"], 0, 1, 2, 4, |_, _, sym| Transition {
            next: 0,
            write: sym,
            mv: Move::Left,
        });
        assert!(bad.is_err());
        let missing = r#"{"states":["q0","acc"],"accept":"acc","delta0":{},"delta1":{},"stepBound":3}"#;
        assert!(serde_json::from_str::<NdtmSpec>(missing).is_err());
    }

    #[test]
    fn json_round_trip() {
        let spec = guess_match(&[true, false, true], 6).unwrap();
        let s = serde_json::to_string(&spec).unwrap();
        let back: NdtmSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, spec);
        let minimal = r#"{
            "states": ["q0", "acc"], "accept": "acc", "stepBound": 2,
            "delta0": {"q0": {"_": ["acc","_","S"], ">": ["q0",">","R"], "0": ["q0","0","S"], "1": ["q0","1","S"]}},
            "delta1": {"q0": {"_": ["acc","_","S"], ">": ["q0",">","R"], "0": ["q0","0","S"], "1": ["q0","1","S"]}}
        }"#;
        let m: NdtmSpec = serde_json::from_str(minimal).unwrap();
        assert_eq!(m.states().len(), 3);
        assert!(m.accepts(&[]).unwrap());
        assert!(!m.accepts(&[false]).unwrap());
    }

    proptest! {
        #[test]
        fn step_is_deterministic_and_accepts_is_recursive(
            which in 0usize..4,
            len in 0usize..=4,
            code in 0u32..16,
        ) {
            let x: Vec<bool> = (0..len).map(|i| (code >> i) & 1 == 1).collect();
            let spec = match which {
                0 => accept_all(7),
                1 => reject_all(7),
                2 => guess_match(&[false, true, true], 7).unwrap(),
                _ => contains_one(7),
            };
            let c0 = spec.initial_config(&x).unwrap();
            for b in [false, true] {
                prop_assert_eq!(spec.advance(&c0, b), spec.advance(&c0, b));
            }
            let via_children = [false, true]
                .iter()
                .any(|&b| spec.accepts_from(&spec.advance(&c0, b), spec.step_bound() - 1));
            prop_assert_eq!(spec.accepts(&x).unwrap(), via_children);
            prop_assert_eq!(spec.accepts_from(&c0, spec.step_bound()), via_children);
        }
    }
}
