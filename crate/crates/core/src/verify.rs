//! Verification suites shared by the command line and the test harness.
//!
//! Each suite expands into named checks, one per instance and aspect, with
//! ids like `sat-n2-00017/decision`. Reports list checks sorted by id.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::acz::{self, check as acz_check, log_log_slope, BoolCircuit, Gate, GateOp, ModelCircuits, Part, Wire};
use crate::circuit::GateCircuit;
use crate::env::{CvpMdp, Family, Mdp, NpMdp, PMdp, SatMdp, StepOutcome, StochAction, StochSatMdp};
use crate::equiv::{EquivReport, Mismatch};
use crate::error::{Error, Result};
use crate::formula::Cnf3Formula;
use crate::generate::{random_bits, random_circuit, random_formula, random_input_circuit};
use crate::mlp::{self, GateMlpKind, Mlp, ModelMlps};
use crate::ndtm::{fixtures, NdtmSpec};
use crate::oracle::{exact_dp, rollout, Ceiling, DpSolution};
use crate::rational::{half, one, rat, Rational};
use crate::reductions::sat_brute_force;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    SatEquiv,
    CvpEquiv,
    NpEquiv,
    StochSat,
    Circuits,
    Mlps,
}

impl Suite {
    pub const ALL: [Suite; 6] =
        [Suite::SatEquiv, Suite::CvpEquiv, Suite::NpEquiv, Suite::StochSat, Suite::Circuits, Suite::Mlps];

    pub fn name(self) -> &'static str {
        match self {
            Suite::SatEquiv => "sat-equiv",
            Suite::CvpEquiv => "cvp-equiv",
            Suite::NpEquiv => "np-equiv",
            Suite::StochSat => "stoch-sat",
            Suite::Circuits => "circuits",
            Suite::Mlps => "mlps",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Debug)]
pub struct SuiteParams {
    /// Size parameter; each suite has its own default.
    pub n: Option<usize>,
    /// Restricts the circuit and MLP suites to one family.
    pub family: Option<Family>,
    /// Sampled instances per size, where a suite samples.
    pub samples: Option<usize>,
    pub seed: u64,
    /// Corrupts one transition so the suite must fail.
    pub fault: bool,
    pub ceiling: Ceiling,
}

impl Default for SuiteParams {
    fn default() -> Self {
        SuiteParams { n: None, family: None, samples: None, seed: 0, fault: false, ceiling: Ceiling::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub id: String,
    pub passed: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<Mismatch>,
}

impl Check {
    fn new(id: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { id: id.into(), passed, detail: detail.into(), witnesses: Vec::new() }
    }

    fn from_report(id: impl Into<String>, r: EquivReport) -> Self {
        let detail = if r.empty_domain {
            "empty domain".to_string()
        } else {
            format!("{}/{} points match", r.matches, r.points)
        };
        Check { id: id.into(), passed: r.passed(), detail, witnesses: r.witnesses }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub fault: bool,
    pub passed: bool,
    pub total: usize,
    pub failed: usize,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: Suite, params: &SuiteParams, mut checks: Vec<Check>) -> Self {
        checks.sort_by(|a, b| a.id.cmp(&b.id));
        let failed = checks.iter().filter(|c| !c.passed).count();
        SuiteReport {
            suite,
            seed: params.seed,
            fault: params.fault,
            passed: failed == 0 && !checks.is_empty(),
            total: checks.len(),
            failed,
            checks,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Failed checks whose id ends with `/aspect`.
    pub fn failed_aspect(&self, aspect: &str) -> usize {
        let suffix = format!("/{aspect}");
        self.failures().filter(|c| c.id.ends_with(&suffix)).count()
    }

    pub fn count_aspect(&self, aspect: &str) -> usize {
        let suffix = format!("/{aspect}");
        self.checks.iter().filter(|c| c.id.ends_with(&suffix)).count()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

pub fn run_suite(suite: Suite, params: &SuiteParams) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::SatEquiv => sat_equiv(params)?,
        Suite::CvpEquiv => cvp_equiv(params)?,
        Suite::NpEquiv => np_equiv(params)?,
        Suite::StochSat => stoch_sat(params)?,
        Suite::Circuits => circuits(params)?,
        Suite::Mlps => mlps(params)?,
    };
    Ok(SuiteReport::new(suite, params, checks))
}

/// Wraps an MDP so that every action from the initial state loops back to it.
pub struct Faulty<'a, M: Mdp> {
    inner: &'a M,
    s0: M::State,
}

impl<'a, M: Mdp> Faulty<'a, M> {
    pub fn new(inner: &'a M) -> Self {
        Faulty { inner, s0: inner.initial_state() }
    }
}

impl<M: Mdp> Mdp for Faulty<'_, M> {
    type State = M::State;
    type Action = M::Action;

    fn horizon(&self) -> usize {
        self.inner.horizon()
    }

    fn initial_state(&self) -> M::State {
        self.s0.clone()
    }

    fn actions(&self) -> Vec<M::Action> {
        self.inner.actions()
    }

    fn is_deterministic(&self) -> bool {
        self.inner.is_deterministic()
    }

    fn step(&self, s: &M::State, a: M::Action) -> StepOutcome<M::State> {
        let out = self.inner.step(s, a);
        if *s == self.s0 {
            StepOutcome::deterministic(self.s0.clone(), out.reward)
        } else {
            out
        }
    }
}

type Solved<M> = (DpSolution<<M as Mdp>::State, <M as Mdp>::Action>, Option<String>);

/// Solves (the faulted copy when asked) and checks Bellman consistency
/// against the genuine step function.
fn solve<M: Mdp>(m: &M, params: &SuiteParams) -> Result<Solved<M>> {
    let dp = if params.fault { exact_dp(&Faulty::new(m), &params.ceiling)? } else { exact_dp(m, &params.ceiling)? };
    let bellman = dp.check_bellman(m).err();
    Ok((dp, bellman))
}

fn bellman_check(id: &str, bellman: Option<String>) -> Check {
    match bellman {
        None => Check::new(format!("{id}/bellman"), true, "zero residual"),
        Some(e) => Check::new(format!("{id}/bellman"), false, e),
    }
}

fn rng_for(params: &SuiteParams, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(params.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(tag))
}

fn collect<T: Send>(items: Vec<Result<Vec<T>>>) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for r in items {
        out.extend(r?);
    }
    Ok(out)
}

/// Exhaustive when there are at most this many formulas.
pub const EXHAUSTIVE_FORMULAS: u64 = 4096;

fn formulas(n: usize, params: &SuiteParams, default_samples: usize, tag: u64) -> Vec<Cnf3Formula> {
    let total = (2 * n as u64).checked_pow(3 * n as u32);
    if params.samples.is_none() && total.is_some_and(|t| t <= EXHAUSTIVE_FORMULAS) {
        return Cnf3Formula::enumerate_all(n).collect();
    }
    let mut rng = rng_for(params, tag + n as u64);
    (0..params.samples.unwrap_or(default_samples)).map(|_| random_formula(n, &mut rng)).collect()
}

pub fn sat_check(id: &str, psi: &Cnf3Formula, params: &SuiteParams) -> Result<Vec<Check>> {
    let (sat, _) = sat_brute_force(psi)?;
    let m = SatMdp::new(psi.clone());
    let (dp, bellman) = solve(&m, params)?;
    let (q1, v1, pi) = (dp.q1(1), dp.v1(), dp.pi1());
    let expect_v = if sat { one() } else { half() };
    Ok(vec![
        Check::new(format!("{id}/decision"), (q1 > rat(3, 4)) == sat, format!("satisfiable={sat} Q1(s0,1)={q1}")),
        Check::new(format!("{id}/value"), v1 == expect_v, format!("V1={v1}")),
        Check::new(format!("{id}/policy"), (pi == 1) == sat, format!("pi1={pi}")),
        bellman_check(id, bellman),
    ])
}

fn sat_equiv(params: &SuiteParams) -> Result<Vec<Check>> {
    let n = params.n.unwrap_or(2);
    let fs = formulas(n, params, 200, 100);
    let results: Vec<_> =
        fs.par_iter().enumerate().map(|(i, psi)| sat_check(&format!("sat-n{n}-{i:05}"), psi, params)).collect();
    collect(results)
}

pub fn cvp_check(id: &str, c: &GateCircuit, params: &SuiteParams) -> Result<Vec<Check>> {
    let output = c.evaluate(None)?;
    let m = CvpMdp::new(c.clone())?;
    let s0 = m.initial_state();
    let (dp, bellman) = solve(&m, params)?;
    let a0 = m.policy(&s0);
    let q = dp.q1(a0);
    let v1 = dp.v1();
    let ret = rollout(&m, s0, m.horizon(), |_, s| Some(m.policy(s)), params.seed)?.ret;
    let cone = c.output_cone().iter().filter(|&&b| b).count();
    let ctx = format!("output={} |cone|={cone}/{}", output as u8, c.size());
    Ok(vec![
        Check::new(format!("{id}/decision"), (q == one()) == output, format!("{ctx} Q1(s0,{a0})={q}")),
        Check::new(format!("{id}/rollout"), ret == rat(output as i128, 1), format!("{ctx} greedy return={ret}")),
        Check::new(format!("{id}/threshold"), (v1 >= one()) == output, format!("{ctx} V1={v1}")),
        Check::new(format!("{id}/greedy-optimal"), ret == v1, format!("{ctx} greedy return={ret} V1={v1}")),
        bellman_check(id, bellman),
    ])
}

fn cvp_equiv(params: &SuiteParams) -> Result<Vec<Check>> {
    let n = params.n.unwrap_or(3);
    let mut rng = rng_for(params, 200 + n as u64);
    let cs: Vec<GateCircuit> = (0..params.samples.unwrap_or(100)).map(|_| random_circuit(n, &mut rng)).collect();
    let results: Vec<_> =
        cs.par_iter().enumerate().map(|(i, c)| cvp_check(&format!("cvp-n{n}-{i:05}"), c, params)).collect();
    collect(results)
}

/// Named fixtures at tape bound `p`.
pub fn np_fixtures(p: usize) -> Result<Vec<(String, NdtmSpec)>> {
    let mut out = vec![
        (format!("accept-all-p{p}"), fixtures::accept_all(p)),
        (format!("reject-all-p{p}"), fixtures::reject_all(p)),
        (format!("contains-one-p{p}"), fixtures::contains_one(p)),
    ];
    for target in [vec![true], vec![false, true], vec![true, false, true]] {
        if p >= target.len() + 2 {
            let name: String = target.iter().map(|&b| if b { '1' } else { '0' }).collect();
            out.push((format!("guess-match-{name}-p{p}"), fixtures::guess_match(&target, p)?));
        }
    }
    Ok(out)
}

/// Every bit string of length at most `max_len`, shortest first.
pub fn all_inputs(max_len: usize) -> Vec<Vec<bool>> {
    (0..=max_len)
        .flat_map(|len| (0..1usize << len).map(move |code| (0..len).map(|i| code >> i & 1 == 1).collect()))
        .collect()
}

pub fn np_check(id: &str, spec: &NdtmSpec, x: &[bool], params: &SuiteParams) -> Result<Vec<Check>> {
    let accepts = spec.accepts(x)?;
    let m = NpMdp::new(spec.clone(), x.to_vec())?;
    let (dp, bellman) = solve(&m, params)?;
    let (q1, v1) = (dp.q1(1), dp.v1());
    let expect_v = if accepts { one() } else { half() };
    Ok(vec![
        Check::new(format!("{id}/decision"), (q1 > rat(3, 4)) == accepts, format!("accepts={accepts} Q1={q1}")),
        Check::new(format!("{id}/value"), v1 == expect_v, format!("V1={v1}")),
        bellman_check(id, bellman),
    ])
}

fn np_equiv(params: &SuiteParams) -> Result<Vec<Check>> {
    let bounds = match params.n {
        Some(p) => vec![p],
        None => vec![6, 8],
    };
    let mut jobs = Vec::new();
    for p in bounds {
        for (name, spec) in np_fixtures(p)? {
            for x in all_inputs(4.min(p.saturating_sub(1))) {
                let xs: String = x.iter().map(|&b| if b { '1' } else { '0' }).collect();
                jobs.push((format!("np-{name}-x{xs}"), spec.clone(), x));
            }
        }
    }
    let results: Vec<_> = jobs.par_iter().map(|(id, spec, x)| np_check(id, spec, x, params)).collect();
    collect(results)
}

/// `(1 - 3^-n)^n`.
pub fn stoch_lower_bound(n: usize) -> Rational {
    let p = one() - Rational::new(1, 3i128.pow(n as u32));
    (0..n).fold(one(), |acc, _| acc * p)
}

pub fn stoch_check(id: &str, psi: &Cnf3Formula, params: &SuiteParams) -> Result<Vec<Check>> {
    let (sat, _) = sat_brute_force(psi)?;
    let m = StochSatMdp::new(psi.clone());
    let (dp, bellman) = solve(&m, params)?;
    let q_one = dp.q1(StochAction::One);
    let q_zero = dp.q1(StochAction::Zero);
    let v1 = dp.v1();
    let n = psi.n();
    let (passed, detail) = if sat {
        let bound = stoch_lower_bound(n);
        (q_one > half() && q_one >= bound, format!("satisfiable Q1(s0,1)={q_one} bound={bound}"))
    } else {
        (v1 == half() && q_zero == half(), format!("unsatisfiable V1={v1} Q1(s0,0)={q_zero}"))
    };
    Ok(vec![Check::new(format!("{id}/threshold"), passed, detail), bellman_check(id, bellman)])
}

fn stoch_sat(params: &SuiteParams) -> Result<Vec<Check>> {
    let sizes = match params.n {
        Some(n) => vec![n],
        None => vec![2, 3],
    };
    let mut out = Vec::new();
    for n in sizes {
        let fs = formulas(n, params, 50, 300);
        let results: Vec<_> = fs
            .par_iter()
            .enumerate()
            .map(|(i, psi)| stoch_check(&format!("stoch-sat-n{n}-{i:05}"), psi, params))
            .collect();
        out.extend(collect(results)?);
    }
    Ok(out)
}

const MODEL_FAMILIES: [Family; 4] = [Family::Sat, Family::Np, Family::Cvp, Family::P];

fn families(params: &SuiteParams) -> Result<Vec<Family>> {
    match params.family {
        None => Ok(MODEL_FAMILIES.to_vec()),
        Some(f) if MODEL_FAMILIES.contains(&f) => Ok(vec![f]),
        Some(f) => Err(Error::invalid(format!("no circuit or MLP construction for the {f} family"))),
    }
}

fn equiv_sizes(params: &SuiteParams) -> Vec<usize> {
    params.n.map_or(vec![2, 3], |n| vec![n])
}

/// Concrete instances the family-level builders are checked on.
enum Instance {
    Sat(SatMdp),
    Np(NpMdp),
    Cvp(CvpMdp),
    P(PMdp),
}

fn instances(family: Family, n: usize, params: &SuiteParams, tag: u64) -> Result<Vec<Instance>> {
    let count = params.samples.unwrap_or(3);
    let mut rng = rng_for(params, tag + n as u64);
    Ok(match family {
        Family::Sat => (0..count).map(|_| Instance::Sat(SatMdp::new(random_formula(n, &mut rng)))).collect(),
        Family::Cvp => {
            (0..count).map(|_| CvpMdp::new(random_circuit(n, &mut rng)).map(Instance::Cvp)).collect::<Result<_>>()?
        }
        Family::P => (0..count)
            .map(|_| {
                let c = random_input_circuit(2 * n - 1, n, &mut rng);
                PMdp::new(c, random_bits(n, &mut rng)).map(Instance::P)
            })
            .collect::<Result<_>>()?,
        Family::Np => {
            let spec = fixtures::guess_match(&fixtures::alternating(n), n + 2)?;
            all_inputs(2).into_iter().map(|x| NpMdp::new(spec.clone(), x).map(Instance::Np)).collect::<Result<_>>()?
        }
        _ => unreachable!("filtered by families()"),
    })
}

fn flip_first_output(c: &BoolCircuit) -> BoolCircuit {
    let mut gates = c.gates().to_vec();
    let mut outputs = c.outputs().to_vec();
    gates.push(Gate { op: GateOp::Not, inputs: vec![outputs[0]] });
    outputs[0] = Wire::Gate(gates.len() - 1);
    BoolCircuit::new(c.inputs(), gates, outputs).expect("appending a gate keeps the circuit valid")
}

fn part_name(p: Part) -> &'static str {
    match p {
        Part::Reward => "reward",
        Part::Transition => "transition",
        Part::Policy => "policy",
    }
}

/// Sizes over which depth and growth are measured.
pub const CIRCUIT_GROWTH_SIZES: std::ops::RangeInclusive<usize> = 2..=8;
pub const MLP_GROWTH_SIZES: std::ops::RangeInclusive<usize> = 2..=6;

fn circuits(params: &SuiteParams) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for fam in families(params)? {
        for n in equiv_sizes(params) {
            let mut built = acz::build_model_circuit(fam, n)?;
            if params.fault {
                built.transition = flip_first_output(&built.transition);
            }
            let policy = matches!(fam, Family::Cvp | Family::P).then(|| acz::build_policy_circuit(fam, n)).transpose()?;
            let insts = instances(fam, n, params, 400 + 16 * fam as u64)?;
            let results: Vec<Result<Vec<Check>>> = insts
                .par_iter()
                .enumerate()
                .map(|(i, inst)| circuit_instance(&format!("circuits-{fam}-n{n}-{i:03}"), inst, &built, policy.as_ref(), params))
                .collect();
            checks.extend(collect(results)?);
        }
        for part in Part::ALL {
            let Some(exp) = acz::declared_size_exponent(fam, part) else { continue };
            let mut stats = Vec::new();
            for n in CIRCUIT_GROWTH_SIZES {
                let c = match part {
                    Part::Policy => acz::build_policy_circuit(fam, n)?,
                    Part::Reward => acz::build_model_circuit(fam, n)?.reward,
                    Part::Transition => acz::build_model_circuit(fam, n)?.transition,
                };
                stats.push((n, c.stats()));
            }
            let depths: Vec<usize> = stats.iter().map(|(_, s)| s.depth).collect();
            let sizes: Vec<(usize, usize)> = stats.iter().map(|&(n, s)| (n, s.size)).collect();
            let id = format!("circuits-{fam}-{}", part_name(part));
            checks.push(Check::new(
                format!("{id}/depth"),
                depths.windows(2).all(|w| w[0] == w[1]),
                format!("depths {depths:?} for n={CIRCUIT_GROWTH_SIZES:?}"),
            ));
            let slope = log_log_slope(&sizes);
            checks.push(Check::new(
                format!("{id}/size-slope"),
                slope <= exp as f64 + 0.5,
                format!("sizes {:?} slope {slope:.3} declared {exp}", sizes.iter().map(|s| s.1).collect::<Vec<_>>()),
            ));
        }
    }
    Ok(checks)
}

fn circuit_instance(
    id: &str,
    inst: &Instance,
    built: &ModelCircuits,
    policy: Option<&BoolCircuit>,
    params: &SuiteParams,
) -> Result<Vec<Check>> {
    let c = &params.ceiling;
    let mut out = Vec::new();
    let model = match inst {
        Instance::Sat(m) => acz_check::check_sat_circuits(m, built, c)?,
        Instance::Np(m) => acz_check::check_np_circuits(m, built, c)?,
        Instance::Cvp(m) => acz_check::check_cvp_circuits(m, built, c)?,
        Instance::P(m) => acz_check::check_p_circuits(m, built, c)?,
    };
    out.push(Check::from_report(format!("{id}/model"), model));
    if let Some(pc) = policy {
        let r = match inst {
            Instance::Cvp(m) => acz_check::check_cvp_policy_circuit(m, pc, c)?,
            Instance::P(m) => acz_check::check_p_policy_circuit(m, pc, c)?,
            _ => unreachable!("policy circuits exist for cvp and p"),
        };
        out.push(Check::from_report(format!("{id}/policy"), r));
    }
    Ok(out)
}

/// Precisions every MLP check is repeated at.
pub const PRECISIONS: [u32; 3] = [8, 16, 32];

fn gate_checks() -> Vec<Check> {
    [GateMlpKind::And, GateMlpKind::Or, GateMlpKind::Not, GateMlpKind::Maj]
        .into_iter()
        .map(|kind| {
            let max = if kind == GateMlpKind::Not { 1 } else { 10 };
            let mut report = EquivReport::empty();
            for fanin in 1..=max {
                let base = mlp::build_gate_mlp(kind, fanin).expect("fan-in is positive");
                let pts: Vec<Vec<bool>> =
                    (0..1usize << fanin).map(|c| (0..fanin).map(|i| c >> i & 1 == 1).collect()).collect();
                for bits in PRECISIONS {
                    let m = base.with_precision(bits).expect("gate weights are integers");
                    report.merge(mlp::mlp_equiv_check(
                        &m,
                        &pts,
                        |x| x.iter().map(|&b| b as u8 as f64).collect(),
                        |x| vec![rat(kind.truth(x) as i128, 1)],
                    ));
                }
            }
            Check::from_report(format!("mlps-gate-{kind:?}/exhaustive").to_lowercase(), report)
        })
        .collect()
}

/// Random table on a random integer domain of 1 to 16 points in 1 to 3 dims.
pub fn random_table(rng: &mut impl Rng) -> (Vec<Vec<i64>>, Vec<Rational>) {
    let dim = rng.gen_range(1..=3u32);
    let size = rng.gen_range(1..=16.min(11usize.pow(dim)));
    let mut domain: Vec<Vec<i64>> = Vec::with_capacity(size);
    while domain.len() < size {
        let p: Vec<i64> = (0..dim).map(|_| rng.gen_range(-5..=5)).collect();
        if !domain.contains(&p) {
            domain.push(p);
        }
    }
    let values = (0..size).map(|_| rat(rng.gen_range(-32..=32), 4)).collect();
    (domain, values)
}

fn lookup_checks(params: &SuiteParams) -> Result<Check> {
    let mut rng = rng_for(params, 500);
    let mut report = EquivReport::empty();
    for t in 0..100 {
        let (domain, values) = random_table(&mut rng);
        let table: std::collections::HashMap<Vec<i64>, Rational> =
            domain.iter().cloned().zip(values.iter().copied()).collect();
        let base = mlp::build_lookup_mlp(&domain, |u| table[u])?;
        for bits in PRECISIONS {
            let m = base.with_precision(bits)?;
            let pts: Vec<(usize, Vec<i64>)> = domain.iter().map(|u| (t, u.clone())).collect();
            report.merge(mlp::mlp_equiv_check(
                &m,
                &pts,
                |(_, u)| u.iter().map(|&v| v as f64).collect(),
                |(_, u)| vec![table[u]],
            ));
        }
    }
    Ok(Check::from_report("mlps-lookup-random/exact", report))
}

fn at_precision(built: &ModelMlps, bits: u32) -> Result<ModelMlps> {
    Ok(ModelMlps { reward: built.reward.with_precision(bits)?, transition: built.transition.with_precision(bits)? })
}

fn mlp_instance(
    id: &str,
    inst: &Instance,
    built: &ModelMlps,
    policy: Option<&Mlp>,
    params: &SuiteParams,
) -> Result<Vec<Check>> {
    let c = &params.ceiling;
    let mut model = EquivReport::empty();
    let mut pol = EquivReport::empty();
    for bits in PRECISIONS {
        let b = at_precision(built, bits)?;
        model.merge(match inst {
            Instance::Sat(m) => mlp::check_sat_mlps(m, &b, c)?,
            Instance::Np(m) => mlp::check_np_mlps(m, &b, c)?,
            Instance::Cvp(m) => mlp::check_cvp_mlps(m, &b, c)?,
            Instance::P(m) => mlp::check_p_mlps(m, &b, c)?,
        });
        if let Some(p) = policy {
            let p = p.with_precision(bits)?;
            pol.merge(match inst {
                Instance::Cvp(m) => mlp::check_cvp_policy_mlp(m, &p, c)?,
                Instance::P(m) => mlp::check_p_policy_mlp(m, &p, c)?,
                _ => unreachable!("policy networks exist for cvp and p"),
            });
        }
    }
    let mut out = vec![Check::from_report(format!("{id}/model"), model)];
    if policy.is_some() {
        out.push(Check::from_report(format!("{id}/policy"), pol));
    }
    Ok(out)
}

fn mlps(params: &SuiteParams) -> Result<Vec<Check>> {
    let mut checks = gate_checks();
    checks.push(lookup_checks(params)?);
    for fam in families(params)? {
        for n in equiv_sizes(params) {
            let mut built = mlp::build_model_mlp(fam, n)?;
            if params.fault {
                let last = built.transition.layers_mut().last_mut().expect("at least one layer");
                last.bias[0] += 1.0;
            }
            let policy = matches!(fam, Family::Cvp | Family::P).then(|| mlp::build_policy_mlp(fam, n)).transpose()?;
            let insts = instances(fam, n, params, 600 + 16 * fam as u64)?;
            let results: Vec<Result<Vec<Check>>> = insts
                .par_iter()
                .enumerate()
                .map(|(i, inst)| mlp_instance(&format!("mlps-{fam}-n{n}-{i:03}"), inst, &built, policy.as_ref(), params))
                .collect();
            checks.extend(collect(results)?);
        }
        for part in Part::ALL {
            let Some(exp) = mlp::declared_width_exponent(fam, part) else { continue };
            let mut shape = Vec::new();
            for n in MLP_GROWTH_SIZES {
                let m = match part {
                    Part::Policy => mlp::build_policy_mlp(fam, n)?,
                    Part::Reward => mlp::build_model_mlp(fam, n)?.reward,
                    Part::Transition => mlp::build_model_mlp(fam, n)?.transition,
                };
                shape.push((n, m.layer_count(), m.max_hidden_width()));
            }
            let layers: Vec<usize> = shape.iter().map(|s| s.1).collect();
            let widths: Vec<(usize, usize)> = shape.iter().map(|s| (s.0, s.2)).collect();
            let id = format!("mlps-{fam}-{}", part_name(part));
            checks.push(Check::new(
                format!("{id}/layers"),
                layers.windows(2).all(|w| w[0] == w[1]),
                format!("layers {layers:?} for n={MLP_GROWTH_SIZES:?}"),
            ));
            let slope = log_log_slope(&widths);
            checks.push(Check::new(
                format!("{id}/width-slope"),
                slope <= exp as f64 + 0.5,
                format!("widths {:?} slope {slope:.3} declared {exp}", widths.iter().map(|w| w.1).collect::<Vec<_>>()),
            ));
        }
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(n: usize, samples: usize) -> SuiteParams {
        SuiteParams { n: Some(n), samples: Some(samples), seed: 3, ..Default::default() }
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn sat_equiv_sampled_passes_and_fault_fails() {
        let r = run_suite(Suite::SatEquiv, &small(2, 20)).unwrap();
        assert!(r.passed, "{:?}", r.failures().next());
        assert_eq!(r.total, 80);
        let bad = run_suite(Suite::SatEquiv, &SuiteParams { fault: true, ..small(2, 5) }).unwrap();
        assert!(!bad.passed);
        let w = bad.failures().find(|c| c.id.ends_with("/bellman")).unwrap();
        assert!(w.detail.contains("SatState"), "{}", w.detail);
    }

    #[test]
    fn np_and_stoch_small() {
        let r = run_suite(Suite::NpEquiv, &small(5, 0)).unwrap();
        assert!(r.passed, "{:?}", r.failures().next());
        let r = run_suite(Suite::StochSat, &small(2, 10)).unwrap();
        assert!(r.passed, "{:?}", r.failures().next());
    }

    #[test]
    fn stoch_bound_value() {
        assert_eq!(stoch_lower_bound(2), rat(64, 81));
    }

    #[test]
    fn reports_are_stable() {
        let a = run_suite(Suite::CvpEquiv, &small(3, 10)).unwrap().to_json();
        let b = run_suite(Suite::CvpEquiv, &small(3, 10)).unwrap().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn model_fault_detected() {
        let p = SuiteParams { family: Some(Family::Cvp), fault: true, ..small(2, 1) };
        let r = run_suite(Suite::Circuits, &p).unwrap();
        assert!(r.failures().any(|c| c.id.ends_with("/model") && !c.witnesses.is_empty()));
        let r = run_suite(Suite::Mlps, &p).unwrap();
        assert!(r.failures().any(|c| c.id.ends_with("/model") && !c.witnesses.is_empty()));
    }

    #[test]
    fn inputs_enumeration() {
        assert_eq!(all_inputs(2).len(), 7);
        assert_eq!(all_inputs(0), vec![Vec::<bool>::new()]);
    }
}
