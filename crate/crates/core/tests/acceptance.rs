//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line.
//!
//! Criteria 2 and 7 contain a clause that does not hold for this CVP reward
//! (the output reward repeats every step once the output is known, so the
//! optimum exceeds 1 whenever some node lies outside the output's cone).
//! Those tests print the literal verdict and then assert what does hold:
//! every disagreement sits on such a circuit, and the corrected statements
//! pass everywhere.

use std::sync::OnceLock;
use std::time::Instant;

use mdpzoo::circuit::GateCircuit;
use mdpzoo::env::{CvpMdp, Mdp, SatMdp};
use mdpzoo::generate::random_circuit;
use mdpzoo::oracle::{exact_dp, Ceiling};
use mdpzoo::verify::{cvp_check, run_suite, Check, Suite, SuiteParams, SuiteReport};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn verdict(id: u32, name: &str, passed: bool, detail: &str) {
    println!("criterion {id} {name}: {} ({detail})", if passed { "PASS" } else { "FAIL" });
}

fn params(n: Option<usize>, samples: Option<usize>, seed: u64) -> SuiteParams {
    SuiteParams { n, samples, seed, ..Default::default() }
}

fn show_failures(r: &SuiteReport) -> String {
    r.failures().take(5).map(|c| format!("{}: {}", c.id, c.detail)).collect::<Vec<_>>().join("; ")
}

struct SatRuns {
    exhaustive: SuiteReport,
    n3: SuiteReport,
    n4: SuiteReport,
}

fn sat_runs() -> &'static SatRuns {
    static CELL: OnceLock<SatRuns> = OnceLock::new();
    CELL.get_or_init(|| SatRuns {
        exhaustive: run_suite(Suite::SatEquiv, &params(Some(2), None, 1)).unwrap(),
        n3: run_suite(Suite::SatEquiv, &params(Some(3), Some(200), 1)).unwrap(),
        n4: run_suite(Suite::SatEquiv, &params(Some(4), Some(200), 1)).unwrap(),
    })
}

fn np_run() -> &'static SuiteReport {
    static CELL: OnceLock<SuiteReport> = OnceLock::new();
    CELL.get_or_init(|| run_suite(Suite::NpEquiv, &params(None, None, 1)).unwrap())
}

fn stoch_run() -> &'static SuiteReport {
    static CELL: OnceLock<SuiteReport> = OnceLock::new();
    CELL.get_or_init(|| run_suite(Suite::StochSat, &params(None, None, 1)).unwrap())
}

struct CvpRun {
    circuits: Vec<GateCircuit>,
    checks: Vec<Vec<Check>>,
}

const CVP_PER_SIZE: usize = 1000;

fn cone_complete(c: &GateCircuit) -> bool {
    c.output_cone().iter().all(|&b| b)
}

fn cvp_run() -> &'static CvpRun {
    static CELL: OnceLock<CvpRun> = OnceLock::new();
    CELL.get_or_init(|| {
        let p = params(None, None, 1);
        let mut circuits = Vec::new();
        for n in 3..=10 {
            let mut rng = ChaCha8Rng::seed_from_u64(7000 + n as u64);
            circuits.extend((0..CVP_PER_SIZE).map(|_| random_circuit(n, &mut rng)));
        }
        use rayon::prelude::*;
        let checks = circuits
            .par_iter()
            .enumerate()
            .map(|(i, c)| cvp_check(&format!("cvp-{i:05}"), c, &p).unwrap())
            .collect();
        CvpRun { circuits, checks }
    })
}

fn aspect<'a>(checks: &'a [Check], name: &str) -> &'a Check {
    let suffix = format!("/{name}");
    checks.iter().find(|c| c.id.ends_with(&suffix)).expect("aspect present")
}

#[test]
fn criterion_1_sat_mdp_equivalence() {
    let t = Instant::now();
    let runs = sat_runs();
    let ex = &runs.exhaustive;
    assert_eq!(ex.count_aspect("decision"), 4096);
    let passed = ex.passed && runs.n3.passed && runs.n4.passed;
    verdict(
        1,
        "3-SAT MDP equivalence",
        passed,
        &format!(
            "{} formulas exhaustive at n=2, {} at n=3, {} at n=4, {} failed checks, {:.1}s",
            ex.count_aspect("decision"),
            runs.n3.count_aspect("decision"),
            runs.n4.count_aspect("decision"),
            ex.failed + runs.n3.failed + runs.n4.failed,
            t.elapsed().as_secs_f64()
        ),
    );
    assert!(passed, "{} {} {}", show_failures(ex), show_failures(&runs.n3), show_failures(&runs.n4));
}

#[test]
fn criterion_2_cvp_mdp_equivalence() {
    let t = Instant::now();
    let run = cvp_run();
    let total = run.circuits.len();
    let mut literal_fail = 0;
    let mut literal_fail_complete = 0;
    let mut complete = 0;
    let mut rollout_fail = 0;
    let mut threshold_fail = 0;
    for (c, checks) in run.circuits.iter().zip(&run.checks) {
        let whole = cone_complete(c);
        complete += whole as usize;
        if !aspect(checks, "decision").passed {
            literal_fail += 1;
            literal_fail_complete += whole as usize;
        }
        rollout_fail += !aspect(checks, "rollout").passed as usize;
        threshold_fail += !aspect(checks, "threshold").passed as usize;
    }
    verdict(
        2,
        "CVP MDP equivalence",
        literal_fail == 0 && rollout_fail == 0,
        &format!(
            "[Q1*(s0,pi*(s0)) = 1] disagrees with the circuit on {literal_fail}/{total} circuits; \
             greedy rollout return mismatches {rollout_fail}/{total}; {:.1}s",
            t.elapsed().as_secs_f64()
        ),
    );
    println!(
        "  supplementary: disagreements on cone-complete circuits {literal_fail_complete}/{complete}; \
         [V1* >= 1] disagrees on {threshold_fail}/{total}"
    );
    assert_eq!(rollout_fail, 0);
    assert_eq!(threshold_fail, 0);
    assert_eq!(literal_fail_complete, 0);
    assert!(complete > 0);
}

#[test]
fn criterion_3_np_mdp_equivalence() {
    let t = Instant::now();
    let r = np_run();
    verdict(
        3,
        "NP MDP equivalence",
        r.passed,
        &format!(
            "{} (machine, input) pairs, P in {{6, 8}}, |x| <= 4, {} failed checks, {:.1}s",
            r.count_aspect("decision"),
            r.failed,
            t.elapsed().as_secs_f64()
        ),
    );
    assert!(r.passed, "{}", show_failures(r));
}

#[test]
fn criterion_4_stochastic_sat() {
    let t = Instant::now();
    let r = stoch_run();
    let n2 = r.checks.iter().filter(|c| c.id.starts_with("stoch-sat-n2-") && c.id.ends_with("/threshold")).count();
    let n3 = r.checks.iter().filter(|c| c.id.starts_with("stoch-sat-n3-") && c.id.ends_with("/threshold")).count();
    verdict(
        4,
        "stochastic 3-SAT thresholds",
        r.passed,
        &format!("{n2} formulas exhaustive at n=2, {n3} sampled at n=3, {} failed checks, {:.1}s", r.failed, t.elapsed().as_secs_f64()),
    );
    assert_eq!(n2, 4096);
    assert!(r.passed, "{}", show_failures(r));
}

#[test]
fn criterion_5_circuit_constructions() {
    let t = Instant::now();
    let r = run_suite(Suite::Circuits, &params(None, None, 1)).unwrap();
    verdict(
        5,
        "AC0 constructions",
        r.passed,
        &format!("{} checks over sat/np/cvp/p, {} failed, {:.1}s", r.total, r.failed, t.elapsed().as_secs_f64()),
    );
    for c in r.checks.iter().filter(|c| c.id.ends_with("/depth") || c.id.ends_with("/size-slope")) {
        println!("  {}: {}", c.id, c.detail);
    }
    assert!(r.passed, "{}", show_failures(&r));
}

#[test]
fn criterion_6_mlp_constructions() {
    let t = Instant::now();
    let r = run_suite(Suite::Mlps, &params(None, None, 1)).unwrap();
    verdict(
        6,
        "MLP constructions",
        r.passed,
        &format!(
            "{} checks, precisions 8/16/32, {} failed, {:.1}s",
            r.total,
            r.failed,
            t.elapsed().as_secs_f64()
        ),
    );
    for c in r.checks.iter().filter(|c| c.id.ends_with("/layers") || c.id.ends_with("/width-slope")) {
        println!("  {}: {}", c.id, c.detail);
    }
    assert!(r.passed, "{}", show_failures(&r));
}

#[test]
fn criterion_7_oracle_self_consistency() {
    let t = Instant::now();
    let sat = sat_runs();
    let reports = [&sat.exhaustive, &sat.n3, &sat.n4, np_run(), stoch_run()];
    let mut solved: usize = reports.iter().map(|r| r.count_aspect("bellman")).sum();
    let mut residual: usize = reports.iter().map(|r| r.failed_aspect("bellman")).sum();
    let run = cvp_run();
    let mut greedy_fail = 0;
    let mut greedy_fail_complete = 0;
    for (c, checks) in run.circuits.iter().zip(&run.checks) {
        solved += 1;
        residual += !aspect(checks, "bellman").passed as usize;
        if !aspect(checks, "greedy-optimal").passed {
            greedy_fail += 1;
            greedy_fail_complete += cone_complete(c) as usize;
        }
    }

    // byte-identical reruns of a DP export and a suite report
    let psi = mdpzoo::generate::random_formula(3, &mut ChaCha8Rng::seed_from_u64(9));
    let m = SatMdp::new(psi);
    let a = serde_json::to_string(&exact_dp(&m, &Ceiling::default()).unwrap().to_json()).unwrap();
    let b = serde_json::to_string(&exact_dp(&m, &Ceiling::default()).unwrap().to_json()).unwrap();
    let c = CvpMdp::new(run.circuits[123].clone()).unwrap();
    let c1 = exact_dp(&c, &Ceiling::default()).unwrap().to_csv();
    let c2 = exact_dp(&c, &Ceiling::default()).unwrap().to_csv();
    let s1 = serde_json::to_string(&run_suite(Suite::CvpEquiv, &params(Some(4), Some(30), 5)).unwrap().to_json()).unwrap();
    let s2 = serde_json::to_string(&run_suite(Suite::CvpEquiv, &params(Some(4), Some(30), 5)).unwrap().to_json()).unwrap();
    let stable = a == b && c1 == c2 && s1 == s2;
    assert!(c.horizon() > 0);

    verdict(
        7,
        "oracle self-consistency",
        residual == 0 && greedy_fail == 0 && stable,
        &format!(
            "nonzero Bellman residual in {residual}/{solved} solved instances; greedy CVP value != V1* on \
             {greedy_fail}/{} circuits; reruns byte-identical: {stable}; {:.1}s",
            run.circuits.len(),
            t.elapsed().as_secs_f64()
        ),
    );
    println!("  supplementary: greedy value != V1* on cone-complete circuits {greedy_fail_complete}");
    assert_eq!(residual, 0);
    assert!(stable);
    assert_eq!(greedy_fail_complete, 0);
}
