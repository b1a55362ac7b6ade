use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use mdpzoo::acz::{self, BoolCircuit};
use mdpzoo::env::{CvpMdp, FamilyInstance, InstanceFile, NpMdp, PMdp, SatMdp, StochCvpMdp, StochSatMdp};
use mdpzoo::generate::{random_bits, random_circuit, random_formula, random_input_circuit};
use mdpzoo::mlp::{self, GateMlpKind, Mlp};
use mdpzoo::ndtm::fixtures;
use mdpzoo::oracle::{exact_dp, Ceiling};
use mdpzoo::rational::format_rational;
use mdpzoo::verify::{run_suite, Suite, SuiteParams};
use mdpzoo::{with_mdp, Family};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::{BuildArgs, BuildMlpArgs, Common, Format, GenerateArgs, Kind, SolveArgs, StatsArgs, VerifyArgs};

pub const EXIT_MISMATCH: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_LIMIT: u8 = 3;

/// Resource limits get their own code; every other error is a usage error.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    let limit = e
        .chain()
        .any(|c| matches!(c.downcast_ref::<mdpzoo::Error>(), Some(mdpzoo::Error::ResourceLimit { .. })));
    if limit {
        EXIT_LIMIT
    } else {
        EXIT_USAGE
    }
}

fn ceiling(c: &Common) -> Result<Ceiling> {
    Ok(match c.ceiling_states {
        Some(n) => Ceiling::new(n),
        None => Ceiling::from_env()?,
    })
}

fn family(s: &str) -> Result<Family> {
    Ok(s.parse::<Family>()?)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

/// Writes to `--out` when given, else stdout.
fn emit(c: &Common, text: &str) -> Result<()> {
    match &c.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json_only(c: &Common, what: &str) -> Result<()> {
    if c.format == Format::Csv {
        bail!("{what} writes JSON only");
    }
    Ok(())
}

fn load(path: &Path, family_override: Option<&str>, horizon: Option<usize>) -> Result<FamilyInstance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut file: InstanceFile =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(f) = family_override {
        file.family = family(f)?;
    }
    let inst = FamilyInstance::from_file(&file).with_context(|| format!("loading {}", path.display()))?;
    Ok(match horizon {
        Some(h) => inst.with_horizon(h)?,
        None => inst,
    })
}

fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => bail!("input must be a 0/1 string, found {other:?}"),
        })
        .collect()
}

pub fn generate(a: &GenerateArgs) -> Result<u8> {
    json_only(&a.common, "generate")?;
    let rng = || -> Result<ChaCha8Rng> {
        match a.seed {
            Some(s) => Ok(ChaCha8Rng::seed_from_u64(s)),
            None => bail!("--seed is required for random generation"),
        }
    };
    let inst = match a.kind {
        Kind::Formula => {
            let psi = random_formula(a.n, &mut rng()?);
            match a.family.as_deref().map(family).transpose()?.unwrap_or(Family::Sat) {
                Family::Sat => FamilyInstance::Sat(SatMdp::new(psi)),
                Family::StochSat => FamilyInstance::StochSat(StochSatMdp::new(psi)),
                f => bail!("formulas are sat or stoch-sat instances, not {f}"),
            }
        }
        Kind::Circuit => {
            if a.n == 0 {
                bail!("circuits need n >= 1");
            }
            let mut r = rng()?;
            match a.family.as_deref().map(family).transpose()?.unwrap_or(Family::Cvp) {
                Family::Cvp => FamilyInstance::Cvp(CvpMdp::new(random_circuit(a.n, &mut r))?),
                Family::StochCvp => FamilyInstance::StochCvp(StochCvpMdp::new(random_circuit(a.n, &mut r))?),
                Family::P => {
                    let m = a.m.unwrap_or(a.n);
                    if m == 0 {
                        bail!("p circuits need m >= 1");
                    }
                    let c = random_input_circuit(a.n, m, &mut r);
                    FamilyInstance::P(PMdp::new(c, random_bits(m, &mut r))?)
                }
                f => bail!("circuits are cvp, stoch-cvp or p instances, not {f}"),
            }
        }
        Kind::NdtmFixture => {
            let spec = fixtures::by_name(&a.name, a.n, a.step_bound)?;
            FamilyInstance::Np(NpMdp::new(spec, parse_bits(&a.input)?)?)
        }
    };
    let inst = match a.horizon {
        Some(h) => inst.with_horizon(h)?,
        None => inst,
    };
    let file = inst.to_file(a.horizon.is_some());
    emit(&a.common, &pretty(&serde_json::to_value(&file)?))?;
    Ok(0)
}

pub fn solve(a: &SolveArgs) -> Result<u8> {
    let inst = load(&a.instance, a.family.as_deref(), a.horizon)?;
    let ceiling = ceiling(&a.common)?;
    let (summary, body) = with_mdp!(&inst, m => {
        let dp = exact_dp(m, &ceiling)?;
        let summary = format!(
            "family {}\nhorizon {}\nV1*(s0) = {}\npi1*(s0) = {}\nreachable states = {}\n",
            inst.family(),
            inst.horizon(),
            format_rational(&dp.v1()),
            serde_json::to_string(&dp.pi1())?,
            dp.total_states()
        );
        let body = match a.common.format {
            Format::Json => pretty(&dp.to_json()),
            Format::Csv => dp.to_csv(),
        };
        (summary, body)
    });
    print!("{summary}");
    if a.common.out.is_some() {
        emit(&a.common, &body)?;
    }
    Ok(0)
}

pub fn verify(a: &VerifyArgs) -> Result<u8> {
    let suite: Suite = a.suite.parse()?;
    let params = SuiteParams {
        n: a.n,
        family: a.family.as_deref().map(family).transpose()?,
        samples: a.samples,
        seed: a.seed,
        fault: a.fault,
        ceiling: ceiling(&a.common)?,
    };
    let report = run_suite(suite, &params)?;
    println!(
        "suite {}: {} ({}/{} checks passed)",
        suite,
        if report.passed { "PASS" } else { "FAIL" },
        report.total - report.failed,
        report.total
    );
    for c in report.failures().take(20) {
        println!("FAIL {}: {}", c.id, c.detail);
        for w in &c.witnesses {
            println!("  at {}: expected {}, got {}", w.point, w.expected, w.got);
        }
    }
    if report.failed > 20 {
        println!("... {} more failures", report.failed - 20);
    }
    if a.common.out.is_some() {
        let body = match a.common.format {
            Format::Json => pretty(&report.to_json()),
            Format::Csv => {
                let mut s = String::from("id,passed,detail\n");
                for c in &report.checks {
                    let _ = writeln!(s, "{},{},\"{}\"", c.id, c.passed, c.detail.replace('"', "\"\""));
                }
                s
            }
        };
        emit(&a.common, &body)?;
    }
    Ok(if report.passed { 0 } else { EXIT_MISMATCH })
}

fn circuit_json(c: &BoolCircuit) -> Value {
    let s = c.stats();
    json!({"size": s.size, "depth": s.depth, "circuit": c.to_json()})
}

fn circuit_parts(f: Family, n: usize) -> Result<Vec<(&'static str, BoolCircuit)>> {
    let built = acz::build_model_circuit(f, n)?;
    let mut parts = vec![("reward", built.reward), ("transition", built.transition)];
    if matches!(f, Family::Cvp | Family::P) {
        parts.push(("policy", acz::build_policy_circuit(f, n)?));
    }
    Ok(parts)
}

fn mlp_parts(f: Family, n: usize) -> Result<Vec<(&'static str, Mlp)>> {
    let built = mlp::build_model_mlp(f, n)?;
    let mut parts = vec![("reward", built.reward), ("transition", built.transition)];
    if matches!(f, Family::Cvp | Family::P) {
        parts.push(("policy", mlp::build_policy_mlp(f, n)?));
    }
    Ok(parts)
}

pub fn build_circuit(a: &BuildArgs) -> Result<u8> {
    let f = family(&a.family)?;
    let parts = circuit_parts(f, a.n)?;
    let body = match a.common.format {
        Format::Json => {
            let mut obj = serde_json::Map::new();
            obj.insert("family".into(), json!(f));
            obj.insert("n".into(), json!(a.n));
            for (name, c) in &parts {
                obj.insert((*name).into(), circuit_json(c));
            }
            pretty(&Value::Object(obj))
        }
        Format::Csv => {
            let mut s = String::from("family,n,part,size,depth\n");
            for (name, c) in &parts {
                let st = c.stats();
                let _ = writeln!(s, "{f},{},{name},{},{}", a.n, st.size, st.depth);
            }
            s
        }
    };
    emit(&a.common, &body)?;
    Ok(0)
}

fn mlp_json(m: &Mlp) -> Value {
    json!({
        "layers": m.layer_count(),
        "maxWidth": m.max_hidden_width(),
        "weights": m.weight_count(),
        "network": m.to_json(),
    })
}

pub fn build_mlp(a: &BuildMlpArgs) -> Result<u8> {
    if let Some(g) = &a.gate {
        json_only(&a.common, "build-mlp --gate")?;
        let kind: GateMlpKind = g.parse()?;
        let m = mlp::build_gate_mlp(kind, a.fanin)?.with_precision(a.precision_bits)?;
        emit(&a.common, &pretty(&json!({"gate": kind, "fanin": a.fanin, "mlp": mlp_json(&m)})))?;
        return Ok(0);
    }
    let (Some(fs), Some(n)) = (&a.family, a.n) else { bail!("--family and --n are required without --gate") };
    let f = family(fs)?;
    let parts: Vec<(&str, Mlp)> = mlp_parts(f, n)?
        .into_iter()
        .map(|(name, m)| Ok((name, m.with_precision(a.precision_bits)?)))
        .collect::<Result<_>>()?;
    let body = match a.common.format {
        Format::Json => {
            let mut obj = serde_json::Map::new();
            obj.insert("family".into(), json!(f));
            obj.insert("n".into(), json!(n));
            obj.insert("precisionBits".into(), json!(a.precision_bits));
            for (name, m) in &parts {
                obj.insert((*name).into(), mlp_json(m));
            }
            pretty(&Value::Object(obj))
        }
        Format::Csv => {
            let mut s = String::from("family,n,part,layers,max_width,weights\n");
            for (name, m) in &parts {
                let _ = writeln!(s, "{f},{n},{name},{},{},{}", m.layer_count(), m.max_hidden_width(), m.weight_count());
            }
            s
        }
    };
    emit(&a.common, &body)?;
    Ok(0)
}

pub fn stats(a: &StatsArgs) -> Result<u8> {
    if let Some(path) = &a.instance {
        let inst = load(path, a.family.as_deref(), a.horizon)?;
        let ceiling = ceiling(&a.common)?;
        let sizes = with_mdp!(&inst, m => exact_dp(m, &ceiling)?.layer_sizes());
        let body = match a.common.format {
            Format::Json => pretty(&json!({
                "family": inst.family(),
                "horizon": inst.horizon(),
                "layerStates": sizes,
                "total": sizes.iter().sum::<usize>(),
            })),
            Format::Csv => {
                let mut s = String::from("h,states\n");
                for (h, k) in sizes.iter().enumerate() {
                    let _ = writeln!(s, "{},{k}", h + 1);
                }
                s
            }
        };
        emit(&a.common, &body)?;
        return Ok(0);
    }
    if a.n > a.max_n {
        bail!("--n {} exceeds --max-n {}", a.n, a.max_n);
    }
    let families = match &a.family {
        Some(f) => vec![family(f)?],
        None => vec![Family::Sat, Family::Np, Family::Cvp, Family::P],
    };
    let mut rows = Vec::new();
    for f in families {
        for n in a.n..=a.max_n {
            let circuits = circuit_parts(f, n)?;
            let mlps = mlp_parts(f, n)?;
            for ((name, c), (_, m)) in circuits.iter().zip(&mlps) {
                let st = c.stats();
                rows.push(json!({
                    "family": f, "n": n, "part": name,
                    "circuitSize": st.size, "circuitDepth": st.depth,
                    "mlpLayers": m.layer_count(), "mlpWidth": m.max_hidden_width(), "mlpWeights": m.weight_count(),
                }));
            }
        }
    }
    let body = match a.common.format {
        Format::Json => pretty(&Value::Array(rows)),
        Format::Csv => {
            let cols = ["family", "n", "part", "circuitSize", "circuitDepth", "mlpLayers", "mlpWidth", "mlpWeights"];
            let mut s = String::from("family,n,part,circuit_size,circuit_depth,mlp_layers,mlp_width,mlp_weights\n");
            for r in &rows {
                let cells: Vec<String> = cols
                    .iter()
                    .map(|c| match &r[c] {
                        Value::String(v) => v.clone(),
                        v => v.to_string(),
                    })
                    .collect();
                let _ = writeln!(s, "{}", cells.join(","));
            }
            s
        }
    };
    emit(&a.common, &body)?;
    Ok(0)
}
