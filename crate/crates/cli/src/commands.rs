use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::json;

use ftlab::constants::FitConstants;
use ftlab::estimator::{self, Accounting, BenchmarkSpec};
use ftlab::fit::{self, RateSample};
use ftlab::planner::{self, ConcatChain, PlanRow, SearchBounds, TargetSpec, UnderlyingKind};
use ftlab::{CodeSpec, CompileOptions, GammaModel, IdlePolicy, NoiseParams, SteanePrep, Variant};

use crate::cli::*;

/// A bad command line that clap cannot catch.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// Everything needed to re-execute a run; embedded in every output.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub version: String,
    pub threads: Option<usize>,
    pub command: Command,
}

const SURFACE_NOTE: &str = "surface-code overhead counts d^2 qubits per logical qubit";

pub fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(config_error("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("thread pool")?;
    }
    let command = match cli.command {
        Command::Replay(r) => {
            let mut cfg = read_config(&r.file)?;
            set_out(&mut cfg.command, r.out);
            cfg.command
        }
        c => c,
    };
    let cfg = RunConfig { version: env!("CARGO_PKG_VERSION").into(), threads: cli.threads, command };
    match &cfg.command {
        Command::Simulate(a) => simulate(&cfg, a),
        Command::Fit(a) => fit_cmd(&cfg, a),
        Command::Compose(a) => compose(&cfg, a),
        Command::Optimize(a) => optimize(&cfg, a),
        Command::Targets(a) => targets(&cfg, a),
        Command::Replay(_) => unreachable!(),
    }
}

fn set_out(c: &mut Command, out: Option<PathBuf>) {
    match c {
        Command::Simulate(a) => a.out = out,
        Command::Fit(a) => a.out = out,
        Command::Compose(a) => a.common.out = out,
        Command::Optimize(a) => a.common.out = out,
        Command::Targets(a) => a.out = out,
        Command::Replay(_) => {}
    }
}

fn read_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value = match text.lines().next().and_then(|l| l.strip_prefix("# config: ")) {
        Some(line) => serde_json::from_str(line)?,
        None => {
            let v: serde_json::Value = serde_json::from_str(&text)?;
            v.get("config").cloned().ok_or_else(|| config_error(format!("{} has no embedded config", path.display())))?
        }
    };
    Ok(serde_json::from_value(value)?)
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn csv_header(cfg: &RunConfig, notes: &[&str]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    writeln!(buf, "# config: {}", serde_json::to_string(cfg)?)?;
    for n in notes {
        writeln!(buf, "# note: {n}")?;
    }
    Ok(buf)
}

fn gamma(s: &str) -> Result<GammaModel> {
    Ok(GammaModel::parse(s)?)
}

fn code_spec(a: &SimulateArgs) -> Result<CodeSpec> {
    let name = match a.code.to_ascii_lowercase().as_str() {
        "c4" => {
            if a.level.is_some_and(|l| l != 1) {
                return Err(config_error("c4 is the level-1 C4/C6 code; use --code c4c6 --level L"));
            }
            "c4".to_string()
        }
        "c6" | "c4c6" => format!("c4c6:{}", a.level.unwrap_or(2)),
        "steane" => format!("steane:{}", a.level.unwrap_or(1)),
        "c4steane" => format!("c4steane:{}", a.level.unwrap_or(2)),
        "hamming" => {
            if a.level.is_some_and(|l| l != 1) {
                return Err(config_error("Hamming codes are simulated at level 1"));
            }
            format!("q{}", a.r.ok_or_else(|| config_error("--code hamming needs --r"))?)
        }
        other => {
            if a.level.is_some() {
                return Err(config_error("--level applies to family names only"));
            }
            other.to_string()
        }
    };
    if a.r.is_some() && !a.code.eq_ignore_ascii_case("hamming") {
        return Err(config_error("--r applies to --code hamming"));
    }
    Ok(CodeSpec::parse(&name)?)
}

fn benchmark(a: &SimulateArgs, p: f64) -> Result<BenchmarkSpec> {
    let code = code_spec(a)?;
    let noise = NoiseParams::with_model(p, gamma(&a.gamma)?)?;
    let mut s = BenchmarkSpec::new(code, noise);
    if a.r_next.is_some() {
        s.r_next = a.r_next;
    }
    s.rounds = a.rounds;
    s.variant = match a.variant {
        VariantArg::Full => Variant::Full,
        VariantArg::Simplified => Variant::Simplified,
    };
    s.shots = a.shots;
    s.verification_shots = a.verification_shots;
    s.seed = a.seed;
    s.options = CompileOptions {
        steane_prep: match a.steane_prep {
            SteanePrepArg::Goto => SteanePrep::Goto,
            SteanePrepArg::Conventional => SteanePrep::Conventional,
        },
        idle: match a.idle {
            IdleArg::Gaps => IdlePolicy::Gaps,
            IdleArg::Lockstep => IdlePolicy::Lockstep,
            IdleArg::None => IdlePolicy::None,
        },
        bell_ed: !a.no_bell_ed,
    };
    s.validate()?;
    Ok(s)
}

fn simulate(cfg: &RunConfig, a: &SimulateArgs) -> Result<()> {
    let specs: Vec<BenchmarkSpec> = a.p.iter().map(|&p| benchmark(a, p)).collect::<Result<_>>()?;
    let mut records = Vec::new();
    for s in &specs {
        let accounting = match a.accounting {
            AccountingArg::Auto => Accounting::default_for(s.code),
            AccountingArg::PostselectOnly => Accounting::PostselectOnly,
            AccountingArg::LeadingOrder => Accounting::LeadingOrder,
        };
        let r = estimator::simulate(s, accounting)?;
        eprintln!("{} p={:e}: p_L={:.4e} ({} failures)", r.code, r.p, r.p_l, r.failures);
        records.push(r);
    }
    let bytes = match a.format {
        Format::Json => serde_json::to_vec_pretty(&json!({ "config": cfg, "records": records }))?,
        Format::Csv => {
            let mut buf = csv_header(cfg, &[])?;
            estimator::write_csv(&mut buf, &records)?;
            buf
        }
    };
    emit(&a.out, &bytes)
}

fn read_samples(path: &Path) -> Result<Vec<RateSample>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        return Ok(estimator::read_csv(text.as_bytes())?.iter().map(RateSample::from).collect());
    }
    let v: serde_json::Value = serde_json::from_str(&text)?;
    let records = v.get("records").cloned().unwrap_or(v);
    let records: Vec<estimator::RateRecord> = serde_json::from_value(records)?;
    Ok(records.iter().map(RateSample::from).collect())
}

fn load_constants(path: &Option<PathBuf>) -> Result<FitConstants> {
    match path {
        None => Ok(FitConstants::bundled()),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let v: serde_json::Value = serde_json::from_str(&text)?;
            // A fit output carries a single model under "constants".
            if let Some(m) = v.get("report").and_then(|r| r.get("constants")) {
                let model: ftlab::constants::ModelConstants = serde_json::from_value(m.clone())?;
                model.validate()?;
                let mut all = FitConstants::bundled();
                all.models.retain(|x| x.gamma != model.gamma);
                all.models.push(model);
                return Ok(all);
            }
            Ok(FitConstants::from_json(&text)?)
        }
    }
}

fn fit_cmd(cfg: &RunConfig, a: &FitArgs) -> Result<()> {
    let mut samples = Vec::new();
    for p in &a.input {
        samples.extend(read_samples(p)?);
    }
    let base = load_constants(&a.constants)?;
    let report = fit::fit_records(&samples, &base, a.free_exponent)?;
    for f in &report.fits {
        let values: Vec<String> = f.values.iter().map(|(n, e)| format!("{n}={:.4e}±{:.2e}", e.value, e.sigma)).collect();
        eprintln!("{}: {} (points {}, rms log10 residual {:.3e})", f.name, values.join(" "), f.summary.points, f.summary.rms_residual);
    }
    let thresholds = fit::thresholds(&report.constants);
    let bytes = serde_json::to_vec_pretty(&json!({ "config": cfg, "report": report, "thresholds": thresholds }))?;
    emit(&a.out, &bytes)
}

fn write_rows(cfg: &RunConfig, common: &PlanCommon, rows: &[PlanRow], notes: &[&str]) -> Result<()> {
    let bytes = match common.format {
        Format::Json => serde_json::to_vec_pretty(&json!({ "config": cfg, "notes": notes, "rows": rows }))?,
        Format::Csv => {
            let mut buf = csv_header(cfg, notes)?;
            planner::write_rows_csv(&mut buf, rows)?;
            buf
        }
    };
    emit(&common.out, &bytes)
}

fn compose(cfg: &RunConfig, a: &ComposeArgs) -> Result<()> {
    let chain = ConcatChain::parse(&a.chain)?;
    let constants = load_constants(&a.common.constants)?;
    let m = constants.model(gamma(&a.common.gamma)?)?;
    let mut rows = Vec::new();
    for &p in &a.p {
        for w in planner::compose_error(&chain, p, m)?.warnings {
            eprintln!("warning: p={p:e}: {w}");
        }
        rows.extend(planner::chain_rows(&chain, p, m)?);
    }
    let notes: &[&str] = if matches!(chain.underlying, planner::Underlying::Surface(_)) { &[SURFACE_NOTE] } else { &[] };
    write_rows(cfg, &a.common, &rows, notes)
}

fn optimize(cfg: &RunConfig, a: &OptimizeArgs) -> Result<()> {
    let g = gamma(&a.common.gamma)?;
    let constants = load_constants(&a.common.constants)?;
    let m = constants.model(g)?;
    let kinds: Vec<UnderlyingKind> = if a.underlying.iter().any(|u| u.eq_ignore_ascii_case("all")) {
        UnderlyingKind::ALL.to_vec()
    } else {
        a.underlying.iter().map(|u| UnderlyingKind::parse(u)).collect::<ftlab::Result<_>>()?
    };
    let bounds = SearchBounds {
        max_underlying_level: a.max_underlying_level,
        max_hamming_levels: a.max_hamming_levels,
        max_surface_distance: a.max_surface_distance,
        ..SearchBounds::default()
    };
    let mut rows = Vec::new();
    for &p in &a.p {
        let spec = TargetSpec::new(a.target, p, g)?;
        for &kind in &kinds {
            let plan = match planner::optimize_chain(&spec, kind, m, &bounds) {
                Ok(plan) => Some(plan),
                Err(ftlab::Error::Infeasible(_)) => None,
                Err(e) => return Err(e.into()),
            };
            rows.push(PlanRow::from_plan(p, g, kind, plan.as_ref()));
        }
        if a.bare_surface {
            let row = match planner::surface_overhead_for_target(p, a.target, m) {
                Ok((d, n)) => PlanRow {
                    p,
                    gamma: g,
                    underlying: "surface_only".into(),
                    chain: format!("surface:{d}"),
                    n: Some(n),
                    k: Some(1),
                    overhead: Some(n as f64),
                    p_l: Some(*planner::Underlying::Surface(d).level_rates(p, m).last().unwrap()),
                },
                Err(ftlab::Error::Infeasible(_)) => PlanRow {
                    p,
                    gamma: g,
                    underlying: "surface_only".into(),
                    chain: "-".into(),
                    n: None,
                    k: None,
                    overhead: None,
                    p_l: None,
                },
                Err(e) => return Err(e.into()),
            };
            rows.push(row);
        }
    }
    let surface = a.bare_surface || kinds.contains(&UnderlyingKind::Surface);
    write_rows(cfg, &a.common, &rows, if surface { &[SURFACE_NOTE] } else { &[] })?;
    if rows.iter().all(|r| r.overhead.is_none()) {
        return Err(ftlab::Error::Infeasible(format!("no chain reaches {:e}", a.target)).into());
    }
    Ok(())
}

fn targets(cfg: &RunConfig, a: &TargetsArgs) -> Result<()> {
    if a.n_bits == 0 {
        return Err(config_error("--n-bits must be positive"));
    }
    let n = a.n_bits;
    let cnots = planner::rsa_cnot_count(n);
    let toffolis = planner::rsa_toffoli_count(n);
    let budget = planner::classical_error_budget(a.ops_per_second, a.seconds)?;
    let bytes = if a.json {
        serde_json::to_vec_pretty(&json!({
            "config": cfg,
            "rsa": { "n_bits": n, "cnot_count": cnots, "toffoli_count": toffolis, "required_error_rate": 1.0 / cnots },
            "classical": { "ops_per_second": a.ops_per_second, "seconds": a.seconds, "error_budget": budget },
        }))?
    } else {
        let mut buf = Vec::new();
        writeln!(buf, "# config: {}", serde_json::to_string(cfg)?)?;
        writeln!(buf, "rsa-{n}: 1.8 n^3 + 0.003 n^3 lg n = {cnots:.4e} CNOT gates")?;
        writeln!(buf, "  = 6 x ({toffolis:.4e} Toffoli gates); required logical error rate ~ {:.1e}", 1.0 / cnots)?;
        writeln!(buf, "classical: 1 / ({:e} ops/s x {:e} s) = {budget:.4e}", a.ops_per_second, a.seconds)?;
        buf
    };
    emit(&a.out, &bytes)
}
