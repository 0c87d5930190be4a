//! `specmult`: batch runner for the multiplicity engine and its numerical
//! companions.
//!
//! Primary output (sets, CSV, JSON lines) goes to stdout or `--output` and is
//! byte-identical across identical runs. A JSON run record with the resolved
//! configuration goes to stderr or `--record`; its timestamp sits under
//! `metadata`.
//!
//! Exit status: 0 success, 1 usage or input error, 2 the engine refused to
//! decide (unknown relation, budget exceeded, ...), 3 a requested check failed.

mod parse;
mod record;

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_rational::Ratio;
use serde::Serialize;
use serde_json::json;

use specmult::flows::{
    exceptional_times, gaussian_time_t_multiplicity, scan_times, theorem2_flow, theorem3_multiplicity,
    theorem4_flow, theorem4_formula, theorem4_scan, FlowSpec, DEFAULT_SCAN_BOUND,
};
use specmult::gaussian::{gaussian_type, theorem1_1_multiplicity, theorem1_multiplicity, Dichotomy, LabelledSet};
use specmult::multiplicity::format_set;
use specmult::phase::format_rational;
use specmult::profile::{named_profile, AxiomProfile};
use specmult::rankone::{
    build_word_within, spectral_estimate, weak_limit_check_with, CorrelationSeq, RankOneRecipe, DEFAULT_BUDGET,
    DEFAULT_MARGIN,
};
use specmult::riesz::{affinity_trend, convolution_square_tail, golden_angle, write_coefficient_csv, RieszSpec};
use specmult::{Multiplicity, SpectralType};

use record::{Failure, Outcome, RunRecord, EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE};

#[derive(Parser, Serialize)]
#[command(name = "specmult", version, about = "Spectral multiplicities of Gaussian systems, computed symbolically")]
struct Cli {
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    /// Write the JSON run record here instead of stderr.
    #[arg(long, global = true, value_name = "PATH")]
    record: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
enum Command {
    /// M(G) for the rotation-family construction; passes iff it equals M ∪ {∞}.
    Multiplicity(MultiplicityArgs),
    /// M(T) for the Cartesian-product construction; passes iff it equals M ∪ {∞}.
    #[command(name = "theorem1-1")]
    Theorem1_1(SetArgs),
    /// M(G_t) for the flow V ⊕ (−V) at time t.
    Theorem2(TimeArgs),
    /// M of the Gaussian system over the k-th power of a self-similar map.
    Theorem3(Theorem3Args),
    /// M(G_t) for the prime-indexed flow; at integer t checked against the closed formula.
    Theorem4(Theorem4Args),
    /// Smallest integer t with M(G_t) = {1,∞} ∪ target for the prime-indexed flow.
    Theorem4Scan(Theorem4ScanArgs),
    /// One JSON line per time: multiplicity set, exceptional flag, merged classes.
    FlowScan(FlowScanArgs),
    /// Times in (lo, hi] of bounded denominator where components of the flow merge.
    Exceptional(ExceptionalArgs),
    /// M(G(U)) for a spectral type file under a profile.
    Gaussian(GaussianArgs),
    /// Rank-one tower words: correlations, weak limits, spectral density (CSV).
    Rankone(RankoneArgs),
    /// Riesz products: coefficients, convolution tails, rotation affinity (CSV).
    Riesz(RieszArgs),
}

#[derive(Args, Serialize)]
struct SetArgs {
    /// Multiplicities, e.g. `1,3`.
    #[arg(long, value_name = "LIST", required_unless_present = "set_file")]
    set: Option<String>,

    /// File holding the comma-separated multiplicities.
    #[arg(long, value_name = "PATH", conflicts_with = "set")]
    set_file: Option<PathBuf>,

    /// Print the construction trace after the set.
    #[arg(long)]
    explain: bool,
}

#[derive(Args, Serialize)]
struct MultiplicityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    set: SetArgs,

    /// `salem` (mixing) or `chacon` (non-mixing).
    #[arg(long, default_value = "chacon")]
    regime: String,
}

#[derive(Args, Serialize)]
struct TimeArgs {
    /// Positive rational time, e.g. `2` or `3/2`.
    #[arg(long, default_value = "1")]
    t: String,
}

#[derive(Args, Serialize)]
struct Theorem3Args {
    /// Power k; the answer is {3^k, ∞}.
    #[arg(long)]
    k: u32,
}

#[derive(Args, Serialize)]
struct Theorem4Args {
    /// Multiplicity function on primes, e.g. `2=1,3=2`.
    #[arg(long, value_name = "MAP")]
    m: String,

    /// Positive rational time.
    #[arg(long)]
    t: String,
}

#[derive(Args, Serialize)]
struct Theorem4ScanArgs {
    #[arg(long, value_name = "MAP")]
    m: String,

    /// Target multiplicities, e.g. `2,3`.
    #[arg(long, value_name = "LIST")]
    target: String,

    /// Largest candidate time examined.
    #[arg(long, default_value_t = DEFAULT_SCAN_BOUND)]
    bound: u64,
}

#[derive(Args, Serialize)]
struct FlowScanArgs {
    /// `theorem2` or a flow file.
    #[arg(long)]
    flow: String,

    /// Times: comma list of rationals, `a..b` for the integers a to b.
    #[arg(long)]
    times: String,
}

#[derive(Args, Serialize)]
struct ExceptionalArgs {
    /// `theorem2` or a flow file.
    #[arg(long)]
    flow: String,

    /// `lo,hi`; times are taken in (lo, hi].
    #[arg(long)]
    interval: String,

    /// Largest denominator considered.
    #[arg(long, default_value_t = 24)]
    max_den: u64,
}

#[derive(Args, Serialize)]
struct GaussianArgs {
    /// Spectral type file (`[[term]]` records).
    #[arg(long = "type", value_name = "PATH")]
    type_file: PathBuf,

    /// Profile name (`salem`, `chacon`, `self-similar`) or profile file.
    #[arg(long, default_value = "chacon")]
    profile: String,

    /// Print the Fock expansion level by level.
    #[arg(long)]
    explain: bool,
}

#[derive(Args, Serialize)]
struct RankoneArgs {
    /// `classic-chacon` or `two-adic-chacon`.
    #[arg(long, conflicts_with = "recipe")]
    preset: Option<String>,

    /// Recipe file.
    #[arg(long, value_name = "PATH")]
    recipe: Option<PathBuf>,

    /// Construction stage.
    #[arg(long, default_value_t = 10)]
    stage: u32,

    /// Largest lag in the correlation table.
    #[arg(long, default_value_t = 256)]
    max_lag: u64,

    /// Report r at the tower heights instead of the correlation table.
    #[arg(long)]
    weak_limit: bool,

    /// Stages for --weak-limit, `a..b`; defaults to the six stages up to --stage.
    #[arg(long, value_name = "RANGE")]
    stages: Option<String>,

    /// Weak-limit target such as `1/2`. Without it the check is that r settles
    /// (spread over the stages within --tol).
    #[arg(long)]
    target: Option<String>,

    /// Tolerance for the weak-limit check.
    #[arg(long, default_value_t = 0.05)]
    tol: f64,

    /// Emit a Fejér spectral density on this many angles instead.
    #[arg(long, value_name = "N", conflicts_with = "weak_limit")]
    density: Option<usize>,

    /// Largest word length built, in symbols.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Args, Serialize)]
struct RieszArgs {
    /// Use the triadic exemplar (n_k = 3^k, a_k = 1, depth 14).
    #[arg(long, conflicts_with = "spec")]
    default: bool,

    /// Spec file.
    #[arg(long, value_name = "PATH")]
    spec: Option<PathBuf>,

    /// Number of factors used (defaults to the spec depth).
    #[arg(long)]
    depth: Option<usize>,

    /// Rotation for the affinity trend: `golden` or radians.
    #[arg(long, value_name = "Z")]
    affinity_z: Option<String>,

    /// Quadrature grid for the affinity.
    #[arg(long, default_value_t = 1 << 18)]
    grid: usize,

    /// The affinity check passes when the deepest value is below this.
    #[arg(long, default_value_t = 0.1)]
    threshold: f64,

    /// Coefficient table for |n| <= N.
    #[arg(long, value_name = "N")]
    coefficients: Option<i64>,

    /// Σ_{|n|>N} |μ̂(n)|⁴ for this N.
    #[arg(long, value_name = "N")]
    tail: Option<u64>,
}

type Run = Result<Outcome, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn mset(set: &[Option<u64>]) -> BTreeSet<Multiplicity> {
    set.iter().map(|v| v.map_or(Multiplicity::Infinite, Multiplicity::of)).collect()
}

fn with_infinity(m: &BTreeSet<u64>) -> BTreeSet<Multiplicity> {
    mset(&m.iter().map(|&v| Some(v)).chain([None]).collect::<Vec<_>>())
}

fn requested_set(args: &SetArgs) -> Result<BTreeSet<u64>, Failure> {
    let text = match (&args.set, &args.set_file) {
        (Some(s), _) => s.clone(),
        (None, Some(path)) => read(path)?,
        (None, None) => return Err(Failure::Usage("--set or --set-file is required".into())),
    };
    Ok(parse::positive_set(&text)?)
}

fn labelled_outcome(result: LabelledSet, m: &BTreeSet<u64>, explain: bool) -> Outcome {
    let mut output = format_set(&result.set);
    output.push('\n');
    if explain {
        if let Some(label) = &result.label {
            output.push_str(&format!("label: {label}\n"));
        }
        for line in result.notes.iter().chain(&result.trace) {
            output.push_str(line);
            output.push('\n');
        }
    }
    let passed = result.set == with_infinity(m);
    let summary = json!({ "set": format_set(&result.set), "expected": format_set(&with_infinity(m)) });
    Outcome::new(output, passed, summary)
}

fn cmd_multiplicity(args: &MultiplicityArgs) -> Run {
    let m = requested_set(&args.set)?;
    let regime: Dichotomy = args.regime.parse().map_err(|e: specmult::Error| Failure::Usage(e.to_string()))?;
    Ok(labelled_outcome(theorem1_multiplicity(&m, regime)?, &m, args.set.explain))
}

fn cmd_theorem1_1(args: &SetArgs) -> Run {
    let m = requested_set(args)?;
    Ok(labelled_outcome(theorem1_1_multiplicity(&m)?, &m, args.explain))
}

fn set_outcome(set: &BTreeSet<Multiplicity>, passed: bool, extra: serde_json::Value) -> Outcome {
    let mut summary = json!({ "set": format_set(set) });
    if let (Some(s), Some(e)) = (summary.as_object_mut(), extra.as_object()) {
        s.extend(e.clone());
    }
    Outcome::new(format!("{}\n", format_set(set)), passed, summary)
}

fn cmd_theorem2(args: &TimeArgs) -> Run {
    let t = parse::rational(&args.t)?;
    let set = gaussian_time_t_multiplicity(&theorem2_flow(), &t)?;
    Ok(set_outcome(&set, true, json!({})))
}

fn cmd_theorem3(args: &Theorem3Args) -> Run {
    let set = theorem3_multiplicity(args.k)?;
    let expected = 3u64
        .checked_pow(args.k)
        .map(|v| mset(&[Some(v), None]));
    Ok(set_outcome(&set, expected.as_ref() == Some(&set), json!({})))
}

fn cmd_theorem4(args: &Theorem4Args) -> Run {
    let m = parse::prime_map(&args.m)?;
    let t = parse::rational(&args.t)?;
    let set = gaussian_time_t_multiplicity(&theorem4_flow(&m)?, &t)?;
    let formula = t.is_integer().then(|| t.to_integer()).and_then(|n| u64::try_from(n).ok()).map(|n| theorem4_formula(&m, n));
    let passed = formula.as_ref().is_none_or(|f| f == &set);
    let extra = json!({ "formula": formula.as_ref().map(format_set) });
    Ok(set_outcome(&set, passed, extra))
}

fn cmd_theorem4_scan(args: &Theorem4ScanArgs) -> Run {
    let m = parse::prime_map(&args.m)?;
    let target = parse::positive_set(&args.target)?;
    let found = theorem4_scan(&theorem4_flow(&m)?, &target, args.bound)?;
    let output = match found {
        Some(t) => format!("{t}\n"),
        None => "none\n".to_string(),
    };
    Ok(Outcome::new(output, found.is_some(), json!({ "t": found })))
}

fn load_flow(name: &str) -> Result<FlowSpec, Failure> {
    match name {
        "theorem2" => Ok(theorem2_flow()),
        path => Ok(FlowSpec::from_toml(&read(Path::new(path))?)?),
    }
}

fn cmd_flow_scan(args: &FlowScanArgs) -> Run {
    let flow = load_flow(&args.flow)?;
    let times = parse::times(&args.times)?;
    let records = scan_times(&flow, &times)?;
    let mut output = String::new();
    for r in &records {
        output.push_str(&serde_json::to_string(r).expect("scan records serialize"));
        output.push('\n');
    }
    let exceptional = records.iter().filter(|r| r.exceptional).count();
    Ok(Outcome::new(output, true, json!({ "times": records.len(), "exceptional": exceptional })))
}

fn cmd_exceptional(args: &ExceptionalArgs) -> Run {
    let flow = load_flow(&args.flow)?;
    let (lo, hi) = parse::interval(&args.interval)?;
    let times: Vec<String> = exceptional_times(&flow, &lo, &hi, args.max_den)?.iter().map(format_rational).collect();
    let output = format!("{}\n", times.join(", "));
    Ok(Outcome::new(output, true, json!({ "count": times.len() })))
}

fn load_profile(name: &str) -> Result<AxiomProfile, Failure> {
    if Path::new(name).is_file() {
        return Ok(AxiomProfile::from_toml(&read(Path::new(name))?)?);
    }
    named_profile(name).map_err(|e| Failure::Usage(format!("{e} (not a profile name or file)")))
}

fn cmd_gaussian(args: &GaussianArgs) -> Run {
    let profile = load_profile(&args.profile)?;
    let u = SpectralType::from_toml(&read(&args.type_file)?, &profile)?;
    let fock = gaussian_type(&u, &profile)?;
    let set = specmult::gaussian::gaussian_multiplicity_set(&u, &profile)?;
    let mut output = format!("{}\n", format_set(&set));
    if args.explain {
        for line in &fock.trace {
            output.push_str(line);
            output.push('\n');
        }
    }
    let summary = json!({ "set": format_set(&set), "levels": fock.level_types.len(), "profile": profile.name() });
    Ok(Outcome::new(output, true, summary))
}

fn csv_string(write: impl FnOnce(&mut Vec<u8>) -> specmult::Result<()>) -> Result<String, Failure> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    String::from_utf8(buf).map_err(|e| Failure::Usage(e.to_string()))
}

fn cmd_rankone(args: &RankoneArgs) -> Run {
    let recipe = match (&args.preset, &args.recipe) {
        (_, Some(path)) => RankOneRecipe::from_toml(&read(path)?)?,
        (Some(name), None) => RankOneRecipe::preset(name)?,
        (None, None) => RankOneRecipe::classic_chacon(),
    };
    if args.weak_limit {
        let stages = match &args.stages {
            Some(text) => parse::stage_range(text)?,
            None => (args.stage.saturating_sub(5).max(1)..=args.stage).collect(),
        };
        let target = match &args.target {
            Some(text) => Some(parse_small_ratio(text)?),
            None => None,
        };
        let report = weak_limit_check_with(
            &recipe,
            &stages,
            target.unwrap_or(Ratio::new(1, 2)),
            args.tol,
            DEFAULT_MARGIN,
            args.budget,
        )?;
        let passed = if target.is_some() { report.pass } else { report.spread <= args.tol };
        let output = csv_string(|b| report.write_csv(b))?;
        let summary = json!({
            "recipe": report.recipe,
            "evaluation_stage": report.evaluation_stage,
            "check": if target.is_some() { "final deviation within tol" } else { "spread within tol" },
            "spread": report.spread,
            "decreasing": report.decreasing,
            "final_deviation": report.rows.last().map(|r| r.deviation),
        });
        return Ok(Outcome::new(output, passed, summary));
    }
    let lags = match args.density {
        Some(res) => args.max_lag.max(res as u64),
        None => args.max_lag,
    };
    let word = build_word_within(&recipe, args.stage, args.budget)?;
    let seq = CorrelationSeq::from_word(&word, lags)?;
    match args.density {
        Some(res) => {
            let table = spectral_estimate(&seq, res)?;
            let mass = table.mass();
            let output = csv_string(|b| table.write_csv(b))?;
            Ok(Outcome::new(output, (mass - 1.0).abs() < 1e-6, json!({ "word_length": word.len(), "mass": mass })))
        }
        None => {
            let output = csv_string(|b| seq.write_csv(b))?;
            Ok(Outcome::new(output, true, json!({ "word_length": word.len(), "lags": seq.values.len() })))
        }
    }
}

fn parse_small_ratio(text: &str) -> Result<Ratio<u64>, Failure> {
    let r = parse::rational(text)?;
    let n = u64::try_from(r.numer().clone()).map_err(|_| Failure::Usage(format!("target `{text}` must be in [0,1]")))?;
    let d = u64::try_from(r.denom().clone()).map_err(|_| Failure::Usage(format!("target `{text}` is too large")))?;
    if n > d {
        return Err(Failure::Usage(format!("target `{text}` must be in [0,1]")));
    }
    Ok(Ratio::new(n, d))
}

fn cmd_riesz(args: &RieszArgs) -> Run {
    let spec = match (&args.spec, args.default) {
        (Some(path), _) => RieszSpec::from_toml(&read(path)?)?,
        (None, _) => RieszSpec::default_exemplar(),
    };
    let depth = args.depth.unwrap_or(spec.depth());
    if depth > spec.depth() {
        return Err(Failure::Usage(format!("--depth {depth} exceeds the spec depth {}", spec.depth())));
    }
    if let Some(n) = args.coefficients {
        let output = csv_string(|b| write_coefficient_csv(&spec, n, b))?;
        return Ok(Outcome::new(output, true, json!({ "max_n": n })));
    }
    if let Some(n) = args.tail {
        let tail = convolution_square_tail(&spec, n)?;
        return Ok(Outcome::new(format!("{tail}\n"), true, json!({ "tail": tail, "n": n })));
    }
    let z = match args.affinity_z.as_deref() {
        None | Some("golden") => golden_angle(),
        Some(text) => text.parse::<f64>().map_err(|_| Failure::Usage(format!("`{text}` is not an angle")))?,
    };
    let first = depth.clamp(1, 4);
    let depths: Vec<usize> = (first..=depth).collect();
    let trend = affinity_trend(&spec, z, &depths, args.grid)?;
    let output = csv_string(|b| trend.write_csv(b))?;
    let final_value = trend.final_value();
    let summary = json!({
        "z": z,
        "grid": args.grid,
        "final": final_value,
        "threshold": args.threshold,
        "monotone": trend.monotone,
    });
    Ok(Outcome::new(output, final_value < args.threshold, summary))
}

fn run(command: &Command) -> Run {
    match command {
        Command::Multiplicity(a) => cmd_multiplicity(a),
        Command::Theorem1_1(a) => cmd_theorem1_1(a),
        Command::Theorem2(a) => cmd_theorem2(a),
        Command::Theorem3(a) => cmd_theorem3(a),
        Command::Theorem4(a) => cmd_theorem4(a),
        Command::Theorem4Scan(a) => cmd_theorem4_scan(a),
        Command::FlowScan(a) => cmd_flow_scan(a),
        Command::Exceptional(a) => cmd_exceptional(a),
        Command::Gaussian(a) => cmd_gaussian(a),
        Command::Rankone(a) => cmd_rankone(a),
        Command::Riesz(a) => cmd_riesz(a),
    }
}

fn command_name(config: &serde_json::Value) -> String {
    config["command"]["name"].as_str().unwrap_or("unknown").to_string()
}

fn emit(cli: &Cli, text: &str) -> Result<(), String> {
    match &cli.output {
        Some(path) => fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    }
}

fn write_record(cli: &Cli, record: &RunRecord) {
    let text = serde_json::to_string(record).expect("run records serialize");
    match &cli.record {
        Some(path) => {
            if let Err(e) = fs::write(path, format!("{text}\n")) {
                eprintln!("specmult: cannot write record {}: {e}", path.display());
            }
        }
        None => eprintln!("{text}"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { EXIT_OK as u8 });
        }
    };
    let config = serde_json::to_value(&cli).expect("configs serialize");
    let (code, result, error) = match run(&cli.command) {
        Ok(outcome) => match emit(&cli, &outcome.output) {
            Ok(()) => {
                let code = if outcome.passed { EXIT_OK } else { EXIT_CHECK_FAILED };
                (code, json!({ "passed": outcome.passed, "summary": outcome.summary }), None)
            }
            Err(e) => (EXIT_USAGE, serde_json::Value::Null, Some(e)),
        },
        Err(failure) => {
            eprintln!("specmult: {failure}");
            (failure.exit_code(), serde_json::Value::Null, Some(failure.to_string()))
        }
    };
    write_record(&cli, &RunRecord::new(command_name(&config), config, code, result, error));
    ExitCode::from(code as u8)
}
