//! Command line front end.
//!
//! Four subcommands cover the workflow end to end: `analyze` turns one
//! square table into a JSON report, `viz` renders the per-cut picture as
//! SVG, `simulate` estimates interval coverage over a grid of latent
//! scenarios, and `truevalue` prints the population measure for one
//! scenario. stdout carries machine output only; diagnostics go to stderr.
//!
//! Exit codes: 0 success, 2 invalid input or options, 3 measure undefined
//! or interval unavailable for the given table, 4 output I/O failure.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mh_metrics::error::MhError;
use mh_metrics::inference::{confidence_interval_for, resolve_estimator, EstimatorChoice, DEFAULT_ALPHA};
use mh_metrics::measures::measure_report;
use mh_metrics::report::{build_analysis_report, build_simulate_doc, InputKind};
use mh_metrics::simulation::{run_coverage, true_measure, SimulationScenario, DEFAULT_CUTOFFS, DEFAULT_RHO};
use mh_metrics::table::{marginal_summary, parse_prob_table, parse_table, to_probabilities, ProbTable};
use mh_metrics::viz::{build_viz_spec, render_svg, VizStyle};

/// Fallback seed when neither `--seed` nor `MH_METRICS_SEED` is given.
const DEFAULT_SEED: u64 = 0x6d68_6d65_7472_6963;

#[derive(Parser)]
#[command(
    name = "mh-metrics",
    version,
    about = "Measure, test, and visualize departure from marginal homogeneity in square ordinal tables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute measures and a confidence interval for one table, as JSON
    Analyze(AnalyzeArgs),
    /// Render the per-cut summary of one table as an SVG panel grid
    Viz(VizArgs),
    /// Estimate confidence interval coverage over a grid of scenarios
    Simulate(SimulateArgs),
    /// Print the population measure for one latent scenario
    Truevalue(TruevalueArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// CSV file holding a square table of counts (or probabilities with --probs)
    table: PathBuf,

    /// Treat the input as probabilities; skips estimation and inference
    #[arg(long)]
    probs: bool,

    /// Extra power divergence order to report (repeatable)
    #[arg(long = "lambda", value_name = "ORDER")]
    lambda: Vec<f64>,

    /// Confidence level for the interval
    #[arg(long, default_value_t = 0.95, value_name = "LEVEL")]
    ci: f64,

    /// How to turn counts into probabilities
    #[arg(long, value_enum, default_value_t = EstimatorArg::Auto)]
    estimator: EstimatorArg,

    /// Smoothing weight, only with --estimator bayes
    #[arg(long, value_name = "ALPHA")]
    alpha: Option<f64>,

    /// Clamp interval endpoints into [0, 1]
    #[arg(long)]
    clip_ci: bool,

    /// Write the JSON report here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VizArgs {
    /// CSV file holding a square table of counts (or probabilities with --probs)
    table: PathBuf,

    /// Treat the input as probabilities
    #[arg(long)]
    probs: bool,

    /// Output SVG path
    #[arg(short = 'o', long = "out", value_name = "FILE")]
    out: PathBuf,

    /// How to turn counts into probabilities
    #[arg(long, value_enum, default_value_t = EstimatorArg::Auto)]
    estimator: EstimatorArg,

    /// Smoothing weight, only with --estimator bayes
    #[arg(long, value_name = "ALPHA")]
    alpha: Option<f64>,

    /// JSON file overriding the default style
    #[arg(long, value_name = "FILE")]
    style: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Shift values: comma list (0,0.5,1) or inclusive range (0:1:0.25)
    #[arg(long, value_name = "LIST|A:B:STEP", value_parser = parse_d_values, required = true)]
    d: Vec<DValues>,

    /// Sample sizes, comma separated
    #[arg(long, value_name = "LIST", value_parser = parse_n_values, required = true)]
    n: Vec<NValues>,

    /// Latent correlation
    #[arg(long, default_value_t = DEFAULT_RHO)]
    rho: f64,

    /// Shared cut points, comma separated and strictly increasing
    #[arg(long, value_name = "LIST", value_parser = parse_cutoffs)]
    cutoffs: Option<Cutoffs>,

    /// Trials per scenario
    #[arg(long, default_value_t = 10_000)]
    trials: u64,

    /// Confidence level the intervals are built at
    #[arg(long, default_value_t = 0.95, value_name = "LEVEL")]
    ci: f64,

    /// RNG seed; falls back to MH_METRICS_SEED, then a fixed default
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads; 0 uses the default pool
    #[arg(long, default_value_t = 0)]
    workers: usize,

    /// Write the JSON document here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TruevalueArgs {
    /// Shift of the second latent variable
    #[arg(long)]
    d: f64,

    /// Latent correlation
    #[arg(long, default_value_t = DEFAULT_RHO)]
    rho: f64,

    /// Shared cut points, comma separated and strictly increasing
    #[arg(long, value_name = "LIST", value_parser = parse_cutoffs)]
    cutoffs: Option<Cutoffs>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum EstimatorArg {
    /// Sample proportions, smoothed only when a cut would sit on the boundary
    Auto,
    /// Sample proportions, never smoothed
    Sample,
    /// Dirichlet smoothed proportions
    Bayes,
}

/// Parsed `--d` argument. Wrapped so clap's value parser has a named type.
#[derive(Clone)]
struct DValues(Vec<f64>);

#[derive(Clone)]
struct NValues(Vec<u64>);

#[derive(Clone)]
struct Cutoffs(Vec<f64>);

/// Errors carry the exit code they should terminate with.
struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }
}

impl From<MhError> for CliError {
    fn from(e: MhError) -> Self {
        let code = match e {
            MhError::MeasureUndefined { .. }
            | MhError::BoundaryGc { .. }
            | MhError::DegenerateAtMH { .. } => 3,
            _ => 2,
        };
        CliError::new(code, e.to_string())
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Viz(args) => cmd_viz(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Truevalue(args) => cmd_truevalue(args),
    };
    match result {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {}", e.message);
            std::process::exit(e.code);
        }
    }
}

/// Resolves the estimator flags into a library choice, rejecting
/// combinations that cannot apply to the given input kind.
fn estimator_choice(
    estimator: EstimatorArg,
    alpha: Option<f64>,
    probs: bool,
) -> Result<Option<EstimatorChoice>, CliError> {
    if probs {
        if estimator != EstimatorArg::Auto {
            return Err(CliError::new(
                2,
                "--estimator applies to count input; probability tables are used as given",
            ));
        }
        if alpha.is_some() {
            return Err(CliError::new(
                2,
                "--alpha applies to count input; probability tables are used as given",
            ));
        }
        return Ok(None);
    }
    match estimator {
        EstimatorArg::Auto => {
            if alpha.is_some() {
                return Err(CliError::new(2, "--alpha requires --estimator bayes"));
            }
            Ok(Some(EstimatorChoice::Auto))
        }
        EstimatorArg::Sample => {
            if alpha.is_some() {
                return Err(CliError::new(2, "--alpha requires --estimator bayes"));
            }
            Ok(Some(EstimatorChoice::Sample))
        }
        EstimatorArg::Bayes => Ok(Some(EstimatorChoice::Bayes {
            alpha: alpha.unwrap_or(DEFAULT_ALPHA),
        })),
    }
}

fn read_input(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::new(2, format!("cannot read {}: {e}", path.display())))
}

/// Writes `text` to `out`, or to stdout when `out` is `None`. File write
/// failures are output errors, not input errors.
fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::new(4, format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{}", text.trim_end_matches('\n'));
            Ok(())
        }
    }
}

fn to_pretty_json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::new(4, format!("cannot serialize report: {e}")))?;
    text.push('\n');
    Ok(text)
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    let choice = estimator_choice(args.estimator, args.alpha, args.probs)?;
    let raw = read_input(&args.table)?;

    let report = if args.probs {
        let p = parse_prob_table(&raw)?;
        let s = marginal_summary(&p);
        let measures = measure_report(&s, &args.lambda)?;
        build_analysis_report(&s, &measures, None, None, InputKind::Probabilities)
    } else {
        let t = parse_table(&raw)?;
        let p = resolve_estimator(&t, choice.expect("counts input resolves to a choice"))?;
        let s = marginal_summary(&p);
        let measures = measure_report(&s, &args.lambda)?;
        let mut inference = confidence_interval_for(&p, t.n(), args.ci)?;
        if args.clip_ci {
            inference.ci_low = inference.ci_low.map(|v| v.max(0.0));
            inference.ci_high = inference.ci_high.map(|v| v.min(1.0));
        }
        build_analysis_report(&s, &measures, Some(&inference), Some(t.n()), InputKind::Counts)
    };

    let text = to_pretty_json(&report)?;
    emit(&text, args.out.as_ref())
}

/// Probability table to draw: estimator resolution, except that a table
/// with no off-diagonal mass at all is rendered rather than rejected. Every
/// cut is undefined there, which the panel grid shows as "n/a".
fn viz_prob_table(
    args: &VizArgs,
    raw: &str,
    choice: Option<EstimatorChoice>,
) -> Result<ProbTable, CliError> {
    if args.probs {
        return Ok(parse_prob_table(raw)?);
    }
    let t = parse_table(raw)?;
    let choice = choice.expect("counts input resolves to a choice");
    match resolve_estimator(&t, choice) {
        Ok(p) => Ok(p),
        Err(MhError::MeasureUndefined { level: None }) => Ok(to_probabilities(&t)),
        Err(e) => Err(e.into()),
    }
}

fn cmd_viz(args: VizArgs) -> Result<(), CliError> {
    let choice = estimator_choice(args.estimator, args.alpha, args.probs)?;
    let raw = read_input(&args.table)?;
    let p = viz_prob_table(&args, &raw, choice)?;

    let style = match &args.style {
        Some(path) => {
            let text = read_input(path)?;
            serde_json::from_str::<VizStyle>(&text)
                .map_err(|e| CliError::new(2, format!("bad style {}: {e}", path.display())))?
        }
        None => VizStyle::default(),
    };

    let s = marginal_summary(&p);
    let subs = mh_metrics::measures::sub_measures(&s);
    let spec = build_viz_spec(&s, &subs, style)?;
    let svg = render_svg(&spec)?;
    std::fs::write(&args.out, svg)
        .map_err(|e| CliError::new(4, format!("cannot write {}: {e}", args.out.display())))
}

/// Seed precedence: flag, then MH_METRICS_SEED, then a fixed default. A
/// set-but-unparsable variable is an error rather than a silent fallback.
fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("MH_METRICS_SEED") {
        Ok(text) => text
            .trim()
            .parse::<u64>()
            .map_err(|_| CliError::new(2, format!("MH_METRICS_SEED is not a u64: {text:?}"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let seed = resolve_seed(args.seed)?;
    let cutoffs = match &args.cutoffs {
        Some(c) => c.0.clone(),
        None => DEFAULT_CUTOFFS.to_vec(),
    };

    // clap gives one parsed group per flag occurrence; flatten in order.
    let ds: Vec<f64> = args.d.iter().flat_map(|g| g.0.iter().copied()).collect();
    let ns: Vec<u64> = args.n.iter().flat_map(|g| g.0.iter().copied()).collect();

    let mut rows = Vec::with_capacity(ds.len() * ns.len());
    for &d in &ds {
        for &n in &ns {
            let scenario = SimulationScenario {
                d,
                n,
                rho: args.rho,
                cutoffs: cutoffs.clone(),
            };
            rows.push(run_coverage(&scenario, args.trials, args.ci, seed, args.workers)?);
        }
    }

    let doc = build_simulate_doc(args.rho, &cutoffs, args.trials, seed, args.ci, &rows);
    let text = to_pretty_json(&doc)?;
    emit(&text, args.out.as_ref())
}

fn cmd_truevalue(args: TruevalueArgs) -> Result<(), CliError> {
    let cutoffs = match &args.cutoffs {
        Some(c) => c.0.clone(),
        None => DEFAULT_CUTOFFS.to_vec(),
    };
    let scenario = SimulationScenario {
        d: args.d,
        n: 1,
        rho: args.rho,
        cutoffs,
    };
    let value = true_measure(&scenario)?;
    println!("{value:.10}");
    Ok(())
}

fn parse_f64_list(s: &str, what: &str) -> Result<Vec<f64>, String> {
    let mut values = Vec::new();
    for token in s.split(',') {
        let token = token.trim();
        if token.is_empty() {
            return Err(format!("empty entry in {what} list"));
        }
        let v: f64 = token
            .parse()
            .map_err(|_| format!("bad {what} value: {token:?}"))?;
        values.push(v);
    }
    if values.is_empty() {
        return Err(format!("{what} list is empty"));
    }
    Ok(values)
}

/// `--d` accepts a comma list or an inclusive `a:b:step` range. The range
/// ends at the last point not past `b`; `b` itself is included when `step`
/// divides the span exactly (up to rounding).
fn parse_d_values(s: &str) -> Result<DValues, String> {
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("range must be a:b:step, got {s:?}"));
        }
        let a: f64 = parts[0].trim().parse().map_err(|_| format!("bad range start: {:?}", parts[0]))?;
        let b: f64 = parts[1].trim().parse().map_err(|_| format!("bad range end: {:?}", parts[1]))?;
        let step: f64 = parts[2].trim().parse().map_err(|_| format!("bad range step: {:?}", parts[2]))?;
        if !a.is_finite() || !b.is_finite() || !step.is_finite() {
            return Err(format!("range bounds must be finite, got {s:?}"));
        }
        if step <= 0.0 {
            return Err(format!("range step must be positive, got {step}"));
        }
        if b < a {
            return Err(format!("range end {b} is below start {a}"));
        }
        // Index stepping keeps points exact where a + k*step is; the slack
        // admits b itself when (b - a)/step rounds down by one ulp.
        let count = ((b - a) / step + 1e-9).floor() as usize;
        let values = (0..=count).map(|k| a + k as f64 * step).collect();
        return Ok(DValues(values));
    }
    Ok(DValues(parse_f64_list(s, "d")?))
}

fn parse_n_values(s: &str) -> Result<NValues, String> {
    let mut values = Vec::new();
    for token in s.split(',') {
        let token = token.trim();
        if token.is_empty() {
            return Err("empty entry in n list".to_string());
        }
        let v: u64 = token
            .parse()
            .map_err(|_| format!("bad n value: {token:?}"))?;
        values.push(v);
    }
    if values.is_empty() {
        return Err("n list is empty".to_string());
    }
    Ok(NValues(values))
}

fn parse_cutoffs(s: &str) -> Result<Cutoffs, String> {
    Ok(Cutoffs(parse_f64_list(s, "cutoff")?))
}
