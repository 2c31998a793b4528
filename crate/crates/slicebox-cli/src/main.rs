//! slicebox: sample one-dimensional densities with unit-interval slice
//! samplers, compare against stepping-out, and summarize stored runs.

mod scenario;

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use slicebox::diagnostics::{
    reference_cdf, GridSpec, ReferenceCdf, ReportOptions, RunReport, QUARTIC_GRID,
};
use slicebox::rng::RngStream;
use slicebox::samplers::{run_chain, DrawRecord, SamplerConfig, SamplerError};
use slicebox::targets::{LogDensity, Support, TargetError};

use scenario::{builtin_names, builtin_scenario, ScenarioSpec};

/// Errors that are the caller's fault: reported with a usage hint, exit 2.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

#[derive(Parser)]
#[command(
    name = "slicebox",
    version,
    about = "One-dimensional slice sampling toolkit"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one sampler on a target and write the draws
    Sample(SampleArgs),
    /// Run a benchmark scenario's samplers side by side
    Compare(CompareArgs),
    /// Recompute a run report from a stored draw file
    Diagnose(DiagnoseArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodKind {
    Unbounded,
    Positive,
    Bounded,
    Stepout,
}

impl MethodKind {
    fn parse(name: &str) -> Result<Self> {
        match name {
            "unbounded" => Ok(MethodKind::Unbounded),
            "positive" => Ok(MethodKind::Positive),
            "bounded" => Ok(MethodKind::Bounded),
            "stepout" => Ok(MethodKind::Stepout),
            other => Err(usage(format!(
                "unknown method `{other}`; expected unbounded, positive, bounded, or stepout"
            ))),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            MethodKind::Unbounded => "unbounded",
            MethodKind::Positive => "positive",
            MethodKind::Bounded => "bounded",
            MethodKind::Stepout => "stepout",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct SampleArgs {
    /// Builtin target name or `expr:<density text>`
    #[arg(long)]
    target: String,
    #[arg(long, value_enum)]
    method: MethodKind,
    /// Chain start
    #[arg(long, default_value_t = 1.0)]
    x0: f64,
    /// Post-burn-in draws
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long = "burn-in", default_value_t = 100)]
    burn_in: usize,
    /// Keep every k-th draw in the output
    #[arg(long, default_value_t = 1)]
    thin: usize,
    #[arg(long, env = "SLICEBOX_SEED", default_value_t = 0)]
    seed: u64,
    /// Sigmoid scale (unbounded method only)
    #[arg(long)]
    a: Option<f64>,
    /// Initial interval width (stepout method only)
    #[arg(long)]
    width: Option<f64>,
    /// Fixed interval `lo,hi` (bounded method only)
    #[arg(long)]
    bounds: Option<String>,
    /// Draw output path (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
    /// Also write the run report as JSON to this path
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Shipped scenario name
    #[arg(long)]
    scenario: Option<String>,
    /// Path to a scenario file
    #[arg(long = "scenario-file")]
    scenario_file: Option<PathBuf>,
    /// Override the scenario's seed
    #[arg(long, env = "SLICEBOX_SEED")]
    seed: Option<u64>,
}

#[derive(Args)]
struct DiagnoseArgs {
    /// CSV draw file produced by `sample`
    #[arg(long = "in")]
    input: PathBuf,
    /// Builtin target whose reference CDF the draws are KS-tested against
    #[arg(long)]
    reference: Option<String>,
    #[arg(long, default_value_t = 50)]
    bins: usize,
    /// Mode-occupancy threshold
    #[arg(long)]
    threshold: Option<f64>,
    /// Also write the recomputed report as JSON to this path
    #[arg(long)]
    report: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Sample(args) => cmd_sample(args),
        Cmd::Compare(args) => cmd_compare(args),
        Cmd::Diagnose(args) => cmd_diagnose(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            eprintln!("run `slicebox --help` for usage");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Build the target, applying the positive-support restriction that the
/// positive method implies for real-line targets.
fn build_target(spec: &str, method: MethodKind) -> Result<LogDensity> {
    let density = if let Some(text) = spec.strip_prefix("expr:") {
        let support = if method == MethodKind::Positive {
            Support::PositiveReals
        } else {
            Support::RealLine
        };
        LogDensity::from_expression(text, support)
            .map_err(|e| usage(format!("invalid density expression: {e}")))?
    } else {
        match LogDensity::builtin(spec) {
            Ok(d) => d,
            Err(e @ TargetError::UnknownBuiltin { .. }) => return Err(usage(e.to_string())),
            Err(e) => return Err(e.into()),
        }
    };
    Ok(match (method, density.support()) {
        (MethodKind::Positive, Support::RealLine) => density.restrict_positive(),
        _ => density,
    })
}

/// Build the sampler configuration, rejecting parameters that do not belong
/// to the chosen method.
fn build_config(
    method: MethodKind,
    a: Option<f64>,
    width: Option<f64>,
    bounds: Option<(f64, f64)>,
) -> Result<SamplerConfig> {
    let misfit = |flag: &str| {
        usage(format!(
            "--{flag} does not apply to --method {}",
            method.name()
        ))
    };
    let cfg = match method {
        MethodKind::Unbounded => {
            if width.is_some() {
                return Err(misfit("width"));
            }
            if bounds.is_some() {
                return Err(misfit("bounds"));
            }
            SamplerConfig::unbounded(a.unwrap_or(slicebox::samplers::DEFAULT_A_SCALE))
        }
        MethodKind::Positive => {
            if a.is_some() {
                return Err(misfit("a"));
            }
            if width.is_some() {
                return Err(misfit("width"));
            }
            if bounds.is_some() {
                return Err(misfit("bounds"));
            }
            Ok(SamplerConfig::positive())
        }
        MethodKind::Bounded => {
            if a.is_some() {
                return Err(misfit("a"));
            }
            if width.is_some() {
                return Err(misfit("width"));
            }
            let (lo, hi) =
                bounds.ok_or_else(|| usage("--method bounded requires --bounds lo,hi"))?;
            SamplerConfig::bounded(lo, hi)
        }
        MethodKind::Stepout => {
            if a.is_some() {
                return Err(misfit("a"));
            }
            if bounds.is_some() {
                return Err(misfit("bounds"));
            }
            SamplerConfig::stepping_out(width.unwrap_or(slicebox::samplers::DEFAULT_WIDTH))
        }
    };
    cfg.map_err(|e| usage(e.to_string()))
}

fn parse_bounds(text: &str) -> Result<(f64, f64)> {
    let bad = || usage(format!("--bounds expects `lo,hi`, got `{text}`"));
    let (lo, hi) = text.split_once(',').ok_or_else(bad)?;
    Ok((
        lo.trim().parse().map_err(|_| bad())?,
        hi.trim().parse().map_err(|_| bad())?,
    ))
}

/// Reference CDF for a builtin target name (usage error otherwise).
fn reference_by_name(name: &str, grid: &GridSpec) -> Result<ReferenceCdf> {
    let mut target = match LogDensity::builtin(name) {
        Ok(d) => d,
        Err(e) => return Err(usage(format!("--reference: {e}"))),
    };
    Ok(reference_cdf(&mut target, grid)?)
}

fn map_sampler_error(e: SamplerError) -> anyhow::Error {
    // Configuration mistakes surface as usage errors even when the library
    // only detects them at the first draw.
    match e {
        SamplerError::Config(msg) => usage(msg),
        SamplerError::AtDraw { source, t } => match *source {
            SamplerError::Config(msg) => usage(msg),
            inner => anyhow!(SamplerError::AtDraw {
                t,
                source: Box::new(inner),
            }),
        },
        other => anyhow!(other),
    }
}

fn cmd_sample(args: SampleArgs) -> Result<u8> {
    if args.thin == 0 {
        return Err(usage("--thin must be at least 1"));
    }
    if args.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let bounds = args.bounds.as_deref().map(parse_bounds).transpose()?;
    let mut target = build_target(&args.target, args.method)?;
    let cfg = build_config(args.method, args.a, args.width, bounds)?;
    let records = run_chain(
        &mut target,
        &cfg,
        args.x0,
        args.n,
        args.burn_in,
        RngStream::new(args.seed),
    )
    .map_err(map_sampler_error)?;

    match &args.out {
        Some(path) => {
            let file = fs::File::create(path)
                .with_context(|| format!("cannot create {}", path.display()))?;
            write_draws(BufWriter::new(file), &records, args.thin, args.format)?;
        }
        None => {
            let stdout = std::io::stdout();
            write_draws(stdout.lock(), &records, args.thin, args.format)?;
        }
    }

    let report = slicebox::summarize(&records, &ReportOptions::default())?;
    eprint!("{report}");
    if let Some(path) = &args.report {
        fs::write(path, report.to_json())
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(0)
}

fn write_draws(
    mut w: impl Write,
    records: &[DrawRecord],
    thin: usize,
    format: OutFormat,
) -> Result<()> {
    match format {
        OutFormat::Csv => {
            writeln!(w, "t,x,n_evals,n_shrinks")?;
            for (i, r) in records.iter().enumerate().step_by(thin) {
                writeln!(w, "{},{},{},{}", i + 1, r.x, r.n_evals, r.n_shrinks)?;
            }
        }
        OutFormat::Json => {
            writeln!(w, "[")?;
            let mut first = true;
            for (i, r) in records.iter().enumerate().step_by(thin) {
                if !first {
                    writeln!(w, ",")?;
                }
                first = false;
                write!(
                    w,
                    "  {{\"t\": {}, \"x\": {}, \"n_evals\": {}, \"n_shrinks\": {}}}",
                    i + 1,
                    r.x,
                    r.n_evals,
                    r.n_shrinks
                )?;
            }
            writeln!(w, "\n]")?;
        }
    }
    Ok(())
}

struct MethodSummary {
    method: String,
    report: RunReport,
    first_evals: u32,
}

fn cmd_compare(args: CompareArgs) -> Result<u8> {
    let text: String = match (&args.scenario, &args.scenario_file) {
        (Some(name), None) => builtin_scenario(name)
            .ok_or_else(|| {
                usage(format!(
                    "unknown scenario `{name}`; available: {}",
                    builtin_names()
                ))
            })?
            .to_string(),
        (None, Some(path)) => fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?,
        _ => return Err(usage("pass exactly one of --scenario or --scenario-file")),
    };
    let mut spec = ScenarioSpec::parse(&text).map_err(|e| usage(e.to_string()))?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }

    let reference = spec
        .reference
        .as_deref()
        .map(|name| reference_by_name(name, &QUARTIC_GRID))
        .transpose()?;

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    writeln!(
        out,
        "scenario {}: target {}, n = {}, burn_in = {}, seed = {}",
        spec.name, spec.target, spec.n, spec.burn_in, spec.seed
    )?;

    let mut summaries = Vec::new();
    for (chain_id, method_name) in spec.methods.iter().enumerate() {
        let method = MethodKind::parse(method_name)?;
        let mut target = build_target(&spec.target, method)?;
        let cfg = build_config(
            method,
            matches!(method, MethodKind::Unbounded).then_some(spec.a),
            matches!(method, MethodKind::Stepout).then_some(spec.width),
            matches!(method, MethodKind::Bounded)
                .then_some(spec.bounds)
                .flatten(),
        )?;
        // Run burn-in inside the chain but keep the first record: the
        // cold-start cost of the very first draw is part of the comparison.
        let rng = RngStream::derive(spec.seed, chain_id as u64);
        let all = run_chain(&mut target, &cfg, spec.x0, spec.n + spec.burn_in, 0, rng)
            .map_err(map_sampler_error)?;
        let first_evals = all[0].n_evals;
        let kept = &all[spec.burn_in..];
        let opts = ReportOptions {
            bins: spec.bins,
            threshold: spec.threshold,
            reference: reference.clone(),
            ks_thin: slicebox::diagnostics::KS_THIN,
        };
        let report = slicebox::summarize(kept, &opts)?;
        writeln!(out, "\n[{}]", method.name())?;
        write!(out, "{report}")?;
        summaries.push(MethodSummary {
            method: method.name().to_string(),
            report,
            first_evals,
        });
    }

    writeln!(out)?;
    writeln!(
        out,
        "{:<12} {:>13} {:>11} {:>12} {:>15} {:>9} {:>6}",
        "method", "mean_shrinks", "mean_evals", "first_evals", "mode_occupancy", "ess", "ks"
    )?;
    for s in &summaries {
        let occ = s
            .report
            .mode_occupancy
            .map_or("-".to_string(), |v| format!("{v:.4}"));
        let ks = match s.report.ks_pass {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "-",
        };
        writeln!(
            out,
            "{:<12} {:>13.3} {:>11.3} {:>12} {:>15} {:>9.1} {:>6}",
            s.method, s.report.mean_shrinks, s.report.mean_evals, s.first_evals, occ,
            s.report.ess, ks
        )?;
    }
    Ok(0)
}

fn cmd_diagnose(args: DiagnoseArgs) -> Result<u8> {
    let text = fs::read_to_string(&args.input)
        .with_context(|| format!("cannot read {}", args.input.display()))?;
    let records = parse_draws_csv(&text)?;

    let reference = args
        .reference
        .as_deref()
        .map(|name| reference_by_name(name, &QUARTIC_GRID))
        .transpose()?;
    let opts = ReportOptions {
        bins: args.bins,
        threshold: args.threshold,
        reference,
        ks_thin: slicebox::diagnostics::KS_THIN,
    };
    let report = slicebox::summarize(&records, &opts)?;
    print!("{report}");
    if let Some(path) = &args.report {
        fs::write(path, report.to_json())
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    // A failed KS test is reported through the exit status; the report
    // above is still the command's result.
    Ok(if report.ks_pass == Some(false) { 1 } else { 0 })
}

fn parse_draws_csv(text: &str) -> Result<Vec<DrawRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end() == "t,x,n_evals,n_shrinks" => {}
        Some((_, header)) => {
            return Err(anyhow!(
                "line 1: expected header `t,x,n_evals,n_shrinks`, found `{header}`"
            ))
        }
        None => return Err(anyhow!("line 1: empty draw file")),
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(anyhow!(
                "line {lineno}: expected 4 fields, found {}",
                fields.len()
            ));
        }
        let _t: u64 = fields[0]
            .trim()
            .parse()
            .map_err(|_| anyhow!("line {lineno}: bad draw index `{}`", fields[0]))?;
        let x: f64 = fields[1]
            .trim()
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| anyhow!("line {lineno}: bad x value `{}`", fields[1]))?;
        let n_evals: u32 = fields[2]
            .trim()
            .parse()
            .map_err(|_| anyhow!("line {lineno}: bad n_evals `{}`", fields[2]))?;
        let n_shrinks: u32 = fields[3]
            .trim()
            .parse()
            .map_err(|_| anyhow!("line {lineno}: bad n_shrinks `{}`", fields[3]))?;
        records.push(DrawRecord {
            x,
            n_evals,
            n_shrinks,
            capped: false,
        });
    }
    if records.is_empty() {
        return Err(anyhow!("line 2: no draws in file"));
    }
    Ok(records)
}
