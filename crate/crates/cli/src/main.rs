//! `cauchy-recover`: recover Cauchy points, measure Cauchyness and rerun the
//! numerical experiments.
//!
//! Exit status: 0 on success, 1 for usage, input or configuration errors,
//! 2 when the input matrix has a zero entry, 3 when the recovered
//! generators are not separated (the output is still written, flagged
//! `"valid": false`).

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cauchy_core::experiments::{
    run_recovery_sweep_threaded, run_timing_with, write_residual_csv, write_rows_csv,
    write_timing_csv, TimingRow,
};
use cauchy_core::linalg::text::parse_matrix;
use cauchy_core::{
    a_posteriori_certificate, check_cauchy_points, measure, power_law_fit, run_timing,
    APosterioriCertificate, Algorithm, DenseMatrix, Error, ExperimentId, GeneratorPair,
    ProjectorPreset, ProjectorSpec, DEFAULT_SEPARATION_TOL,
};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

const THREADS_ENV: &str = "CAUCHY_RECOVER_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "cauchy-recover",
    version,
    about = "Recover Cauchy points from (perturbed) Cauchy matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Recover generators from a matrix and certify them
    Recover(RecoverArgs),
    /// Report the Cauchyness measures of a matrix
    Measure(MeasureArgs),
    /// Run one of the error sweeps (ids 1, 1b, 2, 4, 5)
    Experiment(ExperimentArgs),
    /// Time Algorithms 2 and 4 and fit power laws
    Timing(TimingArgs),
}

#[derive(Args, Debug)]
struct RecoverArgs {
    /// Matrix file: one row per line, comma-separated
    #[arg(long, short)]
    input: PathBuf,
    /// Algorithm: 1, 2, 3 or 4
    #[arg(long, value_parser = parse_algorithm)]
    alg: Algorithm,
    #[command(flatten)]
    spec: SpecArgs,
    /// Output path, `-` for stdout
    #[arg(long, short, default_value = "-")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SpecArgs {
    /// Projector preset for Algorithm 3
    #[arg(long, value_parser = parse_preset, conflicts_with = "spec_file")]
    spec: Option<ProjectorPreset>,
    /// JSON file `{"v": [...], "w": [...]}` for Algorithm 3
    #[arg(long)]
    spec_file: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MeasureArgs {
    /// Matrix file: one row per line, comma-separated
    #[arg(long, short)]
    input: PathBuf,
    /// JSON output path, `-` for stdout
    #[arg(long, short, default_value = "-")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// Experiment: 1, 1b, 2, 4 or 5
    #[arg(long, value_parser = parse_experiment)]
    id: ExperimentId,
    /// Single matrix size
    #[arg(long, conflicts_with = "sizes")]
    n: Option<usize>,
    /// Sizes as `a:step:b` or a comma list
    #[arg(long, value_parser = parse_sizes)]
    sizes: Option<Sizes>,
    /// Single perturbation size
    #[arg(long, conflicts_with = "deltas")]
    delta: Option<f64>,
    /// Comma list of perturbation sizes
    #[arg(long, value_parser = parse_deltas)]
    deltas: Option<Deltas>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Projector preset for Algorithm 3
    #[arg(long, value_parser = parse_preset, default_value = "decreasing")]
    spec: ProjectorPreset,
    /// CSV output path, `-` for stdout
    #[arg(long, short, default_value = "-")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TimingArgs {
    /// Sizes as `a:step:b` or a comma list
    #[arg(long, value_parser = parse_sizes)]
    sizes: Sizes,
    /// Repetitions per size
    #[arg(long, default_value_t = 10)]
    reps: usize,
    /// Require a power-law fit (needs two distinct sizes)
    #[arg(long)]
    fit: bool,
    /// CSV output path; the fit goes next to it with a `.json` extension
    #[arg(long, short)]
    out: PathBuf,
    /// Replace the clock by `t = 1e-9 n^a` with the given exponents for
    /// Algorithms 2 and 4
    #[arg(long, hide = true, value_parser = parse_deltas)]
    inject_exponents: Option<Deltas>,
}

#[derive(Clone, Debug, PartialEq)]
struct Sizes(Vec<usize>);

#[derive(Clone, Debug, PartialEq)]
struct Deltas(Vec<f64>);

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_preset(s: &str) -> Result<ProjectorPreset, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_experiment(s: &str) -> Result<ExperimentId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_sizes(s: &str) -> Result<Sizes, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("invalid size {t:?}"))
    };
    let parts: Vec<&str> = s.split(':').collect();
    let sizes = match parts.as_slice() {
        [a, step, b] => {
            let (a, step, b) = (num(a)?, num(step)?, num(b)?);
            if step == 0 || a > b {
                return Err(format!("empty or unbounded range {s:?}"));
            }
            (a..=b).step_by(step).collect()
        }
        [_] => s.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
        _ => return Err(format!("expected a:step:b or a comma list, got {s:?}")),
    };
    if sizes.is_empty() {
        return Err("no sizes given".into());
    }
    Ok(Sizes(sizes))
}

fn parse_deltas(s: &str) -> Result<Deltas, String> {
    let v = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("invalid number {t:?}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Deltas(v))
}

/// Failure carrying its exit status.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ZeroEntry { .. } => 2,
            Error::SeparationViolated { .. } => 3,
            _ => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn read_matrix(path: &Path) -> CliResult<DenseMatrix> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
    parse_matrix(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so failures never leave partial output.
fn write_output(path: &Path, contents: &str) -> CliResult<()> {
    if path.as_os_str() == "-" {
        let mut out = std::io::stdout().lock();
        return out
            .write_all(contents.as_bytes())
            .map_err(|e| Failure::config(format!("cannot write to stdout: {e}")));
    }
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let fail = |e: std::io::Error| Failure::config(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(contents.as_bytes()).map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report types serialize");
    s.push('\n');
    s
}

fn load_spec(args: &SpecArgs, n: usize) -> CliResult<ProjectorSpec> {
    if let Some(path) = &args.spec_file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
        let spec: ProjectorSpec = serde_json::from_str(&text)
            .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
        if spec.len() != n {
            return Err(Failure::config(format!(
                "projector of size {} for a {n}x{n} matrix",
                spec.len()
            )));
        }
        return Ok(spec);
    }
    Ok(args.spec.unwrap_or(ProjectorPreset::Decreasing).build(n))
}

#[derive(Serialize)]
struct RecoverOutput {
    alg: u8,
    x: Vec<f64>,
    y: Vec<f64>,
    valid: bool,
    min_separation: f64,
    certificate: APosterioriCertificate,
}

fn cmd_recover(args: &RecoverArgs) -> CliResult<()> {
    let a = read_matrix(&args.input)?;
    a.ensure_square()?;
    a.ensure_zero_free()?;
    let spec = load_spec(&args.spec, a.rows())?;
    let g: GeneratorPair = args.alg.recover(&a, &spec)?;
    let certificate = a_posteriori_certificate(&a, &g)?;
    let check = check_cauchy_points(&g, DEFAULT_SEPARATION_TOL);
    let (valid, min_separation) = match &check {
        Ok(p) => (true, p.min_separation()),
        Err(f) => (false, f.separation),
    };
    let out = RecoverOutput {
        alg: args.alg.id(),
        x: g.x.to_vec(),
        y: g.y.to_vec(),
        valid,
        min_separation,
        certificate,
    };
    write_output(&args.out, &to_json(&out))?;
    match check {
        Ok(_) => Ok(()),
        Err(f) => Err(Failure {
            code: 3,
            message: format!(
                "recovered points are not separated: |x[{}] - y[{}]| = {:e}",
                f.row, f.col, f.separation
            ),
        }),
    }
}

fn cmd_measure(args: &MeasureArgs) -> CliResult<()> {
    let a = read_matrix(&args.input)?;
    a.ensure_square()?;
    a.ensure_zero_free()?;
    write_output(&args.out, &to_json(&measure(&a)?))
}

fn threads() -> CliResult<usize> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(1),
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| {
                Failure::config(format!(
                    "{THREADS_ENV} must be a positive integer, got {s:?}"
                ))
            }),
    }
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn cmd_experiment(args: &ExperimentArgs) -> CliResult<()> {
    let id = args.id;
    let sizes = match (&args.n, &args.sizes) {
        (Some(n), _) => vec![*n],
        (None, Some(s)) => s.0.clone(),
        (None, None) => id.default_sizes(),
    };
    let deltas = match (&args.delta, &args.deltas) {
        (Some(d), _) => vec![*d],
        (None, Some(d)) => d.0.clone(),
        (None, None) => id.default_deltas(),
    };
    let rows =
        run_recovery_sweep_threaded(&sizes, &deltas, id.kind(), args.spec, args.seed, threads()?)
            .map_err(|e| match e {
            Error::ZeroEntry { .. } => Failure::from(e),
            other => Failure::config(other.to_string()),
        })?;
    write_output(&args.out, &write_rows_csv(&rows))?;
    if id == ExperimentId::Ex5 && args.out.as_os_str() != "-" {
        write_output(
            &sidecar(&args.out, "residuals.csv"),
            &write_residual_csv(&rows),
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Fit {
    c: f64,
    exponent: f64,
}

#[derive(Serialize)]
struct TimingFit {
    sizes: Vec<usize>,
    reps: usize,
    alg2: Fit,
    alg4: Fit,
}

fn fit(rows: &[TimingRow], pick: impl Fn(&TimingRow) -> f64) -> CliResult<Fit> {
    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let ts: Vec<f64> = rows.iter().map(pick).collect();
    let (c, exponent) = power_law_fit(&ns, &ts).map_err(|e| Failure::config(e.to_string()))?;
    Ok(Fit { c, exponent })
}

fn cmd_timing(args: &TimingArgs) -> CliResult<()> {
    let sizes = &args.sizes.0;
    let distinct = {
        let mut s = sizes.clone();
        s.sort_unstable();
        s.dedup();
        s.len()
    };
    if args.fit && distinct < 2 {
        return Err(Failure::config(
            "a power-law fit needs at least two distinct sizes",
        ));
    }
    let rows = match &args.inject_exponents {
        Some(Deltas(e)) if e.len() == 2 => {
            let (e2, e4) = (e[0], e[1]);
            run_timing_with(sizes, args.reps, |alg, n| {
                let p = if alg == Algorithm::Alg2 { e2 } else { e4 };
                Ok(1e-9 * (n as f64).powf(p))
            })
        }
        Some(_) => return Err(Failure::config("--inject-exponents takes two numbers")),
        None => run_timing(sizes, args.reps),
    }
    .map_err(|e| Failure::config(e.to_string()))?;
    write_output(&args.out, &write_timing_csv(&rows))?;
    if distinct >= 2 {
        let report = TimingFit {
            sizes: sizes.clone(),
            reps: args.reps,
            alg2: fit(&rows, |r| r.alg2_mean)?,
            alg4: fit(&rows, |r| r.alg4_mean)?,
        };
        write_output(&args.out.with_extension("json"), &to_json(&report))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Recover(a) => cmd_recover(a),
        Command::Measure(a) => cmd_measure(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Timing(a) => cmd_timing(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
