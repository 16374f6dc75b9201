//! Test problems, perturbation models, error sweeps and timing fits.
//!
//! Every sweep starts from the interlaced points `x_i = i/n`,
//! `y_i = x_i + 1/(2n)`. Sign patterns come from a ChaCha8 generator seeded
//! with the user seed and switched to stream `n`, so the pattern for a
//! given size is the same for every `δ` and independent of how cells are
//! scheduled.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::displacement::alg4_recover;
use crate::error::{Error, Result};
use crate::linalg::text::format_f64;
use crate::linalg::{hinv, DenseMatrix};
use crate::model::{
    cauchy_build, check_cauchy_points, delta, CauchyPoints, GeneratorPair, DEFAULT_SEPARATION_TOL,
};
use crate::projectors::{alg1_recover, alg2_recover, alg3_recover, ProjectorPreset, ProjectorSpec};

pub const CSV_HEADER: &str = "n,delta,alg,err_C_frob,err_A_frob,err_A_max,valid";
pub const RESIDUAL_CSV_HEADER: &str = "n,delta,alg,res_Z_frob";
pub const TIMING_CSV_HEADER: &str = "n,alg2_mean,alg2_min,alg2_max,alg4_mean,alg4_min,alg4_max";

/// `x_i = i/n`, `y_i = x_i + 1/(2n)` for `i = 1..n`.
pub fn interlaced_points(n: usize) -> CauchyPoints {
    assert!(n >= 1, "interlaced_points needs n >= 1");
    let nf = n as f64;
    let x: Vec<f64> = (1..=n).map(|i| i as f64 / nf).collect();
    let y: Vec<f64> = (1..=n).map(|i| (2 * i + 1) as f64 / (2.0 * nf)).collect();
    CauchyPoints::new(x, y).expect("interlaced points are separated")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    /// `A_ij = (1 ± δ) C_ij`
    Multiplicative,
    /// `A = (D ± δ)^[-1]` with `D = C^[-1]`
    AdditiveReciprocal,
    /// `A_ij = (1 ± δ n/((n−i+1)(n−j+1))) C_ij`, weighted toward the
    /// trailing block
    UnbalancedMultiplicative,
    /// `A = (D + δY)^[-1]` with `Y` from [`worst_case_matrix`]
    WorstCaseSingular,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PerturbationModel {
    pub kind: PerturbationKind,
    pub delta: f64,
    pub seed: u64,
}

impl PerturbationModel {
    pub fn new(kind: PerturbationKind, delta: f64, seed: u64) -> Result<Self> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "perturbation size must be finite and nonnegative, got {delta}"
            )));
        }
        Ok(Self { kind, delta, seed })
    }
}

/// The `n × n` sign pattern for `seed`, row-major, `+1` when the uniform
/// draw is below one half.
pub fn sign_pattern(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(n as u64);
    (0..n * n)
        .map(|_| if rng.random::<f64>() < 0.5 { 1.0 } else { -1.0 })
        .collect()
}

/// Perturbs the Cauchy matrix `c` according to `m`.
pub fn apply_perturbation(c: &DenseMatrix, m: &PerturbationModel) -> Result<DenseMatrix> {
    c.ensure_square()?;
    let signs = sign_pattern(c.rows(), m.seed);
    apply_perturbation_with_signs(c, m, &signs)
}

/// [`apply_perturbation`] with an explicit row-major sign pattern.
pub fn apply_perturbation_with_signs(
    c: &DenseMatrix,
    m: &PerturbationModel,
    signs: &[f64],
) -> Result<DenseMatrix> {
    c.ensure_square()?;
    c.ensure_zero_free()?;
    let n = c.rows();
    if signs.len() != n * n {
        return Err(Error::DimensionMismatch(format!(
            "sign pattern of length {} for a {n}x{n} matrix",
            signs.len()
        )));
    }
    let d = m.delta;
    if d == 0.0 {
        return Ok(c.clone());
    }
    let s = |i: usize, j: usize| signs[i * n + j];
    match m.kind {
        PerturbationKind::Multiplicative => Ok(DenseMatrix::from_fn(n, n, |i, j| {
            (1.0 + s(i, j) * d) * c[(i, j)]
        })),
        PerturbationKind::UnbalancedMultiplicative => {
            let nf = n as f64;
            Ok(DenseMatrix::from_fn(n, n, |i, j| {
                let w = nf / ((n - i) as f64 * (n - j) as f64);
                (1.0 + s(i, j) * d * w) * c[(i, j)]
            }))
        }
        PerturbationKind::AdditiveReciprocal => {
            let dd = hinv(c)?;
            hinv(&DenseMatrix::from_fn(n, n, |i, j| dd[(i, j)] + s(i, j) * d))
        }
        PerturbationKind::WorstCaseSingular => {
            let dd = hinv(c)?;
            let y = worst_case_matrix(n)?;
            hinv(&dd.add(&y.scale(d)))
        }
    }
}

/// `Y = vvᵀ/vᵀv` with `v = (1, −1/(n−1), …, −1/(n−1))`: unit Frobenius
/// norm, orthogonal to 𝒟, and the worst case for Algorithm 1.
pub fn worst_case_matrix(n: usize) -> Result<DenseMatrix> {
    if n < 2 {
        return Err(Error::SizeTooSmall { n, min: 2 });
    }
    let nf = n as f64;
    Ok(DenseMatrix::from_fn(n, n, |i, j| match (i == 0, j == 0) {
        (true, true) => (nf - 1.0) / nf,
        (true, false) | (false, true) => -1.0 / nf,
        (false, false) => 1.0 / (nf * (nf - 1.0)),
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Algorithm {
    Alg1,
    Alg2,
    Alg3,
    Alg4,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Self::Alg1, Self::Alg2, Self::Alg3, Self::Alg4];

    pub fn id(self) -> u8 {
        match self {
            Self::Alg1 => 1,
            Self::Alg2 => 2,
            Self::Alg3 => 3,
            Self::Alg4 => 4,
        }
    }

    /// Runs the algorithm; `spec` is only consulted by Algorithm 3.
    pub fn recover(self, a: &DenseMatrix, spec: &ProjectorSpec) -> Result<GeneratorPair> {
        match self {
            Self::Alg1 => alg1_recover(a),
            Self::Alg2 => alg2_recover(a),
            Self::Alg3 => alg3_recover(a, spec),
            Self::Alg4 => alg4_recover(a),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" => Ok(Self::Alg1),
            "2" => Ok(Self::Alg2),
            "3" => Ok(Self::Alg3),
            "4" => Ok(Self::Alg4),
            other => Err(Error::InvalidArgument(format!(
                "unknown algorithm {other:?} (expected 1, 2, 3 or 4)"
            ))),
        }
    }
}

/// One (size, δ, algorithm) cell of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub n: usize,
    pub delta: f64,
    pub alg: Algorithm,
    /// `‖C − C_i‖_F / ‖C‖_F`
    pub err_c_frob: f64,
    /// `‖A − C_i‖_F / ‖A‖_F`
    pub err_a_frob: f64,
    /// `‖A − C_i‖_max / ‖C_i‖_max`
    pub err_a_max: f64,
    /// False when the recovered generators are not separated; the error
    /// fields are then NaN.
    pub valid: bool,
    /// `‖A^[-1] − Δ(x, y)‖_F`, defined even for invalid rows.
    pub res_z_frob: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExperimentId {
    /// multiplicative noise, `n = 100`, `δ` from `1e-9` to `1e-1`
    Ex1,
    /// multiplicative noise, `δ = 1e-5`, growing `n`
    Ex1b,
    /// additive noise on `C^[-1]`, `n = 100`
    Ex2,
    /// trailing-weighted multiplicative noise, growing `n`
    Ex4,
    /// worst-case perturbation `δY` of `C^[-1]`, growing `n`
    Ex5,
}

impl ExperimentId {
    pub fn kind(self) -> PerturbationKind {
        match self {
            Self::Ex1 | Self::Ex1b => PerturbationKind::Multiplicative,
            Self::Ex2 => PerturbationKind::AdditiveReciprocal,
            Self::Ex4 => PerturbationKind::UnbalancedMultiplicative,
            Self::Ex5 => PerturbationKind::WorstCaseSingular,
        }
    }

    pub fn default_sizes(self) -> Vec<usize> {
        match self {
            Self::Ex1 | Self::Ex2 => vec![100],
            Self::Ex1b | Self::Ex4 | Self::Ex5 => (1..=20).map(|k| 100 * k).collect(),
        }
    }

    pub fn default_deltas(self) -> Vec<f64> {
        match self {
            Self::Ex1 | Self::Ex2 => (1..=9).rev().map(|k| 10f64.powi(-k)).collect(),
            Self::Ex1b | Self::Ex4 | Self::Ex5 => vec![1e-5],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Ex1 => "1",
            Self::Ex1b => "1b",
            Self::Ex2 => "2",
            Self::Ex4 => "4",
            Self::Ex5 => "5",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" => Ok(Self::Ex1),
            "1b" => Ok(Self::Ex1b),
            "2" => Ok(Self::Ex2),
            "4" => Ok(Self::Ex4),
            "5" => Ok(Self::Ex5),
            other => Err(Error::InvalidArgument(format!(
                "unknown experiment id {other:?} (expected 1, 1b, 2, 4 or 5)"
            ))),
        }
    }
}

fn relative(num: f64, den: f64) -> f64 {
    num / den
}

/// Rows for one size and one perturbed matrix, all four algorithms.
pub fn evaluate_algorithms(
    n: usize,
    delta_value: f64,
    c: &DenseMatrix,
    a: &DenseMatrix,
    spec: &ProjectorSpec,
) -> Result<Vec<ExperimentRow>> {
    let z = hinv(a)?;
    let (c_frob, a_frob) = (c.norm_frobenius(), a.norm_frobenius());
    let mut rows = Vec::with_capacity(4);
    for alg in Algorithm::ALL {
        let g = alg.recover(a, spec)?;
        let res_z_frob = z.sub(&delta(&g)).norm_frobenius();
        let row = match check_cauchy_points(&g, DEFAULT_SEPARATION_TOL)
            .ok()
            .and_then(|p| cauchy_build(&p).ok())
        {
            Some(ci) => ExperimentRow {
                n,
                delta: delta_value,
                alg,
                err_c_frob: relative(c.sub(&ci).norm_frobenius(), c_frob),
                err_a_frob: relative(a.sub(&ci).norm_frobenius(), a_frob),
                err_a_max: relative(a.sub(&ci).norm_max(), ci.norm_max()),
                valid: true,
                res_z_frob,
            },
            None => ExperimentRow {
                n,
                delta: delta_value,
                alg,
                err_c_frob: f64::NAN,
                err_a_frob: f64::NAN,
                err_a_max: f64::NAN,
                valid: false,
                res_z_frob,
            },
        };
        rows.push(row);
    }
    Ok(rows)
}

fn sweep_size(
    n: usize,
    deltas: &[f64],
    kind: PerturbationKind,
    preset: ProjectorPreset,
    seed: u64,
) -> Result<Vec<ExperimentRow>> {
    let c = cauchy_build(&interlaced_points(n))?;
    let spec = preset.build(n);
    let signs = sign_pattern(n, seed);
    let mut rows = Vec::with_capacity(4 * deltas.len());
    for &d in deltas {
        let m = PerturbationModel::new(kind, d, seed)?;
        let a = apply_perturbation_with_signs(&c, &m, &signs)?;
        rows.extend(evaluate_algorithms(n, d, &c, &a, &spec)?);
    }
    Ok(rows)
}

fn check_grid(sizes: &[usize], deltas: &[f64]) -> Result<()> {
    if sizes.is_empty() || deltas.is_empty() {
        return Err(Error::InvalidArgument("empty size or delta grid".into()));
    }
    if let Some(&n) = sizes.iter().find(|&&n| n < 2) {
        return Err(Error::SizeTooSmall { n, min: 2 });
    }
    Ok(())
}

/// Runs Algorithms 1–4 on every `(n, δ)` cell, Algorithm 3 with `preset`.
/// Rows are ordered by size, then `δ`, then algorithm.
pub fn run_recovery_sweep(
    sizes: &[usize],
    deltas: &[f64],
    kind: PerturbationKind,
    preset: ProjectorPreset,
    seed: u64,
) -> Result<Vec<ExperimentRow>> {
    run_recovery_sweep_threaded(sizes, deltas, kind, preset, seed, 1)
}

/// [`run_recovery_sweep`] with the sizes spread over up to `threads`
/// worker threads. The output does not depend on `threads`.
pub fn run_recovery_sweep_threaded(
    sizes: &[usize],
    deltas: &[f64],
    kind: PerturbationKind,
    preset: ProjectorPreset,
    seed: u64,
    threads: usize,
) -> Result<Vec<ExperimentRow>> {
    check_grid(sizes, deltas)?;
    let threads = threads.clamp(1, sizes.len());
    if threads == 1 {
        let mut rows = Vec::new();
        for &n in sizes {
            rows.extend(sweep_size(n, deltas, kind, preset, seed)?);
        }
        return Ok(rows);
    }
    let mut slots: Vec<Option<Result<Vec<ExperimentRow>>>> = vec![None; sizes.len()];
    std::thread::scope(|scope| {
        let chunk = sizes.len().div_ceil(threads);
        for (size_chunk, slot_chunk) in sizes.chunks(chunk).zip(slots.chunks_mut(chunk)) {
            scope.spawn(move || {
                for (&n, slot) in size_chunk.iter().zip(slot_chunk.iter_mut()) {
                    *slot = Some(sweep_size(n, deltas, kind, preset, seed));
                }
            });
        }
    });
    let mut rows = Vec::new();
    for slot in slots {
        rows.extend(slot.expect("every size is evaluated")?);
    }
    Ok(rows)
}

/// CSV with [`CSV_HEADER`]; floats carry 17 significant digits.
pub fn write_rows_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n,
            format_f64(r.delta),
            r.alg.id(),
            format_f64(r.err_c_frob),
            format_f64(r.err_a_frob),
            format_f64(r.err_a_max),
            r.valid
        );
    }
    out
}

/// CSV with [`RESIDUAL_CSV_HEADER`]: the reciprocal-side residuals
/// `‖A^[-1] − D_i‖_F`.
pub fn write_residual_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from(RESIDUAL_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.n,
            format_f64(r.delta),
            r.alg.id(),
            format_f64(r.res_z_frob)
        );
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimingRow {
    pub n: usize,
    pub alg2_mean: f64,
    pub alg2_min: f64,
    pub alg2_max: f64,
    pub alg4_mean: f64,
    pub alg4_min: f64,
    pub alg4_max: f64,
}

/// Mean, min and max wall-clock seconds of Algorithms 2 and 4 over `reps`
/// runs per size, on the Example 1 matrix with `δ = 1e-5`.
pub fn run_timing(sizes: &[usize], reps: usize) -> Result<Vec<TimingRow>> {
    let mut current: Option<(usize, DenseMatrix)> = None;
    run_timing_with(sizes, reps, |alg, n| {
        if current.as_ref().map(|(m, _)| *m) != Some(n) {
            let c = cauchy_build(&interlaced_points(n))?;
            let m = PerturbationModel::new(PerturbationKind::Multiplicative, 1e-5, 42)?;
            current = Some((n, apply_perturbation(&c, &m)?));
        }
        let a = &current.as_ref().expect("matrix built above").1;
        let t0 = Instant::now();
        let g = match alg {
            Algorithm::Alg2 => alg2_recover(a)?,
            Algorithm::Alg4 => alg4_recover(a)?,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "timing covers Algorithms 2 and 4, not {other}"
                )))
            }
        };
        let secs = t0.elapsed().as_secs_f64();
        std::hint::black_box(g);
        Ok(secs)
    })
}

/// Timing driver with the clock replaced by `time(alg, n)`; the sizes
/// run sequentially in the given order.
pub fn run_timing_with(
    sizes: &[usize],
    reps: usize,
    mut time: impl FnMut(Algorithm, usize) -> Result<f64>,
) -> Result<Vec<TimingRow>> {
    if sizes.is_empty() || reps == 0 {
        return Err(Error::InvalidArgument(
            "timing needs at least one size and one repetition".into(),
        ));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let mut stats = [(0.0, f64::INFINITY, 0.0f64); 2];
        for (k, alg) in [Algorithm::Alg2, Algorithm::Alg4].into_iter().enumerate() {
            for _ in 0..reps {
                let t = time(alg, n)?;
                stats[k].0 += t;
                stats[k].1 = stats[k].1.min(t);
                stats[k].2 = stats[k].2.max(t);
            }
        }
        let r = reps as f64;
        rows.push(TimingRow {
            n,
            alg2_mean: stats[0].0 / r,
            alg2_min: stats[0].1,
            alg2_max: stats[0].2,
            alg4_mean: stats[1].0 / r,
            alg4_min: stats[1].1,
            alg4_max: stats[1].2,
        });
    }
    Ok(rows)
}

pub fn write_timing_csv(rows: &[TimingRow]) -> String {
    let mut out = String::from(TIMING_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n,
            format_f64(r.alg2_mean),
            format_f64(r.alg2_min),
            format_f64(r.alg2_max),
            format_f64(r.alg4_mean),
            format_f64(r.alg4_min),
            format_f64(r.alg4_max)
        );
    }
    out
}

/// Least-squares line through `(log n, log t)`; returns `(c, α)` for the
/// model `t = c n^α`.
pub fn power_law_fit(ns: &[f64], times: &[f64]) -> Result<(f64, f64)> {
    if ns.len() != times.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} sizes and {} times",
            ns.len(),
            times.len()
        )));
    }
    if ns.len() < 2
        || ns.iter().chain(times).any(|&v| !(v > 0.0 && v.is_finite()))
        || ns.iter().all(|&v| v == ns[0])
    {
        return Err(Error::DegenerateFit);
    }
    let lx: Vec<f64> = ns.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = times.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let alpha = sxy / sxx;
    Ok(((my - alpha * mx).exp(), alpha))
}
