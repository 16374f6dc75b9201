//! Projectors `Φ(X) = X − M_v X M_wᵀ` onto 𝒟, with `M_u = I − 1uᵀ` and
//! unit-sum `v`, `w`, and the recovery algorithms built on them.
//!
//! * [`alg1_recover`] reads the first row and column only (`v = w = e₁`).
//! * [`alg2_recover`] is the Frobenius-orthogonal projection (`v = w = 1/n`).
//! * [`alg3_recover`] accepts any admissible pair `(v, w)`.
//!
//! All three return normalized generators, i.e. `Σ(x_i + y_i) = 0`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, hinv, DenseMatrix, RealVector};
use crate::model::{normalize_generators, GeneratorPair};

/// Tolerance on `|1ᵀv − 1|` for an admissible projector vector.
pub const SPEC_SUM_TOL: f64 = 1e-12;

/// The pair `(v, w)` with `1ᵀv = 1ᵀw = 1` that selects a projector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct ProjectorSpec {
    v: RealVector,
    w: RealVector,
}

#[derive(Deserialize)]
struct RawSpec {
    v: Vec<f64>,
    w: Vec<f64>,
}

impl TryFrom<RawSpec> for ProjectorSpec {
    type Error = Error;
    fn try_from(raw: RawSpec) -> Result<Self> {
        Self::new(RealVector::new(raw.v)?, RealVector::new(raw.w)?)
    }
}

impl ProjectorSpec {
    pub fn new(v: impl Into<RealVector>, w: impl Into<RealVector>) -> Result<Self> {
        let (v, w) = (v.into(), w.into());
        if v.len() != w.len() || v.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "projector vectors need equal nonzero lengths, got {} and {}",
                v.len(),
                w.len()
            )));
        }
        for (name, u) in [("v", &v), ("w", &w)] {
            let sum = u.sum();
            if (sum - 1.0).abs() > SPEC_SUM_TOL {
                return Err(Error::SpecInvalid { name, sum });
            }
        }
        Ok(Self { v, w })
    }

    pub fn v(&self) -> &RealVector {
        &self.v
    }

    pub fn w(&self) -> &RealVector {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn e1(n: usize) -> Self {
        ProjectorPreset::E1.build(n)
    }

    pub fn uniform(n: usize) -> Self {
        ProjectorPreset::Uniform.build(n)
    }

    pub fn decreasing(n: usize) -> Self {
        ProjectorPreset::Decreasing.build(n)
    }
}

/// Named projector choices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProjectorPreset {
    /// `v = w = e₁`, the projector of Algorithm 1.
    E1,
    /// `v = w = 1/n`, the orthogonal projector of Algorithm 2.
    Uniform,
    /// `v_j = w_j = 2(n − j + 1) / (n(n + 1))`: positive, linearly
    /// decreasing, unit sum.
    Decreasing,
}

impl ProjectorPreset {
    pub fn build(self, n: usize) -> ProjectorSpec {
        assert!(n > 0, "projector size must be positive");
        let v: Vec<f64> = match self {
            Self::E1 => RealVector::unit(n, 0).into_vec(),
            Self::Uniform => vec![1.0 / n as f64; n],
            Self::Decreasing => {
                // integer numerator and denominator, one rounding each
                let den = (n * (n + 1)) as f64;
                (1..=n).map(|j| (2 * (n - j + 1)) as f64 / den).collect()
            }
        };
        ProjectorSpec::new(v.clone(), v).expect("presets have unit sum")
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::E1 => "e1",
            Self::Uniform => "uniform",
            Self::Decreasing => "decreasing",
        }
    }
}

impl fmt::Display for ProjectorPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProjectorPreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "e1" => Ok(Self::E1),
            "uniform" => Ok(Self::Uniform),
            "decreasing" => Ok(Self::Decreasing),
            other => Err(Error::InvalidArgument(format!(
                "unknown projector preset {other:?} (expected e1, uniform or decreasing)"
            ))),
        }
    }
}

/// `X − M_v X M_wᵀ`, evaluated as `1vᵀX + Xw1ᵀ − (vᵀXw)11ᵀ` in O(n²).
pub fn apply_projector(x: &DenseMatrix, s: &ProjectorSpec) -> Result<DenseMatrix> {
    x.ensure_square()?;
    if x.rows() != s.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix with a projector of size {}",
            x.rows(),
            x.cols(),
            s.len()
        )));
    }
    let n = x.rows();
    let row_part = x.matvec_t(&s.v); // (vᵀX)_j
    let col_part = x.matvec(&s.w); // (Xw)_i
    let corner = dot(&s.v, &col_part);
    Ok(DenseMatrix::from_fn(n, n, |i, j| {
        row_part[j] + col_part[i] - corner
    }))
}

/// `M_u = I − 1uᵀ`.
pub fn mu_matrix(u: &[f64]) -> DenseMatrix {
    let n = u.len();
    DenseMatrix::from_fn(n, n, |i, j| (if i == j { 1.0 } else { 0.0 }) - u[j])
}

/// Operator-norm information on `M_u`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MuNorms {
    /// `1 + ‖u‖₁`; exact when some `u_i ≤ 0`, an upper bound otherwise.
    pub inf_norm: f64,
    /// `1 + √n ‖u − 1/n‖₂ ≥ ‖M_u‖₂`.
    pub two_norm_bound: f64,
}

pub fn mu_operator_norms(u: &[f64]) -> MuNorms {
    let n = u.len() as f64;
    let l1: f64 = u.iter().map(|v| v.abs()).sum();
    let dev = u.iter().map(|v| (v - 1.0 / n).powi(2)).sum::<f64>().sqrt();
    MuNorms {
        inf_norm: 1.0 + l1,
        two_norm_bound: 1.0 + n.sqrt() * dev,
    }
}

/// Constants of the a-priori bounds `‖A^[-1] − Δ‖⋆ ≤ α κ⋆(A)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundConstants {
    /// `(1 + ‖v‖₁)(1 + ‖w‖₁)`, for the Chebyshev norm.
    pub alpha_max: f64,
    /// `(1 + √n‖v − 1/n‖₂)(1 + √n‖w − 1/n‖₂)`, for the Frobenius norm.
    pub alpha_frob: f64,
    /// `‖M_v‖∞ ‖M_w‖∞`, the factor of the relative error bounds.
    pub nu: f64,
}

pub fn bound_constants(s: &ProjectorSpec) -> BoundConstants {
    let mv = mu_operator_norms(&s.v);
    let mw = mu_operator_norms(&s.w);
    let alpha_max = mv.inf_norm * mw.inf_norm;
    BoundConstants {
        alpha_max,
        alpha_frob: mv.two_norm_bound * mw.two_norm_bound,
        nu: alpha_max,
    }
}

fn zero_at(a: &DenseMatrix, i: usize, j: usize) -> Result<f64> {
    let v = a[(i, j)];
    if v == 0.0 {
        Err(Error::ZeroEntry {
            row: i + 1,
            col: j + 1,
        })
    } else {
        Ok(v)
    }
}

/// Algorithm 1: generators from the first row and column of `A`.
///
/// Only those `2n − 1` entries are read, so zero detection covers them
/// alone. Satisfies `Δ(x, y) = Φ₁(A^[-1])` with `Φ₁` the `(e₁, e₁)`
/// projector.
pub fn alg1_recover(a: &DenseMatrix) -> Result<GeneratorPair> {
    a.ensure_square()?;
    let n = a.rows();
    let mut y = Vec::with_capacity(n);
    for j in 0..n {
        y.push(-1.0 / zero_at(a, 0, j)?);
    }
    let mut x = vec![0.0; n];
    for (i, xi) in x.iter_mut().enumerate().skip(1) {
        *xi = 1.0 / zero_at(a, i, 0)? + y[0];
    }
    Ok(normalize_generators(&GeneratorPair {
        x: x.into(),
        y: y.into(),
    }))
}

/// Algorithm 2: generators of the Frobenius-nearest element of 𝒟 to
/// `A^[-1]`.
pub fn alg2_recover(a: &DenseMatrix) -> Result<GeneratorPair> {
    a.ensure_square()?;
    let z = hinv(a)?;
    Ok(alg2_from_reciprocal(&z))
}

/// Algorithm 2 applied to an already reciprocated matrix `Z = A^[-1]`.
pub fn alg2_from_reciprocal(z: &DenseMatrix) -> GeneratorPair {
    let n = z.rows() as f64;
    let r: Vec<f64> = z.row_sums().into_iter().map(|v| v / n).collect();
    let c: Vec<f64> = z.col_sums().into_iter().map(|v| v / n).collect();
    let alpha = crate::linalg::stable_sum(&r) / (2.0 * n);
    GeneratorPair {
        x: r.iter().map(|ri| ri - alpha).collect::<Vec<_>>().into(),
        y: c.iter().map(|ci| alpha - ci).collect::<Vec<_>>().into(),
    }
}

/// Algorithm 3: generators of `A^[-1] − M_v A^[-1] M_wᵀ`.
///
/// The reciprocal matrix is formed once and the two reductions are
/// matrix–vector products.
pub fn alg3_recover(a: &DenseMatrix, s: &ProjectorSpec) -> Result<GeneratorPair> {
    a.ensure_square()?;
    if a.rows() != s.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix with a projector of size {}",
            a.rows(),
            a.cols(),
            s.len()
        )));
    }
    let z = hinv(a)?;
    Ok(alg3_from_reciprocal(&z, s))
}

pub fn alg3_from_reciprocal(z: &DenseMatrix, s: &ProjectorSpec) -> GeneratorPair {
    let y: Vec<f64> = z.matvec_t(&s.v).into_iter().map(|v| -v).collect();
    let theta = dot(&y, &s.w);
    let x: Vec<f64> = z.matvec(&s.w).into_iter().map(|v| theta + v).collect();
    normalize_generators(&GeneratorPair {
        x: x.into(),
        y: y.into(),
    })
}
