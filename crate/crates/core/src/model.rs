//! Cauchy points, generators of the subspace 𝒟 = { x1ᵀ − 1yᵀ }, and the
//! zero-sum reciprocal representation of its elements.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hinv, DenseMatrix, RealVector};

/// Default relative tolerance for [`check_cauchy_points`].
pub const DEFAULT_SEPARATION_TOL: f64 = 1e-12;

/// A vector pair `(x, y)` parametrizing `Δ(x, y) = x1ᵀ − 1yᵀ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorPair {
    pub x: RealVector,
    pub y: RealVector,
}

impl GeneratorPair {
    pub fn new(x: impl Into<RealVector>, y: impl Into<RealVector>) -> Result<Self> {
        let (x, y) = (x.into(), y.into());
        if x.len() != y.len() || x.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "generators need equal nonzero lengths, got {} and {}",
                x.len(),
                y.len()
            )));
        }
        RealVector::new(x.to_vec())?;
        RealVector::new(y.to_vec())?;
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Euclidean norm of the stacked vector `[x; y]`.
    pub fn stacked_norm(&self) -> f64 {
        (self.x.norm2().powi(2) + self.y.norm2().powi(2)).sqrt()
    }

    /// `max(‖x‖∞, ‖y‖∞)`.
    pub fn max_abs(&self) -> f64 {
        self.x.norm_inf().max(self.y.norm_inf())
    }

    /// Adds `c` to every entry of both vectors.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            x: self.x.shifted(c),
            y: self.y.shifted(c),
        }
    }

    /// Largest entrywise distance between two pairs.
    pub fn max_discrepancy(&self, other: &Self) -> f64 {
        let dx = self
            .x
            .iter()
            .zip(other.x.iter())
            .map(|(a, b)| (a - b).abs());
        let dy = self
            .y
            .iter()
            .zip(other.y.iter())
            .map(|(a, b)| (a - b).abs());
        dx.chain(dy).fold(0.0, f64::max)
    }
}

/// Generators whose differences never vanish, so that `cau(x, y)` exists.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CauchyPoints {
    x: RealVector,
    y: RealVector,
    min_separation: f64,
}

impl CauchyPoints {
    /// Validates strict separation `x_i ≠ y_j`.
    pub fn new(x: impl Into<RealVector>, y: impl Into<RealVector>) -> Result<Self> {
        let g = GeneratorPair::new(x, y)?;
        let (s, i, j) = min_separation(&g);
        if s <= 0.0 {
            return Err(Error::SeparationViolated {
                row: i + 1,
                col: j + 1,
            });
        }
        Ok(Self {
            x: g.x,
            y: g.y,
            min_separation: s,
        })
    }

    pub fn x(&self) -> &RealVector {
        &self.x
    }

    pub fn y(&self) -> &RealVector {
        &self.y
    }

    pub fn min_separation(&self) -> f64 {
        self.min_separation
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn generators(&self) -> GeneratorPair {
        GeneratorPair {
            x: self.x.clone(),
            y: self.y.clone(),
        }
    }
}

/// Why a generator pair was rejected as Cauchy points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationFailure {
    /// Smallest `|x_i − y_j|`.
    pub separation: f64,
    /// Threshold the separation had to exceed.
    pub threshold: f64,
    /// 1-based position attaining the minimum.
    pub row: usize,
    pub col: usize,
}

/// Returns `(min |x_i − y_j|, i, j)` with 0-based indices.
fn min_separation(g: &GeneratorPair) -> (f64, usize, usize) {
    let mut best = (f64::INFINITY, 0, 0);
    for (i, xi) in g.x.iter().enumerate() {
        for (j, yj) in g.y.iter().enumerate() {
            let d = (xi - yj).abs();
            if d < best.0 {
                best = (d, i, j);
            }
        }
    }
    best
}

/// `Δ(x, y) = x1ᵀ − 1yᵀ`.
pub fn delta(g: &GeneratorPair) -> DenseMatrix {
    let n = g.len();
    DenseMatrix::from_fn(n, n, |i, j| g.x[i] - g.y[j])
}

/// `cau(x, y)` with entries `1 / (x_i − y_j)`.
pub fn cauchy_build(p: &CauchyPoints) -> Result<DenseMatrix> {
    let n = p.len();
    let d = DenseMatrix::from_fn(n, n, |i, j| p.x[i] - p.y[j]);
    hinv(&d).map_err(|e| match e {
        Error::ZeroEntry { row, col } => Error::SeparationViolated { row, col },
        other => other,
    })
}

/// Shifts generators so that `Σ(x_i + y_i) = 0`, the minimal-norm
/// representative of `Δ(x, y)`.
pub fn normalize_generators(g: &GeneratorPair) -> GeneratorPair {
    let n = g.len() as f64;
    let alpha = (g.x.sum() + g.y.sum()) / (2.0 * n);
    g.shifted(-alpha)
}

/// Accepts `g` as Cauchy points when
/// `min |x_i − y_j| > tol · (1 + max(‖x‖∞, ‖y‖∞))`.
pub fn check_cauchy_points(
    g: &GeneratorPair,
    tol: f64,
) -> std::result::Result<CauchyPoints, SeparationFailure> {
    let (s, i, j) = min_separation(g);
    let threshold = tol * (1.0 + g.max_abs());
    if s > threshold {
        Ok(CauchyPoints {
            x: g.x.clone(),
            y: g.y.clone(),
            min_separation: s,
        })
    } else {
        Err(SeparationFailure {
            separation: s,
            threshold,
            row: i + 1,
            col: j + 1,
        })
    }
}

/// Zero-sum parametrization `D = x̂1ᵀ − 1ŷᵀ + α11ᵀ` of an element of 𝒟.
///
/// The `ŷ` term carries a minus sign so that the map from generators is
/// the linear map `[x; y] ↦ [x − mean(x)1; y − mean(y)1; √n (mean(x) − mean(y))]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReciprocalRep {
    pub xhat: RealVector,
    pub yhat: RealVector,
    pub alpha: f64,
}

impl ReciprocalRep {
    /// Checks the numerical zero-sum invariants.
    pub fn new(xhat: RealVector, yhat: RealVector, alpha: f64) -> Result<Self> {
        if xhat.len() != yhat.len() || xhat.is_empty() {
            return Err(Error::DimensionMismatch(
                "x̂ and ŷ need equal nonzero lengths".into(),
            ));
        }
        for (name, v) in [("xhat", &xhat), ("yhat", &yhat)] {
            if v.sum().abs() > 1e-12 * v.norm2() {
                return Err(Error::InvalidArgument(format!("{name} is not zero-sum")));
            }
        }
        Ok(Self { xhat, yhat, alpha })
    }

    pub fn len(&self) -> usize {
        self.xhat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xhat.is_empty()
    }

    /// The vector `R(D) = [x̂; ŷ; √n α]`.
    pub fn to_vector(&self) -> Vec<f64> {
        let n = self.len() as f64;
        let mut v = Vec::with_capacity(2 * self.len() + 1);
        v.extend_from_slice(&self.xhat);
        v.extend_from_slice(&self.yhat);
        v.push(n.sqrt() * self.alpha);
        v
    }

    /// `‖R(D)‖₂`.
    pub fn norm(&self) -> f64 {
        let n = self.len() as f64;
        (self.xhat.norm2().powi(2) + self.yhat.norm2().powi(2) + n * self.alpha.powi(2)).sqrt()
    }
}

pub fn to_reciprocal_rep(g: &GeneratorPair) -> ReciprocalRep {
    let (mx, my) = (g.x.mean(), g.y.mean());
    ReciprocalRep {
        xhat: g.x.shifted(-mx),
        yhat: g.y.shifted(-my),
        alpha: mx - my,
    }
}

pub fn from_reciprocal_rep(r: &ReciprocalRep) -> DenseMatrix {
    let n = r.len();
    DenseMatrix::from_fn(n, n, |i, j| r.xhat[i] - r.yhat[j] + r.alpha)
}

/// Both sides of `‖Δ(g)‖_F = √n ‖R(Δ(g))‖₂`, evaluated independently.
pub fn rep_norm_identity_check(g: &GeneratorPair) -> (f64, f64) {
    let lhs = delta(g).norm_frobenius();
    let rhs = (g.len() as f64).sqrt() * to_reciprocal_rep(g).norm();
    (lhs, rhs)
}
