//! Cauchyness measures and the certificates built on them.
//!
//! * `κ_F(A)`: Frobenius distance of `A^[-1]` from 𝒟, exact via Algorithm 2.
//! * `κ_max(A)`: Chebyshev distance, computed exactly only for `n ≤ 3`.
//! * `σ₃(Ẑ)`: third singular value of the bordered matrix
//!   `Ẑ = [[0, 1ᵀ], [1, A^[-1]]]`, which vanishes exactly on Cauchy matrices.

use serde::Serialize;

use crate::displacement::{alg4_recover, displacement_residual};
use crate::error::{Error, Result};
use crate::linalg::{hinv, singular_values, DenseMatrix, LuFactor};
use crate::model::{check_cauchy_points, delta, GeneratorPair};
use crate::projectors::{alg1_recover, alg2_from_reciprocal};

/// Largest size accepted by [`kappa_max_oracle`].
pub const KAPPA_MAX_ORACLE_MAX_N: usize = 3;

/// Largest size for which [`cur_pivot_ratio`] enumerates all 2×2 minors.
pub const CUR_PIVOT_CHECK_MAX_N: usize = 20;

/// `‖A^[-1] − Δ(alg2(A))‖_F`.
pub fn kappa_f(a: &DenseMatrix) -> Result<f64> {
    a.ensure_square()?;
    let z = hinv(a)?;
    Ok(kappa_f_of_reciprocal(&z))
}

fn kappa_f_of_reciprocal(z: &DenseMatrix) -> f64 {
    z.sub(&delta(&alg2_from_reciprocal(z))).norm_frobenius()
}

/// Exact `κ_max(A) = min_{x,y} ‖A^[-1] − Δ(x, y)‖_max` for `n ≤ 3`.
///
/// The Chebyshev fit is the linear program
/// `min t  s.t.  ±(Z_ij − x_i + y_j) ≤ t` with the gauge `x₁ = 0`. Its
/// feasible set is pointed, so the optimum sits at a vertex; all vertices
/// are enumerated by solving every choice of `2n` active constraints.
pub fn kappa_max_oracle(a: &DenseMatrix) -> Result<f64> {
    a.ensure_square()?;
    let n = a.rows();
    if n > KAPPA_MAX_ORACLE_MAX_N {
        return Err(Error::SizeTooLarge {
            n,
            max: KAPPA_MAX_ORACLE_MAX_N,
        });
    }
    let z = hinv(a)?;
    if n == 1 {
        return Ok(0.0);
    }

    // unknowns u = (x_2..x_n, y_1..y_n, t); constraint rows g·u ≤ h
    let dim = 2 * n;
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::with_capacity(2 * n * n);
    for i in 0..n {
        for j in 0..n {
            for s in [1.0, -1.0] {
                // s(Z_ij − x_i + y_j) ≤ t
                let mut g = vec![0.0; dim];
                if i > 0 {
                    g[i - 1] = -s;
                }
                g[n - 1 + j] = s;
                g[dim - 1] = -1.0;
                rows.push((g, -s * z[(i, j)]));
            }
        }
    }

    let scale = z.norm_max();
    let feas_tol = 1e-12 * (1.0 + scale);
    let fallback = z.sub(&delta(&alg2_from_reciprocal(&z))).norm_max();
    let mut best = fallback;
    let mut chosen: Vec<usize> = (0..dim).collect();
    loop {
        let m = DenseMatrix::from_fn(dim, dim, |r, c| rows[chosen[r]].0[c]);
        if let Ok(lu) = LuFactor::new(&m) {
            let rhs: Vec<f64> = chosen.iter().map(|&k| rows[k].1).collect();
            if let Ok(u) = lu.solve(&rhs) {
                let t = u[dim - 1];
                if t < best
                    && rows.iter().all(|(g, h)| {
                        g.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>() <= h + feas_tol
                    })
                {
                    best = t;
                }
            }
        }
        if !next_combination(&mut chosen, rows.len()) {
            break;
        }
    }
    Ok(best.max(0.0))
}

/// Advances `c` to the next `k`-subset of `0..m` in lexicographic order.
fn next_combination(c: &mut [usize], m: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < m - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Entrywise certificate: with `β = max |1 − A_ij D_ij| < 1` for `D = Δ(g)`,
/// the matrix `cau(g)` is within relative distance `β/(1−β)` of `A`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct APosterioriCertificate {
    pub beta: f64,
    pub valid: bool,
    /// `β/(1 − β)`, bounding `‖A − C‖⋆/‖A‖⋆` in both norms.
    pub rel_error_bound: Option<f64>,
    /// `(1 − β)/‖A‖_max ≤ min |x_i − y_j|`.
    pub separation_bound: Option<f64>,
    /// `‖A‖_F/(1 − β) ≥ ‖C‖_F`.
    pub stability_bound_frob: Option<f64>,
    /// `‖A‖_max/(1 − β) ≥ ‖C‖_max`.
    pub stability_bound_max: Option<f64>,
}

pub fn a_posteriori_certificate(
    a: &DenseMatrix,
    g: &GeneratorPair,
) -> Result<APosterioriCertificate> {
    a.ensure_square()?;
    a.ensure_zero_free()?;
    if g.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix with generators of length {}",
            a.rows(),
            a.cols(),
            g.len()
        )));
    }
    let n = a.rows();
    let mut beta: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            beta = beta.max((1.0 - a[(i, j)] * (g.x[i] - g.y[j])).abs());
        }
    }
    let valid = beta < 1.0;
    let bound = |v: f64| valid.then_some(v);
    Ok(APosterioriCertificate {
        beta,
        valid,
        rel_error_bound: bound(beta / (1.0 - beta)),
        separation_bound: bound((1.0 - beta) / a.norm_max()),
        stability_bound_frob: bound(a.norm_frobenius() / (1.0 - beta)),
        stability_bound_max: bound(a.norm_max() / (1.0 - beta)),
    })
}

/// `[[0, 1ᵀ], [1, A^[-1]]]`.
pub fn bordered_matrix(a: &DenseMatrix) -> Result<DenseMatrix> {
    a.ensure_square()?;
    let z = hinv(a)?;
    let n = a.rows();
    Ok(DenseMatrix::from_fn(n + 1, n + 1, |i, j| match (i, j) {
        (0, 0) => 0.0,
        (0, _) | (_, 0) => 1.0,
        _ => z[(i - 1, j - 1)],
    }))
}

/// Third singular value, zero when there are fewer than three.
pub fn sigma3(m: &DenseMatrix) -> Result<f64> {
    let s = singular_values(m)?;
    Ok(s.get(2).copied().unwrap_or(0.0))
}

/// How `A` is scaled and permuted before the CUR argument.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CurPivot {
    /// Bring an entry of maximum modulus of `A` to `(1, 1)` and scale it
    /// to modulus one.
    ///
    /// This leaves `A^[-1]` unbounded, so the 2×2 pivot of `Ẑ` need not
    /// dominate the other minors and the `6σ₃` bound can fail.
    MaxModulusOfA,
    /// Bring an entry of minimum modulus of `A` to `(1, 1)` and scale it to
    /// modulus one. Then `‖A^[-1]‖_max = 1`, every 2×2 minor of `Ẑ` is at
    /// most 2 in modulus and the pivot minor is exactly 1.
    #[default]
    MaxModulusOfInverse,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurNormalization {
    pub matrix: DenseMatrix,
    /// Positive factor with `matrix = P (A / scale) Q`.
    pub scale: f64,
    /// Entry `(i, j)` of `matrix` is `A[row_perm[i], col_perm[j]] / scale`.
    pub row_perm: Vec<usize>,
    pub col_perm: Vec<usize>,
}

/// Normalization with the maximum-modulus entry of `A` moved to `(1, 1)`
/// and `max |A_ij| = 1`. Ties go to the first entry in row-major order.
pub fn normalize_for_cur(a: &DenseMatrix) -> Result<(DenseMatrix, f64, Vec<usize>, Vec<usize>)> {
    let c = normalize_for_cur_with(a, CurPivot::MaxModulusOfA)?;
    Ok((c.matrix, c.scale, c.row_perm, c.col_perm))
}

pub fn normalize_for_cur_with(a: &DenseMatrix, pivot: CurPivot) -> Result<CurNormalization> {
    a.ensure_square()?;
    a.ensure_zero_free()?;
    let n = a.rows();
    let better = |cand: f64, cur: f64| match pivot {
        CurPivot::MaxModulusOfA => cand > cur,
        CurPivot::MaxModulusOfInverse => cand < cur,
    };
    let (mut bi, mut bj) = (0, 0);
    for i in 0..n {
        for j in 0..n {
            if better(a[(i, j)].abs(), a[(bi, bj)].abs()) {
                (bi, bj) = (i, j);
            }
        }
    }
    let scale = a[(bi, bj)].abs();
    let mut row_perm: Vec<usize> = (0..n).collect();
    let mut col_perm: Vec<usize> = (0..n).collect();
    row_perm.swap(0, bi);
    col_perm.swap(0, bj);
    let matrix = a.permuted(&row_perm, &col_perm).scale(1.0 / scale);
    Ok(CurNormalization {
        matrix,
        scale,
        row_perm,
        col_perm,
    })
}

/// `Y − Ẑ₂₁ Ẑ₁₁⁻¹ Ẑ₁₂` for the leading 2×2 block of a bordered matrix.
pub fn schur_complement(zhat: &DenseMatrix) -> Result<DenseMatrix> {
    let m = zhat.rows();
    if m < 2 || !zhat.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "Schur complement needs a square matrix of size at least 2, got {}x{}",
            zhat.rows(),
            zhat.cols()
        )));
    }
    let pivot = DenseMatrix::from_fn(2, 2, |i, j| zhat[(i, j)]);
    let inv = LuFactor::new(&pivot)?.inverse()?;
    let k = m - 2;
    let left = DenseMatrix::from_fn(k, 2, |i, j| zhat[(i + 2, j)]);
    let top = DenseMatrix::from_fn(2, k, |i, j| zhat[(i, j + 2)]);
    let corr = left.matmul(&inv).matmul(&top);
    Ok(DenseMatrix::from_fn(k, k, |i, j| {
        zhat[(i + 2, j + 2)] - corr[(i, j)]
    }))
}

/// `|det Ẑ₁₁| / max |det B|` over all 2×2 submatrices `B` of `Ẑ`; the CUR
/// bound with factor 6 needs this to be at least 1/2.
pub fn cur_pivot_ratio(zhat: &DenseMatrix) -> Result<f64> {
    let m = zhat.rows();
    if m - 1 > CUR_PIVOT_CHECK_MAX_N {
        return Err(Error::SizeTooLarge {
            n: m - 1,
            max: CUR_PIVOT_CHECK_MAX_N,
        });
    }
    let det = |r: (usize, usize), c: (usize, usize)| {
        zhat[(r.0, c.0)] * zhat[(r.1, c.1)] - zhat[(r.0, c.1)] * zhat[(r.1, c.0)]
    };
    let mut worst: f64 = 0.0;
    for r0 in 0..m {
        for r1 in r0 + 1..m {
            for c0 in 0..m {
                for c1 in c0 + 1..m {
                    worst = worst.max(det((r0, r1), (c0, c1)).abs());
                }
            }
        }
    }
    Ok(det((0, 1), (0, 1)).abs() / worst)
}

/// `(‖A'^[-1] − Δ(alg1(A'))‖_max, 6 σ₃(Ẑ(A')))` where `A'` is `A` after the
/// minimum-modulus normalization of [`CurPivot::MaxModulusOfInverse`].
pub fn cur_certificate(a: &DenseMatrix) -> Result<(f64, f64)> {
    cur_certificate_with(a, CurPivot::default())
}

pub fn cur_certificate_with(a: &DenseMatrix, pivot: CurPivot) -> Result<(f64, f64)> {
    let an = normalize_for_cur_with(a, pivot)?.matrix;
    let z = hinv(&an)?;
    let g = alg1_recover(&an)?;
    let residual = z.sub(&delta(&g)).norm_max();
    Ok((residual, 6.0 * sigma3(&bordered_matrix(&an)?)?))
}

/// `(κ_max(A')/6, σ₃(Ẑ(A')), κ_F(A'))` with `A'` normalized as in
/// [`cur_certificate`]. The lower entry is `None` above the oracle size.
pub fn sigma3_sandwich_check(a: &DenseMatrix) -> Result<(Option<f64>, f64, f64)> {
    let an = normalize_for_cur_with(a, CurPivot::default())?.matrix;
    let lower = if an.rows() <= KAPPA_MAX_ORACLE_MAX_N {
        Some(kappa_max_oracle(&an)? / 6.0)
    } else {
        None
    };
    Ok((lower, sigma3(&bordered_matrix(&an)?)?, kappa_f(&an)?))
}

/// Quantities tied to the normalized matrix of the CUR argument.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurReport {
    pub scale: f64,
    pub sigma3: f64,
    pub kappa_f: f64,
    /// `κ_max/6`, present for `n ≤ 3`.
    pub kappa_max_lower: Option<f64>,
    pub residual_max_alg1: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub n: usize,
    pub kappa_f: f64,
    pub beta_f: f64,
    /// `σ₃` of the bordered matrix of `A` itself.
    pub sigma3: f64,
    pub residual_max_alg1: f64,
    pub residual_f_alg2: f64,
    pub norm_max_a: f64,
    pub norm_max_hinv_a: f64,
    /// Exact `κ_max` for `n ≤ 3`.
    pub kappa_max: Option<f64>,
    /// Smallest Chebyshev residual among Algorithms 1, 2 and 4.
    pub kappa_max_upper: f64,
    /// `κ_F/‖A^[-1]‖_max ≤ β_F ≤ κ_F ‖A‖_max`
    pub beta_lower: f64,
    pub beta_upper: f64,
    pub cur: CurReport,
}

/// All measures of one matrix.
pub fn measure(a: &DenseMatrix) -> Result<DiagnosticsReport> {
    a.ensure_square()?;
    let n = a.rows();
    let z = hinv(a)?;
    let g1 = alg1_recover(a)?;
    let g2 = alg2_from_reciprocal(&z);
    let g4 = alg4_recover(a)?;
    let r1 = z.sub(&delta(&g1));
    let r2 = z.sub(&delta(&g2));
    let r4 = z.sub(&delta(&g4));
    let kf = r2.norm_frobenius();
    let beta_f = displacement_residual(a, &g4)?;
    let norm_max_hinv_a = z.norm_max();

    let cn = normalize_for_cur_with(a, CurPivot::default())?;
    let (cur_res, cur_bound) = cur_certificate(a)?;
    let (lower, s3n, kfn) = sigma3_sandwich_check(a)?;
    let kappa_max = if n <= KAPPA_MAX_ORACLE_MAX_N {
        Some(kappa_max_oracle(a)?)
    } else {
        None
    };

    Ok(DiagnosticsReport {
        n,
        kappa_f: kf,
        beta_f,
        sigma3: sigma3(&bordered_matrix(a)?)?,
        residual_max_alg1: r1.norm_max(),
        residual_f_alg2: kf,
        norm_max_a: a.norm_max(),
        norm_max_hinv_a,
        kappa_max,
        kappa_max_upper: r1.norm_max().min(r2.norm_max()).min(r4.norm_max()),
        beta_lower: kf / norm_max_hinv_a,
        beta_upper: kf * a.norm_max(),
        cur: CurReport {
            scale: cn.scale,
            sigma3: s3n,
            kappa_f: kfn,
            kappa_max_lower: lower,
            residual_max_alg1: cur_res,
            bound: cur_bound,
        },
    })
}

/// Whether the a-posteriori certificate is consistent with the recovered
/// points: valid certificates imply separated points.
pub fn certificate_separation_holds(cert: &APosterioriCertificate, g: &GeneratorPair) -> bool {
    match cert.separation_bound {
        None => true,
        Some(b) => match check_cauchy_points(g, 0.0) {
            Ok(p) => p.min_separation() >= b - 1e-12,
            Err(_) => false,
        },
    }
}
