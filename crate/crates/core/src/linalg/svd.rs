use nalgebra::{linalg::SVD, DMatrix};

use super::{DenseMatrix, RealVector};
use crate::error::{Error, Result};

/// Largest `min(rows, cols)` handled by one-sided Jacobi; bigger matrices
/// go through bidiagonalization and implicit-shift QR.
pub const JACOBI_MAX_DIM: usize = 64;

const JACOBI_MAX_SWEEPS: usize = 80;

/// Singular values in nonincreasing order, `min(rows, cols)` of them.
pub fn singular_values(a: &DenseMatrix) -> Result<RealVector> {
    let mut s = if a.rows().min(a.cols()) <= JACOBI_MAX_DIM {
        jacobi_singular_values(a)?
    } else {
        bidiagonal_qr_singular_values(a)?
    };
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(RealVector::from(s))
}

/// One-sided (Hestenes) Jacobi: orthogonalize the columns of the taller
/// orientation; the column norms are then the singular values.
fn jacobi_singular_values(a: &DenseMatrix) -> Result<Vec<f64>> {
    // Work on columns of length `m >= n`, stored contiguously.
    let (m, n, cols): (usize, usize, Vec<Vec<f64>>) = if a.rows() >= a.cols() {
        (
            a.rows(),
            a.cols(),
            (0..a.cols()).map(|j| a.column(j)).collect(),
        )
    } else {
        (
            a.cols(),
            a.rows(),
            (0..a.rows()).map(|i| a.row(i).to_vec()).collect(),
        )
    };
    let mut cols = cols;
    debug_assert!(cols.iter().all(|c| c.len() == m));

    let scale = a.norm_max();
    if scale == 0.0 {
        return Ok(vec![0.0; n]);
    }
    // Rescale to keep squared norms comfortably inside the exponent range.
    for c in cols.iter_mut() {
        for v in c.iter_mut() {
            *v /= scale;
        }
    }

    let eps = f64::EPSILON;
    // Columns whose squared norm falls below this are numerically zero;
    // rotating them against others only stirs rounding noise.
    let negligible = eps * eps * cols.iter().flatten().map(|v| v * v).sum::<f64>();
    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (&cols[p], &cols[q]);
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = 0.0;
                    for k in 0..m {
                        alpha += cp[k] * cp[k];
                        beta += cq[k] * cq[k];
                        gamma += cp[k] * cq[k];
                    }
                    (alpha, beta, gamma)
                };
                if gamma == 0.0
                    || gamma.abs() <= eps * (alpha * beta).sqrt()
                    || alpha.min(beta) <= negligible
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = cols.split_at_mut(q);
                let (cp, cq) = (&mut lo[p], &mut hi[0]);
                for k in 0..m {
                    let (u, v) = (cp[k], cq[k]);
                    cp[k] = c * u - s * v;
                    cq[k] = s * u + c * v;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence);
    }
    Ok(cols
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt() * scale)
        .collect())
}

fn bidiagonal_qr_singular_values(a: &DenseMatrix) -> Result<Vec<f64>> {
    let m = DMatrix::from_row_slice(a.rows(), a.cols(), a.as_slice());
    let svd = SVD::try_new(m, false, false, f64::EPSILON, 0).ok_or(Error::NoConvergence)?;
    Ok(svd.singular_values.iter().copied().collect())
}
