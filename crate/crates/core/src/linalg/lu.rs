use super::{DenseMatrix, RealVector};
use crate::error::{Error, Result};

/// Panel width of the blocked factorization.
const BLOCK: usize = 64;

/// Relative pivot threshold below which a matrix is declared singular.
const PIVOT_TOL: f64 = 1e-14;

/// LU factorization with partial pivoting, `P A = L U`, stored in place
/// (unit lower triangle below the diagonal, `U` on and above it).
#[derive(Clone, Debug)]
pub struct LuFactor {
    n: usize,
    lu: Vec<f64>,
    /// `perm[k]` is the original row now in position `k`.
    perm: Vec<usize>,
}

impl LuFactor {
    /// Right-looking blocked factorization; the trailing update is a GEMM.
    pub fn new(m: &DenseMatrix) -> Result<Self> {
        m.ensure_square()?;
        let n = m.rows();
        let tol = PIVOT_TOL * m.norm_max();
        let mut a = m.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();

        for kb in (0..n).step_by(BLOCK) {
            let kend = (kb + BLOCK).min(n);

            // Unblocked factorization of the column panel kb..kend.
            for k in kb..kend {
                let mut p = k;
                let mut best = a[k * n + k].abs();
                for i in k + 1..n {
                    let v = a[i * n + k].abs();
                    if v > best {
                        best = v;
                        p = i;
                    }
                }
                if best <= tol || best == 0.0 {
                    return Err(Error::Singular {
                        step: k + 1,
                        pivot: best,
                    });
                }
                if p != k {
                    for j in 0..n {
                        a.swap(k * n + j, p * n + j);
                    }
                    perm.swap(k, p);
                }
                let pivot = a[k * n + k];
                let (head, tail) = a.split_at_mut((k + 1) * n);
                let prow = &head[k * n + k + 1..k * n + kend];
                for i in 0..n - k - 1 {
                    let row = &mut tail[i * n..(i + 1) * n];
                    row[k] /= pivot;
                    let l = row[k];
                    if l != 0.0 {
                        for (r, &u) in row[k + 1..kend].iter_mut().zip(prow) {
                            *r -= l * u;
                        }
                    }
                }
            }

            if kend == n {
                break;
            }

            // U12 = L11^{-1} A12.
            for k in kb..kend {
                let (head, tail) = a.split_at_mut((k + 1) * n);
                let urow = &head[k * n + kend..(k + 1) * n];
                for i in 0..kend - k - 1 {
                    let row = &mut tail[i * n..(i + 1) * n];
                    let l = row[k];
                    if l != 0.0 {
                        for (r, &u) in row[kend..].iter_mut().zip(urow) {
                            *r -= l * u;
                        }
                    }
                }
            }

            // A22 -= L21 U12.
            let rest = n - kend;
            let width = kend - kb;
            let base = a.as_mut_ptr();
            // SAFETY: L21 occupies rows kend.., columns kb..kend; U12 rows
            // kb..kend, columns kend..; A22 rows kend.., columns kend... The
            // three regions are disjoint and lie inside the n*n buffer.
            unsafe {
                matrixmultiply::dgemm(
                    rest,
                    width,
                    rest,
                    -1.0,
                    base.add(kend * n + kb),
                    n as isize,
                    1,
                    base.add(kb * n + kend),
                    n as isize,
                    1,
                    1.0,
                    base.add(kend * n + kend),
                    n as isize,
                    1,
                );
            }
        }

        Ok(Self { n, lu: a, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A z = b` with the stored factors.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side has length {}, expected {n}",
                b.len()
            )));
        }
        let mut z: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: f64 = row.iter().zip(&z[..i]).map(|(l, v)| l * v).sum();
            z[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n..(i + 1) * n];
            let s: f64 = row[i + 1..]
                .iter()
                .zip(&z[i + 1..])
                .map(|(u, v)| u * v)
                .sum();
            z[i] = (z[i] - s) / row[i];
        }
        Ok(z)
    }

    /// Explicit inverse, column by column. Only meant for small matrices.
    pub fn inverse(&self) -> Result<DenseMatrix> {
        let n = self.n;
        let mut out = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let e = RealVector::unit(n, j);
            let col = self.solve(&e)?;
            for (i, v) in col.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        Ok(out)
    }
}

/// Solves the square system `M z = b` by LU with partial pivoting.
pub fn solve_linear(m: &DenseMatrix, b: &[f64]) -> Result<RealVector> {
    let lu = LuFactor::new(m)?;
    Ok(RealVector::from(lu.solve(b)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn residual(m: &DenseMatrix, z: &[f64], b: &[f64]) -> f64 {
        let mz = m.matvec(z);
        mz.iter()
            .zip(b)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn identity_and_diagonal() {
        let b = [1.0, -2.0, 3.0];
        let z = solve_linear(&DenseMatrix::identity(3), &b).unwrap();
        assert_eq!(z.as_slice(), &b);
        let z = solve_linear(&DenseMatrix::diag(&[2.0, 4.0]), &[2.0, 8.0]).unwrap();
        assert_eq!(z.as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let m = DenseMatrix::constant(2, 2, 1.0);
        assert!(matches!(
            solve_linear(&m, &[1.0, 2.0]),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn random_systems_have_small_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &n in &[1usize, 2, 5, 17, 50, 63, 64, 65, 130, 200] {
            let m = DenseMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
            let b: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            let z = solve_linear(&m, &b).unwrap();
            let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(residual(&m, &z, &b) / bn <= 1e-10, "n = {n}");
        }
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let m = DenseMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let z = solve_linear(&m, &[3.0, 5.0]).unwrap();
        assert_eq!(z.as_slice(), &[5.0, 3.0]);
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 70;
        let m = DenseMatrix::from_fn(n, n, |i, j| {
            rng.random::<f64>() + if i == j { n as f64 } else { 0.0 }
        });
        let inv = LuFactor::new(&m).unwrap().inverse().unwrap();
        let err = m.matmul(&inv).sub(&DenseMatrix::identity(n)).norm_max();
        assert!(err < 1e-13, "{err}");
    }
}
