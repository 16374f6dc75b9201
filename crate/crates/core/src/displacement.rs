//! The displacement operator `∇_{x,y}(A) = Diag(x)A − A Diag(y)`, the
//! measure `β_F`, and Algorithm 4.
//!
//! Algorithm 4 minimizes `‖∇_{x,y}(A) − 11ᵀ‖_F` over generator pairs. With
//! `B = A∘A` the normal equations split into a diagonal block for `x` and
//! the Schur complement `S = Diag(d⁽²⁾) − Bᵀ Diag(d⁽¹⁾)⁻¹ B` for `y`. `S` is
//! a singular M-matrix with `S1 = 0`, so the solve uses `S − 11ᵀ/n`.

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, LuFactor, RealVector};
use crate::model::{normalize_generators, GeneratorPair};

/// `result_ij = A_ij (x_i − y_j)`.
pub fn displacement_apply(a: &DenseMatrix, g: &GeneratorPair) -> Result<DenseMatrix> {
    if a.rows() != g.x.len() || a.cols() != g.y.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix with generators of lengths {} and {}",
            a.rows(),
            a.cols(),
            g.x.len(),
            g.y.len()
        )));
    }
    Ok(DenseMatrix::from_fn(a.rows(), a.cols(), |i, j| {
        a[(i, j)] * (g.x[i] - g.y[j])
    }))
}

/// Row and column reductions of `A` and `A∘A` that make up the normal
/// equations.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalEquationParts {
    /// `A∘A`
    pub b: DenseMatrix,
    /// row sums of `B`
    pub d1: RealVector,
    /// column sums of `B`
    pub d2: RealVector,
    /// row sums of `A`
    pub b1: RealVector,
    /// column sums of `A`
    pub b2: RealVector,
}

pub fn build_normal_parts(a: &DenseMatrix) -> Result<NormalEquationParts> {
    a.ensure_square()?;
    a.ensure_zero_free()?;
    let b = a.hadamard(a);
    Ok(NormalEquationParts {
        d1: b.row_sums().into(),
        d2: b.col_sums().into(),
        b1: a.row_sums().into(),
        b2: a.col_sums().into(),
        b,
    })
}

impl NormalEquationParts {
    pub fn dim(&self) -> usize {
        self.b.rows()
    }

    /// `S = Diag(d⁽²⁾) − Bᵀ Diag(d⁽¹⁾)⁻¹ B`.
    pub fn schur(&self) -> DenseMatrix {
        let n = self.dim();
        // G = Diag(d1)^{-1/2} B, then S = Diag(d2) - GᵀG
        let mut g = self.b.clone();
        for i in 0..n {
            let s = 1.0 / self.d1[i].sqrt();
            for v in g.row_mut(i) {
                *v *= s;
            }
        }
        let gtg = g.transpose().matmul(&g);
        let mut s = gtg.scale(-1.0);
        for j in 0..n {
            s[(j, j)] += self.d2[j];
        }
        // exact symmetry helps the Hermitian structure survive rounding
        for i in 0..n {
            for j in i + 1..n {
                let m = 0.5 * (s[(i, j)] + s[(j, i)]);
                s[(i, j)] = m;
                s[(j, i)] = m;
            }
        }
        s
    }

    /// `c = Bᵀ Diag(d⁽¹⁾)⁻¹ b⁽¹⁾ − b⁽²⁾`.
    pub fn rhs(&self) -> Vec<f64> {
        let scaled: Vec<f64> = self
            .b1
            .iter()
            .zip(self.d1.iter())
            .map(|(b, d)| b / d)
            .collect();
        self.b
            .matvec_t(&scaled)
            .into_iter()
            .zip(self.b2.iter())
            .map(|(u, b2)| u - b2)
            .collect()
    }

    /// `x = Diag(d⁽¹⁾)⁻¹ (b⁽¹⁾ + B y)`.
    pub fn x_from_y(&self, y: &[f64]) -> Vec<f64> {
        self.b
            .matvec(y)
            .into_iter()
            .enumerate()
            .map(|(i, by)| (self.b1[i] + by) / self.d1[i])
            .collect()
    }
}

/// Algorithm 4: the least-squares minimizer of `‖∇_{x,y}(A) − 11ᵀ‖_F`,
/// normalized to zero total sum.
pub fn alg4_recover(a: &DenseMatrix) -> Result<GeneratorPair> {
    let parts = build_normal_parts(a)?;
    let n = parts.dim();
    let inv_n = 1.0 / n as f64;
    let shifted = parts.schur().map(|v| v - inv_n);
    let y = LuFactor::new(&shifted)?.solve(&parts.rhs())?;
    let x = parts.x_from_y(&y);
    Ok(normalize_generators(&GeneratorPair {
        x: x.into(),
        y: y.into(),
    }))
}

/// `‖∇_{x,y}(A) − 11ᵀ‖_F` for a given generator pair.
pub fn displacement_residual(a: &DenseMatrix, g: &GeneratorPair) -> Result<f64> {
    Ok(displacement_apply(a, g)?.map(|v| v - 1.0).norm_frobenius())
}

/// `β_F(A)`, the residual at the Algorithm 4 minimizer.
pub fn beta_frobenius(a: &DenseMatrix) -> Result<f64> {
    let g = alg4_recover(a)?;
    displacement_residual(a, &g)
}

/// `(κ_F / ‖A^[-1]‖_max, κ_F ‖A‖_max, β_F)`; the theorem says the third
/// lies between the first two.
pub fn beta_kappa_sandwich_check(a: &DenseMatrix, kappa_f: f64) -> Result<(f64, f64, f64)> {
    a.ensure_zero_free()?;
    let hinv_max = a
        .as_slice()
        .iter()
        .map(|v| 1.0 / v.abs())
        .fold(0.0, f64::max);
    let beta = beta_frobenius(a)?;
    Ok((kappa_f / hinv_max, kappa_f * a.norm_max(), beta))
}
