//! Continuous Lyapunov equations `K X + X Kᴴ = F` by complex Schur reduction.
//!
//! With `K = U T Uᴴ`, the equation becomes `T Y + Y Tᴴ = Uᴴ F U`, solved one
//! column at a time from the last, each column being an upper-triangular
//! system.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

// Zero lifts the iteration cap.
const SCHUR_MAX_ITER: usize = 0;

/// Complex Schur form `K = U T Uᴴ`.
#[derive(Debug, Clone)]
pub struct ComplexSchur {
    pub unitary: DMatrix<Complex64>,
    pub upper: DMatrix<Complex64>,
}

impl ComplexSchur {
    pub fn new(k: &DMatrix<Complex64>) -> Result<Self> {
        if !k.is_square() {
            return Err(Error::LinearAlgebra("Schur decomposition needs a square matrix".into()));
        }
        if k.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::LinearAlgebra("matrix has non-finite entries".into()));
        }
        let schur = Schur::try_new(k.clone(), f64::EPSILON, SCHUR_MAX_ITER)
            .ok_or_else(|| Error::LinearAlgebra("complex Schur iteration did not converge".into()))?;
        let (unitary, mut upper) = schur.unpack();
        // Clear the strictly lower part, which holds only deflated rounding noise.
        let n = upper.nrows();
        for j in 0..n {
            for i in (j + 1)..n {
                upper[(i, j)] = Complex64::new(0.0, 0.0);
            }
        }
        Ok(Self { unitary, upper })
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.upper.diagonal().iter().copied().collect()
    }

    /// Solves `K X + X Kᴴ = F`. Needs `λ_i + conj(λ_j) ≠ 0` for every pair of
    /// eigenvalues, which holds whenever the spectrum avoids the imaginary axis
    /// pairwise.
    pub fn solve_lyapunov(&self, f: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        let n = self.upper.nrows();
        if f.nrows() != n || f.ncols() != n {
            return Err(Error::LinearAlgebra("right-hand side has the wrong shape".into()));
        }
        let u = &self.unitary;
        let rhs = u.adjoint() * f * u;
        let t = &self.upper;
        // Row-major copy so that back-substitution reads contiguous rows.
        let t_rows: Vec<Complex64> = (0..n).flat_map(|i| (0..n).map(move |k| t[(i, k)])).collect();

        let mut y = DMatrix::<Complex64>::zeros(n, n);
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        let scale = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        for j in (0..n).rev() {
            // col = F_j - Σ_{l>j} conj(T_jl) Y_l
            col.iter_mut().zip(rhs.column(j).iter()).for_each(|(c, r)| *c = *r);
            for l in (j + 1)..n {
                let coeff = t_rows[j * n + l].conj();
                if coeff == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (c, yl) in col.iter_mut().zip(y.column(l).iter()) {
                    *c -= coeff * yl;
                }
            }
            // (T + conj(T_jj) I) y_j = col, upper triangular.
            let shift = t_rows[j * n + j].conj();
            for i in (0..n).rev() {
                let row = &t_rows[i * n..(i + 1) * n];
                let mut acc = col[i];
                for k in (i + 1)..n {
                    acc -= row[k] * col[k];
                }
                let pivot = row[i] + shift;
                if pivot.norm() <= 1e-14 * scale {
                    return Err(Error::LinearAlgebra(format!(
                        "Lyapunov operator is singular: eigenvalues {} and {} sum to the imaginary axis",
                        row[i],
                        t_rows[j * n + j]
                    )));
                }
                col[i] = acc / pivot;
            }
            y.column_mut(j).iter_mut().zip(&col).for_each(|(d, v)| *d = *v);
        }
        Ok(u * y * u.adjoint())
    }
}

/// Hermitian part `(X + Xᴴ)/2`, in place.
pub fn hermitize(x: &mut DMatrix<Complex64>) {
    let n = x.nrows();
    for j in 0..n {
        x[(j, j)].im = 0.0;
        for i in (j + 1)..n {
            let v = 0.5 * (x[(i, j)] + x[(j, i)].conj());
            x[(i, j)] = v;
            x[(j, i)] = v.conj();
        }
    }
}
