//! Krylov subspace projection of the preconditioned system for one exterior
//! step, and recovery of the classical scale of a unit-norm inner solution.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::LinearOperator;

/// New Arnoldi vectors below this norm signal an invariant subspace.
pub const BREAKDOWN_TOL: f64 = 1e-13;

/// Loss of orthogonality, in units of machine epsilon, that triggers a second
/// Gram–Schmidt pass.
const REORTH_TOL: f64 = 16.0;

/// `C·y = d` with prolongation `U`: `C = UᵀÃU` (upper Hessenberg) and
/// `d = α·e₁`. After a breakdown at dimension `k < n_sub`, `C` is padded to
/// `diag(C_k, I)` and `U` keeps only its `k` orthonormal columns.
#[derive(Debug, Clone)]
pub struct SubspaceSystem {
    pub c: DMatrix<f64>,
    pub d: DVector<f64>,
    pub u: DMatrix<f64>,
    /// `‖e‖₂` of the residual the subspace was seeded with.
    pub alpha: f64,
    /// Krylov dimension actually reached.
    pub dim: usize,
}

impl SubspaceSystem {
    pub fn n_sub(&self) -> usize {
        self.c.nrows()
    }

    /// `U·y` using the leading `dim` coordinates; padded coordinates are
    /// ignored.
    pub fn prolongate(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.u * y.rows(0, self.dim)
    }

    /// `max|UᵀU − I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let g = self.u.transpose() * &self.u - DMatrix::identity(self.dim, self.dim);
        g.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Arnoldi with modified Gram–Schmidt from `v₁ = e/‖e‖`, giving the
/// Galerkin (FOM) projection onto the `n_sub`-dimensional Krylov space.
pub fn build_subspace(op: &dyn LinearOperator, residual: &DVector<f64>, n_sub: usize) -> Result<SubspaceSystem> {
    let n = op.dim();
    if residual.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: residual.len(),
        });
    }
    if !n_sub.is_power_of_two() || n_sub > n.next_power_of_two() {
        return Err(Error::Domain(format!(
            "subspace dimension {n_sub} must be a power of two not exceeding the system size {n}"
        )));
    }
    let alpha = residual.norm();
    if !(alpha > 0.0) {
        return Err(Error::Domain("cannot build a subspace from a zero residual".into()));
    }
    let max_dim = n_sub.min(n);
    let mut basis: Vec<DVector<f64>> = vec![residual / alpha];
    let mut h = DMatrix::<f64>::zeros(n_sub, n_sub);
    let mut dim = max_dim;

    for j in 0..max_dim {
        let mut w = op.apply(&basis[j]);
        let w_norm0 = w.norm();
        for (i, v) in basis.iter().enumerate() {
            let hij = v.dot(&w);
            h[(i, j)] = hij;
            w.axpy(-hij, v, 1.0);
        }
        // second pass; Gram–Schmidt twice keeps the basis orthogonal to
        // working precision
        let worst = basis.iter().map(|v| v.dot(&w).abs()).fold(0.0, f64::max);
        if worst > REORTH_TOL * f64::EPSILON * w.norm() {
            for (i, v) in basis.iter().enumerate() {
                let c = v.dot(&w);
                h[(i, j)] += c;
                w.axpy(-c, v, 1.0);
            }
        }
        if j + 1 == max_dim {
            break;
        }
        let norm = w.norm();
        if norm < BREAKDOWN_TOL * w_norm0.max(1.0) {
            dim = j + 1;
            break;
        }
        h[(j + 1, j)] = norm;
        basis.push(w / norm);
    }

    let mut c = DMatrix::<f64>::identity(n_sub, n_sub);
    c.view_mut((0, 0), (dim, dim)).copy_from(&h.view((0, 0), (dim, dim)));
    let u = DMatrix::from_columns(&basis[..dim]);
    let mut d = DVector::zeros(n_sub);
    d[0] = alpha;
    Ok(SubspaceSystem { c, d, u, alpha, dim })
}

/// Signed least-squares scale `α* = (Cẑ)ᵀf / ‖Cẑ‖²` minimizing
/// `‖f − α·C·ẑ‖₂`; its sign absorbs the global sign of `ẑ`.
pub fn recover_scale(c: &DMatrix<f64>, f: &DVector<f64>, z_hat: &DVector<f64>) -> Result<f64> {
    if (z_hat.norm() - 1.0).abs() > 1e-8 {
        return Err(Error::Domain(format!(
            "direction must have unit norm, got {}",
            z_hat.norm()
        )));
    }
    let cz = c * z_hat;
    let nn = cz.norm_squared();
    if nn < 1e-28 {
        return Err(Error::Singular("direction is annihilated by the subspace matrix".into()));
    }
    Ok(cz.dot(f) / nn)
}
