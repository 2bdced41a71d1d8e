//! Small dense linear-algebra helpers shared by the solvers.

use nalgebra::{DMatrix, DVector};

/// A square real linear map applied by value.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &DVector<f64>) -> DVector<f64>;

    /// Materializes the operator column by column.
    fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        let mut e = DVector::zeros(n);
        for j in 0..n {
            e[j] = 1.0;
            m.set_column(j, &self.apply(&e));
            e[j] = 0.0;
        }
        m
    }
}

impl LinearOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self * x
    }

    fn to_dense(&self) -> DMatrix<f64> {
        self.clone()
    }
}

/// Operator from a closure.
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&DVector<f64>) -> DVector<f64>> FnOperator<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnOperator { dim, f }
    }
}

impl<F: Fn(&DVector<f64>) -> DVector<f64>> LinearOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.f)(x)
    }
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// `σ_max / σ_min` from a dense SVD; infinite for singular input.
pub fn dense_condition(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) || !max.is_finite() {
        return f64::INFINITY;
    }
    max / min
}

/// Random orthogonal matrix from the QR factorization of a Gaussian-like
/// sample (uniform entries suffice for test fixtures).
pub fn random_orthogonal(n: usize, rng: &mut impl rand::Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    g.qr().q()
}

/// `Q₁·diag(s)·Q₂ᵀ` with the given singular values.
pub fn with_singular_values(s: &[f64], rng: &mut impl rand::Rng) -> DMatrix<f64> {
    let n = s.len();
    let q1 = random_orthogonal(n, rng);
    let q2 = random_orthogonal(n, rng);
    &q1 * DMatrix::from_diagonal(&DVector::from_column_slice(s)) * q2.transpose()
}

/// `Q·diag(λ)·Qᵀ` with the given eigenvalues.
pub fn symmetric_with_eigenvalues(eigs: &[f64], rng: &mut impl rand::Rng) -> DMatrix<f64> {
    let n = eigs.len();
    let q = random_orthogonal(n, rng);
    let m = &q * DMatrix::from_diagonal(&DVector::from_column_slice(eigs)) * q.transpose();
    (&m + m.transpose()) * 0.5
}
