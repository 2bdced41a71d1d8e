//! Row-wise ILUT preconditioning of a dense system and condition-number
//! estimation.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dense_condition, LinearOperator};

/// Pivots below this fraction of the row norm are replaced.
const PIVOT_FLOOR: f64 = 1e-14;

/// Incomplete factors `L` (unit lower, stored strictly below the diagonal)
/// and `U` (upper, diagonal kept separately).
#[derive(Debug, Clone)]
pub struct IluFactors {
    n: usize,
    lower: Vec<Vec<(usize, f64)>>,
    upper: Vec<Vec<(usize, f64)>>,
    diag: Vec<f64>,
    pub tau: f64,
    pub max_fill: usize,
    /// Rows whose pivot was replaced by the floor value.
    pub replaced_pivots: usize,
    /// Symmetric permutation the factors were computed in: row `k` of the
    /// factors is row `order[k]` of `A`.
    order: Option<Vec<usize>>,
}

impl IluFactors {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored off-diagonal entries in L plus U, and the diagonal.
    pub fn nnz(&self) -> usize {
        self.lower.iter().map(Vec::len).sum::<usize>()
            + self.upper.iter().map(Vec::len).sum::<usize>()
            + self.n
    }

    /// Fraction of the dense `n²` pattern kept.
    pub fn fill_ratio(&self) -> f64 {
        self.nnz() as f64 / (self.n * self.n) as f64
    }

    pub fn lower_dense(&self) -> DMatrix<f64> {
        let mut l = DMatrix::identity(self.n, self.n);
        for (i, row) in self.lower.iter().enumerate() {
            for &(j, v) in row {
                l[(i, j)] = v;
            }
        }
        l
    }

    pub fn upper_dense(&self) -> DMatrix<f64> {
        let mut u = DMatrix::zeros(self.n, self.n);
        for (i, row) in self.upper.iter().enumerate() {
            u[(i, i)] = self.diag[i];
            for &(j, v) in row {
                u[(i, j)] = v;
            }
        }
        u
    }

    pub fn order(&self) -> Option<&[usize]> {
        self.order.as_deref()
    }

    /// `U⁻¹ L⁻¹ v` by forward and back substitution, in the original
    /// unknown order.
    pub fn solve(&self, v: &DVector<f64>) -> DVector<f64> {
        assert_eq!(v.len(), self.n, "preconditioner dimension mismatch");
        let mut y = match &self.order {
            Some(o) => DVector::from_fn(self.n, |k, _| v[o[k]]),
            None => v.clone(),
        };
        for i in 0..self.n {
            let s: f64 = self.lower[i].iter().map(|&(j, l)| l * y[j]).sum();
            y[i] -= s;
        }
        for i in (0..self.n).rev() {
            let s: f64 = self.upper[i].iter().map(|&(j, u)| u * y[j]).sum();
            y[i] = (y[i] - s) / self.diag[i];
        }
        match &self.order {
            Some(o) => {
                let mut out = DVector::zeros(self.n);
                for (k, &i) in o.iter().enumerate() {
                    out[i] = y[k];
                }
                out
            }
            None => y,
        }
    }

    /// `L·U` mapped back to the original unknown order.
    pub fn product_dense(&self) -> DMatrix<f64> {
        let lu = self.lower_dense() * self.upper_dense();
        match &self.order {
            Some(o) => {
                let mut out = DMatrix::zeros(self.n, self.n);
                for (k, &i) in o.iter().enumerate() {
                    for (l, &j) in o.iter().enumerate() {
                        out[(i, j)] = lu[(k, l)];
                    }
                }
                out
            }
            None => lu,
        }
    }
}

/// Keeps the `p` largest-magnitude entries.
fn keep_largest(entries: &mut Vec<(usize, f64)>, p: usize) {
    if entries.len() > p {
        entries.select_nth_unstable_by(p, |a, b| b.1.abs().total_cmp(&a.1.abs()));
        entries.truncate(p);
    }
    entries.sort_unstable_by_key(|e| e.0);
}

/// ILUT with dual dropping: during elimination and after, entries smaller
/// than `tau·‖row‖₂` are dropped, and at most `max_fill` entries survive in
/// each of the L and U parts of a row. The dense matrix is read one row at a
/// time.
pub fn ilut_with_fill(a: &DMatrix<f64>, tau: f64, max_fill: usize) -> Result<IluFactors> {
    ilut_ordered(a, tau, max_fill, None)
}

/// ILUT of `Π·A·Πᵀ` where `Π` takes row `order[k]` to row `k`.
pub fn ilut_ordered(a: &DMatrix<f64>, tau: f64, max_fill: usize, order: Option<&[usize]>) -> Result<IluFactors> {
    if !a.is_square() {
        return Err(Error::Dimension {
            expected: a.nrows(),
            got: a.ncols(),
        });
    }
    let n = a.nrows();
    if let Some(o) = order {
        let mut seen = vec![false; n];
        if o.len() != n || o.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true)) {
            return Err(Error::Domain("factor order is not a permutation".into()));
        }
    }
    let at = |i: usize| order.map_or(i, |o| o[i]);
    let mut lower = Vec::with_capacity(n);
    let mut upper: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    let mut diag: Vec<f64> = Vec::with_capacity(n);
    let mut replaced = 0;
    let mut w = vec![0.0; n];

    for i in 0..n {
        let ai = at(i);
        for (j, slot) in w.iter_mut().enumerate() {
            *slot = a[(ai, at(j))];
        }
        let row_norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        if row_norm == 0.0 {
            return Err(Error::SingularPivot(i));
        }
        let drop = tau * row_norm;

        for k in 0..i {
            if w[k] == 0.0 {
                continue;
            }
            let factor = w[k] / diag[k];
            if factor.abs() < drop {
                w[k] = 0.0;
                continue;
            }
            w[k] = factor;
            for &(j, u) in &upper[k] {
                w[j] -= factor * u;
            }
        }

        let mut l_row: Vec<(usize, f64)> = (0..i)
            .filter(|&j| w[j] != 0.0 && w[j].abs() >= drop)
            .map(|j| (j, w[j]))
            .collect();
        let mut u_row: Vec<(usize, f64)> = ((i + 1)..n)
            .filter(|&j| w[j] != 0.0 && w[j].abs() >= drop)
            .map(|j| (j, w[j]))
            .collect();
        keep_largest(&mut l_row, max_fill);
        keep_largest(&mut u_row, max_fill);

        let mut pivot = w[i];
        if pivot.abs() < PIVOT_FLOOR * row_norm {
            pivot = if pivot < 0.0 { -1.0 } else { 1.0 } * PIVOT_FLOOR * row_norm;
            replaced += 1;
        }
        lower.push(l_row);
        upper.push(u_row);
        diag.push(pivot);
    }

    Ok(IluFactors {
        n,
        lower,
        upper,
        diag,
        tau,
        max_fill,
        replaced_pivots: replaced,
        order: order.map(<[usize]>::to_vec),
    })
}

/// ILUT without a fill cap: only the drop tolerance sparsifies.
pub fn ilut(a: &DMatrix<f64>, tau: f64) -> Result<IluFactors> {
    ilut_with_fill(a, tau, usize::MAX)
}

/// Left preconditioner `P` with `P⁻¹` applied by substitution.
#[derive(Debug, Clone, Default)]
pub enum Preconditioner {
    #[default]
    Identity,
    Ilut(IluFactors),
}

/// Serializable preconditioner choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PreconditionerKind {
    Identity,
    Ilut {
        tau: f64,
        /// Cap on kept entries per row in each of L and U; unlimited when
        /// absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_fill: Option<usize>,
    },
}

impl Default for PreconditionerKind {
    fn default() -> Self {
        PreconditionerKind::ilut(1e-3)
    }
}

impl PreconditionerKind {
    pub fn ilut(tau: f64) -> Self {
        PreconditionerKind::Ilut { tau, max_fill: None }
    }

    pub fn label(&self) -> String {
        match self {
            PreconditionerKind::Identity => "identity".into(),
            PreconditionerKind::Ilut { tau, max_fill: None } => format!("ilut(tau={tau:e})"),
            PreconditionerKind::Ilut { tau, max_fill: Some(p) } => format!("ilut(tau={tau:e},p={p})"),
        }
    }
}

impl Preconditioner {
    pub fn build(kind: PreconditionerKind, a: &DMatrix<f64>) -> Result<Self> {
        Self::build_ordered(kind, a, None)
    }

    /// Factors in the symmetric permutation `order` (see [`ilut_ordered`]).
    pub fn build_ordered(kind: PreconditionerKind, a: &DMatrix<f64>, order: Option<&[usize]>) -> Result<Self> {
        match kind {
            PreconditionerKind::Identity => Ok(Preconditioner::Identity),
            PreconditionerKind::Ilut { tau, max_fill } => Ok(Preconditioner::Ilut(ilut_ordered(
                a,
                tau,
                max_fill.unwrap_or(usize::MAX),
                order,
            )?)),
        }
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        match self {
            Preconditioner::Identity => v.clone(),
            Preconditioner::Ilut(f) => f.solve(v),
        }
    }
}

/// Applies the factors: `U⁻¹(L⁻¹ v)`.
pub fn apply_precond(factors: &IluFactors, v: &DVector<f64>) -> DVector<f64> {
    factors.solve(v)
}

/// `P⁻¹A` as an operator composition; never formed explicitly.
pub struct PreconditionedOperator<'a> {
    pub a: &'a DMatrix<f64>,
    pub p: &'a Preconditioner,
}

impl LinearOperator for PreconditionedOperator<'_> {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.p.apply(&(self.a * x))
    }
}

/// Largest size handled by a dense SVD.
pub const DENSE_CONDITION_LIMIT: usize = 4096;

/// `σ_max/σ_min` of the operator. Up to [`DENSE_CONDITION_LIMIT`] the
/// operator is materialized and decomposed; above it, 50 power iterations on
/// the operator and on its inverse bound the extreme eigenvalue moduli.
/// Returns `f64::INFINITY` for singular input.
pub fn condition_estimate(op: &dyn LinearOperator, inverse: &dyn LinearOperator) -> f64 {
    let n = op.dim();
    if n <= DENSE_CONDITION_LIMIT {
        return dense_condition(&op.to_dense());
    }
    let dominant = |m: &dyn LinearOperator| -> f64 {
        let mut x = DVector::from_fn(n, |i, _| 1.0 + ((i * 7919) % 13) as f64 / 13.0);
        x /= x.norm();
        let mut lambda = 0.0;
        for _ in 0..50 {
            let y = m.apply(&x);
            lambda = y.norm();
            if !(lambda > 0.0) || !lambda.is_finite() {
                return lambda;
            }
            x = y / lambda;
        }
        lambda
    };
    let est = dominant(op) * dominant(inverse);
    if est.is_finite() {
        est
    } else {
        f64::INFINITY
    }
}
