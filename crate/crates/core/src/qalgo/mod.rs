//! Quantum linear solvers (HHL and VQLS) on the statevector simulator, with
//! the dilation and padding that make arbitrary real systems admissible.

mod hhl;
mod vqls;

pub use hhl::{hhl_solve, inverse_qft, qft, HhlConfig, HhlOutcome};
pub use vqls::{ansatz, vqls_solve, VqlsConfig, VqlsOutcome, VqlsTracePoint};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::qsim::{Statevector, C64};

/// `H = [[0, C], [Cᵀ, 0]]`, `g = [f; 0]`; `H·[0; z] = g` iff `C·z = f`.
pub fn hermitian_dilation(c: &DMatrix<f64>, f: &DVector<f64>) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let n = c.nrows();
    if c.ncols() != n || f.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: if c.ncols() != n { c.ncols() } else { f.len() },
        });
    }
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    h.view_mut((0, n), (n, n)).copy_from(c);
    h.view_mut((n, 0), (n, n)).copy_from(&c.transpose());
    let mut g = DVector::zeros(2 * n);
    g.rows_mut(0, n).copy_from(f);
    Ok((h, g))
}

/// `M' = diag(M, I)`, `v' = [v; 0]` at the next power-of-two size.
pub fn pad_pow2(m: &DMatrix<f64>, v: &DVector<f64>) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let n = m.nrows();
    if m.ncols() != n || v.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: if m.ncols() != n { m.ncols() } else { v.len() },
        });
    }
    let p = n.next_power_of_two().max(1);
    if p == n {
        return Ok((m.clone(), v.clone()));
    }
    let mut mp = DMatrix::identity(p, p);
    mp.view_mut((0, 0), (n, n)).copy_from(m);
    let mut vp = DVector::zeros(p);
    vp.rows_mut(0, n).copy_from(v);
    Ok((mp, vp))
}

/// Register width `1 + m + log₂(dim)` for HHL.
pub fn hhl_qubits(clock_qubits: usize, dim: usize) -> usize {
    1 + clock_qubits + vqls_qubits(dim)
}

/// Register width `log₂(dim)` for VQLS.
pub fn vqls_qubits(dim: usize) -> usize {
    dim.next_power_of_two().trailing_zeros() as usize
}

/// Unit-norm real vector from the first `dim` amplitudes. The global phase
/// is first rotated into the real axis modulo a sign, so a real state keeps
/// its sign.
pub fn extract_classical(state: &Statevector, dim: usize) -> Result<DVector<f64>> {
    extract_range(state.amplitudes(), 0, dim)
}

pub(crate) fn extract_range(amps: &[C64], start: usize, dim: usize) -> Result<DVector<f64>> {
    if start + dim > amps.len() {
        return Err(Error::Dimension {
            expected: amps.len(),
            got: start + dim,
        });
    }
    let block = &amps[start..start + dim];
    let lead = block
        .iter()
        .copied()
        .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
        .unwrap_or_default();
    let mut phase = lead.arg();
    if phase > std::f64::consts::FRAC_PI_2 {
        phase -= std::f64::consts::PI;
    } else if phase <= -std::f64::consts::FRAC_PI_2 {
        phase += std::f64::consts::PI;
    }
    let rot = C64::from_polar(1.0, -phase);
    let rotated: Vec<C64> = block.iter().map(|a| a * rot).collect();
    let v = DVector::from_iterator(dim, rotated.iter().map(|a| a.re));
    let norm = v.norm();
    if !(norm > 1e-300) {
        return Err(Error::Domain("extracted block has zero norm".into()));
    }
    let imag = rotated.iter().map(|a| a.im.abs()).fold(0.0, f64::max) / norm;
    if imag > 1e-6 {
        log::warn!("discarding imaginary residue {imag:.3e} when extracting a real solution");
    }
    Ok(v / norm)
}

/// `|⟨a|b⟩|` for real vectors normalized internally.
pub fn fidelity(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a.dot(b) / (a.norm() * b.norm())).abs()
}
