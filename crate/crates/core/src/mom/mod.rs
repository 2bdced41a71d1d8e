//! EFIE Galerkin system for plane-wave excitation and its real-valued
//! symmetric form.

mod assembly;
mod medium;
mod potential;
pub mod quadrature;

pub use assembly::{assemble_excitation, assemble_impedance};
pub use medium::{green, BackgroundMedium, PlaneWave, EPSILON_0, MU_0};
pub use potential::static_potentials;
pub use quadrature::QuadratureOrder;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mesh::{RwgBasisSet, TriangleMesh};

/// Relative tolerance for the symmetry of `Z`.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// `Z·I = V` with an optional solution.
#[derive(Debug, Clone)]
pub struct ComplexSystem {
    pub z: DMatrix<Complex64>,
    pub v: DVector<Complex64>,
    pub i: Option<DVector<Complex64>>,
}

/// `A·x = b`, `A = [[Re Z, Im Z], [Im Z, −Re Z]]`, `b = [Re V; Im V]`.
#[derive(Debug, Clone)]
pub struct RealSystem {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    /// Unknowns `i` and `i + N/2` are the two real parts of one complex
    /// unknown.
    pub complex_pairs: bool,
}

impl ComplexSystem {
    pub fn new(z: DMatrix<Complex64>, v: DVector<Complex64>) -> Result<Self> {
        if !z.is_square() {
            return Err(Error::Dimension {
                expected: z.nrows(),
                got: z.ncols(),
            });
        }
        if v.len() != z.nrows() {
            return Err(Error::Dimension {
                expected: z.nrows(),
                got: v.len(),
            });
        }
        Ok(ComplexSystem { z, v, i: None })
    }

    /// Assembles the EFIE system for `wave` on `mesh`.
    pub fn assemble(
        mesh: &TriangleMesh,
        rwg: &RwgBasisSet,
        medium: &BackgroundMedium,
        wave: &PlaneWave,
        quadrature_order: QuadratureOrder,
    ) -> Self {
        let z = assemble_impedance(mesh, rwg, medium, wave.frequency, quadrature_order);
        let v = assemble_excitation(mesh, rwg, medium, wave, QuadratureOrder::P7);
        ComplexSystem { z, v, i: None }
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    /// `max|Z − Zᵀ| / max|Z|`.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.z.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let n = self.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.z[(i, j)] - self.z[(j, i)]).norm());
            }
        }
        worst / scale
    }

    /// Dense LU solve of `Z·I = V`.
    pub fn solve_direct(&self) -> Result<DVector<Complex64>> {
        self.z
            .clone()
            .lu()
            .solve(&self.v)
            .ok_or_else(|| Error::Singular("impedance matrix is singular".into()))
    }

    /// `‖Z·I − V‖₂ / ‖V‖₂`.
    pub fn relative_residual(&self, i: &DVector<Complex64>) -> f64 {
        (&self.z * i - &self.v).norm() / self.v.norm()
    }
}

impl RealSystem {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if !a.is_square() || a.nrows() != b.len() {
            return Err(Error::Dimension {
                expected: a.nrows(),
                got: b.len(),
            });
        }
        Ok(RealSystem {
            a,
            b,
            complex_pairs: false,
        })
    }

    /// Interleaved order `(Re₀, Im₀, Re₁, Im₁, …)` for systems produced by
    /// [`realify`]; factoring in this order keeps each complex unknown's two
    /// real parts adjacent.
    pub fn factor_order(&self) -> Option<Vec<usize>> {
        if !self.complex_pairs {
            return None;
        }
        let n = self.len() / 2;
        Some((0..2 * n).map(|k| if k % 2 == 0 { k / 2 } else { n + k / 2 }).collect())
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    /// Dense LU solve of `A·x = b`.
    pub fn solve_direct(&self) -> Result<DVector<f64>> {
        self.a
            .clone()
            .lu()
            .solve(&self.b)
            .ok_or_else(|| Error::Singular("real system matrix is singular".into()))
    }
}

/// Block real form of a complex symmetric system.
pub fn realify(sys: &ComplexSystem) -> Result<RealSystem> {
    let asym = sys.asymmetry();
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(asym));
    }
    let n = sys.len();
    let mut a = DMatrix::<f64>::zeros(2 * n, 2 * n);
    let mut b = DVector::<f64>::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = sys.z[(i, j)];
            a[(i, j)] = z.re;
            a[(i, j + n)] = z.im;
            a[(i + n, j)] = z.im;
            a[(i + n, j + n)] = -z.re;
        }
        b[i] = sys.v[i].re;
        b[i + n] = sys.v[i].im;
    }
    Ok(RealSystem {
        a,
        b,
        complex_pairs: true,
    })
}

/// Maps `x = [Re I; −Im I]` back to `I`.
pub fn complexify_solution(x: &DVector<f64>, n_e: usize) -> Result<DVector<Complex64>> {
    if x.len() != 2 * n_e {
        return Err(Error::Dimension {
            expected: 2 * n_e,
            got: x.len(),
        });
    }
    Ok(DVector::from_fn(n_e, |b, _| Complex64::new(x[b], -x[n_e + b])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type C = Complex64;

    #[test]
    fn one_by_one_imaginary_unit() {
        let sys = ComplexSystem::new(
            DMatrix::from_element(1, 1, C::new(0.0, 1.0)),
            DVector::from_element(1, C::new(1.0, 0.0)),
        )
        .unwrap();
        let real = realify(&sys).unwrap();
        assert_eq!(real.a, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        assert_eq!(real.b, DVector::from_vec(vec![1.0, 0.0]));
        let x = real.solve_direct().unwrap();
        assert!((x[0]).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
        let i = complexify_solution(&x, 1).unwrap();
        assert!((i[0] - C::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn complexify_examples() {
        let i = complexify_solution(&DVector::from_vec(vec![1.0, 0.0]), 1).unwrap();
        assert_eq!(i[0], C::new(1.0, 0.0));
        assert!(complexify_solution(&DVector::from_vec(vec![1.0, 0.0, 2.0]), 1).is_err());
    }

    #[test]
    fn real_z_gives_block_diagonal() {
        let z = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]).map(|r| C::new(r, 0.0));
        let sys = ComplexSystem::new(z, DVector::from_element(2, C::new(1.0, 0.0))).unwrap();
        let a = realify(&sys).unwrap().a;
        assert_eq!(a.view((0, 2), (2, 2)).abs().max(), 0.0);
        assert_eq!(a.view((2, 0), (2, 2)).abs().max(), 0.0);
        assert_eq!(a[(2, 3)], -1.0);
        assert_eq!(a[(3, 3)], -3.0);
    }

    #[test]
    fn asymmetric_z_rejected() {
        let z = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]).map(|r| C::new(r, 0.0));
        let sys = ComplexSystem::new(z, DVector::from_element(2, C::new(1.0, 0.0))).unwrap();
        assert!(matches!(realify(&sys), Err(Error::NotSymmetric(_))));
    }

    fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> ComplexSystem {
        let mut z = DMatrix::<C>::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let c = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                z[(i, j)] = c;
                z[(j, i)] = c;
            }
            z[(i, i)] += C::new(n as f64, 0.0);
        }
        let v = DVector::from_fn(n, |_, _| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        ComplexSystem::new(z, v).unwrap()
    }

    #[test]
    fn round_trip_on_random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let sys = random_symmetric(4, &mut rng);
            let real = realify(&sys).unwrap();
            assert_eq!(real.a, real.a.transpose());
            let x = real.solve_direct().unwrap();
            let i = complexify_solution(&x, 4).unwrap();
            assert!(sys.relative_residual(&i) <= 1e-12);
        }
    }

    #[test]
    fn real_z_spectrum_comes_in_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 6;
        let mut z = DMatrix::<C>::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let r = C::new(rng.gen_range(-1.0..1.0), 0.0);
                z[(i, j)] = r;
                z[(j, i)] = r;
            }
        }
        let sys = ComplexSystem::new(z, DVector::zeros(n)).unwrap();
        let a = realify(&sys).unwrap().a;
        let mut eig: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for k in 0..n {
            assert!((eig[k] + eig[2 * n - 1 - k]).abs() < 1e-10, "{eig:?}");
        }
    }
}
