//! Bistatic radar cross section from solved surface currents, the Mie
//! reference for spheres, and the relative RCS error metric.

mod mie;

pub use mie::{mie_rcs, mie_rcs_with_terms, truncation as mie_truncation};

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mesh::{Point3, RwgBasisSet, TriangleMesh};
use crate::mom::quadrature::{map_rule, QuadratureOrder};
use crate::mom::BackgroundMedium;

/// Observation angles at 1° steps over [0°, 180°].
pub fn default_theta() -> Vec<f64> {
    (0..=180).map(f64::from).collect()
}

/// RCS samples over θ at φ = 0°.
#[derive(Debug, Clone, PartialEq)]
pub struct RcsSweep {
    pub theta_deg: Vec<f64>,
    pub sigma_m2: Vec<f64>,
    pub frequency: f64,
}

impl RcsSweep {
    pub fn new(theta_deg: Vec<f64>, sigma_m2: Vec<f64>, frequency: f64) -> Result<Self> {
        if theta_deg.len() != sigma_m2.len() {
            return Err(Error::Dimension {
                expected: theta_deg.len(),
                got: sigma_m2.len(),
            });
        }
        if theta_deg.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("θ samples must be strictly increasing".into()));
        }
        if sigma_m2.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::Domain("RCS values must be non-negative".into()));
        }
        Ok(RcsSweep {
            theta_deg,
            sigma_m2,
            frequency,
        })
    }

    pub fn sigma_dbsm(&self) -> Vec<f64> {
        self.sigma_m2.iter().map(|s| 10.0 * s.log10()).collect()
    }

    /// CSV with `#`-prefixed metadata lines, then
    /// `theta_deg,sigma_m2,sigma_dbsm`.
    pub fn to_csv(&self, metadata: &[(&str, String)]) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# frequency_hz = {}", self.frequency);
        for (k, v) in metadata {
            let _ = writeln!(out, "# {k} = {v}");
        }
        let _ = writeln!(out, "theta_deg,sigma_m2,sigma_dbsm");
        for ((t, s), db) in self.theta_deg.iter().zip(&self.sigma_m2).zip(self.sigma_dbsm()) {
            let _ = writeln!(out, "{t},{s:.10e},{db:.6}");
        }
        out
    }
}

/// Far-zone field `E_far(r̂) = −jωμ/(4π) ∫ [J − (J·r̂)r̂] e^{jk r̂·r'} dS'`
/// (the `e^{−jkr}/r` factor removed).
pub fn far_field(
    mesh: &TriangleMesh,
    rwg: &RwgBasisSet,
    currents: &DVector<Complex64>,
    medium: &BackgroundMedium,
    frequency: f64,
    direction: &Point3,
    order: QuadratureOrder,
) -> [Complex64; 3] {
    let k = medium.wavenumber(frequency);
    let omega = medium.omega(frequency);
    let mut acc = [Complex64::default(); 3];
    for t in 0..mesh.num_triangles() {
        let corners = mesh.corners(t);
        for (r, w) in map_rule(&corners, mesh.area(t), order.points()) {
            let j = rwg.current_at(mesh, currents.as_slice(), t, &r);
            let phase = Complex64::from_polar(w, k * direction.dot(&r));
            for c in 0..3 {
                acc[c] += j[c] * phase;
            }
        }
    }
    let radial = acc[0] * direction.x + acc[1] * direction.y + acc[2] * direction.z;
    let coeff = Complex64::new(0.0, -omega * medium.permeability / (4.0 * PI));
    [0, 1, 2].map(|c| coeff * (acc[c] - radial * direction[c]))
}

/// `σ = 4π|E_far|²/|E_inc|²` in the φ = 0° cut.
pub fn radiated_rcs(
    mesh: &TriangleMesh,
    rwg: &RwgBasisSet,
    currents: &DVector<Complex64>,
    medium: &BackgroundMedium,
    frequency: f64,
    incident_amplitude: f64,
    theta_deg: &[f64],
    order: QuadratureOrder,
) -> Result<RcsSweep> {
    if currents.len() != rwg.len() {
        return Err(Error::Dimension {
            expected: rwg.len(),
            got: currents.len(),
        });
    }
    let sigma = theta_deg
        .iter()
        .map(|t| {
            let th = t.to_radians();
            let dir = Point3::new(th.sin(), 0.0, th.cos());
            let e = far_field(mesh, rwg, currents, medium, frequency, &dir, order);
            let power: f64 = e.iter().map(|c| c.norm_sqr()).sum();
            4.0 * PI * power / (incident_amplitude * incident_amplitude)
        })
        .collect();
    RcsSweep::new(theta_deg.to_vec(), sigma, frequency)
}

/// Mie reference sweep for a sphere of `radius`.
pub fn mie_sweep(radius: f64, medium: &BackgroundMedium, frequency: f64, theta_deg: &[f64]) -> RcsSweep {
    let sigma = mie_rcs(radius, medium, frequency, theta_deg);
    RcsSweep::new(theta_deg.to_vec(), sigma, frequency).expect("Mie sweep is well-formed")
}

/// `‖σ_test − σ_ref‖₂ / ‖σ_ref‖₂` on linear-scale samples.
pub fn rcs_relative_error(test: &RcsSweep, reference: &RcsSweep) -> Result<f64> {
    if test.theta_deg != reference.theta_deg {
        return Err(Error::Domain("RCS sweeps use different θ grids".into()));
    }
    let num: f64 = test
        .sigma_m2
        .iter()
        .zip(&reference.sigma_m2)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let den: f64 = reference.sigma_m2.iter().map(|b| b * b).sum();
    if den == 0.0 {
        return Err(Error::Domain("reference RCS has zero norm".into()));
    }
    Ok((num / den).sqrt())
}

/// Per-triangle magnitude of the surface current at the centroid, as CSV
/// (`triangle,cx,cy,cz,abs_j`).
pub fn current_magnitudes_csv(mesh: &TriangleMesh, rwg: &RwgBasisSet, currents: &DVector<Complex64>) -> String {
    let mut out = String::from("triangle,cx,cy,cz,abs_j\n");
    for t in 0..mesh.num_triangles() {
        let c = mesh.centroid(t);
        let j = rwg.current_at(mesh, currents.as_slice(), t, &c);
        let mag = j.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let _ = writeln!(out, "{t},{:.6},{:.6},{:.6},{mag:.8e}", c.x, c.y, c.z);
    }
    out
}
