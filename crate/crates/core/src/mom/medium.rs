use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::Point3;

pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
pub const MU_0: f64 = 1.256_637_062_12e-6;

/// Homogeneous background; defaults to free space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackgroundMedium {
    pub permittivity: f64,
    pub permeability: f64,
}

impl Default for BackgroundMedium {
    fn default() -> Self {
        BackgroundMedium {
            permittivity: EPSILON_0,
            permeability: MU_0,
        }
    }
}

impl BackgroundMedium {
    pub fn new(permittivity: f64, permeability: f64) -> Result<Self> {
        if !(permittivity > 0.0 && permeability > 0.0) {
            return Err(Error::Domain(format!(
                "permittivity and permeability must be positive, got {permittivity}, {permeability}"
            )));
        }
        Ok(BackgroundMedium {
            permittivity,
            permeability,
        })
    }

    pub fn omega(&self, frequency: f64) -> f64 {
        2.0 * PI * frequency
    }

    pub fn wavenumber(&self, frequency: f64) -> f64 {
        self.omega(frequency) * (self.permittivity * self.permeability).sqrt()
    }

    pub fn wavelength(&self, frequency: f64) -> f64 {
        2.0 * PI / self.wavenumber(frequency)
    }

    pub fn impedance(&self) -> f64 {
        (self.permeability / self.permittivity).sqrt()
    }
}

/// Time-harmonic Green function `e^{−jkR}/(4πR)` (time convention `e^{+jωt}`).
pub fn green(distance: f64, wavenumber: f64) -> Result<Complex64> {
    if !(distance > 0.0) {
        return Err(Error::Domain(format!(
            "Green function is singular at R = {distance}"
        )));
    }
    Ok(Complex64::from_polar(1.0, -wavenumber * distance) / (4.0 * PI * distance))
}

/// Uniform plane wave `E(r) = E0 p̂ e^{−jk k̂·r}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneWave {
    propagation: [f64; 3],
    polarization: [f64; 3],
    pub amplitude: f64,
    pub frequency: f64,
}

impl PlaneWave {
    pub fn new(propagation: Point3, polarization: Point3, amplitude: f64, frequency: f64) -> Result<Self> {
        let (kn, pn) = (propagation.norm(), polarization.norm());
        if (kn - 1.0).abs() > 1e-9 || (pn - 1.0).abs() > 1e-9 {
            return Err(Error::Domain("propagation and polarization must be unit vectors".into()));
        }
        if propagation.dot(&polarization).abs() > 1e-9 {
            return Err(Error::Domain("polarization must be orthogonal to propagation".into()));
        }
        if !(frequency > 0.0) {
            return Err(Error::Domain(format!("frequency must be positive, got {frequency}")));
        }
        Ok(PlaneWave {
            propagation: propagation.into(),
            polarization: polarization.into(),
            amplitude,
            frequency,
        })
    }

    /// x̂-polarized wave travelling along −ẑ, so θ = 0° is backscatter in the
    /// φ = 0° observation cut.
    pub fn x_polarized_down(frequency: f64) -> Self {
        PlaneWave::new(-Point3::z(), Point3::x(), 1.0, frequency)
            .expect("canonical plane wave is valid")
    }

    pub fn propagation(&self) -> Point3 {
        self.propagation.into()
    }

    pub fn polarization(&self) -> Point3 {
        self.polarization.into()
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    /// Complex field vector at `r` in `medium`.
    pub fn field(&self, medium: &BackgroundMedium, r: &Point3) -> [Complex64; 3] {
        let k = medium.wavenumber(self.frequency);
        let phase = Complex64::from_polar(self.amplitude, -k * self.propagation().dot(r));
        let p = self.polarization();
        [phase * p.x, phase * p.y, phase * p.z]
    }
}
