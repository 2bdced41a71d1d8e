//! Statevector quantum simulator with the gate set needed by HHL and VQLS.
//!
//! Qubit 0 is the least-significant bit of the basis-state index.

mod gate;
mod noise;

pub use gate::{apply_gate, Circuit, Gate, GateKind, GateName};
pub use noise::{apply_noise, NoiseModel, Pauli};

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest register the simulator will allocate (16M amplitudes).
pub const MAX_QUBITS: usize = 22;

/// Full amplitude vector of an `n`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n: usize,
    amps: Vec<C64>,
}

impl Statevector {
    /// `|0…0⟩` on `n` qubits.
    pub fn new(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_size(n)?;
        if index >= 1 << n {
            return Err(Error::Domain(format!("basis index {index} out of range for {n} qubits")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// Normalizes `amps`, whose length must be a power of two.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::Domain(format!(
                "amplitude vector length {} is not a power of two",
                amps.len()
            )));
        }
        let n = amps.len().trailing_zeros() as usize;
        check_size(n)?;
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Domain("cannot normalize a zero amplitude vector".into()));
        }
        Ok(Self {
            n,
            amps: amps.into_iter().map(|a| a / norm).collect(),
        })
    }

    pub fn from_real(v: &[f64]) -> Result<Self> {
        Self::from_amplitudes(v.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            Err(Error::QubitRange { index: q, n: self.n })
        } else {
            Ok(())
        }
    }

    /// Marginal probability that `qubit` reads 1.
    pub fn probability_one(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let bit = 1 << qubit;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Projects `qubit` onto `bit` and renormalizes. Returns the probability
    /// of that outcome; the state is left untouched when it is zero.
    pub fn project(&mut self, qubit: usize, bit: u8) -> Result<f64> {
        let p1 = self.probability_one(qubit)?;
        let p = if bit == 1 { p1 } else { (self.norm_sqr() - p1).max(0.0) };
        if p <= 0.0 {
            return Ok(0.0);
        }
        let mask = 1 << qubit;
        let keep = if bit == 1 { mask } else { 0 };
        let scale = 1.0 / p.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & mask == keep {
                *a *= scale;
            } else {
                *a = C64::new(0.0, 0.0);
            }
        }
        Ok(p)
    }

    /// Samples a computational-basis measurement of `qubit` and collapses
    /// the state onto the outcome.
    pub fn measure_qubit<R: Rng + ?Sized>(&mut self, qubit: usize, rng: &mut R) -> Result<u8> {
        let p1 = self.probability_one(qubit)? / self.norm_sqr();
        let bit = u8::from(rng.gen::<f64>() < p1);
        self.project(qubit, bit)?;
        Ok(bit)
    }

    /// `⟨self|other⟩`.
    pub fn inner_product(&self, other: &Statevector) -> Result<C64> {
        inner_product(self, other)
    }
}

fn check_size(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        Err(Error::Domain(format!(
            "{n} qubits exceeds the simulator capacity of {MAX_QUBITS}"
        )))
    } else {
        Ok(())
    }
}

/// `⟨a|b⟩`.
pub fn inner_product(a: &Statevector, b: &Statevector) -> Result<C64> {
    if a.n != b.n {
        return Err(Error::Dimension {
            expected: a.n,
            got: b.n,
        });
    }
    Ok(a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum())
}
