use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::qsim::{Circuit, Gate, NoiseModel, Statevector, C64, MAX_QUBITS};

/// HHL settings. `None` fields are derived from the spectrum:
/// `t = π / (1.05·λ_max)`, `C_rot = 0.9·λ_min`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HhlConfig {
    pub clock_qubits: usize,
    pub evolution_time: Option<f64>,
    pub c_rot: Option<f64>,
    pub max_attempts: usize,
}

impl Default for HhlConfig {
    fn default() -> Self {
        Self {
            clock_qubits: 10,
            evolution_time: None,
            c_rot: None,
            max_attempts: 100_000,
        }
    }
}

impl HhlConfig {
    pub fn with_clock_qubits(m: usize) -> Self {
        Self {
            clock_qubits: m,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.clock_qubits == 0 {
            return Err(Error::Config("HHL needs at least one clock qubit".into()));
        }
        if self.max_attempts == 0 {
            return Err(Error::Config("HHL needs at least one postselection attempt".into()));
        }
        if let Some(t) = self.evolution_time {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("evolution time {t} must be positive")));
            }
        }
        if let Some(c) = self.c_rot {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Config(format!("rotation constant {c} must be positive")));
            }
        }
        Ok(())
    }
}

/// Postselected input-output register and run statistics.
#[derive(Debug, Clone)]
pub struct HhlOutcome {
    pub state: Statevector,
    /// Probability that one run ends with ancilla = 1 and clock = 0.
    pub success_probability: f64,
    pub attempts: usize,
    pub total_qubits: usize,
    pub evolution_time: f64,
    pub c_rot: f64,
}

/// Quantum Fourier transform on `qubits` (`qubits[0]` is the low bit):
/// `|x⟩ → 2^{-m/2} Σ_k e^{2πi·xk/2^m} |k⟩`.
pub fn qft(n: usize, qubits: &[usize]) -> Result<Circuit> {
    let m = qubits.len();
    let mut c = Circuit::new(n);
    for j in (0..m).rev() {
        c.push(Gate::h(qubits[j]))?;
        for k in (0..j).rev() {
            c.push(Gate::cphase(qubits[k], qubits[j], PI / f64::from(1u32 << (j - k))))?;
        }
    }
    for i in 0..m / 2 {
        let (a, b) = (qubits[i], qubits[m - 1 - i]);
        c.push(Gate::cnot(a, b))?;
        c.push(Gate::cnot(b, a))?;
        c.push(Gate::cnot(a, b))?;
    }
    Ok(c)
}

pub fn inverse_qft(n: usize, qubits: &[usize]) -> Result<Circuit> {
    Ok(qft(n, qubits)?.adjoint())
}

/// Solves `H·x = g` for real symmetric `H` of power-of-two size, returning
/// the postselected register, which approximates `H⁻¹g/‖H⁻¹g‖`.
///
/// Layout: input-output register on qubits `0..n`, clock on `n..n+m`,
/// ancilla on qubit `n+m`. The clock is read as a two's-complement phase so
/// negative eigenvalues are admissible.
pub fn hhl_solve<R: Rng + ?Sized>(
    h: &DMatrix<f64>,
    g: &DVector<f64>,
    cfg: &HhlConfig,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<HhlOutcome> {
    cfg.validate()?;
    let dim = h.nrows();
    if h.ncols() != dim || g.len() != dim {
        return Err(Error::Dimension {
            expected: dim,
            got: if h.ncols() != dim { h.ncols() } else { g.len() },
        });
    }
    if !dim.is_power_of_two() || dim < 2 {
        return Err(Error::Domain(format!("HHL needs a power-of-two size of at least 2, got {dim}")));
    }
    let asym = (h - h.transpose()).amax();
    if asym > 1e-10 {
        return Err(Error::NotSymmetric(asym));
    }
    let n = dim.trailing_zeros() as usize;
    let m = cfg.clock_qubits;
    let total = 1 + m + n;
    if total > MAX_QUBITS {
        return Err(Error::Domain(format!(
            "HHL register of {total} qubits exceeds the simulator capacity of {MAX_QUBITS}"
        )));
    }

    let eig = h.clone().symmetric_eigen();
    let lam_max = eig.eigenvalues.amax();
    let lam_min = eig.eigenvalues.iter().map(|l| l.abs()).fold(f64::INFINITY, f64::min);
    if !(lam_min > 0.0) {
        return Err(Error::Singular("HHL matrix has a zero eigenvalue".into()));
    }
    let t = cfg.evolution_time.unwrap_or(PI / (1.05 * lam_max));
    if let Some(&bad) = eig.eigenvalues.iter().find(|l| (l.abs() * t / (2.0 * PI)) >= 0.5) {
        return Err(Error::PhaseWrap(bad));
    }
    let c_rot = cfg.c_rot.unwrap_or(0.9 * lam_min);

    let io: Vec<usize> = (0..n).collect();
    let clock: Vec<usize> = (n..n + m).collect();
    let ancilla = n + m;

    let mut qpe = Circuit::new(total);
    for &q in &clock {
        qpe.push(Gate::h(q))?;
    }
    let v = eig.eigenvectors.map(|x| C64::new(x, 0.0));
    for (j, &q) in clock.iter().enumerate() {
        let power = f64::from(1u32 << j);
        let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::from_polar(1.0, l * t * power)));
        let u = &v * d * v.adjoint();
        qpe.push(Gate::controlled_unitary(vec![q], io.clone(), u)?)?;
    }
    qpe.extend(&inverse_qft(total, &clock)?)?;

    let size = 1usize << m;
    let angles: Vec<f64> = (0..size)
        .map(|u| {
            let s = if u < size / 2 { u as f64 } else { u as f64 - size as f64 };
            if s == 0.0 {
                return 0.0;
            }
            let lam = 2.0 * PI * s / (size as f64 * t);
            2.0 * (c_rot / lam).clamp(-1.0, 1.0).asin()
        })
        .collect();

    let mut circuit = qpe.clone();
    circuit.push(Gate::uc_ry(clock.clone(), ancilla, angles)?)?;
    circuit.extend(&qpe.adjoint())?;

    let gnorm = g.norm();
    if !(gnorm > 0.0) {
        return Err(Error::Domain("HHL right-hand side is zero".into()));
    }
    let mut amps = vec![C64::new(0.0, 0.0); 1 << total];
    for (a, x) in amps.iter_mut().zip(g.iter()) {
        *a = C64::new(x / gnorm, 0.0);
    }
    let initial = Statevector::from_amplitudes(amps)?;

    let postselect = |s: &mut Statevector| -> Result<f64> {
        let mut p = s.project(ancilla, 1)?;
        for &q in &clock {
            if p == 0.0 {
                break;
            }
            p *= s.project(q, 0)?;
        }
        Ok(p)
    };

    let offset = 1usize << ancilla;
    let finish = |s: &Statevector, p: f64, attempts: usize| -> Result<HhlOutcome> {
        let io_amps = s.amplitudes()[offset..offset + dim].to_vec();
        Ok(HhlOutcome {
            state: Statevector::from_amplitudes(io_amps)?,
            success_probability: p,
            attempts,
            total_qubits: total,
            evolution_time: t,
            c_rot,
        })
    };

    if !noise.is_active() {
        let mut s = initial;
        circuit.run::<R>(&mut s, None)?;
        let p = postselect(&mut s)?;
        if p < 1e-300 {
            return Err(Error::Postselection(cfg.max_attempts));
        }
        // repetitions until success are geometric in the success probability
        let mut attempts = 1;
        while rng.gen::<f64>() >= p {
            attempts += 1;
            if attempts > cfg.max_attempts {
                return Err(Error::Postselection(cfg.max_attempts));
            }
        }
        return finish(&s, p, attempts);
    }

    for attempt in 1..=cfg.max_attempts {
        let mut s = initial.clone();
        circuit.run(&mut s, Some((noise, &mut *rng)))?;
        if s.measure_qubit(ancilla, rng)? == 0 {
            continue;
        }
        let mut ok = true;
        for &q in &clock {
            if s.measure_qubit(q, rng)? == 1 {
                ok = false;
                break;
            }
        }
        if ok {
            let mut clean = initial.clone();
            circuit.run::<R>(&mut clean, None)?;
            let p = postselect(&mut clean)?;
            return finish(&s, p, attempt);
        }
    }
    Err(Error::Postselection(cfg.max_attempts))
}
