use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::qsim::{Circuit, Gate, NoiseModel, Statevector, C64};

/// Costs within this many iterations must improve by `STAGNATION_TOL` or the
/// optimizer restarts from fresh random parameters.
const STAGNATION_WINDOW: usize = 50;
const STAGNATION_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VqlsConfig {
    pub layers: usize,
    pub threshold: f64,
    /// Gradient steps per start.
    pub max_iterations: usize,
    pub learning_rate: f64,
    /// Number of random starts, including the first.
    pub restarts: usize,
    /// Sample each expectation with this many shots instead of reading it
    /// exactly from the statevector.
    pub shots: Option<usize>,
    /// Noisy trajectories averaged per expectation when noise is active.
    pub noise_trajectories: usize,
}

impl Default for VqlsConfig {
    fn default() -> Self {
        Self {
            layers: 1,
            threshold: 1e-3,
            max_iterations: 300,
            learning_rate: 0.1,
            restarts: 5,
            shots: None,
            noise_trajectories: 8,
        }
    }
}

impl VqlsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0) {
            return Err(Error::Config("VQLS cost threshold must be positive".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config("VQLS learning rate must be positive".into()));
        }
        if self.max_iterations == 0 || self.restarts == 0 || self.noise_trajectories == 0 {
            return Err(Error::Config(
                "VQLS iterations, restarts and noise trajectories must be at least 1".into(),
            ));
        }
        if self.shots == Some(0) {
            return Err(Error::Config("VQLS shot count must be at least 1".into()));
        }
        Ok(())
    }

    pub fn num_parameters(&self, qubits: usize) -> usize {
        qubits * (self.layers + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VqlsTracePoint {
    pub iteration: usize,
    pub cost: f64,
    pub gradient_norm: f64,
}

#[derive(Debug, Clone)]
pub struct VqlsOutcome {
    /// Noiseless ansatz state at the best parameters found.
    pub state: Statevector,
    pub parameters: Vec<f64>,
    pub cost: f64,
    pub converged: bool,
    pub history: Vec<VqlsTracePoint>,
    pub starts: usize,
    pub qubits: usize,
}

impl VqlsOutcome {
    /// `iteration,cost,gradient_norm` rows.
    pub fn history_csv(&self) -> String {
        let mut out = String::from("iteration,cost,gradient_norm\n");
        for p in &self.history {
            out.push_str(&format!("{},{:.12e},{:.12e}\n", p.iteration, p.cost, p.gradient_norm));
        }
        out
    }
}

/// Hardware-efficient ansatz: `layers` × (RY on every qubit, CNOT chain
/// `i → i+1`), then a final RY layer.
pub fn ansatz(qubits: usize, layers: usize, theta: &[f64]) -> Result<Circuit> {
    if theta.len() != qubits * (layers + 1) {
        return Err(Error::Dimension {
            expected: qubits * (layers + 1),
            got: theta.len(),
        });
    }
    let mut c = Circuit::new(qubits);
    for l in 0..=layers {
        for q in 0..qubits {
            c.push(Gate::ry(q, theta[l * qubits + q]))?;
        }
        if l < layers {
            for q in 0..qubits.saturating_sub(1) {
                c.push(Gate::cnot(q, q + 1))?;
            }
        }
    }
    Ok(c)
}

struct Problem<'a> {
    c: &'a DMatrix<f64>,
    f_hat: DVector<f64>,
    qubits: usize,
    cfg: &'a VqlsConfig,
    noise: &'a NoiseModel,
    /// `‖C‖₂²`, bounding both expectations for shot sampling.
    scale: f64,
}

impl Problem<'_> {
    /// `(⟨x|C†|f⟩⟨f|C|x⟩, ⟨x|C†C|x⟩)` at parameters `theta`.
    fn expectations<R: Rng + ?Sized>(&self, theta: &[f64], rng: &mut R) -> Result<(f64, f64)> {
        let circuit = ansatz(self.qubits, self.cfg.layers, theta)?;
        let runs = if self.noise.is_active() { self.cfg.noise_trajectories } else { 1 };
        let (mut o1, mut o2) = (0.0, 0.0);
        for _ in 0..runs {
            let mut s = Statevector::new(self.qubits)?;
            if self.noise.is_active() {
                circuit.run(&mut s, Some((self.noise, &mut *rng)))?;
            } else {
                circuit.run::<R>(&mut s, None)?;
            }
            let (a, b) = self.observe(&s);
            o1 += a;
            o2 += b;
        }
        o1 /= runs as f64;
        o2 /= runs as f64;
        if let Some(shots) = self.cfg.shots {
            o1 = self.sample(o1, shots, rng)?;
            o2 = self.sample(o2, shots, rng)?;
        }
        Ok((o1, o2))
    }

    fn observe(&self, s: &Statevector) -> (f64, f64) {
        let re = DVector::from_iterator(s.dim(), s.amplitudes().iter().map(|a| a.re));
        let im = DVector::from_iterator(s.dim(), s.amplitudes().iter().map(|a| a.im));
        let (yr, yi) = (self.c * re, self.c * im);
        let overlap = C64::new(self.f_hat.dot(&yr), self.f_hat.dot(&yi));
        (overlap.norm_sqr(), yr.norm_squared() + yi.norm_squared())
    }

    fn sample<R: Rng + ?Sized>(&self, value: f64, shots: usize, rng: &mut R) -> Result<f64> {
        let p = (value / self.scale).clamp(0.0, 1.0);
        let b = Binomial::new(shots as u64, p).map_err(|e| Error::Domain(e.to_string()))?;
        Ok(b.sample(rng) as f64 / shots as f64 * self.scale)
    }
}

fn cost_of(o1: f64, o2: f64) -> f64 {
    if o2 > 0.0 {
        (1.0 - o1 / o2).max(0.0)
    } else {
        1.0
    }
}

/// Trains the ansatz to minimize `1 − |⟨f̂|Ĉx(Θ)⟩|²` by gradient descent
/// with parameter-shift gradients on both expectations.
pub fn vqls_solve<R: Rng + ?Sized>(
    c: &DMatrix<f64>,
    f: &DVector<f64>,
    cfg: &VqlsConfig,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<VqlsOutcome> {
    cfg.validate()?;
    let dim = c.nrows();
    if c.ncols() != dim || f.len() != dim {
        return Err(Error::Dimension {
            expected: dim,
            got: if c.ncols() != dim { c.ncols() } else { f.len() },
        });
    }
    if !dim.is_power_of_two() {
        return Err(Error::Domain(format!("VQLS needs a power-of-two size, got {dim}")));
    }
    let fnorm = f.norm();
    if !(fnorm > 0.0) {
        return Err(Error::Domain("VQLS right-hand side is zero".into()));
    }
    let qubits = dim.trailing_zeros() as usize;
    let sv = c.clone().singular_values();
    let problem = Problem {
        c,
        f_hat: f / fnorm,
        qubits,
        cfg,
        noise,
        scale: sv.max().powi(2).max(f64::MIN_POSITIVE),
    };
    let np = cfg.num_parameters(qubits);
    let shift = std::f64::consts::FRAC_PI_2;

    let mut history = Vec::new();
    let mut best_cost = f64::INFINITY;
    let mut best_theta = vec![0.0; np];
    let mut converged = false;
    let mut starts = 0;
    let mut iteration = 0;

    'starts: for _ in 0..cfg.restarts {
        starts += 1;
        let mut theta: Vec<f64> = (0..np).map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)).collect();
        let mut costs = Vec::with_capacity(cfg.max_iterations);
        for it in 0..cfg.max_iterations {
            let (o1, o2) = problem.expectations(&theta, rng)?;
            let cost = cost_of(o1, o2);
            let mut grad = vec![0.0; np];
            if o2 > 0.0 {
                for i in 0..np {
                    let mut tp = theta.clone();
                    tp[i] += shift;
                    let (p1, p2) = problem.expectations(&tp, rng)?;
                    tp[i] -= 2.0 * shift;
                    let (m1, m2) = problem.expectations(&tp, rng)?;
                    let (d1, d2) = ((p1 - m1) / 2.0, (p2 - m2) / 2.0);
                    grad[i] = -(d1 * o2 - o1 * d2) / (o2 * o2);
                }
            }
            let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            history.push(VqlsTracePoint {
                iteration,
                cost,
                gradient_norm: gnorm,
            });
            iteration += 1;
            if cost < best_cost {
                best_cost = cost;
                best_theta.clone_from(&theta);
            }
            if cost <= cfg.threshold {
                converged = true;
                break 'starts;
            }
            costs.push(cost);
            if it >= STAGNATION_WINDOW && costs[it - STAGNATION_WINDOW] - cost < STAGNATION_TOL {
                break;
            }
            for (t, g) in theta.iter_mut().zip(&grad) {
                *t -= cfg.learning_rate * g;
            }
        }
    }

    let mut state = Statevector::new(qubits)?;
    ansatz(qubits, cfg.layers, &best_theta)?.run::<R>(&mut state, None)?;
    if !converged {
        log::debug!("VQLS stopped at cost {best_cost:.3e} after {iteration} iterations");
    }
    Ok(VqlsOutcome {
        state,
        parameters: best_theta,
        cost: best_cost,
        converged,
        history,
        starts,
        qubits,
    })
}
