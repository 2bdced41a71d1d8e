use std::collections::BTreeSet;

use rand::Rng;

use super::gate::GateName;
use super::{Statevector, C64};
use crate::error::{Error, Result};

/// Stochastic Pauli (trajectory depolarizing) noise on selected gate kinds.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    /// Per-gate, per-target error probability.
    pub probability: f64,
    pub gates: BTreeSet<GateName>,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            probability: 0.0,
            gates: [GateName::Ry, GateName::Cnot].into_iter().collect(),
            seed: 0,
        }
    }
}

impl NoiseModel {
    pub fn new(probability: f64, seed: u64) -> Result<Self> {
        let m = Self {
            probability,
            seed,
            ..Self::default()
        };
        m.validate()?;
        Ok(m)
    }

    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.probability) {
            return Err(Error::Config(format!(
                "noise probability {} outside [0, 1]",
                self.probability
            )));
        }
        Ok(())
    }

    pub fn is_active(&self) -> bool {
        self.probability > 0.0 && !self.gates.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn apply(self, state: &mut Statevector, q: usize) -> Result<()> {
        state.check_qubit(q)?;
        let t = 1 << q;
        let i = C64::new(0.0, 1.0);
        let amps = state.amplitudes_mut();
        for k in 0..amps.len() {
            if k & t != 0 {
                continue;
            }
            let (a0, a1) = (amps[k], amps[k | t]);
            let (b0, b1) = match self {
                Pauli::X => (a1, a0),
                Pauli::Y => (-i * a1, i * a0),
                Pauli::Z => (a0, -a1),
            };
            amps[k] = b0;
            amps[k | t] = b1;
        }
        Ok(())
    }
}

/// With probability `p` per target, applies a uniformly chosen X, Y or Z.
/// Draws nothing from `rng` when the gate kind is not noisy or `p = 0`.
pub fn apply_noise<R: Rng + ?Sized>(
    state: &mut Statevector,
    noise: &NoiseModel,
    gate: GateName,
    targets: &[usize],
    rng: &mut R,
) -> Result<()> {
    if noise.probability <= 0.0 || !noise.gates.contains(&gate) {
        return Ok(());
    }
    for &q in targets {
        if rng.gen::<f64>() < noise.probability {
            let p = match rng.gen_range(0..3) {
                0 => Pauli::X,
                1 => Pauli::Y,
                _ => Pauli::Z,
            };
            p.apply(state, q)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::{Circuit, Gate};
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_probability_is_exact() {
        let mut c = Circuit::new(3);
        for q in 0..3 {
            c.push(Gate::ry(q, 0.3 + q as f64)).unwrap();
        }
        c.push(Gate::cnot(0, 1)).unwrap();
        c.push(Gate::cnot(1, 2)).unwrap();
        let mut clean = Statevector::new(3).unwrap();
        c.run::<ChaCha8Rng>(&mut clean, None).unwrap();
        let model = NoiseModel::new(0.0, 0).unwrap();
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = Statevector::new(3).unwrap();
            c.run(&mut s, Some((&model, &mut rng))).unwrap();
            assert_eq!(s, clean);
        }
    }

    #[test]
    fn full_noise_picks_paulis_uniformly() {
        let model = NoiseModel::new(1.0, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut counts = [0usize; 3];
        let trials = 10_000;
        for _ in 0..trials {
            let mut s = Statevector::new(1).unwrap();
            apply_noise(&mut s, &model, GateName::Ry, &[0], &mut rng).unwrap();
            let a = s.amplitudes();
            if a[0].norm() > 0.5 {
                // Z|0⟩ = |0⟩
                counts[2] += 1;
            } else if (a[1] - C64::new(1.0, 0.0)).norm() < 1e-12 {
                counts[0] += 1;
            } else {
                assert!((a[1] - C64::new(0.0, 1.0)).norm() < 1e-12);
                counts[1] += 1;
            }
        }
        for c in counts {
            let f = c as f64 / trials as f64;
            assert!((f - 1.0 / 3.0).abs() <= 0.05, "{counts:?}");
        }
    }

    #[test]
    fn trajectories_are_reproducible() {
        let model = NoiseModel::new(0.3, 0).unwrap();
        let mut c = Circuit::new(4);
        for q in 0..4 {
            c.push(Gate::ry(q, 0.4)).unwrap();
        }
        for q in 0..3 {
            c.push(Gate::cnot(q, q + 1)).unwrap();
        }
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = Statevector::new(4).unwrap();
            c.run(&mut s, Some((&model, &mut rng))).unwrap();
            s
        };
        assert_eq!(run(5), run(5));
        assert!((run(6).norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn untouched_kinds_and_bad_probability() {
        let model = NoiseModel::new(1.0, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut s = Statevector::new(1).unwrap();
        apply_noise(&mut s, &model, GateName::H, &[0], &mut rng).unwrap();
        assert_eq!(s, Statevector::new(1).unwrap());
        assert!(NoiseModel::new(1.5, 0).is_err());
    }
}
