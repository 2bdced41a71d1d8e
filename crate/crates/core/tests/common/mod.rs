//! Property checks shared by the `invariants` and `acceptance` targets. Each
//! returns the first counterexample as an error string.

#![allow(dead_code)]

use std::f64::consts::PI;

use efie_hybrid::farfield::{mie_rcs_with_terms, mie_truncation, rcs_relative_error, RcsSweep};
use efie_hybrid::mesh::{build_rwg, generate_sphere};
use efie_hybrid::mom::{complexify_solution, realify, BackgroundMedium, ComplexSystem, PlaneWave, QuadratureOrder};
use efie_hybrid::qsim::{Circuit, Gate, Statevector};
use efie_hybrid::subspace::build_subspace;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

fn gate_from(n: usize, spec: (u8, usize, usize, f64)) -> Gate {
    let (kind, a, b, angle) = spec;
    let q = a % n;
    let mut r = b % n;
    if r == q {
        r = (q + 1) % n;
    }
    match kind % 6 {
        0 => Gate::ry(q, angle),
        1 => Gate::h(q),
        2 => Gate::x(q),
        3 => Gate::cnot(q, r),
        4 => Gate::cz(q, r),
        _ => Gate::cphase(q, r, angle),
    }
}

/// `|Σ|aᵢ|² − 1| ≤ 1e-10·(gate count)` after random noiseless circuits.
pub fn statevector_norm() -> Result<(), String> {
    let strategy = (2usize..=8)
        .prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec((any::<u8>(), 0usize..64, 0usize..64, -PI..PI), 1..60),
                prop::collection::vec(-1.0f64..1.0, 1usize << n),
            )
        });
    runner(128)
        .run(&strategy, |(n, specs, start)| {
            prop_assume!(start.iter().any(|v| v.abs() > 1e-3));
            let mut circuit = Circuit::new(n);
            for s in &specs {
                circuit.push(gate_from(n, *s)).unwrap();
            }
            let mut state = Statevector::from_real(&start).unwrap();
            circuit.run::<rand_chacha::ChaCha8Rng>(&mut state, None).unwrap();
            let drift = (state.norm_sqr() - 1.0).abs();
            prop_assert!(drift <= 1e-10 * specs.len() as f64, "drift {drift:e} after {} gates", specs.len());
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// `‖UᵀU − I‖_max ≤ 1e-10` for Arnoldi bases of random operators.
pub fn arnoldi_orthonormality() -> Result<(), String> {
    let strategy = (8usize..=48, 1u32..=4, any::<u64>());
    runner(48)
        .run(&strategy, |(n, log_sub, seed)| {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a = DMatrix::from_fn(n, n, |i, j| rng.gen_range(-1.0..1.0) + if i == j { 2.0 } else { 0.0 });
            let e = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            let s = build_subspace(&a, &e, (1usize << log_sub).min(n.next_power_of_two())).unwrap();
            let err = s.orthogonality_error();
            prop_assert!(err <= 1e-10, "orthogonality error {err:e} (n = {n})");
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Exact solutions of the block real system map back to exact solutions of
/// `Z·I = V` (relative residual ≤ 1e-12), on random complex symmetric
/// systems and on an EFIE sphere.
pub fn realify_round_trip() -> Result<(), String> {
    let strategy = (2usize..=16, any::<u64>());
    runner(64)
        .run(&strategy, |(n, seed)| {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut z = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            z = &z + z.transpose();
            for i in 0..n {
                z[(i, i)] += Complex64::new(2.0 * n as f64, 0.5);
            }
            let v = DVector::from_fn(n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let sys = ComplexSystem::new(z, v).unwrap();
            let real = realify(&sys).unwrap();
            let x = real.solve_direct().unwrap();
            let i = complexify_solution(&x, n).unwrap();
            let r = sys.relative_residual(&i);
            prop_assert!(r <= 1e-12, "residual {r:e}");
            Ok(())
        })
        .map_err(|e| e.to_string())?;

    let mesh = generate_sphere(1.0, 1);
    let rwg = build_rwg(&mesh).map_err(|e| e.to_string())?;
    let wave = PlaneWave::x_polarized_down(3e8);
    let sys = ComplexSystem::assemble(&mesh, &rwg, &BackgroundMedium::default(), &wave, QuadratureOrder::P4);
    let real = realify(&sys).map_err(|e| e.to_string())?;
    let x = real.solve_direct().map_err(|e| e.to_string())?;
    let r = sys.relative_residual(&complexify_solution(&x, rwg.len()).map_err(|e| e.to_string())?);
    if r > 1e-12 {
        return Err(format!("EFIE round-trip residual {r:e}"));
    }
    Ok(())
}

/// Five extra Mie terms change σ by less than 1e-8 relative.
pub fn mie_self_convergence() -> Result<(), String> {
    let theta: Vec<f64> = (0..=180).map(f64::from).collect();
    let strategy = (0.05f64..25.0, 0.1f64..3.0);
    runner(48)
        .run(&strategy, |(ka, radius)| {
            let k = ka / radius;
            let l = mie_truncation(ka);
            let base = mie_rcs_with_terms(radius, k, l, &theta);
            let more = mie_rcs_with_terms(radius, k, l + 5, &theta);
            let num: f64 = base.iter().zip(&more).map(|(a, b)| (a - b).powi(2)).sum();
            let den: f64 = more.iter().map(|b| b * b).sum();
            let rel = (num / den).sqrt();
            prop_assert!(rel < 1e-8, "ka = {ka}: relative change {rel:e}");
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// `δ_RCS` agrees with an independent loop over samples.
pub fn rcs_oracle_duplication() -> Result<(), String> {
    let strategy = (2usize..200).prop_flat_map(|n| {
        (
            prop::collection::vec(0.0f64..1e3, n),
            prop::collection::vec(1e-6f64..1e3, n),
        )
    });
    runner(128)
        .run(&strategy, |(test, reference)| {
            let theta: Vec<f64> = (0..test.len()).map(|i| i as f64 * 0.5).collect();
            let t = RcsSweep::new(theta.clone(), test.clone(), 3e8).unwrap();
            let r = RcsSweep::new(theta, reference.clone(), 3e8).unwrap();
            let delta = rcs_relative_error(&t, &r).unwrap();
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..test.len() {
                num += (test[i] - reference[i]) * (test[i] - reference[i]);
                den += reference[i] * reference[i];
            }
            let brute = (num / den).sqrt();
            prop_assert!((delta - brute).abs() <= 1e-12 * brute.max(1.0), "{delta} vs {brute}");
            prop_assert_eq!(rcs_relative_error(&r, &r).unwrap(), 0.0);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

pub const SUITES: [(&str, fn() -> Result<(), String>); 5] = [
    ("statevector norm preservation", statevector_norm),
    ("Arnoldi orthonormality", arnoldi_orthonormality),
    ("realify/complexify round-trip", realify_round_trip),
    ("Mie self-convergence", mie_self_convergence),
    ("RCS error oracle duplication", rcs_oracle_duplication),
];
