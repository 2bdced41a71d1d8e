//! Browser bindings: the Mie reference curve, a small-sphere EFIE solve
//! checked against it, and a two-unknown quantum linear solve.

use efie_hybrid::farfield::{default_theta, mie_sweep, radiated_rcs, rcs_relative_error};
use efie_hybrid::hybrid::{HybridConfig, InnerSolver};
use efie_hybrid::mesh::{build_rwg, generate_sphere};
use efie_hybrid::mom::{complexify_solution, realify, BackgroundMedium, ComplexSystem, PlaneWave, QuadratureOrder};
use efie_hybrid::precond::PreconditionerKind;
use efie_hybrid::qalgo::{fidelity, hhl_solve, vqls_solve, HhlConfig, VqlsConfig};
use efie_hybrid::qsim::NoiseModel;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

/// Largest icosphere level the page offers; level 2 already takes seconds.
pub const MAX_LEVEL: u32 = 2;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// Mie bistatic RCS of a PEC sphere in dBsm at θ = 0°…180°.
#[wasm_bindgen]
pub fn mie_curve(radius: f64, frequency: f64) -> Result<Vec<f64>, JsError> {
    if !(radius > 0.0 && frequency > 0.0) {
        return Err(js_err("radius and frequency must be positive"));
    }
    Ok(mie_sweep(radius, &BackgroundMedium::default(), frequency, &default_theta()).sigma_dbsm())
}

#[wasm_bindgen]
pub struct SphereSolve {
    delta: f64,
    n_e: usize,
    n_ext: usize,
    n_int: usize,
    qubits: usize,
    converged: bool,
    mom_dbsm: Vec<f64>,
    mie_dbsm: Vec<f64>,
}

#[wasm_bindgen]
impl SphereSolve {
    /// Relative RCS error against the Mie series.
    #[wasm_bindgen(getter)]
    pub fn delta(&self) -> f64 {
        self.delta
    }
    #[wasm_bindgen(getter)]
    pub fn n_e(&self) -> usize {
        self.n_e
    }
    #[wasm_bindgen(getter)]
    pub fn n_ext(&self) -> usize {
        self.n_ext
    }
    #[wasm_bindgen(getter)]
    pub fn n_int(&self) -> usize {
        self.n_int
    }
    #[wasm_bindgen(getter)]
    pub fn qubits(&self) -> usize {
        self.qubits
    }
    #[wasm_bindgen(getter)]
    pub fn converged(&self) -> bool {
        self.converged
    }
    #[wasm_bindgen(getter)]
    pub fn mom_dbsm(&self) -> Vec<f64> {
        self.mom_dbsm.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn mie_dbsm(&self) -> Vec<f64> {
        self.mie_dbsm.clone()
    }
}

/// Hybrid solve of an icosphere at `level` (0–2) with the named inner
/// solver (`qr`, `vqls` or `hhl`) and preconditioner (`ilut` or
/// `identity`).
#[wasm_bindgen]
pub fn solve_sphere(
    radius: f64,
    level: u32,
    frequency: f64,
    inner: &str,
    precond: &str,
) -> Result<SphereSolve, JsError> {
    if level > MAX_LEVEL {
        return Err(js_err(format!("level must be at most {MAX_LEVEL}")));
    }
    if !(radius > 0.0 && frequency > 0.0) {
        return Err(js_err("radius and frequency must be positive"));
    }
    let inner: InnerSolver = inner.parse().map_err(js_err)?;
    let precond = match precond {
        "ilut" => PreconditionerKind::ilut(1e-3),
        "identity" => PreconditionerKind::Identity,
        other => return Err(js_err(format!("unknown preconditioner '{other}'"))),
    };
    let medium = BackgroundMedium::default();
    let mesh = generate_sphere(radius, level);
    let rwg = build_rwg(&mesh).map_err(js_err)?;
    let wave = PlaneWave::x_polarized_down(frequency);
    let order = QuadratureOrder::P4;
    let system = realify(&ComplexSystem::assemble(&mesh, &rwg, &medium, &wave, order)).map_err(js_err)?;
    let cfg = HybridConfig {
        inner,
        precond,
        estimate_condition: false,
        ..HybridConfig::default()
    };
    let (x, report) = efie_hybrid::hybrid::hybrid_solve(&system, &cfg).map_err(js_err)?;
    let currents = complexify_solution(&x, rwg.len()).map_err(js_err)?;
    let theta = default_theta();
    let sweep = radiated_rcs(&mesh, &rwg, &currents, &medium, frequency, 1.0, &theta, order).map_err(js_err)?;
    let mie = mie_sweep(radius, &medium, frequency, &theta);
    Ok(SphereSolve {
        delta: rcs_relative_error(&sweep, &mie).map_err(js_err)?,
        n_e: rwg.len(),
        n_ext: report.n_ext,
        n_int: report.n_int,
        qubits: report.qubits,
        converged: report.converged,
        mom_dbsm: sweep.sigma_dbsm(),
        mie_dbsm: mie.sigma_dbsm(),
    })
}

/// Solves the symmetric system `[[a11, a12], [a12, a22]]·x = [b1, b2]` with
/// HHL (`hhl`) or VQLS (`vqls`) and returns `[x₁, x₂, exact₁, exact₂,
/// fidelity, qubits]`, both directions normalized.
#[wasm_bindgen]
pub fn toy_solve(
    method: &str,
    a11: f64,
    a12: f64,
    a22: f64,
    b1: f64,
    b2: f64,
    clock_qubits: usize,
    noise: f64,
    seed: u64,
) -> Result<Vec<f64>, JsError> {
    let a = DMatrix::from_row_slice(2, 2, &[a11, a12, a12, a22]);
    let b = DVector::from_vec(vec![b1, b2]);
    let exact = a
        .clone()
        .lu()
        .solve(&b)
        .filter(|x| x.norm() > 0.0 && x.iter().all(|v| v.is_finite()))
        .ok_or_else(|| js_err("matrix is singular or the right-hand side is zero"))?
        .normalize();
    let noise = NoiseModel::new(noise, seed).map_err(js_err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (state, qubits) = match method {
        "hhl" => {
            let cfg = HhlConfig::with_clock_qubits(clock_qubits);
            let out = hhl_solve(&a, &b, &cfg, &noise, &mut rng).map_err(js_err)?;
            (out.state, out.total_qubits)
        }
        "vqls" => {
            let out = vqls_solve(&a, &b, &VqlsConfig::default(), &noise, &mut rng).map_err(js_err)?;
            (out.state, out.qubits)
        }
        other => return Err(js_err(format!("unknown method '{other}'"))),
    };
    let x = efie_hybrid::qalgo::extract_classical(&state, 2).map_err(js_err)?;
    let x = if x.dot(&exact) < 0.0 { -x } else { x };
    Ok(vec![x[0], x[1], exact[0], exact[1], fidelity(&x, &exact), qubits as f64])
}
