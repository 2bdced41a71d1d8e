//! The double-layer hybrid iteration: an exterior Krylov-projection loop on
//! the preconditioned system around an interior loop of inner (quantum or
//! QR) solves of the small projected system.

use std::fmt::Write as _;
use std::time::Duration;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use web_time::Instant;

use crate::error::{Error, Result};
use crate::linalg::{dense_condition, FnOperator, LinearOperator};
use crate::mom::RealSystem;
use crate::precond::{condition_estimate, PreconditionedOperator, Preconditioner, PreconditionerKind, DENSE_CONDITION_LIMIT};
use crate::qalgo::{
    extract_classical, extract_range, hermitian_dilation, hhl_qubits, hhl_solve, pad_pow2, vqls_qubits, vqls_solve,
    HhlConfig, VqlsConfig,
};
use crate::qsim::NoiseModel;
use crate::subspace::{build_subspace, recover_scale};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InnerSolver {
    Hhl,
    Vqls,
    Qr,
}

impl InnerSolver {
    pub fn as_str(self) -> &'static str {
        match self {
            InnerSolver::Hhl => "hhl",
            InnerSolver::Vqls => "vqls",
            InnerSolver::Qr => "qr",
        }
    }
}

impl std::str::FromStr for InnerSolver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hhl" => Ok(InnerSolver::Hhl),
            "vqls" => Ok(InnerSolver::Vqls),
            "qr" => Ok(InnerSolver::Qr),
            other => Err(Error::Config(format!("unknown inner solver '{other}'"))),
        }
    }
}

/// Whether thresholds apply to residuals relative to `‖b̃‖`/`‖d‖` or to
/// raw norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResidualMode {
    #[default]
    Relative,
    Absolute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HybridConfig {
    pub xi_ext: f64,
    pub xi_int: f64,
    /// Subspace dimension; clamped to the next power of two above the
    /// system size for small systems.
    pub n_sub: usize,
    pub max_exterior: usize,
    pub max_interior: usize,
    pub inner: InnerSolver,
    pub precond: PreconditionerKind,
    pub residual: ResidualMode,
    pub hhl: HhlConfig,
    pub vqls: VqlsConfig,
    pub noise: NoiseModel,
    pub seed: u64,
    /// Estimate `κ(P⁻¹A)` for the report (dense SVD up to 4096 unknowns).
    pub estimate_condition: bool,
}

impl Default for HybridConfig {
    fn default() -> Self {
        Self {
            xi_ext: 1e-3,
            xi_int: 1e-3,
            n_sub: 32,
            max_exterior: 200,
            max_interior: 50,
            inner: InnerSolver::Vqls,
            precond: PreconditionerKind::default(),
            residual: ResidualMode::Relative,
            hhl: HhlConfig::default(),
            vqls: VqlsConfig::default(),
            noise: NoiseModel::default(),
            seed: 0,
            estimate_condition: true,
        }
    }
}

impl HybridConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.xi_ext > 0.0) || !(self.xi_int > 0.0) {
            return Err(Error::Config("convergence thresholds must be positive".into()));
        }
        if !self.n_sub.is_power_of_two() {
            return Err(Error::Config(format!("n_sub = {} is not a power of two", self.n_sub)));
        }
        if self.max_exterior == 0 || self.max_interior == 0 {
            return Err(Error::Config("iteration caps must be at least 1".into()));
        }
        if let PreconditionerKind::Ilut { tau, .. } = self.precond {
            if !(tau >= 0.0) {
                return Err(Error::Config(format!("ILUT drop tolerance {tau} must be non-negative")));
            }
        }
        self.hhl.validate()?;
        self.vqls.validate()?;
        self.noise.validate()
    }

    pub fn effective_n_sub(&self, n: usize) -> usize {
        self.n_sub.min(n.next_power_of_two())
    }

    /// Register width used by one inner solve.
    pub fn inner_qubits(&self, n: usize) -> usize {
        let ns = self.effective_n_sub(n);
        match self.inner {
            InnerSolver::Hhl => hhl_qubits(self.hhl.clock_qubits, 2 * ns),
            InnerSolver::Vqls => vqls_qubits(ns),
            InnerSolver::Qr => 0,
        }
    }
}

/// Wall-clock split of a solve: subspace construction and the interior
/// (inner-solver) loop, plus preconditioner setup and the overall total.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Timing {
    pub precond_build: Duration,
    pub sub_build: Duration,
    pub iter_quantum: Duration,
    pub total: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub converged: bool,
    pub dim: usize,
    pub n_sub: usize,
    pub inner: InnerSolver,
    pub precond: PreconditionerKind,
    pub residual_mode: ResidualMode,
    pub qubits: usize,
    pub n_ext: usize,
    pub n_int: usize,
    /// `α⁽⁰⁾ … α⁽ᴺᵉˣᵗ⁾`.
    pub alpha: Vec<f64>,
    /// Per exterior step, `β⁽⁰⁾ …` including the starting value.
    pub beta: Vec<Vec<f64>>,
    pub kappa_precond: Option<f64>,
    pub kappa_sub_mean: f64,
    /// Inner solves that did not meet their own tolerance (VQLS only).
    pub inner_unconverged: usize,
    pub timing: Timing,
}

impl SolveReport {
    /// `Σₑ(N_intᵉ + 1) − 1` from the per-step interior histories.
    pub fn interior_count(beta: &[Vec<f64>]) -> usize {
        beta.iter().map(|b| b.len().saturating_sub(1) + 1).sum::<usize>().saturating_sub(1)
    }

    pub fn final_alpha(&self) -> f64 {
        self.alpha.last().copied().unwrap_or(f64::NAN)
    }

    /// Structured `key = value` report.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let precond = self.precond.label();
        let _ = writeln!(s, "converged = {}", self.converged);
        let _ = writeln!(s, "unknowns = {}", self.dim);
        let _ = writeln!(s, "n_sub = {}", self.n_sub);
        let _ = writeln!(s, "inner_solver = {}", self.inner.as_str());
        let _ = writeln!(s, "preconditioner = {precond}");
        let _ = writeln!(
            s,
            "residual_mode = {}",
            match self.residual_mode {
                ResidualMode::Relative => "relative",
                ResidualMode::Absolute => "absolute",
            }
        );
        let _ = writeln!(s, "qubits = {}", self.qubits);
        let _ = writeln!(s, "n_ext = {}", self.n_ext);
        let _ = writeln!(s, "n_int = {}", self.n_int);
        let _ = writeln!(s, "final_alpha = {:.6e}", self.final_alpha());
        match self.kappa_precond {
            Some(k) => {
                let _ = writeln!(s, "kappa_precond = {k:.6}");
            }
            None => {
                let _ = writeln!(s, "kappa_precond = not estimated");
            }
        }
        let _ = writeln!(s, "kappa_sub_mean = {:.6}", self.kappa_sub_mean);
        let _ = writeln!(s, "inner_unconverged = {}", self.inner_unconverged);
        let _ = writeln!(s, "t_precond_s = {:.6}", self.timing.precond_build.as_secs_f64());
        let _ = writeln!(s, "t_sub_build_s = {:.6}", self.timing.sub_build.as_secs_f64());
        let _ = writeln!(s, "t_iter_quantum_s = {:.6}", self.timing.iter_quantum.as_secs_f64());
        let _ = writeln!(s, "t_total_s = {:.6}", self.timing.total.as_secs_f64());
        s
    }

    /// `layer,step,residual` rows. Interior steps are numbered globally, so
    /// the last interior index equals `n_int`.
    pub fn residual_csv(&self) -> String {
        let mut s = String::from("layer,step,residual\n");
        for (e, a) in self.alpha.iter().enumerate() {
            let _ = writeln!(s, "exterior,{e},{a:.12e}");
        }
        for (i, b) in self.beta.iter().flatten().enumerate() {
            let _ = writeln!(s, "interior,{i},{b:.12e}");
        }
        s
    }
}

/// Unit direction from one inner solve and whether that solver met its own
/// tolerance.
#[derive(Debug, Clone)]
pub struct InnerSolution {
    pub direction: DVector<f64>,
    pub converged: bool,
}

/// Solves `C·z = f` for a unit direction with the configured inner solver.
pub fn inner_solve_dispatch<R: Rng + ?Sized>(
    c: &DMatrix<f64>,
    f: &DVector<f64>,
    cfg: &HybridConfig,
    rng: &mut R,
) -> Result<InnerSolution> {
    let n = c.nrows();
    if !(f.norm() > 0.0) {
        return Err(Error::Domain("inner right-hand side is zero".into()));
    }
    match cfg.inner {
        InnerSolver::Qr => {
            let z = c
                .clone()
                .qr()
                .solve(f)
                .ok_or_else(|| Error::Singular("subspace matrix is singular".into()))?;
            let norm = z.norm();
            if !(norm > 0.0) || !norm.is_finite() {
                return Err(Error::Singular("subspace solution is not finite".into()));
            }
            Ok(InnerSolution {
                direction: z / norm,
                converged: true,
            })
        }
        InnerSolver::Vqls => {
            let (cp, fp) = pad_pow2(c, f)?;
            let out = vqls_solve(&cp, &fp, &cfg.vqls, &cfg.noise, rng)?;
            let z = extract_classical(&out.state, cp.nrows())?;
            let lead = z.rows(0, n).into_owned();
            let norm = lead.norm();
            if !(norm > 0.0) {
                return Err(Error::Domain("VQLS direction vanishes on the unpadded block".into()));
            }
            Ok(InnerSolution {
                direction: lead / norm,
                converged: out.converged,
            })
        }
        InnerSolver::Hhl => {
            let (h, g) = hermitian_dilation(c, f)?;
            let (hp, gp) = pad_pow2(&h, &g)?;
            let out = hhl_solve(&hp, &gp, &cfg.hhl, &cfg.noise, rng)?;
            let z = extract_range(out.state.amplitudes(), n, n)?;
            Ok(InnerSolution {
                direction: z,
                converged: true,
            })
        }
    }
}

/// Runs the double-layer iteration on `A·x = b`.
pub fn hybrid_solve(system: &RealSystem, cfg: &HybridConfig) -> Result<(DVector<f64>, SolveReport)> {
    cfg.validate()?;
    let start = Instant::now();
    let a = &system.a;
    let n = a.nrows();
    let n_sub = cfg.effective_n_sub(n);
    let seed = cfg.seed ^ cfg.noise.seed.rotate_left(32);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let t = Instant::now();
    let order = system.factor_order();
    let p = Preconditioner::build_ordered(cfg.precond, a, order.as_deref()).map_err(|e| e.at_stage("preconditioner"))?;
    let precond_build = t.elapsed();
    let op = PreconditionedOperator { a, p: &p };
    let b = p.apply(&system.b);

    let kappa_precond = if cfg.estimate_condition {
        Some(estimate_kappa(&op, a, &p, n))
    } else {
        None
    };

    let b_scale = match cfg.residual {
        ResidualMode::Relative => b.norm(),
        ResidualMode::Absolute => 1.0,
    };
    let mut report = SolveReport {
        converged: false,
        dim: n,
        n_sub,
        inner: cfg.inner,
        precond: cfg.precond,
        residual_mode: cfg.residual,
        qubits: cfg.inner_qubits(n),
        n_ext: 0,
        n_int: 0,
        alpha: Vec::new(),
        beta: Vec::new(),
        kappa_precond,
        kappa_sub_mean: f64::NAN,
        inner_unconverged: 0,
        timing: Timing {
            precond_build,
            ..Timing::default()
        },
    };

    let mut x = DVector::zeros(n);
    if !(b.norm() > 0.0) {
        report.converged = true;
        report.alpha.push(0.0);
        report.timing.total = start.elapsed();
        return Ok((x, report));
    }
    let mut e = b.clone();
    report.alpha.push(e.norm() / b_scale);
    let mut best = (report.alpha[0], x.clone());
    let mut kappa_sub = Vec::new();

    for step in 0..cfg.max_exterior {
        let t = Instant::now();
        let sub = build_subspace(&op, &e, n_sub).map_err(|err| err.at_stage("subspace"))?;
        report.timing.sub_build += t.elapsed();
        kappa_sub.push(dense_condition(&sub.c));

        let t = Instant::now();
        let d_scale = match cfg.residual {
            ResidualMode::Relative => sub.d.norm(),
            ResidualMode::Absolute => 1.0,
        };
        let mut y = DVector::zeros(n_sub);
        let mut f = sub.d.clone();
        let mut betas = vec![f.norm() / d_scale];
        for _ in 0..cfg.max_interior {
            let wrap = |source: Error| Error::InnerSolve {
                step,
                source: Box::new(source),
            };
            let inner = inner_solve_dispatch(&sub.c, &f, cfg, &mut rng).map_err(wrap)?;
            if !inner.converged {
                report.inner_unconverged += 1;
            }
            let scale = recover_scale(&sub.c, &f, &inner.direction).map_err(wrap)?;
            let z = inner.direction * scale;
            f -= &sub.c * &z;
            y += z;
            let beta = f.norm() / d_scale;
            betas.push(beta);
            if beta <= cfg.xi_int {
                break;
            }
        }
        report.timing.iter_quantum += t.elapsed();
        report.beta.push(betas);

        x += sub.prolongate(&y);
        e = &b - op.apply(&x);
        let alpha = e.norm() / b_scale;
        report.alpha.push(alpha);
        report.n_ext = step + 1;
        if alpha < best.0 {
            best = (alpha, x.clone());
        }
        if alpha <= cfg.xi_ext {
            report.converged = true;
            break;
        }
        if !alpha.is_finite() {
            break;
        }
    }

    report.n_int = SolveReport::interior_count(&report.beta);
    report.kappa_sub_mean = kappa_sub.iter().sum::<f64>() / kappa_sub.len().max(1) as f64;
    report.timing.total = start.elapsed();
    if !report.converged {
        x = best.1;
    }
    Ok((x, report))
}

/// `κ(P⁻¹A)` for `kind` built the same way [`hybrid_solve`] builds it.
pub fn preconditioned_condition(system: &RealSystem, kind: PreconditionerKind) -> Result<f64> {
    let order = system.factor_order();
    let p = Preconditioner::build_ordered(kind, &system.a, order.as_deref()).map_err(|e| e.at_stage("preconditioner"))?;
    let op = PreconditionedOperator { a: &system.a, p: &p };
    Ok(estimate_kappa(&op, &system.a, &p, system.len()))
}

fn estimate_kappa(op: &PreconditionedOperator, a: &DMatrix<f64>, p: &Preconditioner, n: usize) -> f64 {
    if n <= DENSE_CONDITION_LIMIT {
        let unused = FnOperator::new(n, |v: &DVector<f64>| v.clone());
        return condition_estimate(op, &unused);
    }
    let lu = a.clone().lu();
    // (P⁻¹A)⁻¹ v = A⁻¹ P v
    let pm = match p {
        Preconditioner::Identity => None,
        Preconditioner::Ilut(f) => Some(f.product_dense()),
    };
    let inverse = FnOperator::new(n, |v: &DVector<f64>| {
        let pv = pm.as_ref().map_or_else(|| v.clone(), |m| m * v);
        lu.solve(&pv).unwrap_or_else(|| DVector::from_element(n, f64::INFINITY))
    });
    condition_estimate(op, &inverse)
}
