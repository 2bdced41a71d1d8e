//! Asymptotic cost predictors for single-shot and hybrid quantum solvers,
//! and the scaling benchmark that sets measured solve times against them.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use web_time::Instant;

use crate::config::Geometry;
use crate::error::{Error, Result};
use crate::hybrid::{hybrid_solve, preconditioned_condition, HybridConfig, InnerSolver};
use crate::mesh::build_rwg;
use crate::mom::{realify, BackgroundMedium, ComplexSystem, PlaneWave, QuadratureOrder};

/// How `polylog(x)` is evaluated by [`predict_complexity`].
pub const POLYLOG_NOTE: &str = "polylog(x) = ln(x)^2";

fn polylog(x: f64) -> f64 {
    x.ln().powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComplexityKind {
    HhlSingle,
    VqlsSingle,
    HybridHhl,
    HybridVqls,
}

impl ComplexityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ComplexityKind::HhlSingle => "hhl-single",
            ComplexityKind::VqlsSingle => "vqls-single",
            ComplexityKind::HybridHhl => "hybrid-hhl",
            ComplexityKind::HybridVqls => "hybrid-vqls",
        }
    }
}

/// Symbols of the cost model. `kappa` is the condition number of the
/// (preconditioned) full system, `kappa_sub` the mean over the subspace
/// matrices; the `xi_*` are precisions in (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityParams {
    pub kappa: f64,
    pub kappa_sub: f64,
    pub n_sub: usize,
    pub xi_ext: f64,
    pub xi_int: f64,
    pub xi_hhl: f64,
    pub xi_vqls: f64,
}

impl ComplexityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa_sub > 0.0) || self.n_sub == 0 {
            return Err(Error::Domain("condition numbers and n_sub must be positive".into()));
        }
        for (name, xi) in [
            ("xi_ext", self.xi_ext),
            ("xi_int", self.xi_int),
            ("xi_hhl", self.xi_hhl),
            ("xi_vqls", self.xi_vqls),
        ] {
            if !(xi > 0.0 && xi < 1.0) {
                return Err(Error::Domain(format!("{name} = {xi} must lie in (0, 1)")));
            }
        }
        Ok(())
    }
}

impl Default for ComplexityParams {
    fn default() -> Self {
        Self {
            kappa: 5.23,
            kappa_sub: 5.0,
            n_sub: 32,
            xi_ext: 1e-3,
            xi_int: 1e-3,
            xi_hhl: 1e-3,
            xi_vqls: 1e-3,
        }
    }
}

/// Cost in arbitrary units, for comparing curve shapes only:
///
/// * HHL single: `κ² log N / ξ_HHL`
/// * VQLS single: `κ polylog(N) log(1/ξ_VQLS)`
/// * hybrid: `κ̃ log ξ_ext / (N_sub log ξ_int) · (N·N_sub + inner)` with
///   `inner = κ̄_sub² log N_sub / (ξ_int⁴ ξ_HHL)` for HHL and
///   `κ̄_sub polylog(N_sub) / ξ_int⁴ · log(1/ξ_VQLS)` for VQLS.
///
/// `n` must be at least 2 and `params` valid.
pub fn predict_complexity(kind: ComplexityKind, n: usize, params: &ComplexityParams) -> f64 {
    debug_assert!(n >= 2 && params.validate().is_ok());
    let nf = n as f64;
    let p = params;
    let ns = p.n_sub as f64;
    let exterior = p.kappa * p.xi_ext.ln() / (ns * p.xi_int.ln());
    match kind {
        ComplexityKind::HhlSingle => p.kappa * p.kappa * nf.ln() / p.xi_hhl,
        ComplexityKind::VqlsSingle => p.kappa * polylog(nf) * (1.0 / p.xi_vqls).ln(),
        ComplexityKind::HybridHhl => {
            exterior * (nf * ns + p.kappa_sub * p.kappa_sub * ns.ln() / (p.xi_int.powi(4) * p.xi_hhl))
        }
        ComplexityKind::HybridVqls => {
            exterior * (nf * ns + p.kappa_sub * polylog(ns) / p.xi_int.powi(4) * (1.0 / p.xi_vqls).ln())
        }
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Maps `f` over `items` on at most `workers` threads, keeping input order.
pub fn run_bounded<T, R, F>(items: Vec<T>, workers: usize, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync,
{
    let n = items.len();
    if workers <= 1 || n <= 1 {
        return items.into_iter().map(f).collect();
    }
    let queue: Vec<Mutex<Option<T>>> = items.into_iter().map(|t| Mutex::new(Some(t))).collect();
    let results: Vec<Mutex<Option<R>>> = (0..n).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..workers.min(n) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let item = queue[i].lock().unwrap().take().expect("each item is taken once");
                let r = f(item);
                *results[i].lock().unwrap() = Some(r);
            });
        }
    });
    results
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("every item produced a result"))
        .collect()
}

/// One size of the scaling sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub geometry: String,
    pub n_p: usize,
    pub n_n: usize,
    pub n_e: usize,
    pub n: usize,
    pub kappa: f64,
    pub kappa_sub: f64,
    pub n_ext: usize,
    pub n_int: usize,
    pub converged: bool,
    pub t_precond: Duration,
    pub t_sub_build: Duration,
    pub t_iter: Duration,
    pub t_hybrid: Duration,
    pub t_direct: Duration,
    /// Predictor value normalized to the first row's measured time.
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    pub predictor: ComplexityKind,
    pub exponent_hybrid: f64,
    pub exponent_direct: f64,
    pub exponent_predicted: f64,
    /// Slope of `N log N` over the same sizes.
    pub exponent_nlogn: f64,
}

impl ScalingReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "geometry,n_p,n_n,n_e,n,kappa,kappa_sub,n_ext,n_int,converged,\
             t_precond_s,t_sub_build_s,t_iter_s,t_hybrid_s,t_direct_s,predicted_s\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "\"{}\",{},{},{},{},{:.4},{:.4},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
                r.geometry,
                r.n_p,
                r.n_n,
                r.n_e,
                r.n,
                r.kappa,
                r.kappa_sub,
                r.n_ext,
                r.n_int,
                r.converged,
                r.t_precond.as_secs_f64(),
                r.t_sub_build.as_secs_f64(),
                r.t_iter.as_secs_f64(),
                r.t_hybrid.as_secs_f64(),
                r.t_direct.as_secs_f64(),
                r.predicted,
            );
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "sizes = {}", self.rows.len());
        let _ = writeln!(s, "predictor = {}", self.predictor.as_str());
        let _ = writeln!(s, "predictor_polylog = {POLYLOG_NOTE}");
        let _ = writeln!(s, "exponent_hybrid = {:.4}", self.exponent_hybrid);
        let _ = writeln!(s, "exponent_direct = {:.4}", self.exponent_direct);
        let _ = writeln!(s, "exponent_predicted = {:.4}", self.exponent_predicted);
        let _ = writeln!(s, "exponent_nlogn_reference = {:.4}", self.exponent_nlogn);
        let _ = writeln!(s, "hybrid_not_steeper_than_direct = {}", self.exponent_hybrid <= self.exponent_direct);
        let _ = writeln!(s, "time_split = t_hybrid ~ t_precond + t_sub_build + t_iter");
        let _ = writeln!(s, "note = absolute times depend on the machine");
        s
    }
}

/// Times the hybrid solve and a dense LU solve for each geometry (sorted by
/// unknown count), records `κ̃` and `κ̄_sub`, and fits log-log exponents.
/// With `workers > 1` sizes run concurrently, which perturbs the timings.
pub fn bench_scaling(
    sizes: &[Geometry],
    frequency: f64,
    medium: &BackgroundMedium,
    quadrature: QuadratureOrder,
    cfg: &HybridConfig,
    workers: usize,
) -> Result<ScalingReport> {
    if sizes.len() < 3 {
        return Err(Error::Config(format!("scaling needs at least 3 sizes, got {}", sizes.len())));
    }
    let solve_cfg = HybridConfig {
        estimate_condition: false,
        ..cfg.clone()
    };
    let measured = run_bounded(sizes.to_vec(), workers, |g| measure(&g, frequency, medium, quadrature, &solve_cfg));
    let mut rows = measured.into_iter().collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| r.n);

    let predictor = match cfg.inner {
        InnerSolver::Hhl => ComplexityKind::HybridHhl,
        InnerSolver::Vqls | InnerSolver::Qr => ComplexityKind::HybridVqls,
    };
    let raw: Vec<f64> = rows
        .iter()
        .map(|r| {
            let params = ComplexityParams {
                kappa: r.kappa.max(1.0),
                kappa_sub: r.kappa_sub.max(1.0),
                n_sub: cfg.effective_n_sub(r.n),
                xi_ext: cfg.xi_ext.min(0.5),
                xi_int: cfg.xi_int.min(0.5),
                xi_hhl: 0.5f64.powi(cfg.hhl.clock_qubits as i32),
                xi_vqls: cfg.vqls.threshold.min(0.5),
            };
            predict_complexity(predictor, r.n.max(2), &params)
        })
        .collect();
    let scale = rows[0].t_hybrid.as_secs_f64() / raw[0];
    for (r, p) in rows.iter_mut().zip(&raw) {
        r.predicted = p * scale;
    }

    let n: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let secs = |f: fn(&ScalingRow) -> Duration| rows.iter().map(|r| f(r).as_secs_f64()).collect::<Vec<_>>();
    let nlogn: Vec<f64> = n.iter().map(|x| x * x.ln()).collect();
    Ok(ScalingReport {
        exponent_hybrid: loglog_slope(&n, &secs(|r| r.t_hybrid)),
        exponent_direct: loglog_slope(&n, &secs(|r| r.t_direct)),
        exponent_predicted: loglog_slope(&n, &raw),
        exponent_nlogn: loglog_slope(&n, &nlogn),
        predictor,
        rows,
    })
}

fn measure(
    geometry: &Geometry,
    frequency: f64,
    medium: &BackgroundMedium,
    quadrature: QuadratureOrder,
    cfg: &HybridConfig,
) -> Result<ScalingRow> {
    let mesh = geometry.build(None).map_err(|e| e.at_stage("mesh"))?;
    let rwg = build_rwg(&mesh).map_err(|e| e.at_stage("rwg"))?;
    let wave = PlaneWave::x_polarized_down(frequency);
    let complex = ComplexSystem::assemble(&mesh, &rwg, medium, &wave, quadrature);
    let system = realify(&complex).map_err(|e| e.at_stage("realify"))?;

    let (_, report) = hybrid_solve(&system, cfg).map_err(|e| e.at_stage("hybrid"))?;
    let t = Instant::now();
    system.solve_direct().map_err(|e| e.at_stage("direct"))?;
    let t_direct = t.elapsed();
    let kappa = preconditioned_condition(&system, cfg.precond)?;

    Ok(ScalingRow {
        geometry: geometry.label(),
        n_p: mesh.num_triangles(),
        n_n: mesh.num_vertices(),
        n_e: rwg.len(),
        n: system.len(),
        kappa,
        kappa_sub: report.kappa_sub_mean,
        n_ext: report.n_ext,
        n_int: report.n_int,
        converged: report.converged,
        t_precond: report.timing.precond_build,
        t_sub_build: report.timing.sub_build,
        t_iter: report.timing.iter_quantum,
        t_hybrid: report.timing.total,
        t_direct,
        predicted: f64::NAN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precond::PreconditionerKind;

    const KINDS: [ComplexityKind; 4] = [
        ComplexityKind::HhlSingle,
        ComplexityKind::VqlsSingle,
        ComplexityKind::HybridHhl,
        ComplexityKind::HybridVqls,
    ];

    #[test]
    fn hybrid_vqls_is_asymptotically_linear() {
        let p = ComplexityParams::default();
        let n = 1usize << 58;
        let ratio = predict_complexity(ComplexityKind::HybridVqls, 2 * n, &p)
            / predict_complexity(ComplexityKind::HybridVqls, n, &p);
        assert!((ratio - 2.0).abs() < 1e-3, "{ratio}");
    }

    #[test]
    fn hhl_single_is_quadratic_in_kappa() {
        let p = ComplexityParams::default();
        let q = ComplexityParams { kappa: 2.0 * p.kappa, ..p };
        let ratio = predict_complexity(ComplexityKind::HhlSingle, 1000, &q)
            / predict_complexity(ComplexityKind::HhlSingle, 1000, &p);
        assert!((ratio - 4.0).abs() < 1e-12);
    }

    #[test]
    fn monotone_in_size_condition_and_precision() {
        let p = ComplexityParams::default();
        for kind in KINDS {
            let mut last = 0.0;
            for n in [2, 10, 100, 1000, 10_000] {
                let v = predict_complexity(kind, n, &p);
                assert!(v >= last, "{kind:?} n={n}");
                last = v;
            }
            let k2 = ComplexityParams { kappa: 10.0, ..p };
            assert!(predict_complexity(kind, 500, &k2) >= predict_complexity(kind, 500, &p));
            for tighter in [
                ComplexityParams { xi_ext: 1e-5, ..p },
                ComplexityParams { xi_hhl: 1e-5, ..p },
                ComplexityParams { xi_vqls: 1e-5, ..p },
            ] {
                assert!(predict_complexity(kind, 500, &tighter) >= predict_complexity(kind, 500, &p), "{kind:?}");
            }
        }
    }

    #[test]
    fn params_are_validated() {
        assert!(ComplexityParams::default().validate().is_ok());
        assert!(ComplexityParams { xi_int: 1.0, ..Default::default() }.validate().is_err());
        assert!(ComplexityParams { kappa: 0.0, ..Default::default() }.validate().is_err());
        assert!(ComplexityParams { n_sub: 0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let x = [10.0, 20.0, 40.0, 80.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(2.5)).collect();
        assert!((loglog_slope(&x, &y) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn bounded_map_keeps_order() {
        let out = run_bounded((0..20).collect(), 4, |i: i32| i * i);
        assert_eq!(out, (0..20).map(|i| i * i).collect::<Vec<_>>());
        assert_eq!(run_bounded(vec![3], 1, |i: i32| i + 1), vec![4]);
    }

    #[test]
    fn small_scaling_run() {
        let sizes: Vec<Geometry> = [1, 2, 3]
            .map(|frequency| Geometry::Geodesic { radius: 0.25, frequency })
            .to_vec();
        let cfg = HybridConfig {
            inner: InnerSolver::Qr,
            precond: PreconditionerKind::Identity,
            ..HybridConfig::default()
        };
        let r = bench_scaling(&sizes, 3e8, &BackgroundMedium::default(), QuadratureOrder::P3, &cfg, 2).unwrap();
        assert_eq!(r.rows.len(), 3);
        assert!(r.rows.windows(2).all(|w| w[0].n < w[1].n));
        assert_eq!(r.rows[0].n_e, 30);
        assert!(r.rows.iter().all(|row| row.kappa >= 1.0 && row.converged));
        assert!((r.rows[0].predicted - r.rows[0].t_hybrid.as_secs_f64()).abs() < 1e-12);
        assert!(r.exponent_nlogn > 1.0);
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 4);
        assert!(r.to_text().contains("ln(x)^2"));
        assert!(bench_scaling(&sizes[..2], 3e8, &BackgroundMedium::default(), QuadratureOrder::P3, &cfg, 1).is_err());
    }
}
