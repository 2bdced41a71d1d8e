//! End-to-end experiments: mesh, assembly, solve, RCS and reports written to
//! the output directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use num_complex::Complex64;
use web_time::Instant;

use crate::bench::{bench_scaling, run_bounded};
use crate::config::{Experiment, RunConfig};
use crate::error::{Error, Result};
use crate::farfield::{current_magnitudes_csv, default_theta, mie_sweep, radiated_rcs, rcs_relative_error, RcsSweep};
use crate::hybrid::InnerSolver::{Hhl, Vqls};
use crate::hybrid::{hybrid_solve, HybridConfig, InnerSolver, SolveReport};
use crate::mesh::{build_rwg, RwgBasisSet, TriangleMesh};
use crate::mom::{complexify_solution, realify, ComplexSystem, PlaneWave, RealSystem};
use crate::precond::PreconditionerKind;

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// False when any solve in the run hit its iteration cap.
    pub converged: bool,
    pub summary: String,
    pub artifacts: Vec<PathBuf>,
}

/// Discretized scatterer shared by the solve paths.
pub struct Problem {
    pub mesh: TriangleMesh,
    pub rwg: RwgBasisSet,
    pub complex: ComplexSystem,
    pub real: RealSystem,
}

impl Problem {
    pub fn build(cfg: &RunConfig) -> Result<Self> {
        let mesh = cfg.build_mesh().map_err(|e| e.at_stage("mesh"))?;
        let rwg = build_rwg(&mesh).map_err(|e| e.at_stage("rwg"))?;
        let wave = PlaneWave::x_polarized_down(cfg.frequency);
        let complex = ComplexSystem::assemble(&mesh, &rwg, &cfg.medium, &wave, cfg.quadrature);
        let real = realify(&complex).map_err(|e| e.at_stage("realify"))?;
        Ok(Problem {
            mesh,
            rwg,
            complex,
            real,
        })
    }

    pub fn rcs(&self, cfg: &RunConfig, currents: &DVector<Complex64>) -> Result<RcsSweep> {
        radiated_rcs(
            &self.mesh,
            &self.rwg,
            currents,
            &cfg.medium,
            cfg.frequency,
            1.0,
            &default_theta(),
            cfg.quadrature,
        )
        .map_err(|e| e.at_stage("rcs"))
    }

    pub fn currents(&self, x: &DVector<f64>) -> Result<DVector<Complex64>> {
        complexify_solution(x, self.rwg.len())
    }

    pub fn solve_direct(&self) -> Result<DVector<Complex64>> {
        self.complex.solve_direct().map_err(|e| e.at_stage("direct solve"))
    }

    pub fn solve_hybrid(&self, cfg: &HybridConfig) -> Result<(DVector<Complex64>, SolveReport)> {
        let (x, report) = hybrid_solve(&self.real, cfg).map_err(|e| e.at_stage("hybrid solve"))?;
        Ok((self.currents(&x)?, report))
    }

    fn describe(&self, cfg: &RunConfig, out: &mut String) {
        let _ = writeln!(out, "geometry = {}", cfg.geometry.label());
        let _ = writeln!(out, "frequency_hz = {}", cfg.frequency);
        let _ = writeln!(out, "n_p = {}", self.mesh.num_triangles());
        let _ = writeln!(out, "n_n = {}", self.mesh.num_vertices());
        let _ = writeln!(out, "n_e = {}", self.rwg.len());
        let _ = writeln!(out, "n = {}", self.real.len());
    }
}

struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e).at_stage("output"))?;
        Ok(Output {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, text).map_err(|e| Error::io(path.display().to_string(), e).at_stage("output"))?;
        self.files.push(path);
        Ok(())
    }

    fn finish(mut self, converged: bool, summary: String) -> Result<RunOutcome> {
        self.write("summary.txt", &summary)?;
        Ok(RunOutcome {
            converged,
            summary,
            artifacts: self.files,
        })
    }
}

/// Runs `cfg.experiment` and writes its artifacts under `cfg.output`.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let mut out = Output::new(&cfg.output)?;
    out.write("config.toml", &cfg.to_toml())?;
    match cfg.experiment {
        Experiment::Solve => run_solve(cfg, out),
        Experiment::Rcs => run_rcs(cfg, out),
        Experiment::Mie => run_mie(cfg, out),
        Experiment::Bench => run_bench(cfg, out),
        Experiment::Compare => run_compare(cfg, out),
        Experiment::CaseTable => run_case_table(cfg, out),
    }
}

fn mie_reference(cfg: &RunConfig) -> Option<RcsSweep> {
    cfg.geometry
        .sphere_radius()
        .map(|r| mie_sweep(r, &cfg.medium, cfg.frequency, &default_theta()))
}

fn relative_error(x: &DVector<Complex64>, reference: &DVector<Complex64>) -> f64 {
    (x - reference).norm() / reference.norm()
}

fn run_solve(cfg: &RunConfig, mut out: Output) -> Result<RunOutcome> {
    let problem = Problem::build(cfg)?;
    let (currents, report) = problem.solve_hybrid(&cfg.solver)?;
    let direct = problem.solve_direct()?;
    let sweep = problem.rcs(cfg, &currents)?;
    let direct_sweep = problem.rcs(cfg, &direct)?;

    let mut s = String::from("experiment = solve\n");
    problem.describe(cfg, &mut s);
    s.push_str(&report.to_text());
    if let Some(mie) = mie_reference(cfg) {
        let _ = writeln!(s, "delta_rcs_vs_mie = {:.6}", rcs_relative_error(&sweep, &mie)?);
        let _ = writeln!(s, "delta_rcs_direct_vs_mie = {:.6}", rcs_relative_error(&direct_sweep, &mie)?);
        out.write("rcs_mie.csv", &mie.to_csv(&[("source", "mie".into())]))?;
    }
    let _ = writeln!(s, "delta_rcs_vs_direct = {:.6}", rcs_relative_error(&sweep, &direct_sweep)?);
    let _ = writeln!(s, "solution_error_vs_direct = {:.6e}", relative_error(&currents, &direct));

    let source = format!("hybrid-{}", cfg.solver.inner.as_str());
    out.write("rcs_hybrid.csv", &sweep.to_csv(&[("source", source)]))?;
    out.write("residuals.csv", &report.residual_csv())?;
    out.write("currents_hybrid.csv", &current_magnitudes_csv(&problem.mesh, &problem.rwg, &currents))?;
    out.finish(report.converged, s)
}

fn run_rcs(cfg: &RunConfig, mut out: Output) -> Result<RunOutcome> {
    let problem = Problem::build(cfg)?;
    let t = Instant::now();
    let direct = problem.solve_direct()?;
    let elapsed = t.elapsed();
    let sweep = problem.rcs(cfg, &direct)?;

    let mut s = String::from("experiment = rcs\nsolver = direct\n");
    problem.describe(cfg, &mut s);
    let _ = writeln!(s, "residual = {:.6e}", problem.complex.relative_residual(&direct));
    let _ = writeln!(s, "t_direct_s = {:.6}", elapsed.as_secs_f64());
    if let Some(mie) = mie_reference(cfg) {
        let _ = writeln!(s, "delta_rcs_vs_mie = {:.6}", rcs_relative_error(&sweep, &mie)?);
        out.write("rcs_mie.csv", &mie.to_csv(&[("source", "mie".into())]))?;
    }
    out.write("rcs_direct.csv", &sweep.to_csv(&[("source", "direct".into())]))?;
    out.write("currents_direct.csv", &current_magnitudes_csv(&problem.mesh, &problem.rwg, &direct))?;
    out.finish(true, s)
}

fn run_mie(cfg: &RunConfig, mut out: Output) -> Result<RunOutcome> {
    let radius = cfg
        .geometry
        .sphere_radius()
        .ok_or_else(|| Error::Config("the Mie series needs a sphere radius".into()).at_stage("mie"))?;
    let sweep = mie_sweep(radius, &cfg.medium, cfg.frequency, &default_theta());
    let mut s = String::from("experiment = mie\n");
    let _ = writeln!(s, "radius_m = {radius}");
    let _ = writeln!(s, "frequency_hz = {}", cfg.frequency);
    let _ = writeln!(s, "ka = {:.6}", cfg.medium.wavenumber(cfg.frequency) * radius);
    let _ = writeln!(s, "samples = {}", sweep.theta_deg.len());
    let _ = writeln!(s, "sigma_backscatter_m2 = {:.6e}", sweep.sigma_m2[180]);
    out.write("rcs_mie.csv", &sweep.to_csv(&[("source", "mie".into()), ("radius_m", radius.to_string())]))?;
    out.finish(true, s)
}

fn run_bench(cfg: &RunConfig, mut out: Output) -> Result<RunOutcome> {
    let report = bench_scaling(
        &cfg.bench.sizes,
        cfg.frequency,
        &cfg.medium,
        cfg.quadrature,
        &cfg.solver,
        cfg.workers,
    )
    .map_err(|e| e.at_stage("bench"))?;
    let mut s = String::from("experiment = bench\n");
    let _ = writeln!(s, "inner_solver = {}", cfg.solver.inner.as_str());
    let _ = writeln!(s, "preconditioner = {}", cfg.solver.precond.label());
    let _ = writeln!(s, "workers = {}", cfg.workers);
    s.push_str(&report.to_text());
    out.write("bench.csv", &report.to_csv())?;
    let converged = report.rows.iter().all(|r| r.converged);
    out.finish(converged, s)
}

fn run_compare(cfg: &RunConfig, mut out: Output) -> Result<RunOutcome> {
    let problem = Problem::build(cfg)?;
    let qr_cfg = HybridConfig {
        inner: InnerSolver::Qr,
        ..cfg.solver.clone()
    };
    let (qr, qr_report) = problem.solve_hybrid(&qr_cfg)?;
    let (test, report) = problem.solve_hybrid(&cfg.solver)?;
    let direct = problem.solve_direct()?;
    let qr_sweep = problem.rcs(cfg, &qr)?;
    let test_sweep = problem.rcs(cfg, &test)?;
    let direct_sweep = problem.rcs(cfg, &direct)?;
    let mie = mie_reference(cfg);

    let name = cfg.solver.inner.as_str();
    let mut s = String::from("experiment = compare\n");
    problem.describe(cfg, &mut s);
    let _ = writeln!(s, "test_solver = hybrid-{name}");
    let _ = writeln!(s, "reference_solver = hybrid-qr");
    let _ = writeln!(s, "test_converged = {}", report.converged);
    let _ = writeln!(s, "test_n_ext = {}", report.n_ext);
    let _ = writeln!(s, "test_n_int = {}", report.n_int);
    let _ = writeln!(s, "reference_converged = {}", qr_report.converged);
    let _ = writeln!(s, "reference_n_ext = {}", qr_report.n_ext);
    let _ = writeln!(s, "reference_n_int = {}", qr_report.n_int);
    let _ = writeln!(s, "delta_rcs_vs_qr = {:.6}", rcs_relative_error(&test_sweep, &qr_sweep)?);
    let _ = writeln!(s, "delta_rcs_vs_direct = {:.6}", rcs_relative_error(&test_sweep, &direct_sweep)?);
    let _ = writeln!(s, "solution_error_vs_qr = {:.6e}", relative_error(&test, &qr));
    let _ = writeln!(s, "solution_error_qr_vs_direct = {:.6e}", relative_error(&qr, &direct));
    if let Some(m) = &mie {
        let _ = writeln!(s, "delta_rcs_vs_mie = {:.6}", rcs_relative_error(&test_sweep, m)?);
        let _ = writeln!(s, "delta_rcs_qr_vs_mie = {:.6}", rcs_relative_error(&qr_sweep, m)?);
    }

    let mut csv = format!("theta_deg,sigma_{name}_m2,sigma_qr_m2,sigma_direct_m2");
    csv.push_str(if mie.is_some() { ",sigma_mie_m2\n" } else { "\n" });
    for i in 0..test_sweep.theta_deg.len() {
        let _ = write!(
            csv,
            "{},{:.10e},{:.10e},{:.10e}",
            test_sweep.theta_deg[i], test_sweep.sigma_m2[i], qr_sweep.sigma_m2[i], direct_sweep.sigma_m2[i]
        );
        if let Some(m) = &mie {
            let _ = write!(csv, ",{:.10e}", m.sigma_m2[i]);
        }
        csv.push('\n');
    }
    out.write("compare_rcs.csv", &csv)?;
    out.write("residuals.csv", &report.residual_csv())?;
    out.write("currents_hybrid.csv", &current_magnitudes_csv(&problem.mesh, &problem.rwg, &test))?;
    out.write("currents_qr.csv", &current_magnitudes_csv(&problem.mesh, &problem.rwg, &qr))?;
    out.finish(report.converged && qr_report.converged, s)
}

/// One row of the reference parameter study, with its reported results.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableCase {
    pub case: usize,
    pub inner: InnerSolver,
    pub noisy: bool,
    pub preconditioned: bool,
    pub n_sub: usize,
    pub xi_ext: f64,
    pub xi_int: f64,
    pub n_qubit: usize,
    pub n_ext: usize,
    pub n_int: usize,
    pub delta: f64,
    pub kappa: f64,
}

const fn case(
    case: usize,
    inner: InnerSolver,
    noisy: bool,
    preconditioned: bool,
    n_sub: usize,
    xi: (f64, f64),
    n_qubit: usize,
    n_ext: usize,
    n_int: usize,
    delta: f64,
) -> TableCase {
    TableCase {
        case,
        inner,
        noisy,
        preconditioned,
        n_sub,
        xi_ext: xi.0,
        xi_int: xi.1,
        n_qubit,
        n_ext,
        n_int,
        delta,
        kappa: if preconditioned { 5.23 } else { 75.27 },
    }
}

/// The twelve reference cases (unit sphere, 4473 unknowns, 300 MHz).
pub const TABLE_CASES: [TableCase; 12] = [
    case(1, Hhl, false, false, 32, (1e-3, 1e-3), 12, 5, 10, 0.0061),
    case(2, Hhl, false, false, 32, (1e-3, 1e-3), 16, 5, 9, 0.0059),
    case(3, Hhl, false, true, 32, (1e-3, 1e-3), 21, 1, 1, 0.0049),
    case(4, Hhl, false, true, 32, (1e-3, 1e-4), 21, 1, 1, 0.0049),
    case(5, Hhl, false, true, 32, (1e-2, 1e-3), 21, 1, 1, 0.0049),
    case(6, Hhl, false, true, 4, (1e-3, 1e-3), 8, 1, 3, 0.0055),
    case(7, Vqls, false, false, 32, (1e-3, 1e-3), 5, 40, 192_432, 0.0058),
    case(8, Vqls, false, true, 32, (1e-3, 1e-3), 5, 1, 287, 0.0047),
    case(9, Vqls, false, true, 32, (1e-3, 1e-4), 5, 1, 1673, 0.0052),
    case(10, Vqls, false, true, 32, (1e-2, 1e-3), 5, 1, 4, 0.0054),
    case(11, Vqls, false, true, 4, (1e-3, 1e-3), 2, 2, 4, 0.0047),
    case(12, Vqls, true, true, 32, (1e-3, 1e-3), 5, 1, 99, 0.0058),
];

/// Solver settings for `case` on top of `base`. HHL clock registers are
/// sized so the register width matches the reference qubit count.
pub fn case_config(case: &TableCase, base: &HybridConfig, max_exterior: usize) -> HybridConfig {
    let mut cfg = base.clone();
    cfg.inner = case.inner;
    cfg.n_sub = case.n_sub;
    cfg.xi_ext = case.xi_ext;
    cfg.xi_int = case.xi_int;
    cfg.max_exterior = max_exterior;
    cfg.precond = if case.preconditioned {
        match base.precond {
            k @ PreconditionerKind::Ilut { .. } => k,
            PreconditionerKind::Identity => PreconditionerKind::ilut(1e-3),
        }
    } else {
        PreconditionerKind::Identity
    };
    cfg.noise.probability = if case.noisy { 0.2 } else { 0.0 };
    if case.inner == Hhl {
        let io = (2 * case.n_sub).trailing_zeros() as usize;
        cfg.hhl.clock_qubits = case.n_qubit - 1 - io;
    }
    cfg
}

/// Result of replaying one case.
#[derive(Debug, Clone)]
pub struct CaseResult {
    pub case: TableCase,
    pub report: SolveReport,
    pub delta: f64,
    pub seconds: f64,
}

/// Replays the selected cases on `problem`, `workers` at a time. `δ` is
/// measured against `reference`.
pub fn replay_cases(
    problem: &Problem,
    cfg: &RunConfig,
    reference: &RcsSweep,
    cases: &[usize],
    workers: usize,
) -> Result<Vec<CaseResult>> {
    let selected: Vec<TableCase> = TABLE_CASES
        .iter()
        .filter(|c| cases.is_empty() || cases.contains(&c.case))
        .copied()
        .collect();
    let results = run_bounded(selected, workers, |case| -> Result<CaseResult> {
        let solver = case_config(&case, &cfg.solver, cfg.case_table.max_exterior);
        let t = Instant::now();
        let (currents, report) = problem.solve_hybrid(&solver).map_err(|e| e.at_stage("case-table"))?;
        let seconds = t.elapsed().as_secs_f64();
        let sweep = problem.rcs(cfg, &currents)?;
        Ok(CaseResult {
            case,
            delta: rcs_relative_error(&sweep, reference)?,
            report,
            seconds,
        })
    });
    results.into_iter().collect()
}

pub fn case_table_csv(results: &[CaseResult], reference: &str) -> String {
    let mut s = String::from(
        "case,inner,noise,preconditioner,kappa,n_sub,xi_ext,xi_int,n_qubit,n_ext,n_int,delta_rcs,delta_reference,\
         converged,time_s,reference_kappa,reference_n_qubit,reference_n_ext,reference_n_int,reference_delta_rcs\n",
    );
    for r in results {
        let c = &r.case;
        let kappa = r.report.kappa_precond.map_or_else(|| "nan".to_string(), |k| format!("{k:.4}"));
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{:e},{:e},{},{},{},{:.6},{},{},{:.3},{},{},{},{},{}",
            c.case,
            c.inner.as_str(),
            if c.noisy { "yes" } else { "no" },
            r.report.precond.label(),
            kappa,
            r.report.n_sub,
            c.xi_ext,
            c.xi_int,
            r.report.qubits,
            r.report.n_ext,
            r.report.n_int,
            r.delta,
            reference,
            r.report.converged,
            r.seconds,
            c.kappa,
            c.n_qubit,
            c.n_ext,
            c.n_int,
            c.delta,
        );
    }
    s
}

fn run_case_table(cfg: &RunConfig, mut out: Output) -> Result<RunOutcome> {
    let problem = Problem::build(cfg)?;
    let (reference, name) = match mie_reference(cfg) {
        Some(m) => (m, "mie"),
        None => {
            let qr_cfg = HybridConfig {
                inner: InnerSolver::Qr,
                ..cfg.solver.clone()
            };
            let (qr, _) = problem.solve_hybrid(&qr_cfg)?;
            (problem.rcs(cfg, &qr)?, "qr")
        }
    };
    let results = replay_cases(&problem, cfg, &reference, &cfg.case_table.cases, cfg.workers)?;
    let mut s = String::from("experiment = case-table\n");
    problem.describe(cfg, &mut s);
    let _ = writeln!(s, "delta_reference = {name}");
    let _ = writeln!(s, "max_exterior = {}", cfg.case_table.max_exterior);
    let _ = writeln!(s, "cases = {}", results.len());
    for r in &results {
        let _ = writeln!(
            s,
            "case_{} = converged={} n_qubit={} n_ext={} n_int={} delta_rcs_vs_{name}={:.6}",
            r.case.case, r.report.converged, r.report.qubits, r.report.n_ext, r.report.n_int, r.delta
        );
    }
    out.write("case_table.csv", &case_table_csv(&results, name))?;
    let converged = results.iter().all(|r| r.report.converged);
    out.finish(converged, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_configs_reproduce_reference_qubit_counts() {
        let base = HybridConfig::default();
        for c in &TABLE_CASES {
            let cfg = case_config(c, &base, 10);
            assert_eq!(cfg.inner_qubits(4000), c.n_qubit, "case {}", c.case);
            assert_eq!(cfg.precond == PreconditionerKind::Identity, !c.preconditioned);
            assert_eq!(cfg.noise.probability > 0.0, c.noisy);
        }
    }

    #[test]
    fn mie_run_writes_sweep() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::sphere(1.0, 0, 3e8);
        cfg.experiment = Experiment::Mie;
        cfg.output = dir.path().to_path_buf();
        let outcome = run(&cfg).unwrap();
        assert!(outcome.converged);
        let csv = std::fs::read_to_string(dir.path().join("rcs_mie.csv")).unwrap();
        let rows = csv.lines().filter(|l| !l.starts_with('#')).count() - 1;
        assert_eq!(rows, 181);
        assert!(outcome.summary.contains("samples = 181"));
    }

    #[test]
    fn mesh_without_radius_has_no_mie_reference() {
        let dir = tempfile::tempdir().unwrap();
        let mesh = crate::mesh::generate_sphere(1.0, 0);
        std::fs::write(dir.path().join("s.mesh"), mesh.to_text()).unwrap();
        let text = format!(
            "experiment = \"mie\"\nfrequency = 3e8\noutput = \"{}\"\n[geometry]\nkind = \"mesh\"\npath = \"s.mesh\"\n",
            dir.path().join("out").display()
        );
        let cfg_path = dir.path().join("run.toml");
        std::fs::write(&cfg_path, text).unwrap();
        let cfg = RunConfig::load(&cfg_path).unwrap();
        let err = run(&cfg).unwrap_err();
        assert!(err.to_string().starts_with("mie:"), "{err}");
        assert_eq!(cfg.build_mesh().unwrap().num_triangles(), 20);
    }
}
