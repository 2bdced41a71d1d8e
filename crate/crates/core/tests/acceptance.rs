//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. `EFIE_ACCEPTANCE_LONG=1` adds the fine-mesh
//! accuracy run.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use efie_hybrid::bench::bench_scaling;
use efie_hybrid::config::{Geometry, RunConfig};
use efie_hybrid::farfield::{default_theta, mie_sweep, rcs_relative_error};
use efie_hybrid::hybrid::{hybrid_solve, HybridConfig, InnerSolver, SolveReport};
use efie_hybrid::linalg::{random_orthogonal, symmetric_with_eigenvalues, with_singular_values};
use efie_hybrid::mom::{BackgroundMedium, QuadratureOrder, RealSystem};
use efie_hybrid::pipeline::Problem;
use efie_hybrid::precond::PreconditionerKind;
use efie_hybrid::qalgo::{fidelity, hhl_solve, pad_pow2, vqls_qubits, vqls_solve, HhlConfig, VqlsConfig};
use efie_hybrid::qalgo::extract_classical;
use efie_hybrid::qsim::NoiseModel;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FREQ: f64 = 3e8;
const MIN: u64 = 60;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn sphere(level: u32) -> (RunConfig, Problem) {
    let cfg = RunConfig::sphere(1.0, level, FREQ);
    let p = Problem::build(&cfg).expect("sphere problem");
    (cfg, p)
}

fn solve_delta(cfg: &RunConfig, p: &Problem, solver: &HybridConfig) -> (f64, SolveReport, DVector<f64>) {
    let (x, report) = hybrid_solve(&p.real, solver).expect("hybrid solve");
    let currents = p.currents(&x).unwrap();
    let sweep = p.rcs(cfg, &currents).unwrap();
    let mie = mie_sweep(1.0, &cfg.medium, FREQ, &default_theta());
    (rcs_relative_error(&sweep, &mie).unwrap(), report, x)
}

fn solver(inner: InnerSolver) -> HybridConfig {
    HybridConfig {
        inner,
        ..HybridConfig::default()
    }
}

fn rel(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

fn mie_accuracy() -> Verdict {
    let (cfg, p) = sphere(2);
    let mut parts = Vec::new();
    let mut pass = true;
    for inner in [InnerSolver::Qr, InnerSolver::Vqls] {
        let (delta, report, _) = solve_delta(&cfg, &p, &solver(inner));
        pass &= report.converged && delta <= 0.05;
        parts.push(format!("{} delta={delta:.4} n_ext={}", inner.as_str(), report.n_ext));
    }
    verdict(pass, format!("N_e={} {} (limit 0.05)", p.rwg.len(), parts.join(", ")))
}

fn mie_accuracy_fine() -> Verdict {
    let mut cfg = RunConfig::sphere(1.0, 0, FREQ);
    cfg.geometry = Geometry::Geodesic {
        radius: 1.0,
        frequency: 12,
    };
    let p = Problem::build(&cfg).expect("fine sphere");
    let (delta, report, _) = solve_delta(&cfg, &p, &solver(InnerSolver::Qr));
    verdict(
        report.converged && delta <= 0.01,
        format!("N_e={} qr delta={delta:.4} (limit 0.01)", p.rwg.len()),
    )
}

fn solver_equivalence() -> Verdict {
    let xi = HybridConfig::default().xi_ext;
    let tol = 10.0 * xi;
    let mut worst_qr: f64 = 0.0;
    let mut worst_vqls: f64 = 0.0;
    let mut compared = 0;
    let mut systems: Vec<(String, RealSystem)> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for n in [16, 32, 48, 64] {
        let eigs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
        let a = symmetric_with_eigenvalues(&eigs, &mut rng);
        let b = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        systems.push((format!("spd{n}"), RealSystem::new(a, b).unwrap()));
    }
    for level in [1, 2] {
        systems.push((format!("efie-l{level}"), sphere(level).1.real));
    }
    for (_, sys) in &systems {
        let direct = sys.solve_direct().unwrap();
        let (x_qr, r_qr) = hybrid_solve(sys, &solver(InnerSolver::Qr)).unwrap();
        worst_qr = worst_qr.max(if r_qr.converged { rel(&x_qr, &direct) } else { f64::INFINITY });
        let (x_v, r_v) = hybrid_solve(sys, &solver(InnerSolver::Vqls)).unwrap();
        if r_qr.converged && r_v.converged {
            compared += 1;
            worst_vqls = worst_vqls.max(rel(&x_v, &x_qr));
        }
    }
    verdict(
        worst_qr <= tol && worst_vqls <= tol,
        format!(
            "{} systems: max |qr-direct|={worst_qr:.2e}, max |vqls-qr|={worst_vqls:.2e} over {compared} (limit {tol:.0e})",
            systems.len()
        ),
    )
}

fn random_hermitian(rng: &mut ChaCha8Rng) -> (DMatrix<f64>, DVector<f64>) {
    let eigs: Vec<f64> = (0..4).map(|_| rng.gen_range(0.25..1.0)).collect();
    let h = symmetric_with_eigenvalues(&eigs, rng);
    let g = DVector::from_fn(4, |_, _| rng.gen_range(-1.0..1.0));
    (h, g)
}

fn hhl_fidelity(h: &DMatrix<f64>, g: &DVector<f64>, m: usize, rng: &mut ChaCha8Rng) -> f64 {
    let out = hhl_solve(h, g, &HhlConfig::with_clock_qubits(m), &NoiseModel::noiseless(), rng).unwrap();
    let x = extract_classical(&out.state, 4).unwrap();
    let exact = h.clone().lu().solve(g).unwrap();
    fidelity(&x, &exact)
}

fn hhl_correctness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut good = 0;
    let mut worst: f64 = 1.0;
    for _ in 0..100 {
        let (h, g) = random_hermitian(&mut rng);
        let f = hhl_fidelity(&h, &g, 10, &mut rng);
        worst = worst.min(f);
        if f >= 0.99 {
            good += 1;
        }
    }
    let mut fixed_rng = ChaCha8Rng::seed_from_u64(99);
    let (h, g) = random_hermitian(&mut fixed_rng);
    let f8 = hhl_fidelity(&h, &g, 8, &mut fixed_rng);
    let f12 = hhl_fidelity(&h, &g, 12, &mut fixed_rng);
    verdict(
        good >= 95 && f12 >= f8,
        format!("{good}/100 with fidelity >= 0.99 (worst {worst:.5}); fixed system f(m=8)={f8:.7} f(m=12)={f12:.7}"),
    )
}

fn vqls_correctness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cfg = VqlsConfig::default();
    let mut converged = 0;
    let mut worst: f64 = 1.0;
    for _ in 0..100 {
        let s: Vec<f64> = (0..4).map(|_| rng.gen_range(0.25..1.0)).collect();
        let c = with_singular_values(&s, &mut rng);
        let f = DVector::from_fn(4, |_, _| rng.gen_range(-1.0..1.0));
        let out = vqls_solve(&c, &f, &cfg, &NoiseModel::noiseless(), &mut rng).unwrap();
        if out.converged {
            converged += 1;
            let x = extract_classical(&out.state, 4).unwrap();
            worst = worst.min(fidelity(&x, &c.clone().lu().solve(&f).unwrap()));
        }
    }
    let q = random_orthogonal(30, &mut rng);
    let c30 = DMatrix::identity(30, 30) * 2.0 + &q * 0.5;
    let f30 = DVector::from_fn(30, |_, _| rng.gen_range(-1.0..1.0));
    let (c32, f32_) = pad_pow2(&c30, &f30).unwrap();
    let out = vqls_solve(&c32, &f32_, &cfg, &NoiseModel::noiseless(), &mut rng).unwrap();
    verdict(
        worst >= 0.96 && out.qubits == 5 && vqls_qubits(c32.nrows()) == 5,
        format!(
            "{converged}/100 converged, worst fidelity {worst:.5}; padded {}x{} system uses {} qubits",
            c32.nrows(),
            c32.ncols(),
            out.qubits
        ),
    )
}

fn preconditioning_effect() -> Verdict {
    let (_, p) = sphere(2);
    let mut pass = true;
    let mut parts = Vec::new();
    for inner in [InnerSolver::Qr, InnerSolver::Vqls] {
        let ilut = HybridConfig {
            precond: PreconditionerKind::ilut(1e-3),
            ..solver(inner)
        };
        let ident = HybridConfig {
            precond: PreconditionerKind::Identity,
            ..solver(inner)
        };
        let (_, ri) = hybrid_solve(&p.real, &ilut).unwrap();
        let (_, rn) = hybrid_solve(&p.real, &ident).unwrap();
        let ok_ext = if rn.n_ext > 1 { ri.n_ext < rn.n_ext } else { ri.n_ext <= rn.n_ext };
        let k_ilut = ri.kappa_precond.unwrap_or(f64::NAN);
        let k_a = rn.kappa_precond.unwrap_or(f64::NAN);
        pass &= ok_ext && ri.converged && k_ilut < k_a;
        parts.push(format!(
            "{}: n_ext ilut={} identity={}",
            inner.as_str(),
            ri.n_ext,
            rn.n_ext
        ));
        if inner == InnerSolver::Qr {
            parts.push(format!("kappa(P^-1 A)={k_ilut:.2} kappa(A)={k_a:.2}"));
        }
    }
    verdict(pass, parts.join("; "))
}

fn noise_robustness() -> Verdict {
    let (cfg, p) = sphere(1);
    let clean = solver(InnerSolver::Vqls);
    let noisy = HybridConfig {
        noise: NoiseModel::new(0.2, 11).unwrap(),
        ..clean.clone()
    };
    let (d0, r0, _) = solve_delta(&cfg, &p, &clean);
    let (d1, r1, _) = solve_delta(&cfg, &p, &noisy);
    verdict(
        r1.converged && d1 <= 2.0 * d0,
        format!(
            "noiseless delta={d0:.4} (n_ext={}, n_int={}); p=0.2 delta={d1:.4} (n_ext={}, n_int={}, converged={})",
            r0.n_ext, r0.n_int, r1.n_ext, r1.n_int, r1.converged
        ),
    )
}

fn scaling_shape() -> Verdict {
    let sizes: Vec<Geometry> = (2..=5)
        .map(|frequency| Geometry::Geodesic { radius: 1.0, frequency })
        .collect();
    let cfg = HybridConfig {
        precond: PreconditionerKind::Identity,
        ..solver(InnerSolver::Qr)
    };
    let report = bench_scaling(&sizes, FREQ, &BackgroundMedium::default(), QuadratureOrder::default(), &cfg, 1)
        .expect("bench");
    let csv = report.to_csv();
    let split = csv.starts_with("geometry,") && csv.contains("t_sub_build_s") && csv.contains("t_iter_s");
    let ns: Vec<String> = report.rows.iter().map(|r| r.n.to_string()).collect();
    verdict(
        report.exponent_hybrid <= report.exponent_direct && split,
        format!(
            "N=[{}] exponent hybrid={:.3} direct={:.3} predictor={:.3} NlogN={:.3}",
            ns.join(","),
            report.exponent_hybrid,
            report.exponent_direct,
            report.exponent_predicted,
            report.exponent_nlogn
        ),
    )
}

fn invariant_suites() -> Verdict {
    let mut failures = Vec::new();
    for (name, check) in common::SUITES {
        if let Err(e) = check() {
            failures.push(format!("{name}: {}", e.lines().next().unwrap_or("")));
        }
    }
    let names: Vec<&str> = common::SUITES.iter().map(|s| s.0).collect();
    if failures.is_empty() {
        verdict(true, names.join(", "))
    } else {
        verdict(false, failures.join("; "))
    }
}

fn main() -> ExitCode {
    let criteria: [(usize, &str, fn() -> Verdict, u64); 8] = [
        (1, "Mie-validated accuracy", mie_accuracy, 5 * MIN),
        (2, "solver equivalence", solver_equivalence, 2 * MIN),
        (3, "HHL correctness", hhl_correctness, 2 * MIN),
        (4, "VQLS correctness", vqls_correctness, 5 * MIN),
        (5, "preconditioning effect", preconditioning_effect, 5 * MIN),
        (6, "noise robustness", noise_robustness, 5 * MIN),
        (7, "scaling shape", scaling_shape, 15 * MIN),
        (8, "invariant suites", invariant_suites, 3 * MIN),
    ];
    let only: Option<Vec<usize>> = std::env::var("EFIE_ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let mut failed = 0;
    for (id, name, check, budget) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let t = Instant::now();
        let v = check();
        let elapsed = t.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let pass = v.pass && in_time;
        failed += usize::from(!pass);
        println!(
            "criterion {id} ({name}): {} | {} | {:.1}s of {}s",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64(),
            budget
        );
    }
    if std::env::var("EFIE_ACCEPTANCE_LONG").is_ok_and(|v| v == "1") {
        let v = mie_accuracy_fine();
        failed += usize::from(!v.pass);
        println!("criterion 1 fine mesh: {} | {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    } else {
        println!("criterion 1 fine mesh: SKIPPED | set EFIE_ACCEPTANCE_LONG=1");
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion check(s) failed");
        ExitCode::FAILURE
    }
}
