// Success paths only: building a JsError needs a JavaScript host.
use efie_hybrid_wasm_demo::{mie_curve, solve_sphere, toy_solve};

#[test]
fn mie_curve_has_one_sample_per_degree() {
    let y = mie_curve(1.0, 3e8).unwrap();
    assert_eq!(y.len(), 181);
    assert!(y.iter().all(|v| v.is_finite()));
}

#[test]
fn coarse_sphere_solve_tracks_mie() {
    let r = solve_sphere(1.0, 1, 3e8, "qr", "ilut").unwrap();
    assert!(r.converged());
    assert_eq!(r.n_e(), 120);
    assert_eq!(r.mom_dbsm().len(), 181);
    assert!(r.delta() < 0.3, "{}", r.delta());
}

#[test]
fn toy_solvers_recover_the_direction() {
    for method in ["hhl", "vqls"] {
        let r = toy_solve(method, 1.0, 0.2, 0.5, 1.0, 0.3, 8, 0.0, 1).unwrap();
        assert_eq!(r.len(), 6);
        assert!(r[4] > 0.99, "{method}: fidelity {}", r[4]);
    }
}
