//! Closed-form static potential integrals over a flat triangle, used to
//! extract the `1/R` singularity of the Green function.

use crate::mesh::Point3;

/// `∫_T 1/|r − r'| dS'` and `∫_T r'/|r − r'| dS'` for observation point `r`.
pub fn static_potentials(corners: &[Point3; 3], r: &Point3) -> (f64, Point3) {
    let normal = (corners[1] - corners[0])
        .cross(&(corners[2] - corners[0]))
        .normalize();
    let d = normal.dot(&(r - corners[0]));
    let abs_d = d.abs();
    let rho = r - normal * d;

    let mut scalar = 0.0;
    let mut in_plane = Point3::zeros();
    for i in 0..3 {
        let pm = corners[i];
        let pp = corners[(i + 1) % 3];
        let edge = pp - pm;
        let len = edge.norm();
        let l_hat = edge / len;
        let u_hat = l_hat.cross(&normal);

        let s_minus = (pm - r).dot(&l_hat);
        let s_plus = (pp - r).dot(&l_hat);
        let t0 = (pm - r).dot(&u_hat);
        let r_minus = (r - pm).norm();
        let r_plus = (r - pp).norm();
        let r0_sq = t0 * t0 + d * d;

        let scale = len * len;
        if r0_sq <= 1e-24 * scale {
            // observation point on this edge's line: both terms carry a
            // vanishing factor except the endpoint products
            in_plane += u_hat * (0.5 * (s_plus * r_plus - s_minus * r_minus));
            continue;
        }

        // R + s without cancellation when s is negative
        let sum = |big_r: f64, s: f64| {
            if s >= 0.0 {
                big_r + s
            } else {
                r0_sq / (big_r - s)
            }
        };
        let f = (sum(r_plus, s_plus) / sum(r_minus, s_minus)).ln();
        let beta = (t0 * s_plus / (r0_sq + abs_d * r_plus)).atan()
            - (t0 * s_minus / (r0_sq + abs_d * r_minus)).atan();

        scalar += t0 * f - abs_d * beta;
        in_plane += u_hat * (0.5 * (r0_sq * f + s_plus * r_plus - s_minus * r_minus));
    }
    let vector = in_plane + rho * scalar;
    (scalar, vector)
}
