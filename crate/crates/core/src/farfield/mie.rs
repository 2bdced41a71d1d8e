//! Mie series for plane-wave scattering by a PEC sphere.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::mom::BackgroundMedium;

/// Series length `⌈ka + 4(ka)^{1/3} + 2⌉`.
pub fn truncation(ka: f64) -> usize {
    (ka + 4.0 * ka.cbrt() + 2.0).ceil() as usize
}

/// Riccati–Bessel `ψ_n(x) = x j_n(x)` and `χ_n(x) = x y_n(x)` for
/// `n = 0..=n_max`, by upward recurrence.
fn riccati_bessel(x: f64, n_max: usize) -> (Vec<f64>, Vec<f64>) {
    let mut psi = vec![0.0; n_max + 2];
    let mut chi = vec![0.0; n_max + 2];
    psi[0] = x.sin();
    chi[0] = -x.cos();
    psi[1] = x.sin() / x - x.cos();
    chi[1] = -x.cos() / x - x.sin();
    for n in 1..=n_max {
        let f = (2 * n + 1) as f64 / x;
        psi[n + 1] = f * psi[n] - psi[n - 1];
        chi[n + 1] = f * chi[n] - chi[n - 1];
    }
    (psi, chi)
}

/// PEC Mie coefficients `(a_n, b_n)` for `n = 1..=terms`.
fn coefficients(x: f64, terms: usize) -> Vec<(Complex64, Complex64)> {
    let (psi, chi) = riccati_bessel(x, terms);
    (1..=terms)
        .map(|n| {
            let nf = n as f64;
            let xi = Complex64::new(psi[n], -chi[n]);
            let xi_prev = Complex64::new(psi[n - 1], -chi[n - 1]);
            let dpsi = psi[n - 1] - nf * psi[n] / x;
            let dxi = xi_prev - xi * (nf / x);
            (Complex64::new(dpsi, 0.0) / dxi, Complex64::new(psi[n], 0.0) / xi)
        })
        .collect()
}

/// E-plane scattering amplitude `S₂` at scattering angle `gamma` (radians
/// from the forward direction).
fn s2(coeffs: &[(Complex64, Complex64)], gamma: f64) -> Complex64 {
    let mu = gamma.cos();
    let (mut pi_prev, mut pi_cur) = (0.0, 1.0);
    let mut sum = Complex64::default();
    for (idx, &(a, b)) in coeffs.iter().enumerate() {
        let n = (idx + 1) as f64;
        let tau = n * mu * pi_cur - (n + 1.0) * pi_prev;
        sum += (a * tau + b * pi_cur) * ((2.0 * n + 1.0) / (n * (n + 1.0)));
        let pi_next = ((2.0 * n + 1.0) * mu * pi_cur - (n + 1.0) * pi_prev) / n;
        pi_prev = pi_cur;
        pi_cur = pi_next;
    }
    sum
}

/// Bistatic RCS (m²) of a PEC sphere for an x̂-polarized wave travelling
/// along −ẑ, observed in the φ = 0° plane at polar angles `theta_deg`.
pub fn mie_rcs(radius: f64, medium: &BackgroundMedium, frequency: f64, theta_deg: &[f64]) -> Vec<f64> {
    let k = medium.wavenumber(frequency);
    let ka = k * radius;
    mie_rcs_with_terms(radius, k, truncation(ka), theta_deg)
}

/// [`mie_rcs`] with an explicit series length; `k` is the wavenumber.
pub fn mie_rcs_with_terms(radius: f64, k: f64, terms: usize, theta_deg: &[f64]) -> Vec<f64> {
    assert!(radius > 0.0, "sphere radius must be positive");
    let coeffs = coefficients(k * radius, terms);
    theta_deg
        .iter()
        .map(|t| {
            let gamma = PI - t.to_radians();
            4.0 * PI / (k * k) * s2(&coeffs, gamma).norm_sqr()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k_for(ka: f64, r: f64) -> f64 {
        ka / r
    }

    #[test]
    fn geometric_optics_backscatter() {
        // creeping-wave ripple is about ±4% near ka = 20, so the optics limit
        // is checked on the ripple average over one ka period
        let r = 1.0;
        let samples: Vec<f64> = (0..=40)
            .map(|i| {
                let ka = 19.0 + i as f64 * 0.05;
                mie_rcs_with_terms(r, k_for(ka, r), truncation(ka), &[0.0])[0] / (PI * r * r)
            })
            .collect();
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean σ/πr² = {mean}");
        // frozen from an independent scipy spherical-Bessel evaluation
        let at_20 = mie_rcs_with_terms(r, k_for(20.0, r), truncation(20.0), &[0.0])[0] / PI;
        assert!((at_20 - 0.966_357_397_7).abs() < 1e-8, "σ/πr² at ka=20: {at_20}");
    }

    #[test]
    fn rayleigh_scaling() {
        let r = 0.3;
        let lo = mie_rcs_with_terms(r, k_for(0.05, r), truncation(0.05), &[0.0])[0];
        let hi = mie_rcs_with_terms(r, k_for(0.1, r), truncation(0.1), &[0.0])[0];
        assert!((hi / lo - 16.0).abs() < 0.05 * 16.0, "ratio {}", hi / lo);
        // small-sphere backscatter 9πa²(ka)⁴
        let expect = 9.0 * PI * r * r * 0.05f64.powi(4);
        assert!((lo / expect - 1.0).abs() < 0.01);
    }

    #[test]
    fn series_self_convergence_at_ka_6_3() {
        let medium = BackgroundMedium::default();
        let k = medium.wavenumber(300e6);
        let theta: Vec<f64> = (0..=180).map(f64::from).collect();
        let l = truncation(k);
        let base = mie_rcs_with_terms(1.0, k, l, &theta);
        let more = mie_rcs_with_terms(1.0, k, l + 5, &theta);
        for (a, b) in base.iter().zip(&more) {
            assert!((a - b).abs() <= 1e-8 * b.abs(), "{a} vs {b}");
        }
    }

    #[test]
    fn forward_exceeds_backscatter_for_large_sphere() {
        let sigma = mie_rcs(1.0, &BackgroundMedium::default(), 300e6, &[0.0, 180.0]);
        assert!(sigma[1] > sigma[0]);
    }
}
