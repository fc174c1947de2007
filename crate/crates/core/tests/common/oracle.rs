//! Direct O(N^2) evaluation of the Galerkin right-hand side by repeated
//! coefficient convolution; shares no code with the FFT path.

use benjamin_core::{Complex64, ModelParams, SpectralField};
use rand::Rng;

/// Full (untruncated) convolution of coefficient vectors indexed `-na..=na` and `-nb..=nb`.
pub fn convolve(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let na = (a.len() - 1) / 2;
    let nb = (b.len() - 1) / 2;
    let mut out = vec![Complex64::new(0.0, 0.0); 2 * (na + nb) + 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `i kappa (l(kappa) u_k - [u^{q+1}]_k / (q+1))` for `|k| <= N`.
pub fn rhs_direct(params: &ModelParams, u: &SpectralField) -> Vec<Complex64> {
    let n = u.n_modes();
    let c = u.coeffs();
    let mut power = c.to_vec();
    for _ in 0..params.q() {
        power = convolve(&power, c);
    }
    let np = (power.len() - 1) / 2;
    let qp1 = (params.q() + 1) as f64;
    let (delta, gamma) = (params.delta(), params.gamma());
    let (two_m, two_r) = (2.0 * params.m() as f64, 2.0 * params.r());
    (0..=2 * n)
        .map(|i| {
            let k = i as f64 - n as f64;
            let kappa = k / params.domain_scale();
            let l = delta * kappa.abs().powf(two_m) - gamma * kappa.abs().powf(two_r);
            let fk = power[np - n + i] / qp1;
            Complex64::new(0.0, kappa) * (c[i] * l - fk)
        })
        .collect()
}

/// Random real field whose coefficients have modulus at most `1 / (2N + 1)`, so `|u| <= 1`.
pub fn random_field<R: Rng>(rng: &mut R, n: usize, domain_scale: f64) -> SpectralField {
    let bound = 1.0 / (2 * n + 1) as f64;
    let half: Vec<Complex64> = (0..=n)
        .map(|k| {
            let z = Complex64::from_polar(bound * rng.random::<f64>(), rng.random_range(0.0..std::f64::consts::TAU));
            if k == 0 { Complex64::new(z.re, 0.0) } else { z }
        })
        .collect();
    SpectralField::from_nonnegative(domain_scale, &half).expect("valid half spectrum")
}
