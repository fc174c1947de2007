//! Initial-condition generators.
//!
//! Every generator returns a Hermitian field whose mean coefficient is real.
//! Localized profiles (Gaussian, KdV soliton) are periodized by summing
//! translates, so the sampled function is smooth across the domain boundary.

use std::f64::consts::PI;
use std::path::PathBuf;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::snapshot;
use crate::spectral::{PhysicalField, SpectralField};

/// Largest admissible `sech^2` at the domain edge for the KdV soliton, relative to the peak.
pub const SOLITON_EDGE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialDataSpec {
    Gaussian { amplitude: f64, width: f64, center: f64 },
    /// `amplitude * cos(mode * x / L)`.
    Cosine { amplitude: f64, mode: u32 },
    KdvSoliton { speed: f64, center: f64 },
    RandomSobolev { mu: f64, seed: u64 },
    /// Solitary wave from Petviashvili iteration started at `gaussian(1, 1, 0)`.
    PetviashviliWave { speed: f64, tol: f64, max_iter: usize },
    File { path: PathBuf },
}

impl InitialDataSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Gaussian { .. } => "gaussian",
            Self::Cosine { .. } => "cosine",
            Self::KdvSoliton { .. } => "kdv_soliton",
            Self::RandomSobolev { .. } => "random_sobolev",
            Self::PetviashviliWave { .. } => "petviashvili_wave",
            Self::File { .. } => "file",
        }
    }

    pub fn build(&self, params: &ModelParams, n_modes: usize) -> Result<SpectralField> {
        let l = params.domain_scale();
        match *self {
            Self::Gaussian {
                amplitude,
                width,
                center,
            } => gaussian(amplitude, width, center, n_modes, l),
            Self::Cosine { amplitude, mode } => {
                let mut half = vec![Complex64::new(0.0, 0.0); n_modes + 1];
                if (mode as usize) <= n_modes {
                    let a = if mode == 0 { amplitude } else { 0.5 * amplitude };
                    half[mode as usize] = Complex64::new(a, 0.0);
                }
                SpectralField::from_nonnegative(l, &half)
            }
            Self::KdvSoliton { speed, center } => kdv_soliton(speed, center, params, n_modes),
            Self::RandomSobolev { mu, seed } => random_sobolev(mu, seed, n_modes, l),
            Self::PetviashviliWave { speed, tol, max_iter } => {
                let guess = gaussian(1.0, 1.0, 0.0, n_modes, l)?;
                petviashvili(params, speed, &guess, tol, max_iter).map(|(u, _)| u)
            }
            Self::File { ref path } => {
                let snap = snapshot::read_snapshot(path)?;
                if snap.field.domain_scale() != l {
                    return Err(Error::Shape(format!(
                        "snapshot {} has L = {}, model has L = {l}",
                        path.display(),
                        snap.field.domain_scale()
                    )));
                }
                Ok(snap.field.resized(n_modes))
            }
        }
    }
}

/// `P_N` of the periodized Gaussian `a exp(-((x - x0) / w)^2)`.
///
/// Coefficients come from samples at `M = 4N` points.
pub fn gaussian(a: f64, w: f64, x0: f64, n_modes: usize, domain_scale: f64) -> Result<SpectralField> {
    if !(w > 0.0) {
        return Err(Error::invalid("width", "width > 0", w));
    }
    let period = 2.0 * PI * domain_scale;
    let images = 1 + (8.0 * w / period).ceil() as i64;
    let m = (4 * n_modes).max(2 * n_modes + 1);
    let field = PhysicalField::from_fn(m, domain_scale, |x| {
        let d = wrap(x - x0, period);
        (-images..=images)
            .map(|j| {
                let s = (d + j as f64 * period) / w;
                (-s * s).exp()
            })
            .sum::<f64>()
            * a
    })?;
    field.to_spectral(n_modes)
}

/// Exact KdV solitary wave `3c sech^2(sqrt(c / delta) (x - x0) / 2)`, periodized.
///
/// Requires `m = 1`, `gamma = 0`, `q = 1`, `c > 0`, and a domain long enough
/// that `sech^2` at the edge is below [`SOLITON_EDGE_TOLERANCE`]; the overlap
/// of neighbouring translates is then far below rounding in the traveling-wave
/// equation.
pub fn kdv_soliton(c: f64, x0: f64, params: &ModelParams, n_modes: usize) -> Result<SpectralField> {
    if params.m() != 1 {
        return Err(Error::invalid("m", "m = 1 for the KdV soliton", params.m()));
    }
    if params.gamma() != 0.0 {
        return Err(Error::invalid("gamma", "gamma = 0 for the KdV soliton", params.gamma()));
    }
    if params.q() != 1 {
        return Err(Error::invalid("q", "q = 1 for the KdV soliton", params.q()));
    }
    if !(c > 0.0) {
        return Err(Error::invalid("speed", "c > 0", c));
    }
    let l = params.domain_scale();
    let rate = 0.5 * (c / params.delta()).sqrt();
    let edge = sech2(rate * PI * l);
    if edge > SOLITON_EDGE_TOLERANCE {
        return Err(Error::invalid(
            "domain_scale",
            "sech^2 of the soliton at the domain edge <= 1e-6",
            format!("L = {l} (edge value {edge:e})"),
        ));
    }
    let period = 2.0 * PI * l;
    let m = (4 * n_modes).max(2 * n_modes + 1);
    let field = PhysicalField::from_fn(m, l, |x| {
        let d = wrap(x - x0, period);
        (-2..=2).map(|j| sech2(rate * (d + j as f64 * period))).sum::<f64>() * 3.0 * c
    })?;
    field.to_spectral(n_modes)
}

/// `||rhs(phi) + c phi_x|| / ||phi_x||`: zero for an exact wave moving right at speed `c`.
pub fn traveling_wave_residual(params: &ModelParams, c: f64, phi: &SpectralField) -> Result<f64> {
    let ux = phi.derivative();
    Ok(crate::semidiscrete::rhs(params, phi)?.axpy(c, &ux)?.l2_norm() / ux.l2_norm())
}

/// Random field with `|u_k| ~ (1 + kappa_k^2)^{-(mu+1)/2}`, zero mean,
/// normalized to unit `H^mu` norm.
///
/// Phases are drawn in order `k = 1, 2, ...` from a seeded ChaCha8 stream, so
/// for a fixed seed the unnormalized coefficients at bandwidth `N` are a
/// prefix of those at any larger bandwidth.
pub fn random_sobolev(mu: f64, seed: u64, n_modes: usize, domain_scale: f64) -> Result<SpectralField> {
    if !(mu >= 0.0) {
        return Err(Error::invalid("mu", "mu >= 0", mu));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut half = vec![Complex64::new(0.0, 0.0); n_modes + 1];
    for (k, c) in half.iter_mut().enumerate().skip(1) {
        let kappa = k as f64 / domain_scale;
        let amp = (1.0 + kappa * kappa).powf(-(mu + 1.0) / 2.0);
        let phase = rng.random::<f64>() * 2.0 * PI;
        *c = Complex64::from_polar(amp, phase);
    }
    let u = SpectralField::from_nonnegative(domain_scale, &half)?;
    let norm = u.sobolev_norm(mu);
    if norm == 0.0 {
        return Ok(u);
    }
    Ok(u.scale(1.0 / norm))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PetviashviliReport {
    pub iterations: usize,
    /// `||(c + L) phi - f(phi)|| / ||phi||` before each update, plus the final one.
    pub residuals: Vec<f64>,
    /// Stabilizing factors `s_n`.
    pub stabilizers: Vec<f64>,
    pub final_residual: f64,
}

/// Solve `(c + L) phi = f(phi)` by Petviashvili iteration:
///
/// ```text
/// phi_{n+1} = s_n^theta (c + L)^{-1} f(phi_n),
/// s_n = <(c + L) phi_n, phi_n> / <f(phi_n), phi_n>,   theta = (q + 1) / q
/// ```
///
/// The converged profile is translated so its maximum sits at `x = 0`.
pub fn petviashvili(
    params: &ModelParams,
    c: f64,
    guess: &SpectralField,
    tol: f64,
    max_iter: usize,
) -> Result<(SpectralField, PetviashviliReport)> {
    let n = guess.n_modes();
    if guess.domain_scale() != params.domain_scale() {
        return Err(Error::Shape("guess and model have different domain scales".into()));
    }
    let mut op = vec![0.0; 2 * n + 1];
    for k in 0..=n as i64 {
        let v = c + params.symbol(params.wavenumber(k));
        if !(v > 0.0) {
            return Err(Error::Spectrum { mode: k, value: v });
        }
        op[(n as i64 + k) as usize] = v;
        op[(n as i64 - k) as usize] = v;
    }
    if guess.l2_norm() == 0.0 {
        return Err(Error::Argument("Petviashvili iteration needs a nonzero guess".into()));
    }

    let q = params.q();
    let theta = (q + 1) as f64 / q as f64;
    let apply_op = |u: &SpectralField| {
        let coeffs = u.coeffs().iter().zip(&op).map(|(c, o)| c * o).collect();
        SpectralField::from_raw(n, u.domain_scale(), coeffs)
    };
    let nonlinear = |u: &SpectralField| u.dealiased_power(q + 1).scale(1.0 / (q + 1) as f64);

    let mut phi = guess.clone();
    let mut residuals = Vec::new();
    let mut stabilizers = Vec::new();
    for it in 0..=max_iter {
        let lphi = apply_op(&phi);
        let fphi = nonlinear(&phi);
        let residual = lphi.sub(&fphi)?.l2_norm() / phi.l2_norm();
        residuals.push(residual);
        if !residual.is_finite() {
            break;
        }
        if residual <= tol {
            let centered = phi.translate(-peak_position(&phi));
            return Ok((
                centered,
                PetviashviliReport {
                    iterations: it,
                    residuals,
                    stabilizers,
                    final_residual: residual,
                },
            ));
        }
        if it == max_iter {
            break;
        }
        let s = lphi.l2_inner(&phi)? / fphi.l2_inner(&phi)?;
        if !(s > 0.0) || !s.is_finite() {
            break;
        }
        stabilizers.push(s);
        let factor = s.powf(theta);
        let coeffs = fphi.coeffs().iter().zip(&op).map(|(f, o)| f * (factor / o)).collect();
        phi = SpectralField::from_raw(n, phi.domain_scale(), coeffs);
    }
    Err(Error::Convergence {
        iterations: stabilizers.len(),
        last_residual: *residuals.last().unwrap_or(&f64::NAN),
        residuals,
    })
}

/// Location of the global maximum of `u` in `[-L pi, L pi)`.
///
/// The collocation maximum on an 8x oversampled grid is refined by a
/// parabola through its neighbours, then polished with Newton steps on `u_x = 0`.
pub fn peak_position(u: &SpectralField) -> f64 {
    let m = 8 * (2 * u.n_modes() + 1);
    let vals = u.to_physical(m).expect("oversampled grid");
    let v = vals.values();
    let (j, _) = v
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &x)| if x > best.1 { (i, x) } else { best });
    let h = u.domain_length() / m as f64;
    let (ym, y0, yp) = (v[(j + m - 1) % m], v[j], v[(j + 1) % m]);
    let denom = ym - 2.0 * y0 + yp;
    let offset = if denom < 0.0 { 0.5 * (ym - yp) / denom } else { 0.0 };
    let x_grid = -PI * u.domain_scale() + h * j as f64;
    let mut x = x_grid + offset * h;
    for _ in 0..8 {
        let (_, ux, uxx) = u.eval_derivs(x);
        if !(uxx < 0.0) {
            break;
        }
        let dx = ux / uxx;
        if dx.abs() > h {
            break;
        }
        x -= dx;
        if dx.abs() <= 1e-15 * (1.0 + x.abs()) {
            break;
        }
    }
    wrap(x, u.domain_length())
}

/// Map `x` into `[-period / 2, period / 2)`.
pub(crate) fn wrap(x: f64, period: f64) -> f64 {
    x - period * ((x + 0.5 * period) / period).floor()
}

fn sech2(y: f64) -> f64 {
    let e = (-2.0 * y.abs()).exp();
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::c_pi;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn kdv(l: f64) -> ModelParams {
        ModelParams::kdv(1.0).unwrap().with_domain_scale(l).unwrap()
    }

    fn assert_hermitian(u: &SpectralField) {
        assert_eq!(u.coeff(0).im, 0.0);
        for k in 1..=u.n_modes() as i64 {
            assert_eq!(u.coeff(-k), u.coeff(k).conj());
        }
    }

    #[test]
    fn gaussian_examples() {
        assert_eq!(gaussian(0.0, 0.5, 0.0, 16, 1.0).unwrap().l2_norm(), 0.0);
        let (a, w) = (1.3, 0.4);
        let g = gaussian(a, w, 0.2, 64, 2.0).unwrap();
        assert_relative_eq!(c_pi(&g), a * w * PI.sqrt(), max_relative = 1e-8);
        assert_hermitian(&g);

        let s = 0.7;
        let moved = gaussian(a, w, 0.2 + s, 64, 2.0).unwrap();
        let shifted = g.translate(s);
        for (p, q) in moved.coeffs().iter().zip(shifted.coeffs()) {
            assert_abs_diff_eq!((p - q).norm(), 0.0, epsilon = 1e-12);
        }
        assert!(gaussian(1.0, 0.0, 0.0, 4, 1.0).is_err());
    }

    #[test]
    fn soliton_examples() {
        let p = kdv(8.0);
        let u = kdv_soliton(0.5, 0.0, &p, 256).unwrap();
        assert_relative_eq!(u.evaluate(0.0), 1.5, max_relative = 1e-12);
        assert_hermitian(&u);
        let tiny = kdv_soliton(1e-9, 0.0, &kdv(8.0e4), 64);
        // too wide for the domain unless L grows with 1/sqrt(c)
        assert!(tiny.is_ok() || matches!(tiny, Err(Error::InvalidParameter { .. })));
        let small = kdv_soliton(1e-3, 0.0, &kdv(300.0), 256).unwrap();
        assert!(small.linf_norm(4) <= 3.1e-3);
    }

    #[test]
    fn soliton_is_a_traveling_wave() {
        let p = kdv(8.0);
        let c = 0.5;
        let u = kdv_soliton(c, 0.0, &p, 256).unwrap();
        let residual = traveling_wave_residual(&p, c, &u).unwrap();
        assert!(residual <= 1e-8, "residual {residual:e}");
    }

    #[test]
    fn soliton_preconditions() {
        let benj = ModelParams::benjamin(1.0, 0.5, 1).unwrap().with_domain_scale(8.0).unwrap();
        assert!(matches!(kdv_soliton(0.5, 0.0, &benj, 64), Err(Error::InvalidParameter { field: "gamma", .. })));
        let q2 = ModelParams::benjamin(1.0, 0.0, 2).unwrap().with_domain_scale(8.0).unwrap();
        assert!(matches!(kdv_soliton(0.5, 0.0, &q2, 64), Err(Error::InvalidParameter { field: "q", .. })));
        assert!(matches!(kdv_soliton(0.5, 0.0, &kdv(1.0), 64), Err(Error::InvalidParameter { field: "domain_scale", .. })));
        assert!(kdv_soliton(-0.5, 0.0, &kdv(8.0), 64).is_err());
    }

    #[test]
    fn random_sobolev_examples() {
        let a = random_sobolev(4.0, 7, 64, 1.0).unwrap();
        let b = random_sobolev(4.0, 7, 64, 1.0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_sobolev(4.0, 8, 64, 1.0).unwrap());
        assert_relative_eq!(a.sobolev_norm(4.0), 1.0, max_relative = 1e-12);
        assert_eq!(a.coeff(0), Complex64::new(0.0, 0.0));
        assert_hermitian(&a);

        // nested phases across bandwidths
        let big = random_sobolev(4.0, 7, 128, 1.0).unwrap();
        let ratio = big.coeff(5) / a.coeff(5);
        assert_abs_diff_eq!(ratio.im, 0.0, epsilon = 1e-12);
        assert_relative_eq!(ratio.re, big.coeff(40).re / a.coeff(40).re, max_relative = 1e-12);
    }

    #[test]
    fn random_sobolev_regularity_cap() {
        let norms: Vec<f64> = [64, 128, 256]
            .iter()
            .map(|&n| random_sobolev(2.0, 3, n, 1.0).unwrap().sobolev_norm(3.0))
            .collect();
        for w in norms.windows(2) {
            let r = w[1] / w[0];
            assert!((1.3..1.5).contains(&r), "growth ratio {r}");
        }
    }

    #[test]
    fn petviashvili_recovers_kdv_soliton() {
        let p = kdv(8.0);
        let guess = gaussian(1.0, 1.0, 0.0, 256, 8.0).unwrap();
        let (phi, rep) = petviashvili(&p, 0.5, &guess, 1e-12, 500).unwrap();
        assert!(rep.final_residual <= 1e-12);
        let exact = kdv_soliton(0.5, 0.0, &p, 256).unwrap();
        let err = phi.sub(&exact).unwrap().linf_norm(8);
        assert!(err <= 1e-8, "L-inf error {err:e}");
        let last: Vec<f64> = rep.stabilizers.iter().rev().take(5).map(|s| (s - 1.0).abs()).collect();
        // reversed order: each earlier iterate is at least as far from 1, up to rounding
        assert!(last.windows(2).all(|w| w[0] <= w[1] + 1e-14), "{last:?}");
    }

    #[test]
    fn petviashvili_error_paths() {
        let p = ModelParams::benjamin(1.0, 1.0, 1).unwrap().with_domain_scale(8.0).unwrap();
        let guess = gaussian(1.0, 1.0, 0.0, 64, 8.0).unwrap();
        // 0.2 + l(k / 8) first turns negative at k = 3
        match petviashvili(&p, 0.2, &guess, 1e-10, 100) {
            Err(Error::Spectrum { mode, value }) => {
                assert_eq!(mode, 3);
                assert!(value < 0.0);
            }
            other => panic!("expected spectrum error, got {other:?}"),
        }
        let zero = SpectralField::zeros(64, 8.0);
        assert!(matches!(petviashvili(&p, 1.0, &zero, 1e-10, 100), Err(Error::Argument(_))));
        match petviashvili(&p, 1.0, &guess, 1e-14, 3) {
            Err(Error::Convergence { residuals, .. }) => assert_eq!(residuals.len(), 4),
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn peak_of_shifted_soliton() {
        let p = kdv(8.0);
        for x0 in [0.0, 0.123, -3.3, 24.9] {
            let u = kdv_soliton(0.5, x0, &p, 256).unwrap();
            let got = peak_position(&u);
            assert_abs_diff_eq!(wrap(got - x0, u.domain_length()), 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn kinds() {
        let p = ModelParams::benjamin(1.0, 1.0, 1).unwrap();
        let c = InitialDataSpec::Cosine { amplitude: 2.0, mode: 3 }.build(&p, 8).unwrap();
        assert_relative_eq!(c.evaluate(0.0), 2.0, max_relative = 1e-14);
        assert_eq!(InitialDataSpec::RandomSobolev { mu: 1.0, seed: 1 }.kind(), "random_sobolev");
    }
}
