//! Truncated Fourier fields on `[-L pi, L pi)`.
//!
//! A [`SpectralField`] stores the coefficients `u_k`, `-N <= k <= N`, of a real
//! trigonometric polynomial `u(x) = sum_k u_k e^{i k x / L}`. Hermitian symmetry
//! `u_{-k} = conj(u_k)` is enforced whenever a field is built.
//!
//! Inner products and norms carry the domain length `2 L pi`, so that
//! `l2_inner(u, v) = int u v dx` exactly (Parseval).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    n_modes: usize,
    domain_scale: f64,
    coeffs: Vec<Complex64>,
}

/// Samples of a real function on `M` equispaced points `x_j = -L pi + 2 L pi j / M`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    values: Vec<f64>,
    domain_scale: f64,
}

impl SpectralField {
    pub fn zeros(n_modes: usize, domain_scale: f64) -> Self {
        Self {
            n_modes,
            domain_scale,
            coeffs: vec![ZERO; 2 * n_modes + 1],
        }
    }

    /// Build from the full coefficient vector `coeffs[k + N]`. The vector is
    /// symmetrized: `u_k <- (u_k + conj(u_{-k})) / 2`, which leaves an already
    /// Hermitian vector bit-for-bit unchanged.
    pub fn from_coeffs(n_modes: usize, domain_scale: f64, mut coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != 2 * n_modes + 1 {
            return Err(Error::Shape(format!(
                "expected {} coefficients for N = {n_modes}, got {}",
                2 * n_modes + 1,
                coeffs.len()
            )));
        }
        check_scale(domain_scale)?;
        symmetrize(&mut coeffs);
        Ok(Self {
            n_modes,
            domain_scale,
            coeffs,
        })
    }

    /// Build from `u_0, u_1, ..., u_N`; negative modes are the conjugates.
    pub fn from_nonnegative(domain_scale: f64, half: &[Complex64]) -> Result<Self> {
        if half.is_empty() {
            return Err(Error::Shape("need at least the mean coefficient".into()));
        }
        check_scale(domain_scale)?;
        let n = half.len() - 1;
        let mut coeffs = vec![ZERO; 2 * n + 1];
        coeffs[n] = Complex64::new(half[0].re, 0.0);
        for k in 1..=n {
            coeffs[n + k] = half[k];
            coeffs[n - k] = half[k].conj();
        }
        Ok(Self {
            n_modes: n,
            domain_scale,
            coeffs,
        })
    }

    /// Interpolate a function sampled at `samples_per_mode * (2N+1)` points, then
    /// truncate to `|k| <= N`.
    pub fn from_fn(n_modes: usize, domain_scale: f64, n_points: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        PhysicalField::from_fn(n_points, domain_scale, f)?.to_spectral(n_modes)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn domain_scale(&self) -> f64 {
        self.domain_scale
    }

    /// Full coefficient vector, index `k + N`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `u_k`; zero outside `|k| <= N`.
    pub fn coeff(&self, k: i64) -> Complex64 {
        if k.unsigned_abs() as usize > self.n_modes {
            ZERO
        } else {
            self.coeffs[(k + self.n_modes as i64) as usize]
        }
    }

    /// Wavenumber indices `-N..=N` in storage order.
    pub fn indices(&self) -> impl Iterator<Item = i64> {
        let n = self.n_modes as i64;
        -n..=n
    }

    pub fn wavenumber(&self, k: i64) -> f64 {
        k as f64 / self.domain_scale
    }

    pub fn domain_length(&self) -> f64 {
        2.0 * PI * self.domain_scale
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn to_physical(&self, n_points: usize) -> Result<PhysicalField> {
        if n_points < 2 * self.n_modes + 1 {
            return Err(Error::Bandwidth(format!(
                "{n_points} points cannot represent N = {} (need at least {})",
                self.n_modes,
                2 * self.n_modes + 1
            )));
        }
        Ok(PhysicalField {
            values: fft::synthesize(&self.coeffs, n_points),
            domain_scale: self.domain_scale,
        })
    }

    /// Truncation to `|k| <= n`, i.e. the L2 projection `P_n`.
    pub fn project(&self, n: usize) -> Result<Self> {
        if n > self.n_modes {
            return Err(Error::Bandwidth(format!(
                "cannot project N = {} onto the larger space N = {n}",
                self.n_modes
            )));
        }
        Ok(self.resized(n))
    }

    /// Zero-extension into the larger space `|k| <= n`.
    pub fn embed(&self, n: usize) -> Result<Self> {
        if n < self.n_modes {
            return Err(Error::Bandwidth(format!(
                "cannot embed N = {} into the smaller space N = {n}",
                self.n_modes
            )));
        }
        Ok(self.resized(n))
    }

    /// Truncate or zero-extend to bandwidth `n`.
    pub fn resized(&self, n: usize) -> Self {
        let mut coeffs = vec![ZERO; 2 * n + 1];
        let keep = n.min(self.n_modes);
        let (src, dst) = (self.n_modes, n);
        coeffs[dst - keep..=dst + keep].copy_from_slice(&self.coeffs[src - keep..=src + keep]);
        Self {
            n_modes: n,
            domain_scale: self.domain_scale,
            coeffs,
        }
    }

    /// `P_N` of the pointwise power `u^p`, free of aliasing.
    ///
    /// `u^p` has bandwidth `pN`; on a grid of `M > (p+1)N` points no alias
    /// image of it lands in `|k| <= N`, so the truncated discrete coefficients
    /// are the exact Fourier coefficients.
    pub fn dealiased_power(&self, p: u32) -> Self {
        assert!(p >= 1, "power must be at least 1");
        if p == 1 {
            return self.clone();
        }
        let m = padded_size(self.n_modes, p);
        let mut values = fft::synthesize(&self.coeffs, m);
        for v in values.iter_mut() {
            *v = v.powi(p as i32);
        }
        Self {
            n_modes: self.n_modes,
            domain_scale: self.domain_scale,
            coeffs: fft::analyze(&values, self.n_modes),
        }
    }

    /// `int u v dx = 2 L pi sum_k u_k conj(v_k)`.
    pub fn l2_inner(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        let s: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum();
        Ok(self.domain_length() * s)
    }

    pub fn l2_norm(&self) -> f64 {
        (self.domain_length() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// `(2 L pi sum_k (1 + kappa_k^2)^mu |u_k|^2)^{1/2}`.
    pub fn sobolev_norm(&self, mu: f64) -> f64 {
        let s: f64 = self
            .indices()
            .zip(&self.coeffs)
            .map(|(k, c)| {
                let kappa = self.wavenumber(k);
                (1.0 + kappa * kappa).powf(mu) * c.norm_sqr()
            })
            .sum();
        (self.domain_length() * s).sqrt()
    }

    /// Approximate sup norm: max of `|u|` over `oversample * (2N + 1)` collocation points.
    pub fn linf_norm(&self, oversample: usize) -> f64 {
        let m = oversample.max(1) * (2 * self.n_modes + 1);
        fft::synthesize(&self.coeffs, m)
            .into_iter()
            .fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Spectral derivative `u_x`.
    pub fn derivative(&self) -> Self {
        self.map_modes(|k, c| c * Complex64::new(0.0, self.wavenumber(k)))
    }

    /// `u(x - shift)`: `u_k -> e^{-i kappa_k shift} u_k`.
    pub fn translate(&self, shift: f64) -> Self {
        self.map_modes(|k, c| c * Complex64::from_polar(1.0, -self.wavenumber(k) * shift))
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map_modes(|_, c| c * a)
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| x + y * a).collect();
        Ok(Self {
            n_modes: self.n_modes,
            domain_scale: self.domain_scale,
            coeffs,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    /// Point evaluation `u(x)` by direct summation.
    pub fn evaluate(&self, x: f64) -> f64 {
        self.eval_derivs(x).0
    }

    /// `(u, u_x, u_xx)` at `x` by direct summation.
    pub fn eval_derivs(&self, x: f64) -> (f64, f64, f64) {
        let c0 = self.coeffs[self.n_modes].re;
        let (mut u, mut ux, mut uxx) = (c0, 0.0, 0.0);
        for k in 1..=self.n_modes as i64 {
            let kappa = self.wavenumber(k);
            let z = self.coeff(k) * Complex64::from_polar(1.0, kappa * x);
            // u_k e^{ikx} + conj = 2 Re
            u += 2.0 * z.re;
            ux += -2.0 * kappa * z.im;
            uxx += -2.0 * kappa * kappa * z.re;
        }
        (u, ux, uxx)
    }

    pub(crate) fn map_modes(&self, f: impl Fn(i64, Complex64) -> Complex64) -> Self {
        let mut coeffs: Vec<Complex64> = self.indices().zip(&self.coeffs).map(|(k, &c)| f(k, c)).collect();
        symmetrize(&mut coeffs);
        Self {
            n_modes: self.n_modes,
            domain_scale: self.domain_scale,
            coeffs,
        }
    }

    pub(crate) fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n_modes != other.n_modes || self.domain_scale != other.domain_scale {
            return Err(Error::Shape(format!(
                "fields differ: (N = {}, L = {}) vs (N = {}, L = {})",
                self.n_modes, self.domain_scale, other.n_modes, other.domain_scale
            )));
        }
        Ok(())
    }

    /// Same as [`from_coeffs`](Self::from_coeffs) for internal callers that
    /// already guarantee the length.
    pub(crate) fn from_raw(n_modes: usize, domain_scale: f64, mut coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), 2 * n_modes + 1);
        symmetrize(&mut coeffs);
        Self {
            n_modes,
            domain_scale,
            coeffs,
        }
    }
}

impl PhysicalField {
    pub fn new(values: Vec<f64>, domain_scale: f64) -> Result<Self> {
        check_scale(domain_scale)?;
        if values.is_empty() {
            return Err(Error::Shape("empty sample vector".into()));
        }
        Ok(Self { values, domain_scale })
    }

    pub fn from_fn(n_points: usize, domain_scale: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid(n_points, domain_scale).map(f).collect();
        Self::new(values, domain_scale)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_points(&self) -> usize {
        self.values.len()
    }

    pub fn domain_scale(&self) -> f64 {
        self.domain_scale
    }

    pub fn points(&self) -> impl Iterator<Item = f64> {
        grid(self.values.len(), self.domain_scale)
    }

    /// Discrete Fourier coefficients of the samples truncated to `|k| <= n`.
    ///
    /// This is `P_n` of the trigonometric interpolant. Modes above `M / 2` in
    /// the sampled function alias onto `k - M`; that is expected, not an error.
    pub fn to_spectral(&self, n_modes: usize) -> Result<SpectralField> {
        let m = self.values.len();
        if m < 2 * n_modes + 1 {
            return Err(Error::Bandwidth(format!(
                "{m} points cannot resolve N = {n_modes} (need at least {})",
                2 * n_modes + 1
            )));
        }
        Ok(SpectralField {
            n_modes,
            domain_scale: self.domain_scale,
            coeffs: fft::analyze(&self.values, n_modes),
        })
    }
}

/// Grid points `x_j = -L pi + 2 L pi j / M`.
pub fn grid(n_points: usize, domain_scale: f64) -> impl Iterator<Item = f64> {
    let h = 2.0 * PI * domain_scale / n_points as f64;
    (0..n_points).map(move |j| -PI * domain_scale + h * j as f64)
}

/// Transform-friendly grid size for an alias-free product of total polynomial
/// degree `p` in fields of bandwidth `n`: smallest 5-smooth `M >= (p+1) n + 1`.
pub fn padded_size(n: usize, p: u32) -> usize {
    fft::good_size((p as usize + 1) * n + 1)
}

fn symmetrize(coeffs: &mut [Complex64]) {
    let n = (coeffs.len() - 1) / 2;
    coeffs[n].im = 0.0;
    for k in 1..=n {
        let c = (coeffs[n + k] + coeffs[n - k].conj()) * 0.5;
        coeffs[n + k] = c;
        coeffs[n - k] = c.conj();
    }
}

fn check_scale(domain_scale: f64) -> Result<()> {
    if domain_scale > 0.0 && domain_scale.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("domain_scale", "domain_scale > 0", domain_scale))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cosine(n: usize, k: usize) -> SpectralField {
        let mut half = vec![ZERO; n + 1];
        half[k] = c(0.5, 0.0);
        SpectralField::from_nonnegative(1.0, &half).unwrap()
    }

    fn random_field(n: usize, l: f64, seed: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let half: Vec<Complex64> = (0..=n)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        SpectralField::from_nonnegative(l, &half).unwrap()
    }

    #[test]
    fn constant_synthesis() {
        let mut half = vec![ZERO; 4];
        half[0] = c(2.0, 0.0);
        let u = SpectralField::from_nonnegative(1.0, &half).unwrap();
        for v in u.to_physical(9).unwrap().values() {
            assert_abs_diff_eq!(*v, 2.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn cosine_on_four_points() {
        let vals = cosine(1, 1).to_physical(4).unwrap();
        for (got, want) in vals.values().iter().zip([-1.0, 0.0, 1.0, 0.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
    }

    #[test]
    fn bandwidth_errors() {
        let u = random_field(5, 1.0, 1);
        assert!(matches!(u.to_physical(10), Err(Error::Bandwidth(_))));
        let p = PhysicalField::from_fn(10, 1.0, |x| x.sin()).unwrap();
        assert!(matches!(p.to_spectral(5), Err(Error::Bandwidth(_))));
        assert!(matches!(u.project(6), Err(Error::Bandwidth(_))));
        assert!(matches!(u.embed(4), Err(Error::Bandwidth(_))));
    }

    #[test]
    fn analysis_of_known_functions() {
        let u = PhysicalField::from_fn(7, 1.0, |_| 1.5).unwrap().to_spectral(3).unwrap();
        assert_abs_diff_eq!(u.coeff(0).re, 1.5, epsilon = 1e-15);
        for k in 1..=3 {
            assert_abs_diff_eq!(u.coeff(k).norm(), 0.0, epsilon = 1e-15);
        }

        let s = PhysicalField::from_fn(5, 1.0, |x| (2.0 * x).sin()).unwrap().to_spectral(2).unwrap();
        assert_abs_diff_eq!(s.coeff(2).im, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.coeff(-2).im, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.coeff(2).re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.coeff(1).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn aliasing_on_minimal_grid() {
        // cos((N+1)x) sampled on M = 2N+1 points reappears at k = N+1-M = -N.
        let n = 4;
        let m = 2 * n + 1;
        let u = PhysicalField::from_fn(m, 1.0, |x| ((n + 1) as f64 * x).cos())
            .unwrap()
            .to_spectral(n)
            .unwrap();
        assert_abs_diff_eq!(u.coeff(n as i64).norm(), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn round_trip_minimal_grid() {
        for l in [1.0, 3.5] {
            let u = random_field(17, l, 7);
            let back = u.to_physical(35).unwrap().to_spectral(17).unwrap();
            for (a, b) in u.coeffs().iter().zip(back.coeffs()) {
                assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn projection() {
        let u = random_field(8, 1.0, 3);
        assert_eq!(u.project(8).unwrap(), u);
        let mut half = vec![ZERO; 9];
        half[8] = c(0.3, -0.2);
        let top = SpectralField::from_nonnegative(1.0, &half).unwrap();
        assert_eq!(top.project(7).unwrap().l2_norm(), 0.0);
        let pu = u.project(5).unwrap().embed(8).unwrap();
        assert!(u.sub(&pu).unwrap().l2_norm() <= u.l2_norm());
    }

    #[test]
    fn power_examples() {
        let u = random_field(6, 1.0, 11);
        assert_eq!(u.dealiased_power(1), u);
        let sq = cosine(3, 1).dealiased_power(2);
        assert_abs_diff_eq!(sq.coeff(0).re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(sq.coeff(2).re, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(sq.coeff(-2).re, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(sq.coeff(1).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sq.coeff(3).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn norm_examples() {
        let mut half = vec![ZERO; 2];
        half[1] = c(0.0, -0.5);
        let s = SpectralField::from_nonnegative(1.0, &half).unwrap();
        assert_abs_diff_eq!(s.l2_norm(), PI.sqrt(), epsilon = 1e-15);

        let one = SpectralField::from_nonnegative(1.0, &[c(1.0, 0.0), ZERO]).unwrap();
        for mu in [0.0, 1.0, 2.5] {
            assert_abs_diff_eq!(one.sobolev_norm(mu), (2.0 * PI).sqrt(), epsilon = 1e-15);
        }

        assert_abs_diff_eq!(cosine(1, 1).linf_norm(8), 1.0, epsilon = 1e-3);
    }

    #[test]
    fn shape_mismatch() {
        let a = random_field(4, 1.0, 1);
        assert!(matches!(a.l2_inner(&random_field(5, 1.0, 1)), Err(Error::Shape(_))));
        assert!(matches!(a.l2_inner(&random_field(4, 2.0, 1)), Err(Error::Shape(_))));
        assert!(matches!(
            SpectralField::from_coeffs(3, 1.0, vec![ZERO; 6]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn point_evaluation_matches_synthesis() {
        let u = random_field(9, 2.0, 5);
        let p = u.to_physical(40).unwrap();
        for (x, v) in p.points().zip(p.values()) {
            assert_abs_diff_eq!(u.evaluate(x), *v, epsilon = 1e-12);
        }
        let (_, ux, uxx) = u.eval_derivs(0.37);
        assert_abs_diff_eq!(ux, u.derivative().evaluate(0.37), epsilon = 1e-12);
        assert_abs_diff_eq!(uxx, u.derivative().derivative().evaluate(0.37), epsilon = 1e-11);
    }

    #[test]
    fn projection_error_is_superalgebraic_for_analytic_data() {
        // 1 / (2 - cos x), resolved far beyond double precision at N = 256
        let reference = SpectralField::from_fn(256, 1.0, 1024, |x| 1.0 / (2.0 - x.cos())).unwrap();
        let err = |n: usize| reference.sub(&reference.project(n).unwrap().embed(256).unwrap()).unwrap().l2_norm();
        let errs: Vec<f64> = [4, 8, 16].iter().map(|&n| err(n)).collect();
        assert!(errs[1] < errs[0] && errs[2] < errs[1]);
        // ratios err(2N)/err(N) shrink as N grows
        assert!(errs[2] / errs[1] < errs[1] / errs[0]);
        assert!(errs[2] / errs[1] < 1e-3);
    }

    proptest! {
        #[test]
        fn parseval_matches_trapezoid(seed in 0u64..1000, n in 1usize..24, l in 0.5f64..4.0) {
            let u = random_field(n, l, seed);
            let m = 4 * n + 1;
            let vals = u.to_physical(m).unwrap();
            let h = 2.0 * PI * l / m as f64;
            let quad: f64 = vals.values().iter().map(|v| v * v).sum::<f64>() * h;
            let norm2 = u.l2_norm().powi(2);
            prop_assert!((quad - norm2).abs() <= 1e-12 * norm2);
        }

        #[test]
        fn inverse_inequality(seed in 0u64..1000, n in 1usize..64) {
            let u = random_field(n, 1.0, seed);
            prop_assert!(u.sobolev_norm(1.0) <= 2.0 * n as f64 * u.sobolev_norm(0.0));
        }

        #[test]
        fn fields_are_hermitian(seed in 0u64..1000, n in 1usize..20) {
            let u = random_field(n, 1.0, seed).dealiased_power(3).translate(0.3).derivative();
            prop_assert_eq!(u.coeff(0).im, 0.0);
            for k in 1..=n as i64 {
                prop_assert_eq!(u.coeff(-k), u.coeff(k).conj());
            }
        }
    }
}
