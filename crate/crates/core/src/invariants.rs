//! Conserved functionals of the periodic problem:
//!
//! ```text
//! C(u) = int u dx,   I(u) = int u^2 dx,   E(u) = int (u L u - 2 F(u)) dx
//! ```
//!
//! All three are evaluated exactly from the coefficients (the `F` integral uses
//! the mean of the dealiased power `u^{q+2}`), so any drift along a computed
//! trajectory is time-discretization error.

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::spectral::SpectralField;

/// Denominator floor for relative drifts of functionals that vanish initially.
pub const DRIFT_FLOOR: f64 = 1e-30;

pub fn c_pi(u: &SpectralField) -> f64 {
    u.domain_length() * u.coeff(0).re
}

pub fn i_pi(u: &SpectralField) -> f64 {
    u.domain_length() * u.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>()
}

pub fn e_pi(u: &SpectralField, params: &ModelParams) -> f64 {
    let quadratic: f64 = u
        .indices()
        .zip(u.coeffs())
        .map(|(k, c)| params.symbol(u.wavenumber(k)) * c.norm_sqr())
        .sum();
    let q = params.q();
    let mean_power = u.dealiased_power(q + 2).coeff(0).re;
    let int_big_f = mean_power / ((q + 1) * (q + 2)) as f64;
    u.domain_length() * (quadratic - 2.0 * int_big_f)
}

/// Time series of the three functionals with their maximal relative drifts.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InvariantRecord {
    pub times: Vec<f64>,
    pub c: Vec<f64>,
    pub i: Vec<f64>,
    pub e: Vec<f64>,
    pub rel_drift_c: f64,
    pub rel_drift_i: f64,
    pub rel_drift_e: f64,
}

impl InvariantRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, t: f64, u: &SpectralField, params: &ModelParams) {
        self.times.push(t);
        self.c.push(c_pi(u));
        self.i.push(i_pi(u));
        self.e.push(e_pi(u, params));
        let latest = |series: &[f64]| {
            let x0 = series[0];
            (series[series.len() - 1] - x0).abs() / x0.abs().max(DRIFT_FLOOR)
        };
        self.rel_drift_c = self.rel_drift_c.max(latest(&self.c));
        self.rel_drift_i = self.rel_drift_i.max(latest(&self.i));
        self.rel_drift_e = self.rel_drift_e.max(latest(&self.e));
    }
}

/// `max_t |X(t) - X(0)| / max(|X(0)|, DRIFT_FLOOR)`.
pub fn rel_drift(series: &[f64]) -> f64 {
    let Some(&x0) = series.first() else { return 0.0 };
    let max_dev = series.iter().fold(0.0f64, |acc, x| acc.max((x - x0).abs()));
    max_dev / x0.abs().max(DRIFT_FLOOR)
}

pub fn record_invariants<'a, I>(snapshots: I, params: &ModelParams) -> Result<InvariantRecord>
where
    I: IntoIterator<Item = (f64, &'a SpectralField)>,
{
    let mut rec = InvariantRecord::default();
    for (t, u) in snapshots {
        rec.push(t, u, params);
    }
    if rec.is_empty() {
        return Err(Error::Argument("no snapshots to evaluate".into()));
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semidiscrete::Semidiscrete;
    use crate::timestep::{evolve_recording, IntegratorConfig, Method};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_field(n: usize, l: f64, seed: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let half: Vec<Complex64> = (0..=n)
            .map(|k| {
                let a = 0.5 / (1.0 + k as f64);
                c(rng.random_range(-a..a), rng.random_range(-a..a))
            })
            .collect();
        SpectralField::from_nonnegative(l, &half).unwrap()
    }

    #[test]
    fn mass_examples() {
        let u = SpectralField::from_nonnegative(1.0, &[c(1.0, 0.0), c(0.5, 0.0)]).unwrap();
        assert_relative_eq!(c_pi(&u), 2.0 * PI);
        let s = SpectralField::from_nonnegative(1.0, &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -0.5)]).unwrap();
        assert_eq!(c_pi(&s), 0.0);
        assert_eq!(c_pi(&SpectralField::zeros(4, 1.0)), 0.0);
    }

    #[test]
    fn l2_examples() {
        let s = SpectralField::from_nonnegative(1.0, &[c(0.0, 0.0), c(0.0, -0.5)]).unwrap();
        assert_relative_eq!(i_pi(&s), PI, max_relative = 1e-15);
        let k = SpectralField::from_nonnegative(2.0, &[c(1.5, 0.0), c(0.0, 0.0)]).unwrap();
        assert_relative_eq!(i_pi(&k), 4.0 * PI * 2.25, max_relative = 1e-15);
        let u = random_field(12, 1.0, 3);
        assert_eq!(i_pi(&u), u.l2_inner(&u).unwrap());
    }

    #[test]
    fn l2_matches_quadrature() {
        let u = random_field(20, 1.5, 8);
        let m = 200;
        let vals = u.to_physical(m).unwrap();
        let h = u.domain_length() / m as f64;
        let quad: f64 = vals.values().iter().map(|v| v * v).sum::<f64>() * h;
        assert_relative_eq!(i_pi(&u), quad, max_relative = 1e-12);
    }

    #[test]
    fn energy_examples() {
        let p = ModelParams::new(1, 0.0, 0.0, 1.0, 1, 1.0).unwrap();
        let u = SpectralField::from_nonnegative(1.0, &[c(0.0, 0.0), c(0.5, 0.0), c(0.0, 0.0)]).unwrap();
        assert_relative_eq!(e_pi(&u, &p), PI, max_relative = 1e-14);
        assert_eq!(e_pi(&SpectralField::zeros(5, 1.0), &p), 0.0);
    }

    #[test]
    fn energy_matches_quadrature() {
        // uLu computed spectrally, F(u) pointwise on a fine grid
        let p = ModelParams::new(1, 0.5, 0.7, 1.3, 2, 1.0).unwrap();
        let u = random_field(16, 1.0, 21);
        let lu = u.map_modes(|k, cf| cf * p.symbol(u.wavenumber(k)));
        let m = 301;
        let uv = u.to_physical(m).unwrap();
        let luv = lu.to_physical(m).unwrap();
        let h = u.domain_length() / m as f64;
        let quad: f64 = uv
            .values()
            .iter()
            .zip(luv.values())
            .map(|(a, b)| a * b - 2.0 * p.big_f(*a))
            .sum::<f64>()
            * h;
        assert_relative_eq!(e_pi(&u, &p), quad, max_relative = 1e-10);
    }

    #[test]
    fn record_requires_snapshots() {
        let p = ModelParams::benjamin(1.0, 1.0, 1).unwrap();
        let empty: Vec<(f64, &SpectralField)> = vec![];
        assert!(matches!(record_invariants(empty, &p), Err(Error::Argument(_))));
        let u = random_field(6, 1.0, 1);
        let rec = record_invariants([(0.0, &u)], &p).unwrap();
        assert_eq!((rec.rel_drift_c, rec.rel_drift_i, rec.rel_drift_e), (0.0, 0.0, 0.0));
    }

    #[test]
    fn linear_flow_keeps_l2() {
        let p = ModelParams::benjamin(1.0, 1.0, 1).unwrap();
        let sys = Semidiscrete::new(p, 32).linear_only();
        let u = random_field(32, 1.0, 4);
        let cfg = IntegratorConfig::new(Method::Etdrk4, 0.01, 1.0, 1).unwrap();
        let traj = evolve_recording(&u, &sys, &cfg).unwrap();
        let rec = record_invariants(traj.times.iter().copied().zip(&traj.fields), &p).unwrap();
        assert!(rec.rel_drift_i <= 1e-13, "{}", rec.rel_drift_i);
        assert_eq!(rec.rel_drift_c, 0.0);
    }

    #[test]
    fn drift_floor() {
        assert_eq!(rel_drift(&[0.0, 0.0]), 0.0);
        assert_abs_diff_eq!(rel_drift(&[2.0, 2.5, 1.0]), 0.5);
    }

    proptest! {
        #[test]
        fn energy_is_translation_invariant(seed in 0u64..300, shift in -3.0f64..3.0, q in 1u32..4) {
            let p = ModelParams::benjamin(1.0, 1.0, q).unwrap();
            let u = random_field(12, 1.0, seed);
            let e0 = e_pi(&u, &p);
            let e1 = e_pi(&u.translate(shift), &p);
            prop_assert!((e0 - e1).abs() <= 1e-12 * e0.abs().max(1e-12));
        }
    }
}
