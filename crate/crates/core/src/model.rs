//! Equation parameters, the Fourier symbol of `L` and the power nonlinearity.

use crate::error::{Error, Result};

/// Parameters `(m, r, gamma, delta, q)` of
/// `u_t - L u_x + f(u)_x = 0` on the periodic domain `[-L pi, L pi)`.
///
/// `L` (`domain_scale`) stretches the standard `[-pi, pi)` interval; every
/// wavenumber index `k` maps to the physical wavenumber `k / L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    m: u32,
    r: f64,
    gamma: f64,
    delta: f64,
    q: u32,
    domain_scale: f64,
}

impl ModelParams {
    pub fn new(m: u32, r: f64, gamma: f64, delta: f64, q: u32, domain_scale: f64) -> Result<Self> {
        if m < 1 {
            return Err(Error::invalid("m", "m >= 1", m));
        }
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::invalid("r", "r >= 0", r));
        }
        if r >= m as f64 {
            return Err(Error::invalid("r", "r < m", r));
        }
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::invalid("gamma", "gamma >= 0", gamma));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::invalid("delta", "delta > 0", delta));
        }
        if q < 1 {
            return Err(Error::invalid("q", "q >= 1", q));
        }
        if !(domain_scale > 0.0) || !domain_scale.is_finite() {
            return Err(Error::invalid("domain_scale", "domain_scale > 0", domain_scale));
        }
        Ok(Self {
            m,
            r,
            gamma,
            delta,
            q,
            domain_scale,
        })
    }

    /// Generalized Benjamin equation (`m = 1`, `r = 1/2`) on `[-pi, pi)`.
    pub fn benjamin(delta: f64, gamma: f64, q: u32) -> Result<Self> {
        Self::new(1, 0.5, gamma, delta, q, 1.0)
    }

    /// KdV (`m = 1`, `gamma = 0`, `q = 1`) on `[-pi, pi)`.
    pub fn kdv(delta: f64) -> Result<Self> {
        Self::new(1, 0.5, 0.0, delta, 1, 1.0)
    }

    pub fn with_domain_scale(self, domain_scale: f64) -> Result<Self> {
        Self::new(self.m, self.r, self.gamma, self.delta, self.q, domain_scale)
    }

    pub fn m(&self) -> u32 {
        self.m
    }
    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn q(&self) -> u32 {
        self.q
    }
    pub fn domain_scale(&self) -> f64 {
        self.domain_scale
    }

    /// Physical wavenumber of index `k`.
    pub fn wavenumber(&self, k: i64) -> f64 {
        k as f64 / self.domain_scale
    }

    /// `l(kappa) = delta |kappa|^{2m} - gamma |kappa|^{2r}`, with `|0|^0 = 1`.
    pub fn symbol(&self, kappa: f64) -> f64 {
        let a = kappa.abs();
        let high = self.delta * a.powi(2 * self.m as i32);
        high - self.gamma * abs_pow(a, 2.0 * self.r)
    }

    /// `f(u) = u^{q+1} / (q+1)`.
    pub fn f(&self, u: f64) -> f64 {
        let q = self.q as i32;
        u.powi(q + 1) / (q + 1) as f64
    }

    /// Primitive `F(u) = u^{q+2} / ((q+1)(q+2))`, `F(0) = 0`.
    pub fn big_f(&self, u: f64) -> f64 {
        let q = self.q as i32;
        u.powi(q + 2) / ((q + 1) * (q + 2)) as f64
    }

    /// `f'(u) = u^q`.
    pub fn f_prime(&self, u: f64) -> f64 {
        u.powi(self.q as i32)
    }
}

/// `a^e` for `a >= 0`, with `0^0 = 1`.
fn abs_pow(a: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if a == 0.0 {
        0.0
    } else if e.fract() == 0.0 && e.abs() < i32::MAX as f64 {
        a.powi(e as i32)
    } else {
        (e * a.ln()).exp()
    }
}
