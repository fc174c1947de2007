//! Right-hand sides of the Fourier-Galerkin coefficient ODEs.
//!
//! Nonlinear system:
//! ```text
//! d/dt u_k = Lambda_k u_k - i kappa_k f(u)^_k,     Lambda_k = i kappa_k l(kappa_k)
//! ```
//! Linearized (frozen-coefficient) system:
//! ```text
//! d/dt w_k = Lambda_k w_k - P_N[ f'(u) w_x ]^_k
//! ```
//! Both products are formed on padded grids sized so the retained modes are
//! exact, which makes the pseudospectral evaluation identical to the Galerkin
//! one.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::model::ModelParams;
use crate::spectral::{padded_size, SpectralField};
use crate::timestep::SemilinearSystem;

/// Diagonal linear part `Lambda_k = i kappa_k l(kappa_k)`, `k = -N..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMultipliers {
    n_modes: usize,
    domain_scale: f64,
    lambda: Vec<Complex64>,
}

impl LinearMultipliers {
    pub fn new(params: &ModelParams, n_modes: usize) -> Self {
        let n = n_modes;
        let mut lambda = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
        for k in 1..=n {
            let kappa = params.wavenumber(k as i64);
            let v = Complex64::new(0.0, kappa * params.symbol(kappa));
            lambda[n + k] = v;
            lambda[n - k] = v.conj();
        }
        Self {
            n_modes,
            domain_scale: params.domain_scale(),
            lambda,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn domain_scale(&self) -> f64 {
        self.domain_scale
    }

    /// Storage order `k + N`.
    pub fn values(&self) -> &[Complex64] {
        &self.lambda
    }

    pub fn get(&self, k: i64) -> Complex64 {
        self.lambda[(k + self.n_modes as i64) as usize]
    }

    /// `Lambda_k u_k`.
    pub fn apply(&self, u: &SpectralField) -> SpectralField {
        debug_assert_eq!(u.n_modes(), self.n_modes);
        let coeffs = u.coeffs().iter().zip(&self.lambda).map(|(c, l)| c * l).collect();
        SpectralField::from_raw(self.n_modes, self.domain_scale, coeffs)
    }
}

pub fn linear_multipliers(params: &ModelParams, n_modes: usize) -> LinearMultipliers {
    LinearMultipliers::new(params, n_modes)
}

/// The semidiscrete nonlinear system at a fixed bandwidth.
#[derive(Debug, Clone)]
pub struct Semidiscrete {
    params: ModelParams,
    multipliers: LinearMultipliers,
    pad: usize,
    nonlinear: bool,
}

impl Semidiscrete {
    pub fn new(params: ModelParams, n_modes: usize) -> Self {
        Self {
            multipliers: LinearMultipliers::new(&params, n_modes),
            pad: padded_size(n_modes, params.q() + 1),
            params,
            nonlinear: true,
        }
    }

    /// Drops the nonlinear term, leaving the exact diagonal flow. Test builds only need this.
    pub fn linear_only(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn n_modes(&self) -> usize {
        self.multipliers.n_modes
    }

    pub fn multipliers(&self) -> &LinearMultipliers {
        &self.multipliers
    }

    /// Grid size used for the alias-free nonlinear product.
    pub fn padded_grid(&self) -> usize {
        self.pad
    }

    /// `-i kappa_k f(u)^_k` with `f(u)^` the exact coefficients of `u^{q+1}/(q+1)` on `|k| <= N`.
    pub fn nonlinear_term(&self, u: &SpectralField) -> SpectralField {
        let n = self.n_modes();
        if !self.nonlinear {
            return SpectralField::zeros(n, self.params.domain_scale());
        }
        debug_assert_eq!(u.n_modes(), n);
        let mut values = fft::synthesize(u.coeffs(), self.pad);
        for v in values.iter_mut() {
            *v = self.params.f(*v);
        }
        let mut coeffs = fft::analyze(&values, n);
        for (i, c) in coeffs.iter_mut().enumerate() {
            let kappa = self.params.wavenumber(i as i64 - n as i64);
            *c *= Complex64::new(0.0, -kappa);
        }
        SpectralField::from_raw(n, self.params.domain_scale(), coeffs)
    }

    pub fn rhs(&self, u: &SpectralField) -> SpectralField {
        let lin = self.multipliers.apply(u);
        let nl = self.nonlinear_term(u);
        let coeffs = lin.coeffs().iter().zip(nl.coeffs()).map(|(a, b)| a + b).collect();
        SpectralField::from_raw(self.n_modes(), self.params.domain_scale(), coeffs)
    }
}

impl SemilinearSystem for Semidiscrete {
    fn multipliers(&self) -> &LinearMultipliers {
        &self.multipliers
    }

    fn nonlinear(&self, _t: f64, u: &SpectralField) -> Result<SpectralField> {
        Ok(self.nonlinear_term(u))
    }
}

/// Coefficients of the Galerkin right-hand side for `u`.
pub fn rhs(params: &ModelParams, u: &SpectralField) -> Result<SpectralField> {
    check_scale(params, u)?;
    Ok(Semidiscrete::new(*params, u.n_modes()).rhs(u))
}

/// `-P_N[ f'(frozen) w_x ]`, computed exactly.
///
/// `frozen` may have any bandwidth `N_u`; the product has bandwidth `q N_u + N`
/// and is formed on a grid of more than `q N_u + 2N` points.
pub fn linearized_nonlinear_term(
    params: &ModelParams,
    w: &SpectralField,
    frozen: &SpectralField,
) -> Result<SpectralField> {
    check_scale(params, w)?;
    check_scale(params, frozen)?;
    let n = w.n_modes();
    let nu = frozen.n_modes();
    let q = params.q() as usize;
    let m = fft::good_size((q * nu + 2 * n + 1).max(2 * nu + 1));
    let mut g = fft::synthesize(frozen.coeffs(), m);
    let wx = fft::synthesize(w.derivative().coeffs(), m);
    for (gv, wv) in g.iter_mut().zip(&wx) {
        *gv = -params.f_prime(*gv) * wv;
    }
    Ok(SpectralField::from_raw(n, w.domain_scale(), fft::analyze(&g, n)))
}

/// Right-hand side of the linearized system with frozen coefficient `u_frozen`.
pub fn linearized_rhs(params: &ModelParams, w: &SpectralField, u_frozen: &SpectralField) -> Result<SpectralField> {
    let nl = linearized_nonlinear_term(params, w, u_frozen)?;
    let lin = LinearMultipliers::new(params, w.n_modes()).apply(w);
    lin.axpy(1.0, &nl)
}

/// Linearized system whose frozen coefficient is supplied as a function of time.
pub struct LinearizedSystem<F> {
    params: ModelParams,
    multipliers: LinearMultipliers,
    frozen: F,
}

impl<F> LinearizedSystem<F>
where
    F: Fn(f64) -> Result<SpectralField>,
{
    pub fn new(params: ModelParams, n_modes: usize, frozen: F) -> Self {
        Self {
            multipliers: LinearMultipliers::new(&params, n_modes),
            params,
            frozen,
        }
    }
}

impl<F> SemilinearSystem for LinearizedSystem<F>
where
    F: Fn(f64) -> Result<SpectralField>,
{
    fn multipliers(&self) -> &LinearMultipliers {
        &self.multipliers
    }

    fn nonlinear(&self, t: f64, w: &SpectralField) -> Result<SpectralField> {
        let u = (self.frozen)(t)?;
        linearized_nonlinear_term(&self.params, w, &u)
    }
}

fn check_scale(params: &ModelParams, u: &SpectralField) -> Result<()> {
    if params.domain_scale() != u.domain_scale() {
        return Err(Error::Shape(format!(
            "field has L = {} but the model has L = {}",
            u.domain_scale(),
            params.domain_scale()
        )));
    }
    Ok(())
}
