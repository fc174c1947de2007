//! Exponential time integrators for `u' = Lambda u + N(t, u)` with diagonal `Lambda`.
//!
//! Both schemes integrate the linear part exactly, so the step size is limited
//! only by the nonlinear dynamics. Step size is fixed; the last step is
//! shortened to land on `t_end`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::semidiscrete::LinearMultipliers;
use crate::spectral::SpectralField;

/// Below this `|z|` the ETD weights are evaluated as contour means.
const CONTOUR_THRESHOLD: f64 = 0.5;
const CONTOUR_POINTS: usize = 64;
const CONTOUR_RADIUS: f64 = 1.0;
/// L2 growth factor over the initial norm treated as blow-up.
const BLOWUP_FACTOR: f64 = 1e6;

/// A semilinear system with diagonal stiff part.
pub trait SemilinearSystem {
    fn multipliers(&self) -> &LinearMultipliers;
    /// Nonlinear part of the right-hand side at time `t`.
    fn nonlinear(&self, t: f64, u: &SpectralField) -> Result<SpectralField>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Cox-Matthews fourth-order exponential time differencing RK.
    #[default]
    Etdrk4,
    /// Integrating-factor classical RK4.
    Ifrk4,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Etdrk4 => "etdrk4",
            Method::Ifrk4 => "ifrk4",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "etdrk4" => Ok(Method::Etdrk4),
            "ifrk4" => Ok(Method::Ifrk4),
            other => Err(Error::Argument(format!("unknown integrator `{other}` (expected etdrk4 or ifrk4)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub dt: f64,
    pub t_end: f64,
    /// Steps between observer calls.
    pub snapshot_stride: usize,
}

impl IntegratorConfig {
    pub fn new(method: Method, dt: f64, t_end: f64, snapshot_stride: usize) -> Result<Self> {
        let cfg = Self {
            method,
            dt,
            t_end,
            snapshot_stride,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::invalid("integrator.dt", "dt > 0", self.dt));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::invalid("integrator.t_end", "t_end > 0", self.t_end));
        }
        if self.dt > self.t_end {
            return Err(Error::invalid("integrator.dt", "dt <= t_end", self.dt));
        }
        if self.snapshot_stride < 1 {
            return Err(Error::invalid("integrator.snapshot_stride", "snapshot_stride >= 1", 0));
        }
        Ok(())
    }

    /// Number of steps, the last possibly shortened.
    pub fn step_count(&self) -> usize {
        let r = self.t_end / self.dt;
        let nearest = r.round();
        if (r - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            nearest.max(1.0) as usize
        } else {
            r.ceil() as usize
        }
    }

    /// Time after `i` steps.
    pub fn time_at(&self, i: usize) -> f64 {
        if i >= self.step_count() {
            self.t_end
        } else {
            i as f64 * self.dt
        }
    }
}

/// Default step size: half of `min(1e-2, 1 / (kappa_max * max(1, A^q)))` with
/// `A` the sup norm of the data. This resolves the advective time scale of the
/// nonlinear term; the linear part is integrated exactly and imposes nothing.
pub fn default_time_step(params: &ModelParams, n_modes: usize, amplitude: f64) -> f64 {
    let kappa_max = params.wavenumber(n_modes.max(1) as i64);
    let speed = amplitude.abs().powi(params.q() as i32).max(1.0);
    0.5 * (1e-2f64).min(1.0 / (kappa_max * speed))
}

/// Per-mode weights for one step of size `dt`.
#[derive(Debug, Clone)]
pub struct StepCoefficients {
    method: Method,
    dt: f64,
    e: Vec<Complex64>,
    e_half: Vec<Complex64>,
    etd: Option<EtdCoefficients>,
}

/// ETDRK4 weights: `q` for the half-step stages, `f1, f2, f3` for the update.
#[derive(Debug, Clone)]
pub struct EtdCoefficients {
    pub dt: f64,
    pub q: Vec<Complex64>,
    pub f1: Vec<Complex64>,
    pub f2: Vec<Complex64>,
    pub f3: Vec<Complex64>,
}

/// ETDRK4 weights for every mode of `multipliers`.
///
/// Small `|Lambda_k dt|` are evaluated as the mean over a circle of radius 1
/// centred at `z`, which avoids the cancellation in the closed forms.
pub fn etd_coefficients(multipliers: &LinearMultipliers, dt: f64) -> EtdCoefficients {
    let n = multipliers.n_modes();
    let zero = Complex64::new(0.0, 0.0);
    let mut out = EtdCoefficients {
        dt,
        q: vec![zero; 2 * n + 1],
        f1: vec![zero; 2 * n + 1],
        f2: vec![zero; 2 * n + 1],
        f3: vec![zero; 2 * n + 1],
    };
    for k in 0..=n {
        let w = etd_weights(multipliers.values()[n + k] * dt);
        for (dst, v) in [&mut out.q, &mut out.f1, &mut out.f2, &mut out.f3].into_iter().zip(w) {
            dst[n + k] = v * dt;
            dst[n - k] = (v * dt).conj();
        }
    }
    out
}

/// Dimensionless `[Q, f1, f2, f3]` at `z = Lambda dt`.
pub fn etd_weights(z: Complex64) -> [Complex64; 4] {
    if z.norm() >= CONTOUR_THRESHOLD {
        return etd_weights_direct(z);
    }
    let mut acc = [Complex64::new(0.0, 0.0); 4];
    for j in 0..CONTOUR_POINTS {
        let theta = PI * (j as f64 + 0.5) / CONTOUR_POINTS as f64 * 2.0;
        let w = etd_weights_direct(z + Complex64::from_polar(CONTOUR_RADIUS, theta));
        for (a, v) in acc.iter_mut().zip(w) {
            *a += v;
        }
    }
    acc.map(|a| a / CONTOUR_POINTS as f64)
}

fn etd_weights_direct(z: Complex64) -> [Complex64; 4] {
    let ez = z.exp();
    let ez2 = (z * 0.5).exp();
    let z2 = z * z;
    let z3 = z2 * z;
    [
        (ez2 - 1.0) / z,
        (-4.0 - z + ez * (4.0 - 3.0 * z + z2)) / z3,
        (2.0 + z + ez * (z - 2.0)) / z3,
        (-4.0 - 3.0 * z - z2 + ez * (4.0 - z)) / z3,
    ]
}

impl StepCoefficients {
    pub fn new(method: Method, multipliers: &LinearMultipliers, dt: f64) -> Self {
        let e = multipliers.values().iter().map(|l| (l * dt).exp()).collect();
        let e_half = multipliers.values().iter().map(|l| (l * (0.5 * dt)).exp()).collect();
        let etd = match method {
            Method::Etdrk4 => Some(etd_coefficients(multipliers, dt)),
            Method::Ifrk4 => None,
        };
        Self {
            method,
            dt,
            e,
            e_half,
            etd,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn etd(&self) -> Option<&EtdCoefficients> {
        self.etd.as_ref()
    }
}

/// Advance `u` from `t` by one step of `coeffs.dt()`.
pub fn step<S: SemilinearSystem + ?Sized>(
    system: &S,
    coeffs: &StepCoefficients,
    t: f64,
    u: &SpectralField,
) -> Result<SpectralField> {
    let n = u.n_modes();
    let scale = u.domain_scale();
    let h = coeffs.dt;
    let field = |v: Vec<Complex64>| SpectralField::from_raw(n, scale, v);
    let (e, e2) = (&coeffs.e, &coeffs.e_half);
    let u0 = u.coeffs();

    let next = match (&coeffs.etd, coeffs.method) {
        (Some(etd), Method::Etdrk4) => {
            let nu = system.nonlinear(t, u)?;
            let nu = nu.coeffs();
            let a: Vec<_> = (0..u0.len()).map(|i| e2[i] * u0[i] + etd.q[i] * nu[i]).collect();
            let a = field(a);
            let na = system.nonlinear(t + 0.5 * h, &a)?;
            let na = na.coeffs();
            let b: Vec<_> = (0..u0.len()).map(|i| e2[i] * u0[i] + etd.q[i] * na[i]).collect();
            let nb = system.nonlinear(t + 0.5 * h, &field(b))?;
            let nb = nb.coeffs();
            let a = a.coeffs();
            let c: Vec<_> = (0..u0.len())
                .map(|i| e2[i] * a[i] + etd.q[i] * (2.0 * nb[i] - nu[i]))
                .collect();
            let nc = system.nonlinear(t + h, &field(c))?;
            let nc = nc.coeffs();
            (0..u0.len())
                .map(|i| {
                    e[i] * u0[i] + etd.f1[i] * nu[i] + 2.0 * etd.f2[i] * (na[i] + nb[i]) + etd.f3[i] * nc[i]
                })
                .collect()
        }
        _ => {
            let k1: Vec<_> = system.nonlinear(t, u)?.coeffs().iter().map(|c| c * h).collect();
            let u2: Vec<_> = (0..u0.len()).map(|i| e2[i] * (u0[i] + 0.5 * k1[i])).collect();
            let k2: Vec<_> = system.nonlinear(t + 0.5 * h, &field(u2))?.coeffs().iter().map(|c| c * h).collect();
            let u3: Vec<_> = (0..u0.len()).map(|i| e2[i] * u0[i] + 0.5 * k2[i]).collect();
            let k3: Vec<_> = system.nonlinear(t + 0.5 * h, &field(u3))?.coeffs().iter().map(|c| c * h).collect();
            let u4: Vec<_> = (0..u0.len()).map(|i| e[i] * u0[i] + e2[i] * k3[i]).collect();
            let k4: Vec<_> = system.nonlinear(t + h, &field(u4))?.coeffs().iter().map(|c| c * h).collect();
            (0..u0.len())
                .map(|i| e[i] * u0[i] + (e[i] * k1[i] + 2.0 * e2[i] * (k2[i] + k3[i]) + k4[i]) / 6.0)
                .collect()
        }
    };
    let out = field(next);
    if !out.is_finite() {
        return Err(Error::Divergence {
            time: t + h,
            reason: "non-finite coefficient".into(),
        });
    }
    Ok(out)
}

/// Integrate from `t = 0` to `config.t_end`.
///
/// `observer(t, u)` runs after every `snapshot_stride`-th step and after the
/// final step, i.e. `ceil(steps / stride)` times.
pub fn evolve<S, O>(u0: &SpectralField, system: &S, config: &IntegratorConfig, mut observer: O) -> Result<SpectralField>
where
    S: SemilinearSystem + ?Sized,
    O: FnMut(f64, &SpectralField),
{
    config.validate()?;
    let mult = system.multipliers();
    if mult.n_modes() != u0.n_modes() {
        return Err(Error::Shape(format!(
            "system has N = {} but data has N = {}",
            mult.n_modes(),
            u0.n_modes()
        )));
    }
    let steps = config.step_count();
    let full = StepCoefficients::new(config.method, mult, config.dt);
    let last_dt = config.t_end - (steps - 1) as f64 * config.dt;
    let last = if last_dt == config.dt {
        None
    } else {
        Some(StepCoefficients::new(config.method, mult, last_dt))
    };

    let norm0 = u0.l2_norm();
    let mut u = u0.clone();
    for i in 0..steps {
        let t = i as f64 * config.dt;
        let coeffs = match (&last, i + 1 == steps) {
            (Some(c), true) => c,
            _ => &full,
        };
        u = step(system, coeffs, t, &u)?;
        let t_next = config.time_at(i + 1);
        if norm0 > 0.0 && u.l2_norm() > BLOWUP_FACTOR * norm0 {
            return Err(Error::Divergence {
                time: t_next,
                reason: format!("L2 norm grew beyond {BLOWUP_FACTOR:e} times its initial value"),
            });
        }
        if (i + 1) % config.snapshot_stride == 0 || i + 1 == steps {
            observer(t_next, &u);
        }
    }
    Ok(u)
}

/// Initial field plus every observed snapshot.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub fields: Vec<SpectralField>,
}

impl Trajectory {
    pub fn last(&self) -> &SpectralField {
        self.fields.last().expect("trajectory holds the initial field")
    }
}

pub fn evolve_recording<S>(u0: &SpectralField, system: &S, config: &IntegratorConfig) -> Result<Trajectory>
where
    S: SemilinearSystem + ?Sized,
{
    let mut traj = Trajectory {
        times: vec![0.0],
        fields: vec![u0.clone()],
    };
    evolve(u0, system, config, |t, u| {
        traj.times.push(t);
        traj.fields.push(u.clone());
    })?;
    Ok(traj)
}
