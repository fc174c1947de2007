//! Convergence studies against fine-grid references, the frozen-coefficient
//! (intermediate) problem diagnostic, and solitary-wave propagation tests.
//!
//! Member runs at different bandwidths are independent and run on the rayon
//! pool; every run is single-threaded and deterministic, so reports do not
//! depend on scheduling.

use std::cell::RefCell;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::initdata::{self, peak_position, InitialDataSpec};
use crate::invariants::InvariantRecord;
use crate::model::ModelParams;
use crate::semidiscrete::{LinearMultipliers, LinearizedSystem, Semidiscrete};
use crate::spectral::SpectralField;
use crate::timestep::{default_time_step, evolve, step, IntegratorConfig, Method, SemilinearSystem, StepCoefficients};

/// Only the largest this-many bandwidths enter the rate fit.
pub const RATE_WINDOW: usize = 4;
/// Minimum coefficient of determination for a rate claim.
pub const MIN_R2: f64 = 0.95;
/// Oversampling factor for sup norms of `w^N`.
const SUP_OVERSAMPLE: usize = 4;

/// Time-integration settings shared by all runs of a study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorPolicy {
    pub method: Method,
    /// Step for member runs; `None` uses [`default_time_step`] at the reference bandwidth.
    pub dt: Option<f64>,
    /// The reference run uses `dt / ref_dt_divisor`.
    pub ref_dt_divisor: u32,
    /// Measure the error as the max over common output times instead of at `t*` only.
    pub max_over_time: bool,
    /// Repeat each member run with `dt / 2` and record the relative change of its error.
    pub check_dt: bool,
}

impl Default for IntegratorPolicy {
    fn default() -> Self {
        Self {
            method: Method::Etdrk4,
            dt: None,
            ref_dt_divisor: 4,
            max_over_time: false,
            check_dt: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub n_values: Vec<usize>,
    /// L2 errors at `t_star` (or max over time); `NaN` for failed runs.
    pub errors: Vec<f64>,
    /// Negated least-squares slope of `log error` vs `log N` over the largest
    /// [`RATE_WINDOW`] bandwidths; `None` when fewer than two positive errors exist.
    pub fitted_rate: Option<f64>,
    pub fit_r2: Option<f64>,
    pub reference_n: usize,
    pub t_star: f64,
    /// Member step size.
    pub dt: f64,
    /// Runs that failed, with the reason.
    pub failures: Vec<(usize, String)>,
    /// `max_t |w^N|_inf` per bandwidth (intermediate-problem studies only).
    pub sup_norms: Vec<f64>,
    /// `|e(dt/2) - e(dt)| / e(dt)` per bandwidth when requested.
    pub dt_sensitivity: Vec<f64>,
}

impl ConvergenceReport {
    /// The fitted rate if the fit quality supports a claim.
    pub fn claimed_rate(&self) -> Option<f64> {
        match (self.fitted_rate, self.fit_r2) {
            (Some(rate), Some(r2)) if r2 >= MIN_R2 => Some(rate),
            _ => None,
        }
    }

    fn new(n_values: &[usize], errors: Vec<f64>, reference_n: usize, t_star: f64, dt: f64) -> Self {
        let (fitted_rate, fit_r2) = match fit_window(n_values, &errors) {
            Some((r, r2)) => (Some(r), Some(r2)),
            None => (None, None),
        };
        Self {
            n_values: n_values.to_vec(),
            errors,
            fitted_rate,
            fit_r2,
            reference_n,
            t_star,
            dt,
            failures: Vec::new(),
            sup_norms: Vec::new(),
            dt_sensitivity: Vec::new(),
        }
    }
}

/// `(rate, r2)` of the least-squares line through `(log N, log error)`, slope negated.
pub fn estimate_rate(n_values: &[usize], errors: &[f64]) -> Result<(f64, f64)> {
    if n_values.len() != errors.len() {
        return Err(Error::Argument("n_values and errors differ in length".into()));
    }
    if errors.len() < 2 {
        return Err(Error::Argument("need at least two points for a rate".into()));
    }
    if let Some(e) = errors.iter().find(|e| !(**e > 0.0) || !e.is_finite()) {
        return Err(Error::Argument(format!("errors must be positive and finite, got {e}")));
    }
    let xs: Vec<f64> = n_values.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let m = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / m;
    let ybar = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Argument("bandwidths must not all be equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ss_tot: f64 = ys.iter().map(|y| (y - ybar).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok((-slope, r2))
}

/// Rate fit over the largest [`RATE_WINDOW`] usable points.
fn fit_window(n_values: &[usize], errors: &[f64]) -> Option<(f64, f64)> {
    let usable: Vec<(usize, f64)> = n_values
        .iter()
        .zip(errors)
        .filter(|(_, e)| **e > 0.0 && e.is_finite())
        .map(|(n, e)| (*n, *e))
        .collect();
    let start = usable.len().saturating_sub(RATE_WINDOW);
    let (ns, es): (Vec<usize>, Vec<f64>) = usable[start..].iter().copied().unzip();
    estimate_rate(&ns, &es).ok()
}

fn check_study_args(n_values: &[usize], n_ref: usize, t_star: f64) -> Result<()> {
    let Some(&n_max) = n_values.last() else {
        return Err(Error::Argument("no bandwidths given".into()));
    };
    if n_values[0] == 0 || n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Argument("bandwidths must be positive and strictly increasing".into()));
    }
    if n_ref < 4 * n_max {
        return Err(Error::Argument(format!(
            "reference bandwidth {n_ref} must be at least 4 * {n_max}"
        )));
    }
    if !(t_star > 0.0) || !t_star.is_finite() {
        return Err(Error::Argument(format!("t* must be positive, got {t_star}")));
    }
    Ok(())
}

fn member_dt(policy: &IntegratorPolicy, params: &ModelParams, n_ref: usize, u0: &SpectralField, t_star: f64) -> f64 {
    policy
        .dt
        .unwrap_or_else(|| default_time_step(params, n_ref, u0.linf_norm(4)))
        .min(t_star)
}

/// `||u - v||` with both fields zero-extended to the larger bandwidth.
pub fn embedded_distance(u: &SpectralField, v: &SpectralField) -> Result<f64> {
    let n = u.n_modes().max(v.n_modes());
    u.resized(n).sub(&v.resized(n)).map(|d| d.l2_norm())
}

/// Self-convergence of the nonlinear scheme: each `P_N u_0` is evolved to
/// `t_star` and compared with a run at bandwidth `n_ref`.
pub fn self_convergence(
    params: &ModelParams,
    data: &InitialDataSpec,
    n_values: &[usize],
    n_ref: usize,
    t_star: f64,
    policy: &IntegratorPolicy,
) -> Result<ConvergenceReport> {
    check_study_args(n_values, n_ref, t_star)?;
    let u0 = data.build(params, n_ref)?;
    let dt = member_dt(policy, params, n_ref, &u0, t_star);
    let div = policy.ref_dt_divisor.max(1);

    // Reference at the member output times when the max over time is wanted.
    let ref_cfg = IntegratorConfig::new(policy.method, dt / div as f64, t_star, div as usize)?;
    let reference_sys = Semidiscrete::new(*params, n_ref);
    let mut ref_snaps = Vec::new();
    let u_ref = evolve(&u0, &reference_sys, &ref_cfg, |_, u| {
        if policy.max_over_time {
            ref_snaps.push(u.clone());
        }
    })?;
    if !policy.max_over_time {
        ref_snaps.push(u_ref.clone());
    }

    let run = |n: usize, dt: f64| -> Result<f64> {
        let sys = Semidiscrete::new(*params, n);
        let cfg = IntegratorConfig::new(policy.method, dt, t_star, 1)?;
        let mut outputs = Vec::new();
        let last = evolve(&u0.project(n)?, &sys, &cfg, |_, u| {
            if policy.max_over_time {
                outputs.push(u.clone());
            }
        })?;
        if !policy.max_over_time {
            outputs.push(last);
        }
        let mut worst = 0.0f64;
        // member steps are `div` times coarser; align on common times
        let stride = if policy.max_over_time { (dt / cfg.dt).round().max(1.0) as usize } else { 1 };
        for (i, r) in ref_snaps.iter().enumerate() {
            let j = ((i + 1) * stride).min(outputs.len()) - 1;
            worst = worst.max(embedded_distance(r, &outputs[j])?);
        }
        Ok(worst)
    };

    let results: Vec<(Result<f64>, Option<f64>)> = n_values
        .par_iter()
        .map(|&n| {
            let e = run(n, dt);
            let sensitivity = match (&e, policy.check_dt) {
                (Ok(e1), true) => run(n, dt / 2.0).ok().map(|e2| (e2 - e1).abs() / e1.max(f64::MIN_POSITIVE)),
                _ => None,
            };
            (e, sensitivity)
        })
        .collect();

    let mut errors = Vec::with_capacity(n_values.len());
    let mut failures = Vec::new();
    let mut sensitivity = Vec::new();
    for (&n, (res, sens)) in n_values.iter().zip(results) {
        match res {
            Ok(e) => errors.push(e),
            Err(err) => {
                errors.push(f64::NAN);
                failures.push((n, err.to_string()));
            }
        }
        if let Some(s) = sens {
            sensitivity.push(s);
        }
    }
    let mut report = ConvergenceReport::new(n_values, errors, n_ref, t_star, dt);
    report.failures = failures;
    report.dt_sensitivity = sensitivity;
    Ok(report)
}

/// Reference states at consecutive steps of a fixed-step run.
#[derive(Debug, Clone)]
pub struct ReferenceTrajectory {
    pub times: Vec<f64>,
    pub fields: Vec<SpectralField>,
}

impl ReferenceTrajectory {
    /// Lagrange interpolation in time through the (up to) four stored steps
    /// nearest `t`, cubic in the interior; truncated to `bandwidth` modes.
    pub fn interpolate(&self, t: f64, bandwidth: usize) -> SpectralField {
        let times = &self.times;
        let len = times.len();
        let n = bandwidth.min(self.fields[0].n_modes());
        let i = match times.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => return self.fields[i].resized(n),
            Err(i) => i.saturating_sub(1),
        };
        let nodes = len.min(4);
        let first = i.saturating_sub(1).min(len - nodes);
        let ts = &times[first..first + nodes];
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
        for (a, f) in self.fields[first..first + nodes].iter().enumerate() {
            let w: f64 = (0..nodes)
                .filter(|&b| b != a)
                .map(|b| (t - ts[b]) / (ts[a] - ts[b]))
                .product();
            let off = f.n_modes() - n;
            for (c, s) in coeffs.iter_mut().zip(&f.coeffs()[off..off + 2 * n + 1]) {
                *c += s * w;
            }
        }
        SpectralField::from_raw(n, self.fields[0].domain_scale(), coeffs)
    }

    fn push_window(&mut self, t: f64, u: SpectralField, capacity: usize) {
        self.times.push(t);
        self.fields.push(u);
        if self.times.len() > capacity {
            self.times.remove(0);
            self.fields.remove(0);
        }
    }
}

/// Evolve the frozen-coefficient problem from `w0` with the coefficient taken
/// from `frozen`, using step `dt` up to `t_end`.
///
/// Returns `w^N(t_end)` and `max_t |w^N|_inf` over all steps.
pub fn run_linearized(
    params: &ModelParams,
    w0: &SpectralField,
    frozen: &ReferenceTrajectory,
    method: Method,
    dt: f64,
    t_end: f64,
) -> Result<(SpectralField, f64)> {
    let n = w0.n_modes();
    let frozen_bw = n * (1 + params.q() as usize);
    let sys = LinearizedSystem::new(*params, n, |t: f64| Ok(frozen.interpolate(t, frozen_bw)));
    let cfg = IntegratorConfig::new(method, dt, t_end, 1)?;
    let mut sup = w0.linf_norm(SUP_OVERSAMPLE);
    let w = evolve(w0, &sys, &cfg, |_, w| sup = sup.max(w.linf_norm(SUP_OVERSAMPLE)))?;
    Ok((w, sup))
}

/// Frozen-coefficient diagnostic: `w^N` solves the linearized problem with
/// the reference solution `u` as coefficient; reports the decay of `||u - w^N||`
/// at `t_star` and `max_t |w^N|_inf` per bandwidth.
///
/// Member runs reuse the reference step, so the coefficient is known at every
/// step and cubic interpolation supplies the half-step stage times.
pub fn intermediate_problem_study(
    params: &ModelParams,
    data: &InitialDataSpec,
    n_values: &[usize],
    n_ref: usize,
    t_star: f64,
    policy: &IntegratorPolicy,
) -> Result<ConvergenceReport> {
    check_study_args(n_values, n_ref, t_star)?;
    let u0 = data.build(params, n_ref)?;
    let dt = member_dt(policy, params, n_ref, &u0, t_star);
    let h = dt / policy.ref_dt_divisor.max(1) as f64;
    let n_max = *n_values.last().expect("checked");
    let stored_bw = (n_max * (1 + params.q() as usize)).min(n_ref);

    let cfg = IntegratorConfig::new(policy.method, h, t_star, 1)?;
    let steps = cfg.step_count();
    let last_h = t_star - (steps - 1) as f64 * h;
    let coefficients = |mult: &LinearMultipliers| {
        (
            StepCoefficients::new(policy.method, mult, h),
            StepCoefficients::new(policy.method, mult, last_h),
        )
    };

    // The reference runs two steps ahead of the members, keeping a sliding
    // window of four states around each member step.
    let reference = Semidiscrete::new(*params, n_ref);
    let ref_coeffs = coefficients(reference.multipliers());
    let window = RefCell::new(ReferenceTrajectory {
        times: vec![0.0],
        fields: vec![u0.resized(stored_bw)],
    });
    let window_ref = &window;

    struct Member<S> {
        system: S,
        coeffs: (StepCoefficients, StepCoefficients),
        w: SpectralField,
        sup: f64,
        failure: Option<String>,
    }
    let mut members = n_values
        .iter()
        .map(|&n| {
            let bw = n * (1 + params.q() as usize);
            let system = LinearizedSystem::new(*params, n, move |t: f64| Ok(window_ref.borrow().interpolate(t, bw)));
            let w = u0.project(n)?;
            Ok(Member {
                coeffs: coefficients(system.multipliers()),
                system,
                sup: w.linf_norm(SUP_OVERSAMPLE),
                w,
                failure: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut u = u0.clone();
    let mut ref_index = 0;
    for i in 0..steps {
        while ref_index < (i + 2).max(3).min(steps) {
            let c = if ref_index + 1 == steps { &ref_coeffs.1 } else { &ref_coeffs.0 };
            u = step(&reference, c, cfg.time_at(ref_index), &u)?;
            ref_index += 1;
            window
                .borrow_mut()
                .push_window(cfg.time_at(ref_index), u.resized(stored_bw), 4);
        }
        let t = cfg.time_at(i);
        for m in members.iter_mut().filter(|m| m.failure.is_none()) {
            let c = if i + 1 == steps { &m.coeffs.1 } else { &m.coeffs.0 };
            match step(&m.system, c, t, &m.w) {
                Ok(w) => {
                    m.sup = m.sup.max(w.linf_norm(SUP_OVERSAMPLE));
                    m.w = w;
                }
                Err(e) => m.failure = Some(e.to_string()),
            }
        }
    }

    let mut errors = Vec::new();
    let mut sups = Vec::new();
    let mut failures = Vec::new();
    for (&n, m) in n_values.iter().zip(&members) {
        match &m.failure {
            None => {
                errors.push(embedded_distance(&u, &m.w)?);
                sups.push(m.sup);
            }
            Some(reason) => {
                errors.push(f64::NAN);
                sups.push(f64::NAN);
                failures.push((n, reason.clone()));
            }
        }
    }
    let mut report = ConvergenceReport::new(n_values, errors, n_ref, t_star, h);
    report.failures = failures;
    report.sup_norms = sups;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolitonReport {
    /// `|u(t*)(x + shift) - u(0)(x)|_inf`.
    pub shape_error_linf: f64,
    /// Slope of the unwrapped peak trajectory; `None` for `t* = 0`.
    pub speed_estimate: Option<f64>,
    /// Unwrapped peak displacement over `[0, t*]`.
    pub shift: f64,
    pub times: Vec<f64>,
    pub peak_positions: Vec<f64>,
    pub invariants: InvariantRecord,
    pub final_field: SpectralField,
}

/// The exact KdV soliton (for `m = 1, gamma = 0, q = 1`) or else a
/// Petviashvili wave of speed `c`, centred at the origin.
pub fn soliton_profile(params: &ModelParams, c: f64, n_modes: usize, tol: f64, max_iter: usize) -> Result<SpectralField> {
    if params.m() == 1 && params.gamma() == 0.0 && params.q() == 1 {
        initdata::kdv_soliton(c, 0.0, params, n_modes)
    } else {
        let guess = initdata::gaussian(1.0, 1.0, 0.0, n_modes, params.domain_scale())?;
        Ok(initdata::petviashvili(params, c, &guess, tol, max_iter)?.0)
    }
}

/// Propagate [`soliton_profile`] to `t_star` and measure how well it translates.
pub fn soliton_propagation_test(
    params: &ModelParams,
    c: f64,
    n_modes: usize,
    t_star: f64,
    policy: &IntegratorPolicy,
) -> Result<SolitonReport> {
    let profile = soliton_profile(params, c, n_modes, 1e-12, 2000)?;
    propagate_profile(params, &profile, t_star, policy)
}

/// Evolve `profile` to `t_star`, tracking its peak at every step.
pub fn propagate_profile(
    params: &ModelParams,
    profile: &SpectralField,
    t_star: f64,
    policy: &IntegratorPolicy,
) -> Result<SolitonReport> {
    let period = profile.domain_length();
    let x0 = peak_position(profile);
    let mut times = vec![0.0];
    let mut positions = vec![x0];
    let mut invariants = crate::invariants::record_invariants([(0.0, profile)], params)?;
    if t_star == 0.0 {
        return Ok(SolitonReport {
            shape_error_linf: 0.0,
            speed_estimate: None,
            shift: 0.0,
            times,
            peak_positions: positions,
            invariants,
            final_field: profile.clone(),
        });
    }
    let dt = policy
        .dt
        .unwrap_or_else(|| default_time_step(params, profile.n_modes(), profile.linf_norm(4)))
        .min(t_star);
    let cfg = IntegratorConfig::new(policy.method, dt, t_star, 1)?;
    let sys = Semidiscrete::new(*params, profile.n_modes());
    let last = evolve(profile, &sys, &cfg, |t, u| {
        let prev = *positions.last().expect("nonempty");
        let raw = peak_position(u);
        let unwrapped = prev + initdata::wrap(raw - prev, period);
        times.push(t);
        positions.push(unwrapped);
        invariants.push(t, u, params);
    })?;
    let shift = positions.last().expect("nonempty") - x0;
    let shape_error_linf = last.translate(-shift).sub(profile)?.linf_norm(8);
    let speed_estimate = linear_slope(&times, &positions);
    Ok(SolitonReport {
        shape_error_linf,
        speed_estimate,
        shift,
        times,
        peak_positions: positions,
        invariants,
        final_field: last,
    })
}

fn linear_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / m;
    let ybar = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
