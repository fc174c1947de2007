//! The four subcommands. Each writes its data files plus a manifest into the
//! configured output directory; diagnostics go to stderr.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use benjamin_core::harness::{self, IntegratorPolicy};
use benjamin_core::invariants::{c_pi, e_pi, i_pi, InvariantRecord};
use benjamin_core::snapshot::{fmt_real, read_snapshot, write_snapshot};
use benjamin_core::timestep::evolve;
use benjamin_core::{ConvergenceReport, Error as CoreError, ModelParams, Semidiscrete, SpectralField};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::config::{parse_config, ConfigDocument, ConfigError, RunConfig, Study};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Converge,
    Soliton,
    Invariants,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Converge => "converge",
            Command::Soliton => "soliton",
            Command::Invariants => "invariants",
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    /// Some member runs of a study failed; the partial report was written.
    #[error("{0}")]
    PartialFailure(String),
}

impl RunError {
    /// 2 for invalid input, 3 for numerical failure, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Core(e) => match e {
                CoreError::Divergence { .. } | CoreError::Convergence { .. } => 3,
                CoreError::Io(_) => 1,
                _ => 2,
            },
            RunError::Io { .. } => 1,
            RunError::PartialFailure(_) => 3,
        }
    }

    fn status(&self) -> &'static str {
        match self.exit_code() {
            2 => "invalid_input",
            3 => "numerical_failure",
            _ => "io_error",
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Drifts {
    pub c: f64,
    pub i: f64,
    pub e: f64,
}

impl From<&InvariantRecord> for Drifts {
    fn from(r: &InvariantRecord) -> Self {
        Self {
            c: r.rel_drift_c,
            i: r.rel_drift_i,
            e: r.rel_drift_e,
        }
    }
}

/// Record of one invocation, written last.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub status: &'static str,
    pub exit_code: i32,
    pub message: Option<String>,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub config: BTreeMap<String, String>,
    pub time_step: Option<f64>,
    pub final_drifts: Option<Drifts>,
    pub outputs: Vec<String>,
    pub report: Option<serde_json::Value>,
}

/// What a successful (or partially successful) command produced.
#[derive(Debug, Default)]
struct Products {
    time_step: Option<f64>,
    drifts: Option<Drifts>,
    outputs: Vec<String>,
    report: Option<serde_json::Value>,
}

impl Products {
    fn write(&mut self, dir: &Path, name: &str, contents: &str) -> Result<(), RunError> {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(io_err(&path))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn snapshot(&mut self, dir: &Path, name: &str, t: f64, u: &SpectralField) -> Result<(), RunError> {
        write_snapshot(dir.join(name), t, u)?;
        self.outputs.push(name.to_string());
        Ok(())
    }
}

fn unix_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis())
}

/// Options shared by all subcommands.
#[derive(Debug, Clone, Default)]
pub struct Invocation {
    pub config: Option<PathBuf>,
    pub overrides: Vec<String>,
    pub quiet: bool,
    /// Snapshot files (`invariants` only).
    pub files: Vec<PathBuf>,
}

/// Run `command` and return the process exit code. A manifest is written
/// whenever the output directory is known, including on failure.
pub fn execute(command: Command, inv: &Invocation) -> i32 {
    let started = unix_ms();
    let text = match &inv.config {
        Some(path) => match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return 1;
            }
        },
        None => String::new(),
    };

    // Best effort at locating the output directory even if validation fails.
    let mut doc = ConfigDocument::parse(&text).ok();
    if let Some(d) = doc.as_mut() {
        for (i, o) in inv.overrides.iter().enumerate() {
            if d.apply_override(i + 1, o).is_err() {
                break;
            }
        }
    }
    let out_dir = doc.as_ref().map(ConfigDocument::output_dir);
    let echo = doc.as_ref().map(ConfigDocument::entries).unwrap_or_default();

    let mut products = Products::default();
    let result = run_command(command, &text, inv, &mut products);

    let (exit_code, status, message) = match &result {
        Ok(()) => (0, "ok", None),
        Err(e) => {
            eprintln!("error: {e}");
            (e.exit_code(), e.status(), Some(e.to_string()))
        }
    };
    if let Some(dir) = out_dir {
        let manifest = RunManifest {
            tool: "benj",
            version: env!("CARGO_PKG_VERSION"),
            command: command.name(),
            status,
            exit_code,
            message,
            started_unix_ms: started,
            finished_unix_ms: unix_ms(),
            config: echo,
            time_step: products.time_step,
            final_drifts: products.drifts,
            outputs: products.outputs,
            report: products.report,
        };
        if let Err(e) = write_manifest(&dir, &manifest) {
            eprintln!("error: cannot write manifest: {e}");
            return if exit_code == 0 { 1 } else { exit_code };
        }
    }
    exit_code
}

fn write_manifest(dir: &Path, manifest: &RunManifest) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    fs::write(dir.join(MANIFEST_FILE), text)
}

fn run_command(command: Command, text: &str, inv: &Invocation, products: &mut Products) -> Result<(), RunError> {
    let progress = |msg: String| {
        if !inv.quiet {
            eprintln!("{msg}");
        }
    };
    if command == Command::Invariants {
        let mut doc = ConfigDocument::parse(text)?;
        for (i, o) in inv.overrides.iter().enumerate() {
            doc.apply_override(i + 1, o)?;
        }
        let params = doc.model()?;
        let dir = doc.output_dir();
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let table = invariants_table(&params, &inv.files)?;
        print!("{table}");
        return Ok(());
    }

    let (_, cfg) = parse_config(text, &inv.overrides)?;
    fs::create_dir_all(&cfg.output_dir).map_err(io_err(&cfg.output_dir))?;
    match command {
        Command::Solve => solve(&cfg, products, &progress),
        Command::Converge => converge(&cfg, products, &progress),
        Command::Soliton => soliton(&cfg, products, &progress),
        Command::Invariants => unreachable!("handled above"),
    }
}

fn snapshot_name(index: usize) -> String {
    format!("snap_{index:06}.snap")
}

fn invariants_csv(record: &InvariantRecord) -> String {
    let mut out = String::from("t,C,I,E\n");
    for i in 0..record.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_real(record.times[i]),
            fmt_real(record.c[i]),
            fmt_real(record.i[i]),
            fmt_real(record.e[i])
        );
    }
    out
}

fn solve(cfg: &RunConfig, products: &mut Products, progress: &dyn Fn(String)) -> Result<(), RunError> {
    let params = cfg.model;
    let u0 = cfg.initial.build(&params, cfg.n_modes)?;
    let integ = cfg.integrator.resolve(&params, cfg.n_modes, u0.linf_norm(4))?;
    products.time_step = Some(integ.dt);
    progress(format!(
        "solve: N = {}, {} steps of dt = {:e} to t = {}",
        cfg.n_modes,
        integ.step_count(),
        integ.dt,
        integ.t_end
    ));

    let dir = &cfg.output_dir;
    let mut record = InvariantRecord::default();
    record.push(0.0, &u0, &params);
    products.snapshot(dir, &snapshot_name(0), 0.0, &u0)?;

    let sys = Semidiscrete::new(params, cfg.n_modes);
    let mut write_error = None;
    let mut index = 0;
    let result = evolve(&u0, &sys, &integ, |t, u| {
        record.push(t, u, &params);
        index += 1;
        if write_error.is_none() {
            if let Err(e) = products.snapshot(dir, &snapshot_name(index), t, u) {
                write_error = Some(e);
            }
        }
    });
    products.write(dir, "invariants.csv", &invariants_csv(&record))?;
    products.drifts = Some(Drifts::from(&record));
    if let Some(e) = write_error {
        return Err(e);
    }
    result?;
    progress(format!(
        "solve: done, relative drifts C {:.2e} I {:.2e} E {:.2e}",
        record.rel_drift_c, record.rel_drift_i, record.rel_drift_e
    ));
    Ok(())
}

/// `N,error` rows followed by `fit,<rate>,<r2>`.
pub fn convergence_csv(report: &ConvergenceReport) -> String {
    let mut out = String::from("N,error\n");
    for (n, e) in report.n_values.iter().zip(&report.errors) {
        let _ = writeln!(out, "{n},{}", fmt_real(*e));
    }
    let opt = |x: Option<f64>| x.map_or_else(|| "nan".to_string(), fmt_real);
    let _ = writeln!(out, "fit,{},{}", opt(report.fitted_rate), opt(report.fit_r2));
    out
}

fn converge(cfg: &RunConfig, products: &mut Products, progress: &dyn Fn(String)) -> Result<(), RunError> {
    let c = &cfg.converge;
    let policy = IntegratorPolicy {
        method: cfg.integrator.method,
        dt: cfg.integrator.dt,
        ref_dt_divisor: c.ref_dt_divisor,
        max_over_time: c.max_over_time,
        check_dt: c.check_dt,
    };
    let t_star = cfg.integrator.t_end;
    progress(format!(
        "converge: {:?} study, N = {:?}, reference N = {}, t* = {t_star}",
        c.study, c.n_values, c.n_ref
    ));
    let report = match c.study {
        Study::SelfConvergence => harness::self_convergence(&cfg.model, &cfg.initial, &c.n_values, c.n_ref, t_star, &policy)?,
        Study::Intermediate => harness::intermediate_problem_study(&cfg.model, &cfg.initial, &c.n_values, c.n_ref, t_star, &policy)?,
    };
    products.time_step = Some(report.dt);
    products.write(&cfg.output_dir, "convergence.csv", &convergence_csv(&report))?;
    products.report = Some(json!({
        "n_values": report.n_values,
        "errors": report.errors,
        "fitted_rate": report.fitted_rate,
        "fit_r2": report.fit_r2,
        "claimed_rate": report.claimed_rate(),
        "reference_n": report.reference_n,
        "t_star": report.t_star,
        "sup_norms": report.sup_norms,
        "dt_sensitivity": report.dt_sensitivity,
        "failures": report.failures.iter().map(|(n, m)| json!({"n": n, "reason": m})).collect::<Vec<_>>(),
    }));
    match report.fitted_rate {
        Some(rate) => progress(format!("converge: fitted rate {rate:.3} (r2 {:.4})", report.fit_r2.unwrap_or(f64::NAN))),
        None => progress("converge: rate undefined".into()),
    }
    if report.failures.is_empty() {
        Ok(())
    } else {
        let list: Vec<String> = report.failures.iter().map(|(n, m)| format!("N = {n}: {m}")).collect();
        Err(RunError::PartialFailure(format!("member runs failed: {}", list.join("; "))))
    }
}

fn soliton(cfg: &RunConfig, products: &mut Products, progress: &dyn Fn(String)) -> Result<(), RunError> {
    let s = &cfg.soliton;
    let dir = &cfg.output_dir;
    let profile = harness::soliton_profile(&cfg.model, s.speed, cfg.n_modes, s.tol, s.max_iter)?;
    products.snapshot(dir, "wave.snap", 0.0, &profile)?;
    let policy = IntegratorPolicy {
        method: cfg.integrator.method,
        dt: cfg.integrator.dt,
        ..Default::default()
    };
    let t_star = cfg.integrator.t_end;
    progress(format!("soliton: c = {}, N = {}, t* = {t_star}", s.speed, cfg.n_modes));
    let report = harness::propagate_profile(&cfg.model, &profile, t_star, &policy)?;
    products.snapshot(dir, "wave_final.snap", t_star, &report.final_field)?;

    let mut csv = String::from("t,peak,C,I,E\n");
    let inv = &report.invariants;
    for (k, (t, x)) in report.times.iter().zip(&report.peak_positions).enumerate() {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            fmt_real(*t),
            fmt_real(*x),
            fmt_real(inv.c[k]),
            fmt_real(inv.i[k]),
            fmt_real(inv.e[k])
        );
    }
    products.write(dir, "soliton.csv", &csv)?;
    products.drifts = Some(Drifts::from(inv));
    products.report = Some(json!({
        "speed": s.speed,
        "speed_estimate": report.speed_estimate,
        "shift": report.shift,
        "shape_error_linf": report.shape_error_linf,
    }));
    progress(format!(
        "soliton: measured speed {:?}, shape error {:.3e}",
        report.speed_estimate, report.shape_error_linf
    ));
    Ok(())
}

/// `file,t,C,I,E` rows for each snapshot.
pub fn invariants_table(params: &ModelParams, files: &[PathBuf]) -> Result<String, RunError> {
    if files.is_empty() {
        return Err(RunError::Core(CoreError::Argument("no snapshot files given".into())));
    }
    let mut out = String::from("file,t,C,I,E\n");
    for path in files {
        let snap = read_snapshot(path)?;
        if snap.field.domain_scale() != params.domain_scale() {
            return Err(RunError::Core(CoreError::Shape(format!(
                "{} has L = {}, model has L = {}",
                path.display(),
                snap.field.domain_scale(),
                params.domain_scale()
            ))));
        }
        let u = &snap.field;
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            path.display(),
            fmt_real(snap.time),
            fmt_real(c_pi(u)),
            fmt_real(i_pi(u)),
            fmt_real(e_pi(u, params))
        );
    }
    Ok(out)
}
