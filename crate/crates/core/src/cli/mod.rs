//! The `run`, `sweep` and `check` commands behind the `cgl` binary.

pub mod config;
pub mod io;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

pub use config::{
    load_config, parse_config, DiagnosticsConfig, ForcingConfig, ForcingKind, GridConfig, InitialConfig, InitialKind,
    RunConfig, RunInputs,
};

use crate::convex::{Params, ProxSolveSettings};
use crate::diagnostics::MonitorStatus;
use crate::error::{Error, Result};
use crate::grid::{l2_norm, Grid};
use crate::lawcheck::{
    accretivity_suite, pointwise_diff_bound_suite, reports_to_csv, reports_to_markdown, structural_suite,
    InequalityReport, POINTWISE_RS,
};
use crate::stepper::{RunOutput, StepState, Stepper};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_BLOWUP: i32 = 3;

pub const DEFAULT_CHECK_SAMPLES: usize = 1000;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

fn base_dir(config_path: &Path) -> PathBuf {
    config_path.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Runs a materialized configuration.
pub fn execute(inputs: &RunInputs) -> Result<RunOutput> {
    let stepper = Stepper::new(
        inputs.scheme,
        inputs.params,
        inputs.grid.clone(),
        ProxSolveSettings::default(),
    )?;
    stepper.run(&inputs.u0, &inputs.forcing, &inputs.control)
}

pub fn run_config(cfg: &RunConfig, base: &Path) -> Result<RunOutput> {
    execute(&cfg.materialize(base)?)
}

fn status_code(status: MonitorStatus) -> i32 {
    if status.is_blown_up() {
        EXIT_BLOWUP
    } else {
        EXIT_OK
    }
}

fn report(e: &Error) -> i32 {
    eprintln!("error: {e}");
    exit_code(e)
}

/// Runs one configuration and writes its records as CSV. `out` overrides the
/// configuration's `out_path`.
pub fn cmd_run(config_path: &Path, out: Option<&Path>) -> i32 {
    let cfg = match load_config(config_path) {
        Ok(c) => c,
        Err(e) => return report(&e),
    };
    let out = match (out, &cfg.out_path) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(p)) => base_dir(config_path).join(p),
        (None, None) => return report(&Error::Config("no output path given".into())),
    };
    let result = run_config(&cfg, &base_dir(config_path));
    let output = match result {
        Ok(o) => o,
        Err(e) => return report(&e),
    };
    if let Err(e) = io::write_text(&out, &io::records_csv(&output.records)) {
        return report(&e);
    }
    if let MonitorStatus::BlownUp { t_detect } = output.status {
        eprintln!("blow-up detected at t = {t_detect}");
    }
    status_code(output.status)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Mu,
    Epsilon,
    Dt,
    Amplitude,
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mu" => Ok(Self::Mu),
            "epsilon" => Ok(Self::Epsilon),
            "dt" => Ok(Self::Dt),
            "amplitude" => Ok(Self::Amplitude),
            other => Err(Error::Config(format!(
                "unknown sweep axis {other:?}; expected mu, epsilon, dt or amplitude"
            ))),
        }
    }
}

impl SweepAxis {
    pub fn apply(self, cfg: &RunConfig, value: f64) -> RunConfig {
        let mut c = cfg.clone();
        match self {
            Self::Mu => c.params.mu = value,
            Self::Epsilon => c.params.epsilon = value,
            Self::Dt => c.scheme.dt = value,
            Self::Amplitude => c.initial.amplitude = value,
        }
        c
    }
}

pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::Config(format!("sweep value {s:?} is not a number")))
        })
        .collect()
}

/// `sup_t |a(t) - b(t)|_{L^2}` over the times recorded in both trajectories.
pub fn sup_common_time_difference(a: &[StepState], b: &[StepState], g: &Grid) -> Result<f64> {
    let mut sup = 0.0f64;
    let mut j = 0;
    for x in a {
        while j < b.len() && b[j].t < x.t - 1e-12 * x.t.abs().max(1.0) {
            j += 1;
        }
        if j < b.len() && (b[j].t - x.t).abs() <= 1e-12 * x.t.abs().max(1.0) {
            sup = sup.max(l2_norm(&x.u.sub(&b[j].u), g)?);
        }
    }
    Ok(sup)
}

pub const SWEEP_SUMMARY_HEADER: &str = "from_value,to_value,sup_l2_diff";

/// Per-run outcome of a sweep.
#[derive(Debug)]
pub struct SweepRun {
    pub value: f64,
    pub output: RunOutput,
}

/// Runs every value of `axis` on `workers` threads (all cores if `None`).
pub fn sweep(
    cfg: &RunConfig,
    base: &Path,
    axis: SweepAxis,
    values: &[f64],
    workers: Option<usize>,
) -> Result<Vec<SweepRun>> {
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    let inputs: Vec<RunInputs> = values
        .iter()
        .map(|&v| axis.apply(cfg, v).materialize(base))
        .collect::<Result<_>>()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let outputs: Vec<RunOutput> = pool.install(|| inputs.par_iter().map(execute).collect::<Result<_>>())?;
    Ok(values
        .iter()
        .zip(outputs)
        .map(|(&value, output)| SweepRun { value, output })
        .collect())
}

pub fn sweep_summary(runs: &[SweepRun], g: &Grid) -> Result<String> {
    let mut out = String::from(SWEEP_SUMMARY_HEADER);
    out.push('\n');
    for w in runs.windows(2) {
        let d = sup_common_time_difference(&w[0].output.trajectory, &w[1].output.trajectory, g)?;
        let _ = writeln!(out, "{:?},{:?},{:?}", w[0].value, w[1].value, d);
    }
    Ok(out)
}

fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var("CGL_WORKERS") {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Error::Config(format!(
                "CGL_WORKERS must be a positive integer, got {s:?}"
            ))),
        },
        Err(_) => Ok(None),
    }
}

/// One run per value; writes `run_###.csv` for each and `summary.csv`.
pub fn cmd_sweep(config_path: &Path, axis: &str, values: &str, out_dir: &Path) -> i32 {
    let result = (|| -> Result<i32> {
        let axis: SweepAxis = axis.parse()?;
        let values = parse_values(values)?;
        let cfg = load_config(config_path)?;
        let g = cfg.build_grid()?;
        let runs = sweep(&cfg, &base_dir(config_path), axis, &values, workers_from_env()?)?;
        std::fs::create_dir_all(out_dir).map_err(|e| Error::Io(format!("{}: {e}", out_dir.display())))?;
        for (i, run) in runs.iter().enumerate() {
            io::write_text(
                &out_dir.join(format!("run_{i:03}.csv")),
                &io::records_csv(&run.output.records),
            )?;
        }
        io::write_text(&out_dir.join("summary.csv"), &sweep_summary(&runs, &g)?)?;
        Ok(if runs.iter().any(|r| r.output.status.is_blown_up()) {
            EXIT_BLOWUP
        } else {
            EXIT_OK
        })
    })();
    result.unwrap_or_else(|e| report(&e))
}

/// Coefficients used by the `check` command.
pub fn check_params() -> Params {
    Params {
        lambda: 1.0,
        alpha: 1.0,
        beta: 1.0,
        gamma: -1.0,
        kappa: 1.0,
        q: 3.0,
        r: 4.0,
        epsilon: 0.1,
        mu: 0.0,
    }
}

/// The field laws on a 64-point line and a 32 x 32 square, with `1d/` and
/// `2d/` name prefixes, followed by the grid-free pointwise bounds.
pub fn check_reports(samples: usize, seed: u64, inject_fault: bool) -> Result<Vec<InequalityReport>> {
    let params = check_params();
    let grids = [("1d", Grid::line(1.0, 64)?), ("2d", Grid::rect([1.0, 1.0], [32, 32])?)];
    let mut all = Vec::new();
    for (tag, g) in &grids {
        let mut reports = structural_suite(g, &params, samples, seed)?;
        reports.push(accretivity_suite(g, samples, seed)?);
        for mut r in reports {
            r.name = format!("{tag}/{}", r.name);
            all.push(r);
        }
    }
    let dr = inject_fault.then_some(0.5);
    for &r in &POINTWISE_RS {
        all.push(pointwise_diff_bound_suite(r, samples * 1000, seed, dr)?);
    }
    Ok(all)
}

pub fn cmd_check(samples: usize, seed: u64, inject_fault: bool, csv: Option<&Path>) -> i32 {
    let reports = match check_reports(samples, seed, inject_fault) {
        Ok(r) => r,
        Err(e) => return report(&e),
    };
    print!("{}", reports_to_markdown(&reports));
    if let Some(p) = csv {
        if let Err(e) = io::write_text(p, &reports_to_csv(&reports)) {
            return report(&e);
        }
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    if failed == 0 {
        println!("\nall {} laws pass", reports.len());
        EXIT_OK
    } else {
        println!("\n{failed} of {} laws FAIL", reports.len());
        EXIT_CONFIG
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_config(dir: &Path, body: &str) -> PathBuf {
        let p = dir.join("run.toml");
        std::fs::write(&p, body).unwrap();
        p
    }

    const BASE: &str = r#"
[grid]
dim = 1
lengths = [1.0]
n = [32]

[params]
lambda = 1.0
alpha = 1.0
beta = 1.0
kappa = 1.0
q = 3.0
r = 4.0
epsilon = 0.1
mu = 0.1

[scheme]
equation = "ae_eps_mu"
dt = 1e-3
t_end = 0.05

[initial]
kind = "sine_mode"
amplitude = 0.1

[diagnostics]
record_every = 5
"#;

    #[test]
    fn run_writes_csv_and_exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(dir.path(), BASE);
        let out = dir.path().join("out.csv");
        assert_eq!(cmd_run(&cfg, Some(&out)), EXIT_OK);
        let text = std::fs::read_to_string(&out).unwrap();
        assert!(text.starts_with("t,l2_sq,phi,psi_q,psi_r,dphi_l2,dpsi_q_l2,combined\n"));
        assert_eq!(text.lines().count(), 1 + 11);
        assert_eq!(cmd_run(&dir.path().join("missing.toml"), Some(&out)), EXIT_IO);
        let bad = write_config(dir.path(), &BASE.replace("q = 3.0", "q = 2.0"));
        assert_eq!(cmd_run(&bad, Some(&out)), EXIT_CONFIG);
        let file = write_config(
            dir.path(),
            &BASE.replace("kind = \"sine_mode\"", "kind = \"file\"\npath = \"nope.bin\""),
        );
        assert_eq!(cmd_run(&file, Some(&out)), EXIT_IO);
    }

    #[test]
    fn zero_data_gives_zero_records() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(dir.path(), &BASE.replace("kind = \"sine_mode\"", "kind = \"zero\""));
        let out = dir.path().join("z.csv");
        assert_eq!(cmd_run(&cfg, Some(&out)), EXIT_OK);
        let text = std::fs::read_to_string(&out).unwrap();
        for line in text.lines().skip(1) {
            assert!(line.split(',').skip(1).all(|v| v == "0.0"), "{line}");
        }
    }

    #[test]
    fn file_initial_data_resolves_relative_to_config() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::line(1.0, 32).unwrap();
        let u = g.sample(|x| (0.05 * x[0] * (1.0 - x[0]), 0.02));
        io::write_field(&dir.path().join("u0.bin"), &u, &g).unwrap();
        let cfg = write_config(
            dir.path(),
            &BASE.replace("kind = \"sine_mode\"", "kind = \"file\"\npath = \"u0.bin\""),
        );
        let c = load_config(&cfg).unwrap();
        let inputs = c.materialize(dir.path()).unwrap();
        assert_eq!(inputs.u0, u);
        assert_eq!(cmd_run(&cfg, Some(&dir.path().join("o.csv"))), EXIT_OK);
    }

    #[test]
    fn sweep_outputs_and_ordering() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(dir.path(), BASE);
        let out = dir.path().join("sw");
        assert_eq!(cmd_sweep(&cfg, "mu", "1e-1, 5e-2, 2.5e-2", &out), EXIT_OK);
        let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
        let rows: Vec<f64> = summary
            .lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
            .collect();
        assert_eq!(rows.len(), 2);
        assert!(rows[1] < rows[0]);
        assert!(out.join("run_002.csv").exists());
        assert_eq!(cmd_sweep(&cfg, "mu", "", &out), EXIT_CONFIG);
        assert_eq!(cmd_sweep(&cfg, "lambda", "1", &out), EXIT_CONFIG);

        let c = load_config(&cfg).unwrap();
        let serial = sweep(&c, dir.path(), SweepAxis::Epsilon, &[0.1, 0.05, 0.025], Some(1)).unwrap();
        let parallel = sweep(&c, dir.path(), SweepAxis::Epsilon, &[0.1, 0.05, 0.025], Some(3)).unwrap();
        let g = c.build_grid().unwrap();
        assert_eq!(
            sweep_summary(&serial, &g).unwrap(),
            sweep_summary(&parallel, &g).unwrap()
        );
        let dts = sweep(&c, dir.path(), SweepAxis::Dt, &[1e-3, 5e-4], None).unwrap();
        let s = sweep_summary(&dts, &g).unwrap();
        let d: f64 = s.lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
        assert!(d > 0.0 && d < 1e-3);
    }

    #[test]
    fn check_detects_injected_fault() {
        let reports = check_reports(20, 0, true).unwrap();
        assert!(reports.iter().any(|r| !r.passed()));
        assert!(reports.iter().all(|r| r.passed() || r.name.contains("pointwise")));
        assert!(reports.iter().any(|r| r.name.starts_with("2d/")));
    }
}
