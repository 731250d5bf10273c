//! Command-line driver.
//!
//! Parses flags into a [`RunManifest`], runs a single solve or a `p` scan and
//! writes:
//!
//! - `profile_<time>.csv`: `x,u_numeric,u_exact,abs_error` at knots plus
//!   `plot_oversample` interior points per element
//! - `errors.csv`: `time,linf`
//! - `scan.csv`: `p,linf` (scans only)
//! - `run.json`: the manifest and every resolved parameter
//!
//! Numbers are written with 17 significant digits and LF line endings.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{ArgGroup, Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::basis::BasisParams;
use crate::elements::DiffusionForm;
use crate::error::Error;
use crate::problems::{shock_problem_on, travelling_problem_with_nu, ProblemSpec, Snapshot};
use crate::stepper::{run, SolverConfig};
use crate::tuner::{scan_exhaustive, scan_p, ScanResult, ScanSpec};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Help or version text requested; not a failure.
    #[error("{0}")]
    Info(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Solver(#[from] Error),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    /// 0 for help, 1 for usage errors, 2 for solver or output failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Info(_) => 0,
            CliError::Usage(_) => 1,
            CliError::Solver(_) | CliError::Io { .. } => 2,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProblemId {
    Shock,
    Wave,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DiffusionArg {
    Weak,
    Strong,
}

impl From<DiffusionArg> for DiffusionForm {
    fn from(d: DiffusionArg) -> Self {
        match d {
            DiffusionArg::Weak => DiffusionForm::Weak,
            DiffusionArg::Strong => DiffusionForm::Strong,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Grid {
    Intervals(usize),
    Spacing(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TensionChoice {
    Fixed(f64),
    Scan {
        p_min: f64,
        p_max: f64,
        coarse_count: usize,
        refine_rounds: usize,
        /// Literal linear scan with this increment instead of coarse-to-fine.
        exhaustive_step: Option<f64>,
        target_time: f64,
    },
}

/// Everything needed to reproduce one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub problem: ProblemId,
    pub nu: f64,
    pub grid: Grid,
    pub dt: f64,
    pub t_max: f64,
    pub tension: TensionChoice,
    pub domain: Option<(f64, f64)>,
    pub snapshots: Vec<f64>,
    pub inner_iterations: usize,
    pub quadrature_order: usize,
    pub diffusion: DiffusionArg,
    pub plot_oversample: usize,
    pub out_dir: PathBuf,
    pub emit_profiles: bool,
    pub emit_errors: bool,
    pub emit_scan: bool,
}

#[derive(Debug, Parser)]
#[command(
    name = "expspline-burgers",
    version,
    about = "Exponential B-spline Galerkin solver for the 1-D Burgers equation",
    group(ArgGroup::new("grid").required(true).args(["h", "n"])),
    group(ArgGroup::new("tension").required(true).args(["p", "scan_p"]))
)]
struct Args {
    /// Test problem
    #[arg(long, value_enum)]
    problem: ProblemId,
    /// Viscosity (default 0.005 for shock, 0.01 for wave)
    #[arg(long)]
    nu: Option<f64>,
    /// Knot spacing
    #[arg(long)]
    h: Option<f64>,
    /// Number of intervals
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    dt: f64,
    /// Final time
    #[arg(long)]
    tmax: f64,
    /// Tension parameter
    #[arg(long)]
    p: Option<f64>,
    /// Scan p over MIN,MAX
    #[arg(long, value_name = "MIN,MAX")]
    scan_p: Option<String>,
    /// Linear scan with this increment (requires --scan-p)
    #[arg(long, value_name = "STEP")]
    scan_exhaustive: Option<f64>,
    #[arg(long, default_value_t = ScanSpec::DEFAULT_COARSE_COUNT)]
    scan_coarse: usize,
    #[arg(long, default_value_t = ScanSpec::DEFAULT_REFINE_ROUNDS)]
    scan_rounds: usize,
    /// Time at which the scan objective is measured (default: --tmax)
    #[arg(long)]
    scan_target: Option<f64>,
    /// Domain override A,B
    #[arg(long, value_name = "A,B")]
    domain: Option<String>,
    /// Output times T1,T2,... (default: --tmax)
    #[arg(long, value_name = "T1,T2,...")]
    snapshots: Option<String>,
    #[arg(long, default_value_t = SolverConfig::DEFAULT_INNER_ITERATIONS)]
    inner_iters: usize,
    #[arg(long, default_value_t = SolverConfig::DEFAULT_QUADRATURE_ORDER)]
    quad_order: usize,
    #[arg(long, value_enum, default_value_t = DiffusionArg::Weak)]
    diffusion: DiffusionArg,
    /// Extra sample points per element in profile files
    #[arg(long, default_value_t = 4)]
    plot_oversample: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    no_profiles: bool,
    #[arg(long)]
    no_errors: bool,
}

fn parse_list(flag: &str, s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("--{flag}: cannot parse '{t}' as a number")))
        })
        .collect()
}

fn parse_pair(flag: &str, s: &str) -> Result<(f64, f64), CliError> {
    match parse_list(flag, s)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(CliError::Usage(format!(
            "--{flag} expects two comma-separated numbers"
        ))),
    }
}

/// Parses `argv` (including the program name).
pub fn parse_args<I, T>(argv: I) -> Result<RunManifest, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = Args::try_parse_from(argv).map_err(|e| match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::Info(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    })?;

    if args.p.is_some() && (args.scan_exhaustive.is_some() || args.scan_target.is_some()) {
        return Err(CliError::Usage(
            "--scan-exhaustive and --scan-target require --scan-p".into(),
        ));
    }

    let grid = match (args.h, args.n) {
        (Some(h), None) => Grid::Spacing(h),
        (None, Some(n)) => Grid::Intervals(n),
        _ => unreachable!("clap group enforces exactly one of --h/--n"),
    };
    let tension = match (args.p, &args.scan_p) {
        (Some(p), None) => TensionChoice::Fixed(p),
        (None, Some(range)) => {
            let (p_min, p_max) = parse_pair("scan-p", range)?;
            TensionChoice::Scan {
                p_min,
                p_max,
                coarse_count: args.scan_coarse,
                refine_rounds: args.scan_rounds,
                exhaustive_step: args.scan_exhaustive,
                target_time: args.scan_target.unwrap_or(args.tmax),
            }
        }
        _ => unreachable!("clap group enforces exactly one of --p/--scan-p"),
    };
    let nu = args.nu.unwrap_or(match args.problem {
        ProblemId::Shock => 0.005,
        ProblemId::Wave => 0.01,
    });
    let domain = args
        .domain
        .as_deref()
        .map(|d| parse_pair("domain", d))
        .transpose()?;
    let snapshots = args
        .snapshots
        .as_deref()
        .map(|s| parse_list("snapshots", s))
        .transpose()?
        .unwrap_or_default();

    let emit_scan = matches!(tension, TensionChoice::Scan { .. });
    Ok(RunManifest {
        problem: args.problem,
        nu,
        grid,
        dt: args.dt,
        t_max: args.tmax,
        tension,
        domain,
        snapshots,
        inner_iterations: args.inner_iters,
        quadrature_order: args.quad_order,
        diffusion: args.diffusion,
        plot_oversample: args.plot_oversample,
        out_dir: args.out,
        emit_profiles: !args.no_profiles,
        emit_errors: !args.no_errors,
        emit_scan,
    })
}

/// The run record written to `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub manifest: RunManifest,
    pub resolved: Resolved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resolved {
    pub a: f64,
    pub b: f64,
    pub n_intervals: usize,
    pub h: f64,
    pub p: f64,
    pub t_start: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub snapshot_times: Vec<f64>,
    pub scan_best_error: Option<f64>,
}

impl RunManifest {
    pub fn problem_spec(&self) -> Result<ProblemSpec, CliError> {
        let spec = match self.problem {
            ProblemId::Shock => {
                let (a, b) = self.domain.unwrap_or((0.0, 1.0));
                shock_problem_on(self.nu, a, b)
            }
            ProblemId::Wave => {
                if self.domain.is_some() {
                    return Err(CliError::Usage(
                        "--domain is only supported for the shock problem".into(),
                    ));
                }
                travelling_problem_with_nu(self.nu)
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn n_intervals(&self, problem: &ProblemSpec) -> Result<usize, CliError> {
        match self.grid {
            Grid::Intervals(n) => Ok(n),
            Grid::Spacing(h) => {
                let len = problem.b - problem.a;
                if !(h > 0.0) {
                    return Err(CliError::Usage(format!("--h must be > 0, got {h}")));
                }
                let n = (len / h).round();
                if n < 1.0 || (n * h - len).abs() > 1e-9 * len.max(1.0) {
                    return Err(CliError::Usage(format!(
                        "--h {h} does not divide the domain length {len}"
                    )));
                }
                Ok(n as usize)
            }
        }
    }

    /// Solver settings with the tension set to `p`.
    pub fn solver_config(&self, problem: &ProblemSpec, p: f64) -> Result<SolverConfig, CliError> {
        let mut cfg = SolverConfig::new(self.n_intervals(problem)?, self.dt, self.t_max, p);
        cfg.inner_iterations = self.inner_iterations;
        cfg.quadrature_order = self.quadrature_order;
        cfg.diffusion_form = self.diffusion.into();
        cfg.snapshot_times = if self.snapshots.is_empty() {
            vec![self.t_max]
        } else {
            self.snapshots.clone()
        };
        Ok(cfg)
    }

    /// Reads the manifest back from a `run.json` record.
    pub fn from_run_record(path: &Path) -> Result<RunManifest, CliError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let record: RunRecord = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Ok(record.manifest)
    }
}

/// Formats with 17 significant digits.
fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Profile sample points: every knot plus `oversample` points inside each element.
pub fn profile_points(basis: &BasisParams, oversample: usize) -> Vec<f64> {
    let per = oversample + 1;
    let total = basis.n_intervals() * per;
    let step = basis.h() / per as f64;
    (0..=total)
        .map(|k| {
            if k % per == 0 {
                basis.knot((k / per) as i64)
            } else {
                basis.knot((k / per) as i64) + (k % per) as f64 * step
            }
        })
        .collect()
}

pub fn profile_csv(
    basis: &BasisParams,
    problem: &ProblemSpec,
    snap: &Snapshot,
    oversample: usize,
) -> Result<String, CliError> {
    let mut out = String::from("x,u_numeric,u_exact,abs_error\n");
    for x in profile_points(basis, oversample) {
        let u = basis.eval_solution(&snap.coefficients, x)?;
        let (ex, err) = match &problem.exact {
            Some(f) => {
                let e = f(x, snap.time);
                (num(e), num((u - e).abs()))
            }
            None => (String::new(), String::new()),
        };
        let _ = writeln!(out, "{},{},{},{}", num(x), num(u), ex, err);
    }
    Ok(out)
}

pub fn errors_csv(snaps: &[Snapshot]) -> String {
    let mut out = String::from("time,linf\n");
    for s in snaps {
        let e = s.linf_error.map(num).unwrap_or_default();
        let _ = writeln!(out, "{},{}", num(s.time), e);
    }
    out
}

pub fn scan_csv(result: &ScanResult) -> String {
    let mut out = String::from("p,linf\n");
    for pt in &result.trace {
        let _ = writeln!(out, "{},{}", num(pt.p), num(pt.error));
    }
    out
}

/// Error table with L∞ scaled by 10³, one row per snapshot.
pub fn summary_table(manifest: &RunManifest, resolved: &Resolved, snaps: &[Snapshot]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "problem={} nu={} domain=[{}, {}] N={} h={} dt={} p={}",
        match manifest.problem {
            ProblemId::Shock => "shock",
            ProblemId::Wave => "wave",
        },
        manifest.nu,
        resolved.a,
        resolved.b,
        resolved.n_intervals,
        resolved.h,
        manifest.dt,
        resolved.p
    );
    let _ = writeln!(out, "{:>10}  {:>14}", "t", "Linf x 10^3");
    for s in snaps {
        match s.linf_error {
            Some(e) => {
                let _ = writeln!(out, "{:>10.4}  {:>14.5}", s.time, e * 1e3);
            }
            None => {
                let _ = writeln!(out, "{:>10.4}  {:>14}", s.time, "-");
            }
        }
    }
    out
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(io_err(&path))
}

/// Runs the manifest, writes every requested output file and the summary table to `stdout`.
pub fn execute(manifest: &RunManifest, stdout: &mut impl Write) -> Result<RunRecord, CliError> {
    let problem = manifest.problem_spec()?;

    let scan = match &manifest.tension {
        TensionChoice::Fixed(_) => None,
        TensionChoice::Scan {
            p_min,
            p_max,
            coarse_count,
            refine_rounds,
            exhaustive_step,
            target_time,
        } => {
            let template = manifest.solver_config(&problem, *p_min)?;
            let result = match exhaustive_step {
                Some(step) => {
                    scan_exhaustive(&problem, &template, *p_min, *p_max, *step, *target_time)?
                }
                None => scan_p(
                    &problem,
                    &template,
                    &ScanSpec {
                        p_min: *p_min,
                        p_max: *p_max,
                        coarse_count: *coarse_count,
                        refine_rounds: *refine_rounds,
                        target_time: *target_time,
                    },
                )?,
            };
            Some(result)
        }
    };
    let p = match (&manifest.tension, &scan) {
        (TensionChoice::Fixed(p), _) => *p,
        (_, Some(r)) => r.best_p,
        _ => unreachable!(),
    };

    let config = manifest.solver_config(&problem, p)?;
    let basis = config.basis(&problem)?;
    let snaps = run(&problem, &config)?;

    let resolved = Resolved {
        a: problem.a,
        b: problem.b,
        n_intervals: basis.n_intervals(),
        h: basis.h(),
        p,
        t_start: problem.t_start,
        beta1: problem.beta1,
        beta2: problem.beta2,
        alpha1: basis.alpha1(),
        alpha2: basis.alpha2(),
        alpha3: basis.alpha3(),
        snapshot_times: snaps.iter().map(|s| s.time).collect(),
        scan_best_error: scan.as_ref().map(|r| r.best_error),
    };
    let record = RunRecord {
        manifest: manifest.clone(),
        resolved,
    };

    let dir = &manifest.out_dir;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    if manifest.emit_profiles {
        for s in &snaps {
            let csv = profile_csv(&basis, &problem, s, manifest.plot_oversample)?;
            write_file(dir, &format!("profile_{}.csv", s.time), &csv)?;
        }
    }
    if manifest.emit_errors {
        write_file(dir, "errors.csv", &errors_csv(&snaps))?;
    }
    if let (true, Some(r)) = (manifest.emit_scan, &scan) {
        write_file(dir, "scan.csv", &scan_csv(r))?;
    }
    let json = serde_json::to_string_pretty(&record)
        .map_err(|e| CliError::Usage(format!("cannot serialise run record: {e}")))?;
    write_file(dir, "run.json", &(json + "\n"))?;

    let table = summary_table(manifest, &record.resolved, &snaps);
    stdout
        .write_all(table.as_bytes())
        .map_err(io_err(Path::new("<stdout>")))?;
    Ok(record)
}
