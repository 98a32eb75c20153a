//! Command-line surface: solve one (ε, λ), sweep ε with branch
//! tracking and exceptional-point output, and diagnostic dumps of the
//! mismatch curve, the contour and the first-order formula.
//!
//! Exit codes: 0 success, 2 no real eigenvalues found (a valid
//! scientific result), 1 numeric failure, 64 usage error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use toboggan::contour::{self, ContourSpec, DEFAULT_TAIL_EXTENT};
use toboggan::integrator::IntegratorConfig;
use toboggan::potential::{self, PotentialSpec};
use toboggan::shooting::Shooter;
use toboggan::spectrum::{
    self, detect_exceptional, BranchTracker, EpsColumn, SolverConfig, SpectralTable, SweepConfig,
};
use toboggan::{perturbation, Error};

const EXIT_NO_ROOTS: u8 = 2;
const EXIT_NUMERIC: u8 = 1;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "toboggan", version, about = "Real spectra of Bender Hamiltonians on winding contours")]
struct Cli {
    /// Parallelism degree (falls back to TOBOGGAN_JOBS, then all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Real eigenvalues for one (epsilon, lambda)
    Solve(SolveArgs),
    /// Eigenvalue table over an epsilon range, with branch tracking
    /// and exceptional-point records
    Sweep(SweepArgs),
    /// Dump the mismatch curve F(E) as CSV
    Mismatch(MismatchArgs),
    /// Dump the sampled contour (and optionally the potential) as CSV
    Contour(ContourArgs),
    /// First-order energy formula rows
    Perturb(PerturbArgs),
}

#[derive(Args)]
struct NumericOpts {
    /// Integration step in t
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Renormalization threshold for solution magnitudes
    #[arg(long, default_value_t = 1e100)]
    renorm_threshold: f64,
    /// |Re x| reach of the contour tails
    #[arg(long, default_value_t = DEFAULT_TAIL_EXTENT)]
    tail: f64,
    /// Energy grid step of the root scan
    #[arg(long, default_value_t = 0.05)]
    grid_step: f64,
    /// Bisection tolerance on E
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

impl NumericOpts {
    fn solver(&self) -> SolverConfig {
        SolverConfig {
            tail_extent: self.tail,
            integrator: IntegratorConfig {
                dt: self.dt,
                renorm_threshold: self.renorm_threshold,
            },
            grid_step: self.grid_step,
            tol: self.tol,
            ..SolverConfig::default()
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, allow_negative_numbers = true)]
    epsilon: f64,
    #[arg(long)]
    lambda: u32,
    /// Number of eigenvalues requested
    #[arg(long, short, default_value_t = 6)]
    n: usize,
    #[arg(long, allow_negative_numbers = true)]
    emin: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    emax: Option<f64>,
    #[command(flatten)]
    num: NumericOpts,
    /// Output file (stdout when omitted)
    #[arg(long, short)]
    output: Option<String>,
    #[arg(long, default_value = "csv")]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, clap::ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    lambda: u32,
    #[arg(long, allow_negative_numbers = true)]
    from: f64,
    #[arg(long, allow_negative_numbers = true)]
    to: f64,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    #[arg(long, short, default_value_t = 6)]
    n: usize,
    #[arg(long, allow_negative_numbers = true)]
    emin: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    emax: Option<f64>,
    #[command(flatten)]
    num: NumericOpts,
    /// CSV output file (stdout when omitted)
    #[arg(long, short)]
    output: Option<String>,
    /// Exceptional-point JSON output file
    #[arg(long)]
    ep_output: Option<String>,
}

#[derive(Args)]
struct MismatchArgs {
    #[arg(long, allow_negative_numbers = true)]
    epsilon: f64,
    #[arg(long)]
    lambda: u32,
    #[arg(long, allow_negative_numbers = true)]
    emin: f64,
    #[arg(long, allow_negative_numbers = true)]
    emax: f64,
    #[arg(long, default_value_t = 0.05)]
    step: f64,
    #[command(flatten)]
    num: NumericOpts,
    #[arg(long, short)]
    output: Option<String>,
}

#[derive(Args)]
struct ContourArgs {
    #[arg(long)]
    lambda: u32,
    /// Also emit potential columns for this exponent
    #[arg(long, allow_negative_numbers = true)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_TAIL_EXTENT)]
    tail: f64,
    #[arg(long, default_value_t = 400)]
    samples: usize,
    #[arg(long, short)]
    output: Option<String>,
}

#[derive(Args)]
struct PerturbArgs {
    /// Highest level index to print
    #[arg(long, short, default_value_t = 5)]
    n: u32,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    epsilon: f64,
    #[arg(long, short)]
    output: Option<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // help/version requests are not usage errors
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(jobs) = cli.jobs.or_else(|| {
        std::env::var("TOBOGGAN_JOBS")
            .ok()
            .and_then(|v| v.parse().ok())
    }) {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Mismatch(a) => cmd_mismatch(a),
        Command::Contour(a) => cmd_contour(a),
        Command::Perturb(a) => cmd_perturb(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(AppError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(AppError::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_NUMERIC)
        }
        Err(AppError::Io(e)) => {
            eprintln!("i/o error: {e}");
            ExitCode::from(EXIT_NUMERIC)
        }
    }
}

enum AppError {
    Usage(String),
    Numeric(String),
    Io(io::Error),
}

impl From<io::Error> for AppError {
    fn from(e: io::Error) -> Self {
        AppError::Io(e)
    }
}

impl From<Error> for AppError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) => AppError::Usage(e.to_string()),
            other => AppError::Numeric(other.to_string()),
        }
    }
}

fn writer(path: &Option<String>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

/// 10 significant digits, deterministic across runs.
fn sig10(x: f64) -> String {
    format!("{x:.9e}")
}

fn cmd_solve(a: SolveArgs) -> Result<u8, AppError> {
    let window = match (a.emin, a.emax) {
        (Some(lo), Some(hi)) => (lo, hi),
        (None, None) => spectrum::default_window(a.n),
        _ => (
            a.emin.unwrap_or(spectrum::default_window(a.n).0),
            a.emax.unwrap_or(spectrum::default_window(a.n).1),
        ),
    };
    let r = spectrum::real_eigenvalues(a.epsilon, a.lambda, a.n, window, &a.num.solver())?;
    let mut out = writer(&a.output)?;
    match a.format {
        Format::Csv => {
            writeln!(out, "# format: 1")?;
            writeln!(out, "index,energy")?;
            for (i, e) in r.energies.iter().enumerate() {
                writeln!(out, "{i},{}", sig10(*e))?;
            }
        }
        Format::Json => {
            let doc = serde_json::json!({
                "epsilon": a.epsilon,
                "lambda": a.lambda,
                "found": r.found,
                "energies": r.energies,
                "flags": r.flags,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap())?;
        }
    }
    out.flush()?;
    Ok(if r.energies.is_empty() { EXIT_NO_ROOTS } else { 0 })
}

fn cmd_sweep(a: SweepArgs) -> Result<u8, AppError> {
    let mut sweep_cfg = SweepConfig::new(a.from, a.to, a.step, a.lambda, a.n);
    if let (Some(lo), Some(hi)) = (a.emin, a.emax) {
        sweep_cfg.window = Some((lo, hi));
    }
    let cfg = a.num.solver();
    let window = sweep_cfg
        .window
        .unwrap_or_else(|| spectrum::default_window(a.n));
    let cap = 2.0 * window.1;

    // validate the range up front so usage errors surface before any
    // heavy computation
    if !(a.step > 0.0 && a.from < a.to) {
        return Err(AppError::Usage(format!(
            "empty ε range [{}, {}] step {}",
            a.from, a.to, a.step
        )));
    }

    let mut out = writer(&a.output)?;
    writeln!(out, "# format: 1")?;
    writeln!(out, "epsilon,lambda,index,energy,branch")?;

    // columns are computed in parallel chunks but tracked and flushed
    // in ε order, so partial output is usable if the run is cut short
    let n = ((a.to - a.from) / a.step).round() as usize;
    let grid: Vec<f64> = (0..=n)
        .map(|k| a.from + k as f64 * a.step)
        .filter(|&e| e <= a.to + 1e-12)
        .collect();
    let chunk = rayon::current_num_threads().max(1) * 4;
    let mut tracker = BranchTracker::new();
    let mut columns: Vec<EpsColumn> = Vec::with_capacity(grid.len());
    let mut any = false;
    for block in grid.chunks(chunk) {
        use rayon::prelude::*;
        let computed: Vec<EpsColumn> = block
            .par_iter()
            .map(|&epsilon| {
                match spectrum::real_eigenvalues_expanding(
                    epsilon, a.lambda, a.n, window, cap, &cfg,
                ) {
                    Ok(r) => EpsColumn {
                        epsilon,
                        energies: r.energies,
                        found: r.found,
                        error: None,
                    },
                    Err(e) => EpsColumn {
                        epsilon,
                        energies: Vec::new(),
                        found: 0,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect();
        for col in computed {
            let ids = tracker.push(col.epsilon, &col.energies);
            for (i, (&id, &e)) in ids.iter().zip(col.energies.iter()).enumerate() {
                any = true;
                writeln!(out, "{},{},{i},{},{id}", col.epsilon, a.lambda, sig10(e))?;
            }
            if let Some(err) = &col.error {
                eprintln!("epsilon {}: {err}", col.epsilon);
            }
            columns.push(col);
        }
        out.flush()?;
    }

    let table = SpectralTable {
        lambda: a.lambda,
        columns,
    };
    let tracked = spectrum::track(&table);
    let eps: Vec<_> = detect_exceptional(&tracked, &cfg)
        .into_iter()
        .filter_map(|r| match r {
            Ok(ep) => Some(ep),
            Err(e) => {
                eprintln!("exceptional-point refinement skipped: {e}");
                None
            }
        })
        .collect();
    if let Some(path) = &a.ep_output {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{}", serde_json::to_string_pretty(&eps).unwrap())?;
        w.flush()?;
    } else if !eps.is_empty() {
        eprintln!("{}", serde_json::to_string_pretty(&eps).unwrap());
    }
    Ok(if any { 0 } else { EXIT_NO_ROOTS })
}

fn cmd_mismatch(a: MismatchArgs) -> Result<u8, AppError> {
    if !(a.step > 0.0 && a.emin < a.emax) {
        return Err(AppError::Usage(format!(
            "empty energy range [{}, {}] step {}",
            a.emin, a.emax, a.step
        )));
    }
    let spec = ContourSpec::new(a.lambda, a.num.tail)?;
    let pspec = PotentialSpec::new(a.epsilon);
    let shooter = Shooter::new(
        &spec,
        &pspec,
        &IntegratorConfig {
            dt: a.num.dt,
            renorm_threshold: a.num.renorm_threshold,
        },
    )?;
    let mut out = writer(&a.output)?;
    writeln!(out, "# format: 1")?;
    writeln!(out, "energy,f,logmag")?;
    let n = ((a.emax - a.emin) / a.step).round() as usize;
    for k in 0..=n {
        let e = a.emin + k as f64 * a.step;
        let m = shooter.mismatch(e)?;
        writeln!(out, "{e},{},{}", sig10(m.f), sig10(m.logmag))?;
    }
    out.flush()?;
    Ok(0)
}

fn cmd_contour(a: ContourArgs) -> Result<u8, AppError> {
    if a.samples < 2 {
        return Err(AppError::Usage("need at least 2 samples".into()));
    }
    let spec = ContourSpec::new(a.lambda, a.tail)?;
    let (t_min, t_max) = contour::endpoints(&spec);
    let mut out = writer(&a.output)?;
    writeln!(out, "# format: 1")?;
    match a.epsilon {
        None => writeln!(out, "t,re_x,im_x,theta")?,
        Some(_) => writeln!(out, "t,re_x,im_x,theta,re_w,im_w")?,
    }
    for k in 0..a.samples {
        let t = t_min + (t_max - t_min) * k as f64 / (a.samples - 1) as f64;
        let p = contour::point(&spec, t);
        match a.epsilon {
            None => writeln!(
                out,
                "{},{},{},{}",
                sig10(t),
                sig10(p.x.re),
                sig10(p.x.im),
                sig10(p.theta)
            )?,
            Some(eps) => {
                let w = potential::value(&PotentialSpec::new(eps), &p)?;
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    sig10(t),
                    sig10(p.x.re),
                    sig10(p.x.im),
                    sig10(p.theta),
                    sig10(w.re),
                    sig10(w.im)
                )?;
            }
        }
    }
    out.flush()?;
    Ok(0)
}

fn cmd_perturb(a: PerturbArgs) -> Result<u8, AppError> {
    let mut out = writer(&a.output)?;
    writeln!(out, "# format: 1")?;
    writeln!(out, "n,base,slope,energy")?;
    for n in 0..=a.n {
        let c = perturbation::FirstOrderCoefficient::new(n);
        writeln!(
            out,
            "{n},{},{},{}",
            sig10(c.base),
            sig10(c.slope),
            sig10(c.energy(a.epsilon))
        )?;
    }
    out.flush()?;
    Ok(0)
}
