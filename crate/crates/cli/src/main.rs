use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ptlz_cli::config::{RegimeSelection, RunConfig};
use ptlz_cli::verify::{verify, DEFAULT_TOL};
use ptlz_cli::{run, CliError, EXIT_CHECK_FAILED, EXIT_NUMERIC, EXIT_OK};

/// Oracle trajectories, perturbation-series comparisons and spectra for the
/// four-level PT-symmetric parabolic Landau-Zener model.
#[derive(Parser, Debug)]
#[command(name = "ptlz", version)]
struct Args {
    /// TOML run configuration; defaults apply to every missing key.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run the verification suite instead of a computation.
    #[arg(long)]
    verify: bool,
    #[arg(long, value_enum)]
    regime: Option<RegimeSelection>,
    /// Highest order in κ of the series.
    #[arg(long)]
    order: Option<usize>,
    /// Oracle tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Sweep points run concurrently.
    #[arg(long)]
    jobs: Option<usize>,
}

fn load(args: &Args) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(o) = &args.out {
        cfg.output.dir = o.clone();
    }
    if let Some(r) = args.regime {
        cfg.series.regime = r;
    }
    if let Some(n) = args.order {
        cfg.series.order = n;
    }
    if let Some(t) = args.tol {
        cfg.oracle.tol = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main_inner(args: Args) -> Result<i32, CliError> {
    let cfg = load(&args)?;
    if args.verify {
        let tol = args.tol.unwrap_or(DEFAULT_TOL);
        let report = verify(&cfg, tol)?;
        for c in report.checks.iter().filter(|c| !c.passed) {
            eprintln!("FAIL {}: expected {}, actual {}", c.name, c.expected, c.actual);
        }
        println!("{}", serde_json::to_string_pretty(&report).expect("plain data"));
        return Ok(if report.passed { EXIT_OK } else { EXIT_CHECK_FAILED });
    }
    let jobs = args
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    let summary = run::run(&cfg, jobs)?;
    for p in &summary.points {
        match &p.error {
            None => eprintln!("ok     {}", p.dir.display()),
            Some(e) => eprintln!("failed {}: {e}", p.dir.display()),
        }
    }
    Ok(if summary.failed() { EXIT_NUMERIC } else { EXIT_OK })
}

fn main() -> ExitCode {
    let args = Args::parse();
    let code = match main_inner(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("ptlz: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
