//! The run pipeline: oracle trajectory, spectrum, series comparison and
//! manifest for every grid point.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ptlz::model::{spectrum, Basis, Drive, ModelParams, StateVector};
use ptlz::oracle::{integrate_coupled_heun, integrate_four_level, IntegratorStats, Span};
use ptlz::perturbation::{validity_window, InitialCombination, RegimeExpansion};
use ptlz::specfun::Regime;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{GridPoint, RunConfig};
use crate::CliError;

/// Tolerance of the oracle runs behind the comparison table; tighter than
/// anything the series is expected to reach at the smallest κ.
const COMPARISON_TOL: f64 = 1e-12;
const COMPARISON_POINTS: usize = 41;

pub(crate) fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonRow {
    pub regime: String,
    pub kappa: f64,
    pub order: usize,
    pub max_abs_error: f64,
    /// Error at the previous (twice larger) κ divided by this one.
    pub ratio: Option<f64>,
    pub observed_slope: Option<f64>,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FittedSlope {
    pub regime: String,
    pub order: usize,
    pub slope: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct DriftSummary {
    /// Conserved quantity at the initial time; absent without PT symmetry.
    pub conserved_initial: Option<[f64; 2]>,
    pub conserved_abs_drift: Option<f64>,
    /// Drift relative to the initial value; absent when that value is
    /// below `1e-12`.
    pub conserved_relative: Option<f64>,
    pub integrator: IntegratorStats,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub core_version: String,
    pub created: String,
    pub status: String,
    pub error: Option<String>,
    pub point: GridPoint,
    pub outputs: Vec<String>,
    pub drift: DriftSummary,
    pub fitted_slopes: Vec<FittedSlope>,
    pub config: RunConfig,
}

#[derive(Clone, Debug, Serialize)]
pub struct PointOutcome {
    pub dir: PathBuf,
    pub point: GridPoint,
    pub status: String,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub points: Vec<PointOutcome>,
}

impl RunSummary {
    pub fn failed(&self) -> bool {
        self.points.iter().any(|p| p.error.is_some())
    }
}

fn write(dir: &Path, name: &str, body: &str, outputs: &mut Vec<String>) -> Result<(), CliError> {
    fs::write(dir.join(name), body).map_err(|e| CliError::Io(format!("{}: {e}", dir.join(name).display())))?;
    outputs.push(name.to_string());
    Ok(())
}

fn trajectory_csv(cfg: &RunConfig, params: &ModelParams, drive: &Drive) -> Result<(String, DriftSummary), CliError> {
    let a0 = StateVector::new(Basis::A, cfg.initial_a());
    let (t0, t1) = (cfg.time.start, cfg.time.end);
    let tr = integrate_four_level(params, drive, &a0, (t0, t1), cfg.oracle.tol).map_err(CliError::numeric)?;
    let mut out = String::from("t[time]");
    for i in 1..=4 {
        let _ = write!(out, ",re_a{i}[amp],im_a{i}[amp]");
    }
    out.push_str(",norm2[amp^2]\n");
    for t in grid(t0, t1, cfg.time.samples) {
        let y = tr.evaluate(t);
        out.push_str(&num(t));
        for v in &y {
            let _ = write!(out, ",{},{}", num(v.re), num(v.im));
        }
        let n2: f64 = y.iter().map(|v| v.norm_sqr()).sum();
        let _ = writeln!(out, ",{}", num(n2));
    }
    let pt = !tr.monitor_names.is_empty();
    let m0 = pt.then(|| tr.monitor_initial(0));
    let drift = DriftSummary {
        conserved_initial: m0.map(|m| [m.re, m.im]),
        conserved_abs_drift: pt.then(|| tr.monitor_abs_drift(0)),
        conserved_relative: m0.filter(|m| m.norm() > 1e-12).map(|_| tr.monitor_drift(0)),
        integrator: tr.stats,
    };
    Ok((out, drift))
}

fn spectrum_csv(cfg: &RunConfig, params: &ModelParams, drive: &Drive) -> String {
    let mut out = String::from("t[time]");
    for i in 1..=4 {
        let _ = write!(out, ",re_lambda{i}[freq],im_lambda{i}[freq]");
    }
    out.push_str(",near_defective[bool]\n");
    for t in grid(cfg.time.start, cfg.time.end, cfg.time.spectrum_samples) {
        let s = spectrum(params, drive, t);
        out.push_str(&num(t));
        for v in s.eigenvalues {
            let _ = write!(out, ",{},{}", num(v.re), num(v.im));
        }
        let _ = writeln!(out, ",{}", u8::from(s.near_defective()));
    }
    out
}

/// Largest deviation over the regime window between the order-`n` partial
/// sum and the coupled system started from that partial sum at `t = 0`,
/// together with the convergence flag at the window ends.
pub fn series_deviation(
    ex: &RegimeExpansion,
    init: &InitialCombination,
    kappa: f64,
    n: usize,
) -> Result<(f64, bool), CliError> {
    let pair = ex.natural_pair();
    let start = ex.evaluate(pair.as_ref(), init, kappa, 0.0, n);
    let (lo, hi) = validity_window(ex.regime);
    let tr = integrate_coupled_heun(
        &ex.t_potential(),
        kappa,
        [start.c1, start.c2],
        [start.c1_dot, start.c2_dot],
        Span::around(0.0, lo.min(0.0), hi.max(0.0)),
        COMPARISON_TOL,
    )
    .map_err(CliError::numeric)?;
    let mut worst = 0.0f64;
    let mut converged = true;
    for t in grid(lo, hi, COMPARISON_POINTS) {
        let s = ex.evaluate(pair.as_ref(), init, kappa, t, n);
        let y = tr.evaluate(t);
        worst = worst.max((s.c1 - y[0]).norm()).max((s.c2 - y[1]).norm());
        if t == lo || t == hi {
            converged &= s.converged;
        }
    }
    Ok((worst, converged))
}

fn regime_power(regime: Regime, max_power: usize) -> usize {
    // the pure quartic is used at |t| up to 1.6, where ₂F₃ needs more terms
    if regime == Regime::QuarticBessel {
        max_power.max(90)
    } else {
        max_power
    }
}

/// Rows for every regime, κ/2ʲ and order.
pub fn comparison_rows(cfg: &RunConfig, p: &GridPoint) -> Result<Vec<ComparisonRow>, CliError> {
    let c = cfg.combination();
    let init = InitialCombination::new(c[0], c[1], c[2], c[3]);
    let mut rows = Vec::new();
    for regime in cfg.series.regime.regimes() {
        let mut prev: Vec<Option<f64>> = vec![None; cfg.series.order + 1];
        for j in 0..cfg.series.kappa_steps {
            let kappa = p.kappa / f64::from(1u32 << j);
            let point = GridPoint { kappa, ..*p };
            let (params, drive) = cfg.point_params(&point).map_err(|e| CliError::Config(e.to_string()))?;
            let Drive::Parabolic(sweep) = drive else { unreachable!("runs always sweep") };
            let ex = RegimeExpansion::for_model(
                regime,
                &params,
                &sweep,
                cfg.series.order,
                regime_power(regime, cfg.series.max_power),
            )
            .map_err(CliError::numeric)?;
            for n in 0..=cfg.series.order {
                let (err, converged) = series_deviation(&ex, &init, kappa, n)?;
                let ratio = prev[n].filter(|_| err > 0.0).map(|e| e / err);
                rows.push(ComparisonRow {
                    regime: regime.to_string(),
                    kappa,
                    order: n,
                    max_abs_error: err,
                    ratio,
                    observed_slope: ratio.map(f64::log2),
                    converged,
                });
                prev[n] = Some(err);
            }
        }
    }
    Ok(rows)
}

fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from(
        "regime,kappa[freq],order,max_abs_error[amp],ratio[1],observed_slope[1],converged[bool]\n",
    );
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.regime,
            num(r.kappa),
            r.order,
            num(r.max_abs_error),
            opt(r.ratio),
            opt(r.observed_slope),
            u8::from(r.converged)
        );
    }
    out
}

/// Least-squares slope of `log err` against `log κ` per regime and order.
pub fn fitted_slopes(rows: &[ComparisonRow]) -> Vec<FittedSlope> {
    let mut keys: Vec<(String, usize)> = rows.iter().map(|r| (r.regime.clone(), r.order)).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|(regime, order)| {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.regime == regime && r.order == order && r.max_abs_error > 0.0 && r.kappa > 0.0)
                .map(|r| (r.kappa.ln(), r.max_abs_error.ln()))
                .collect();
            FittedSlope {
                regime,
                order,
                slope: log_log_slope(&pts),
            }
        })
        .collect()
}

pub fn log_log_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn write_manifest(dir: &Path, m: &Manifest) -> Result<(), CliError> {
    let body = serde_json::to_string_pretty(m).expect("plain data");
    fs::write(dir.join("manifest.json"), body + "\n")
        .map_err(|e| CliError::Io(format!("{}: {e}", dir.join("manifest.json").display())))
}

/// Runs one grid point into `dir`. The manifest is written even when a
/// numeric step fails, listing the outputs produced so far.
pub fn run_point(cfg: &RunConfig, p: &GridPoint, dir: &Path) -> PointOutcome {
    let mut manifest = Manifest {
        tool: "ptlz".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        core_version: ptlz::VERSION.into(),
        created: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        status: "ok".into(),
        error: None,
        point: *p,
        outputs: Vec::new(),
        drift: DriftSummary::default(),
        fitted_slopes: Vec::new(),
        config: cfg.at_point(p),
    };
    let result = (|| -> Result<(), CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let (params, drive) = cfg.point_params(p).map_err(|e| CliError::Config(e.to_string()))?;
        write(dir, "spectrum.csv", &spectrum_csv(cfg, &params, &drive), &mut manifest.outputs)?;
        let (traj, drift) = trajectory_csv(cfg, &params, &drive)?;
        manifest.drift = drift;
        write(dir, "trajectory.csv", &traj, &mut manifest.outputs)?;
        if !cfg.series.regime.regimes().is_empty() {
            let rows = comparison_rows(cfg, p)?;
            manifest.fitted_slopes = fitted_slopes(&rows);
            write(dir, "comparison.csv", &comparison_csv(&rows), &mut manifest.outputs)?;
        }
        Ok(())
    })();
    if let Err(e) = &result {
        manifest.status = "failed".into();
        manifest.error = Some(e.to_string());
    }
    let written = write_manifest(dir, &manifest);
    let error = result.err().or(written.err()).map(|e| e.to_string());
    PointOutcome {
        dir: dir.to_path_buf(),
        point: *p,
        status: if error.is_some() { "failed".into() } else { "ok".into() },
        error,
    }
}

/// Runs every grid point on at most `jobs` threads. A single point writes
/// into the output directory itself; a sweep writes `point_NNN/` per point
/// plus a `sweep.json` index.
pub fn run(cfg: &RunConfig, jobs: usize) -> Result<RunSummary, CliError> {
    cfg.validate()?;
    let out = &cfg.output.dir;
    fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    let points = cfg.points();
    if points.len() == 1 {
        let o = run_point(cfg, &points[0], out);
        return Ok(RunSummary { points: vec![o] });
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    let outcomes: Vec<PointOutcome> = pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(i, p)| run_point(cfg, p, &out.join(format!("point_{i:03}"))))
            .collect()
    });
    let index: Vec<_> = outcomes
        .iter()
        .map(|o| {
            serde_json::json!({
                "dir": o.dir.file_name().map(|f| f.to_string_lossy().into_owned()),
                "point": o.point,
                "status": o.status,
            })
        })
        .collect();
    let body = serde_json::to_string_pretty(&index).expect("plain data") + "\n";
    fs::write(out.join("sweep.json"), body).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(RunSummary { points: outcomes })
}
