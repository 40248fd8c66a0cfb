//! Reference solutions by adaptive Runge–Kutta integration.
//!
//! Three systems are integrated: the four cavity amplitudes under the full
//! Hamiltonian, the second-order PT system in `c₁, c₂`, and the fundamental
//! pair of `ÿ + Q(t)y = 0`. None of them uses the series machinery.

mod dp5;
mod quadrature;

pub use dp5::{IntegratorStats, Sample};
pub use quadrature::quadrature;

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::model::{
    c_derivative, conserved_quantity, hamiltonian_at, potential, to_b_basis, to_c_basis, Basis, Drive, ModelError,
    ModelParams, QuarticCoeffs, StateVector,
};
use crate::specfun::{FundamentalPair, PairPoint, Regime};
use dp5::RhsFn;

const I: Complex64 = Complex64::new(0.0, 1.0);
pub const TOL_MIN: f64 = 1e-13;
pub const TOL_MAX: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("tolerance {0} outside [1e-13, 1e-6]")]
    ToleranceOutOfRange(f64),
    #[error("step size underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("step limit reached at t = {t}")]
    TooManySteps { t: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("system needs Γ0 == Γ (ΔΓ = {0})")]
    NotPtSymmetric(f64),
    #[error("invalid span: t0 = {t0} not in [{lo}, {hi}]")]
    InvalidSpan { t0: f64, lo: f64, hi: f64 },
    #[error("quadrature did not converge ({intervals} intervals, error {err:e})")]
    QuadratureNoConvergence { intervals: usize, err: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn check_tol(tol: f64) -> Result<(), OracleError> {
    if (TOL_MIN..=TOL_MAX).contains(&tol) {
        Ok(())
    } else {
        Err(OracleError::ToleranceOutOfRange(tol))
    }
}

/// Integration interval `[lo, hi]` with the initial condition at `t0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Span {
    pub t0: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Span {
    pub fn around(t0: f64, lo: f64, hi: f64) -> Self {
        Self { t0, lo, hi }
    }
}

impl From<(f64, f64)> for Span {
    /// `(start, end)`: initial condition at `start`, either direction.
    fn from((a, b): (f64, f64)) -> Self {
        Self {
            t0: a,
            lo: a.min(b),
            hi: a.max(b),
        }
    }
}

type MonitorFn = Box<dyn Fn(f64, &[Complex64]) -> Vec<Complex64>>;

/// Samples of an integrated system in increasing `t`, with named monitors.
#[derive(Clone)]
pub struct Trajectory {
    pub components: Vec<String>,
    pub monitor_names: Vec<String>,
    pub samples: Vec<Sample>,
    pub stats: IntegratorStats,
    t0_index: usize,
    rhs: Option<RhsFn>,
}

impl std::fmt::Debug for Trajectory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Trajectory")
            .field("components", &self.components)
            .field("monitor_names", &self.monitor_names)
            .field("samples", &self.samples.len())
            .field("stats", &self.stats)
            .finish()
    }
}

impl Trajectory {
    fn integrate(
        rhs: RhsFn,
        y0: &[Complex64],
        span: Span,
        tol: f64,
        components: &[&str],
        monitor_names: &[&str],
        monitors: MonitorFn,
    ) -> Result<Self, OracleError> {
        check_tol(tol)?;
        let Span { t0, lo, hi } = span;
        if !(lo <= t0 && t0 <= hi) || !(lo.is_finite() && hi.is_finite()) {
            return Err(OracleError::InvalidSpan { t0, lo, hi });
        }
        let (mut back, sb) = dp5::solve(&rhs, t0, y0, lo, tol)?;
        let (fwd, sf) = dp5::solve(&rhs, t0, y0, hi, tol)?;
        back.reverse();
        back.pop();
        let t0_index = back.len();
        back.extend(fwd);
        for s in &mut back {
            s.monitors = monitors(s.t, &s.state);
        }
        let mut stats = sb;
        stats.merge(&sf);
        stats.rhs_evals -= 1;
        Ok(Self {
            components: components.iter().map(|s| s.to_string()).collect(),
            monitor_names: monitor_names.iter().map(|s| s.to_string()).collect(),
            samples: back,
            stats,
            t0_index,
            rhs: Some(rhs),
        })
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.samples[0].t, self.samples[self.samples.len() - 1].t)
    }

    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        &self.samples[self.samples.len() - 1]
    }

    /// Index `i` with `samples[i].t <= t <= samples[i+1].t`, clamped.
    fn bracket(&self, t: f64) -> usize {
        let i = self.samples.partition_point(|s| s.t <= t);
        i.saturating_sub(1).min(self.samples.len().saturating_sub(2))
    }

    /// Cubic Hermite interpolation between accepted steps.
    pub fn interpolate(&self, t: f64) -> Vec<Complex64> {
        if self.samples.len() == 1 {
            return self.samples[0].state.clone();
        }
        let i = self.bracket(t);
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        let h = b.t - a.t;
        let s = (t - a.t) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        (0..a.state.len())
            .map(|k| h00 * a.state[k] + h10 * h * a.deriv[k] + h01 * b.state[k] + h11 * h * b.deriv[k])
            .collect()
    }

    /// State at `t` by one Runge–Kutta step from the accepted sample on the
    /// side of `t` nearer the initial point; the step is shorter than an
    /// accepted step, so its error stays within the integration tolerance.
    /// Falls back to [`interpolate`](Self::interpolate) outside the range.
    pub fn evaluate(&self, t: f64) -> Vec<Complex64> {
        let (lo, hi) = self.t_range();
        let Some(rhs) = self.rhs.as_ref().filter(|_| (lo..=hi).contains(&t) && self.samples.len() > 1) else {
            return self.interpolate(t);
        };
        let i = self.bracket(t);
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        // march away from the initial point, as the integrator did
        let from = if a.t >= self.t0() { a } else { b };
        if from.t == t {
            return from.state.clone();
        }
        dp5::step(rhs, from.t, &from.state, &from.deriv, t - from.t, false).0
    }

    /// Time of the initial condition.
    pub fn t0(&self) -> f64 {
        self.samples[self.t0_index].t
    }

    /// Value of monitor `i` at the initial condition.
    pub fn monitor_initial(&self, i: usize) -> Complex64 {
        self.samples[self.t0_index].monitors[i]
    }

    /// `max_k |m(t_k) - m(t₀)|` for monitor `i`.
    pub fn monitor_abs_drift(&self, i: usize) -> f64 {
        let m0 = self.monitor_initial(i);
        self.samples.iter().map(|s| (s.monitors[i] - m0).norm()).fold(0.0, f64::max)
    }

    /// `max_k |m(t_k) - m(t₀)| / |m(t₀)|` for monitor `i`.
    pub fn monitor_drift(&self, i: usize) -> f64 {
        let m0 = self.samples[self.t0_index].monitors[i];
        let scale = m0.norm().max(1e-300);
        self.samples
            .iter()
            .map(|s| (s.monitors[i] - m0).norm() / scale)
            .fold(0.0, f64::max)
    }

    pub fn max_monitor_drift(&self) -> f64 {
        (0..self.monitor_names.len())
            .map(|i| self.monitor_drift(i))
            .fold(0.0, f64::max)
    }

    /// CSV: `t`, real and imaginary part of every component, then of every
    /// monitor. Floats carry 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for c in self.components.iter().chain(self.monitor_names.iter()) {
            let _ = write!(out, ",re_{c},im_{c}");
        }
        out.push('\n');
        for s in &self.samples {
            let _ = write!(out, "{:.16e}", s.t);
            for v in s.state.iter().chain(s.monitors.iter()) {
                let _ = write!(out, ",{:.16e},{:.16e}", v.re, v.im);
            }
            out.push('\n');
        }
        out
    }
}

/// Four amplitudes `a₁..a₄` under `da/dt = -i H(t) a`, initial state at
/// `span.t0`. When the parameters are PT-symmetric the trajectory monitors
/// the conserved quantity of the corresponding `c` variables.
pub fn integrate_four_level(
    params: &ModelParams,
    drive: &Drive,
    a0: &StateVector,
    span: impl Into<Span>,
    tol: f64,
) -> Result<Trajectory, OracleError> {
    params.validate()?;
    a0.require_basis(Basis::A)?;
    let (p, d) = (*params, *drive);
    let rhs: RhsFn = Arc::new(move |t, y, dy| {
        let h = hamiltonian_at(&p, &d, t);
        for i in 0..4 {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..4 {
                s += h[(i, j)] * y[j];
            }
            dy[i] = -I * s;
        }
    });
    let (names, monitors): (&[&str], MonitorFn) = if p.is_pt_symmetric() {
        (
            &["conserved"],
            Box::new(move |t, y| {
                let a = StateVector::new(Basis::A, [y[0], y[1], y[2], y[3]]);
                let c = to_b_basis(&a, t, &p).and_then(|b| to_c_basis(&b)).expect("basis chain").amps;
                let dc = c_derivative(&p, &d, t, &c);
                vec![conserved_quantity(c[0], c[1], dc[0], dc[1], p.kappa)]
            }),
        )
    } else {
        (&[], Box::new(|_, _| Vec::new()))
    };
    Trajectory::integrate(rhs, &a0.amps, span.into(), tol, &["a1", "a2", "a3", "a4"], names, monitors)
}

fn coupled_heun_rhs(q: impl Fn(f64) -> Complex64 + Send + Sync + 'static, kappa: f64) -> RhsFn {
    Arc::new(move |t, y, dy| {
        let qt = q(t);
        dy[0] = y[2];
        dy[1] = y[3];
        dy[2] = -qt * y[0] + 2.0 * kappa * y[3];
        dy[3] = -qt * y[1] - 2.0 * kappa * y[2];
    })
}

fn coupled_heun_trajectory(
    rhs: RhsFn,
    kappa: f64,
    c0: [Complex64; 2],
    c0_dot: [Complex64; 2],
    span: Span,
    tol: f64,
) -> Result<Trajectory, OracleError> {
    let y0 = [c0[0], c0[1], c0_dot[0], c0_dot[1]];
    Trajectory::integrate(
        rhs,
        &y0,
        span,
        tol,
        &["c1", "c2", "c1_dot", "c2_dot"],
        &["conserved"],
        Box::new(move |_, y| vec![conserved_quantity(y[0], y[1], y[2], y[3], kappa)]),
    )
}

/// `c̈₁ + Q c₁ = 2κ ċ₂`, `c̈₂ + Q c₂ = -2κ ċ₁` with the model potential
/// `Q(t) = η² - κ² + (Re Ω)² - i d(Re Ω)/dt`. State layout
/// `[c₁, c₂, ċ₁, ċ₂]`.
pub fn integrate_c_system(
    params: &ModelParams,
    drive: &Drive,
    c0: [Complex64; 2],
    c0_dot: [Complex64; 2],
    span: impl Into<Span>,
    tol: f64,
) -> Result<Trajectory, OracleError> {
    params.validate()?;
    if !params.is_pt_symmetric() {
        return Err(OracleError::NotPtSymmetric(params.delta_gamma()));
    }
    let (p, d) = (*params, *drive);
    let rhs = coupled_heun_rhs(move |t| potential(&p, &d, t), p.kappa);
    coupled_heun_trajectory(rhs, p.kappa, c0, c0_dot, span.into(), tol)
}

/// The coupled system of [`integrate_c_system`] for an arbitrary polynomial
/// potential and coupling.
pub fn integrate_coupled_heun(
    quartic: &QuarticCoeffs,
    kappa: f64,
    c0: [Complex64; 2],
    c0_dot: [Complex64; 2],
    span: impl Into<Span>,
    tol: f64,
) -> Result<Trajectory, OracleError> {
    let q = *quartic;
    let rhs = coupled_heun_rhs(move |t| q.eval_re(t), kappa);
    coupled_heun_trajectory(rhs, kappa, c0, c0_dot, span.into(), tol)
}

/// Fundamental pair of `ÿ + Q(t)y = 0` backed by an integrated trajectory.
/// Evaluation is on the real axis only; imaginary parts of the argument
/// are ignored.
#[derive(Clone, Debug)]
pub struct OdePair {
    quartic: QuarticCoeffs,
    trajectory: Trajectory,
}

impl OdePair {
    pub fn trajectory(&self) -> &Trajectory {
        &self.trajectory
    }

    /// Largest `|W(t) + 1|` over the accepted steps.
    pub fn wronskian_drift(&self) -> f64 {
        self.trajectory.monitor_drift(0)
    }
}

impl FundamentalPair for OdePair {
    fn regime(&self) -> Regime {
        Regime::GenericSeries
    }

    fn potential(&self) -> QuarticCoeffs {
        self.quartic
    }

    fn wronskian(&self) -> Complex64 {
        Complex64::new(-1.0, 0.0)
    }

    fn eval(&self, x: Complex64) -> PairPoint {
        let y = self.trajectory.evaluate(x.re);
        PairPoint {
            y1: y[0],
            dy1: y[1],
            y2: y[2],
            dy2: y[3],
        }
    }
}

/// `T₁, T₂` with `T₁(0) = 0, Ṫ₁(0) = 1, T₂(0) = 1, Ṫ₂(0) = 0` over
/// `[lo, hi]` (extended to contain 0).
pub fn integrate_fundamental_pair(
    quartic: &QuarticCoeffs,
    t_span: (f64, f64),
    tol: f64,
) -> Result<OdePair, OracleError> {
    let q = *quartic;
    let rhs: RhsFn = Arc::new(move |t, y, dy| {
        let qt = q.eval_re(t);
        dy[0] = y[1];
        dy[1] = -qt * y[0];
        dy[2] = y[3];
        dy[3] = -qt * y[2];
    });
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let span = Span::around(0.0, t_span.0.min(t_span.1).min(0.0), t_span.0.max(t_span.1).max(0.0));
    let trajectory = Trajectory::integrate(
        rhs,
        &[zero, one, one, zero],
        span,
        tol,
        &["T1", "T1_dot", "T2", "T2_dot"],
        &["wronskian"],
        Box::new(|_, y| vec![y[0] * y[3] - y[2] * y[1]]),
    )?;
    Ok(OdePair {
        quartic: q,
        trajectory,
    })
}
