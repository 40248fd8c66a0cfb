//! Dormand–Prince 5(4) with FSAL and a standard step-size controller.
//!
//! Complex states are measured through their real and imaginary parts:
//! the error norm is the RMS over `2n` real components of
//! `err / (tol + tol·max(|y|, |y_new|))`.

use std::sync::Arc;

use num_complex::Complex64;

use super::OracleError;

pub(crate) type RhsFn = Arc<dyn Fn(f64, &[Complex64], &mut [Complex64]) + Send + Sync>;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const MAX_STEPS: usize = 5_000_000;

/// One accepted point of the solution.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: Vec<Complex64>,
    /// Right-hand side at `(t, state)`.
    pub deriv: Vec<Complex64>,
    pub monitors: Vec<Complex64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize)]
pub struct IntegratorStats {
    pub steps: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    pub tol: f64,
}

impl IntegratorStats {
    pub(crate) fn merge(&mut self, other: &Self) {
        self.steps += other.steps;
        self.rejected += other.rejected;
        self.rhs_evals += other.rhs_evals;
    }
}

fn axpy(y: &[Complex64], h: f64, terms: &[(f64, &[Complex64])], out: &mut [Complex64]) {
    for i in 0..y.len() {
        let mut s = Complex64::new(0.0, 0.0);
        for &(c, k) in terms {
            if c != 0.0 {
                s += c * k[i];
            }
        }
        out[i] = y[i] + h * s;
    }
}

/// One DP5 step of size `h` from `(t, y)` with `k1 = f(t, y)`. Returns the
/// fifth-order solution and, when `want_err`, the embedded error vector
/// together with `f(t + h, y_new)`.
pub(crate) fn step(
    rhs: &RhsFn,
    t: f64,
    y: &[Complex64],
    k1: &[Complex64],
    h: f64,
    want_err: bool,
) -> (Vec<Complex64>, Option<(Vec<Complex64>, Vec<Complex64>)>) {
    let n = y.len();
    let z = Complex64::new(0.0, 0.0);
    let mut tmp = vec![z; n];
    let mut k2 = vec![z; n];
    let mut k3 = vec![z; n];
    let mut k4 = vec![z; n];
    let mut k5 = vec![z; n];
    let mut k6 = vec![z; n];
    axpy(y, h, &[(A21, k1)], &mut tmp);
    rhs(t + C2 * h, &tmp, &mut k2);
    axpy(y, h, &[(A31, k1), (A32, &k2)], &mut tmp);
    rhs(t + C3 * h, &tmp, &mut k3);
    axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)], &mut tmp);
    rhs(t + C4 * h, &tmp, &mut k4);
    axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)], &mut tmp);
    rhs(t + C5 * h, &tmp, &mut k5);
    axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], &mut tmp);
    rhs(t + h, &tmp, &mut k6);
    let mut y_new = vec![z; n];
    axpy(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], &mut y_new);
    if !want_err {
        return (y_new, None);
    }
    let mut k7 = vec![z; n];
    rhs(t + h, &y_new, &mut k7);
    let err = (0..n)
        .map(|i| h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]))
        .collect();
    (y_new, Some((err, k7)))
}

fn err_norm(err: &[Complex64], y: &[Complex64], y_new: &[Complex64], tol: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..err.len() {
        let sc_re = tol + tol * y[i].re.abs().max(y_new[i].re.abs());
        let sc_im = tol + tol * y[i].im.abs().max(y_new[i].im.abs());
        s += (err[i].re / sc_re).powi(2) + (err[i].im / sc_im).powi(2);
    }
    (s / (2 * err.len()) as f64).sqrt()
}

fn scaled_norm(v: &[Complex64], y: &[Complex64], tol: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..v.len() {
        let sc_re = tol + tol * y[i].re.abs();
        let sc_im = tol + tol * y[i].im.abs();
        s += (v[i].re / sc_re).powi(2) + (v[i].im / sc_im).powi(2);
    }
    (s / (2 * v.len()) as f64).sqrt()
}

/// Initial step following Hairer, Nørsett & Wanner.
fn initial_step(rhs: &RhsFn, t0: f64, y0: &[Complex64], f0: &[Complex64], dir: f64, tol: f64, span: f64) -> f64 {
    let d0 = scaled_norm(y0, y0, tol);
    let d1 = scaled_norm(f0, y0, tol);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1: Vec<Complex64> = y0.iter().zip(f0).map(|(y, f)| y + dir * h0 * f).collect();
    let mut f1 = vec![Complex64::new(0.0, 0.0); y0.len()];
    rhs(t0 + dir * h0, &y1, &mut f1);
    let df: Vec<Complex64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = scaled_norm(&df, y0, tol) / h0;
    let m = d1.max(d2);
    let h1 = if m <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / m).powf(0.2) };
    (100.0 * h0).min(h1).min(span)
}

/// Integrates from `t0` to `t_end` (either direction). Samples are in
/// integration order, starting with `t0`; monitors are left empty.
pub(crate) fn solve(
    rhs: &RhsFn,
    t0: f64,
    y0: &[Complex64],
    t_end: f64,
    tol: f64,
) -> Result<(Vec<Sample>, IntegratorStats), OracleError> {
    let n = y0.len();
    let mut stats = IntegratorStats {
        tol,
        ..Default::default()
    };
    let mut f0 = vec![Complex64::new(0.0, 0.0); n];
    rhs(t0, y0, &mut f0);
    stats.rhs_evals += 1;
    let mut samples = vec![Sample {
        t: t0,
        state: y0.to_vec(),
        deriv: f0.clone(),
        monitors: Vec::new(),
    }];
    let span = (t_end - t0).abs();
    if span == 0.0 {
        return Ok((samples, stats));
    }
    let dir = (t_end - t0).signum();
    let mut h = initial_step(rhs, t0, y0, &f0, dir, tol, span);
    stats.rhs_evals += 1;
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = f0;
    let mut last_rejected = false;
    loop {
        let remaining = (t_end - t).abs();
        if remaining <= 1e-14 * t_end.abs().max(1.0) {
            break;
        }
        let last = h >= remaining;
        let hs = if last { remaining } else { h };
        if hs < 1e-13 * t.abs().max(1.0) {
            return Err(OracleError::StepUnderflow { t, h: hs });
        }
        if stats.steps + stats.rejected >= MAX_STEPS {
            return Err(OracleError::TooManySteps { t });
        }
        let (y_new, extra) = step(rhs, t, &y, &k1, dir * hs, true);
        let (err, k7) = extra.expect("error requested");
        stats.rhs_evals += 6;
        let en = err_norm(&err, &y, &y_new, tol);
        if !en.is_finite() {
            return Err(OracleError::NonFinite { t });
        }
        if en <= 1.0 {
            t = if last { t_end } else { t + dir * hs };
            y = y_new;
            k1 = k7;
            stats.steps += 1;
            samples.push(Sample {
                t,
                state: y.clone(),
                deriv: k1.clone(),
                monitors: Vec::new(),
            });
            let mut fac = SAFETY * en.max(1e-10).powf(-0.2);
            if last_rejected {
                fac = fac.min(1.0);
            }
            h = hs * fac.clamp(FAC_MIN, FAC_MAX);
            last_rejected = false;
        } else {
            stats.rejected += 1;
            h = hs * (SAFETY * en.powf(-0.2)).max(FAC_MIN);
            last_rejected = true;
        }
    }
    Ok((samples, stats))
}
