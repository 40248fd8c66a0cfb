//! Special functions for the two asymptotic regimes and the generic
//! fundamental pair of `ÿ + Q(t) y = 0`.

mod airy;
mod hypergeometric;

pub use airy::{airy_pair, AiryValues, SWITCH_RADIUS};
pub use hypergeometric::{hyp1f2, hyp2f3, hyp_pfq, HypValue, MAX_TERMS};
pub(crate) use hypergeometric::{f12_unit, f23};

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::QuarticCoeffs;
use crate::series::{TruncatedSeries, Var};

#[derive(Debug, Error, PartialEq)]
pub enum SpecfunError {
    #[error("denominator parameter {0} is a non-positive integer")]
    Pole(Complex64),
    #[error("beta must be non-zero")]
    ZeroBeta,
}

/// Which equation a fundamental pair (and the integral triples built on
/// it) belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `y'' - z y = 0` in the variable `z`.
    Airy,
    /// `ÿ + β² t⁴ y = 0`.
    QuarticBessel,
    /// `ÿ + Q(t) y = 0` for a general quartic, by power series or ODE.
    GenericSeries,
}

impl Regime {
    pub fn var(self) -> Var {
        match self {
            Regime::Airy => Var::Z,
            _ => Var::T,
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Airy => "airy",
            Regime::QuarticBessel => "quartic-bessel",
            Regime::GenericSeries => "generic",
        })
    }
}

/// Values of a fundamental pair and its derivatives at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairPoint {
    pub y1: Complex64,
    pub dy1: Complex64,
    pub y2: Complex64,
    pub dy2: Complex64,
}

impl PairPoint {
    pub fn wronskian(&self) -> Complex64 {
        self.y1 * self.dy2 - self.y2 * self.dy1
    }

    /// `y₁ y₂`.
    pub fn prod(&self) -> Complex64 {
        self.y1 * self.y2
    }

    /// `y₁ ẏ₂ + y₂ ẏ₁`.
    pub fn sym(&self) -> Complex64 {
        self.y1 * self.dy2 + self.y2 * self.dy1
    }

    /// `ẏ₁ ẏ₂`.
    pub fn dprod(&self) -> Complex64 {
        self.dy1 * self.dy2
    }

    /// The linear combination `a y₁ + b y₂` and its derivative.
    pub fn combine(&self, a: Complex64, b: Complex64) -> (Complex64, Complex64) {
        (a * self.y1 + b * self.y2, a * self.dy1 + b * self.dy2)
    }
}

/// Two independent solutions of `y'' + Q(x) y = 0` with constant Wronskian.
pub trait FundamentalPair: Send + Sync {
    fn regime(&self) -> Regime;
    /// Potential `Q` in the pair's own variable.
    fn potential(&self) -> QuarticCoeffs;
    fn wronskian(&self) -> Complex64;
    fn eval(&self, x: Complex64) -> PairPoint;

    fn var(&self) -> Var {
        self.regime().var()
    }

    fn eval_re(&self, x: f64) -> PairPoint {
        self.eval(Complex64::new(x, 0.0))
    }
}

/// `Γ(x)` for real arguments.
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Bessel function of the first kind by its defining series.
pub fn bessel_j(nu: f64, x: Complex64) -> Complex64 {
    let half = x * 0.5;
    let mut term = half.powf(nu) / gamma(nu + 1.0);
    let mut sum = term;
    let q = -half * half;
    for n in 1..200 {
        let nf = n as f64;
        term *= q / (nf * (nu + nf));
        sum += term;
        if term.norm() < 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}

/// `y₁ = t ₁F₂(1;1,7/6;-β²t⁶/36)`, `y₂ = ₁F₂(1;1,5/6;-β²t⁶/36)`, the
/// fundamental pair of `ÿ + β² t⁴ y = 0` with `y₁(0) = ẏ₂(0) = 0`,
/// `ẏ₁(0) = y₂(0) = 1` and Wronskian `-1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuarticPair {
    beta: f64,
}

pub fn quartic_pair(beta: f64) -> Result<QuarticPair, SpecfunError> {
    if beta == 0.0 || !beta.is_finite() {
        return Err(SpecfunError::ZeroBeta);
    }
    Ok(QuarticPair { beta })
}

impl QuarticPair {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `Γ(7/6) (β/6)^{-1/6} √t J_{1/6}(βt³/3)`, the Bessel form of `y₁`
    /// for `t > 0`.
    pub fn y1_bessel_form(&self, t: f64) -> f64 {
        let b = self.beta;
        (gamma(7.0 / 6.0)
            * (b / 6.0).powf(-1.0 / 6.0)
            * t.sqrt()
            * bessel_j(1.0 / 6.0, Complex64::new(b * t.powi(3) / 3.0, 0.0)))
        .re
    }

    /// `Γ(5/6) (β/6)^{1/6} √t J_{-1/6}(βt³/3)`, the Bessel form of `y₂`.
    pub fn y2_bessel_form(&self, t: f64) -> f64 {
        let b = self.beta;
        (gamma(5.0 / 6.0)
            * (b / 6.0).powf(1.0 / 6.0)
            * t.sqrt()
            * bessel_j(-1.0 / 6.0, Complex64::new(b * t.powi(3) / 3.0, 0.0)))
        .re
    }
}

impl FundamentalPair for QuarticPair {
    fn regime(&self) -> Regime {
        Regime::QuarticBessel
    }

    fn potential(&self) -> QuarticCoeffs {
        QuarticCoeffs::pure_quartic(self.beta)
    }

    fn wronskian(&self) -> Complex64 {
        Complex64::new(-1.0, 0.0)
    }

    fn eval(&self, t: Complex64) -> PairPoint {
        let b2 = self.beta * self.beta;
        let t5 = t.powi(5);
        let arg = -b2 * t5 * t / 36.0;
        PairPoint {
            y1: t * f12_unit(7.0 / 6.0, arg),
            dy1: f12_unit(1.0 / 6.0, arg),
            y2: f12_unit(5.0 / 6.0, arg),
            dy2: -(b2 * t5 / 5.0) * f12_unit(11.0 / 6.0, arg),
        }
    }
}

/// `y₁ = Ai(z)`, `y₂ = Bi(z)` for `y'' - z y = 0`; Wronskian `1/π`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AiryPair;

impl FundamentalPair for AiryPair {
    fn regime(&self) -> Regime {
        Regime::Airy
    }

    fn potential(&self) -> QuarticCoeffs {
        QuarticCoeffs::from_re([0.0, -1.0, 0.0, 0.0, 0.0])
    }

    fn wronskian(&self) -> Complex64 {
        Complex64::new(1.0 / PI, 0.0)
    }

    fn eval(&self, z: Complex64) -> PairPoint {
        let v = airy_pair(z);
        PairPoint {
            y1: v.ai,
            dy1: v.ai_prime,
            y2: v.bi,
            dy2: v.bi_prime,
        }
    }
}

/// Power-series fundamental pair of `ÿ + Q(t) y = 0` about `t = 0`,
/// normalized like [`QuarticPair`]: `y₁(0) = 0, ẏ₁(0) = 1, y₂(0) = 1,
/// ẏ₂(0) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesPair {
    quartic: QuarticCoeffs,
    y1: TruncatedSeries,
    y2: TruncatedSeries,
    dy1: TruncatedSeries,
    dy2: TruncatedSeries,
}

impl SeriesPair {
    pub fn new(quartic: QuarticCoeffs, order: usize) -> Self {
        let solve = |y0: f64, dy0: f64| {
            let order = order.max(2);
            let mut c = vec![Complex64::new(0.0, 0.0); order + 1];
            c[0] = Complex64::new(y0, 0.0);
            c[1] = Complex64::new(dy0, 0.0);
            for k in 0..=order - 2 {
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..=k.min(4) {
                    s += quartic.a[j] * c[k - j];
                }
                c[k + 2] = -s / ((k + 1) as f64 * (k + 2) as f64);
            }
            TruncatedSeries::from_coeffs(Var::T, c)
        };
        let y1 = solve(0.0, 1.0);
        let y2 = solve(1.0, 0.0);
        Self {
            quartic,
            dy1: y1.differentiate(),
            dy2: y2.differentiate(),
            y1,
            y2,
        }
    }

    pub fn y1(&self) -> &TruncatedSeries {
        &self.y1
    }

    pub fn y2(&self) -> &TruncatedSeries {
        &self.y2
    }
}

impl FundamentalPair for SeriesPair {
    fn regime(&self) -> Regime {
        Regime::GenericSeries
    }

    fn potential(&self) -> QuarticCoeffs {
        self.quartic
    }

    fn wronskian(&self) -> Complex64 {
        Complex64::new(-1.0, 0.0)
    }

    fn eval(&self, t: Complex64) -> PairPoint {
        PairPoint {
            y1: self.y1.eval(t),
            dy1: self.dy1.eval(t),
            y2: self.y2.eval(t),
            dy2: self.dy2.eval(t),
        }
    }
}
