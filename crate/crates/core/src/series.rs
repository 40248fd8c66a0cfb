//! Truncated complex power series.
//!
//! A [`TruncatedSeries`] stores the dense coefficients `c_0 ..= c_N` of a
//! power series in one named variable (`t` or `z`). `N` is the truncation
//! order: coefficients above it are unknown, not zero. Binary operations
//! keep the smaller truncation order of their operands, so every retained
//! coefficient of a result is exact.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default truncation order in powers of the expansion variable.
pub const DEFAULT_ORDER: usize = 60;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Name of the expansion variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Var {
    T,
    Z,
}

impl std::fmt::Display for Var {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Var::T => f.write_str("t"),
            Var::Z => f.write_str("z"),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SeriesError {
    #[error("variable mismatch: {0} vs {1}")]
    VarMismatch(Var, Var),
    #[error("malformed dump line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Result of evaluating a series at a point.
#[derive(Clone, Copy, Debug)]
pub struct SeriesValue {
    pub value: Complex64,
    /// Magnitude of the last retained term, `|c_N x^N|`.
    pub tail: f64,
    /// Set when `|x|` exceeds the series' declared validity radius.
    pub outside_radius: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSeries {
    var: Var,
    coeffs: Vec<Complex64>,
    radius: f64,
}

impl TruncatedSeries {
    /// The zero series with truncation order `order`.
    pub fn zero(var: Var, order: usize) -> Self {
        Self {
            var,
            coeffs: vec![ZERO; order + 1],
            radius: f64::INFINITY,
        }
    }

    /// Builds a series from coefficients `c_0, c_1, ...`; the truncation
    /// order is `coeffs.len() - 1`. An empty slice gives the order-0 zero.
    pub fn from_coeffs(var: Var, coeffs: Vec<Complex64>) -> Self {
        let coeffs = if coeffs.is_empty() { vec![ZERO] } else { coeffs };
        Self {
            var,
            coeffs,
            radius: f64::INFINITY,
        }
    }

    pub fn from_real(var: Var, coeffs: &[f64]) -> Self {
        Self::from_coeffs(var, coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// `value * x^power`, truncated at `order` (zero if `power > order`).
    pub fn monomial(var: Var, power: usize, value: Complex64, order: usize) -> Self {
        let mut s = Self::zero(var, order);
        if power <= order {
            s.coeffs[power] = value;
        }
        s
    }

    pub fn constant(var: Var, value: Complex64, order: usize) -> Self {
        Self::monomial(var, 0, value, order)
    }

    /// Declares the radius within which evaluation is trusted.
    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    pub fn var(&self) -> Var {
        self.var
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `x^k`; zero beyond the truncation order.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    pub fn set_coeff(&mut self, k: usize, value: Complex64) {
        if k < self.coeffs.len() {
            self.coeffs[k] = value;
        }
    }

    /// Drops coefficients above `order` (no-op if already lower).
    pub fn truncate(&self, order: usize) -> Self {
        let n = (order + 1).min(self.coeffs.len());
        Self {
            var: self.var,
            coeffs: self.coeffs[..n].to_vec(),
            radius: self.radius,
        }
    }

    /// Raises the truncation order by padding zeros. Only meaningful for
    /// series that are known to be polynomials.
    pub fn pad_to(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        if coeffs.len() < order + 1 {
            coeffs.resize(order + 1, ZERO);
        }
        Self {
            var: self.var,
            coeffs,
            radius: self.radius,
        }
    }

    fn check(&self, other: &Self) -> Result<(), SeriesError> {
        if self.var == other.var {
            Ok(())
        } else {
            Err(SeriesError::VarMismatch(self.var, other.var))
        }
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self, SeriesError> {
        self.check(other)?;
        let order = self.order().min(other.order());
        let coeffs = (0..=order)
            .map(|k| f(self.coeffs[k], other.coeffs[k]))
            .collect();
        Ok(Self {
            var: self.var,
            coeffs,
            radius: self.radius.min(other.radius),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            var: self.var,
            coeffs: self.coeffs.iter().map(|&c| c * factor).collect(),
            radius: self.radius,
        }
    }

    pub fn scale_re(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    /// Cauchy product truncated at the smaller order.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check(other)?;
        let order = self.order().min(other.order());
        let mut coeffs = vec![ZERO; order + 1];
        for (i, &a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a == ZERO {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate().take(order + 1 - i) {
                coeffs[i + j] += a * b;
            }
        }
        Ok(Self {
            var: self.var,
            coeffs,
            radius: self.radius.min(other.radius),
        })
    }

    /// Product with a polynomial given by its coefficients. The polynomial
    /// is exact, so the truncation order is kept.
    pub fn mul_poly(&self, poly: &[Complex64]) -> Self {
        let order = self.order();
        let mut coeffs = vec![ZERO; order + 1];
        for (i, &p) in poly.iter().enumerate() {
            if p == ZERO {
                continue;
            }
            for j in 0..=order.saturating_sub(i) {
                if i + j > order {
                    break;
                }
                coeffs[i + j] += p * self.coeffs[j];
            }
        }
        Self {
            var: self.var,
            coeffs,
            radius: self.radius,
        }
    }

    /// Multiplies by `x^k`; the truncation order rises by `k`.
    pub fn shift(&self, k: usize) -> Self {
        let mut coeffs = vec![ZERO; k];
        coeffs.extend_from_slice(&self.coeffs);
        Self {
            var: self.var,
            coeffs,
            radius: self.radius,
        }
    }

    /// Term-by-term derivative; the truncation order drops by one.
    pub fn differentiate(&self) -> Self {
        let coeffs = if self.coeffs.len() <= 1 {
            vec![ZERO]
        } else {
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect()
        };
        Self {
            var: self.var,
            coeffs,
            radius: self.radius,
        }
    }

    /// Antiderivative with zero constant term; the order rises by one.
    pub fn integrate(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(ZERO);
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c / (k as f64 + 1.0)),
        );
        Self {
            var: self.var,
            coeffs,
            radius: self.radius,
        }
    }

    /// Horner evaluation with a truncation-error estimate.
    pub fn evaluate(&self, x: Complex64) -> SeriesValue {
        let value = self
            .coeffs
            .iter()
            .rev()
            .fold(ZERO, |acc, &c| acc * x + c);
        let n = self.order();
        let tail = self.coeffs[n].norm() * x.norm().powi(n as i32);
        SeriesValue {
            value,
            tail,
            outside_radius: x.norm() > self.radius,
        }
    }

    /// Shorthand for `evaluate(x).value`.
    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.evaluate(x).value
    }

    pub fn eval_re(&self, x: f64) -> Complex64 {
        self.eval(Complex64::new(x, 0.0))
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Debug dump: one coefficient per line, `k re im`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            let _ = writeln!(out, "{k} {:.17e} {:.17e}", c.re, c.im);
        }
        out
    }

    /// Parses the [`dump`](Self::dump) format. Missing powers are zero.
    pub fn parse_dump(var: Var, text: &str) -> Result<Self, SeriesError> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| SeriesError::Parse {
                line: i + 1,
                msg: msg.to_string(),
            };
            let mut it = line.split_whitespace();
            let k: usize = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| err("bad power"))?;
            let re: f64 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| err("bad real part"))?;
            let im: f64 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| err("bad imaginary part"))?;
            if it.next().is_some() {
                return Err(err("trailing fields"));
            }
            entries.push((k, Complex64::new(re, im)));
        }
        let order = entries.iter().map(|e| e.0).max().unwrap_or(0);
        let mut s = Self::zero(var, order);
        for (k, c) in entries {
            s.coeffs[k] = c;
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn add_sub_scale() {
        let a = TruncatedSeries::from_real(Var::T, &[1.0, 1.0]);
        let b = TruncatedSeries::from_real(Var::T, &[1.0, -1.0]);
        let s = a.add(&b).unwrap();
        assert_eq!(s.coeffs(), &[c(2.0), c(0.0)]);
        assert!(a.scale(c(0.0)).coeffs().iter().all(|&x| x == ZERO));
        assert_eq!(a.add(&b).unwrap().sub(&b).unwrap(), a);
    }

    #[test]
    fn var_mismatch_is_an_error() {
        let a = TruncatedSeries::zero(Var::T, 3);
        let b = TruncatedSeries::zero(Var::Z, 3);
        assert_eq!(a.add(&b), Err(SeriesError::VarMismatch(Var::T, Var::Z)));
        assert!(a.mul(&b).is_err());
    }

    #[test]
    fn product_truncates_at_min_order() {
        let a = TruncatedSeries::from_real(Var::T, &[1.0, 1.0, 0.0]);
        let b = TruncatedSeries::from_real(Var::T, &[1.0, -1.0, 0.0, 0.0]);
        let p = a.mul(&b).unwrap();
        assert_eq!(p.order(), 2);
        assert_eq!(p.coeffs(), &[c(1.0), c(0.0), c(-1.0)]);
    }

    #[test]
    fn calculus() {
        let cube = TruncatedSeries::from_real(Var::T, &[0.0, 0.0, 0.0, 1.0 / 3.0]);
        assert_eq!(cube.differentiate().coeff(2), c(1.0));
        let sq = TruncatedSeries::from_real(Var::T, &[0.0, 0.0, 1.0]);
        assert!((sq.integrate().coeff(3) - c(1.0 / 3.0)).norm() < 1e-16);
    }

    #[test]
    fn evaluation() {
        let z = TruncatedSeries::zero(Var::T, 5);
        assert_eq!(z.eval(Complex64::new(3.0, 1.0)), ZERO);

        let n = 30;
        let geo = TruncatedSeries::from_real(Var::T, &vec![1.0; n + 1]);
        let v = geo.eval_re(0.5);
        assert!((v.re - (2.0 - 2f64.powi(-(n as i32)))).abs() < 1e-15);

        // exp(t) through t^20 at t = 1: tail 1/21! + ... < 1e-19
        let mut fact = 1.0;
        let coeffs: Vec<f64> = (0..=20)
            .map(|k| {
                if k > 0 {
                    fact *= k as f64;
                }
                1.0 / fact
            })
            .collect();
        let e = TruncatedSeries::from_real(Var::T, &coeffs).evaluate(c(1.0));
        assert!((e.value.re - std::f64::consts::E).abs() < 1e-15);
        assert!(e.tail < 1e-18);
    }

    #[test]
    fn radius_flag() {
        let s = TruncatedSeries::from_real(Var::T, &[1.0, 1.0]).with_radius(1.0);
        assert!(!s.evaluate(c(0.5)).outside_radius);
        assert!(s.evaluate(c(1.5)).outside_radius);
    }

    #[test]
    fn dump_parses_back() {
        let s = TruncatedSeries::from_coeffs(
            Var::Z,
            vec![Complex64::new(0.1, -2.0), ZERO, Complex64::new(1e-300, 7.0)],
        );
        let back = TruncatedSeries::parse_dump(Var::Z, &s.dump()).unwrap();
        assert_eq!(back, s);
        assert!(matches!(
            TruncatedSeries::parse_dump(Var::T, "0 1.0\n"),
            Err(SeriesError::Parse { line: 1, .. })
        ));
    }

    fn arb_series(order: usize) -> impl Strategy<Value = TruncatedSeries> {
        proptest::collection::vec((-4i32..=4, -4i32..=4), order + 1).prop_map(|v| {
            TruncatedSeries::from_coeffs(
                Var::T,
                v.into_iter()
                    .map(|(a, b)| Complex64::new(a as f64, b as f64))
                    .collect(),
            )
        })
    }

    proptest! {
        // small integer coefficients keep every product exact in f64
        #[test]
        fn ring_axioms(a in arb_series(8), b in arb_series(8), c in arb_series(8)) {
            let ab_c = a.mul(&b).unwrap().mul(&c).unwrap();
            let a_bc = a.mul(&b.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(ab_c, a_bc);
            let lhs = a.mul(&b.add(&c).unwrap()).unwrap();
            let rhs = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn leibniz(a in arb_series(10), b in arb_series(10)) {
            let lhs = a.mul(&b).unwrap().differentiate();
            let rhs = a.differentiate().mul(&b).unwrap()
                .add(&a.mul(&b.differentiate()).unwrap()).unwrap();
            prop_assert_eq!(lhs.truncate(rhs.order()), rhs);
        }

        #[test]
        fn derivative_inverts_antiderivative(a in arb_series(12)) {
            let back = a.integrate().differentiate();
            for k in 0..=a.order() {
                prop_assert!((back.coeff(k) - a.coeff(k)).norm() < 1e-15);
            }
        }
    }
}
