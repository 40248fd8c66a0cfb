//! Indefinite integrals of products of solutions of `ÿ + Q(t) y = 0`.
//!
//! For a fundamental pair `y₁, y₂` and a weight `tⁿ`,
//!
//! ```text
//! ∫ tⁿ y₁y₂ dt = Pₙ y₁y₂ + (Qₙ/2)(y₁ẏ₂ + y₂ẏ₁) + Rₙ ẏ₁ẏ₂
//! ```
//!
//! with `Qₙ = -Ṙₙ`, `Pₙ = ½R̈ₙ + Q(t)Rₙ` and `R⃛ₙ + 4QṘₙ + 2Q̇Rₙ = 2tⁿ`.
//! The third-order equation fixes `Rₙ` only up to homogeneous solutions
//! (products `yᵢyⱼ`); those shift the antiderivative by a constant. The
//! generic path picks `R(0) = Ṙ(0) = R̈(0) = 0`.
//!
//! The same representation with `Lₙ, Mₙ, Nₙ` gives `∫ tⁿ ẏ₁ẏ₂ dt`.

mod airy;
mod bessel;
mod recursive;

pub use airy::{airy_closed_form_q, airy_closed_form_r, rn_airy, rn_airy_exact, AiryTriple, RationalPoly};
pub use bessel::{bessel_closed_form, bessel_recursion_step, bessel_seed, rn_bessel};
pub use recursive::{explicit_r3_r6, rn_general_recursive, RnRecursionAux};

use std::fmt::Write as _;

use num_complex::Complex64;
use thiserror::Error;

use crate::model::QuarticCoeffs;
use crate::series::{SeriesError, TruncatedSeries, Var};
use crate::specfun::{FundamentalPair, PairPoint, Regime, SpecfunError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Error, PartialEq)]
pub enum HeunError {
    #[error("weight n = {n} needs truncation order at least {needed}, have {order}")]
    Capacity { n: usize, needed: usize, order: usize },
    #[error("triple ({triple}) and pair ({pair}) solve different equations")]
    RegimeMismatch { triple: Regime, pair: Regime },
    #[error("no triple available for n = {0}")]
    MissingTriple(usize),
    #[error("leading coefficient A4 must be non-zero")]
    ZeroA4,
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// `Pₙ, Qₙ, Rₙ` for one weight `tⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegralCoeffTriple {
    pub n: usize,
    pub regime: Regime,
    /// Potential of the equation the triple belongs to, in its own variable.
    pub potential: QuarticCoeffs,
    pub p: TruncatedSeries,
    pub q: TruncatedSeries,
    pub r: TruncatedSeries,
}

impl IntegralCoeffTriple {
    /// Completes `R` with `Q = -Ṙ` and `P = ½R̈ + Q(t)R`. Two orders of `R`
    /// are consumed by the derivatives, so the result has order
    /// `r.order() - 2`.
    pub fn from_r(n: usize, regime: Regime, potential: QuarticCoeffs, r: TruncatedSeries) -> Self {
        let order = r.order().saturating_sub(2);
        let dr = r.differentiate();
        let q = dr.scale_re(-1.0).truncate(order);
        let p = dr
            .differentiate()
            .scale_re(0.5)
            .add(&r.mul_poly(&potential.a).truncate(order))
            .expect("same variable")
            .truncate(order);
        Self {
            n,
            regime,
            potential,
            p,
            q,
            r: r.truncate(order),
        }
    }

    pub fn with_regime(mut self, regime: Regime) -> Self {
        self.regime = regime;
        self
    }

    pub fn var(&self) -> Var {
        self.r.var()
    }

    pub fn order(&self) -> usize {
        self.r.order()
    }

    /// `(P, Q, R)` at `x`.
    pub fn eval(&self, x: Complex64) -> (Complex64, Complex64, Complex64) {
        (self.p.eval(x), self.q.eval(x), self.r.eval(x))
    }

    /// `P y₁y₂ + (Q/2)(y₁ẏ₂ + y₂ẏ₁) + R ẏ₁ẏ₂` from pair values at `x`.
    pub fn combine(&self, x: Complex64, v: &PairPoint) -> Complex64 {
        let (p, q, r) = self.eval(x);
        p * v.prod() + 0.5 * q * v.sym() + r * v.dprod()
    }

    /// Coefficients of `R⃛ + 4QṘ + 2Q̇R - 2tⁿ`, exact through order
    /// `order() - 1`.
    pub fn ode_residual(&self) -> TruncatedSeries {
        let dq: Vec<Complex64> = (1..5).map(|k| self.potential.a[k] * k as f64).collect();
        let d1 = self.r.differentiate();
        let d3 = d1.differentiate().differentiate();
        let top = d3.order();
        let mut res = d3
            .add(&d1.mul_poly(&self.potential.a).scale_re(4.0).truncate(top))
            .and_then(|s| s.add(&self.r.mul_poly(&dq).scale_re(2.0).truncate(top)))
            .expect("same variable");
        if self.n <= top {
            let c = res.coeff(self.n);
            res.set_coeff(self.n, c - 2.0);
        }
        res
    }

    /// Largest coefficient of `Q + Ṙ` and of `P - ½R̈ - Q(t)R`, over the
    /// orders where both sides are exact.
    pub fn invariant_defects(&self) -> (f64, f64) {
        let top = self.order().saturating_sub(2);
        let dr = self.r.differentiate();
        let dq = self.q.add(&dr).expect("same variable").truncate(top).max_abs();
        let pp = dr
            .differentiate()
            .scale_re(0.5)
            .add(&self.r.mul_poly(&self.potential.a))
            .expect("same variable")
            .truncate(top);
        let dp = self.p.truncate(top).sub(&pp).expect("same variable").max_abs();
        (dq, dp)
    }

    /// Text dump of the three series, each headed by a `#` line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# n {} regime {} var {}", self.n, self.regime, self.var());
        for (name, s) in [("P", &self.p), ("Q", &self.q), ("R", &self.r)] {
            let _ = writeln!(out, "# {name}");
            out.push_str(&s.dump());
        }
        out
    }
}

/// `Lₙ, Mₙ, Nₙ`: `∫ tⁿ ẏ₁ẏ₂ dt = L y₁y₂ + (M/2)(y₁ẏ₂ + y₂ẏ₁) + N ẏ₁ẏ₂`.
#[derive(Clone, Debug, PartialEq)]
pub struct LmnTriple {
    pub n: usize,
    pub l: TruncatedSeries,
    pub m: TruncatedSeries,
    pub n_coef: TruncatedSeries,
}

impl LmnTriple {
    pub fn combine(&self, x: Complex64, v: &PairPoint) -> Complex64 {
        self.l.eval(x) * v.prod() + 0.5 * self.m.eval(x) * v.sym() + self.n_coef.eval(x) * v.dprod()
    }
}

fn check_pair(
    regime: Regime,
    var: Var,
    potential: &QuarticCoeffs,
    pair: &dyn FundamentalPair,
) -> Result<(), HeunError> {
    let other = pair.potential();
    let scale = potential.a.iter().map(|a| a.norm()).fold(1.0, f64::max);
    let same_q = potential
        .a
        .iter()
        .zip(other.a.iter())
        .all(|(a, b)| (a - b).norm() <= 1e-12 * scale);
    if var != pair.var() || !same_q {
        return Err(HeunError::RegimeMismatch {
            triple: regime,
            pair: pair.regime(),
        });
    }
    Ok(())
}

/// IVP-normalized particular solution `Rₙ` of the third-order equation for
/// a general quartic, with `Pₙ, Qₙ` from the invariants. The result has
/// truncation order `order`.
pub fn rn_series(quartic: &QuarticCoeffs, n: usize, order: usize) -> Result<IntegralCoeffTriple, HeunError> {
    if n + 6 > order {
        return Err(HeunError::Capacity {
            n,
            needed: n + 6,
            order,
        });
    }
    let top = order + 2;
    let mut r = vec![ZERO; top + 1];
    let a = &quartic.a;
    // coefficient of t^m: (m+1)(m+2)(m+3) r_{m+3} + Σ_j A_j (4m + 4 - 2j) r_{m+1-j} = 2δ_{mn}
    for m in 0..=top - 3 {
        let mut s = if m == n { Complex64::new(2.0, 0.0) } else { ZERO };
        for (j, &aj) in a.iter().enumerate() {
            if j > m + 1 || aj == ZERO {
                continue;
            }
            s -= aj * (4.0 * m as f64 + 4.0 - 2.0 * j as f64) * r[m + 1 - j];
        }
        r[m + 3] = s / ((m + 1) as f64 * (m + 2) as f64 * (m + 3) as f64);
    }
    Ok(IntegralCoeffTriple::from_r(
        n,
        Regime::GenericSeries,
        *quartic,
        TruncatedSeries::from_coeffs(Var::T, r),
    ))
}

/// `rn_series` for `n = 0 ..= n_max`.
pub fn rn_series_table(
    quartic: &QuarticCoeffs,
    n_max: usize,
    order: usize,
) -> Result<Vec<IntegralCoeffTriple>, HeunError> {
    (0..=n_max).map(|n| rn_series(quartic, n, order)).collect()
}

fn triple_at(triples: &[IntegralCoeffTriple], k: usize) -> Result<&IntegralCoeffTriple, HeunError> {
    triples
        .get(k)
        .filter(|t| t.n == k)
        .ok_or(HeunError::MissingTriple(k))
}

/// `Lₙ, Mₙ, Nₙ` from the triples `triples[k]` (weight `k`), which must cover
/// every `n + k` with `A_k ≠ 0` and `n - 2` when `n ≥ 2`.
pub fn lmn(quartic: &QuarticCoeffs, n: usize, triples: &[IntegralCoeffTriple]) -> Result<LmnTriple, HeunError> {
    let mut used = Vec::new();
    for (k, &ak) in quartic.a.iter().enumerate() {
        if ak != ZERO {
            used.push((ak, triple_at(triples, n + k)?));
        }
    }
    let lower = if n >= 2 { Some(triple_at(triples, n - 2)?) } else { None };
    let base = triple_at(triples, n).or_else(|_| used.first().map(|u| u.1).ok_or(HeunError::MissingTriple(n)))?;
    let var = base.var();
    let order = used
        .iter()
        .map(|u| u.1.order())
        .chain(lower.map(|t| t.order()))
        .min()
        .unwrap_or(base.order());
    let mut l = TruncatedSeries::zero(var, order);
    let mut m = TruncatedSeries::zero(var, order);
    let mut nn = TruncatedSeries::zero(var, order);
    let acc = |dst: &mut TruncatedSeries, s: &TruncatedSeries, f: Complex64| {
        *dst = dst.add(&s.truncate(order).scale(f)).expect("same variable");
    };
    for (ak, t) in &used {
        acc(&mut l, &t.p, *ak);
        acc(&mut m, &t.q, *ak);
        acc(&mut nn, &t.r, *ak);
    }
    if let Some(t) = lower {
        let f = Complex64::new((n * (n - 1)) as f64 / 2.0, 0.0);
        acc(&mut l, &t.p, f);
        acc(&mut m, &t.q, f);
        acc(&mut nn, &t.r, f);
    }
    if n >= 1 && n - 1 <= order {
        let c = l.coeff(n - 1);
        l.set_coeff(n - 1, c - n as f64 / 2.0);
    }
    if n <= order {
        let c = m.coeff(n);
        m.set_coeff(n, c + 1.0);
    }
    Ok(LmnTriple { n, l, m, n_coef: nn })
}

/// `∫ tⁿ y₁y₂ dt` (indefinite) at `x` from the triple.
pub fn antiderivative_y1y2(
    triple: &IntegralCoeffTriple,
    pair: &dyn FundamentalPair,
    x: Complex64,
) -> Result<Complex64, HeunError> {
    check_pair(triple.regime, triple.var(), &triple.potential, pair)?;
    Ok(triple.combine(x, &pair.eval(x)))
}

/// `∫ tⁿ ẏ₁ẏ₂ dt` (indefinite) at `x` from the L/M/N triple.
pub fn antiderivative_dy1dy2(
    lmn: &LmnTriple,
    potential: &QuarticCoeffs,
    regime: Regime,
    pair: &dyn FundamentalPair,
    x: Complex64,
) -> Result<Complex64, HeunError> {
    check_pair(regime, lmn.l.var(), potential, pair)?;
    Ok(lmn.combine(x, &pair.eval(x)))
}

/// `∫_{x0}^{x1} tⁿ y₁ẏ₂ dt` via
/// `∫ tⁿ y₁ẏ₂ = ½(tⁿ y₁y₂ + W tⁿ⁺¹/(n+1) - n ∫ tⁿ⁻¹ y₁y₂)`.
/// `prev` is the triple of weight `n - 1` (unused for `n = 0`).
pub fn integral_y1_dy2(
    n: usize,
    prev: Option<&IntegralCoeffTriple>,
    pair: &dyn FundamentalPair,
    x0: Complex64,
    x1: Complex64,
) -> Result<Complex64, HeunError> {
    let w = pair.wronskian();
    let f = |x: Complex64| -> Result<Complex64, HeunError> {
        let v = pair.eval(x);
        let xn = x.powu(n as u32);
        let mut s = xn * v.prod() + w * xn * x / (n as f64 + 1.0);
        if n > 0 {
            let t = prev.filter(|t| t.n == n - 1).ok_or(HeunError::MissingTriple(n - 1))?;
            s -= n as f64 * antiderivative_y1y2(t, pair, x)?;
        }
        Ok(0.5 * s)
    };
    Ok(f(x1)? - f(x0)?)
}

/// The two sum-rule residuals `Σ_k k A_k R_{k-1} - 1` and
/// `Σ_k (k+2) A_k R_k - t` for triples of weights `0..=4`. They vanish only
/// for one particular choice of `R₀..R₄`; for other normalizations they are
/// homogeneous solutions of the third-order equation.
pub fn sum_rule_residuals(
    quartic: &QuarticCoeffs,
    triples: &[IntegralCoeffTriple],
) -> Result<(TruncatedSeries, TruncatedSeries), HeunError> {
    let t0 = triple_at(triples, 0)?;
    let order = t0.order();
    let var = t0.var();
    let mut s1 = TruncatedSeries::constant(var, Complex64::new(-1.0, 0.0), order);
    let mut s2 = TruncatedSeries::monomial(var, 1, Complex64::new(-1.0, 0.0), order);
    for (k, &ak) in quartic.a.iter().enumerate() {
        if ak == ZERO {
            continue;
        }
        if k >= 1 {
            let t = triple_at(triples, k - 1)?;
            s1 = s1.add(&t.r.scale(ak * k as f64))?;
        }
        let t = triple_at(triples, k)?;
        s2 = s2.add(&t.r.scale(ak * (k + 2) as f64))?;
    }
    Ok((s1, s2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{quartic_pair, SeriesPair};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn generic() -> QuarticCoeffs {
        QuarticCoeffs::new([c(1.0), Complex64::new(0.0, -2.0), c(2.0), c(0.0), c(1.0)])
    }

    #[test]
    fn pure_quartic_openings() {
        let b: f64 = 1.3;
        let q = QuarticCoeffs::pure_quartic(b);
        let r0 = rn_series(&q, 0, 40).unwrap();
        assert!((r0.r.coeff(3) - 1.0 / 3.0).norm() < 1e-15);
        assert!((r0.r.coeff(9) + 5.0 / 378.0 * b * b).norm() < 1e-15);
        let r2 = rn_series(&q, 2, 40).unwrap();
        assert!((r2.r.coeff(5) - 1.0 / 30.0).norm() < 1e-15);
        assert!((r2.r.coeff(11) + 7.0 / 7425.0 * b * b).norm() < 1e-15);
    }

    #[test]
    fn capacity_is_checked() {
        assert!(matches!(
            rn_series(&generic(), 10, 15),
            Err(HeunError::Capacity { n: 10, needed: 16, order: 15 })
        ));
    }

    #[test]
    fn series_solves_third_order_equation() {
        for n in 0..8 {
            let t = rn_series(&generic(), n, 40).unwrap();
            assert!(t.ode_residual().truncate(37).max_abs() < 1e-13, "n {n}");
            let (dq, dp) = t.invariant_defects();
            assert!(dq < 1e-14 && dp < 1e-13);
            assert_eq!(t.r.coeff(0), ZERO);
        }
    }

    #[test]
    fn antiderivative_derivative_generic() {
        let q = generic();
        let pair = SeriesPair::new(q, 80);
        for n in 0..5 {
            let t = rn_series(&q, n, 60).unwrap();
            for i in 0..=10 {
                let x = -0.8 + 0.16 * i as f64;
                let h = 1e-4;
                let d = (antiderivative_y1y2(&t, &pair, c(x + h)).unwrap()
                    - antiderivative_y1y2(&t, &pair, c(x - h)).unwrap())
                    / (2.0 * h);
                let want = c(x).powu(n as u32) * pair.eval_re(x).prod();
                assert!((d - want).norm() < 1e-7, "n {n} x {x}: {d} vs {want}");
            }
        }
    }

    #[test]
    fn lmn_derivative_identity() {
        let q = generic();
        let pair = SeriesPair::new(q, 80);
        let triples = rn_series_table(&q, 9, 60).unwrap();
        for n in 0..5 {
            let m = lmn(&q, n, &triples).unwrap();
            for x in [-0.6, 0.1, 0.7] {
                let h = 1e-4;
                let f = |x: f64| antiderivative_dy1dy2(&m, &q, Regime::GenericSeries, &pair, c(x)).unwrap();
                let d = (f(x + h) - f(x - h)) / (2.0 * h);
                let want = c(x).powu(n as u32) * pair.eval_re(x).dprod();
                assert!((d - want).norm() < 1e-7, "n {n} x {x}: {d} vs {want}");
            }
        }
    }

    #[test]
    fn lmn_sparsity_and_source() {
        let b = 0.9;
        let q = QuarticCoeffs::pure_quartic(b);
        let triples = rn_series_table(&q, 6, 40).unwrap();
        let m0 = lmn(&q, 0, &triples).unwrap();
        let want = triples[4].r.scale_re(b * b);
        assert!(m0.n_coef.sub(&want).unwrap().max_abs() < 1e-16);
        let m1 = lmn(&q, 1, &triples).unwrap();
        let want = triples[5].q.scale_re(b * b);
        assert!((m1.m.coeff(1) - want.coeff(1) - 1.0).norm() < 1e-16);
        assert!(matches!(lmn(&q, 3, &triples), Err(HeunError::MissingTriple(7))));
    }

    #[test]
    fn regime_mismatch_is_rejected() {
        let t = rn_series(&generic(), 0, 30).unwrap();
        let pair = quartic_pair(1.0).unwrap();
        assert!(matches!(
            antiderivative_y1y2(&t, &pair, c(0.1)),
            Err(HeunError::RegimeMismatch { .. })
        ));
    }

    #[test]
    fn integral_y1_dy2_at_zero_weight() {
        let pair = quartic_pair(1.0).unwrap();
        let (a, b) = (c(0.0), c(1.0));
        let got = integral_y1_dy2(0, None, &pair, a, b).unwrap();
        let f = |x: Complex64| 0.5 * (pair.eval(x).prod() + pair.wronskian() * x);
        assert!((got - (f(b) - f(a))).norm() < 1e-15);
    }

    #[test]
    fn sum_rule_residual_is_homogeneous() {
        // for the IVP choice Σ k A_k R_{k-1} = 1 - (A₀ y₁² + y₂²)
        let q = generic();
        let triples = rn_series_table(&q, 4, 50).unwrap();
        let (s1, _) = sum_rule_residuals(&q, &triples).unwrap();
        let pair = SeriesPair::new(q, 60);
        let y1 = pair.y1().truncate(48);
        let y2 = pair.y2().truncate(48);
        let rh = y1
            .mul(&y1)
            .unwrap()
            .scale(q.a[0])
            .add(&y2.mul(&y2).unwrap())
            .unwrap();
        assert!(s1.truncate(48).add(&rh).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn dump_has_headers() {
        let t = rn_series(&generic(), 1, 10).unwrap();
        let d = t.dump();
        assert!(d.starts_with("# n 1 regime generic var t"));
        assert_eq!(d.lines().filter(|l| l.starts_with("# ")).count(), 4);
    }
}
