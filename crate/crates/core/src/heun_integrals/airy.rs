//! Exact triples for the Airy equation `y'' - z y = 0` (potential `-z`).

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::IntegralCoeffTriple;
use crate::model::QuarticCoeffs;
use crate::series::{TruncatedSeries, Var};
use crate::specfun::Regime;

fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Polynomial in `z` with exact rational coefficients, lowest power first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalPoly {
    coeffs: Vec<BigRational>,
}

impl RationalPoly {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    /// Builds from `(numerator, denominator)` pairs, lowest power first.
    pub fn from_fracs(fracs: &[(i64, i64)]) -> Self {
        Self {
            coeffs: fracs.iter().map(|&(n, d)| rat(n, d)).collect(),
        }
        .normalized()
    }

    pub fn monomial(power: usize, c: BigRational) -> Self {
        let mut coeffs = vec![BigRational::zero(); power + 1];
        coeffs[power] = c;
        Self { coeffs }.normalized()
    }

    fn normalized(mut self) -> Self {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
        self
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self {
            coeffs: (0..n).map(|k| self.coeff(k) + other.coeff(k)).collect(),
        }
        .normalized()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
        .normalized()
    }

    /// Multiplies by `z^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.coeffs.is_empty() {
            return Self::zero();
        }
        let mut coeffs = vec![BigRational::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Self { coeffs }
    }

    pub fn differentiate(&self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigInt::from(k))
                .collect(),
        }
        .normalized()
    }

    /// Complex series in `z` with truncation order `order`; coefficients
    /// above `order` are dropped.
    pub fn to_series(&self, order: usize) -> TruncatedSeries {
        let mut s = TruncatedSeries::zero(Var::Z, order);
        for (k, c) in self.coeffs.iter().enumerate().take(order + 1) {
            s.set_coeff(k, Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0));
        }
        s
    }
}

/// Exact Airy-regime triple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AiryTriple {
    pub n: usize,
    pub p: RationalPoly,
    pub q: RationalPoly,
    pub r: RationalPoly,
}

/// `Rₙ = -zⁿ/(2n+1) + n(n-1)(n-2)/(2(2n+1))·Rₙ₋₃`, with `Q = -R'` and
/// `P = ½R'' - zR`.
pub fn rn_airy_exact(n: usize) -> AiryTriple {
    let mut rs: Vec<RationalPoly> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        let two_m1 = 2 * m as i64 + 1;
        let mut r = RationalPoly::monomial(m, rat(-1, two_m1));
        if m >= 3 {
            let f = rat((m * (m - 1) * (m - 2)) as i64, 2 * two_m1);
            r = r.add(&rs[m - 3].scale(&f));
        }
        rs.push(r);
    }
    let r = rs.pop().expect("n + 1 entries");
    let dr = r.differentiate();
    let q = dr.scale(&rat(-1, 1));
    let p = dr.differentiate().scale(&rat(1, 2)).add(&r.shift(1).scale(&rat(-1, 1)));
    AiryTriple { n, p, q, r }
}

/// Floating-point Airy triple in the variable `z` with truncation order
/// `order` (exact whenever `order ≥ n + 1`).
pub fn rn_airy(n: usize, order: usize) -> IntegralCoeffTriple {
    let t = rn_airy_exact(n);
    IntegralCoeffTriple {
        n,
        regime: Regime::Airy,
        potential: QuarticCoeffs::from_re([0.0, -1.0, 0.0, 0.0, 0.0]),
        p: t.p.to_series(order),
        q: t.q.to_series(order),
        r: t.r.to_series(order),
    }
}

/// `Γ(a)/Γ(a - j) = (a-1)(a-2)···(a-j)` for `a = (2n+1)/6`.
fn gamma_ratio(n: usize, j: usize) -> BigRational {
    let a = rat(2 * n as i64 + 1, 6);
    (1..=j).fold(BigRational::one(), |acc, i| acc * (&a - rat(i as i64, 1)))
}

fn falling(n: usize, k: usize) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i))
}

/// Closed-form sum
/// `Rₙ = -zⁿ/(2n+1) Σ_j n!/(n-3j)! · Γ(a-j)/Γ(a) · (12z³)^{-j}`,
/// `a = (2n+1)/6`, `j = 0 ..= ⌊n/3⌋`.
pub fn airy_closed_form_r(n: usize) -> RationalPoly {
    let mut out = RationalPoly::zero();
    for j in 0..=n / 3 {
        let c = BigRational::from_integer(falling(n, 3 * j))
            / (gamma_ratio(n, j) * BigRational::from_integer(BigInt::from(12).pow(j as u32)))
            * rat(-1, 2 * n as i64 + 1);
        out = out.add(&RationalPoly::monomial(n - 3 * j, c));
    }
    out
}

/// Closed-form sum
/// `Qₙ = n zⁿ⁻¹/(2n+1) Σ_j (n-1)!/(n-1-3j)! · Γ(a-j)/Γ(a) · (12z³)^{-j}`.
pub fn airy_closed_form_q(n: usize) -> RationalPoly {
    if n == 0 {
        return RationalPoly::zero();
    }
    let mut out = RationalPoly::zero();
    for j in 0..=(n - 1) / 3 {
        let c = BigRational::from_integer(falling(n - 1, 3 * j) * BigInt::from(n))
            / (gamma_ratio(n, j) * BigRational::from_integer(BigInt::from(12).pow(j as u32)))
            * rat(1, 2 * n as i64 + 1);
        out = out.add(&RationalPoly::monomial(n - 1 - 3 * j, c));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_table() {
        let t = rn_airy_exact(0);
        assert_eq!(t.r, RationalPoly::from_fracs(&[(-1, 1)]));
        assert_eq!(t.q, RationalPoly::zero());
        assert_eq!(t.p, RationalPoly::from_fracs(&[(0, 1), (1, 1)]));
        let t = rn_airy_exact(4);
        assert_eq!(t.r, RationalPoly::from_fracs(&[(0, 1), (-4, 9), (0, 1), (0, 1), (-1, 9)]));
        assert_eq!(t.p, RationalPoly::from_fracs(&[(0, 1), (0, 1), (-2, 9), (0, 1), (0, 1), (1, 9)]));
    }

    #[test]
    fn closed_forms_match_recursion() {
        for n in 0..30 {
            let t = rn_airy_exact(n);
            assert_eq!(airy_closed_form_r(n), t.r, "R n {n}");
            assert_eq!(airy_closed_form_q(n), t.q, "Q n {n}");
        }
    }

    #[test]
    fn third_order_equation_exact() {
        // R''' - 4zR' - 2R = 2zⁿ
        for n in 0..20 {
            let r = rn_airy_exact(n).r;
            let d1 = r.differentiate();
            let lhs = d1
                .differentiate()
                .differentiate()
                .add(&d1.shift(1).scale(&rat(-4, 1)))
                .add(&r.scale(&rat(-2, 1)));
            assert_eq!(lhs, RationalPoly::monomial(n, rat(2, 1)), "n {n}");
        }
    }

    #[test]
    fn large_weights_do_not_overflow() {
        let t = rn_airy_exact(60);
        assert_eq!(t.r.degree(), Some(60));
        assert!(t.r.to_series(60).max_abs().is_finite());
    }
}
