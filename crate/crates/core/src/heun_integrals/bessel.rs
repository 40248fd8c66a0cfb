//! Triples for `ÿ + β² t⁴ y = 0`.
//!
//! For `n ≡ 0, 1, 2 (mod 6)` the IVP-normalized triple is a `₂F₃` in
//! `-β²t⁶/9`; for `n ≡ 3, 4, 5` the polynomial seeds `R₃ = 1/(4β²)`,
//! `R₄ = t/(6β²)`, `R₅ = t²/(8β²)` are propagated by
//! `Rₙ₊₆ = tⁿ⁺³/(2β²(n+5)) - (n+3)(n+2)(n+1)/(4β²(n+5))·Rₙ`.

use num_complex::Complex64;

use super::{HeunError, IntegralCoeffTriple};
use crate::model::QuarticCoeffs;
use crate::series::{TruncatedSeries, Var};
use crate::specfun::{f23, Regime, SpecfunError};

fn check_beta(beta: f64) -> Result<(), HeunError> {
    if beta == 0.0 || !beta.is_finite() {
        return Err(SpecfunError::ZeroBeta.into());
    }
    Ok(())
}

/// `scale · t^shift · ₂F₃(1, a; b₁, b₂, b₃; -β²t⁶/9)` as a series.
fn f23_series(a: f64, b: [f64; 3], beta: f64, scale: f64, shift: usize, order: usize) -> TruncatedSeries {
    let mut s = TruncatedSeries::zero(Var::T, order);
    let x = -beta * beta / 9.0;
    let mut term = scale;
    let mut k = 0usize;
    while shift + 6 * k <= order {
        s.set_coeff(shift + 6 * k, Complex64::new(term, 0.0));
        let kf = k as f64;
        term *= (kf + a) / ((kf + b[0]) * (kf + b[1]) * (kf + b[2])) * x;
        k += 1;
    }
    s
}

fn params(n: usize) -> (f64, f64) {
    let nf = n as f64;
    (nf, (nf + 5.0) / 6.0)
}

/// IVP triple for `n ≡ 0, 1, 2 (mod 6)` from the `₂F₃` closed forms.
fn closed_form_series(beta: f64, n: usize, order: usize) -> IntegralCoeffTriple {
    let (nf, a) = params(n);
    let s = |k: f64| (nf + k) / 6.0;
    let rc = 2.0 / ((nf + 1.0) * (nf + 2.0) * (nf + 3.0));
    let r = f23_series(a, [s(7.0), s(8.0), s(9.0)], beta, rc, n + 3, order);
    let q = f23_series(a, [s(3.0), s(7.0), s(8.0)], beta, -2.0 / ((nf + 1.0) * (nf + 2.0)), n + 2, order);
    let p = f23_series(a, [s(2.0), s(3.0), s(7.0)], beta, 1.0 / (nf + 1.0), n + 1, order)
        .add(&f23_series(a, [s(7.0), s(8.0), s(9.0)], beta, beta * beta * rc, n + 7, order))
        .expect("same variable");
    IntegralCoeffTriple {
        n,
        regime: Regime::QuarticBessel,
        potential: QuarticCoeffs::pure_quartic(beta),
        p,
        q,
        r,
    }
}

/// Polynomial seed `R₃, R₄, R₅` (as `R` coefficients in `t`).
pub fn bessel_seed(beta: f64, n: usize) -> Option<TruncatedSeries> {
    let b2 = beta * beta;
    let (k, c) = match n {
        3 => (0, 1.0 / (4.0 * b2)),
        4 => (1, 1.0 / (6.0 * b2)),
        5 => (2, 1.0 / (8.0 * b2)),
        _ => return None,
    };
    Some(TruncatedSeries::monomial(Var::T, k, Complex64::new(c, 0.0), k))
}

/// `Rₙ₊₆` from `Rₙ`. The output order is `max(order of Rₙ, n + 3)`.
pub fn bessel_recursion_step(beta: f64, n: usize, r_n: &TruncatedSeries) -> TruncatedSeries {
    let b2 = beta * beta;
    let nf = n as f64;
    let order = r_n.order().max(n + 3);
    let lin = -(nf + 3.0) * (nf + 2.0) * (nf + 1.0) / (4.0 * b2 * (nf + 5.0));
    let mut out = r_n.pad_to(order).scale_re(lin);
    let c = out.coeff(n + 3);
    out.set_coeff(n + 3, c + 1.0 / (2.0 * b2 * (nf + 5.0)));
    out
}

/// Triple of weight `n` for the pure quartic `β²t⁴`, truncation order
/// `order`.
pub fn rn_bessel(beta: f64, n: usize, order: usize) -> Result<IntegralCoeffTriple, HeunError> {
    check_beta(beta)?;
    if n % 6 <= 2 {
        return Ok(closed_form_series(beta, n, order));
    }
    let mut m = n % 6;
    let mut r = bessel_seed(beta, m).expect("m in 3..=5");
    while m < n {
        r = bessel_recursion_step(beta, m, &r);
        m += 6;
    }
    // polynomial: pad so that the derivatives stay exact through `order`
    let r = r.pad_to(order + 2);
    Ok(IntegralCoeffTriple::from_r(n, Regime::QuarticBessel, QuarticCoeffs::pure_quartic(beta), r))
}

/// Pointwise `(Pₙ, Qₙ, Rₙ)` from the `₂F₃` closed forms, for
/// `n ≡ 0, 1, 2 (mod 6)`; `None` otherwise.
pub fn bessel_closed_form(
    beta: f64,
    n: usize,
    t: Complex64,
) -> Result<Option<(Complex64, Complex64, Complex64)>, HeunError> {
    check_beta(beta)?;
    if n % 6 > 2 {
        return Ok(None);
    }
    let (nf, a) = params(n);
    let s = |k: f64| (nf + k) / 6.0;
    let x = -beta * beta * t.powu(6) / 9.0;
    let rc = 2.0 / ((nf + 1.0) * (nf + 2.0) * (nf + 3.0));
    let fr = f23(1.0, a, s(7.0), s(8.0), s(9.0), x);
    let r = rc * t.powu(n as u32 + 3) * fr;
    let q = -2.0 / ((nf + 1.0) * (nf + 2.0)) * t.powu(n as u32 + 2) * f23(1.0, a, s(3.0), s(7.0), s(8.0), x);
    let p = t.powu(n as u32 + 1) / (nf + 1.0) * f23(1.0, a, s(2.0), s(3.0), s(7.0), x)
        + beta * beta * rc * t.powu(n as u32 + 7) * fr;
    Ok(Some((p, q, r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heun_integrals::rn_series;

    #[test]
    fn seeds_and_n9() {
        let b: f64 = 1.7;
        let t3 = rn_bessel(b, 3, 20).unwrap();
        assert!((t3.r.coeff(0) - 1.0 / (4.0 * b * b)).norm() < 1e-16);
        assert_eq!(t3.q.max_abs(), 0.0);
        assert!((t3.p.coeff(4) - 0.25).norm() < 1e-16);
        let t5 = rn_bessel(b, 5, 20).unwrap();
        assert!((t5.p.coeff(0) - 1.0 / (8.0 * b * b)).norm() < 1e-16);
        assert!((t5.q.coeff(1) + 1.0 / (4.0 * b * b)).norm() < 1e-16);
        let t9 = rn_bessel(b, 9, 20).unwrap();
        assert!((t9.r.coeff(6) - 1.0 / (16.0 * b * b)).norm() < 1e-16);
        assert!((t9.r.coeff(0) + 15.0 / (16.0 * b.powi(4))).norm() < 1e-15);
    }

    #[test]
    fn closed_form_invariants() {
        for n in [0, 1, 2, 6, 7, 8, 12] {
            let t = rn_bessel(0.8, n, 50).unwrap();
            let (dq, dp) = t.invariant_defects();
            assert!(dq < 1e-15 && dp < 1e-15, "n {n}: {dq} {dp}");
            assert!(t.ode_residual().truncate(45).max_abs() < 1e-14);
        }
    }

    #[test]
    fn closed_form_matches_ivp_series() {
        let b = 1.1;
        let q = QuarticCoeffs::pure_quartic(b);
        for n in [0, 1, 2, 6, 8] {
            let a = rn_bessel(b, n, 40).unwrap();
            let s = rn_series(&q, n, 40).unwrap();
            for k in 0..=40 {
                let (x, y) = (a.r.coeff(k), s.r.coeff(k));
                assert!((x - y).norm() <= 1e-12 * y.norm().max(1e-300), "n {n} k {k}");
            }
        }
    }

    #[test]
    fn pointwise_matches_series() {
        let b = 1.0;
        for n in [0, 2, 7] {
            let s = rn_bessel(b, n, 120).unwrap();
            for t in [0.3, 1.2, 1.9] {
                let tc = Complex64::new(t, 0.0);
                let (p, q, r) = bessel_closed_form(b, n, tc).unwrap().unwrap();
                let (sp, sq, sr) = s.eval(tc);
                let sc = 1.0 + sp.norm() + sq.norm() + sr.norm();
                assert!((p - sp).norm() + (q - sq).norm() + (r - sr).norm() < 1e-12 * sc, "n {n} t {t}");
            }
        }
        assert_eq!(bessel_closed_form(b, 3, Complex64::new(0.5, 0.0)).unwrap(), None);
        assert!(rn_bessel(0.0, 1, 10).is_err());
    }
}
