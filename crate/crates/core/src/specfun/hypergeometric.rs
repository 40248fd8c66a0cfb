//! Generalized hypergeometric series by direct Maclaurin summation.

use num_complex::Complex64;

use super::SpecfunError;

/// Maximum number of series terms.
pub const MAX_TERMS: usize = 500;
const REL_STOP: f64 = 1e-16;

/// A summed hypergeometric series.
#[derive(Clone, Copy, Debug)]
pub struct HypValue {
    pub value: Complex64,
    pub converged: bool,
    /// `|last term| / |sum|` at termination.
    pub last_term_ratio: f64,
    pub terms: usize,
}

fn is_pole(b: Complex64) -> bool {
    b.im == 0.0 && b.re <= 0.0 && b.re.fract() == 0.0
}

/// `pFq(a; b; z) = Σ_n Π(a_i)_n / Π(b_j)_n · z^n / n!`.
///
/// Summation stops once two consecutive terms fall below `1e-16 |sum|`
/// or after [`MAX_TERMS`] terms, in which case `converged` is false.
pub fn hyp_pfq(a: &[Complex64], b: &[Complex64], z: Complex64) -> Result<HypValue, SpecfunError> {
    if let Some(&bad) = b.iter().find(|&&b| is_pole(b)) {
        return Err(SpecfunError::Pole(bad));
    }
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut small_run = 0;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let num: Complex64 = a.iter().map(|&ai| ai + nf).product();
        let den: Complex64 = b.iter().map(|&bj| bj + nf).product();
        term *= num / den * z / (nf + 1.0);
        sum += term;
        if term.norm() <= REL_STOP * sum.norm() {
            small_run += 1;
            // a numerator parameter that is a non-positive integer
            // terminates the series exactly
            if small_run >= 2 || term == Complex64::new(0.0, 0.0) {
                return Ok(HypValue {
                    value: sum,
                    converged: true,
                    last_term_ratio: term.norm() / sum.norm().max(f64::MIN_POSITIVE),
                    terms: n + 2,
                });
            }
        } else {
            small_run = 0;
        }
    }
    Ok(HypValue {
        value: sum,
        converged: false,
        last_term_ratio: term.norm() / sum.norm().max(f64::MIN_POSITIVE),
        terms: MAX_TERMS + 1,
    })
}

pub fn hyp1f2(
    a: Complex64,
    b1: Complex64,
    b2: Complex64,
    z: Complex64,
) -> Result<HypValue, SpecfunError> {
    hyp_pfq(&[a], &[b1, b2], z)
}

pub fn hyp2f3(
    a1: Complex64,
    a2: Complex64,
    b1: Complex64,
    b2: Complex64,
    b3: Complex64,
    z: Complex64,
) -> Result<HypValue, SpecfunError> {
    hyp_pfq(&[a1, a2], &[b1, b2, b3], z)
}

/// Real-parameter convenience wrapper for `₂F₃`; returns the value only.
pub(crate) fn f23(a1: f64, a2: f64, b1: f64, b2: f64, b3: f64, z: Complex64) -> Complex64 {
    let c = |x: f64| Complex64::new(x, 0.0);
    hyp2f3(c(a1), c(a2), c(b1), c(b2), c(b3), z)
        .expect("parameters are positive")
        .value
}

/// Real-parameter `₁F₂(1; 1, b; z)`, i.e. `₀F₁(; b; z)`.
pub(crate) fn f12_unit(b: f64, z: Complex64) -> Complex64 {
    let c = |x: f64| Complex64::new(x, 0.0);
    hyp1f2(c(1.0), c(1.0), c(b), z)
        .expect("parameters are positive")
        .value
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    /// Independent `₀F₁(; b; z)` summation.
    fn f01(b: f64, z: f64) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for n in 0..200 {
            term *= z / ((b + n as f64) * (n as f64 + 1.0));
            sum += term;
        }
        sum
    }

    #[test]
    fn zero_argument() {
        let v = hyp1f2(c(1.0), c(1.0), c(7.0 / 6.0), c(0.0)).unwrap();
        assert_eq!(v.value, c(1.0));
        assert!(v.converged);
        let v = hyp2f3(c(0.3), c(-2.5), c(1.5), c(0.2), c(9.0), c(0.0)).unwrap();
        assert_eq!(v.value, c(1.0));
    }

    #[test]
    fn redundant_pair_reduces_to_0f1() {
        let v = hyp1f2(c(1.0), c(1.0), c(5.0 / 6.0), c(-0.25)).unwrap();
        assert!(v.converged);
        assert!(v.last_term_ratio < 1e-14);
        assert!((v.value.re - f01(5.0 / 6.0, -0.25)).abs() < 1e-15);
        assert_eq!(v.value.im, 0.0);
    }

    #[test]
    fn poles_are_rejected() {
        assert!(matches!(
            hyp1f2(c(1.0), c(-2.0), c(0.5), c(0.1)),
            Err(SpecfunError::Pole(_))
        ));
        assert!(hyp2f3(c(1.0), c(1.0), c(0.0), c(0.5), c(0.5), c(0.1)).is_err());
    }

    #[test]
    fn terminating_series() {
        // 2F3(-2, 1; 1, 1, 1; z) = 1 - 2z + z²/4
        let z = 0.3;
        let v = hyp2f3(c(-2.0), c(1.0), c(1.0), c(1.0), c(1.0), c(z)).unwrap();
        assert!(v.converged);
        assert!((v.value.re - (1.0 - 2.0 * z + z * z / 4.0)).abs() < 1e-15);
    }

    #[test]
    fn non_convergence_is_flagged() {
        // 2F3 with a huge argument needs more than MAX_TERMS terms
        let v = hyp2f3(c(1.0), c(1.0), c(1.0), c(1.0), c(1.0), c(-1e12)).unwrap();
        assert!(!v.converged);
    }
}
