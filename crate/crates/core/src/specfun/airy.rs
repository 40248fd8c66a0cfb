//! Airy functions `Ai`, `Bi` and their derivatives on the complex plane.
//!
//! Maclaurin series inside `|z| <= SWITCH_RADIUS`, the Poincaré expansion
//! of `Ai` outside, with `Bi` obtained from the rotation identity
//! `Bi(z) = e^{iπ/6} Ai(ωz) + e^{-iπ/6} Ai(ω̄z)`, `ω = e^{2πi/3}`.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Radius separating the Maclaurin and asymptotic evaluations.
pub const SWITCH_RADIUS: f64 = 6.0;
const SERIES_TERMS: usize = 120;

/// `Ai(0)` and `-Ai'(0)`.
const AI0: f64 = 0.355_028_053_887_817_2;
const AIP0: f64 = 0.258_819_403_792_806_8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AiryValues {
    pub ai: Complex64,
    pub bi: Complex64,
    pub ai_prime: Complex64,
    pub bi_prime: Complex64,
    /// False when the asymptotic branch ran close to an anti-Stokes
    /// direction of the recessive solution, where only absolute accuracy
    /// relative to `|Bi|` can be expected.
    pub accurate: bool,
}

/// Maclaurin pieces `f`, `g` and derivatives:
/// `Ai = c1 f - c2 g`, `Bi = √3 (c1 f + c2 g)`.
fn maclaurin(z: Complex64) -> AiryValues {
    // f = Σ 3^k (1/3)_k z^{3k} / (3k)!,  g = Σ 3^k (2/3)_k z^{3k+1} / (3k+1)!
    let mut ft = Complex64::new(1.0, 0.0);
    let mut gt = z;
    let mut f = ft;
    let mut g = gt;
    let mut fp = Complex64::new(0.0, 0.0);
    let mut gp = Complex64::new(1.0, 0.0);
    for k in 0..SERIES_TERMS {
        let k3 = 3.0 * k as f64;
        // new terms divided by z, so that derivatives need no division
        let ftd = ft * z * z / ((k3 + 2.0) * (k3 + 3.0));
        let gtd = gt * z * z / ((k3 + 3.0) * (k3 + 4.0));
        ft = ftd * z;
        gt = gtd * z;
        f += ft;
        g += gt;
        fp += ftd * (k3 + 3.0);
        gp += gtd * (k3 + 4.0);
        if ft.norm() < 1e-18 * f.norm() && gt.norm() < 1e-18 * g.norm() {
            break;
        }
    }
    let s3 = 3f64.sqrt();
    AiryValues {
        ai: AI0 * f - AIP0 * g,
        bi: s3 * (AI0 * f + AIP0 * g),
        ai_prime: AI0 * fp - AIP0 * gp,
        bi_prime: s3 * (AI0 * fp + AIP0 * gp),
        accurate: true,
    }
}

/// Asymptotic `Ai`, `Ai'` for `|arg z| <= 2π/3`.
fn ai_asymptotic(z: Complex64) -> (Complex64, Complex64) {
    let zeta = z.powf(1.5) * (2.0 / 3.0);
    let z14 = z.powf(0.25);
    let pref = (-zeta).exp() / (2.0 * PI.sqrt());
    let mut u = 1.0f64;
    let mut su = Complex64::new(1.0, 0.0);
    let mut sv = Complex64::new(1.0, 0.0);
    let mut zpow = Complex64::new(1.0, 0.0);
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        zpow /= -zeta;
        let tu = u * zpow;
        // stop at the smallest term
        if tu.norm() > prev {
            break;
        }
        prev = tu.norm();
        su += tu;
        sv += v * zpow;
        if prev < 1e-17 {
            break;
        }
    }
    (pref / z14 * su, -pref * z14 * sv)
}

fn ai_large(z: Complex64) -> (Complex64, Complex64) {
    let arg = z.arg();
    if arg.abs() <= 2.0 * PI / 3.0 {
        return ai_asymptotic(z);
    }
    // Ai(z) = -ω Ai(ωz) - ω² Ai(ω²z); both rotated points land inside
    // the principal sector.
    let w = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    let w2 = w * w;
    let (a1, d1) = ai_asymptotic(w * z);
    let (a2, d2) = ai_asymptotic(w2 * z);
    (-w * a1 - w2 * a2, -w2 * d1 - w * d2)
}

/// `Ai`, `Bi`, `Ai'`, `Bi'` at complex `z`.
pub fn airy_pair(z: Complex64) -> AiryValues {
    if z.norm() <= SWITCH_RADIUS {
        return maclaurin(z);
    }
    let w = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    let wb = w.conj();
    let (ai, ai_prime) = ai_large(z);
    let (a1, d1) = ai_large(w * z);
    let (a2, d2) = ai_large(wb * z);
    let e = Complex64::from_polar(1.0, PI / 6.0);
    let bi = e * a1 + e.conj() * a2;
    let bi_prime = e * w * d1 + e.conj() * wb * d2;
    // Ai is recessive near arg z = 0; cancellation in the sector sum is
    // not an issue there, but the |Bi|-relative error is what survives.
    let accurate = z.arg().abs() > 0.1 && (z.arg().abs() - PI).abs() > 0.1;
    AiryValues {
        ai,
        bi,
        ai_prime,
        bi_prime,
        accurate,
    }
}
