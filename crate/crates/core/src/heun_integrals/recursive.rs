//! `Rₙ` for `n ≥ 3` from `R₀, R₁, R₂` when `A₄ ≠ 0`.
//!
//! `Σ_{k=0}^{4} (2n+k) A_k R_{n+k-1} = tⁿ - n(n-1)(n-2)/2 · R_{n-3}` solved
//! for the top term gives
//!
//! ```text
//! R_{n+3} = Jₙ - Σ_{k=0}^{3} gₙ^{k+1} R_{n+k-1},
//! Jₙ = (2tⁿ - n(n-1)(n-2) R_{n-3}) / (2(2n+4)A₄),
//! gₙ^{k+1} = (2n+k)/(2n+4) · A_k/A₄.
//! ```
//!
//! Outputs differ from the IVP-normalized series by homogeneous solutions.

use num_complex::Complex64;

use super::{HeunError, IntegralCoeffTriple};
use crate::model::QuarticCoeffs;
use crate::series::TruncatedSeries;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Coefficients `gₙᵏ, hₙᵏ, wₙᵏ, uₙᵏ` of the revised recursion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RnRecursionAux {
    a: [Complex64; 5],
}

/// One row `n` of the auxiliary tables, indexed by `k = 0..=4`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuxRow {
    pub g: [Complex64; 5],
    pub h: [Complex64; 5],
    pub w: [Complex64; 5],
    pub u: [Complex64; 5],
}

impl RnRecursionAux {
    pub fn new(quartic: &QuarticCoeffs) -> Result<Self, HeunError> {
        if quartic.a[4] == ZERO {
            return Err(HeunError::ZeroA4);
        }
        Ok(Self { a: quartic.a })
    }

    /// `gₙʲ`; zero for `j ∉ 1..=4` and for `n < 0`.
    pub fn g(&self, n: i64, j: i64) -> Complex64 {
        if n < 0 || !(1..=4).contains(&j) {
            return ZERO;
        }
        let k = j - 1;
        self.a[k as usize] / self.a[4] * ((2 * n + k) as f64 / (2 * n + 4) as f64)
    }

    pub fn h(&self, n: i64, k: i64) -> Complex64 {
        self.g(n, k) - self.g(n, 4) * self.g(n - 1, k + 1)
    }

    pub fn w(&self, n: i64, k: i64) -> Complex64 {
        self.h(n, k) - self.h(n, 3) * self.g(n - 2, k + 2)
    }

    pub fn u(&self, n: i64, k: i64) -> Complex64 {
        self.w(n, k) - self.w(n, 2) * self.g(n - 3, k + 3)
    }

    pub fn table(&self, n_max: usize) -> Vec<AuxRow> {
        (0..=n_max as i64)
            .map(|n| AuxRow {
                g: std::array::from_fn(|k| self.g(n, k as i64)),
                h: std::array::from_fn(|k| self.h(n, k as i64)),
                w: std::array::from_fn(|k| self.w(n, k as i64)),
                u: std::array::from_fn(|k| self.u(n, k as i64)),
            })
            .collect()
    }

    /// `Jₙ` given `R_{n-3}` (ignored for `n < 3`), at the order of `like`.
    pub fn j(&self, n: usize, r_nm3: Option<&TruncatedSeries>, like: &TruncatedSeries) -> TruncatedSeries {
        let den = self.a[4] * (2.0 * (2 * n + 4) as f64);
        let mut out = TruncatedSeries::zero(like.var(), like.order());
        if n <= like.order() {
            out.set_coeff(n, 2.0 / den);
        }
        if n >= 3 {
            let r = r_nm3.expect("R_{n-3} needed for n >= 3");
            let f = -((n * (n - 1) * (n - 2)) as f64) / den;
            out = out.add(&r.scale(f)).expect("same variable");
        }
        out
    }

    /// `R₃..R₆` through the `g, h, w, u` forms.
    pub fn r3_r6(&self, r: [&TruncatedSeries; 3]) -> [TruncatedSeries; 4] {
        let like = r[0];
        let j0 = self.j(0, None, like);
        let j1 = self.j(1, None, like);
        let j2 = self.j(2, None, like);
        let j3 = self.j(3, Some(r[0]), like);
        let lc = |terms: &[(Complex64, &TruncatedSeries)]| {
            terms.iter().fold(TruncatedSeries::zero(like.var(), like.order()), |acc, (c, s)| {
                acc.add(&s.scale(*c)).expect("same variable")
            })
        };
        let one = Complex64::new(1.0, 0.0);
        let r3 = lc(&[
            (one, &j0),
            (-self.g(0, 2), r[0]),
            (-self.g(0, 3), r[1]),
            (-self.g(0, 4), r[2]),
        ]);
        let r4 = lc(&[
            (one, &j1),
            (-self.g(1, 4), &j0),
            (-self.h(1, 1), r[0]),
            (-self.h(1, 2), r[1]),
            (-self.h(1, 3), r[2]),
        ]);
        let r5 = lc(&[
            (one, &j2),
            (-self.g(2, 4), &j1),
            (-self.h(2, 3), &j0),
            (-self.w(2, 0), r[0]),
            (-self.w(2, 1), r[1]),
            (-self.w(2, 2), r[2]),
        ]);
        let r6 = lc(&[
            (one, &j3),
            (-self.g(3, 4), &j2),
            (-self.h(3, 3), &j1),
            (-self.w(3, 2), &j0),
            (-self.u(3, 0), r[1]),
            (-self.u(3, 1), r[2]),
            (self.g(1, 1) * self.h(3, 3) + self.g(0, 2) * self.w(3, 2), r[0]),
        ]);
        [r3, r4, r5, r6]
    }
}

/// `R₃ ..= R_{n_max}` by the revised recursion, seeded with the triples of
/// weights 0, 1, 2. Output triples have order `seed order - 2`.
pub fn rn_general_recursive(
    quartic: &QuarticCoeffs,
    seeds: &[IntegralCoeffTriple],
    n_max: usize,
) -> Result<Vec<IntegralCoeffTriple>, HeunError> {
    let aux = RnRecursionAux::new(quartic)?;
    for k in 0..3 {
        if seeds.get(k).map(|s| s.n) != Some(k) {
            return Err(HeunError::MissingTriple(k));
        }
    }
    let order = seeds[..3].iter().map(|s| s.r.order()).min().expect("three seeds");
    let mut rs: Vec<TruncatedSeries> = seeds[..3].iter().map(|s| s.r.truncate(order)).collect();
    for n in 0..=n_max.saturating_sub(3) {
        let mut next = aux.j(n, n.checked_sub(3).map(|i| &rs[i]), &rs[0]);
        for k in 0..4 {
            let g = aux.g(n as i64, k as i64 + 1);
            if g == ZERO || n + k == 0 {
                continue;
            }
            next = next.sub(&rs[n + k - 1].scale(g))?;
        }
        rs.push(next);
    }
    let (regime, potential) = (seeds[0].regime, *quartic);
    Ok(rs
        .into_iter()
        .enumerate()
        .skip(3)
        .take(n_max.saturating_sub(2))
        .map(|(n, r)| IntegralCoeffTriple::from_r(n, regime, potential, r))
        .collect())
}

/// Expanded closed forms of `R₃..R₆` in terms of `R₀, R₁, R₂`.
pub fn explicit_r3_r6(
    quartic: &QuarticCoeffs,
    r0: &TruncatedSeries,
    r1: &TruncatedSeries,
    r2: &TruncatedSeries,
) -> Result<[TruncatedSeries; 4], HeunError> {
    if quartic.a[4] == ZERO {
        return Err(HeunError::ZeroA4);
    }
    let [a0, a1, a2, a3, a4] = quartic.a;
    let (i2, i3, i4) = (a4.powi(2), a4.powi(3), a4.powi(4));
    let order = r0.order().min(r1.order()).min(r2.order());
    let var = r0.var();
    let build = |poly: &[Complex64], c0: Complex64, c1: Complex64, c2: Complex64| {
        let mut s = TruncatedSeries::zero(var, order);
        for (k, &p) in poly.iter().enumerate() {
            if k <= order {
                s.set_coeff(k, p);
            }
        }
        s.add(&r0.truncate(order).scale(c0))
            .and_then(|s| s.add(&r1.truncate(order).scale(c1)))
            .and_then(|s| s.add(&r2.truncate(order).scale(c2)))
            .expect("same variable")
    };
    let one = Complex64::new(1.0, 0.0);
    let r3 = build(&[one / (4.0 * a4)], -a1 / (4.0 * a4), -a2 / (2.0 * a4), -3.0 * a3 / (4.0 * a4));
    let r4 = build(
        &[-5.0 * a3 / (24.0 * i2), one / (6.0 * a4)],
        -(a0 / (3.0 * a4) - 5.0 * a1 * a3 / (24.0 * i2)),
        -(a1 / (2.0 * a4) - 5.0 * a2 * a3 / (12.0 * i2)),
        -(2.0 * a2 / (3.0 * a4) - 5.0 * a3 * a3 / (8.0 * i2)),
    );
    let r5 = build(
        &[
            -3.0 * a2 / (16.0 * i2) + 35.0 * a3 * a3 / (192.0 * i3),
            -7.0 * a3 / (48.0 * i2),
            one / (8.0 * a4),
        ],
        7.0 * a0 * a3 / (24.0 * i2) + 3.0 * a1 * a2 / (16.0 * i2) - 35.0 * a1 * a3 * a3 / (192.0 * i3),
        -(a0 / (2.0 * a4) - 7.0 * a1 * a3 / (16.0 * i2) - 3.0 * a2 * a2 / (8.0 * i2)
            + 35.0 * a2 * a3 * a3 / (96.0 * i3)),
        -(5.0 * a1 / (8.0 * a4) - 55.0 * a2 * a3 / (48.0 * i2) + 35.0 * a3.powi(3) / (64.0 * i3)),
    );
    let r6 = build(
        &[
            -7.0 * a1 / (40.0 * i2) + 161.0 * a2 * a3 / (480.0 * i3) - 21.0 * a3.powi(3) / (128.0 * i4),
            -(2.0 * a2 / (15.0 * i2) - 21.0 * a3 * a3 / (160.0 * i3)),
            -9.0 * a3 / (80.0 * i2),
            one / (10.0 * a4),
        ],
        -(3.0 / (10.0 * a4) - 4.0 * a0 * a2 / (15.0 * i2) - 7.0 * a1 * a1 / (40.0 * i2)
            + 21.0 * a0 * a3 * a3 / (80.0 * i3)
            + 161.0 * a1 * a2 * a3 / (480.0 * i3)
            - 21.0 * a1 * a3.powi(3) / (128.0 * i4)),
        9.0 * a0 * a3 / (20.0 * i2) + 3.0 * a1 * a2 / (4.0 * i2) - 63.0 * a1 * a3 * a3 / (160.0 * i3)
            - 161.0 * a2 * a2 * a3 / (240.0 * i3)
            + 21.0 * a2 * a3.powi(3) / (64.0 * i4),
        -(3.0 * a0 / (5.0 * a4) - 87.0 * a1 * a3 / (80.0 * i2) - 8.0 * a2 * a2 / (15.0 * i2)
            + 49.0 * a2 * a3 * a3 / (32.0 * i3)
            - 63.0 * a3.powi(4) / (128.0 * i4)),
    );
    Ok([r3, r4, r5, r6])
}
