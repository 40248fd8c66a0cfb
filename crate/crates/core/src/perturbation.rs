//! Expansion of the coupled PT system in the intra-pair coupling `κ`.
//!
//! With `c = Σ κⁿ c⁽ⁿ⁾`, each order solves `c̈₁⁽ⁿ⁾ + Q c₁⁽ⁿ⁾ = 2ċ₂⁽ⁿ⁻¹⁾`,
//! `c̈₂⁽ⁿ⁾ + Q c₂⁽ⁿ⁾ = -2ċ₁⁽ⁿ⁻¹⁾` (the `κ` of the full equations is carried
//! by the power `κⁿ`). Every order is written as
//!
//! ```text
//! c₁⁽ⁿ⁾ = Σ_k (α_k c₁⁽⁰⁾ + β_k c₂⁽⁰⁾ + γ_k ċ₁⁽⁰⁾ + δ_k ċ₂⁽⁰⁾) x^k
//! c₂⁽ⁿ⁾ = Σ_k (λ_k c₁⁽⁰⁾ + μ_k c₂⁽⁰⁾ + ν_k ċ₁⁽⁰⁾ + ξ_k ċ₂⁽⁰⁾) x^k
//! ```
//!
//! and the next order follows from the operator tables `E, F, G, H`,
//! the power-series coefficients of `𝓔ₙ = xⁿ⁺¹/(n+1) - (n/2)Qₙ₋₁`,
//! `𝓕ₙ = -nRₙ₋₁`, `𝓖ₙ = Mₙ` and `𝓗ₙ = 2Nₙ`.
//!
//! Three regimes share this machinery: the full quartic in `t`, the pure
//! quartic `β²t⁴` (large `|t|`), and the linear potential near `t = 0`
//! mapped to the Airy equation by `z = g(t + A₀/A₁)`, `g³ = -A₁`. In the
//! Airy variable the coupling becomes `κ/g`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::heun_integrals::{lmn, rn_airy, rn_series, HeunError, IntegralCoeffTriple};
use crate::model::{quartic_coeffs, ModelError, ModelParams, QuarticCoeffs, SweepParams};
use crate::series::Var;
use crate::specfun::{f23, quartic_pair, AiryPair, FundamentalPair, PairPoint, Regime, SeriesPair};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Default highest order in `κ`.
pub const DEFAULT_MAX_ORDER: usize = 4;
/// Default highest power of the expansion variable kept in the tables.
pub const DEFAULT_MAX_POWER: usize = 40;
/// Extra series order needed beyond the table power: weights up to `L + 4`
/// and six orders of headroom in the particular solution.
const ORDER_HEADROOM: usize = 12;
/// Relative size of the last order above which a partial sum is flagged.
const CONVERGENCE_RATIO: f64 = 1e-3;

#[derive(Debug, Error, PartialEq)]
pub enum PerturbationError {
    #[error("operator tables need triples up to weight {needed}: {source}")]
    InsufficientDepth { needed: usize, source: HeunError },
    #[error("triple of weight {n} has order {order} < table power {power}")]
    ShallowTriple { n: usize, order: usize, power: usize },
    #[error("table has {table} powers but operators only {ops}")]
    TruncationOverflow { table: usize, ops: usize },
    #[error("expected the weight-0 triple, got weight {0}")]
    WrongWeight(usize),
    #[error("A1 must be non-zero for the Airy map")]
    ZeroA1,
    #[error(transparent)]
    Heun(#[from] HeunError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `c₁⁽⁰⁾ = d₁T₁ + d₂T₂`, `c₂⁽⁰⁾ = e₁T₁ + e₂T₂`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialCombination {
    pub d1: Complex64,
    pub d2: Complex64,
    pub e1: Complex64,
    pub e2: Complex64,
}

impl InitialCombination {
    pub fn new(d1: Complex64, d2: Complex64, e1: Complex64, e2: Complex64) -> Self {
        Self { d1, d2, e1, e2 }
    }

    /// `c⁽⁰⁾` and its derivative from pair values.
    pub fn c0(&self, v: &PairPoint) -> C0Values {
        let (c1, dc1) = v.combine(self.d1, self.d2);
        let (c2, dc2) = v.combine(self.e1, self.e2);
        C0Values { c1, c2, dc1, dc2 }
    }
}

/// Zeroth-order solution and its derivative at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct C0Values {
    pub c1: Complex64,
    pub c2: Complex64,
    pub dc1: Complex64,
    pub dc2: Complex64,
}

/// `c₁⁽¹⁾ = x c₂⁽⁰⁾`, `c₂⁽¹⁾ = -x c₁⁽⁰⁾`.
pub fn first_order(c0: &C0Values, x: Complex64) -> (Complex64, Complex64) {
    (x * c0.c2, -x * c0.c1)
}

/// `c⁽²⁾ = ½(Q₀ - x²)c⁽⁰⁾ + R₀ċ⁽⁰⁾` for both components.
pub fn second_order(
    c0: &C0Values,
    triple0: &IntegralCoeffTriple,
    x: Complex64,
) -> Result<(Complex64, Complex64), PerturbationError> {
    if triple0.n != 0 {
        return Err(PerturbationError::WrongWeight(triple0.n));
    }
    let (_, q0, r0) = triple0.eval(x);
    let a = 0.5 * (q0 - x * x);
    Ok((a * c0.c1 + r0 * c0.dc1, a * c0.c2 + r0 * c0.dc2))
}

/// The two prefactors of `c⁽²⁾` for `Q = β²t⁴` in closed form:
/// `-t²/2·[1 + ₂F₃(1,5/6;3/6,7/6,8/6;-β²t⁶/9)]` and
/// `t³/3·₂F₃(1,5/6;7/6,8/6,9/6;-β²t⁶/9)`.
pub fn quartic_second_order_prefactors(beta: f64, t: Complex64) -> (Complex64, Complex64) {
    let x = -beta * beta * t.powu(6) / 9.0;
    let a = -t * t / 2.0 * (1.0 + f23(1.0, 5.0 / 6.0, 0.5, 7.0 / 6.0, 8.0 / 6.0, x));
    let b = t.powu(3) / 3.0 * f23(1.0, 5.0 / 6.0, 7.0 / 6.0, 8.0 / 6.0, 1.5, x);
    (a, b)
}

/// Power-series coefficients of `𝓔ₙ, 𝓕ₙ, 𝓖ₙ, 𝓗ₙ`, rows `n = 0..=L`,
/// columns `l = 0..=L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorTables {
    pub var: Var,
    pub max_power: usize,
    pub e: Vec<Vec<Complex64>>,
    pub f: Vec<Vec<Complex64>>,
    pub g: Vec<Vec<Complex64>>,
    pub h: Vec<Vec<Complex64>>,
}

/// Builds the operator tables from `triples[k]` (weight `k`). The triples
/// must reach every weight the `Mₙ, Nₙ` of row `L` touch.
pub fn operator_tables(
    triples: &[IntegralCoeffTriple],
    potential: &QuarticCoeffs,
    max_power: usize,
) -> Result<OperatorTables, PerturbationError> {
    let l = max_power;
    let var = triples.first().map(|t| t.var()).unwrap_or(Var::T);
    for t in triples.iter().take(l + 5) {
        if t.order() < l {
            return Err(PerturbationError::ShallowTriple {
                n: t.n,
                order: t.order(),
                power: l,
            });
        }
    }
    let row = |s: &crate::series::TruncatedSeries, f: Complex64| -> Vec<Complex64> {
        (0..=l).map(|k| s.coeff(k) * f).collect()
    };
    let mut tabs = OperatorTables {
        var,
        max_power: l,
        e: Vec::with_capacity(l + 1),
        f: Vec::with_capacity(l + 1),
        g: Vec::with_capacity(l + 1),
        h: Vec::with_capacity(l + 1),
    };
    for n in 0..=l {
        let (mut e, f) = if n == 0 {
            (vec![ZERO; l + 1], vec![ZERO; l + 1])
        } else {
            let t = triples.get(n - 1).filter(|t| t.n == n - 1).ok_or(PerturbationError::InsufficientDepth {
                needed: n - 1,
                source: HeunError::MissingTriple(n - 1),
            })?;
            let nf = n as f64;
            (row(&t.q, Complex64::new(-nf / 2.0, 0.0)), row(&t.r, Complex64::new(-nf, 0.0)))
        };
        if n + 1 <= l {
            e[n + 1] += 1.0 / (n as f64 + 1.0);
        }
        let m = lmn(potential, n, triples).map_err(|source| PerturbationError::InsufficientDepth {
            needed: n + potential.degree(),
            source,
        })?;
        tabs.e.push(e);
        tabs.f.push(f);
        tabs.g.push(row(&m.m, ONE));
        tabs.h.push(row(&m.n_coef, Complex64::new(2.0, 0.0)));
    }
    Ok(tabs)
}

/// `α…ξ` of one order, each indexed by power `k = 0..=L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub order: usize,
    pub var: Var,
    pub alpha: Vec<Complex64>,
    pub beta: Vec<Complex64>,
    pub gamma: Vec<Complex64>,
    pub delta: Vec<Complex64>,
    pub lambda: Vec<Complex64>,
    pub mu: Vec<Complex64>,
    pub nu: Vec<Complex64>,
    pub xi: Vec<Complex64>,
    /// Set when the table reaches its highest power, so that higher powers
    /// were dropped.
    pub truncated: bool,
}

fn horner(c: &[Complex64], x: Complex64) -> Complex64 {
    c.iter().rev().fold(ZERO, |acc, &a| acc * x + a)
}

fn deriv(c: &[Complex64]) -> Vec<Complex64> {
    let mut d: Vec<Complex64> = c.iter().enumerate().skip(1).map(|(k, &a)| a * k as f64).collect();
    d.push(ZERO);
    d
}

fn poly_mul_trunc(c: &[Complex64], p: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; c.len()];
    for (i, &pi) in p.iter().enumerate() {
        if pi == ZERO {
            continue;
        }
        for j in 0..c.len().saturating_sub(i) {
            out[i + j] += pi * c[j];
        }
    }
    out
}

fn vadd(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn vneg(a: &[Complex64]) -> Vec<Complex64> {
    a.iter().map(|x| -x).collect()
}

impl CoefficientTable {
    pub fn zero(order: usize, var: Var, max_power: usize) -> Self {
        let z = vec![ZERO; max_power + 1];
        Self {
            order,
            var,
            alpha: z.clone(),
            beta: z.clone(),
            gamma: z.clone(),
            delta: z.clone(),
            lambda: z.clone(),
            mu: z.clone(),
            nu: z.clone(),
            xi: z,
            truncated: false,
        }
    }

    /// Order 0: `α₀ = μ₀ = 1`.
    pub fn identity(var: Var, max_power: usize) -> Self {
        let mut t = Self::zero(0, var, max_power);
        t.alpha[0] = ONE;
        t.mu[0] = ONE;
        t
    }

    pub fn max_power(&self) -> usize {
        self.alpha.len() - 1
    }

    fn seqs(&self) -> [&Vec<Complex64>; 8] {
        [
            &self.alpha,
            &self.beta,
            &self.gamma,
            &self.delta,
            &self.lambda,
            &self.mu,
            &self.nu,
            &self.xi,
        ]
    }

    pub fn max_abs(&self) -> f64 {
        self.seqs()
            .iter()
            .flat_map(|s| s.iter())
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// `(c₁⁽ⁿ⁾, c₂⁽ⁿ⁾)` at `x`.
    pub fn correction(&self, c0: &C0Values, x: Complex64) -> (Complex64, Complex64) {
        let v = self.seqs().map(|s| horner(s, x));
        (
            v[0] * c0.c1 + v[1] * c0.c2 + v[2] * c0.dc1 + v[3] * c0.dc2,
            v[4] * c0.c1 + v[5] * c0.c2 + v[6] * c0.dc1 + v[7] * c0.dc2,
        )
    }

    /// Table of the derivative with respect to the expansion variable,
    /// using `c̈⁽⁰⁾ = -Q c⁽⁰⁾`. The top power is no longer exact.
    pub fn derivative(&self, potential: &QuarticCoeffs) -> Self {
        let mq: Vec<Complex64> = potential.a.iter().map(|a| -a).collect();
        // d/dx (a c + g ċ) = (a' - Q g) c + (a + g') ċ
        let part = |a: &[Complex64], g: &[Complex64]| (vadd(&deriv(a), &poly_mul_trunc(g, &mq)), vadd(a, &deriv(g)));
        let (alpha, gamma) = part(&self.alpha, &self.gamma);
        let (beta, delta) = part(&self.beta, &self.delta);
        let (lambda, nu) = part(&self.lambda, &self.nu);
        let (mu, xi) = part(&self.mu, &self.xi);
        Self {
            order: self.order,
            var: self.var,
            alpha,
            beta,
            gamma,
            delta,
            lambda,
            mu,
            nu,
            xi,
            truncated: true,
        }
    }

    /// Image under `(c₁, c₂) → (c₂, -c₁)`.
    pub fn swap(&self) -> Self {
        Self {
            order: self.order,
            var: self.var,
            alpha: self.mu.clone(),
            beta: vneg(&self.lambda),
            gamma: self.xi.clone(),
            delta: vneg(&self.nu),
            lambda: vneg(&self.beta),
            mu: self.alpha.clone(),
            nu: vneg(&self.delta),
            xi: self.gamma.clone(),
            truncated: self.truncated,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

/// Order `n + 1` from order `n`.
pub fn advance_order(table: &CoefficientTable, ops: &OperatorTables) -> Result<CoefficientTable, PerturbationError> {
    let l = ops.max_power;
    if table.max_power() > l {
        return Err(PerturbationError::TruncationOverflow {
            table: table.max_power() + 1,
            ops: l + 1,
        });
    }
    let mut out = CoefficientTable::zero(table.order + 1, table.var, l);
    // Σ_j (a_j X_jk + b_j Y_jk)
    let combo = |a: &[Complex64], x: &[Vec<Complex64>], b: &[Complex64], y: &[Vec<Complex64>], sign: f64| {
        let mut r = vec![ZERO; l + 1];
        for j in 0..a.len() {
            let (aj, bj) = (a[j], b[j]);
            if aj == ZERO && bj == ZERO {
                continue;
            }
            for k in 0..=l {
                r[k] += aj * x[j][k] + bj * y[j][k];
            }
        }
        r.iter().map(|v| v * sign).collect::<Vec<_>>()
    };
    let t = table;
    out.alpha = combo(&t.lambda, &ops.e, &t.nu, &ops.g, 1.0);
    out.beta = combo(&t.mu, &ops.e, &t.xi, &ops.g, 1.0);
    out.gamma = combo(&t.lambda, &ops.f, &t.nu, &ops.h, 1.0);
    out.delta = combo(&t.mu, &ops.f, &t.xi, &ops.h, 1.0);
    out.lambda = combo(&t.alpha, &ops.e, &t.gamma, &ops.g, -1.0);
    out.mu = combo(&t.beta, &ops.e, &t.delta, &ops.g, -1.0);
    out.nu = combo(&t.alpha, &ops.f, &t.gamma, &ops.h, -1.0);
    out.xi = combo(&t.beta, &ops.f, &t.delta, &ops.h, -1.0);
    out.truncated = t.truncated || out.seqs().iter().any(|s| s[l] != ZERO);
    Ok(out)
}

/// Partial sum of the expansion at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct Assembled {
    pub c1: Complex64,
    pub c2: Complex64,
    /// Derivatives with respect to the variable the caller asked for.
    pub c1_dot: Complex64,
    pub c2_dot: Complex64,
    /// `(c₁⁽ⁿ⁾, c₂⁽ⁿ⁾)` for every order, without the coupling power.
    pub order_terms: Vec<(Complex64, Complex64)>,
    /// `|coupling|ⁿ · max(|c₁⁽ⁿ⁾|, |c₂⁽ⁿ⁾|)`.
    pub order_magnitudes: Vec<f64>,
    /// False when the last order exceeds `1e-3` of the partial sum.
    pub converged: bool,
}

/// `Σₙ couplingⁿ c⁽ⁿ⁾(x)` over `tables` with derivative tables `dtables`.
pub fn assemble(
    tables: &[CoefficientTable],
    dtables: &[CoefficientTable],
    c0: &C0Values,
    coupling: Complex64,
    x: Complex64,
) -> Assembled {
    let mut c = (ZERO, ZERO);
    let mut dc = (ZERO, ZERO);
    let mut order_terms = Vec::with_capacity(tables.len());
    let mut order_magnitudes = Vec::with_capacity(tables.len());
    let mut kn = ONE;
    for (t, dt) in tables.iter().zip(dtables) {
        let v = t.correction(c0, x);
        let dv = dt.correction(c0, x);
        c = (c.0 + kn * v.0, c.1 + kn * v.1);
        dc = (dc.0 + kn * dv.0, dc.1 + kn * dv.1);
        order_magnitudes.push(kn.norm() * v.0.norm().max(v.1.norm()));
        order_terms.push(v);
        kn *= coupling;
    }
    let total = c.0.norm().max(c.1.norm());
    let last = order_magnitudes.last().copied().unwrap_or(0.0);
    let converged = tables.len() <= 1 || last <= CONVERGENCE_RATIO * total;
    Assembled {
        c1: c.0,
        c2: c.1,
        c1_dot: dc.0,
        c2_dot: dc.1,
        order_terms,
        order_magnitudes,
        converged,
    }
}

/// `z = g(t + A₀/A₁)` with `g = e^{iπ/3} A₁^{1/3}`, so that
/// `ÿ + (A₁t + A₀)y = 0` becomes `y'' - z y = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AiryMap {
    pub g: Complex64,
    pub shift: Complex64,
}

impl AiryMap {
    pub fn new(a0: Complex64, a1: Complex64) -> Result<Self, PerturbationError> {
        if a1 == ZERO {
            return Err(PerturbationError::ZeroA1);
        }
        Ok(Self {
            g: Complex64::from_polar(1.0, PI / 3.0) * a1.powf(1.0 / 3.0),
            shift: a0 / a1,
        })
    }

    pub fn z(&self, t: f64) -> Complex64 {
        self.g * (t + self.shift)
    }
}

/// Operator tables and coefficient tables of one regime.
#[derive(Clone, Debug)]
pub struct RegimeExpansion {
    pub regime: Regime,
    /// Potential in the expansion variable.
    pub potential: QuarticCoeffs,
    pub map: Option<AiryMap>,
    pub triples: Vec<IntegralCoeffTriple>,
    pub ops: OperatorTables,
    /// Orders `0..=N`.
    pub tables: Vec<CoefficientTable>,
    dtables: Vec<CoefficientTable>,
}

/// Fixed sub-intervals of `t` where each regime's potential stands in for
/// the full quartic at default parameters.
pub fn validity_window(regime: Regime) -> (f64, f64) {
    match regime {
        Regime::Airy => (-0.3, 0.3),
        Regime::QuarticBessel => (1.2, 1.6),
        Regime::GenericSeries => (-1.0, 1.0),
    }
}

impl RegimeExpansion {
    fn build(
        regime: Regime,
        potential: QuarticCoeffs,
        map: Option<AiryMap>,
        triples: Vec<IntegralCoeffTriple>,
        max_order: usize,
        max_power: usize,
    ) -> Result<Self, PerturbationError> {
        let ops = operator_tables(&triples, &potential, max_power)?;
        let mut tables = vec![CoefficientTable::identity(ops.var, max_power)];
        for _ in 0..max_order {
            let next = advance_order(tables.last().expect("non-empty"), &ops)?;
            tables.push(next);
        }
        let dtables = tables.iter().map(|t| t.derivative(&potential)).collect();
        Ok(Self {
            regime,
            potential,
            map,
            triples,
            ops,
            tables,
            dtables,
        })
    }

    /// Full quartic `Q(t)` with IVP-normalized series triples.
    pub fn generic(quartic: &QuarticCoeffs, max_order: usize, max_power: usize) -> Result<Self, PerturbationError> {
        let order = max_power + ORDER_HEADROOM;
        let triples = (0..=max_power + 4)
            .map(|n| rn_series(quartic, n, order))
            .collect::<Result<Vec<_>, _>>()?;
        Self::build(Regime::GenericSeries, *quartic, None, triples, max_order, max_power)
    }

    /// `Q = β²t⁴`. The triples are the IVP-normalized ones, which coincide
    /// with the `₂F₃` closed forms for `n ≡ 0, 1, 2 (mod 6)` and keep every
    /// table triangular in the power index.
    pub fn quartic_bessel(beta: f64, max_order: usize, max_power: usize) -> Result<Self, PerturbationError> {
        quartic_pair(beta).map_err(HeunError::from)?;
        let q = QuarticCoeffs::pure_quartic(beta);
        let order = max_power + ORDER_HEADROOM;
        let triples = (0..=max_power + 4)
            .map(|n| rn_series(&q, n, order).map(|t| t.with_regime(Regime::QuarticBessel)))
            .collect::<Result<Vec<_>, _>>()?;
        Self::build(Regime::QuarticBessel, q, None, triples, max_order, max_power)
    }

    /// `Q = A₁t + A₀` in the Airy variable, with exact polynomial triples.
    pub fn airy(a0: Complex64, a1: Complex64, max_order: usize, max_power: usize) -> Result<Self, PerturbationError> {
        let map = AiryMap::new(a0, a1)?;
        let triples = (0..=max_power + 4).map(|n| rn_airy(n, max_power + 6)).collect();
        let potential = QuarticCoeffs::from_re([0.0, -1.0, 0.0, 0.0, 0.0]);
        Self::build(Regime::Airy, potential, Some(map), triples, max_order, max_power)
    }

    /// The regime's expansion for the parabolic model.
    pub fn for_model(
        regime: Regime,
        params: &ModelParams,
        sweep: &SweepParams,
        max_order: usize,
        max_power: usize,
    ) -> Result<Self, PerturbationError> {
        let q = quartic_coeffs(sweep, params)?;
        match regime {
            Regime::GenericSeries => Self::generic(&q, max_order, max_power),
            Regime::QuarticBessel => Self::quartic_bessel(sweep.beta, max_order, max_power),
            Regime::Airy => Self::airy(q.a[0], q.a[1], max_order, max_power),
        }
    }

    pub fn max_order(&self) -> usize {
        self.tables.len() - 1
    }

    /// Potential in `t` that this regime solves exactly.
    pub fn t_potential(&self) -> QuarticCoeffs {
        match self.map {
            Some(m) => {
                // A₁ = -g³, A₀ = A₁ · shift
                let a1 = -m.g * m.g * m.g;
                QuarticCoeffs::linear(a1 * m.shift, a1)
            }
            None => self.potential,
        }
    }

    /// Expansion parameter for a physical coupling `κ`.
    pub fn coupling(&self, kappa: f64) -> Complex64 {
        match self.map {
            Some(m) => kappa / m.g,
            None => Complex64::new(kappa, 0.0),
        }
    }

    /// Expansion variable at physical time `t`.
    pub fn variable(&self, t: f64) -> Complex64 {
        match self.map {
            Some(m) => m.z(t),
            None => Complex64::new(t, 0.0),
        }
    }

    /// A fundamental pair of the regime's equation in its own variable.
    pub fn natural_pair(&self) -> Box<dyn FundamentalPair> {
        match self.regime {
            Regime::Airy => Box::new(AiryPair),
            Regime::QuarticBessel => {
                let beta = self.potential.a[4].re.sqrt();
                Box::new(quartic_pair(beta).expect("validated at construction"))
            }
            Regime::GenericSeries => Box::new(SeriesPair::new(self.potential, 4 * self.ops.max_power + 40)),
        }
    }

    /// Partial sum through order `n_max` at physical time `t`; derivatives
    /// are with respect to `t`.
    pub fn evaluate(
        &self,
        pair: &dyn FundamentalPair,
        init: &InitialCombination,
        kappa: f64,
        t: f64,
        n_max: usize,
    ) -> Assembled {
        debug_assert!(self.accepts(pair), "pair solves a different equation");
        let x = self.variable(t);
        let c0 = init.c0(&pair.eval(x));
        let n = (n_max + 1).min(self.tables.len());
        let mut a = assemble(&self.tables[..n], &self.dtables[..n], &c0, self.coupling(kappa), x);
        if let Some(m) = self.map {
            a.c1_dot *= m.g;
            a.c2_dot *= m.g;
        }
        a
    }

    /// Whether `pair` solves the unperturbed equation of this expansion.
    pub fn accepts(&self, pair: &dyn FundamentalPair) -> bool {
        pair.var() == self.potential_var() && pair.potential() == self.potential
    }

    fn potential_var(&self) -> Var {
        self.tables[0].var
    }

    /// Order-`n` term and its derivative in the expansion variable.
    pub fn order_term(&self, n: usize, c0: &C0Values, x: Complex64) -> ((Complex64, Complex64), (Complex64, Complex64)) {
        (self.tables[n].correction(c0, x), self.dtables[n].correction(c0, x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heun_integrals::rn_series_table;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn quartic() -> QuarticCoeffs {
        QuarticCoeffs::new([c(1.25), Complex64::new(0.0, -2.0), c(1.0), c(0.0), c(1.0)])
    }

    #[test]
    fn row_zero_and_airy_row_one() {
        let q = quartic();
        let triples = rn_series_table(&q, 14, 22).unwrap();
        let ops = operator_tables(&triples, &q, 10).unwrap();
        assert_eq!(ops.e[0][1], ONE);
        assert!(ops.e[0].iter().enumerate().all(|(k, v)| k == 1 || *v == ZERO));
        assert!(ops.f[0].iter().all(|v| *v == ZERO));
        let airy = RegimeExpansion::airy(c(1.0), Complex64::new(0.0, -2.0), 2, 10).unwrap();
        assert_eq!(airy.ops.f[1][0], ONE);
    }

    #[test]
    fn g_rows_are_m_coefficients() {
        let q = quartic();
        let triples = rn_series_table(&q, 14, 22).unwrap();
        let ops = operator_tables(&triples, &q, 10).unwrap();
        let m1 = lmn(&q, 1, &triples).unwrap();
        for k in 0..=10 {
            assert_eq!(ops.g[1][k], m1.m.coeff(k));
            assert_eq!(ops.h[1][k], 2.0 * m1.n_coef.coeff(k));
        }
    }

    #[test]
    fn shallow_triples_are_rejected() {
        let q = quartic();
        let triples = rn_series_table(&q, 9, 16).unwrap();
        assert!(matches!(operator_tables(&triples, &q, 8), Err(PerturbationError::InsufficientDepth { .. })));
        assert!(matches!(operator_tables(&triples, &q, 20), Err(PerturbationError::ShallowTriple { .. })));
    }

    #[test]
    fn first_two_orders() {
        let ex = RegimeExpansion::generic(&quartic(), 2, 20).unwrap();
        let t1 = &ex.tables[1];
        assert_eq!(t1.beta[1], ONE);
        assert_eq!(t1.lambda[1], -ONE);
        let others = [&t1.alpha, &t1.gamma, &t1.delta, &t1.mu, &t1.nu, &t1.xi];
        assert!(others.iter().all(|s| s.iter().all(|v| *v == ZERO)));
        let zero = CoefficientTable::zero(3, Var::T, 20);
        assert_eq!(advance_order(&zero, &ex.ops).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn swap_commutes_with_advance() {
        let ex = RegimeExpansion::generic(&quartic(), 3, 16).unwrap();
        for t in &ex.tables {
            let a = advance_order(&t.swap(), &ex.ops).unwrap();
            let b = advance_order(t, &ex.ops).unwrap().swap();
            assert_eq!(a, b);
            assert_eq!(t.swap().swap(), *t);
        }
    }

    #[test]
    fn json_round_trip() {
        let ex = RegimeExpansion::airy(c(1.0), Complex64::new(0.0, -2.0), 2, 8).unwrap();
        let s = ex.tables[2].to_json();
        assert_eq!(CoefficientTable::from_json(&s).unwrap(), ex.tables[2]);
    }

    #[test]
    fn zero_coupling_is_zeroth_order() {
        let ex = RegimeExpansion::generic(&quartic(), 3, 20).unwrap();
        let pair = ex.natural_pair();
        let init = InitialCombination::new(c(1.0), c(0.5), Complex64::new(0.0, 1.0), c(0.0));
        let a = ex.evaluate(pair.as_ref(), &init, 0.0, 0.4, 3);
        let c0 = init.c0(&pair.eval_re(0.4));
        assert_eq!((a.c1, a.c2), (c0.c1, c0.c2));
        assert!(a.converged);
    }

    #[test]
    fn airy_map_turns_linear_potential_into_airy() {
        let (a0, a1) = (c(1.25), Complex64::new(0.0, -2.0));
        let ex = RegimeExpansion::airy(a0, a1, 1, 8).unwrap();
        let q = ex.t_potential();
        assert!((q.a[0] - a0).norm() < 1e-14 && (q.a[1] - a1).norm() < 1e-14);
        assert!((ex.coupling(0.1) * ex.map.unwrap().g - 0.1).norm() < 1e-15);
        assert!(AiryMap::new(a0, ZERO).is_err());
    }
}
