use num_complex::Complex64 as C;
use ptlz::heun_integrals::{rn_airy, rn_series};
use ptlz::model::{ModelParams, QuarticCoeffs, SweepParams};
use ptlz::oracle::{integrate_coupled_heun, Span};
use ptlz::perturbation::{
    first_order, quartic_second_order_prefactors, second_order, validity_window, InitialCombination,
    PerturbationError, RegimeExpansion,
};
use ptlz::specfun::Regime;
use ptlz::perturbation::{advance_order, CoefficientTable};
use ptlz::series::Var;
use proptest::prelude::*;

fn c(x: f64) -> C {
    C::new(x, 0.0)
}

fn init() -> InitialCombination {
    InitialCombination::new(c(1.0), C::new(0.2, 0.5), C::new(0.0, 0.3), c(0.8))
}

fn model(kappa: f64) -> (ModelParams, SweepParams) {
    (
        ModelParams::new(1.5, 0.5, kappa, 1.0, 0.1, 0.1).unwrap(),
        SweepParams::new(0.5, 1.0).unwrap(),
    )
}

fn expansion(regime: Regime, kappa: f64, order: usize) -> RegimeExpansion {
    let (p, s) = model(kappa);
    let power = if regime == Regime::QuarticBessel { 90 } else { 40 };
    RegimeExpansion::for_model(regime, &p, &s, order, power).unwrap()
}

fn points(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

/// Max deviation over the regime window between the order-`n` partial sum
/// and the coupled system integrated from the partial sum at `t = 0`.
fn deviation(regime: Regime, kappa: f64, n: usize) -> f64 {
    let ex = expansion(regime, kappa, n);
    let pair = ex.natural_pair();
    let a = ex.evaluate(pair.as_ref(), &init(), kappa, 0.0, n);
    let (lo, hi) = validity_window(regime);
    let tr = integrate_coupled_heun(
        &ex.t_potential(),
        kappa,
        [a.c1, a.c2],
        [a.c1_dot, a.c2_dot],
        Span::around(0.0, lo.min(0.0), hi),
        1e-12,
    )
    .unwrap();
    points(lo, hi, 41)
        .map(|t| {
            let s = ex.evaluate(pair.as_ref(), &init(), kappa, t, n);
            let y = tr.evaluate(t);
            (s.c1 - y[0]).norm().max((s.c2 - y[1]).norm())
        })
        .fold(0.0, f64::max)
}

fn slope(regime: Regime, n: usize) -> f64 {
    let ks = [0.02, 0.04, 0.08];
    let xs: Vec<f64> = ks.iter().map(|k: &f64| k.ln()).collect();
    let ys: Vec<f64> = ks.iter().map(|&k| deviation(regime, k, n).ln()).collect();
    let mx = xs.iter().sum::<f64>() / 3.0;
    let my = ys.iter().sum::<f64>() / 3.0;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

fn grid(regime: Regime) -> Vec<f64> {
    let (lo, hi) = validity_window(regime);
    points(lo, hi, 21).collect()
}

#[test]
fn partial_sums_converge_at_order_plus_one() {
    for r in [Regime::GenericSeries, Regime::Airy, Regime::QuarticBessel] {
        let p1 = slope(r, 1);
        let p2 = slope(r, 2);
        assert!((p1 - 2.0).abs() < 0.3, "{r} N=1 slope {p1}");
        assert!((p2 - 3.0).abs() < 0.3, "{r} N=2 slope {p2}");
    }
}

#[test]
fn error_decreases_with_order() {
    for r in [Regime::GenericSeries, Regime::Airy, Regime::QuarticBessel] {
        let d: Vec<f64> = (0..=3).map(|n| deviation(r, 0.04, n)).collect();
        assert!(d.windows(2).all(|w| w[1] < w[0]), "{r}: {d:?}");
    }
}

#[test]
fn low_orders_match_closed_forms() {
    for r in [Regime::GenericSeries, Regime::Airy, Regime::QuarticBessel] {
        let ex = expansion(r, 0.05, 2);
        let pair = ex.natural_pair();
        for t in grid(r) {
            let x = ex.variable(t);
            let c0 = init().c0(&pair.eval(x));
            let (o1, _) = ex.order_term(1, &c0, x);
            let (o2, _) = ex.order_term(2, &c0, x);
            let w1 = first_order(&c0, x);
            let w2 = second_order(&c0, &ex.triples[0], x).unwrap();
            assert!((o1.0 - w1.0).norm() < 1e-10 && (o1.1 - w1.1).norm() < 1e-10, "{r} t {t}");
            assert!((o2.0 - w2.0).norm() < 1e-10 && (o2.1 - w2.1).norm() < 1e-10, "{r} t {t}");
            if r == Regime::QuarticBessel {
                let (a, b) = quartic_second_order_prefactors(1.0, x);
                let want = (a * c0.c1 + b * c0.dc1, a * c0.c2 + b * c0.dc2);
                assert!((o2.0 - want.0).norm() < 1e-10 && (o2.1 - want.1).norm() < 1e-10, "t {t}");
            }
        }
    }
}

#[test]
fn airy_second_order_uses_constant_r0() {
    let ex = expansion(Regime::Airy, 0.05, 2);
    let t2 = &ex.tables[2];
    assert_eq!(t2.alpha[2], c(-0.5));
    assert_eq!(t2.gamma[0], c(-1.0));
    assert_eq!(t2.mu[2], c(-0.5));
    assert_eq!(t2.xi[0], c(-1.0));
    let z = C::new(0.3, -0.2);
    let c0 = init().c0(&ex.natural_pair().eval(z));
    let (o2, _) = ex.order_term(2, &c0, z);
    assert!((o2.0 - (-0.5 * z * z * c0.c1 - c0.dc1)).norm() < 1e-14);
}

#[test]
fn every_order_solves_its_driven_equation() {
    let h = 1e-4;
    for r in [Regime::GenericSeries, Regime::Airy, Regime::QuarticBessel] {
        let ex = expansion(r, 0.05, 4);
        let pair = ex.natural_pair();
        for t in grid(r) {
            let x = ex.variable(t);
            let q = ex.potential.eval(x);
            let at = |x: C, n: usize| ex.order_term(n, &init().c0(&pair.eval(x)), x);
            for n in 1..=4 {
                let (mid, _) = at(x, n);
                let (hi, _) = at(x + h, n);
                let (lo, _) = at(x - h, n);
                let (_, prev) = at(x, n - 1);
                let d1 = (hi.0 - 2.0 * mid.0 + lo.0) / (h * h) + q * mid.0 - 2.0 * prev.1;
                let d2 = (hi.1 - 2.0 * mid.1 + lo.1) / (h * h) + q * mid.1 + 2.0 * prev.0;
                assert!(d1.norm() < 1e-6 && d2.norm() < 1e-6, "{r} n {n} t {t}: {d1} {d2}");
            }
        }
    }
}

#[test]
fn first_order_examples() {
    let pair = expansion(Regime::GenericSeries, 0.05, 1).natural_pair();
    let only_y2 = InitialCombination::new(c(1.0), c(0.0), c(0.0), c(1.0));
    let c0 = only_y2.c0(&pair.eval_re(0.3));
    let (a, b) = first_order(&c0, c(0.3));
    assert!((a - 0.3 * pair.eval_re(0.3).y2).norm() < 1e-15);
    assert_eq!(b, -0.3 * c0.c1);
    assert_eq!(first_order(&c0, c(0.0)), (c(0.0), c(0.0)));
    let (q, _) = quartic_second_order_prefactors(1.0, c(0.0));
    assert_eq!(q, c(0.0));
}

#[test]
fn order_one_partial_sum() {
    let kappa = 0.07;
    let ex = expansion(Regime::GenericSeries, kappa, 3);
    let pair = ex.natural_pair();
    for t in grid(Regime::GenericSeries) {
        let s = ex.evaluate(pair.as_ref(), &init(), kappa, t, 1);
        let c0 = init().c0(&pair.eval_re(t));
        let want = (c0.c1 + kappa * t * c0.c2, c0.c2 - kappa * t * c0.c1);
        assert!((s.c1 - want.0).norm() < 1e-13 && (s.c2 - want.1).norm() < 1e-13);
        assert_eq!(s.order_magnitudes.len(), 2);
    }
}

#[test]
fn convergence_flag_tracks_last_order() {
    let ex = expansion(Regime::GenericSeries, 0.01, 4);
    let pair = ex.natural_pair();
    assert!(ex.evaluate(pair.as_ref(), &init(), 0.01, 0.5, 4).converged);
    assert!(!ex.evaluate(pair.as_ref(), &init(), 3.0, 0.5, 4).converged);
}

#[test]
fn second_order_needs_weight_zero() {
    let q = QuarticCoeffs::pure_quartic(1.0);
    let c0 = init().c0(&expansion(Regime::QuarticBessel, 0.05, 1).natural_pair().eval_re(0.2));
    let r = second_order(&c0, &rn_series(&q, 1, 12).unwrap(), c(0.2));
    assert_eq!(r, Err(PerturbationError::WrongWeight(1)));
    assert!(second_order(&c0, &rn_airy(0, 8), c(0.2)).is_ok());
}

fn table_strategy(power: usize) -> impl Strategy<Value = CoefficientTable> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8 * (power + 1)).prop_map(move |v| {
        let mut t = CoefficientTable::zero(3, Var::T, power);
        let seq: Vec<C> = v.into_iter().map(|(a, b)| C::new(a, b)).collect();
        let mut chunks = seq.chunks(power + 1).map(|c| c.to_vec());
        for s in [
            &mut t.alpha,
            &mut t.beta,
            &mut t.gamma,
            &mut t.delta,
            &mut t.lambda,
            &mut t.mu,
            &mut t.nu,
            &mut t.xi,
        ] {
            *s = chunks.next().unwrap();
        }
        t
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn swap_exchanges_the_recursions(t in table_strategy(12)) {
        let ex = RegimeExpansion::generic(&QuarticCoeffs::new([c(1.0), C::new(0.0, -2.0), c(2.0), c(0.0), c(1.0)]), 1, 12).unwrap();
        let a = advance_order(&t.swap(), &ex.ops).unwrap();
        let b = advance_order(&t, &ex.ops).unwrap().swap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn advance_is_linear(t in table_strategy(10), s in -2.0f64..2.0) {
        let ex = RegimeExpansion::airy(c(1.0), C::new(0.0, -2.0), 1, 10).unwrap();
        let mut scaled = t.clone();
        for v in scaled.alpha.iter_mut().chain(scaled.beta.iter_mut()).chain(scaled.gamma.iter_mut()).chain(scaled.delta.iter_mut())
            .chain(scaled.lambda.iter_mut()).chain(scaled.mu.iter_mut()).chain(scaled.nu.iter_mut()).chain(scaled.xi.iter_mut()) {
            *v *= s;
        }
        let a = advance_order(&scaled, &ex.ops).unwrap();
        let b = advance_order(&t, &ex.ops).unwrap();
        for (x, y) in a.beta.iter().zip(&b.beta).chain(a.nu.iter().zip(&b.nu)) {
            prop_assert!((x - s * y).norm() <= 1e-12 * (1.0 + y.norm()));
        }
    }
}

#[test]
fn oversized_table_is_rejected() {
    let ex = RegimeExpansion::airy(c(1.0), C::new(0.0, -2.0), 1, 8).unwrap();
    let t = CoefficientTable::identity(Var::Z, 12);
    assert!(matches!(advance_order(&t, &ex.ops), Err(PerturbationError::TruncationOverflow { .. })));
}

#[test]
fn pairs_must_match_the_expansion() {
    let regimes = [Regime::GenericSeries, Regime::Airy, Regime::QuarticBessel];
    let ex: Vec<_> = regimes.iter().map(|&r| expansion(r, 0.05, 1)).collect();
    for (i, a) in ex.iter().enumerate() {
        for (j, b) in ex.iter().enumerate() {
            assert_eq!(a.accepts(b.natural_pair().as_ref()), i == j, "{} vs {}", regimes[i], regimes[j]);
        }
    }
}
