use std::f64::consts::PI;

use hfpquad::cli::output::canonical_json;
use hfpquad::harness::{convergence_table, HarnessCase};
use hfpquad::ie_solver::{dirichlet_kernel, dirichlet_kernel_deriv, epsilon_weight};
use hfpquad::oracles::{
    default_interval, hfp_reference, GeometricKernelCase, Profile, ReferenceOptions, ThetaCase, TrigPolynomial,
};
use hfpquad::quadrature::{correction_sum, plain_trap_sum, t_hat, RulePath, RuleSpec};
use proptest::prelude::*;

const TAU: f64 = 2.0 * PI;

fn trig() -> impl Strategy<Value = TrigPolynomial> {
    (1usize..=6).prop_flat_map(|deg| {
        (
            prop::collection::vec(-1.0..1.0f64, deg + 1),
            prop::collection::vec(-1.0..1.0f64, deg),
        )
            .prop_map(|(c, s)| TrigPolynomial::new(TAU, c, s).unwrap())
    })
}

fn case(m: u32, t: f64, poly: TrigPolynomial) -> ThetaCase {
    let (a, b) = default_interval(t, TAU);
    ThetaCase::new(m, t, a, b, Profile::Trig(poly)).unwrap()
}

/// `u(2t - x)` as a trigonometric polynomial.
fn reflect(poly: &TrigPolynomial, t: f64) -> TrigPolynomial {
    // cos(k(2t - x)) = cos(2kt)cos(kx) + sin(2kt)sin(kx)
    // sin(k(2t - x)) = sin(2kt)cos(kx) - cos(2kt)sin(kx)
    let deg = poly.degree();
    let mut cos = vec![poly.cos.first().copied().unwrap_or(0.0)];
    let mut sin = Vec::new();
    for k in 1..=deg {
        let a = poly.cos.get(k).copied().unwrap_or(0.0);
        let b = poly.sin.get(k - 1).copied().unwrap_or(0.0);
        let (s2, c2) = (2.0 * k as f64 * t).sin_cos();
        cos.push(a * c2 + b * s2);
        sin.push(a * s2 - b * c2);
    }
    TrigPolynomial::new(poly.period, cos, sin).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reflection_symmetry(poly in trig(), t in -3.0..3.0f64, m in 1u32..=4, s in 0u32..=2) {
        prop_assume!(!(m == 1 && s == 2));
        let n = 32;
        let direct = case(m, t, poly.clone());
        let mirrored = case(m, t, reflect(&poly, t));
        let spec = RuleSpec::preferred(m, s, n).unwrap();
        let a = t_hat(&spec, &direct.integrand(m as usize + 1).unwrap()).unwrap();
        let b = t_hat(&spec, &mirrored.integrand(m as usize + 1).unwrap()).unwrap();
        let sign = if m % 2 == 1 { -1.0 } else { 1.0 };
        prop_assert!((a - sign * b).abs() <= 1e-9 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn compact_equals_generic(poly in trig(), t in -3.0..3.0f64, n in 4usize..24, s in 1u32..=2) {
        let c = case(3, t, poly);
        let f = c.integrand(4).unwrap();
        let compact = t_hat(&RuleSpec::new(3, s, n, RulePath::Compact).unwrap(), &f).unwrap();
        let generic = t_hat(&RuleSpec::new(3, s, n, RulePath::Generic).unwrap(), &f).unwrap();
        let h = TAU / n as f64;
        let scale: f64 = (1..n << s).map(|j| c.f(t + j as f64 * h / (1 << s) as f64).abs()).sum::<f64>() * h;
        prop_assert!((compact - generic).abs() <= 1e-13 * scale.max(1.0));
    }

    #[test]
    fn epsilon_branches_are_disjoint(n in 1usize..16, i in 1i64..64, j in 1i64..64) {
        let size = 4 * n as i64;
        prop_assume!(i <= size && j <= size);
        let w = epsilon_weight(i, j);
        prop_assert!(matches!(w, 8 | -2 | 0));
        if w == 8 {
            prop_assert!((i - j) % 2 == 0);
        }
        if w == -2 {
            prop_assert!((i - j) % 2 != 0);
        }
        prop_assert_eq!(epsilon_weight(i, j), epsilon_weight(j, i));
    }

    #[test]
    fn cardinal_interpolation(k in 1usize..=8, period in 0.5..10.0f64, values in prop::collection::vec(-5.0..5.0f64, 16)) {
        let n = 2 * k;
        let h = period / n as f64;
        for s in 0..n {
            let sum: f64 = (0..n).map(|j| dirichlet_kernel(n, (s as f64 - j as f64) * h, period).unwrap() * values[j]).sum();
            prop_assert!((sum - values[s]).abs() <= 1e-13 * values.iter().map(|v| v.abs()).fold(1.0, f64::max));
        }
    }

    #[test]
    fn derivative_finite_difference_order(k in 2usize..=8, y in -3.0..3.0f64, order in 1usize..=3) {
        let n = 2 * k;
        let d = |y: f64| dirichlet_kernel_deriv(order - 1, n, y, TAU).unwrap();
        let exact = dirichlet_kernel_deriv(order, n, y, TAU).unwrap();
        let fd = |h: f64| (d(y + h) - d(y - h)) / (2.0 * h);
        let (h1, h2) = (0.02 / n as f64, 0.01 / n as f64);
        let (e1, e2) = ((fd(h1) - exact).abs(), (fd(h2) - exact).abs());
        // skip points where the difference is already at roundoff
        prop_assume!(e1 > 1e-8 * exact.abs().max(1.0));
        prop_assert!((e1 / e2).log2() >= 1.9, "e1 {e1} e2 {e2}");
    }
}

#[test]
fn report_json_round_trip() {
    let case = HarnessCase::geometric(0.4, 1.0, 1).unwrap();
    let report = convergence_table(&case, &[10, 20, 30]).unwrap();
    let text = hfpquad::cli::output::to_canonical_json(&report).unwrap();
    let parsed: hfpquad::harness::ConvergenceReport = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed, report);
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(canonical_json(&value), text);
}

#[test]
fn reference_is_stable_in_smoothing_order() {
    for m in 1..=4 {
        let c = case(m, 0.8, TrigPolynomial::new(TAU, vec![0.4, -0.3, 0.2], vec![0.7, 0.1, -0.5]).unwrap());
        let derivs = c.derivatives(40);
        let g = |x: f64| c.g(x);
        let base = ReferenceOptions::default();
        let more = ReferenceOptions { smoothing_order: base.smoothing_order + 2, ..base };
        let a = hfp_reference(&g, &derivs, m, c.a, c.b, c.t, &base).unwrap();
        let b = hfp_reference(&g, &derivs, m, c.a, c.b, c.t, &more).unwrap();
        assert!((a - b).abs() < 1e-10 * a.abs().max(1.0), "m={m}: {a} vs {b}");
    }
}

#[test]
fn corrected_trapezoid_beats_eighth_power() {
    let c = GeometricKernelCase::new(0.3, 1.0).unwrap();
    let f = c.integrand().unwrap();
    let exact = c.exact().unwrap();
    let err = |n| (plain_trap_sum(&f, n).unwrap() - correction_sum(&f, n).unwrap() - exact).abs();
    let pairs = [(8, 16), (16, 32)];
    for (n1, n2) in pairs {
        let (e1, e2) = (err(n1), err(n2));
        // pre-floor pairs only
        if e2 > 1e-12 {
            assert!(e2 / e1 < 2f64.powi(-8), "n={n1}->{n2}: {e1:e} -> {e2:e}");
        }
    }
    assert!(err(8) > 1e-12);
}

#[test]
fn half_errors_decrease_monotonically() {
    for s in 0..=2 {
        let report = convergence_table(&HarnessCase::geometric(0.5, 1.0, s).unwrap(), &[10, 20, 30, 40]).unwrap();
        for w in report.rows.windows(2) {
            assert!(w[1].error < w[0].error, "s={s}: {:?}", report.rows);
        }
    }
}

#[test]
fn rules_agree_within_factor_four() {
    for eta in [0.3, 0.4, 0.5] {
        let reports: Vec<_> = (0..=2)
            .map(|s| convergence_table(&HarnessCase::geometric(eta, 1.0, s).unwrap(), &[10, 20]).unwrap())
            .collect();
        for i in 0..2 {
            let errs: Vec<f64> = reports.iter().map(|r| r.rows[i].error).collect();
            if errs.iter().any(|e| *e < 100.0 * reports[0].rows[i].floor) {
                continue;
            }
            let max = errs.iter().copied().fold(0.0, f64::max);
            let min = errs.iter().copied().fold(f64::INFINITY, f64::min);
            assert!(max / min <= 4.0, "eta={eta}: {errs:?}");
        }
    }
}
