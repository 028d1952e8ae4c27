//! Property-based checks across the module boundaries.

use proptest::prelude::*;

use fracexpand::expansion::{coefficients_by_recursion, coefficients_by_series_match, route_discrepancy};
use fracexpand::expr::{derivative_table, mixed_partial, parse, Var};
use fracexpand::lattice::{build_lattice, Alpha, Exponent};
use fracexpand::series::{expand_q, QMode};

fn alpha_strategy() -> impl Strategy<Value = Alpha> {
    prop_oneof![
        Just(Alpha::new(1, 3).unwrap()),
        Just(Alpha::new(2, 5).unwrap()),
        Just(Alpha::new(1, 2).unwrap()),
        Just(Alpha::new(3, 5).unwrap()),
        Just(Alpha::new(7, 10).unwrap()),
        Just(Alpha::new(1, 4).unwrap()),
        Just(Alpha::new(5, 7).unwrap()),
    ]
}

/// Polynomial source text in x and y with small rational coefficients.
fn poly_source() -> impl Strategy<Value = String> {
    let term = (-15i32..=15, 0u32..=2, 0u32..=2).prop_map(|(c, px, py)| {
        let mut s = format!("{}", c as f64 / 10.0);
        for _ in 0..px {
            s.push_str("*x");
        }
        for _ in 0..py {
            s.push_str("*y");
        }
        s
    });
    prop::collection::vec(term, 1..4).prop_map(|ts| ts.join(" + "))
}

/// Expression text drawn from a smooth grammar (safe to evaluate and
/// differentiate anywhere).
fn smooth_source() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x".to_string()),
        Just("y".to_string()),
        (-20i32..=20).prop_map(|c| format!("{}", c as f64 / 8.0)),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} * {b})")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("(-{a})")),
            (inner, 2u32..=3).prop_map(|(a, k)| format!("({a}^{k})")),
        ]
    })
}

/// Brute-force lattice over numerators scaled by q (same arithmetic as
/// the acceptance gate, kept independent of the library's Exponent).
fn brute_force(alpha: &Alpha, n: u32) -> Option<(u32, Vec<i64>)> {
    let (p, q) = (alpha.p() as i64, alpha.q() as i64);
    let mut m: i64 = 0;
    while (m + 1) * q < n as i64 * p {
        m += 1;
    }
    if m == 0 {
        return None;
    }
    let mut nums = std::collections::BTreeSet::new();
    for i in 0..=(m + 1) {
        for j in 0..=((m + 1) * q / p + 1) {
            let num = i * q + j * p;
            if num > 0 && num < m * q {
                nums.insert(num);
            }
        }
    }
    Some((m as u32, nums.into_iter().collect()))
}

proptest! {
    #[test]
    fn exponent_canonical_and_value((i, j, alpha) in (0i64..50, 0u64..50, alpha_strategy())) {
        let e = Exponent::new(i, j, &alpha);
        prop_assert!(e.j() < alpha.q(), "canonical j must satisfy j < q");
        let direct = i as f64 + j as f64 * alpha.value();
        prop_assert!((e.value() - direct).abs() < 1e-9 * (1.0 + direct.abs()));
    }

    #[test]
    fn exponent_addition_commutes(
        (i1, j1, i2, j2, alpha) in (0i64..20, 0u64..20, 0i64..20, 0u64..20, alpha_strategy())
    ) {
        let a = Exponent::new(i1, j1, &alpha);
        let b = Exponent::new(i2, j2, &alpha);
        prop_assert_eq!(a.add(&b, &alpha), b.add(&a, &alpha));
    }

    #[test]
    fn lattice_matches_brute_force((alpha, n) in (alpha_strategy(), 1u32..=10)) {
        match (build_lattice(&alpha, n), brute_force(&alpha, n)) {
            (Err(_), None) => {}
            (Ok(l), Some((m, nums))) => {
                prop_assert_eq!(l.m, m);
                let got: Vec<i64> = l.gammas.iter().map(|g| {
                    use num_traits::ToPrimitive;
                    let scaled = g.ratio() * num_rational::BigRational::from_integer(
                        num_bigint::BigInt::from(alpha.q()));
                    scaled.to_integer().to_i64().unwrap()
                }).collect();
                prop_assert_eq!(got, nums);
            }
            (lib, brute) => prop_assert!(
                false, "existence mismatch: lib={} brute={}", lib.is_ok(), brute.is_some()
            ),
        }
    }

    #[test]
    fn parser_display_roundtrip(src in smooth_source()) {
        let e = parse(&src).unwrap();
        let printed = e.to_string();
        let reparsed = parse(&printed).unwrap();
        prop_assert_eq!(printed, reparsed.to_string());
    }

    #[test]
    fn clairaut_symmetry(
        (src, x, y) in (smooth_source(), -1.0f64..1.0, -1.0f64..1.0)
    ) {
        let f = parse(&src).unwrap();
        let xy = f.diff(Var::X).diff(Var::Y).eval(x, y).unwrap();
        let yx = f.diff(Var::Y).diff(Var::X).eval(x, y).unwrap();
        let scale = 1.0 + xy.abs().max(yx.abs());
        prop_assert!((xy - yx).abs() <= 1e-9 * scale, "xy={xy} yx={yx}");
    }

    #[test]
    fn ad_matches_finite_differences(
        (src, x, y) in (smooth_source(), -1.0f64..1.0, -1.0f64..1.0)
    ) {
        let f = parse(&src).unwrap();
        let exact = mixed_partial(&f, 1, 0, x, y).unwrap();
        prop_assume!(exact.is_finite() && exact.abs() >= 0.5 && exact.abs() < 1e6);
        let h = 1e-5 * (1.0 + x.abs());
        let fd = (f.eval(x + h, y).unwrap() - f.eval(x - h, y).unwrap()) / (2.0 * h);
        prop_assert!(
            ((exact - fd) / exact).abs() < 1e-4,
            "src={src} exact={exact} fd={fd}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dp_matches_exhaustive_words(
        (src, c0, alpha) in (poly_source(), -10i32..=10, alpha_strategy())
    ) {
        let f = parse(&src).unwrap();
        let c0 = c0 as f64 / 10.0;
        let n = 4;
        let table = derivative_table(&f, n, c0).unwrap();
        let lattice = match build_lattice(&alpha, n) {
            Ok(l) => l,
            Err(_) => return Ok(()),
        };
        let weight: Vec<(Exponent, f64)> = lattice
            .gammas
            .iter()
            .enumerate()
            .map(|(k, g)| (g.clone(), 0.3 + 0.1 * k as f64))
            .collect();
        let cutoff = Exponent::from_int(lattice.m as i64 + 1, &alpha);
        let dp = expand_q(&table, &weight, &alpha, n, &cutoff, QMode::Dp).unwrap();
        let ex = expand_q(&table, &weight, &alpha, n, &cutoff, QMode::Exhaustive).unwrap();
        for (e, c) in dp.terms() {
            prop_assert!((c - ex.coeff(e)).abs() < 1e-10 * (1.0 + c.abs()),
                "mismatch at {}: {} vs {}", e.value(), c, ex.coeff(e));
        }
        for (e, c) in ex.terms() {
            prop_assert!((c - dp.coeff(e)).abs() < 1e-10 * (1.0 + c.abs()));
        }
    }

    #[test]
    fn s_prime_matches_finite_differences(
        (src, c0, alpha, x) in (poly_source(), -10i32..=10, alpha_strategy(), 0.1f64..1.0)
    ) {
        let f = parse(&src).unwrap();
        let c0 = c0 as f64 / 10.0;
        let n = 5;
        let table = derivative_table(&f, n, c0).unwrap();
        let lattice = match build_lattice(&alpha, n) {
            Ok(l) => l,
            Err(_) => return Ok(()),
        };
        let mut e = coefficients_by_recursion(&table, &lattice, n).unwrap();
        e.c0 = c0;
        let exact = e.eval_prime(x).unwrap();
        prop_assume!(exact.abs() > 1e-3);
        let h = 1e-6 * x;
        let fd = (e.eval(x + h) - e.eval(x - h)) / (2.0 * h);
        prop_assert!(((exact - fd) / exact).abs() < 1e-6,
            "f={} x={}: S'={} fd={}", src, x, exact, fd);
    }

    #[test]
    fn factor_y_minus_c0_kills_all_coefficients(
        (src, c0, alpha) in (poly_source(), -10i32..=10, alpha_strategy())
    ) {
        // f(x, c0) = 0 identically => y = c0 and every c_j vanishes
        let c0 = c0 as f64 / 10.0;
        let f = parse(&format!("(y - {c0}) * ({src})")).unwrap();
        let n = 5;
        let table = derivative_table(&f, n, c0).unwrap();
        let lattice = match build_lattice(&alpha, n) {
            Ok(l) => l,
            Err(_) => return Ok(()),
        };
        let e = coefficients_by_recursion(&table, &lattice, n).unwrap();
        for c in &e.coeffs {
            prop_assert!(c.abs() <= 1e-12, "f={} c={}", src, c);
        }
    }

    #[test]
    fn coefficient_routes_agree(
        (src, c0, alpha) in (poly_source(), -10i32..=10, alpha_strategy())
    ) {
        let f = parse(&src).unwrap();
        let c0 = c0 as f64 / 10.0;
        let n = 5;
        let table = derivative_table(&f, n, c0).unwrap();
        let lattice = match build_lattice(&alpha, n) {
            Ok(l) => l,
            Err(_) => return Ok(()),
        };
        let rec = coefficients_by_recursion(&table, &lattice, n).unwrap();
        let (ser, _) = coefficients_by_series_match(&table, &lattice, n).unwrap();
        prop_assert!(route_discrepancy(&rec, &ser) < 1e-10,
            "f={} c0={} alpha={}: {:?} vs {:?}", src, c0, alpha, rec.coeffs, ser.coeffs);
    }
}
