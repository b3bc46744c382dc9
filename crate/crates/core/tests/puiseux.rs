use floer_core::poly::{q, UniPoly, Q};
use floer_core::puiseux::*;
use num_traits::{One, Zero};
use proptest::prelude::*;

const CORPUS: &[&str] = &[
    "x^2 - y^2",
    "x^2 + y^3",
    "x^2 + y^5",
    "x^2 - y^4",
    "y^3 - x^4",
    "y^3 - x^5",
    "y*(y^2 - x^3)",
    "(y^2 - x^3)^2 - 4*x^5*y - x^7",
    "(y^2 - x^3)*(y^2 - 4*x^3)",
    "x*y*(x - y)",
    "y^4 - x^5",
    "x^2*y + y^4",
    "y*(y^2 - x^4)",
    "(y^2 - x^3)*(y - x^2)",
    "y^3 - x^7",
];

/// `f(z^d, P(z))` computed by univariate composition, independently of the
/// expansion's own bookkeeping.
fn residual_order(f: &BivariatePoly, s: &FracPowerSeries) -> Option<usize> {
    let mut zd = vec![Q::zero(); s.d as usize + 1];
    zd[s.d as usize] = Q::one();
    f.compose(&UniPoly::from_coeffs(zd), &s.as_poly()).order()
}

#[test]
fn corpus_residuals_vanish_to_order_64() {
    for text in CORPUS {
        let f = parse_poly(text).unwrap();
        let e = newton_puiseux(&f, 64).unwrap_or_else(|err| panic!("{text}: {err}"));
        for b in &e.branches {
            assert!(b.is_well_formed(), "{text}: {b:?}");
            if let Some(order) = residual_order(&e.poly, b) {
                assert!(order >= 64, "{text}: residual order {order} for {b:?}");
            }
        }
    }
}

#[test]
fn weierstrass_degree_matches_branch_denominators() {
    for text in CORPUS {
        let f = parse_poly(text).unwrap();
        let e = newton_puiseux(&f, 64).unwrap();
        let y_order = e.poly.terms().keys().filter(|k| k.0 == 0).map(|k| k.1).min().unwrap();
        let total: u64 = e.branches.iter().map(|b| b.d).sum();
        assert_eq!(total, y_order as u64, "{text}");
    }
}

#[test]
fn corpus_truncates_to_separated_data() {
    for text in CORPUS {
        let f = parse_poly(text).unwrap();
        let (_, data) = puiseux_data(&f, 64).unwrap();
        for (i, a) in data.iter().enumerate() {
            for b in &data[i + 1..] {
                assert!(!equivalent(a, b), "{text}");
            }
        }
    }
}

#[test]
fn cable_expansion() {
    let f = parse_poly("(y^2 - x^3)^2 - 4*x^5*y - x^7").unwrap();
    let (e, data) = puiseux_data(&f, 64).unwrap();
    assert_eq!(e.branches.len(), 1);
    assert_eq!(data, vec![FracPowerSeries::new(vec![(q(1), 6), (q(1), 7)], 4)]);
}

#[test]
fn small_order_bound_still_separates_or_reports() {
    let f = parse_poly("(y - x^2 - x^3)*(y - x^2 + x^3)").unwrap();
    // the branches share their first term; a tiny bound cannot separate them
    assert_eq!(newton_puiseux(&f, 3), Err(PuiseuxError::OrderBoundTooSmall(3)));
    assert!(newton_puiseux(&f, 64).is_ok());
}

fn arb_branch() -> impl Strategy<Value = (i64, u32, u32)> {
    // y^p = a^p x^k, i.e. y = a x^{k/p}, for coprime (k, p)
    (prop::sample::select(vec![-3i64, -2, -1, 1, 2, 3]), 1u32..3, 1u32..6)
        .prop_filter("coprime", |(_, p, k)| num_integer::gcd(*p, *k) == 1 && *k > 0)
}

fn branch_poly(a: i64, p: u32, k: u32) -> BivariatePoly {
    let yp = BivariatePoly::y().pow(p);
    let rhs = BivariatePoly::monomial(k, 0, q(a).pow(p as i32));
    yp.sub(&rhs)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn random_products_expand_exactly(branches in prop::collection::vec(arb_branch(), 1..4)) {
        let mut f = BivariatePoly::constant(Q::one());
        let mut seen = std::collections::BTreeSet::new();
        for &(a, p, k) in &branches {
            // distinct branch sets only (y^2 = 4x^3 and y^2 = 4x^3 with a = ±2 coincide)
            let key = (a.pow(p), p, k);
            if !seen.insert(key) {
                return Ok(());
            }
            f = f.mul(&branch_poly(a, p, k));
        }
        if f.coeff(1, 0) != Q::zero() || f.coeff(0, 1) != Q::zero() {
            return Ok(());
        }
        let e = newton_puiseux(&f, 40).unwrap();
        let expected: u64 = seen.iter().map(|_| 1u64).sum();
        prop_assert_eq!(e.branches.len() as u64, expected);
        for b in &e.branches {
            if let Some(order) = residual_order(&e.poly, b) {
                prop_assert!(order >= 40);
            }
        }
    }

    #[test]
    fn parse_print_fixed_point(coeffs in prop::collection::vec((-5i64..6, 1i64..4, 0u32..4, 0u32..4), 0..6)) {
        let f = BivariatePoly::from_terms(coeffs.iter().map(|&(n, d, i, j)| ((i, j), Q::new(n.into(), d.into()))));
        let printed = f.to_string();
        let g = parse_poly(&printed).unwrap();
        prop_assert_eq!(&g, &f);
        prop_assert_eq!(g.to_string(), printed);
    }

    #[test]
    fn truncation_respects_equivalence(coeffs in prop::collection::vec(-4i64..5, 1..5), d in prop::sample::select(vec![2u64, 4, 6])) {
        let terms: Vec<(Q, u64)> = coeffs.iter().enumerate().filter(|(_, c)| **c != 0).map(|(i, c)| (q(*c), i as u64 + 1)).collect();
        let s = FracPowerSeries::new(terms.clone(), d);
        let conj = FracPowerSeries::new(terms.iter().map(|(a, n)| (if n % 2 == 1 { -a.clone() } else { a.clone() }, *n)).collect(), d);
        prop_assert!(equivalent(&s, &conj));
        for k in 0..=terms.len() {
            prop_assert!(equivalent(&s.truncate(k), &conj.truncate(k)));
        }
    }
}
