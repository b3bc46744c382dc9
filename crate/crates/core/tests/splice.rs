use floer_core::poly::{q, q_frac, UniPoly, Q};
use floer_core::puiseux::*;
use floer_core::splice::*;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
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
    "(y^2 - x^3)*(y^2 - x^5)",
    "x*y*(x - y)",
    "y^4 - x^5",
    "x^2*y + y^4",
    "y*(y^2 - x^4)",
    "(y^2 - x^3)*(y - x^2)",
    "y^3 - x^7",
    "x^2 - y^8",
    "x^2 - y^6",
];

/// Milnor number by an intersection count along the branches:
/// `μ = (f, f_y) − (f, x) + 1`, evaluated with the full expansions.
fn milnor_number(text: &str) -> i64 {
    let f = parse_poly(text).unwrap();
    let e = newton_puiseux(&f, 64).unwrap_or_else(|err| panic!("{text}: {err}"));
    let fy = e.poly.diff_y();
    let mut total = 0i64;
    for b in &e.branches {
        let mut zd = vec![Q::zero(); b.d as usize + 1];
        zd[b.d as usize] = Q::one();
        let ord = fy.compose(&UniPoly::from_coeffs(zd), &b.as_poly()).order().expect("f_y vanishes on a branch") as u64;
        if let Some(t) = b.truncation_order {
            assert!(ord < t, "{text}: expansion too short to read off (f, f_y)");
        }
        // in the branch parameter t the order of x = t^d is d
        total += ord as i64 - b.d as i64;
    }
    total + 1
}

fn diagram(text: &str) -> (SpliceDiagram, usize) {
    let (_, data) = puiseux_data(&parse_poly(text).unwrap(), 64).unwrap_or_else(|err| panic!("{text}: {err}"));
    let g = build_diagram(&data).unwrap_or_else(|e| panic!("{text}: {e}"));
    (collapse(&g).unwrap(), data.len())
}

#[test]
fn milnor_oracle_on_known_values() {
    assert_eq!(milnor_number("x^2 + y^3"), 2);
    assert_eq!(milnor_number("x^2 - y^2"), 1);
    assert_eq!(milnor_number("x*y*(x - y)"), 4);
    assert_eq!(milnor_number("y*(y^2 - x^3)"), 7);
    assert_eq!(milnor_number("(y^2 - x^3)^2 - 4*x^5*y - x^7"), 16);
    assert_eq!(milnor_number("x^2 - y^8"), 7);
}

#[test]
fn corpus_diagrams_satisfy_structural_properties() {
    for text in CORPUS {
        let (_, data) = puiseux_data(&parse_poly(text).unwrap(), 64).unwrap_or_else(|err| panic!("{text}: {err}"));
        let raw = build_diagram(&data).unwrap();
        assert!(raw.check_a_properties(false).is_empty(), "{text}: {:?}", raw.check_a_properties(false));
        assert_eq!(raw.arrowheads().len(), data.len(), "{text}");
        let (g, _) = diagram(text);
        assert!(g.check_a_properties(true).is_empty(), "{text}: {:?}", g.check_a_properties(true));
        assert!(g.check_b_properties().is_empty(), "{text}: {:?}", g.check_b_properties());
    }
}

#[test]
fn fibre_euler_characteristic_is_one_minus_milnor() {
    for text in CORPUS {
        let (g, _) = diagram(text);
        let set = characteristic_set(&g).unwrap();
        let chi: i64 = set.iter().map(|c| c.chi).sum();
        assert_eq!(chi, 1 - milnor_number(text), "{text}");
    }
}

#[test]
fn characteristic_entries_are_coherent() {
    for text in CORPUS {
        let (g, branches) = diagram(text);
        let set = characteristic_set(&g).unwrap();
        let mut boundary = 0u64;
        for c in &set {
            assert!(c.ell.is_positive(), "{text}: {c}");
            assert_eq!(c.h % c.d, 0, "{text}: {c}");
            if c.chi < 0 {
                assert!(c.ell.is_integer());
                let twice_genus = 2 - c.chi / c.d as i64 - (c.h / c.d) as i64;
                assert!(twice_genus >= 0 && twice_genus % 2 == 0, "{text}: {c}");
                boundary += c.h;
            } else {
                assert_eq!(c.h, 2 * c.d, "{text}: {c}");
            }
        }
        // each annulus glues two circles; the rest are the link components
        let annulus_circles: u64 = set.iter().filter(|c| c.chi == 0).map(|c| c.h).sum();
        if !g.is_gamma_star {
            assert_eq!(boundary + branches as u64, annulus_circles, "{text}");
        }
        for b in g.boxes() {
            assert!(ellb_identity_holds(&g, b), "{text}: box {b}");
            // h_b counts the circles where twist annuli meet the piece
            let h = set.iter().find(|c| c.origin == Origin::Box(b)).unwrap().h;
            let around: u64 = set
                .iter()
                .filter_map(|c| match c.origin {
                    Origin::Edge(e) if g.edges[e].ends.contains(&b) => Some(c.d),
                    _ => None,
                })
                .sum();
            assert_eq!(h, around, "{text}: box {b}");
        }
    }
}

#[test]
fn twist_models_are_normalized_and_compatible() {
    for text in CORPUS {
        let (g, _) = diagram(text);
        for t in twist_models(&g).unwrap() {
            assert!(t.bezout_holds(), "{text}: {t:?}");
            assert!(t.n_prime >= 0);
            let (r0, r1) = t.boundary_rotations();
            assert!(r0 >= Q::zero() && r0 < Q::one() && r1 >= Q::zero() && r1 < Q::one());
            // the rotation at the box end is compatible with the period there
            let scaled = r0 * q(t.ell_b as i64);
            assert!(scaled.is_integer(), "{text}: {t:?}");
            for p in t.fixed_points() {
                assert!(p > Q::zero() && p < Q::one());
                assert!(t.shift(&p).is_integer(), "{text}: fixed height {p} does not fix the circle");
            }
        }
    }
}

#[test]
fn two_cusp_example() {
    let (g, _) = diagram("(y^2 - x^3)*(y^2 - x^5)");
    let set = characteristic_set(&g).unwrap();
    let periodic: Vec<(i64, Q)> = set.iter().filter(|c| c.chi < 0).map(|c| (c.chi, c.ell.clone())).collect();
    assert_eq!(periodic, vec![(-8, q(12)), (-8, q(16))]);
}

#[test]
fn e7_example() {
    let (g, _) = diagram("y*(y^2 - x^3)");
    let set = characteristic_set(&g).unwrap();
    assert_eq!((set[0].chi, set[0].ell.clone()), (-6, q(9)));
}

#[test]
fn a_k_family() {
    for k in 1..=12u32 {
        let text = if k % 2 == 0 { format!("x^2 + y^{}", k + 1) } else { format!("x^2 - y^{}", k + 1) };
        let (g, _) = diagram(&text);
        let set = characteristic_set(&g).unwrap();
        if k == 1 {
            assert!(g.is_gamma_star);
            assert_eq!(set[0].tuple(), (0, 1, 2, q(1)));
            continue;
        }
        let b = &set[0];
        let expected_ell = 2 * (k as i64 + 1) / (k as i64 + 1).gcd(&2);
        assert_eq!((b.chi, b.ell.clone()), (1 - k as i64, q(expected_ell)), "A_{k}");
        if k % 2 == 0 {
            assert_eq!(set[1].ell, q_frac(1, expected_ell));
        }
    }
}

fn arb_branch() -> impl Strategy<Value = (i64, u32, u32)> {
    (prop::sample::select(vec![-2i64, -1, 1, 2, 3]), 1u32..4, 2u32..8).prop_filter("coprime", |(_, p, k)| num_integer::gcd(*p, *k) == 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_curves_give_consistent_diagrams(branches in prop::collection::vec(arb_branch(), 1..4)) {
        let mut f = BivariatePoly::constant(Q::one());
        let mut seen = std::collections::BTreeSet::new();
        for &(a, p, k) in &branches {
            if !seen.insert((a.pow(p), p, k)) {
                return Ok(());
            }
            f = f.mul(&BivariatePoly::y().pow(p).sub(&BivariatePoly::monomial(k, 0, q(a).pow(p as i32))));
        }
        let text = f.to_string();
        let Ok((_, data)) = puiseux_data(&f, 64) else { return Ok(()); };
        let g = collapse(&build_diagram(&data).unwrap()).unwrap();
        prop_assert!(g.check_a_properties(true).is_empty());
        prop_assert!(g.check_b_properties().is_empty());
        let set = characteristic_set(&g).unwrap();
        let chi: i64 = set.iter().map(|c| c.chi).sum();
        prop_assert_eq!(chi, 1 - milnor_number(&text));
        for t in twist_models(&g).unwrap() {
            prop_assert!(t.bezout_holds());
            prop_assert!((t.boundary_rotations().0 * q(t.ell_b as i64)).is_integer());
        }
    }
}
