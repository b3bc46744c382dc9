use floer_core::monodromy::*;
use floer_core::puiseux::{parse_poly, puiseux_data};
use floer_core::surface_homology::{homology_from_complex, triangulate, Ranks};
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
];

#[test]
fn corpus_monodromies_verify() {
    for text in CORPUS {
        let d = decomposition_of(text, 64).unwrap();
        let report = verify_monodromy(&d);
        assert!(report.all_passed(), "{text}: {:?}", report.failures());
        assert!(hf_plus(&d).unwrap().0.is_zero());
        assert!(d.fiber.chi <= 0, "{text}");
        let (_, data) = puiseux_data(&parse_poly(text).unwrap(), 64).unwrap();
        assert_eq!(d.fiber.boundary, data.len(), "{text}");
        assert_eq!(2 - 2 * d.fiber.genus as i64 - d.fiber.boundary as i64, d.fiber.chi, "{text}");
    }
}

#[test]
fn gluing_mirrors_a_connected_tree() {
    for text in CORPUS {
        let d = decomposition_of(text, 64).unwrap();
        let nodes = d.pieces.len() + d.fiber.boundary;
        // pieces plus boundary circles, joined by annuli, form a tree
        assert_eq!(d.annuli.len() + 1, nodes, "{text}");
        let mut parent: Vec<usize> = (0..nodes).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        let idx = |e: AnnulusEnd| match e {
            AnnulusEnd::Piece(i) => i,
            AnnulusEnd::Boundary(b) => d.pieces.len() + b,
        };
        for ends in &d.gluing {
            let (a, b) = (find(&mut parent, idx(ends[0])), find(&mut parent, idx(ends[1])));
            assert_ne!(a, b, "{text}: cycle in gluing");
            parent[a] = b;
        }
    }
}

#[test]
fn ak_family_fibres() {
    for k in 1..=10u32 {
        let d = decomposition_of(&ak_polynomial(k), 64).unwrap();
        let kappa = if k % 2 == 0 { 1 } else { 2 };
        assert_eq!(d.fiber.chi, 1 - k as i64, "A_{k}");
        assert_eq!(d.fiber.boundary, kappa);
        assert_eq!(d.fiber.genus, if k % 2 == 0 { k as usize / 2 } else { (k as usize - 1) / 2 });
        assert!(verify_monodromy(&d).all_passed());
    }
}

#[test]
fn ak_four_connected_complement() {
    let e = EmbeddingSpec { complement: vec![ComplementPiece { genus: 2, attach: vec![0] }], disks: 0 };
    let d = decomposition_of(&ak_polynomial(4), 64).unwrap();
    let genus = e.closed_genus(&d.fiber).unwrap();
    assert_eq!(genus, 4);
    let hf = hf_ak(4, &e).unwrap();
    assert_eq!(hf.ranks, Ranks::new(0, 4, 1));
    assert_eq!(hf.ranks.euler_characteristic(), (2 - 2 * genus as i64) - d.fiber.chi);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn embedding_euler_identity(idx in 0..CORPUS.len(), genera in prop::collection::vec(0usize..3, 1..4), split in any::<u64>(), extra in 0usize..3) {
        let d = decomposition_of(CORPUS[idx], 64).unwrap();
        let kappa = d.fiber.boundary;
        // distribute circles over complement pieces (some possibly capped by disks)
        let mut pieces: Vec<ComplementPiece> = genera.iter().map(|&g| ComplementPiece { genus: g + extra % 2, attach: vec![] }).collect();
        let mut disks = 0;
        for c in 0..kappa {
            let slot = (split >> (3 * c)) as usize % (pieces.len() + 1);
            if slot == pieces.len() { disks += 1 } else { pieces[slot].attach.push(c) }
        }
        pieces.retain(|p| !p.attach.is_empty());
        let e = EmbeddingSpec { complement: pieces, disks };
        let Ok(genus) = e.closed_genus(&d.fiber) else { return Ok(()); };
        let hf = hf_of_monodromy(&d, &e).unwrap();
        prop_assert_eq!(hf.ranks.euler_characteristic(), (2 - 2 * genus as i64) - d.fiber.chi);
        // chain-level oracle for the complement part
        let oracle = homology_from_complex(&triangulate(&e.complement_pair())).unwrap().ranks;
        prop_assert_eq!(hf.ranks, oracle + Ranks::new(disks, 0, 0));
    }
}
