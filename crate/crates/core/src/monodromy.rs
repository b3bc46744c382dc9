//! The geometric monodromy of a plane curve singularity as a map of finite
//! type, its verification, and the Floer homology of its extensions to
//! closed surfaces.

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::GF2Matrix;
use crate::poly::Q;
use crate::puiseux::{parse_poly, puiseux_data, PuiseuxError};
use crate::splice::{build_diagram, characteristic_set, collapse, twist_models, CharEntry, Origin, SpliceDiagram, SpliceError, TwistModel};
use crate::surface_homology::{homology_closed_form, ActionMatrix, GradedZ2Module, Ranks, SurfaceComponent, SurfacePair};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MonodromyError {
    #[error(transparent)]
    Splice(#[from] SpliceError),
    #[error(transparent)]
    Puiseux(#[from] PuiseuxError),
    #[error("bad embedding: {0}")]
    BadEmbedding(String),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FiberTopology {
    pub genus: usize,
    pub boundary: usize,
    pub chi: i64,
}

/// One end of an annulus: a periodic piece or a boundary circle of the fiber.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", content = "index", rename_all = "snake_case")]
pub enum AnnulusEnd {
    Piece(usize),
    Boundary(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MilnorDecomposition {
    pub pieces: Vec<CharEntry>,
    pub annuli: Vec<(CharEntry, TwistModel)>,
    /// ends of every annulus, in the order of `annuli`
    pub gluing: Vec<[AnnulusEnd; 2]>,
    pub fiber: FiberTopology,
}

/// Decomposition of the fiber read off a collapsed diagram.
pub fn assemble(g: &SpliceDiagram) -> Result<MilnorDecomposition, MonodromyError> {
    let set = characteristic_set(g)?;
    let models = twist_models(g)?;
    let pieces: Vec<CharEntry> = set.iter().filter(|c| matches!(c.origin, Origin::Box(_))).cloned().collect();
    let box_ids: Vec<usize> = pieces.iter().map(|c| if let Origin::Box(b) = c.origin { b } else { unreachable!() }).collect();
    let mut annuli = Vec::new();
    let mut gluing = Vec::new();
    for (entry, model) in set.iter().filter(|c| !matches!(c.origin, Origin::Box(_))).zip(models) {
        let ends = if g.is_gamma_star {
            [AnnulusEnd::Boundary(0), AnnulusEnd::Boundary(1)]
        } else {
            g.edges[model.edge].ends.map(|v| match box_ids.iter().position(|&b| b == v) {
                Some(i) => AnnulusEnd::Piece(i),
                None => AnnulusEnd::Boundary(g.vertices[v].branch.unwrap_or(0)),
            })
        };
        annuli.push((entry.clone(), model));
        gluing.push(ends);
    }
    let chi: i64 = pieces.iter().map(|c| c.chi).sum();
    let boundary = g.arrowheads().len();
    let twice = 2 - chi - boundary as i64;
    if twice < 0 || twice % 2 != 0 {
        return Err(SpliceError::PropertyViolation { property: "genus".into(), detail: format!("χ = {chi}, κ = {boundary}") }.into());
    }
    Ok(MilnorDecomposition { pieces, annuli, gluing, fiber: FiberTopology { genus: twice as usize / 2, boundary, chi } })
}

/// Decomposition straight from a polynomial.
pub fn decomposition_of(poly: &str, order_bound: u64) -> Result<MilnorDecomposition, MonodromyError> {
    let f = parse_poly(poly)?;
    let (_, data) = puiseux_data(&f, order_bound)?;
    assemble(&collapse(&build_diagram(&data)?)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub id: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    fn add(&mut self, id: &str, passed: bool, detail: String) {
        self.checks.push(Check { id: id.into(), passed, detail });
    }
}

/// Checks that the annuli have no interior fixed points (claim1), that
/// periodic pieces have period > 1 (claim2) and that all twists are
/// positive (claim3); then evaluates the Lefschetz number as the sum of χ
/// over components of period 1, which must vanish.
pub fn verify_monodromy(d: &MilnorDecomposition) -> VerificationReport {
    let mut r = VerificationReport::default();
    let with_fixed: Vec<String> =
        d.annuli.iter().filter(|(_, t)| !t.fixed_points().is_empty()).map(|(_, t)| format!("edge {}: {:?}", t.edge, t.fixed_points())).collect();
    r.add("claim1", with_fixed.is_empty(), if with_fixed.is_empty() { "no annulus has interior fixed points".into() } else { with_fixed.join(", ") });
    let short: Vec<String> = d.pieces.iter().filter(|c| c.chi < 0 && c.ell <= Q::one()).map(|c| c.to_string()).collect();
    r.add("claim2", short.is_empty(), if short.is_empty() { "every periodic piece has period > 1".into() } else { short.join(", ") });
    let negative: Vec<String> = d.annuli.iter().filter(|(c, _)| !c.ell.is_positive()).map(|(c, _)| c.to_string()).collect();
    r.add("claim3", negative.is_empty(), if negative.is_empty() { "all twists are positive".into() } else { negative.join(", ") });
    let lambda: i64 = d.pieces.iter().chain(d.annuli.iter().map(|(c, _)| c)).filter(|c| c.ell == Q::one()).map(|c| c.chi).sum();
    r.add("lefschetz", lambda == 0, format!("Λ = {lambda}"));
    let fix_is_boundary = r.all_passed();
    r.add("fix-boundary", fix_is_boundary, if fix_is_boundary { "fix(φ) = ∂M".into() } else { "not established".into() });
    r
}

/// A complement component: genus and the fiber boundary circles it caps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplementPiece {
    pub genus: usize,
    pub attach: Vec<usize>,
}

/// How the fiber sits in a closed surface: complement pieces plus `disks`
/// circles capped by disks (the circles no complement piece uses).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingSpec {
    pub complement: Vec<ComplementPiece>,
    #[serde(default)]
    pub disks: usize,
}

impl EmbeddingSpec {
    /// Genus of the closed surface, after checking the attachments.
    pub fn closed_genus(&self, fiber: &FiberTopology) -> Result<usize, MonodromyError> {
        let mut used = vec![false; fiber.boundary];
        for (i, piece) in self.complement.iter().enumerate() {
            if piece.attach.is_empty() {
                return Err(MonodromyError::BadEmbedding(format!("complement piece {i} attaches to no circle")));
            }
            for &c in &piece.attach {
                match used.get_mut(c) {
                    None => return Err(MonodromyError::BadEmbedding(format!("circle {c} does not exist (κ = {})", fiber.boundary))),
                    Some(true) => return Err(MonodromyError::BadEmbedding(format!("circle {c} is attached twice"))),
                    Some(u) => *u = true,
                }
            }
        }
        let free = used.iter().filter(|u| !**u).count();
        if free != self.disks {
            return Err(MonodromyError::BadEmbedding(format!("{free} circles are left for {} disks", self.disks)));
        }
        let chi = fiber.chi + self.disks as i64 + self.complement.iter().map(|p| 2 - 2 * p.genus as i64 - p.attach.len() as i64).sum::<i64>();
        let twice = 2 - chi;
        if twice < 4 || twice % 2 != 0 {
            return Err(MonodromyError::BadEmbedding(format!("closed surface has χ = {chi}, genus must be at least 2")));
        }
        Ok(twice as usize / 2)
    }

    /// The complement as a surface pair with every circle marked.
    pub fn complement_pair(&self) -> SurfacePair {
        SurfacePair::new(self.complement.iter().map(|p| SurfaceComponent::fully_marked(p.genus, p.attach.len())).collect())
    }
}

fn unit_and_top(ranks: Ranks) -> GradedZ2Module {
    let n = ranks.total();
    let mut m = GradedZ2Module::from_ranks(ranks);
    m.actions.insert("H^0:0".into(), ActionMatrix { degree: 0, matrix: GF2Matrix::identity(n) });
    m.actions.insert("H^2:0".into(), ActionMatrix { degree: 2, matrix: GF2Matrix::zeros(n, n) });
    m
}

/// `HF_*` of the monodromy extended by the identity: the homology of the
/// complement relative to its boundary, plus one degree-0 class per disk.
pub fn hf_of_monodromy(d: &MilnorDecomposition, e: &EmbeddingSpec) -> Result<GradedZ2Module, MonodromyError> {
    e.closed_genus(&d.fiber)?;
    let ranks = homology_closed_form(&e.complement_pair()) + Ranks::new(e.disks, 0, 0);
    Ok(unit_and_top(ranks))
}

/// Polynomial used for the A_k singularity: `x² + y^{k+1}` for even `k`,
/// `x² − y^{k+1}` (same germ over C, rational branches) for odd `k`.
pub fn ak_polynomial(k: u32) -> String {
    if k % 2 == 0 {
        format!("x^2 + y^{}", k + 1)
    } else {
        format!("x^2 - y^{}", k + 1)
    }
}

pub fn hf_ak(k: u32, e: &EmbeddingSpec) -> Result<GradedZ2Module, MonodromyError> {
    if k == 0 {
        return Err(MonodromyError::BadEmbedding("k must be positive".into()));
    }
    let d = decomposition_of(&ak_polynomial(k), 64)?;
    hf_of_monodromy(&d, e)
}

/// `HF_*(g, +)` vanishes once the monodromy is verified.
pub fn hf_plus(d: &MilnorDecomposition) -> Result<(GradedZ2Module, VerificationReport), MonodromyError> {
    let report = verify_monodromy(d);
    if !report.all_passed() {
        let failed: Vec<&str> = report.failures().iter().map(|c| c.id.as_str()).collect();
        return Err(MonodromyError::VerificationFailed(failed.join(", ")));
    }
    Ok((GradedZ2Module::zero(), report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{q, q_frac};

    #[test]
    fn trefoil_decomposition() {
        let d = decomposition_of("x^2 + y^3", 64).unwrap();
        assert_eq!(d.fiber, FiberTopology { genus: 1, boundary: 1, chi: -1 });
        assert_eq!(d.pieces[0].tuple(), (-1, 1, 1, q(6)));
        assert_eq!(d.annuli[0].0.tuple(), (0, 1, 2, q_frac(1, 6)));
        assert_eq!(d.gluing, vec![[AnnulusEnd::Piece(0), AnnulusEnd::Boundary(0)]]);
        assert!(verify_monodromy(&d).all_passed());
        assert!(hf_plus(&d).unwrap().0.is_zero());
    }

    #[test]
    fn node_is_a_dehn_twist() {
        let d = decomposition_of("x^2 - y^2", 64).unwrap();
        assert_eq!(d.fiber, FiberTopology { genus: 0, boundary: 2, chi: 0 });
        assert!(d.pieces.is_empty());
        assert!(verify_monodromy(&d).all_passed());
        let e = EmbeddingSpec { complement: vec![ComplementPiece { genus: 1, attach: vec![0, 1] }], disks: 0 };
        assert_eq!(e.closed_genus(&d.fiber).unwrap(), 2);
        assert_eq!(hf_of_monodromy(&d, &e).unwrap().ranks, Ranks::new(0, 3, 1));
    }

    #[test]
    fn trefoil_embeddings() {
        let d = decomposition_of("x^2 + y^3", 64).unwrap();
        let e = EmbeddingSpec { complement: vec![ComplementPiece { genus: 1, attach: vec![0] }], disks: 0 };
        assert_eq!(e.closed_genus(&d.fiber).unwrap(), 2);
        assert_eq!(hf_of_monodromy(&d, &e).unwrap().ranks, Ranks::new(0, 2, 1));
        let e3 = EmbeddingSpec { complement: vec![ComplementPiece { genus: 2, attach: vec![0] }], disks: 0 };
        assert_eq!(e3.closed_genus(&d.fiber).unwrap(), 3);
        assert_eq!(hf_of_monodromy(&d, &e3).unwrap().ranks, Ranks::new(0, 4, 1));
    }

    #[test]
    fn bad_embeddings() {
        let d = decomposition_of("x^2 + y^3", 64).unwrap();
        let twice = EmbeddingSpec { complement: vec![ComplementPiece { genus: 1, attach: vec![0, 0] }], disks: 0 };
        assert!(matches!(hf_of_monodromy(&d, &twice), Err(MonodromyError::BadEmbedding(_))));
        let disk = EmbeddingSpec { complement: vec![], disks: 1 };
        // capping the torus fiber gives genus 1 only
        assert!(matches!(hf_of_monodromy(&d, &disk), Err(MonodromyError::BadEmbedding(_))));
        let missing = EmbeddingSpec { complement: vec![], disks: 0 };
        assert!(matches!(hf_of_monodromy(&d, &missing), Err(MonodromyError::BadEmbedding(_))));
    }

    #[test]
    fn disks_add_degree_zero_classes() {
        let d = decomposition_of("x^2 + y^5", 64).unwrap();
        assert_eq!(d.fiber.genus, 2);
        let e = EmbeddingSpec { complement: vec![], disks: 1 };
        assert_eq!(hf_of_monodromy(&d, &e).unwrap().ranks, Ranks::new(1, 0, 0));
    }

    #[test]
    fn ak_one_is_the_dehn_twist() {
        let e = EmbeddingSpec { complement: vec![ComplementPiece { genus: 1, attach: vec![0, 1] }], disks: 0 };
        assert_eq!(hf_ak(1, &e).unwrap().ranks, Ranks::new(0, 3, 1));
    }
}
