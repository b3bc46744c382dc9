//! Diffeomorphisms of finite type: periodic pieces glued along twist and
//! flip-twist annuli. Validation, the fixed part Σ₀ with its marked
//! boundary, and the Floer homology it determines.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{BitVec, GF2Matrix};
use crate::surface_homology::{
    cap_product, circle_edges, cohomology_from_complex, homology_closed_form, homology_from_complex, ActionMatrix, ChainComplexZ2,
    GradedZ2Module, HomologyError, Ranks, Simplices, SurfaceBuilder, SurfaceComponent, SurfacePair,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FiniteTypeError {
    #[error("invalid map: {0}")]
    Invalid(ValidationReport),
    #[error("the surface is not closed")]
    NotClosed,
    #[error("closed surface of genus {0} < 2")]
    GenusTooSmall(usize),
    #[error(transparent)]
    Homology(#[from] HomologyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrbitSurface {
    pub genus: usize,
    pub boundary: usize,
}

/// `copies` copies of a genus-`genus` surface with `boundary` circles each,
/// on which the map is periodic of period `period` (1 for the identity).
/// Boundary slots of copy `c` are numbered `c·boundary ..`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicPiece {
    pub id: String,
    pub genus: usize,
    pub boundary: usize,
    pub period: u64,
    #[serde(default = "one")]
    pub copies: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbit: Option<OrbitSurface>,
    /// multiplicities of the exceptional orbits
    #[serde(default)]
    pub orbits: Vec<u64>,
    #[serde(default)]
    pub fixed_points: u64,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

impl PeriodicPiece {
    pub fn is_identity(&self) -> bool {
        self.period == 1
    }

    pub fn slots(&self) -> usize {
        self.copies * self.boundary
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.copies as i64 * (2 - 2 * self.genus as i64 - self.boundary as i64)
    }

    fn is_disk(&self) -> bool {
        self.genus == 0 && self.boundary == 1
    }

    fn is_cylinder(&self) -> bool {
        self.genus == 0 && self.boundary == 2 && self.copies == 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwistKind {
    Twist,
    FlipTwist,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Negative,
}

/// `annuli` cyclically permuted annuli; side `k` of annulus `i` attaches to
/// slot `attach[k].1 + i` of piece `attach[k].0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistRegion {
    pub id: String,
    #[serde(default = "one")]
    pub annuli: usize,
    pub kind: TwistKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign: Option<Sign>,
    #[serde(default = "yes")]
    pub interior_fixed_free: bool,
    pub attach: [(String, usize); 2],
}

impl TwistRegion {
    pub fn is_positive_twist(&self) -> bool {
        self.kind == TwistKind::Twist && self.sign == Some(Sign::Positive)
    }

    fn sides(&self) -> impl Iterator<Item = (usize, &str, usize)> + '_ {
        (0..2).flat_map(move |k| (0..self.annuli).map(move |i| (k, self.attach[k].0.as_str(), self.attach[k].1 + i)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteTypeMap {
    pub pieces: Vec<PeriodicPiece>,
    #[serde(default)]
    pub twists: Vec<TwistRegion>,
    pub closed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub clause: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, clause: &str, message: impl Into<String>) {
        self.violations.push(Violation { clause: clause.to_string(), message: message.into() });
    }

    pub fn clauses(&self) -> BTreeSet<&str> {
        self.violations.iter().map(|v| v.clause.as_str()).collect()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(|v| format!("{}: {}", v.clause, v.message)).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Which twist side, if any, sits at each boundary slot.
type SlotMap = BTreeMap<(usize, usize), (usize, usize)>;

impl FiniteTypeMap {
    pub fn piece_index(&self, id: &str) -> Option<usize> {
        self.pieces.iter().position(|p| p.id == id)
    }

    fn slot_map(&self) -> SlotMap {
        let mut out = SlotMap::new();
        for (t, tw) in self.twists.iter().enumerate() {
            for (k, piece, slot) in tw.sides() {
                if let Some(p) = self.piece_index(piece) {
                    out.entry((p, slot)).or_insert((t, k));
                }
            }
        }
        out
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.pieces.iter().map(PeriodicPiece::euler_characteristic).sum()
    }

    /// Boundary slots not glued to any twist region.
    pub fn free_circles(&self) -> usize {
        let used = self.slot_map();
        self.pieces.iter().enumerate().map(|(p, piece)| (0..piece.slots()).filter(|&s| !used.contains_key(&(p, s))).count()).sum()
    }

    /// Genus of the assembled surface, when it is a connected orientable one.
    pub fn genus(&self) -> Option<usize> {
        let twice = 2 - self.euler_characteristic() - self.free_circles() as i64;
        (twice >= 0 && twice % 2 == 0).then_some(twice as usize / 2)
    }

    fn is_connected(&self) -> bool {
        // nodes: every copy of every piece
        let offsets: Vec<usize> = self.pieces.iter().scan(0, |acc, p| Some(std::mem::replace(acc, *acc + p.copies))).collect();
        let n: usize = self.pieces.iter().map(|p| p.copies).sum();
        if n == 0 {
            return false;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        for tw in &self.twists {
            let node = |side: usize, i: usize| {
                let p = self.piece_index(&tw.attach[side].0)?;
                let piece = &self.pieces[p];
                (piece.boundary > 0).then(|| offsets[p] + (tw.attach[side].1 + i) / piece.boundary)
            };
            for i in 0..tw.annuli {
                if let (Some(a), Some(b)) = (node(0, i), node(1, i)) {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    parent[ra] = rb;
                }
            }
        }
        let root = find(&mut parent, 0);
        (0..n).all(|x| find(&mut parent, x) == root)
    }
}

/// Checks conditions (1)–(4) of the definition together with the gluing
/// and Riemann–Hurwitz consistency of every periodic piece.
pub fn validate(map: &FiniteTypeMap) -> ValidationReport {
    let mut r = ValidationReport::default();
    let mut ids = BTreeSet::new();
    for p in &map.pieces {
        if !ids.insert(p.id.as_str()) {
            r.push("gluing", format!("duplicate piece id {}", p.id));
        }
        if p.period == 0 || p.copies == 0 {
            r.push("(1)", format!("piece {} needs positive period and copies", p.id));
            continue;
        }
        if p.period % p.copies as u64 != 0 {
            r.push("(1)", format!("piece {}: {} permuted copies need a period divisible by {}", p.id, p.copies, p.copies));
        }
        if let Some(&m) = p.orbits.iter().find(|&&m| m < 2 || p.period % m != 0) {
            r.push("(1)", format!("piece {}: exceptional orbit multiplicity {m} must be ≥ 2 and divide the period", p.id));
        }
        if p.is_identity() {
            continue;
        }
        let full = p.orbits.iter().filter(|&&m| m == p.period).count() as u64;
        if p.fixed_points > full {
            r.push("(1)", format!("piece {}: {} fixed points but only {full} orbits of full multiplicity", p.id, p.fixed_points));
        }
        if p.copies > 1 && p.fixed_points > 0 {
            r.push("(1)", format!("piece {}: permuted copies cannot carry fixed points", p.id));
        }
        if let Some(o) = p.orbit {
            // χ = period·(χ(orbit) − Σ(1 − 1/m)), all terms integral after scaling
            let chi_orbit = 2 - 2 * o.genus as i64 - o.boundary as i64;
            let period = p.period as i64;
            let branching: i64 = p.orbits.iter().map(|&m| period - period / m as i64).sum();
            if p.euler_characteristic() != period * chi_orbit - branching {
                r.push(
                    "riemann-hurwitz",
                    format!("piece {}: χ = {} but period·(χ(orbit) − Σ(1 − 1/m)) = {}", p.id, p.euler_characteristic(), period * chi_orbit - branching),
                );
            }
        }
    }

    let mut seen: BTreeMap<(usize, usize), String> = BTreeMap::new();
    let mut twist_ids = BTreeSet::new();
    for tw in &map.twists {
        if !twist_ids.insert(tw.id.as_str()) {
            r.push("gluing", format!("duplicate twist id {}", tw.id));
        }
        if tw.annuli == 0 {
            r.push("(2)", format!("twist {} has no annuli", tw.id));
        }
        match (tw.kind, tw.sign) {
            (TwistKind::Twist, None) => r.push("(2)", format!("twist {} needs a sign", tw.id)),
            (TwistKind::FlipTwist, Some(_)) => r.push("(2)", format!("flip-twist {} carries no sign", tw.id)),
            _ => {}
        }
        if tw.kind == TwistKind::Twist && tw.annuli == 1 && !tw.interior_fixed_free {
            r.push("(3)", format!("twist {} has interior fixed points", tw.id));
        }
        for (_, piece, slot) in tw.sides() {
            let Some(p) = map.piece_index(piece) else {
                r.push("gluing", format!("twist {} refers to unknown piece {piece}", tw.id));
                continue;
            };
            if slot >= map.pieces[p].slots() {
                r.push("gluing", format!("twist {} uses slot {slot} of piece {piece}, which has {}", tw.id, map.pieces[p].slots()));
            } else if let Some(prev) = seen.insert((p, slot), tw.id.clone()) {
                r.push("gluing", format!("slot {slot} of piece {piece} is used by both {prev} and {}", tw.id));
            }
            if map.pieces[p].is_disk() {
                r.push("contractible", format!("twist {} bounds a disk piece {piece}", tw.id));
            }
        }
    }
    if !r.is_valid() {
        return r;
    }
    if map.closed && map.free_circles() > 0 {
        r.push("gluing", format!("{} boundary slots are unmatched on a closed surface", map.free_circles()));
    }
    if !map.is_connected() {
        r.push("connected", "the glued surface is disconnected");
    } else {
        match map.genus() {
            None => r.push("genus", "Euler characteristic and boundary do not give an integral genus"),
            Some(g) if map.closed && g < 2 => r.push("genus", format!("closed surface of genus {g} < 2")),
            _ => {}
        }
    }
    check_parallel_signs(map, &mut r);
    r
}

/// Condition (4): twists joined through a chain of cylinder pieces share
/// their sign.
fn check_parallel_signs(map: &FiniteTypeMap, r: &mut ValidationReport) {
    let slots = map.slot_map();
    let n = map.twists.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let root = find(p, p[x]);
            p[x] = root;
        }
        p[x]
    }
    for (p, piece) in map.pieces.iter().enumerate() {
        if !piece.is_cylinder() {
            continue;
        }
        if let (Some(&(a, _)), Some(&(b, _))) = (slots.get(&(p, 0)), slots.get(&(p, 1))) {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
    }
    let mut signs: BTreeMap<usize, (Sign, usize)> = BTreeMap::new();
    for (t, tw) in map.twists.iter().enumerate() {
        let (TwistKind::Twist, Some(sign)) = (tw.kind, tw.sign) else { continue };
        let root = find(&mut parent, t);
        match signs.get(&root) {
            Some(&(s, other)) if s != sign => {
                r.push("(4)", format!("parallel twists {} and {} have opposite signs", map.twists[other].id, tw.id));
            }
            None => {
                signs.insert(root, (sign, t));
            }
            _ => {}
        }
    }
}

fn require_valid(map: &FiniteTypeMap) -> Result<(), FiniteTypeError> {
    let report = validate(map);
    if report.is_valid() {
        Ok(())
    } else {
        Err(FiniteTypeError::Invalid(report))
    }
}

/// Identity pieces, marking circles that adjoin a positive twist.
pub fn sigma0(map: &FiniteTypeMap) -> SurfacePair {
    let slots = map.slot_map();
    let components = map
        .pieces
        .iter()
        .enumerate()
        .filter(|(_, p)| p.is_identity())
        .map(|(i, p)| {
            let marked = (0..p.boundary).filter(|&s| slots.get(&(i, s)).is_some_and(|&(t, _)| map.twists[t].is_positive_twist()));
            SurfaceComponent::new(p.genus, p.boundary, marked).expect("slots within range")
        })
        .collect();
    SurfacePair::new(components)
}

/// Fixed points away from Σ₀: the declared ones of the periodic pieces and
/// two for every single flip-twist annulus.
pub fn lefschetz_outside(map: &FiniteTypeMap) -> u64 {
    let periodic: u64 = map.pieces.iter().filter(|p| !p.is_identity()).map(|p| p.fixed_points).sum();
    let flips = map.twists.iter().filter(|t| t.kind == TwistKind::FlipTwist && t.annuli == 1).count() as u64;
    periodic + 2 * flips
}

/// Identity pieces with nonzero Euler characteristic contribute one
/// essential class each (index χ); isolated fixed points contribute one each.
pub fn nielsen_number(map: &FiniteTypeMap) -> u64 {
    let classes = map.pieces.iter().filter(|p| p.is_identity() && p.euler_characteristic() != 0).count() as u64;
    classes + lefschetz_outside(map)
}

pub fn floer_homology(map: &FiniteTypeMap) -> Result<GradedZ2Module, FiniteTypeError> {
    require_valid(map)?;
    if !map.closed {
        return Err(FiniteTypeError::NotClosed);
    }
    let genus = map.genus().unwrap_or(0);
    if genus < 2 {
        return Err(FiniteTypeError::GenusTooSmall(genus));
    }
    let ranks = homology_closed_form(&sigma0(map)) + Ranks::new(lefschetz_outside(map) as usize, 0, 0);
    let actions = module_structure(map)?;
    let module = GradedZ2Module { ranks, actions };
    debug_assert!(module.actions_respect_grading());
    Ok(module)
}

/// Simplicial model of the whole surface with Σ₀ and ∂₊Σ₀ recorded.
pub struct AssembledSurface {
    pub surface: ChainComplexZ2,
    pub fixed_part: ChainComplexZ2,
}

pub fn assemble_surface(map: &FiniteTypeMap) -> AssembledSurface {
    let mut builder = SurfaceBuilder::new();
    let mut circles: BTreeMap<(usize, usize), [usize; 3]> = BTreeMap::new();
    let mut fixed_triangles = Vec::new();
    for (i, p) in map.pieces.iter().enumerate() {
        for c in 0..p.copies {
            let patch = builder.add_surface(p.genus, p.boundary);
            for (s, circle) in patch.boundary.iter().enumerate() {
                circles.insert((i, c * p.boundary + s), *circle);
            }
            if p.is_identity() {
                fixed_triangles.extend(patch.triangles);
            }
        }
    }
    let slots = map.slot_map();
    let mut marked_edges = Vec::new();
    for ((p, s), circle) in &circles {
        if map.pieces[*p].is_identity() && slots.get(&(*p, *s)).is_some_and(|&(t, _)| map.twists[t].is_positive_twist()) {
            marked_edges.extend(circle_edges(circle));
        }
    }
    for tw in &map.twists {
        for i in 0..tw.annuli {
            let end = |k: usize| map.piece_index(&tw.attach[k].0).and_then(|p| circles.get(&(p, tw.attach[k].1 + i))).copied();
            if let (Some(a), Some(b)) = (end(0), end(1)) {
                builder.add_annulus(a, b);
            }
        }
    }
    let all = Simplices::from_triangles(builder.triangles(), &[]);
    let empty = [BitVec::zeros(all.count(0)), BitVec::zeros(all.count(1)), BitVec::zeros(all.count(2))];
    let surface = ChainComplexZ2::from_simplices(all, empty);
    let fixed = Simplices::from_triangles(&fixed_triangles, &[]);
    let masks = fixed.subcomplex_mask(&[], &marked_edges);
    AssembledSurface { surface, fixed_part: ChainComplexZ2::from_simplices(fixed, masks) }
}

/// Restriction of a cochain on the whole surface to the fixed part.
fn restrict(cochain: &BitVec, p: usize, from: &ChainComplexZ2, to: &ChainComplexZ2) -> BitVec {
    let (src, dst) = (from.simplices().expect("simplicial"), to.simplices().expect("simplicial"));
    BitVec::from_bools((0..dst.count(p)).map(|i| cochain.get(src.index_of(&dst.simplex(p, i)).expect("subcomplex simplex"))))
}

/// Action of a basis of `H^*(Σ; Z2)` on `H_*(Σ₀, ∂₊Σ₀) ⊕ Z2^Λ`: cap product
/// through restriction on the first summand, the unit as identity and
/// everything else as zero on the second. Keys are `"H^p:i"`.
pub fn module_structure(map: &FiniteTypeMap) -> Result<BTreeMap<String, ActionMatrix>, FiniteTypeError> {
    require_valid(map)?;
    if !map.closed {
        return Err(FiniteTypeError::NotClosed);
    }
    let model = assemble_surface(map);
    let coh = cohomology_from_complex(&model.surface)?;
    let h0 = homology_from_complex(&model.fixed_part)?;
    let lambda = lefschetz_outside(map) as usize;
    let ranks = h0.ranks + Ranks::new(lambda, 0, 0);
    let offset = |k: usize| (0..k).map(|d| ranks.get(d)).sum::<usize>();
    let n = ranks.total();
    let mut out = BTreeMap::new();
    for p in 0..3 {
        for (idx, alpha) in coh.representatives(p).iter().enumerate() {
            let restricted = if h0.ranks.total() > 0 { Some(restrict(alpha, p, &model.surface, &model.fixed_part)) } else { None };
            let mut columns = vec![BitVec::zeros(n); n];
            for k in p..3 {
                for (j, x) in h0.representatives(k).iter().enumerate() {
                    let a = restricted.as_ref().expect("nonempty fixed part");
                    let capped = cap_product(a, p, x, k, &model.fixed_part)?;
                    let coords = h0.coordinates(k - p, &capped)?;
                    columns[offset(k) + j] = coords.scatter(&(offset(k - p)..offset(k - p) + h0.ranks.get(k - p)).collect::<Vec<_>>(), n);
                }
            }
            if p == 0 && !alpha.is_zero() {
                for j in 0..lambda {
                    columns[h0.ranks.get(0) + j] = BitVec::unit(n, h0.ranks.get(0) + j);
                }
            }
            out.insert(format!("H^{p}:{idx}"), ActionMatrix { degree: p, matrix: GF2Matrix::from_columns(n, &columns) });
        }
    }
    Ok(out)
}
