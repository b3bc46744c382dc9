//! Compact surfaces with marked boundary circles and their relative Z2
//! homology, computed both from a closed-form table and from an explicit
//! simplicial model.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{BitVec, GF2Matrix, Reducer};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HomologyError {
    #[error("malformed complex: {0}")]
    MalformedComplex(String),
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("chain is not a relative cycle in degree {0}")]
    NotACycle(usize),
    #[error("complex carries no simplicial structure")]
    NoSimplices,
    #[error("marked circle {index} out of range for a component with {boundary} boundary circles")]
    BadMarking { index: usize, boundary: usize },
}

/// One connected compact oriented surface with some boundary circles marked.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SurfaceComponent {
    pub genus: usize,
    pub boundary_circles: usize,
    pub marked: BTreeSet<usize>,
}

impl SurfaceComponent {
    pub fn new(genus: usize, boundary_circles: usize, marked: impl IntoIterator<Item = usize>) -> Result<Self, HomologyError> {
        let marked: BTreeSet<usize> = marked.into_iter().collect();
        if let Some(&index) = marked.iter().find(|&&i| i >= boundary_circles) {
            return Err(HomologyError::BadMarking { index, boundary: boundary_circles });
        }
        Ok(Self { genus, boundary_circles, marked })
    }

    /// Every boundary circle marked.
    pub fn fully_marked(genus: usize, boundary_circles: usize) -> Self {
        Self { genus, boundary_circles, marked: (0..boundary_circles).collect() }
    }

    pub fn unmarked(genus: usize, boundary_circles: usize) -> Self {
        Self { genus, boundary_circles, marked: BTreeSet::new() }
    }

    pub fn euler_characteristic(&self) -> i64 {
        2 - 2 * self.genus as i64 - self.boundary_circles as i64
    }

    /// Same surface, marking exactly the circles this one leaves unmarked.
    pub fn complement_marking(&self) -> Self {
        Self {
            genus: self.genus,
            boundary_circles: self.boundary_circles,
            marked: (0..self.boundary_circles).filter(|i| !self.marked.contains(i)).collect(),
        }
    }
}

/// A possibly disconnected surface `S` together with `A ⊆ ∂S`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfacePair {
    pub components: Vec<SurfaceComponent>,
}

impl SurfacePair {
    pub fn new(components: Vec<SurfaceComponent>) -> Self {
        Self { components }
    }

    pub fn single(component: SurfaceComponent) -> Self {
        Self { components: vec![component] }
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.components.iter().map(SurfaceComponent::euler_characteristic).sum()
    }
}

/// Ranks of a Z2 homology group in degrees 0, 1, 2.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ranks {
    pub h0: usize,
    pub h1: usize,
    pub h2: usize,
}

impl Ranks {
    pub const ZERO: Ranks = Ranks { h0: 0, h1: 0, h2: 0 };

    pub const fn new(h0: usize, h1: usize, h2: usize) -> Self {
        Self { h0, h1, h2 }
    }

    pub fn get(&self, degree: usize) -> usize {
        match degree {
            0 => self.h0,
            1 => self.h1,
            2 => self.h2,
            _ => 0,
        }
    }

    pub fn total(&self) -> usize {
        self.h0 + self.h1 + self.h2
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.h0 as i64 - self.h1 as i64 + self.h2 as i64
    }

    pub fn mirrored(&self) -> Self {
        Self { h0: self.h2, h1: self.h1, h2: self.h0 }
    }

    pub fn as_array(&self) -> [usize; 3] {
        [self.h0, self.h1, self.h2]
    }
}

impl std::ops::Add for Ranks {
    type Output = Ranks;
    fn add(self, o: Ranks) -> Ranks {
        Ranks { h0: self.h0 + o.h0, h1: self.h1 + o.h1, h2: self.h2 + o.h2 }
    }
}

impl std::iter::Sum for Ranks {
    fn sum<I: Iterator<Item = Ranks>>(iter: I) -> Ranks {
        iter.fold(Ranks::ZERO, |a, b| a + b)
    }
}

impl std::fmt::Display for Ranks {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.h0, self.h1, self.h2)
    }
}

/// Relative homology ranks from the genus/boundary table.
pub fn homology_closed_form(pair: &SurfacePair) -> Ranks {
    pair.components.iter().map(component_closed_form).sum()
}

fn component_closed_form(c: &SurfaceComponent) -> Ranks {
    let (g, b, marked) = (c.genus, c.boundary_circles, c.marked.len());
    if b == 0 {
        Ranks::new(1, 2 * g, 1)
    } else if marked == 0 {
        Ranks::new(1, 2 * g + b - 1, 0)
    } else if marked < b {
        Ranks::new(0, 2 * g + b - 2, 0)
    } else {
        Ranks::new(0, 2 * g + b - 1, 1)
    }
}

/// Compares `H_*(S, A)` with the mirror of `H_*(S, ∂S ∖ A)`.
pub fn lefschetz_duality_check(pair: &SurfacePair) -> bool {
    let complement = SurfacePair::new(pair.components.iter().map(SurfaceComponent::complement_marking).collect());
    homology_closed_form(pair) == homology_closed_form(&complement).mirrored()
}

/// Ordered simplicial structure: every simplex lists its vertices in
/// increasing global order.
#[derive(Clone, Debug)]
pub struct Simplices {
    vertices: Vec<usize>,
    edges: Vec<[usize; 2]>,
    triangles: Vec<[usize; 3]>,
    vertex_index: HashMap<usize, usize>,
    edge_index: HashMap<[usize; 2], usize>,
    triangle_index: HashMap<[usize; 3], usize>,
}

impl Simplices {
    /// Closure of the given triangles plus any extra edges (as vertex pairs).
    pub fn from_triangles(triangles: &[[usize; 3]], extra_edges: &[[usize; 2]]) -> Self {
        let mut tris: BTreeSet<[usize; 3]> = BTreeSet::new();
        for t in triangles {
            let mut s = *t;
            s.sort_unstable();
            assert!(s[0] != s[1] && s[1] != s[2], "degenerate triangle {t:?}");
            tris.insert(s);
        }
        let mut edges: BTreeSet<[usize; 2]> = BTreeSet::new();
        for t in &tris {
            edges.insert([t[0], t[1]]);
            edges.insert([t[0], t[2]]);
            edges.insert([t[1], t[2]]);
        }
        for e in extra_edges {
            let mut s = *e;
            s.sort_unstable();
            edges.insert(s);
        }
        let vertices: BTreeSet<usize> = edges.iter().flat_map(|e| e.iter().copied()).collect();
        let vertices: Vec<usize> = vertices.into_iter().collect();
        let edges: Vec<[usize; 2]> = edges.into_iter().collect();
        let triangles: Vec<[usize; 3]> = tris.into_iter().collect();
        let vertex_index = vertices.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let edge_index = edges.iter().enumerate().map(|(i, e)| (*e, i)).collect();
        let triangle_index = triangles.iter().enumerate().map(|(i, t)| (*t, i)).collect();
        Self { vertices, edges, triangles, vertex_index, edge_index, triangle_index }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn count(&self, dim: usize) -> usize {
        match dim {
            0 => self.vertices.len(),
            1 => self.edges.len(),
            2 => self.triangles.len(),
            _ => 0,
        }
    }

    /// Index of the simplex spanned by the given sorted global vertex ids.
    pub fn index_of(&self, verts: &[usize]) -> Option<usize> {
        match verts.len() {
            1 => self.vertex_index.get(&verts[0]).copied(),
            2 => self.edge_index.get(&[verts[0], verts[1]]).copied(),
            3 => self.triangle_index.get(&[verts[0], verts[1], verts[2]]).copied(),
            _ => None,
        }
    }

    /// Sorted global vertex ids of simplex `i` of dimension `dim`.
    pub fn simplex(&self, dim: usize, i: usize) -> Vec<usize> {
        match dim {
            0 => vec![self.vertices[i]],
            1 => self.edges[i].to_vec(),
            2 => self.triangles[i].to_vec(),
            _ => panic!("no simplices of dimension {dim}"),
        }
    }

    fn boundary_matrices(&self) -> (GF2Matrix, GF2Matrix) {
        let mut b2 = GF2Matrix::zeros(self.triangles.len(), self.edges.len());
        for (i, t) in self.triangles.iter().enumerate() {
            for face in [[t[1], t[2]], [t[0], t[2]], [t[0], t[1]]] {
                b2.set(i, self.edge_index[&face], true);
            }
        }
        let mut b1 = GF2Matrix::zeros(self.edges.len(), self.vertices.len());
        for (i, e) in self.edges.iter().enumerate() {
            b1.set(i, self.vertex_index[&e[0]], true);
            b1.set(i, self.vertex_index[&e[1]], true);
        }
        (b2, b1)
    }

    /// Mask of the cells lying in the closure of the given vertex sets.
    pub fn subcomplex_mask(&self, sub_triangles: &[[usize; 3]], sub_edges: &[[usize; 2]]) -> [BitVec; 3] {
        let sub = Simplices::from_triangles(sub_triangles, sub_edges);
        let mut masks = [BitVec::zeros(self.count(0)), BitVec::zeros(self.count(1)), BitVec::zeros(self.count(2))];
        for dim in 0..3 {
            for i in 0..sub.count(dim) {
                let s = sub.simplex(dim, i);
                let j = self.index_of(&s).expect("subcomplex simplex missing from complex");
                masks[dim].set(j, true);
            }
        }
        masks
    }
}

/// Two-dimensional chain complex over Z2 with a marked subcomplex.
///
/// Boundary matrices use the row convention: row `i` of `boundary_2` is the
/// boundary of 2-cell `i` written over the 1-cells.
#[derive(Clone, Debug)]
pub struct ChainComplexZ2 {
    pub boundary_2: GF2Matrix,
    pub boundary_1: GF2Matrix,
    pub sub_cells: [BitVec; 3],
    simplices: Option<Simplices>,
}

impl ChainComplexZ2 {
    pub fn from_matrices(boundary_2: GF2Matrix, boundary_1: GF2Matrix, sub_cells: [BitVec; 3]) -> Result<Self, HomologyError> {
        if boundary_2.cols() != boundary_1.rows() {
            return Err(HomologyError::MalformedComplex(format!(
                "boundary_2 has {} columns but there are {} 1-cells",
                boundary_2.cols(),
                boundary_1.rows()
            )));
        }
        let counts = [boundary_1.cols(), boundary_1.rows(), boundary_2.rows()];
        for (dim, mask) in sub_cells.iter().enumerate() {
            if mask.len() != counts[dim] {
                return Err(HomologyError::MalformedComplex(format!("sub-cell mask in degree {dim} has wrong length")));
            }
        }
        Ok(Self { boundary_2, boundary_1, sub_cells, simplices: None })
    }

    pub fn from_simplices(simplices: Simplices, sub_cells: [BitVec; 3]) -> Self {
        let (boundary_2, boundary_1) = simplices.boundary_matrices();
        Self { boundary_2, boundary_1, sub_cells, simplices: Some(simplices) }
    }

    pub fn simplices(&self) -> Option<&Simplices> {
        self.simplices.as_ref()
    }

    pub fn cell_count(&self, dim: usize) -> usize {
        match dim {
            0 => self.boundary_1.cols(),
            1 => self.boundary_1.rows(),
            2 => self.boundary_2.rows(),
            _ => 0,
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.cell_count(0) as i64 - self.cell_count(1) as i64 + self.cell_count(2) as i64
    }

    /// Boundary map out of degree `dim` (rows: `dim`-cells).
    pub fn boundary(&self, dim: usize) -> GF2Matrix {
        match dim {
            1 => self.boundary_1.clone(),
            2 => self.boundary_2.clone(),
            0 => GF2Matrix::zeros(self.cell_count(0), 0),
            _ => GF2Matrix::zeros(0, self.cell_count(2)),
        }
    }

    fn check(&self) -> Result<(), HomologyError> {
        if !self.boundary_2.mul(&self.boundary_1).is_zero() {
            return Err(HomologyError::MalformedComplex("boundary of a boundary is nonzero".into()));
        }
        for (dim, b) in [(2usize, &self.boundary_2), (1, &self.boundary_1)] {
            for i in self.sub_cells[dim].iter_ones() {
                for j in b.row(i).iter_ones() {
                    if !self.sub_cells[dim - 1].get(j) {
                        return Err(HomologyError::MalformedComplex(format!(
                            "subcomplex not closed: {dim}-cell {i} has face {j} outside it"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Indices of the cells of dimension `dim` outside the subcomplex.
    pub fn relative_cells(&self, dim: usize) -> Vec<usize> {
        (0..self.cell_count(dim)).filter(|&i| !self.sub_cells[dim].get(i)).collect()
    }

    /// The same complex with nothing marked.
    pub fn absolute(&self) -> ChainComplexZ2 {
        let mut c = self.clone();
        c.sub_cells = [
            BitVec::zeros(self.cell_count(0)),
            BitVec::zeros(self.cell_count(1)),
            BitVec::zeros(self.cell_count(2)),
        ];
        c
    }
}

/// Homology of one degree, with representatives and a way to read off
/// coordinates of arbitrary cycles.
#[derive(Clone, Debug)]
pub struct DegreeBasis {
    degree: usize,
    /// full-length index of each coordinate used internally
    keep: Vec<usize>,
    full_len: usize,
    reducer: Reducer,
    boundary_count: usize,
    reps: Vec<BitVec>,
    out: GF2Matrix,
}

impl DegreeBasis {
    /// Middle homology of `C_{n+1} --d_in--> C_n --d_out--> C_{n-1}`,
    /// restricted to the coordinates in `keep` (row convention matrices over
    /// full index sets).
    fn compute(degree: usize, d_in: &GF2Matrix, d_out: &GF2Matrix, keep_in: &[usize], keep: &[usize], keep_out: &[usize], full_len: usize) -> Self {
        let din = d_in.submatrix(keep_in, keep);
        let dout = d_out.submatrix(keep, keep_out);
        let cycles = dout.transpose().kernel_basis();
        // first pass picks cycles independent modulo boundaries; the second
        // pass inserts exactly those so rep i sits at index boundary_count + i
        let mut probe = Reducer::new(keep.len());
        for row in din.row_vecs() {
            probe.insert(row.clone());
        }
        let reps: Vec<BitVec> = cycles.basis().iter().filter(|z| probe.insert((*z).clone())).cloned().collect();
        let mut reducer = Reducer::new(keep.len());
        for row in din.row_vecs() {
            reducer.insert(row.clone());
        }
        let boundary_count = reducer.inserted();
        for r in &reps {
            reducer.insert(r.clone());
        }
        Self { degree, keep: keep.to_vec(), full_len, reducer, boundary_count, reps, out: dout }
    }

    pub fn rank(&self) -> usize {
        self.reps.len()
    }

    /// Representatives as chains over all cells (zero on the subcomplex).
    pub fn representatives(&self) -> Vec<BitVec> {
        self.reps.iter().map(|r| r.scatter(&self.keep, self.full_len)).collect()
    }

    /// Coordinates of the class of `chain` (over all cells; entries on the
    /// subcomplex are ignored) in the representative basis.
    pub fn coordinates(&self, chain: &BitVec) -> Result<BitVec, HomologyError> {
        let restricted = chain.select(&self.keep);
        if !self.out.vec_mul(&restricted).is_zero() {
            return Err(HomologyError::NotACycle(self.degree));
        }
        let (rem, used) = self.reducer.reduce_tracked(&restricted);
        if !rem.is_zero() {
            return Err(HomologyError::NotACycle(self.degree));
        }
        Ok(BitVec::from_indices(
            self.reps.len(),
            used.into_iter().filter(|&i| i >= self.boundary_count).map(|i| i - self.boundary_count),
        ))
    }

    pub fn is_cycle(&self, chain: &BitVec) -> bool {
        self.out.vec_mul(&chain.select(&self.keep)).is_zero()
    }
}

/// Relative homology of a [`ChainComplexZ2`] in degrees 0..=2.
#[derive(Clone, Debug)]
pub struct RelativeHomology {
    pub ranks: Ranks,
    degrees: [DegreeBasis; 3],
}

impl RelativeHomology {
    pub fn degree(&self, n: usize) -> &DegreeBasis {
        &self.degrees[n]
    }

    pub fn representatives(&self, n: usize) -> Vec<BitVec> {
        self.degrees[n].representatives()
    }

    pub fn coordinates(&self, n: usize, chain: &BitVec) -> Result<BitVec, HomologyError> {
        self.degrees[n].coordinates(chain)
    }
}

/// Relative homology ranks and representative relative cycles.
pub fn homology_from_complex(c: &ChainComplexZ2) -> Result<RelativeHomology, HomologyError> {
    c.check()?;
    let keep: [Vec<usize>; 3] = [c.relative_cells(0), c.relative_cells(1), c.relative_cells(2)];
    let empty: Vec<usize> = Vec::new();
    let d = [c.boundary(0), c.boundary(1), c.boundary(2), c.boundary(3)];
    let deg0 = DegreeBasis::compute(0, &d[1], &d[0], &keep[1], &keep[0], &empty, c.cell_count(0));
    let deg1 = DegreeBasis::compute(1, &d[2], &d[1], &keep[2], &keep[1], &keep[0], c.cell_count(1));
    let deg2 = DegreeBasis::compute(2, &d[3], &d[2], &empty, &keep[2], &keep[1], c.cell_count(2));
    let ranks = Ranks::new(deg0.rank(), deg1.rank(), deg2.rank());
    Ok(RelativeHomology { ranks, degrees: [deg0, deg1, deg2] })
}

/// Absolute cohomology of the whole complex (the subcomplex is ignored).
#[derive(Clone, Debug)]
pub struct Cohomology {
    pub ranks: Ranks,
    degrees: [DegreeBasis; 3],
}

impl Cohomology {
    /// Representative cocycles, as vectors over the cells of each degree.
    pub fn representatives(&self, p: usize) -> Vec<BitVec> {
        self.degrees[p].representatives()
    }

    pub fn coordinates(&self, p: usize, cocycle: &BitVec) -> Result<BitVec, HomologyError> {
        self.degrees[p].coordinates(cocycle)
    }
}

pub fn cohomology_from_complex(c: &ChainComplexZ2) -> Result<Cohomology, HomologyError> {
    c.check()?;
    let all: [Vec<usize>; 3] = [(0..c.cell_count(0)).collect(), (0..c.cell_count(1)).collect(), (0..c.cell_count(2)).collect()];
    let empty: Vec<usize> = Vec::new();
    // coboundaries in row convention: delta^p has rows p-cells, cols (p+1)-cells
    let delta0 = c.boundary_1.transpose();
    let delta1 = c.boundary_2.transpose();
    let none_in0 = GF2Matrix::zeros(0, c.cell_count(0));
    let none_out2 = GF2Matrix::zeros(c.cell_count(2), 0);
    let deg0 = DegreeBasis::compute(0, &none_in0, &delta0, &empty, &all[0], &all[1], c.cell_count(0));
    let deg1 = DegreeBasis::compute(1, &delta0, &delta1, &all[0], &all[1], &all[2], c.cell_count(1));
    let deg2 = DegreeBasis::compute(2, &delta1, &none_out2, &all[1], &all[2], &empty, c.cell_count(2));
    let ranks = Ranks::new(deg0.rank(), deg1.rank(), deg2.rank());
    Ok(Cohomology { ranks, degrees: [deg0, deg1, deg2] })
}

/// Simplicial cap product `x ⌢ α` of a `p`-cochain with an `n`-chain, using
/// the front-face/back-face formula `σ ⌢ α = α(σ|[v0..vp]) σ|[vp..vn]`.
pub fn cap_product(cochain: &BitVec, p: usize, cycle: &BitVec, n: usize, c: &ChainComplexZ2) -> Result<BitVec, HomologyError> {
    let s = c.simplices().ok_or(HomologyError::NoSimplices)?;
    if p > n || n > 2 {
        return Err(HomologyError::DegreeMismatch(format!("cannot cap a degree-{p} cochain with a degree-{n} chain")));
    }
    if cochain.len() != s.count(p) {
        return Err(HomologyError::DegreeMismatch(format!("cochain has length {} but there are {} {p}-cells", cochain.len(), s.count(p))));
    }
    if cycle.len() != s.count(n) {
        return Err(HomologyError::DegreeMismatch(format!("chain has length {} but there are {} {n}-cells", cycle.len(), s.count(n))));
    }
    let mut out = BitVec::zeros(s.count(n - p));
    for i in cycle.iter_ones() {
        let verts = s.simplex(n, i);
        let front = s.index_of(&verts[..=p]).expect("front face");
        if cochain.get(front) {
            let back = s.index_of(&verts[p..]).expect("back face");
            out.flip(back);
        }
    }
    Ok(out)
}

/// Simplicial cup product of a `p`-cochain and a `q`-cochain.
pub fn cup_product(alpha: &BitVec, p: usize, beta: &BitVec, q: usize, c: &ChainComplexZ2) -> Result<BitVec, HomologyError> {
    let s = c.simplices().ok_or(HomologyError::NoSimplices)?;
    if p + q > 2 || alpha.len() != s.count(p) || beta.len() != s.count(q) {
        return Err(HomologyError::DegreeMismatch(format!("cannot cup degrees {p} and {q}")));
    }
    let n = p + q;
    Ok(BitVec::from_bools((0..s.count(n)).map(|i| {
        let v = s.simplex(n, i);
        let a = s.index_of(&v[..=p]).expect("front face");
        let b = s.index_of(&v[p..]).expect("back face");
        alpha.get(a) && beta.get(b)
    })))
}

/// Z2-vector space graded in degrees 0..=2 with optional module actions.
///
/// Each action matrix acts on the total space (dimension `ranks.total()`),
/// in the basis ordered by degree; a degree-`p` class maps degree `k` into
/// degree `k - p`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GradedZ2Module {
    pub ranks: Ranks,
    pub actions: BTreeMap<String, ActionMatrix>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionMatrix {
    pub degree: usize,
    pub matrix: GF2Matrix,
}

impl GradedZ2Module {
    pub fn from_ranks(ranks: Ranks) -> Self {
        Self { ranks, actions: BTreeMap::new() }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.ranks.total() == 0
    }

    /// Offset of the first basis vector of degree `k` in the total basis.
    pub fn offset(&self, k: usize) -> usize {
        (0..k).map(|d| self.ranks.get(d)).sum()
    }

    /// Checks that every action of degree `p` sends degree `k` into `k - p`.
    pub fn actions_respect_grading(&self) -> bool {
        let n = self.ranks.total();
        self.actions.values().all(|a| {
            if a.matrix.rows() != n || a.matrix.cols() != n {
                return false;
            }
            for src in 0..3 {
                for j in self.offset(src)..self.offset(src) + self.ranks.get(src) {
                    for i in a.matrix.column(j).iter_ones() {
                        let target = (0..3).find(|&d| i >= self.offset(d) && i < self.offset(d) + self.ranks.get(d));
                        if src < a.degree || target != Some(src - a.degree) {
                            return false;
                        }
                    }
                }
            }
            true
        })
    }
}

/// Incremental builder for oriented simplicial surfaces.
///
/// Surfaces with boundary are built from an identification polygon: every
/// side is subdivided in three and the interior is triangulated through an
/// inner ring and a centre vertex, which keeps the result simplicial. Each
/// boundary circle comes out as a 3-cycle of vertices listed in the
/// direction induced by the orientation.
#[derive(Clone, Debug, Default)]
pub struct SurfaceBuilder {
    next_vertex: usize,
    triangles: Vec<[usize; 3]>,
}

/// Handle on one component added to a [`SurfaceBuilder`].
#[derive(Clone, Debug)]
pub struct Patch {
    pub boundary: Vec<[usize; 3]>,
    /// Closed loops `a_1, b_1, ..., a_g, b_g` of the identification polygon.
    pub loops: Vec<[usize; 3]>,
    pub triangles: Vec<[usize; 3]>,
}

#[derive(Clone, Copy)]
struct Side {
    letter: usize,
    inverted: bool,
}

impl SurfaceBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn vertex(&mut self) -> usize {
        self.next_vertex += 1;
        self.next_vertex - 1
    }

    /// Adds a genus-`genus` surface with `boundary` circles.
    pub fn add_surface(&mut self, genus: usize, boundary: usize) -> Patch {
        let mut sides = Vec::new();
        let mut letters = 0;
        for _ in 0..genus {
            let (a, b) = (letters, letters + 1);
            letters += 2;
            sides.extend([
                Side { letter: a, inverted: false },
                Side { letter: b, inverted: false },
                Side { letter: a, inverted: true },
                Side { letter: b, inverted: true },
            ]);
        }
        let mut boundary_letters = Vec::new();
        for _ in 0..boundary {
            let (e, d) = (letters, letters + 1);
            letters += 2;
            boundary_letters.push(d);
            sides.extend([
                Side { letter: e, inverted: false },
                Side { letter: d, inverted: false },
                Side { letter: e, inverted: true },
            ]);
        }
        if sides.is_empty() {
            sides.extend([Side { letter: 0, inverted: false }, Side { letter: 0, inverted: true }]);
            letters = 1;
        }
        let l = sides.len();

        // corner k is the start of side k
        let mut parent: Vec<usize> = (0..l).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let nxt = p[y];
                p[y] = r;
                y = nxt;
            }
            r
        }
        let mut occurrences: Vec<Vec<usize>> = vec![Vec::new(); letters];
        for (k, s) in sides.iter().enumerate() {
            occurrences[s.letter].push(k);
        }
        let start = |k: usize, inv: bool| if inv { (k + 1) % l } else { k };
        let end = |k: usize, inv: bool| if inv { k } else { (k + 1) % l };
        for occ in &occurrences {
            if let [s, t] = occ[..] {
                let (si, ti) = (sides[s].inverted, sides[t].inverted);
                let pairs = [(start(s, si), start(t, ti)), (end(s, si), end(t, ti))];
                for (x, y) in pairs {
                    let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
                    if rx != ry {
                        parent[rx.max(ry)] = rx.min(ry);
                    }
                }
            }
        }
        let mut corner_vertex: BTreeMap<usize, usize> = BTreeMap::new();
        let mut corners = Vec::with_capacity(l);
        for k in 0..l {
            let r = find(&mut parent, k);
            let v = *corner_vertex.entry(r).or_insert_with(|| {
                self.next_vertex += 1;
                self.next_vertex - 1
            });
            corners.push(v);
        }
        let inner: Vec<[usize; 2]> = (0..letters).map(|_| [self.vertex(), self.vertex()]).collect();

        let mut walk = Vec::with_capacity(3 * l);
        let mut circles = Vec::new();
        let mut loops = Vec::new();
        for (k, s) in sides.iter().enumerate() {
            let [x1, x2] = inner[s.letter];
            let chunk = if s.inverted { [corners[k], x2, x1] } else { [corners[k], x1, x2] };
            if boundary_letters.contains(&s.letter) {
                circles.push((s.letter, chunk));
            } else if s.letter < 2 * genus && !s.inverted {
                loops.push(chunk);
            }
            walk.extend(chunk);
        }
        circles.sort_by_key(|(letter, _)| *letter);

        let n = walk.len();
        let ring: Vec<usize> = (0..n).map(|_| self.vertex()).collect();
        let centre = self.vertex();
        let mut tris = Vec::with_capacity(3 * n);
        for i in 0..n {
            let j = (i + 1) % n;
            tris.push([walk[i], walk[j], ring[i]]);
            tris.push([walk[j], ring[j], ring[i]]);
            tris.push([centre, ring[i], ring[j]]);
        }
        self.triangles.extend(tris.iter().copied());
        Patch { boundary: circles.into_iter().map(|(_, c)| c).collect(), loops, triangles: tris }
    }

    /// Glues an annulus between two boundary circles of patches already in
    /// the builder, respecting both orientations.
    pub fn add_annulus(&mut self, from: [usize; 3], to: [usize; 3]) -> Vec<[usize; 3]> {
        let first = [from[0], from[2], from[1]];
        let middle = [self.vertex(), self.vertex(), self.vertex()];
        let mut tris = Vec::with_capacity(12);
        for (x, y) in [(first, middle), (middle, to)] {
            for i in 0..3 {
                let j = (i + 1) % 3;
                tris.push([x[i], x[j], y[i]]);
                tris.push([x[j], y[j], y[i]]);
            }
        }
        self.triangles.extend(tris.iter().copied());
        tris
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }
}

/// Edges of a boundary 3-cycle.
pub fn circle_edges(c: &[usize; 3]) -> [[usize; 2]; 3] {
    [[c[0], c[1]], [c[1], c[2]], [c[2], c[0]]]
}

/// Simplicial model of a surface pair with the marked circles as subcomplex.
pub fn triangulate(pair: &SurfacePair) -> ChainComplexZ2 {
    let mut builder = SurfaceBuilder::new();
    let mut marked_edges = Vec::new();
    for comp in &pair.components {
        let patch = builder.add_surface(comp.genus, comp.boundary_circles);
        for &i in &comp.marked {
            marked_edges.extend(circle_edges(&patch.boundary[i]));
        }
    }
    let simplices = Simplices::from_triangles(builder.triangles(), &[]);
    let masks = simplices.subcomplex_mask(&[], &marked_edges);
    ChainComplexZ2::from_simplices(simplices, masks)
}

/// Checks that the triangles of a simplicial surface can be oriented
/// coherently (every interior edge is traversed once in each direction).
pub fn is_orientable(triangles: &[[usize; 3]]) -> bool {
    let mut edge_tris: HashMap<[usize; 2], Vec<usize>> = HashMap::new();
    for (i, t) in triangles.iter().enumerate() {
        for k in 0..3 {
            let mut e = [t[k], t[(k + 1) % 3]];
            e.sort_unstable();
            edge_tris.entry(e).or_default().push(i);
        }
    }
    // sign[i] = whether triangle i keeps its listed orientation
    let mut sign: Vec<Option<bool>> = vec![None; triangles.len()];
    let directed = |t: &[usize; 3], a: usize, b: usize| (0..3).any(|k| t[k] == a && t[(k + 1) % 3] == b);
    for root in 0..triangles.len() {
        if sign[root].is_some() {
            continue;
        }
        sign[root] = Some(true);
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            let t = triangles[i];
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let mut e = [a, b];
                e.sort_unstable();
                for &j in &edge_tris[&e] {
                    if j == i {
                        continue;
                    }
                    // neighbour must traverse (a, b) in the opposite direction
                    let same_dir = directed(&triangles[j], a, b);
                    let want = sign[i].unwrap() != same_dir;
                    match sign[j] {
                        None => {
                            sign[j] = Some(want);
                            stack.push(j);
                        }
                        Some(s) if s != want => return false,
                        _ => {}
                    }
                }
            }
        }
    }
    true
}
