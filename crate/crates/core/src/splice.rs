//! Splice diagrams of plane curve singularities: construction from Puiseux
//! data, the collapsing algorithm, structural property checks, the
//! m-function, characteristic sets and twist-map models.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::poly::{q, Q};
use crate::puiseux::{equivalent, FracPowerSeries};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpliceError {
    #[error("malformed Puiseux data: {0}")]
    MalformedData(String),
    #[error("collapse did not terminate")]
    NonTerminating,
    #[error("property {property} violated: {detail}")]
    PropertyViolation { property: String, detail: String },
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
    #[error("edge {0} does not join a box to a box or an arrowhead")]
    NotATwistEdge(usize),
}

fn violation(property: &str, detail: impl Into<String>) -> SpliceError {
    SpliceError::PropertyViolation { property: property.to_string(), detail: detail.into() }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexKind {
    Arrowhead,
    Knob,
    Box,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Vertex {
    pub kind: VertexKind,
    /// index of the branch an arrowhead stands for
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<usize>,
}

/// An edge with a weight at every end that is a box.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpliceEdge {
    pub ends: [usize; 2],
    pub weights: [Option<u64>; 2],
}

impl SpliceEdge {
    pub fn other(&self, v: usize) -> usize {
        if self.ends[0] == v {
            self.ends[1]
        } else {
            self.ends[0]
        }
    }

    pub fn weight_at(&self, v: usize) -> Option<u64> {
        if self.ends[0] == v {
            self.weights[0]
        } else if self.ends[1] == v {
            self.weights[1]
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpliceDiagram {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<SpliceEdge>,
    pub is_gamma_star: bool,
}

/// A property check that failed, tagged with its identifier.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub property: String,
    pub detail: String,
}

impl SpliceDiagram {
    /// Two arrowheads joined by one edge.
    pub fn gamma_star() -> Self {
        Self {
            vertices: vec![Vertex { kind: VertexKind::Arrowhead, branch: Some(0) }, Vertex { kind: VertexKind::Arrowhead, branch: Some(1) }],
            edges: vec![SpliceEdge { ends: [0, 1], weights: [None, None] }],
            is_gamma_star: true,
        }
    }

    pub fn kind(&self, v: usize) -> VertexKind {
        self.vertices[v].kind
    }

    fn ids_of(&self, kind: VertexKind) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&v| self.kind(v) == kind).collect()
    }

    pub fn boxes(&self) -> Vec<usize> {
        self.ids_of(VertexKind::Box)
    }

    pub fn arrowheads(&self) -> Vec<usize> {
        self.ids_of(VertexKind::Arrowhead)
    }

    pub fn knobs(&self) -> Vec<usize> {
        self.ids_of(VertexKind::Knob)
    }

    /// `(edge, neighbour)` pairs at `v`, by edge id.
    pub fn neighbors(&self, v: usize) -> Vec<(usize, usize)> {
        self.edges.iter().enumerate().filter(|(_, e)| e.ends.contains(&v)).map(|(i, e)| (i, e.other(v))).collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.ends.contains(&v)).count()
    }

    pub fn edge_between(&self, v: usize, w: usize) -> Option<usize> {
        self.edges.iter().position(|e| e.ends == [v, w] || e.ends == [w, v])
    }

    /// Weights at box `b` of all its edges, in edge order.
    pub fn weights_at(&self, b: usize) -> Vec<u64> {
        self.neighbors(b).iter().map(|&(e, _)| self.edges[e].weight_at(b).unwrap_or(1)).collect()
    }

    /// Vertices reachable from `start` without crossing `skip_edge`.
    fn side(&self, start: usize, skip_edge: usize) -> Vec<usize> {
        let mut seen = vec![false; self.vertices.len()];
        let mut stack = vec![start];
        seen[start] = true;
        let mut out = Vec::new();
        while let Some(v) = stack.pop() {
            out.push(v);
            for (e, w) in self.neighbors(v) {
                if e != skip_edge && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        out.sort_unstable();
        out
    }

    fn is_tree(&self) -> bool {
        let n = self.vertices.len();
        n > 0 && self.edges.len() + 1 == n && self.side(0, usize::MAX).len() == n
    }

    /// Structural properties A1–A5, and A6 when `collapsed`.
    pub fn check_a_properties(&self, collapsed: bool) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut fail = |p: &str, d: String| out.push(Violation { property: p.into(), detail: d });
        if self.is_gamma_star {
            if !(self.vertices.len() == 2 && self.edges.len() == 1 && self.arrowheads().len() == 2) {
                fail("A1", "exceptional diagram must be two arrowheads joined by an edge".into());
            }
            return out;
        }
        // A1
        if !self.is_tree() {
            fail("A1", "diagram is not a tree".into());
        }
        for (i, e) in self.edges.iter().enumerate() {
            for k in 0..2 {
                let is_box = self.kind(e.ends[k]) == VertexKind::Box;
                match e.weights[k] {
                    Some(0) => fail("A1", format!("edge {i} has weight 0")),
                    Some(_) if !is_box => fail("A3", format!("edge {i} carries a weight at a non-box end")),
                    None if is_box => fail("A3", format!("edge {i} lacks a weight at box {}", e.ends[k])),
                    _ => {}
                }
            }
        }
        // A2
        for v in 0..self.vertices.len() {
            let deg = self.degree(v);
            match self.kind(v) {
                VertexKind::Arrowhead | VertexKind::Knob if deg != 1 => fail("A2", format!("vertex {v} has valence {deg}, expected 1")),
                VertexKind::Box => {
                    if deg < 3 {
                        fail("A2", format!("box {v} has valence {deg} < 3"));
                    }
                    let knobs = self.neighbors(v).iter().filter(|(_, w)| self.kind(*w) == VertexKind::Knob).count();
                    if knobs > 2 {
                        fail("A2", format!("box {v} has {knobs} knob neighbours"));
                    }
                }
                _ => {}
            }
        }
        if self.boxes().is_empty() {
            fail("A2", "diagram has no box vertex".into());
        }
        // A3
        for b in self.boxes() {
            let w = self.weights_at(b);
            for i in 0..w.len() {
                for j in i + 1..w.len() {
                    if w[i].gcd(&w[j]) != 1 {
                        fail("A3", format!("weights {} and {} at box {b} are not coprime", w[i], w[j]));
                    }
                }
            }
        }
        // A4
        for b in self.boxes() {
            let mut empty_sides = 0;
            for (e, w) in self.neighbors(b) {
                if self.kind(w) != VertexKind::Box {
                    continue;
                }
                let side = self.side(w, e);
                if side.iter().all(|&u| self.kind(u) != VertexKind::Arrowhead) {
                    empty_sides += 1;
                    if self.edges[e].weight_at(w) != Some(1) {
                        fail("A4", format!("edge {e} towards an arrowhead-free side has weight {:?} at box {w}", self.edges[e].weight_at(w)));
                    }
                }
            }
            if empty_sides > 1 {
                fail("A4", format!("box {b} has {empty_sides} arrowhead-free sides"));
            }
        }
        // A5
        for (i, e) in self.edges.iter().enumerate() {
            if self.kind(e.ends[0]) == VertexKind::Box && self.kind(e.ends[1]) == VertexKind::Box {
                match self.edge_determinant(i) {
                    Some(d) if d > 0 => {}
                    Some(d) => fail("A5", format!("edge {i} has determinant {d}")),
                    None => fail("A5", format!("edge {i}: determinant overflows")),
                }
            }
        }
        // A6
        if collapsed {
            for (i, e) in self.edges.iter().enumerate() {
                for k in 0..2 {
                    if self.kind(e.ends[k]) == VertexKind::Box && self.kind(e.ends[1 - k]) == VertexKind::Knob && e.weights[k] == Some(1) {
                        fail("A6", format!("box–knob edge {i} has weight 1"));
                    }
                }
            }
        }
        out
    }

    /// `a1·a1' − (other weights at b)·(other weights at b')` for a box–box edge.
    pub fn edge_determinant(&self, edge: usize) -> Option<i128> {
        let e = &self.edges[edge];
        let (b, b2) = (e.ends[0], e.ends[1]);
        let a1 = e.weights[0]? as i128;
        let a1p = e.weights[1]? as i128;
        let mut prod: i128 = 1;
        for (v, skip) in [(b, edge), (b2, edge)] {
            for (f, _) in self.neighbors(v) {
                if f != skip {
                    prod = prod.checked_mul(self.edges[f].weight_at(v)? as i128)?;
                }
            }
        }
        a1.checked_mul(a1p)?.checked_sub(prod)
    }

    /// Properties B1–B4 of the m-function.
    pub fn check_b_properties(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.is_gamma_star {
            return out;
        }
        for e in &self.edges {
            let [v, w] = e.ends;
            let (mvw, mwv) = (m_value(self, v, w), m_value(self, w, v));
            if mvw == 0 && mwv == 0 {
                out.push(Violation { property: "B1".into(), detail: format!("m({v},{w}) = m({w},{v}) = 0") });
            }
            for (x, y, mxy) in [(v, w, mvw), (w, v, mwv)] {
                if self.kind(x) == VertexKind::Box && self.kind(y) == VertexKind::Box && mxy == 0 && e.weight_at(y) != Some(1) {
                    out.push(Violation { property: "B2".into(), detail: format!("m({x},{y}) = 0 but weight at {y} is not 1") });
                }
                if self.kind(x) == VertexKind::Box && self.kind(y) == VertexKind::Arrowhead && mxy != 1 {
                    out.push(Violation { property: "B4".into(), detail: format!("m({x},{y}) = {mxy}") });
                }
            }
        }
        for b in self.boxes() {
            let zeros = self.neighbors(b).iter().filter(|(_, w)| self.kind(*w) == VertexKind::Box && m_value(self, b, *w) == 0).count();
            if zeros > 1 {
                out.push(Violation { property: "B3".into(), detail: format!("box {b} has {zeros} box neighbours with m = 0") });
            }
        }
        out
    }

    /// Graphviz rendering: boxes as circles, knobs as points, arrowheads as
    /// arrows, weights as edge labels.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph splice {\n");
        for (v, vert) in self.vertices.iter().enumerate() {
            let attrs = match vert.kind {
                VertexKind::Box => format!("shape=circle, label=\"b{v}\""),
                VertexKind::Knob => "shape=point".to_string(),
                VertexKind::Arrowhead => "shape=none, label=\"\"".to_string(),
            };
            let _ = writeln!(s, "  v{v} [{attrs}];");
        }
        for e in &self.edges {
            let [v, w] = e.ends;
            let mut attrs = Vec::new();
            if let Some(a) = e.weights[0] {
                attrs.push(format!("taillabel=\"{a}\""));
            }
            if let Some(a) = e.weights[1] {
                attrs.push(format!("headlabel=\"{a}\""));
            }
            let arrow_at = |u: usize| self.kind(u) == VertexKind::Arrowhead;
            match (arrow_at(v), arrow_at(w)) {
                (true, true) => attrs.push("dir=both".into()),
                (false, true) => attrs.push("dir=forward".into()),
                (true, false) => attrs.push("dir=back".into()),
                _ => {}
            }
            let _ = writeln!(s, "  v{v} -- v{w} [{}];", attrs.join(", "));
        }
        s.push_str("}\n");
        s
    }

    /// Drops the given vertices and renumbers the rest in order.
    fn without(&self, dead: &BTreeSet<usize>, extra_edges: Vec<SpliceEdge>, dead_edges: &BTreeSet<usize>) -> SpliceDiagram {
        let mut map = vec![usize::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        for (v, vert) in self.vertices.iter().enumerate() {
            if !dead.contains(&v) {
                map[v] = vertices.len();
                vertices.push(vert.clone());
            }
        }
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter(|(i, _)| !dead_edges.contains(i))
            .map(|(_, e)| e.clone())
            .chain(extra_edges)
            .map(|e| SpliceEdge { ends: [map[e.ends[0]], map[e.ends[1]]], weights: e.weights })
            .collect();
        SpliceDiagram { vertices, edges, is_gamma_star: false }
    }
}

/// Nested-form pairs `(q_i, p_i)` of a Puiseux series: `q_1/p_1` is the
/// first exponent and `(e_i − e_{i−1})·p_1⋯p_{i−1} = q_i/p_i`.
pub fn nested_form(s: &FracPowerSeries) -> Result<Vec<(u64, u64)>, SpliceError> {
    if !s.is_well_formed() {
        return Err(SpliceError::MalformedData(format!("series {s:?} is not well formed")));
    }
    let mut pairs = Vec::with_capacity(s.terms.len());
    let mut prev = Q::zero();
    let mut prod = BigInt::one();
    for (_, n) in &s.terms {
        let e = Q::new(BigInt::from(*n), BigInt::from(s.d));
        let r = (&e - &prev) * Q::from_integer(prod.clone());
        let qi = r.numer().to_u64().ok_or(SpliceError::Overflow("nested form"))?;
        let pi = r.denom().to_u64().ok_or(SpliceError::Overflow("nested form"))?;
        pairs.push((qi, pi));
        prod *= pi;
        prev = e;
    }
    if prod != BigInt::from(s.d) {
        return Err(SpliceError::MalformedData(format!("denominators multiply to {prod}, not d = {}", s.d)));
    }
    Ok(pairs)
}

/// `α_1 = q_1`, `α_{i+1} = q_{i+1} + p_i p_{i+1} α_i`.
pub fn alphas(pairs: &[(u64, u64)]) -> Result<Vec<u64>, SpliceError> {
    let mut out: Vec<u64> = Vec::with_capacity(pairs.len());
    for (i, &(qi, pi)) in pairs.iter().enumerate() {
        let a = if i == 0 {
            qi
        } else {
            let (prev, pp) = (out[i - 1], pairs[i - 1].1);
            pp.checked_mul(pi)
                .and_then(|x| x.checked_mul(prev))
                .and_then(|x| x.checked_add(qi))
                .ok_or(SpliceError::Overflow("alpha recursion"))?
        };
        out.push(a);
    }
    Ok(out)
}

struct Builder<'a> {
    data: &'a [FracPowerSeries],
    pairs: Vec<Vec<(u64, u64)>>,
    alphas: Vec<Vec<u64>>,
    vertices: Vec<Vertex>,
    edges: Vec<SpliceEdge>,
}

impl Builder<'_> {
    fn vertex(&mut self, kind: VertexKind, branch: Option<usize>) -> usize {
        self.vertices.push(Vertex { kind, branch });
        self.vertices.len() - 1
    }

    fn edge(&mut self, v: usize, wv: Option<u64>, w: usize, ww: Option<u64>) {
        self.edges.push(SpliceEdge { ends: [v, w], weights: [wv, ww] });
    }

    /// Builds the part of the diagram for branches that agree up to their
    /// `s`-th term, hanging it off `attach` (box and weight there).
    fn build(&mut self, group: &[usize], s: usize, attach: Option<(usize, u64)>) -> Result<(), SpliceError> {
        let (ended, open): (Vec<usize>, Vec<usize>) = group.iter().partition(|&&j| self.data[j].terms.len() == s);
        if open.is_empty() {
            if ended.len() != 1 {
                return Err(SpliceError::MalformedData("two branches have equivalent data".into()));
            }
            let Some((v, w)) = attach else {
                return Err(SpliceError::MalformedData("a single smooth branch has no splice diagram".into()));
            };
            let a = self.vertex(VertexKind::Arrowhead, Some(ended[0]));
            self.edge(v, Some(w), a, None);
            return Ok(());
        }
        let exponent = |j: usize| Q::new(BigInt::from(self.data[j].terms[s].1), BigInt::from(self.data[j].d));
        let least = open.iter().map(|&j| exponent(j)).min().unwrap();
        let (first, rest): (Vec<usize>, Vec<usize>) = group.iter().partition(|&&j| self.data[j].terms.len() > s && exponent(j) == least);
        let j0 = first[0];
        let (_, p) = self.pairs[j0][s];
        let alpha = self.alphas[j0][s];
        if first.iter().any(|&j| self.pairs[j][s] != self.pairs[j0][s] || self.alphas[j][s] != alpha) {
            return Err(SpliceError::MalformedData("branches with a common truncation disagree on their pairs".into()));
        }
        let b = self.vertex(VertexKind::Box, None);
        match attach {
            Some((v, w)) => self.edge(v, Some(w), b, Some(alpha)),
            None => {
                let k = self.vertex(VertexKind::Knob, None);
                self.edge(b, Some(alpha), k, None);
            }
        }
        if rest.is_empty() {
            let k = self.vertex(VertexKind::Knob, None);
            self.edge(b, Some(p), k, None);
        } else {
            self.build(&rest, s, Some((b, p)))?;
        }
        // one edge of weight 1 per class of the (s+1)-truncations
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for &j in &first {
            let t = self.data[j].truncate(s + 1);
            match classes.iter_mut().find(|c| equivalent(&self.data[c[0]].truncate(s + 1), &t)) {
                Some(c) => c.push(j),
                None => classes.push(vec![j]),
            }
        }
        for class in classes {
            self.build(&class, s + 1, Some((b, 1)))?;
        }
        Ok(())
    }
}

/// The uncollapsed diagram of a singularity with the given Puiseux data.
pub fn build_diagram(data: &[FracPowerSeries]) -> Result<SpliceDiagram, SpliceError> {
    if data.is_empty() {
        return Err(SpliceError::MalformedData("no branches".into()));
    }
    for (i, a) in data.iter().enumerate() {
        for b in &data[i + 1..] {
            if equivalent(a, b) {
                return Err(SpliceError::MalformedData("two branches have equivalent data".into()));
            }
        }
    }
    let pairs = data.iter().map(nested_form).collect::<Result<Vec<_>, _>>()?;
    let alphas = pairs.iter().map(|p| alphas(p)).collect::<Result<Vec<_>, _>>()?;
    let mut b = Builder { data, pairs, alphas, vertices: Vec::new(), edges: Vec::new() };
    let all: Vec<usize> = (0..data.len()).collect();
    b.build(&all, 0, None)?;
    let g = SpliceDiagram { vertices: b.vertices, edges: b.edges, is_gamma_star: false };
    // keep m-values and determinants comfortably inside 128-bit arithmetic
    let total: Option<u128> = g.edges.iter().flat_map(|e| e.weights.iter().flatten()).try_fold(1u128, |acc, &w| acc.checked_mul(w as u128));
    if total.is_none_or(|t| t >= 1 << 56) {
        return Err(SpliceError::Overflow("diagram weights"));
    }
    Ok(g)
}

/// Step 4: removes weight-1 box–knob edges until none is left, or returns
/// the exceptional diagram.
pub fn collapse(g: &SpliceDiagram) -> Result<SpliceDiagram, SpliceError> {
    let mut cur = g.clone();
    for _ in 0..=g.vertices.len() + 1 {
        if cur.is_gamma_star {
            return Ok(cur);
        }
        let found = cur.edges.iter().enumerate().find_map(|(i, e)| {
            (0..2).find_map(|k| {
                let (b, v) = (e.ends[k], e.ends[1 - k]);
                (cur.kind(b) == VertexKind::Box && cur.kind(v) == VertexKind::Knob && e.weights[k] == Some(1)).then_some((i, b, v))
            })
        });
        let Some((knob_edge, b, v)) = found else {
            return Ok(cur);
        };
        let nbrs = cur.neighbors(b);
        let k = nbrs.len();
        let n = nbrs.iter().filter(|(_, w)| cur.kind(*w) == VertexKind::Box).count();
        if k == 3 && n == 0 {
            return Ok(SpliceDiagram::gamma_star());
        }
        if k == 3 {
            let others: Vec<(usize, usize)> = nbrs.into_iter().filter(|&(e, _)| e != knob_edge).collect();
            let [(e1, u1), (e2, u2)] = others[..] else { unreachable!() };
            let merged = SpliceEdge { ends: [u1, u2], weights: [cur.edges[e1].weight_at(u1), cur.edges[e2].weight_at(u2)] };
            cur = cur.without(&[b, v].into(), vec![merged], &[knob_edge, e1, e2].into());
        } else {
            cur = cur.without(&[v].into(), Vec::new(), &[knob_edge].into());
        }
    }
    Err(SpliceError::NonTerminating)
}

/// `m(v, v')` for adjacent `v`, `v'`: the sum over arrowheads `a` beyond
/// `v'` of the product of weights hanging off the path from `v'` to `a`.
pub fn m_value(g: &SpliceDiagram, v: usize, v2: usize) -> u128 {
    let removed = g.edge_between(v, v2).expect("vertices must be adjacent");
    if g.is_gamma_star {
        return 1;
    }
    // depth-first walk from v2 carrying the product of off-path weights
    let mut total: u128 = 0;
    let mut stack = vec![(v2, removed, 1u128)];
    while let Some((u, came_by, prod)) = stack.pop() {
        if g.kind(u) == VertexKind::Arrowhead {
            total += prod;
            continue;
        }
        let nbrs = g.neighbors(u);
        for &(e, w) in &nbrs {
            if e == came_by {
                continue;
            }
            // weights at u of edges other than the incoming and outgoing ones
            let off: u128 = nbrs
                .iter()
                .filter(|&&(f, _)| f != e && f != came_by)
                .map(|&(f, _)| g.edges[f].weight_at(u).unwrap_or(1) as u128)
                .product();
            stack.push((w, e, prod * off));
        }
    }
    total
}

/// Where a characteristic entry comes from.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "type", content = "id", rename_all = "snake_case")]
pub enum Origin {
    Box(usize),
    Edge(usize),
    GammaStar,
}

/// `(χ, d, h; ℓ)` for one component of the monodromy.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CharEntry {
    pub chi: i64,
    pub d: u64,
    pub h: u64,
    pub ell: Q,
    pub origin: Origin,
}

impl CharEntry {
    pub fn tuple(&self) -> (i64, u64, u64, Q) {
        (self.chi, self.d, self.h, self.ell.clone())
    }

    pub fn is_periodic(&self) -> bool {
        self.chi < 0
    }
}

impl std::fmt::Display for CharEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {}; {})", self.chi, self.d, self.h, self.ell)
    }
}

fn to_u64(x: u128, what: &'static str) -> Result<u64, SpliceError> {
    u64::try_from(x).map_err(|_| SpliceError::Overflow(what))
}

/// Data attached to a box vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxData {
    pub ell: u128,
    pub chi: i128,
    pub d: u128,
    pub h: u128,
}

pub fn box_data(g: &SpliceDiagram, b: usize) -> BoxData {
    let nbrs = g.neighbors(b);
    let weights: Vec<u128> = nbrs.iter().map(|&(e, _)| g.edges[e].weight_at(b).unwrap_or(1) as u128).collect();
    let k = nbrs.len() as i128;
    let mut d = 0u128;
    let mut h = 0u128;
    let mut ell = 0u128;
    let mut knob_sum = Q::zero();
    for (i, &(_, v)) in nbrs.iter().enumerate() {
        if g.kind(v) == VertexKind::Knob {
            knob_sum += Q::new(BigInt::one(), BigInt::from(weights[i]));
            continue;
        }
        let m = m_value(g, b, v);
        let back = m_value(g, v, b);
        d = d.gcd(&m);
        h += m.gcd(&back);
        let others: u128 = weights.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, w)| *w).product();
        ell += m * others;
    }
    let chi = Q::from_integer(BigInt::from(ell)) * (Q::from_integer(BigInt::from(2 - k)) + knob_sum);
    BoxData { ell, chi: chi.to_integer().to_i128().unwrap_or(i128::MIN), d, h }
        .with_integral_check(&chi)
}

impl BoxData {
    fn with_integral_check(mut self, chi: &Q) -> Self {
        if !chi.is_integer() {
            // flagged by the caller through the divisibility checks
            self.chi = i128::MIN;
        }
        self
    }
}

/// The two-way identity for `ℓ_b` at every non-knob neighbour.
pub fn ellb_identity_holds(g: &SpliceDiagram, b: usize) -> bool {
    let bd = box_data(g, b);
    let nbrs = g.neighbors(b);
    let weights: Vec<u128> = nbrs.iter().map(|&(e, _)| g.edges[e].weight_at(b).unwrap_or(1) as u128).collect();
    nbrs.iter().enumerate().filter(|(_, (_, v))| g.kind(*v) != VertexKind::Knob).all(|(i, &(_, v))| {
        let others: u128 = weights.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, w)| *w).product();
        m_value(g, b, v) * others + m_value(g, v, b) * weights[i] == bd.ell
    })
}

/// Edges joining a box to a box or an arrowhead.
pub fn twist_edges(g: &SpliceDiagram) -> Vec<usize> {
    if g.is_gamma_star {
        return vec![0];
    }
    g.edges
        .iter()
        .enumerate()
        .filter(|(_, e)| {
            let kinds = [g.kind(e.ends[0]), g.kind(e.ends[1])];
            kinds.contains(&VertexKind::Box) && !kinds.contains(&VertexKind::Knob)
        })
        .map(|(i, _)| i)
        .collect()
}

/// Twist number of an edge: `d_e Δ_e / (ℓ_b ℓ_b')` between boxes and
/// `a / ℓ_b` towards an arrowhead (`a` = weight at the box).
fn edge_entry(g: &SpliceDiagram, e: usize) -> Result<(u64, Q), SpliceError> {
    let edge = &g.edges[e];
    let [v, w] = edge.ends;
    match (g.kind(v), g.kind(w)) {
        (VertexKind::Box, VertexKind::Box) => {
            let d = m_value(g, v, w).gcd(&m_value(g, w, v));
            let delta = g.edge_determinant(e).ok_or(SpliceError::Overflow("edge determinant"))?;
            let (lv, lw) = (box_data(g, v).ell, box_data(g, w).ell);
            let ell = Q::new(BigInt::from(d) * BigInt::from(delta), BigInt::from(lv) * BigInt::from(lw));
            Ok((to_u64(d, "d_e")?, ell))
        }
        (VertexKind::Box, VertexKind::Arrowhead) | (VertexKind::Arrowhead, VertexKind::Box) => {
            let b = if g.kind(v) == VertexKind::Box { v } else { w };
            let a = edge.weight_at(b).unwrap_or(1);
            Ok((1, Q::new(BigInt::from(a), BigInt::from(box_data(g, b).ell))))
        }
        _ => Err(SpliceError::NotATwistEdge(e)),
    }
}

/// Characteristic set: one entry per box and per twist edge.
pub fn characteristic_set(g: &SpliceDiagram) -> Result<Vec<CharEntry>, SpliceError> {
    if g.is_gamma_star {
        return Ok(vec![CharEntry { chi: 0, d: 1, h: 2, ell: q(1), origin: Origin::GammaStar }]);
    }
    if let Some(v) = g.check_b_properties().into_iter().next() {
        return Err(violation(&v.property, v.detail));
    }
    let mut out = Vec::new();
    for b in g.boxes() {
        let bd = box_data(g, b);
        if bd.chi == i128::MIN {
            return Err(violation("divisibility", format!("χ at box {b} is not an integer")));
        }
        if bd.d == 0 || bd.ell == 0 {
            return Err(violation("B3", format!("box {b} has d = {} and ℓ = {}", bd.d, bd.ell)));
        }
        let d = bd.d as i128;
        if bd.h % bd.d != 0 || bd.chi % d != 0 {
            return Err(violation("divisibility", format!("d_b = {} does not divide h_b = {} and χ_b = {} at box {b}", bd.d, bd.h, bd.chi)));
        }
        let twice_genus = 2 - bd.chi / d - (bd.h / bd.d) as i128;
        if twice_genus < 0 || twice_genus % 2 != 0 {
            return Err(violation("divisibility", format!("box {b} gives non-integral genus {twice_genus}/2")));
        }
        out.push(CharEntry {
            chi: i64::try_from(bd.chi).map_err(|_| SpliceError::Overflow("χ_b"))?,
            d: to_u64(bd.d, "d_b")?,
            h: to_u64(bd.h, "h_b")?,
            ell: Q::from_integer(BigInt::from(bd.ell)),
            origin: Origin::Box(b),
        });
    }
    for e in twist_edges(g) {
        let (d, ell) = edge_entry(g, e)?;
        out.push(CharEntry { chi: 0, d, h: 2 * d, ell, origin: Origin::Edge(e) });
    }
    Ok(out)
}

/// Admissible twist map of an edge, in the normal form
/// `φ^{d}(q, p) = (q, p − q·d·ℓ_e − (d/m)(n − d·a/ℓ_b))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistModel {
    pub edge: usize,
    /// the box end `b` with `m(b, b') ≠ 0`; `None` for the exceptional diagram
    pub box_end: Option<usize>,
    pub d_e: u64,
    pub a: u64,
    pub ell_b: u64,
    pub m: u64,
    pub m_prime: u64,
    pub n: i64,
    pub n_prime: i64,
    pub ell_e: Q,
}

impl TwistModel {
    /// The unit positive Dehn twist of the exceptional diagram.
    pub fn unit_twist() -> Self {
        Self { edge: 0, box_end: None, d_e: 1, a: 1, ell_b: 1, m: 1, m_prime: 0, n: 0, n_prime: 1, ell_e: q(1) }
    }

    pub fn bezout_holds(&self) -> bool {
        self.m as i128 * self.n_prime as i128 + self.m_prime as i128 * self.n as i128 == self.d_e as i128
    }

    /// The `p`-translation of `φ^{d_e}` at height `q`.
    pub fn shift(&self, qv: &Q) -> Q {
        let d = q(self.d_e as i64);
        let inner = q(self.n) - &d * q(self.a as i64) / q(self.ell_b as i64);
        -(qv * &d * &self.ell_e) - &d / q(self.m as i64) * inner
    }

    /// Translations at `q = 0` and `q = 1`, reduced to `[0, 1)`.
    pub fn boundary_rotations(&self) -> (Q, Q) {
        (frac(&self.shift(&Q::zero())), frac(&self.shift(&Q::one())))
    }

    /// Heights `q ∈ (0, 1)` of fixed circles: solutions of
    /// `a − q·m·ℓ_b·ℓ_e ∈ ℓ_b·Z`, only when the annulus is not permuted.
    pub fn fixed_points(&self) -> Vec<Q> {
        if self.d_e != 1 {
            return Vec::new();
        }
        let lb = q(self.ell_b as i64);
        let slope = q(self.m as i64) * &lb * &self.ell_e;
        let a = q(self.a as i64);
        if !slope.is_positive() {
            return Vec::new();
        }
        // q = (a − ℓ_b t)/slope ∈ (0, 1)  ⇔  a − slope < ℓ_b t < a
        let lo = ((&a - &slope) / &lb).floor().to_integer() + BigInt::one();
        let hi = (&a / &lb).ceil().to_integer() - BigInt::one();
        let mut out = Vec::new();
        let mut t = lo;
        while t <= hi {
            let qv = (&a - &lb * Q::from_integer(t.clone())) / &slope;
            if qv.is_positive() && qv < Q::one() {
                out.push(qv);
            }
            t += 1;
        }
        out.sort();
        out
    }
}

fn frac(x: &Q) -> Q {
    x - x.floor()
}

/// Minimal nonnegative `n'` with `m·n' + m'·n = gcd(m, m')`.
fn bezout(m: u64, mp: u64) -> (i64, i64) {
    let d = m.gcd(&mp);
    if mp == 0 {
        return (0, (d / m) as i64);
    }
    let (m1, mp1) = ((m / d) as i128, (mp / d) as i128);
    // n' ≡ m1^{-1} (mod mp1)
    let e = num_integer::Integer::extended_gcd(&m1, &mp1);
    let np = e.x.rem_euclid(mp1);
    let n = (1 - m1 * np) / mp1;
    (n as i64, np as i64)
}

pub fn twist_model(g: &SpliceDiagram, e: usize) -> Result<TwistModel, SpliceError> {
    if g.is_gamma_star {
        return Ok(TwistModel::unit_twist());
    }
    let edge = g.edges.get(e).ok_or(SpliceError::NotATwistEdge(e))?;
    let [v, w] = edge.ends;
    let (d_e, ell_e) = edge_entry(g, e)?;
    let candidates: Vec<usize> = [v.min(w), v.max(w)].into_iter().filter(|&x| g.kind(x) == VertexKind::Box).collect();
    let b = candidates
        .iter()
        .copied()
        .find(|&b| m_value(g, b, edge.other(b)) != 0)
        .ok_or_else(|| violation("B1", format!("both m-values on edge {e} vanish")))?;
    let b2 = edge.other(b);
    let m = to_u64(m_value(g, b, b2), "m")?;
    let m_prime = to_u64(m_value(g, b2, b), "m'")?;
    let (n, n_prime) = bezout(m, m_prime);
    Ok(TwistModel {
        edge: e,
        box_end: Some(b),
        d_e,
        a: edge.weight_at(b).unwrap_or(1),
        ell_b: to_u64(box_data(g, b).ell, "ℓ_b")?,
        m,
        m_prime,
        n,
        n_prime,
        ell_e,
    })
}

pub fn twist_models(g: &SpliceDiagram) -> Result<Vec<TwistModel>, SpliceError> {
    twist_edges(g).into_iter().map(|e| twist_model(g, e)).collect()
}
