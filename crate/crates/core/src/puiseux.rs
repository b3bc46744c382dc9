//! Bivariate polynomials, Newton–Puiseux expansion over the rationals and
//! the canonical truncation of the resulting fractional power series.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::poly::{q, rational_root, UniPoly, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PuiseuxError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("not a singular point at the origin: {0}")]
    NotSingular(String),
    #[error("polynomial is not squarefree")]
    NotSquarefree,
    #[error("a branch needs coefficients outside the rationals")]
    IrrationalBranch,
    #[error("order bound {0} reached before the branches separated")]
    OrderBoundTooSmall(u64),
    #[error("available terms do not distinguish the branches")]
    NotSeparated,
}

/// Polynomial `Σ c_ij x^i y^j` with exact rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BivariatePoly {
    terms: BTreeMap<(u32, u32), Q>,
}

impl BivariatePoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Q) -> Self {
        Self::from_terms([((0, 0), c)])
    }

    pub fn monomial(i: u32, j: u32, c: Q) -> Self {
        Self::from_terms([((i, j), c)])
    }

    pub fn x() -> Self {
        Self::monomial(1, 0, Q::one())
    }

    pub fn y() -> Self {
        Self::monomial(0, 1, Q::one())
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ((u32, u32), Q)>) -> Self {
        let mut p = Self::zero();
        for (k, c) in terms {
            p.add_term(k, c);
        }
        p
    }

    fn add_term(&mut self, k: (u32, u32), c: Q) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(k).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn terms(&self) -> &BTreeMap<(u32, u32), Q> {
        &self.terms
    }

    pub fn coeff(&self, i: u32, j: u32) -> Q {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|&k| k == (0, 0))
    }

    pub fn deg_x(&self) -> u32 {
        self.terms.keys().map(|k| k.0).max().unwrap_or(0)
    }

    pub fn deg_y(&self) -> u32 {
        self.terms.keys().map(|k| k.1).max().unwrap_or(0)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut p = self.clone();
        for (k, c) in &o.terms {
            p.add_term(*k, c.clone());
        }
        p
    }

    pub fn neg(&self) -> Self {
        Self { terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self::from_terms(self.terms.iter().map(|(k, a)| (*k, a * c)))
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut p = Self::zero();
        for ((i, j), a) in &self.terms {
            for ((k, l), b) in &o.terms {
                p.add_term((i + k, j + l), a * b);
            }
        }
        p
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut result = Self::constant(Q::one());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        result
    }

    pub fn diff_x(&self) -> Self {
        Self::from_terms(self.terms.iter().filter(|(k, _)| k.0 > 0).map(|(&(i, j), c)| ((i - 1, j), c * q(i as i64))))
    }

    pub fn diff_y(&self) -> Self {
        Self::from_terms(self.terms.iter().filter(|(k, _)| k.1 > 0).map(|(&(i, j), c)| ((i, j - 1), c * q(j as i64))))
    }

    /// `f(x0, y)` as a polynomial in `y`.
    pub fn at_x(&self, x0: &Q) -> UniPoly {
        let mut coeffs = vec![Q::zero(); self.deg_y() as usize + 1];
        for ((i, j), c) in &self.terms {
            coeffs[*j as usize] += c * num_traits::pow(x0.clone(), *i as usize);
        }
        UniPoly::from_coeffs(coeffs)
    }

    /// Coefficient of `y^j`, as a polynomial in `x`.
    pub fn y_coefficient(&self, j: u32) -> UniPoly {
        let mut coeffs = vec![Q::zero(); self.deg_x() as usize + 1];
        for ((i, jj), c) in &self.terms {
            if *jj == j {
                coeffs[*i as usize] = c.clone();
            }
        }
        UniPoly::from_coeffs(coeffs)
    }

    /// `f(0, y)` has a nonzero term.
    pub fn is_y_regular(&self) -> bool {
        self.terms.keys().any(|k| k.0 == 0)
    }

    /// `f(y, x)`.
    pub fn swapped(&self) -> Self {
        Self { terms: self.terms.iter().map(|(&(i, j), c)| ((j, i), c.clone())).collect() }
    }

    /// `f(x + c·y, y)`.
    pub fn sheared(&self, c: &Q) -> Self {
        let shift = Self::x().add(&Self::y().scale(c));
        let mut p = Self::zero();
        for ((i, j), a) in &self.terms {
            p = p.add(&shift.pow(*i).mul(&Self::monomial(0, *j, a.clone())));
        }
        p
    }

    /// Evaluates `f(x(z), y(z))` for univariate polynomials in `z`.
    pub fn compose(&self, x: &UniPoly, y: &UniPoly) -> UniPoly {
        let mut out = UniPoly::zero();
        for ((i, j), c) in &self.terms {
            out = out.add(&x.pow(*i).mul(&y.pow(*j)).scale(c));
        }
        out
    }

    /// Whether `f` has no repeated factor over the rationals.
    ///
    /// Splits `f = c(x)·g(x, y)` with `c` the content in `y`; a repeated
    /// factor either lies in `c` or is a common factor of `g` and `∂g/∂y`
    /// over `Q(x)`. The latter is detected by specializing `x` at enough
    /// points that at least one avoids the resultant's roots.
    pub fn is_squarefree(&self) -> bool {
        if self.is_zero() {
            return false;
        }
        let n = self.deg_y();
        let content = (0..=n).map(|j| self.y_coefficient(j)).fold(UniPoly::zero(), |g, c| g.gcd(&c));
        if content.degree().unwrap_or(0) > 0 && content.gcd(&content.derivative()).degree().unwrap_or(0) > 0 {
            return false;
        }
        if n == 0 {
            return true;
        }
        let lead = self.y_coefficient(n);
        let fy = self.diff_y();
        let needed = (2 * n as u64 - 1) * self.deg_x() as u64 + 1;
        let mut tried = 0;
        let mut x0 = 0i64;
        while tried < needed {
            let xq = q(x0);
            x0 += 1;
            if lead.eval(&xq).is_zero() {
                continue;
            }
            tried += 1;
            if self.at_x(&xq).gcd(&fy.at_x(&xq)).degree() == Some(0) {
                return true;
            }
        }
        false
    }

    /// Lowest total degree of a term.
    pub fn multiplicity(&self) -> u32 {
        self.terms.keys().map(|k| k.0 + k.1).min().unwrap_or(0)
    }
}

fn write_monomial(f: &mut fmt::Formatter<'_>, i: u32, j: u32) -> fmt::Result {
    let mut first = true;
    for (v, e) in [("x", i), ("y", j)] {
        if e == 0 {
            continue;
        }
        if !first {
            write!(f, "*")?;
        }
        first = false;
        if e == 1 {
            write!(f, "{v}")?;
        } else {
            write!(f, "{v}^{e}")?;
        }
    }
    Ok(())
}

impl fmt::Display for BivariatePoly {
    /// Canonical form: increasing total degree, then decreasing power of x.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut keys: Vec<&(u32, u32)> = self.terms.keys().collect();
        keys.sort_by_key(|&&(i, j)| (i + j, std::cmp::Reverse(i)));
        for (n, &&(i, j)) in keys.iter().enumerate() {
            let c = &self.terms[&(i, j)];
            let neg = c.is_negative();
            match (n, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let a = c.abs();
            if i == 0 && j == 0 {
                write!(f, "{a}")?;
            } else {
                if !a.is_one() {
                    write!(f, "{a}*")?;
                }
                write_monomial(f, i, j)?;
            }
        }
        Ok(())
    }
}

const MAX_EXPONENT: u32 = 10_000;

struct Parser<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    text: &'a str,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, PuiseuxError> {
        let position = self.chars.get(self.pos).map_or(self.text.len(), |c| c.0);
        Err(PuiseuxError::Syntax { position, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.1.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|c| match c.1 {
            '−' => '-',
            other => other,
        })
    }

    fn expr(&mut self) -> Result<BivariatePoly, PuiseuxError> {
        let mut acc = match self.peek() {
            Some('+') => {
                self.pos += 1;
                self.term()?
            }
            Some('-') => {
                self.pos += 1;
                self.term()?.neg()
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some('-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<BivariatePoly, PuiseuxError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                Some('/') => {
                    self.pos += 1;
                    self.skip_ws();
                    let at = self.pos;
                    let d = self.unary()?;
                    if !d.is_constant() || d.is_zero() {
                        self.pos = at;
                        return self.err("divisor must be a nonzero constant");
                    }
                    acc = acc.scale(&d.coeff(0, 0).recip());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<BivariatePoly, PuiseuxError> {
        if self.peek() == Some('-') {
            self.pos += 1;
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<BivariatePoly, PuiseuxError> {
        let base = self.atom()?;
        if self.peek() != Some('^') {
            return Ok(base);
        }
        self.pos += 1;
        self.skip_ws();
        let at = self.pos;
        let e = match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(')')?;
                inner
            }
            Some(c) if c.is_ascii_digit() => self.number()?,
            _ => return self.err("expected an exponent"),
        };
        let exponent = if e.is_zero() {
            Some(0)
        } else if e.is_constant() && e.coeff(0, 0).is_integer() {
            e.coeff(0, 0).to_integer().to_u32()
        } else {
            None
        };
        match exponent {
            Some(k) if k <= MAX_EXPONENT => Ok(base.pow(k)),
            _ => {
                self.pos = at;
                self.err(format!("exponent must be an integer between 0 and {MAX_EXPONENT}"))
            }
        }
    }

    fn expect(&mut self, c: char) -> Result<(), PuiseuxError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn number(&mut self) -> Result<BivariatePoly, PuiseuxError> {
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.1.is_ascii_digit()) {
            self.pos += 1;
        }
        let digits: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
        let n: BigInt = digits.parse().map_err(|_| PuiseuxError::Syntax { position: self.chars[start].0, message: "bad number".into() })?;
        Ok(BivariatePoly::constant(Q::from_integer(n)))
    }

    fn atom(&mut self) -> Result<BivariatePoly, PuiseuxError> {
        match self.peek() {
            Some('x') => {
                self.pos += 1;
                Ok(BivariatePoly::x())
            }
            Some('y') => {
                self.pos += 1;
                Ok(BivariatePoly::y())
            }
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) => self.err(format!("unexpected character '{c}'")),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parses a polynomial in `x` and `y` with rational coefficients and the
/// operators `+ - * / ^` and parentheses.
pub fn parse_poly(text: &str) -> Result<BivariatePoly, PuiseuxError> {
    let mut p = Parser { chars: text.char_indices().collect(), pos: 0, text };
    let f = p.expr()?;
    if p.peek().is_some() {
        return p.err("unexpected trailing input");
    }
    Ok(f)
}

impl std::str::FromStr for BivariatePoly {
    type Err = PuiseuxError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_poly(s)
    }
}

/// Truncated fractional power series `(P, d)`: `x = z^d`, `y = P(z)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FracPowerSeries {
    /// `(a_i, n_i)` with strictly increasing `n_i` and nonzero `a_i`
    pub terms: Vec<(Q, u64)>,
    pub d: u64,
    /// All terms with exponent below this are present; `None` when the
    /// series is exact.
    pub truncation_order: Option<u64>,
}

impl FracPowerSeries {
    pub fn new(terms: Vec<(Q, u64)>, d: u64) -> Self {
        Self { terms, d, truncation_order: None }
    }

    /// Checks positivity, ordering, nonzero coefficients and
    /// `gcd(d, n_1, ..., n_k) = 1`.
    pub fn is_well_formed(&self) -> bool {
        self.d > 0
            && self.terms.iter().all(|(a, n)| !a.is_zero() && *n > 0)
            && self.terms.windows(2).all(|w| w[0].1 < w[1].1)
            && self.terms.iter().fold(self.d, |g, (_, n)| g.gcd(n)) == 1
    }

    pub fn is_exact(&self) -> bool {
        self.truncation_order.is_none()
    }

    /// `P` as a polynomial in `z`.
    pub fn as_poly(&self) -> UniPoly {
        let len = self.terms.last().map_or(0, |t| t.1 as usize + 1);
        let mut coeffs = vec![Q::zero(); len];
        for (a, n) in &self.terms {
            coeffs[*n as usize] = a.clone();
        }
        UniPoly::from_coeffs(coeffs)
    }

    /// `d_s`: least `d'` with `d'·n_i ∈ dZ` for the first `s` terms.
    pub fn d_s(&self, s: usize) -> u64 {
        let g = self.terms.iter().take(s).fold(self.d, |g, (_, n)| g.gcd(n));
        self.d / g
    }

    /// `Π^{(s)}`: the first `s` terms, re-expressed over `z^{d_s}`.
    pub fn truncate(&self, s: usize) -> FracPowerSeries {
        let ds = self.d_s(s);
        let terms = self.terms.iter().take(s).map(|(a, n)| (a.clone(), n * ds / self.d)).collect();
        FracPowerSeries { terms, d: ds, truncation_order: None }
    }
}

/// Equivalence under `z ↦ θz` with `θ ∈ {±1}`, `θ^d = 1`.
pub fn equivalent(p: &FracPowerSeries, q: &FracPowerSeries) -> bool {
    if p.d != q.d || p.terms.len() != q.terms.len() {
        return false;
    }
    if p.terms.iter().zip(&q.terms).any(|(a, b)| a.1 != b.1) {
        return false;
    }
    let thetas: &[i64] = if p.d % 2 == 0 { &[1, -1] } else { &[1] };
    thetas.iter().any(|&theta| {
        p.terms.iter().zip(&q.terms).all(|((a, n), (b, _))| {
            let sign = if theta == -1 && n % 2 == 1 { -Q::one() } else { Q::one() };
            *b == sign * a
        })
    })
}

/// The coordinate change under which the expansion was carried out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coordinates {
    Identity,
    /// `x` and `y` exchanged
    Swapped,
    /// `x ↦ x + c·y`
    Sheared(Q),
}

impl Coordinates {
    pub fn apply(&self, f: &BivariatePoly) -> BivariatePoly {
        match self {
            Coordinates::Identity => f.clone(),
            Coordinates::Swapped => f.swapped(),
            Coordinates::Sheared(c) => f.sheared(c),
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Coordinates::Identity
    }
}

impl fmt::Display for Coordinates {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coordinates::Identity => write!(f, "identity"),
            Coordinates::Swapped => write!(f, "swap x,y"),
            Coordinates::Sheared(c) => write!(f, "x -> x + {c}*y"),
        }
    }
}

/// Branches of `f` at the origin in the coordinates `coordinates`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expansion {
    pub coordinates: Coordinates,
    /// `f` written in the new coordinates
    pub poly: BivariatePoly,
    pub branches: Vec<FracPowerSeries>,
}

const SHEARS: [i64; 6] = [1, -1, 2, -2, 3, -3];

/// Newton–Puiseux expansion of every branch of `f` at the origin.
///
/// Each branch is computed until `f(z^d, P(z))` vanishes to order at least
/// `order_bound` (or exactly). Coordinates are changed (swap, then a few
/// shears) if `x = 0` is a branch or a branch needs irrational
/// coefficients in the original chart.
pub fn newton_puiseux(f: &BivariatePoly, order_bound: u64) -> Result<Expansion, PuiseuxError> {
    if f.is_zero() {
        return Err(PuiseuxError::NotSingular("zero polynomial".into()));
    }
    if !f.coeff(0, 0).is_zero() {
        return Err(PuiseuxError::NotSingular("f(0,0) is not zero".into()));
    }
    if !f.coeff(1, 0).is_zero() || !f.coeff(0, 1).is_zero() {
        return Err(PuiseuxError::NotSingular("f has a linear term, the origin is a smooth point".into()));
    }
    if !f.is_squarefree() {
        return Err(PuiseuxError::NotSquarefree);
    }
    let charts = [Coordinates::Identity, Coordinates::Swapped].into_iter().chain(SHEARS.iter().map(|&c| Coordinates::Sheared(q(c))));
    let mut last = PuiseuxError::IrrationalBranch;
    for coordinates in charts {
        let g = coordinates.apply(f);
        if !g.is_y_regular() {
            continue;
        }
        let mut branches = Vec::new();
        match expand(&g, Partial::start(), order_bound, &mut branches) {
            Ok(()) => return Ok(Expansion { coordinates, poly: g, branches }),
            Err(PuiseuxError::IrrationalBranch) => last = PuiseuxError::IrrationalBranch,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// State of one branch under construction: `x = x_k^D` and
/// `y = Σ c_i x^{e_i} + x^E·y_k`, with `f = x_k^M · f_k(x_k, y_k)`.
#[derive(Clone, Debug)]
struct Partial {
    terms: Vec<(Q, Q)>,
    denom: u64,
    exp: Q,
    m: u64,
}

impl Partial {
    fn start() -> Self {
        Self { terms: Vec::new(), denom: 1, exp: Q::zero(), m: 0 }
    }

    fn finish(&self, truncation_order: Option<u64>) -> FracPowerSeries {
        let d = self.denom;
        let terms = self
            .terms
            .iter()
            .map(|(c, e)| {
                let n = e * q(d as i64);
                debug_assert!(n.is_integer());
                (c.clone(), n.to_integer().to_u64().expect("exponent fits"))
            })
            .collect();
        FracPowerSeries { terms, d, truncation_order }
    }
}

struct Edge {
    p: u32,
    q: u32,
    /// value of `p·i + q·j` along the edge
    m: u64,
    low_j: u32,
    high_j: u32,
}

/// Edges of the Newton polygon between `(0, n)` and the lowest row.
fn newton_edges(f: &BivariatePoly) -> Vec<Edge> {
    let mut min_i: BTreeMap<u32, u32> = BTreeMap::new();
    for &(i, j) in f.terms().keys() {
        let e = min_i.entry(j).or_insert(i);
        *e = (*e).min(i);
    }
    let n = *min_i.iter().find(|(_, &i)| i == 0).expect("y-regular").0;
    let j0 = *min_i.keys().next().unwrap();
    let mut edges = Vec::new();
    let (mut ic, mut jc) = (0u32, n);
    while jc > j0 {
        // steepest descent: least slope (i - ic)/(jc - j), farthest on ties
        let mut best: Option<(u32, u32)> = None;
        for (&j, &i) in min_i.range(..jc) {
            let better = match best {
                None => true,
                Some((bi, bj)) => {
                    let lhs = (i as i64 - ic as i64) * (jc - bj) as i64;
                    let rhs = (bi as i64 - ic as i64) * (jc - j) as i64;
                    lhs < rhs || (lhs == rhs && j < bj)
                }
            };
            if better {
                best = Some((i, j));
            }
        }
        let (i, j) = best.unwrap();
        let (num, den) = ((i - ic) as u64, (jc - j) as u64);
        let g = num.gcd(&den);
        let (qq, p) = ((num / g) as u32, (den / g) as u32);
        edges.push(Edge { p, q: qq, m: p as u64 * ic as u64 + qq as u64 * jc as u64, low_j: j, high_j: jc });
        ic = i;
        jc = j;
    }
    edges
}

fn binomial_row(j: u32, c: &Q) -> Vec<Q> {
    // coefficients of (c + y)^j
    let mut row = vec![Q::one()];
    for _ in 0..j {
        let mut next = vec![Q::zero(); row.len() + 1];
        for (l, a) in row.iter().enumerate() {
            next[l] += a * c;
            next[l + 1] += a;
        }
        row = next;
    }
    row
}

/// `f(x^p, x^q (c + y)) / x^m`, dropping terms with x-degree ≥ `cap`.
fn substitute(f: &BivariatePoly, e: &Edge, c: &Q, cap: Option<u64>) -> BivariatePoly {
    let mut rows: BTreeMap<u32, Vec<Q>> = BTreeMap::new();
    let mut out = BivariatePoly::zero();
    for (&(i, j), a) in f.terms() {
        let xe = e.p as u64 * i as u64 + e.q as u64 * j as u64 - e.m;
        if cap.is_some_and(|cap| xe >= cap) {
            continue;
        }
        let row = rows.entry(j).or_insert_with(|| binomial_row(j, c));
        for (l, b) in row.iter().enumerate() {
            out.add_term((xe as u32, l as u32), a * b);
        }
    }
    out
}

fn expand(f: &BivariatePoly, st: Partial, bound: u64, out: &mut Vec<FracPowerSeries>) -> Result<(), PuiseuxError> {
    let n = f.terms().keys().filter(|k| k.0 == 0).map(|k| k.1).min().expect("y-regular");
    let j0 = f.terms().keys().map(|k| k.1).min().unwrap();
    if j0 >= 2 {
        return Err(PuiseuxError::NotSquarefree);
    }
    if j0 == 1 && n == 1 {
        out.push(st.finish(None));
        return Ok(());
    }
    let mut cap = None;
    if n == 1 {
        let i0 = f.terms().keys().filter(|k| k.1 == 0).map(|k| k.0).min().unwrap() as u64;
        if st.m + i0 >= bound {
            let last = (&st.exp * q(st.denom as i64)).to_integer().to_u64().unwrap();
            out.push(st.finish(Some(last + i0)));
            return Ok(());
        }
        cap = Some(bound - st.m);
    } else if st.m >= bound {
        return Err(PuiseuxError::OrderBoundTooSmall(bound));
    }
    if j0 == 1 {
        // y = 0 is one of several roots here
        out.push(st.finish(None));
    }
    for edge in newton_edges(f) {
        let psi_deg = (edge.high_j - edge.low_j) / edge.p;
        let mut psi = vec![Q::zero(); psi_deg as usize + 1];
        for (&(i, j), a) in f.terms() {
            if edge.p as u64 * i as u64 + edge.q as u64 * j as u64 == edge.m {
                psi[((j - edge.low_j) / edge.p) as usize] = a.clone();
            }
        }
        let psi = UniPoly::from_coeffs(psi);
        let roots = psi.rational_roots();
        if roots.iter().map(|r| r.1).sum::<usize>() != psi_deg as usize {
            return Err(PuiseuxError::IrrationalBranch);
        }
        for (w, _) in roots {
            let c = rational_root(&w, edge.p).ok_or(PuiseuxError::IrrationalBranch)?;
            let denom = st.denom * edge.p as u64;
            let e = &st.exp + Q::new(BigInt::from(edge.q), BigInt::from(denom));
            let mut terms = st.terms.clone();
            terms.push((c.clone(), e.clone()));
            let next = Partial { terms, denom, exp: e, m: st.m * edge.p as u64 + edge.m };
            let g = substitute(f, &edge, &c, cap);
            expand(&g, next, bound, out)?;
        }
    }
    Ok(())
}

/// Per-series truncation index `r_j` and the truncated series `Π_j^{(r_j)}`.
pub fn truncation_index(series: &[FracPowerSeries]) -> Result<Vec<(usize, FracPowerSeries)>, PuiseuxError> {
    let max_len = series.iter().map(|s| s.terms.len()).max().unwrap_or(0);
    let known = |s: &FracPowerSeries, k: usize| k <= s.terms.len() || s.is_exact();
    series
        .iter()
        .enumerate()
        .map(|(j, pj)| {
            for s in 0..=max_len {
                if !known(pj, s) || series.iter().any(|o| !known(o, s)) {
                    break;
                }
                if pj.d_s(s) != pj.d {
                    continue;
                }
                let tj = pj.truncate(s);
                if series.iter().enumerate().all(|(k, o)| k == j || !equivalent(&tj, &o.truncate(s))) {
                    return Ok((s, tj));
                }
            }
            Err(PuiseuxError::NotSeparated)
        })
        .collect()
}

/// Polynomial → Newton–Puiseux → truncation, returning the expansion too.
pub fn puiseux_data(f: &BivariatePoly, order_bound: u64) -> Result<(Expansion, Vec<FracPowerSeries>), PuiseuxError> {
    let exp = newton_puiseux(f, order_bound)?;
    let data = truncation_index(&exp.branches)?.into_iter().map(|(_, s)| s).collect();
    Ok((exp, data))
}
