//! Exact rational numbers and univariate polynomials over the rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Exact `k`-th root of a rational, if it is rational (real root; for even
/// `k` the positive one).
pub fn rational_root(w: &Q, k: u32) -> Option<Q> {
    if k == 1 {
        return Some(w.clone());
    }
    if w.is_negative() && k % 2 == 0 {
        return None;
    }
    let root = |n: &BigInt| -> Option<BigInt> {
        let r = n.abs().nth_root(k);
        (num_traits::pow(r.clone(), k as usize) == n.abs()).then(|| if n.is_negative() { -r } else { r })
    };
    Some(Q::new(root(w.numer())?, root(w.denom())?))
}

/// Polynomial in one variable with rational coefficients, stored from the
/// constant term upwards with no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct UniPoly {
    coeffs: Vec<Q>,
}

impl UniPoly {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Q) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn x() -> Self {
        Self::from_coeffs(vec![Q::zero(), Q::one()])
    }

    pub fn from_coeffs(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| q(c)).collect())
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Q {
        self.coeffs.get(i).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> Q {
        self.coeffs.last().cloned().unwrap_or_else(Q::zero)
    }

    /// Order of vanishing at 0 (`None` for the zero polynomial).
    pub fn order(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn eval(&self, x: &Q) -> Q {
        self.coeffs.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self::from_coeffs(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * q(i as i64)).collect())
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::from_coeffs((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::from_coeffs((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Q::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::from_coeffs(out)
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::constant(Q::one()), |acc, _| acc.mul(self))
    }

    /// Euclidean division; panics on division by zero.
    pub fn divrem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by the zero polynomial");
        let lead_inv = d.lead().recip();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Q::zero(); self.coeffs.len().saturating_sub(dd)];
        while rem.len() > dd && !rem.is_empty() {
            let k = rem.len() - 1 - dd;
            let c = rem.last().unwrap() * &lead_inv;
            for (i, b) in d.coeffs.iter().enumerate() {
                rem[k + i] -= &c * b;
            }
            quot[k] = c;
            rem.pop();
            while rem.last().is_some_and(Zero::is_zero) {
                rem.pop();
            }
        }
        (Self::from_coeffs(quot), Self::from_coeffs(rem))
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        self.scale(&self.lead().recip())
    }

    /// Monic greatest common divisor (zero if both are zero).
    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.divrem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn squarefree_part(&self) -> Self {
        if self.degree().unwrap_or(0) == 0 {
            return self.monic();
        }
        let g = self.gcd(&self.derivative());
        self.divrem(&g).0.monic()
    }

    /// Primitive integer coefficients proportional to `self`, with positive
    /// leading coefficient.
    pub fn primitive_integer(&self) -> Vec<BigInt> {
        let lcm = self.coeffs.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let ints: Vec<BigInt> = self.coeffs.iter().map(|c| (c * Q::from_integer(lcm.clone())).to_integer()).collect();
        let g = ints.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
        let sign = if self.lead().is_negative() { -BigInt::one() } else { BigInt::one() };
        ints.into_iter().map(|c| c / &g * &sign).collect()
    }

    /// All rational roots with multiplicities, in increasing order.
    pub fn rational_roots(&self) -> Vec<(Q, usize)> {
        if self.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        let roots = squarefree_rational_roots(self.squarefree_part());
        roots
            .into_iter()
            .map(|r| {
                let lin = Self::from_coeffs(vec![-r.clone(), Q::one()]);
                let mut p = self.clone();
                let mut mult = 0;
                loop {
                    let (quot, rem) = p.divrem(&lin);
                    if !rem.is_zero() {
                        break;
                    }
                    mult += 1;
                    p = quot;
                }
                (r, mult)
            })
            .collect()
    }
}

fn sturm_sequence(g: &UniPoly) -> Vec<UniPoly> {
    let mut seq = vec![g.clone(), g.derivative()];
    loop {
        let n = seq.len();
        if seq[n - 1].is_zero() {
            seq.pop();
            break;
        }
        let r = seq[n - 2].divrem(&seq[n - 1]).1;
        if r.is_zero() {
            break;
        }
        seq.push(r.scale(&q(-1)));
    }
    seq
}

fn sign_changes(seq: &[UniPoly], x: &Q) -> usize {
    let signs: Vec<bool> = seq.iter().map(|p| p.eval(x)).filter(|v| !v.is_zero()).map(|v| v.is_positive()).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Simplest fraction (least denominator) in the open interval `(lo, hi)`.
fn simplest_between(lo: &Q, hi: &Q) -> Q {
    // Stern–Brocot descent via continued fractions
    let fl = lo.floor();
    if &(fl.clone() + Q::one()) < hi {
        return fl + Q::one();
    }
    if lo.is_integer() && &(lo.clone() + Q::one()) < hi {
        return lo.clone() + Q::one();
    }
    // lo and hi share integer part fl (or hi = fl + 1 exactly)
    let a = lo - &fl;
    let b = hi - &fl;
    if a.is_zero() {
        // interval (0, b) with b ≤ 1: 1/n with n > 1/b
        let n = (b.recip()).floor() + Q::one();
        return fl + n.recip();
    }
    // 1/b < 1/a: recurse on reciprocals
    fl + simplest_between(&b.recip(), &a.recip()).recip()
}

fn squarefree_rational_roots(mut g: UniPoly) -> Vec<Q> {
    let mut roots = Vec::new();
    'outer: loop {
        if g.degree().unwrap_or(0) == 0 {
            break;
        }
        if g.coeff(0).is_zero() {
            roots.push(Q::zero());
            g = g.divrem(&UniPoly::x()).0;
            continue;
        }
        let ints = g.primitive_integer();
        let lead = Q::from_integer(ints.last().unwrap().abs());
        let eps = (q(2) * &lead * &lead).recip();
        let monic = g.monic();
        let bound = monic.coeffs.iter().take(monic.coeffs.len() - 1).map(|c| c.abs()).max().unwrap_or_else(Q::zero) + Q::one();
        let seq = sturm_sequence(&g);
        let mut stack = vec![(-bound.clone(), bound)];
        while let Some((lo, hi)) = stack.pop() {
            let count = sign_changes(&seq, &lo) - sign_changes(&seq, &hi);
            if count == 0 {
                continue;
            }
            if count == 1 && &hi - &lo < eps {
                let cand = simplest_between(&lo, &hi);
                if cand.denom() <= lead.numer() && g.eval(&cand).is_zero() {
                    roots.push(cand);
                }
                if g.eval(&hi).is_zero() {
                    roots.push(hi);
                }
                continue;
            }
            let mid = (&lo + &hi) / q(2);
            if g.eval(&mid).is_zero() {
                roots.push(mid.clone());
                g = g.divrem(&UniPoly::from_coeffs(vec![-mid, Q::one()])).0;
                continue 'outer;
            }
            stack.push((lo, mid.clone()));
            stack.push((mid, hi));
        }
        break;
    }
    roots.sort();
    roots.dedup();
    roots
}
