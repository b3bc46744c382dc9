//! JSON renderings of core results. Rationals are written as
//! `{"num": "...", "den": "..."}` so that they survive exactly.

use floer_core::finite_type::{ValidationReport, Violation};
use floer_core::monodromy::{MilnorDecomposition, VerificationReport};
use floer_core::poly::Q;
use floer_core::puiseux::FracPowerSeries;
use floer_core::splice::{CharEntry, TwistModel};
use floer_core::surface_homology::{GradedZ2Module, Ranks, SurfacePair};
use serde_json::{json, Value};

pub fn rational(q: &Q) -> Value {
    json!({"num": q.numer().to_string(), "den": q.denom().to_string()})
}

pub fn ranks(r: &Ranks) -> Value {
    json!([r.get(0), r.get(1), r.get(2)])
}

pub fn series(s: &FracPowerSeries) -> Value {
    json!({
        "coeffs": s.terms.iter().map(|(a, _)| rational(a)).collect::<Vec<_>>(),
        "exps": s.terms.iter().map(|(_, n)| n).collect::<Vec<_>>(),
        "d": s.d,
    })
}

pub fn char_entry(c: &CharEntry) -> Value {
    json!({"chi": c.chi, "d": c.d, "h": c.h, "ell": rational(&c.ell), "origin": c.origin, "text": c.to_string()})
}

pub fn twist_model(t: &TwistModel) -> Value {
    let (r0, r1) = t.boundary_rotations();
    json!({
        "edge": t.edge,
        "box": t.box_end,
        "d": t.d_e,
        "a": t.a,
        "ell_b": t.ell_b,
        "m": t.m,
        "m_prime": t.m_prime,
        "n": t.n,
        "n_prime": t.n_prime,
        "ell_e": rational(&t.ell_e),
        "boundary_rotations": [rational(&r0), rational(&r1)],
        "fixed_points": t.fixed_points().iter().map(rational).collect::<Vec<_>>(),
    })
}

pub fn decomposition(d: &MilnorDecomposition) -> Value {
    json!({
        "fiber": d.fiber,
        "pieces": d.pieces.iter().map(char_entry).collect::<Vec<_>>(),
        "annuli": d.annuli.iter().zip(&d.gluing).map(|((c, t), ends)| json!({"entry": char_entry(c), "model": twist_model(t), "ends": ends})).collect::<Vec<_>>(),
    })
}

pub fn module(m: &GradedZ2Module) -> Value {
    let actions: Vec<Value> = m.actions.iter().map(|(k, a)| json!({"class": k, "degree": a.degree, "rank": a.matrix.rank()})).collect();
    json!({"ranks": ranks(&m.ranks), "actions": actions})
}

pub fn surface_pair(p: &SurfacePair) -> Value {
    json!(p.components.iter().map(|c| json!({"genus": c.genus, "boundary": c.boundary_circles, "marked": c.marked})).collect::<Vec<_>>())
}

pub fn validation(r: &ValidationReport) -> Value {
    json!({"valid": r.is_valid(), "violations": r.violations.iter().map(violation).collect::<Vec<_>>()})
}

fn violation(v: &Violation) -> Value {
    json!({"clause": v.clause, "message": v.message})
}

pub fn verification(r: &VerificationReport) -> Value {
    json!({"passed": r.all_passed(), "checks": r.checks})
}

/// One-line summary of ranks, e.g. `(0, 2, 1)`.
pub fn ranks_text(r: &Ranks) -> String {
    r.to_string()
}
