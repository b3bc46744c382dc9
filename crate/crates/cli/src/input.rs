//! Input documents: JSON files tagged by `kind`, versioned by
//! `schema_version`.

use std::path::Path;

use floer_core::finite_type::FiniteTypeMap;
use floer_core::monodromy::EmbeddingSpec;
use floer_core::poly::Q;
use floer_core::puiseux::FracPowerSeries;
use num_bigint::BigInt;
use num_traits::Zero;
use serde::Deserialize;
use serde_json::Value;
use thiserror::Error;

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Schema(String),
}

/// A rational number as `{"num": "...", "den": "..."}`, a plain integer or
/// a `"p/q"` string.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum JsonRational {
    Int(i64),
    Text(String),
    Parts { num: NumText, den: NumText },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum NumText {
    Int(i64),
    Text(String),
}

impl NumText {
    fn to_bigint(&self) -> Result<BigInt, InputError> {
        match self {
            NumText::Int(n) => Ok(BigInt::from(*n)),
            NumText::Text(s) => s.trim().parse().map_err(|_| InputError::Schema(format!("not an integer: {s:?}"))),
        }
    }
}

impl JsonRational {
    pub fn to_q(&self) -> Result<Q, InputError> {
        let (num, den) = match self {
            JsonRational::Int(n) => (BigInt::from(*n), BigInt::from(1)),
            JsonRational::Text(s) => match s.split_once('/') {
                Some((a, b)) => (NumText::Text(a.into()).to_bigint()?, NumText::Text(b.into()).to_bigint()?),
                None => (NumText::Text(s.clone()).to_bigint()?, BigInt::from(1)),
            },
            JsonRational::Parts { num, den } => (num.to_bigint()?, den.to_bigint()?),
        };
        if den.is_zero() {
            return Err(InputError::Schema("rational with zero denominator".into()));
        }
        Ok(Q::new(num, den))
    }
}

#[derive(Clone, Debug, Deserialize)]
pub struct BranchInput {
    pub coeffs: Vec<JsonRational>,
    pub exps: Vec<u64>,
    pub d: u64,
}

impl BranchInput {
    pub fn to_series(&self) -> Result<FracPowerSeries, InputError> {
        if self.coeffs.len() != self.exps.len() {
            return Err(InputError::Schema(format!("{} coefficients but {} exponents", self.coeffs.len(), self.exps.len())));
        }
        let terms = self.coeffs.iter().zip(&self.exps).map(|(c, &n)| Ok((c.to_q()?, n))).collect::<Result<Vec<_>, InputError>>()?;
        Ok(FracPowerSeries::new(terms, self.d))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    FiniteTypeMap(FiniteTypeMap),
    Polynomial { poly: String },
    PuiseuxData { branches: Vec<BranchInput> },
    AkConfig { k: u32 },
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::FiniteTypeMap(_) => "finite_type_map",
            Payload::Polynomial { .. } => "polynomial",
            Payload::PuiseuxData { .. } => "puiseux_data",
            Payload::AkConfig { .. } => "ak_config",
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
pub struct Options {
    pub order_bound: Option<u64>,
    pub embedding: Option<EmbeddingSpec>,
}

#[derive(Clone, Debug)]
pub struct InputDocument {
    pub payload: Payload,
    pub options: Options,
    /// the document as read, echoed into reports
    pub raw: Value,
}

fn read_json(path: &Path) -> Result<Value, InputError> {
    let text = std::fs::read_to_string(path).map_err(|source| InputError::Io { path: path.display().to_string(), source })?;
    serde_json::from_str(&text).map_err(|e| InputError::Schema(format!("{}: {e}", path.display())))
}

pub fn parse_document(raw: Value) -> Result<InputDocument, InputError> {
    let obj = raw.as_object().ok_or_else(|| InputError::Schema("input must be a JSON object".into()))?;
    match obj.get("schema_version") {
        None => {}
        Some(v) if v.as_u64() == Some(SCHEMA_VERSION) => {}
        Some(v) => return Err(InputError::Schema(format!("unsupported schema_version {v}"))),
    }
    let mut body = obj.clone();
    body.remove("schema_version");
    let options = match body.remove("options") {
        Some(o) => serde_json::from_value(o).map_err(|e| InputError::Schema(format!("options: {e}")))?,
        None => Options::default(),
    };
    let payload = serde_json::from_value(Value::Object(body)).map_err(|e| InputError::Schema(e.to_string()))?;
    Ok(InputDocument { payload, options, raw })
}

pub fn read_document(path: &Path) -> Result<InputDocument, InputError> {
    parse_document(read_json(path)?)
}

pub fn read_embedding(path: &Path) -> Result<EmbeddingSpec, InputError> {
    let mut v = read_json(path)?;
    if let Some(obj) = v.as_object_mut() {
        obj.remove("schema_version");
    }
    serde_json::from_value(v).map_err(|e| InputError::Schema(format!("embedding: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn rationals_in_all_spellings() {
        for (v, expected) in [(json!(3), Q::from_integer(3.into())), (json!("-1/2"), Q::new((-1).into(), 2.into())), (json!({"num": "5", "den": "10"}), Q::new(1.into(), 2.into()))] {
            let r: JsonRational = serde_json::from_value(v).unwrap();
            assert_eq!(r.to_q().unwrap(), expected);
        }
        let zero: JsonRational = serde_json::from_value(json!({"num": 1, "den": 0})).unwrap();
        assert!(zero.to_q().is_err());
    }

    #[test]
    fn documents_by_kind() {
        let d = parse_document(json!({"schema_version": 1, "kind": "polynomial", "poly": "x^2+y^3", "options": {"order_bound": 32}})).unwrap();
        assert_eq!(d.payload.kind(), "polynomial");
        assert_eq!(d.options.order_bound, Some(32));
        let p = parse_document(json!({"kind": "puiseux_data", "branches": [{"coeffs": [1], "exps": [3], "d": 2}]})).unwrap();
        let Payload::PuiseuxData { branches } = p.payload else { panic!() };
        assert_eq!(branches[0].to_series().unwrap().d, 2);
        assert!(parse_document(json!({"kind": "nonsense"})).is_err());
        assert!(parse_document(json!({"schema_version": 2, "kind": "polynomial", "poly": "x"})).is_err());
    }
}
