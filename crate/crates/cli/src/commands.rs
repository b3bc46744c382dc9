//! The subcommands. Each returns an [`Outcome`]: a JSON report, a short
//! text rendering and the process exit code.

use std::fmt::Write as _;
use std::path::Path;

use floer_core::finite_type::{floer_homology, lefschetz_outside, nielsen_number, sigma0, validate, FiniteTypeError, FiniteTypeMap};
use floer_core::monodromy::{ak_polynomial, assemble, hf_of_monodromy, hf_plus, verify_monodromy, EmbeddingSpec, MonodromyError};
use floer_core::puiseux::{newton_puiseux, parse_poly, truncation_index, FracPowerSeries, PuiseuxError};
use floer_core::splice::{build_diagram, characteristic_set, collapse, twist_models, CharEntry, SpliceDiagram, SpliceError};
use serde_json::{json, Map, Value};

use crate::input::{read_document, read_embedding, InputDocument, InputError, Payload, SCHEMA_VERSION};
use crate::report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_SCHEMA: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_IRRATIONAL: i32 = 3;

pub const DEFAULT_ORDER_BOUND: u64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    HfMap,
    HfSing,
    Splice,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::HfMap => "hf-map",
            Command::HfSing => "hf-sing",
            Command::Splice => "splice",
            Command::Validate => "validate",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub order_bound: Option<u64>,
    pub embedding: Option<std::path::PathBuf>,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Value,
    pub text: String,
    pub exit_code: i32,
    pub dot: Option<String>,
}

/// A failure with the clause it violates and, when useful, a hint.
#[derive(Clone, Debug)]
struct Failure {
    exit_code: i32,
    clause: String,
    message: String,
    hint: Option<String>,
}

impl Failure {
    fn new(exit_code: i32, clause: &str, message: impl Into<String>) -> Self {
        Self { exit_code, clause: clause.into(), message: message.into(), hint: None }
    }

    fn json(&self) -> Value {
        let mut v = json!({"clause": self.clause, "message": self.message});
        if let Some(h) = &self.hint {
            v["hint"] = json!(h);
        }
        v
    }
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::new(EXIT_SCHEMA, "schema", e.to_string())
    }
}

impl From<PuiseuxError> for Failure {
    fn from(e: PuiseuxError) -> Self {
        let (code, clause) = match &e {
            PuiseuxError::Syntax { .. } => (EXIT_SCHEMA, "syntax"),
            PuiseuxError::IrrationalBranch => (EXIT_IRRATIONAL, "irrational_branch"),
            PuiseuxError::NotSingular(_) => (EXIT_INVALID, "not_singular"),
            PuiseuxError::NotSquarefree => (EXIT_INVALID, "not_squarefree"),
            PuiseuxError::OrderBoundTooSmall(_) => (EXIT_INVALID, "order_bound_too_small"),
            PuiseuxError::NotSeparated => (EXIT_INVALID, "not_separated"),
        };
        let mut f = Failure::new(code, clause, e.to_string());
        if code == EXIT_IRRATIONAL {
            f.hint = Some("the branches need irrational coefficients; pass rational Puiseux data of an equivalent singularity as a puiseux_data document".into());
        }
        if code == EXIT_INVALID && clause == "order_bound_too_small" {
            f.hint = Some("raise --order-bound".into());
        }
        f
    }
}

impl From<SpliceError> for Failure {
    fn from(e: SpliceError) -> Self {
        match &e {
            SpliceError::PropertyViolation { property, .. } => Failure::new(EXIT_INVALID, property, e.to_string()),
            SpliceError::MalformedData(_) => Failure::new(EXIT_INVALID, "malformed_data", e.to_string()),
            _ => Failure::new(EXIT_INVALID, "splice", e.to_string()),
        }
    }
}

impl From<MonodromyError> for Failure {
    fn from(e: MonodromyError) -> Self {
        match e {
            MonodromyError::Splice(s) => s.into(),
            MonodromyError::Puiseux(p) => p.into(),
            MonodromyError::BadEmbedding(m) => Failure::new(EXIT_INVALID, "embedding", m),
            MonodromyError::VerificationFailed(m) => Failure::new(EXIT_INVALID, "verification", m),
        }
    }
}

/// Report skeleton shared by all commands.
struct Builder {
    command: Command,
    file: String,
    input: Value,
    stages: Map<String, Value>,
    results: Map<String, Value>,
    warnings: Vec<String>,
    errors: Vec<Value>,
    text: String,
    exit_code: i32,
    dot: Option<String>,
}

impl Builder {
    fn new(command: Command, file: &Path) -> Self {
        Self {
            command,
            file: file.display().to_string(),
            input: Value::Null,
            stages: Map::new(),
            results: Map::new(),
            warnings: Vec::new(),
            errors: Vec::new(),
            text: format!("{} {}\n", command.name(), file.display()),
            exit_code: EXIT_OK,
            dot: None,
        }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        let _ = writeln!(self.text, "  {}", s.as_ref());
    }

    fn fail(&mut self, f: Failure) {
        self.line(format!("error [{}]: {}", f.clause, f.message));
        if let Some(h) = &f.hint {
            self.line(format!("hint: {h}"));
        }
        self.errors.push(f.json());
        self.exit_code = self.exit_code.max(f.exit_code);
    }

    fn finish(self) -> Outcome {
        let report = json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command.name(),
            "file": self.file,
            "input": self.input,
            "stages": Value::Object(self.stages),
            "results": Value::Object(self.results),
            "warnings": self.warnings,
            "errors": self.errors,
            "exit_code": self.exit_code,
        });
        let mut text = self.text;
        let _ = writeln!(text, "  exit {}", self.exit_code);
        Outcome { report, text, exit_code: self.exit_code, dot: self.dot }
    }
}

pub fn run(command: Command, file: &Path, opts: &RunOptions) -> Outcome {
    let mut b = Builder::new(command, file);
    let doc = match read_document(file) {
        Ok(d) => d,
        Err(e) => {
            b.fail(e.into());
            return b.finish();
        }
    };
    b.input = doc.raw.clone();
    let result = match command {
        Command::HfMap => match &doc.payload {
            Payload::FiniteTypeMap(map) => hf_map(&mut b, map),
            other => Err(Failure::new(EXIT_SCHEMA, "schema", format!("hf-map expects a finite_type_map document, got {}", other.kind()))),
        },
        Command::HfSing => hf_sing(&mut b, &doc, opts),
        Command::Splice => splice(&mut b, &doc, opts),
        Command::Validate => match &doc.payload {
            Payload::FiniteTypeMap(map) => validate_map(&mut b, map).map(|_| ()),
            _ => splice(&mut b, &doc, opts),
        },
    };
    if let Err(f) = result {
        b.fail(f);
    }
    b.finish()
}

fn validate_map(b: &mut Builder, map: &FiniteTypeMap) -> Result<bool, Failure> {
    let report = validate(map);
    b.stages.insert("validation".into(), report::validation(&report));
    if report.is_valid() {
        b.line(format!("valid: genus {}, {} pieces, {} twist regions", map.genus().unwrap_or(0), map.pieces.len(), map.twists.len()));
        Ok(true)
    } else {
        for v in &report.violations {
            b.line(format!("violation [{}]: {}", v.clause, v.message));
        }
        b.exit_code = b.exit_code.max(EXIT_INVALID);
        Ok(false)
    }
}

fn hf_map(b: &mut Builder, map: &FiniteTypeMap) -> Result<(), Failure> {
    if !validate_map(b, map)? {
        return Ok(());
    }
    let s0 = sigma0(map);
    b.stages.insert("sigma0".into(), report::surface_pair(&s0));
    let lambda = lefschetz_outside(map);
    let nielsen = nielsen_number(map);
    let hf = floer_homology(map).map_err(|e| match e {
        FiniteTypeError::NotClosed => Failure::new(EXIT_INVALID, "closed", e.to_string()),
        FiniteTypeError::GenusTooSmall(_) => Failure::new(EXIT_INVALID, "genus", e.to_string()),
        other => Failure::new(EXIT_INVALID, "homology", other.to_string()),
    })?;
    b.results.insert("lefschetz_outside".into(), json!(lambda));
    b.results.insert("nielsen_number".into(), json!(nielsen));
    b.results.insert("hf".into(), report::module(&hf));
    b.line(format!("Σ₀: {} components; Λ outside Σ₀ = {lambda}; Nielsen number = {nielsen}", s0.components.len()));
    b.line(format!("HF = {}", report::ranks_text(&hf.ranks)));
    Ok(())
}

/// Everything computed between the input and the characteristic set.
struct SpliceStages {
    data: Vec<FracPowerSeries>,
    collapsed: SpliceDiagram,
    set: Vec<CharEntry>,
}

fn splice_stages(b: &mut Builder, doc: &InputDocument, opts: &RunOptions) -> Result<SpliceStages, Failure> {
    let bound = opts.order_bound.or(doc.options.order_bound).unwrap_or(DEFAULT_ORDER_BOUND);
    let given = |poly: &str, b: &mut Builder| -> Result<Vec<FracPowerSeries>, Failure> {
        let f = parse_poly(poly)?;
        let exp = newton_puiseux(&f, bound)?;
        b.stages.insert(
            "expansion".into(),
            json!({
                "poly": f.to_string(),
                "order_bound": bound,
                "coordinates": exp.coordinates.to_string(),
                "branches": exp.branches.iter().map(report::series).collect::<Vec<_>>(),
            }),
        );
        if !exp.coordinates.is_identity() {
            b.warnings.push(format!("expanded in coordinates {}", exp.coordinates));
        }
        Ok(exp.branches)
    };
    let series = match &doc.payload {
        Payload::Polynomial { poly } => given(poly, b)?,
        Payload::AkConfig { k } => given(&ak_polynomial(*k), b)?,
        Payload::PuiseuxData { branches } => branches.iter().map(|br| br.to_series()).collect::<Result<Vec<_>, _>>()?,
        Payload::FiniteTypeMap(_) => return Err(Failure::new(EXIT_SCHEMA, "schema", "expected polynomial, puiseux_data or ak_config input")),
    };
    if let Some(bad) = series.iter().find(|s| !s.is_well_formed()) {
        return Err(SpliceError::MalformedData(format!("branch with exponents {:?} over d = {} is not well formed", bad.terms.iter().map(|t| t.1).collect::<Vec<_>>(), bad.d)).into());
    }
    let data: Vec<FracPowerSeries> = truncation_index(&series)?.into_iter().map(|(_, s)| s).collect();
    b.stages.insert("puiseux_data".into(), json!({"branches": data.iter().map(report::series).collect::<Vec<_>>()}));
    let raw = build_diagram(&data)?;
    let collapsed = collapse(&raw)?;
    b.stages.insert("diagram".into(), serde_json::to_value(&raw).expect("serializable"));
    b.stages.insert("collapsed_diagram".into(), serde_json::to_value(&collapsed).expect("serializable"));
    let mut checks = Vec::new();
    let a_raw = raw.check_a_properties(false);
    let a = collapsed.check_a_properties(true);
    let bp = collapsed.check_b_properties();
    for p in ["A1", "A2", "A3", "A4", "A5", "A6", "B1", "B2", "B3", "B4"] {
        let failures: Vec<&String> = a_raw.iter().chain(&a).chain(&bp).filter(|v| v.property == p).map(|v| &v.detail).collect();
        checks.push(json!({"property": p, "passed": failures.is_empty(), "details": failures}));
    }
    let failed: Vec<String> = a_raw.iter().chain(&a).chain(&bp).map(|v| v.property.clone()).collect();
    b.stages.insert("properties".into(), json!(checks));
    if let Some(p) = failed.first() {
        return Err(Failure::new(EXIT_INVALID, p, format!("diagram violates {}", failed.join(", "))));
    }
    let set = characteristic_set(&collapsed)?;
    b.stages.insert("characteristic_set".into(), json!(set.iter().map(report::char_entry).collect::<Vec<_>>()));
    let models = twist_models(&collapsed)?;
    b.stages.insert("twist_models".into(), json!(models.iter().map(report::twist_model).collect::<Vec<_>>()));
    b.line(format!("branches: {}; boxes: {}{}", data.len(), collapsed.boxes().len(), if collapsed.is_gamma_star { " (exceptional diagram)" } else { "" }));
    b.line(format!("characteristic set: {}", set.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")));
    Ok(SpliceStages { data, collapsed, set })
}

fn splice(b: &mut Builder, doc: &InputDocument, opts: &RunOptions) -> Result<(), Failure> {
    let st = splice_stages(b, doc, opts)?;
    b.results.insert("gamma_star".into(), json!(st.collapsed.is_gamma_star));
    b.results.insert("branches".into(), json!(st.data.len()));
    b.results.insert("characteristic_set".into(), json!(st.set.iter().map(|c| c.to_string()).collect::<Vec<_>>()));
    b.dot = Some(st.collapsed.to_dot());
    Ok(())
}

fn hf_sing(b: &mut Builder, doc: &InputDocument, opts: &RunOptions) -> Result<(), Failure> {
    let st = splice_stages(b, doc, opts)?;
    let d = assemble(&st.collapsed)?;
    b.stages.insert("decomposition".into(), report::decomposition(&d));
    let fiber = d.fiber;
    b.line(format!("fiber: genus {}, κ = {}, χ = {}", fiber.genus, fiber.boundary, fiber.chi));
    let verification = verify_monodromy(&d);
    b.stages.insert("verification".into(), report::verification(&verification));
    let summary: Vec<String> = verification.checks.iter().map(|c| format!("{} {}", c.id, if c.passed { "pass" } else { "FAIL" })).collect();
    b.line(format!("checks: {}", summary.join(", ")));
    b.results.insert("fiber".into(), json!(fiber));
    match hf_plus(&d) {
        Ok((zero, _)) => {
            b.results.insert("hf_plus".into(), report::module(&zero));
            b.line("HF(g, +) = 0");
        }
        Err(e) => return Err(e.into()),
    }
    let embedding: Option<EmbeddingSpec> = match &opts.embedding {
        Some(path) => Some(read_embedding(path)?),
        None => doc.options.embedding.clone(),
    };
    match embedding {
        Some(e) => {
            let genus = e.closed_genus(&fiber)?;
            let hf = hf_of_monodromy(&d, &e)?;
            b.results.insert("embedding".into(), json!({"spec": e, "closed_genus": genus}));
            b.results.insert("hf".into(), report::module(&hf));
            b.line(format!("HF in genus {genus} = {}", report::ranks_text(&hf.ranks)));
        }
        None => b.warnings.push("no embedding given; HF of the extension to a closed surface not computed".into()),
    }
    Ok(())
}
