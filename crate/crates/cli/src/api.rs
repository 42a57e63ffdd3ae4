//! Request and response types shared by the CLI and the HTTP service.
//!
//! Every request is normalized (defaults filled in, presets resolved by name)
//! before it is hashed, so the same logical input yields the same digest and
//! the same payload no matter which front end received it.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use slicelab_core::capacity::ClassReport;
use slicelab_core::diagram::{render_svg, SvgOptions};
use slicelab_core::gf::{
    hessian_oracle, preset, presets, LevelSummary, OracleResult, Preset, Progress, SliceResult, Slicer, SweepResult,
};
use slicelab_core::gf::GeneratingFamily;
use slicelab_core::morse::{MorseTable, Source};
use slicelab_core::order::ChainBound;
use slicelab_core::{
    analyze, check_relation, morse_table, parse_catalog, realize_catalog, strict_chain_bound, CobordismQuery, Error,
    PlanarPolyline, RelationVerdict, SliceDiagram, SliceVerdict, VERSION,
};

pub const GRID_ENV: &str = "SLICELAB_GRID_DEFAULT";
pub const DEFAULT_GRID: usize = 256;
pub const MIN_GRID: usize = 16;
pub const MAX_GRID: usize = 4096;
pub const MAX_STEPS: usize = 2000;
pub const DEFAULT_STEPS: usize = 32;

/// Grid resolution used when a request does not name one.
pub fn default_grid() -> usize {
    std::env::var(GRID_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_GRID)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    InvalidInput,
    Syntax,
    Constraint,
    NonGeneric,
    Numeric,
    NotFound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    /// Where in the input the problem was found, when known.
    pub location: Option<String>,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        ApiError { code, message: message.into(), location: None }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        ApiError::new(ErrorCode::InvalidInput, message)
    }

    pub fn at(mut self, location: impl Into<String>) -> Self {
        self.location.get_or_insert_with(|| location.into());
        self
    }

    pub fn status(&self) -> u16 {
        match self.code {
            ErrorCode::InvalidInput | ErrorCode::Syntax => 400,
            ErrorCode::NotFound => 404,
            ErrorCode::Constraint | ErrorCode::NonGeneric | ErrorCode::Numeric => 422,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.code {
            ErrorCode::NonGeneric | ErrorCode::Numeric => 3,
            _ => 2,
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::Syntax { position, .. } => {
                ApiError { code: ErrorCode::Syntax, message, location: Some(format!("position {position}")) }
            }
            Error::Constraint(_) => ApiError::new(ErrorCode::Constraint, message),
            Error::NonGeneric(_) => ApiError::new(ErrorCode::NonGeneric, message),
            Error::Degenerate { point, .. } => ApiError {
                code: ErrorCode::NonGeneric,
                message,
                location: Some(format!("({}, {})", point.x, point.y)),
            },
            Error::Numeric(_) => ApiError::new(ErrorCode::Numeric, message),
            Error::InvalidPolyline(_) | Error::InvalidDiagram(_) | Error::InvalidFamily(_) | Error::Json(_) => {
                ApiError::invalid(message)
            }
        }
    }
}

impl From<serde_json::Error> for ApiError {
    fn from(e: serde_json::Error) -> Self {
        ApiError::invalid(e.to_string()).at(format!("line {} column {}", e.line(), e.column()))
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// A response with the engine version and the digest of the normalized input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub version: String,
    pub input_digest: String,
    #[serde(flatten)]
    pub outcome: Outcome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Result(Value),
    Error(ApiError),
}

impl Envelope {
    pub fn is_ok(&self) -> bool {
        matches!(self.outcome, Outcome::Result(_))
    }

    pub fn error(&self) -> Option<&ApiError> {
        match &self.outcome {
            Outcome::Error(e) => Some(e),
            Outcome::Result(_) => None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("envelopes serialize")
    }
}

fn digest(route: &str, input: &impl Serialize) -> String {
    let mut h = Sha256::new();
    h.update(route.as_bytes());
    h.update([0]);
    h.update(serde_json::to_vec(input).expect("requests serialize"));
    hex::encode(h.finalize())
}

fn envelope(input_digest: String, outcome: ApiResult<Value>) -> Envelope {
    Envelope {
        version: VERSION.to_string(),
        input_digest,
        outcome: match outcome {
            Ok(v) => Outcome::Result(v),
            Err(e) => Outcome::Error(e),
        },
    }
}

fn to_value(v: impl Serialize) -> ApiResult<Value> {
    serde_json::to_value(v).map_err(|e| ApiError::new(ErrorCode::Numeric, format!("result is not representable: {e}")))
}

fn svg_of(d: &SliceDiagram) -> String {
    render_svg(d, &SvgOptions::default())
}

/// Diagram JSON as sent by clients; validated into a [`SliceDiagram`] separately so
/// degenerate geometry is reported as such rather than as malformed JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramInput {
    pub components: Vec<PlanarPolyline>,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region_areas: Option<Vec<f64>>,
    /// Accepted so diagrams returned by the service can be sent back unchanged.
    #[serde(default, skip_serializing)]
    pub crossings: Option<Value>,
}

impl DiagramInput {
    pub fn build(&self) -> ApiResult<SliceDiagram> {
        let d = SliceDiagram::new(self.components.clone(), self.tolerance)?;
        Ok(match &self.region_areas {
            Some(a) => d.with_exact_areas(a.clone())?,
            None => d,
        })
    }
}

/// One end of a relation query: a catalog expression, `"empty"`, or a diagram.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SliceInput {
    Catalog(String),
    Diagram(DiagramInput),
}

impl SliceInput {
    fn label(&self) -> String {
        match self {
            SliceInput::Catalog(t) => t.trim().to_string(),
            SliceInput::Diagram(_) => "diagram".into(),
        }
    }

    fn build(&self, field: &str) -> ApiResult<SliceDiagram> {
        match self {
            SliceInput::Catalog(t) if is_empty_slice(t) => Ok(SliceDiagram::empty()),
            SliceInput::Catalog(t) => catalog_diagram(t).map_err(|e| e.at(field)),
            SliceInput::Diagram(d) => d.build().map_err(|e| e.at(field)),
        }
    }
}

fn is_empty_slice(text: &str) -> bool {
    matches!(text.trim(), "empty" | "∅" | "")
}

fn catalog_diagram(text: &str) -> ApiResult<SliceDiagram> {
    Ok(realize_catalog(&parse_catalog(text)?)?)
}

fn check_grid(grid: usize) -> ApiResult<usize> {
    if (MIN_GRID..=MAX_GRID).contains(&grid) {
        Ok(grid)
    } else {
        Err(ApiError::invalid(format!("grid must be between {MIN_GRID} and {MAX_GRID}, got {grid}")).at("grid"))
    }
}

/// Picks the family from an inline definition or a preset name.
fn resolve_family(family: &Option<GeneratingFamily>, name: &Option<String>) -> ApiResult<(GeneratingFamily, Option<&'static Preset>)> {
    match (family, name) {
        (Some(f), None) => {
            f.validate().map_err(|e| ApiError::from(e).at("family"))?;
            Ok((f.clone(), None))
        }
        (None, Some(n)) => {
            let p = preset(n).ok_or_else(|| ApiError::new(ErrorCode::NotFound, format!("no preset named {n:?}")).at("preset"))?;
            Ok((p.family.clone(), Some(p)))
        }
        (Some(_), Some(_)) => Err(ApiError::invalid("give either family or preset, not both")),
        (None, None) => Err(ApiError::invalid("a family or a preset is required")),
    }
}

fn level_or_default(level: Option<f64>, p: Option<&Preset>) -> ApiResult<f64> {
    level.or(p.map(|p| p.level)).ok_or_else(|| ApiError::invalid("level is required").at("level"))
}

// ---------------------------------------------------------------------------
// analyze

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagram: Option<DiagramInput>,
    /// Apply the rules that hold only for genuine negative slices.
    #[serde(default = "yes")]
    pub assume_negative_slice: bool,
    #[serde(default)]
    pub svg: bool,
}

impl AnalyzeRequest {
    pub fn catalog(text: impl Into<String>) -> Self {
        AnalyzeRequest { catalog: Some(text.into()), diagram: None, assume_negative_slice: true, svg: false }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalyzeResult {
    pub input: String,
    pub diagram: SliceDiagram,
    pub table: MorseTable,
    pub classes: Vec<ClassReport>,
    pub assume_negative_slice: bool,
    pub verdict: SliceVerdict,
    pub strict_chain_bound: ChainBound,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svg: Option<String>,
}

fn run_analyze(req: &AnalyzeRequest) -> ApiResult<Value> {
    let (input, diagram) = match (&req.catalog, &req.diagram) {
        (Some(t), None) => {
            let spec = parse_catalog(t).map_err(|e| ApiError::from(e).at("catalog"))?;
            (spec.to_string(), realize_catalog(&spec).map_err(|e| ApiError::from(e).at("catalog"))?)
        }
        (None, Some(d)) => ("diagram".to_string(), d.build().map_err(|e| e.at("diagram"))?),
        _ => return Err(ApiError::invalid("give exactly one of catalog or diagram")),
    };
    let table = morse_table(&diagram)?;
    let (report, verdict) = analyze(&diagram, req.assume_negative_slice)?;
    if let SliceVerdict::NonGeneric { reason } = &verdict {
        return Err(ApiError::new(ErrorCode::NonGeneric, reason.clone()).at("diagram"));
    }
    let svg = req.svg.then(|| svg_of(&diagram));
    to_value(AnalyzeResult {
        input,
        strict_chain_bound: strict_chain_bound(&diagram)?,
        diagram,
        table,
        classes: report.classes,
        assume_negative_slice: report.assume_negative_slice,
        verdict,
        svg,
    })
}

// ---------------------------------------------------------------------------
// slice

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<GeneratingFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default)]
    pub svg: bool,
    /// Also run the Hessian oracle on every crossing.
    #[serde(default)]
    pub oracle: bool,
}

impl SliceRequest {
    fn normalized(&self) -> ApiResult<SliceRequest> {
        let (_, p) = resolve_family(&self.family, &self.preset)?;
        Ok(SliceRequest {
            level: Some(level_or_default(self.level, p)?),
            grid: Some(check_grid(self.grid.unwrap_or_else(default_grid))?),
            ..self.clone()
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SliceResponse {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(flatten)]
    pub slice: SliceResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<Vec<OracleResult>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svg: Option<String>,
}

fn run_slice(req: &SliceRequest) -> ApiResult<Value> {
    let (family, p) = resolve_family(&req.family, &req.preset)?;
    let level = req.level.expect("normalized");
    let slicer = Slicer::with_resolution(family.clone(), req.grid.expect("normalized"))?;
    let slice = slicer.extract(level).map_err(|e| ApiError::from(e).at("level"))?;
    let oracle = if req.oracle {
        Some((0..slice.diagram.crossings().len()).map(|c| hessian_oracle(&family, &slice, c)).collect::<Result<_, _>>()?)
    } else {
        None
    };
    let svg = req.svg.then(|| svg_of(&slice.diagram));
    to_value(SliceResponse { preset: p.map(|p| p.name.clone()), slice, oracle, svg })
}

// ---------------------------------------------------------------------------
// sweep

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<GeneratingFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
}

impl SweepRequest {
    fn normalized(&self) -> ApiResult<SweepRequest> {
        let (_, p) = resolve_family(&self.family, &self.preset)?;
        let range = p.map(|p| p.sweep);
        let from = self.from.or(range.map(|r| r[0])).ok_or_else(|| ApiError::invalid("from is required").at("from"))?;
        let to = self.to.or(range.map(|r| r[1])).ok_or_else(|| ApiError::invalid("to is required").at("to"))?;
        let steps = self.steps.unwrap_or(DEFAULT_STEPS);
        if !(2..=MAX_STEPS).contains(&steps) {
            return Err(ApiError::invalid(format!("steps must be between 2 and {MAX_STEPS}, got {steps}")).at("steps"));
        }
        if !(from < to && to < 0.0) {
            return Err(ApiError::invalid(format!("sweep needs from < to < 0, got {from} and {to}")).at("from"));
        }
        Ok(SweepRequest {
            from: Some(from),
            to: Some(to),
            steps: Some(steps),
            grid: Some(check_grid(self.grid.unwrap_or_else(default_grid))?),
            ..self.clone()
        })
    }
}

/// One line of a streamed sweep, emitted as each level finishes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepLine {
    pub level: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<LevelSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

impl SweepLine {
    fn of(p: Progress<'_>) -> Self {
        match p {
            Progress::Level(s) => SweepLine { level: s.level, summary: Some(s.clone()), skipped: None },
            Progress::Skipped(s) => SweepLine { level: s.level, summary: None, skipped: Some(s.reason.clone()) },
        }
    }
}

fn run_sweep(req: &SweepRequest, on_line: &(dyn Fn(SweepLine) + Sync)) -> ApiResult<Value> {
    let (family, _) = resolve_family(&req.family, &req.preset)?;
    let slicer = Slicer::with_resolution(family, req.grid.expect("normalized"))?;
    let result: SweepResult = slicer.sweep_observed(
        req.from.expect("normalized"),
        req.to.expect("normalized"),
        req.steps.expect("normalized"),
        |p| on_line(SweepLine::of(p)),
    )?;
    to_value(result)
}

// ---------------------------------------------------------------------------
// relation

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bottom: Option<SliceInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top: Option<SliceInput>,
    #[serde(default)]
    pub strict: bool,
    #[serde(default)]
    pub compare_degree_one: bool,
    /// Witness mode: two levels of one family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<GeneratingFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
}

impl RelationRequest {
    pub fn catalogs(bottom: &str, top: &str, strict: bool) -> Self {
        RelationRequest {
            bottom: Some(SliceInput::Catalog(bottom.into())),
            top: Some(SliceInput::Catalog(top.into())),
            strict,
            ..Default::default()
        }
    }

    fn is_witness(&self) -> bool {
        self.family.is_some() || self.preset.is_some()
    }

    fn normalized(&self) -> ApiResult<RelationRequest> {
        if !self.is_witness() {
            if self.bottom.is_none() || self.top.is_none() {
                return Err(ApiError::invalid("bottom and top are required"));
            }
            if self.levels.is_some() || self.grid.is_some() {
                return Err(ApiError::invalid("levels and grid need a family or preset"));
            }
            return Ok(self.clone());
        }
        if self.bottom.is_some() || self.top.is_some() {
            return Err(ApiError::invalid("give either bottom/top or a family with levels, not both"));
        }
        let (_, p) = resolve_family(&self.family, &self.preset)?;
        let levels = match (self.levels, p) {
            (Some(l), _) => l,
            (None, Some(p)) if p.witness_levels.len() >= 2 => [p.witness_levels[0], p.witness_levels[1]],
            _ => return Err(ApiError::invalid("levels are required").at("levels")),
        };
        if !(levels[0] <= levels[1] && levels[1] < 0.0) {
            return Err(ApiError::invalid(format!("levels need a <= b < 0, got {levels:?}")).at("levels"));
        }
        Ok(RelationRequest {
            levels: Some(levels),
            grid: Some(check_grid(self.grid.unwrap_or_else(default_grid))?),
            ..self.clone()
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationResult {
    pub bottom: String,
    pub top: String,
    pub strict: bool,
    pub verdict: RelationVerdict,
}

/// Both ends of a numeric witness, with what the capacity engine says about them.
#[derive(Clone, Debug, Serialize)]
pub struct WitnessResult {
    pub levels: [f64; 2],
    pub bottom: LevelSummary,
    pub top: LevelSummary,
    pub verdict: RelationVerdict,
    /// Engine verdict on the extracted diagrams.
    pub engine: RelationVerdict,
    /// Engine verdict on the exact catalog shapes, when both ends are classified.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classified_engine: Option<RelationVerdict>,
}

fn query(bottom: SliceDiagram, top: SliceDiagram, strict: bool, compare_degree_one: bool) -> CobordismQuery {
    CobordismQuery { compare_degree_one, ..CobordismQuery::new(bottom, top, strict) }
}

fn run_relation(req: &RelationRequest) -> ApiResult<Value> {
    if !req.is_witness() {
        let (b, t) = (req.bottom.as_ref().expect("normalized"), req.top.as_ref().expect("normalized"));
        let q = query(b.build("bottom")?, t.build("top")?, req.strict, req.compare_degree_one);
        return to_value(RelationResult { bottom: b.label(), top: t.label(), strict: req.strict, verdict: check_relation(&q)? });
    }
    let (family, p) = resolve_family(&req.family, &req.preset)?;
    let [a, b] = req.levels.expect("normalized");
    let grid = req.grid.expect("normalized");
    let slicer = Slicer::with_resolution(family, grid)?;
    let lower = slicer.extract(a).map_err(|e| ApiError::from(e).at("levels[0]"))?;
    let upper = slicer.extract(b).map_err(|e| ApiError::from(e).at("levels[1]"))?;
    let strict = a < b;
    let engine = check_relation(&query(lower.diagram.clone(), upper.diagram.clone(), strict, req.compare_degree_one))?;
    let classified_engine = match (lower.classification.spec(), upper.classification.spec()) {
        (Some(x), Some(y)) => Some(check_relation(&query(realize_catalog(x)?, realize_catalog(y)?, strict, req.compare_degree_one))?),
        _ => None,
    };
    let name = p.map(|p| p.name.as_str()).unwrap_or("family");
    let verdict = if strict {
        RelationVerdict::Witnessed { reference: format!("{name} at levels {a} < {b} on a {grid}-cell grid") }
    } else {
        RelationVerdict::ReflexiveEquivalent
    };
    to_value(WitnessResult {
        levels: [a, b],
        bottom: LevelSummary::of(&lower),
        top: LevelSummary::of(&upper),
        verdict,
        engine,
        classified_engine,
    })
}

// ---------------------------------------------------------------------------
// oracle

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<GeneratingFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
}

impl OracleRequest {
    fn normalized(&self) -> ApiResult<OracleRequest> {
        let (_, p) = resolve_family(&self.family, &self.preset)?;
        Ok(OracleRequest {
            level: Some(level_or_default(self.level, p)?),
            grid: Some(check_grid(self.grid.unwrap_or_else(default_grid))?),
            ..self.clone()
        })
    }
}

/// Oracle and capping-path data for one crossing.
#[derive(Clone, Debug, Serialize)]
pub struct OracleComparison {
    pub crossing: usize,
    pub oracle: OracleResult,
    pub analyzer_offsets: [Option<i32>; 2],
    pub analyzer_values: [Option<f64>; 2],
    pub offsets_agree: bool,
    /// Largest relative difference between oracle and analyzer values.
    pub value_relative_error: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleResponse {
    pub level: f64,
    pub classification: String,
    pub crossings: Vec<OracleComparison>,
}

fn run_oracle(req: &OracleRequest) -> ApiResult<Value> {
    let (family, _) = resolve_family(&req.family, &req.preset)?;
    let slicer = Slicer::with_resolution(family.clone(), req.grid.expect("normalized"))?;
    let slice = slicer.extract(req.level.expect("normalized")).map_err(|e| ApiError::from(e).at("level"))?;
    let table = morse_table(&slice.diagram)?;
    let mut crossings = Vec::new();
    for c in 0..slice.diagram.crossings().len() {
        let oracle = hessian_oracle(&family, &slice, c)?;
        let row = |b: u8| table.rows.iter().find(|r| r.source == Source::Crossing(c) && r.branch == b);
        let analyzer_offsets = [0, 1].map(|b| row(b).and_then(|r| r.offset.known()));
        let analyzer_values = [0, 1].map(|b| row(b).and_then(|r| r.value.known()));
        let offsets_agree = (0..2).all(|b| analyzer_offsets[b] == Some(oracle.points[b].index));
        let value_relative_error = (0..2)
            .map(|b| analyzer_values[b].map(|v| (v - oracle.points[b].value).abs() / oracle.points[b].value.abs()))
            .collect::<Option<Vec<f64>>>()
            .map(|e| e.into_iter().fold(0.0, f64::max));
        crossings.push(OracleComparison { crossing: c, oracle, analyzer_offsets, analyzer_values, offsets_agree, value_relative_error });
    }
    to_value(OracleResponse { level: slice.level, classification: slice.classification.to_string(), crossings })
}

// ---------------------------------------------------------------------------
// dispatch

/// A parsed request for one of the computing routes.
#[derive(Clone, Debug, PartialEq)]
pub enum Request {
    Analyze(AnalyzeRequest),
    Slice(SliceRequest),
    Sweep(SweepRequest),
    Relation(RelationRequest),
    Oracle(OracleRequest),
}

impl Request {
    pub fn route(&self) -> &'static str {
        match self {
            Request::Analyze(_) => "analyze",
            Request::Slice(_) => "slice",
            Request::Sweep(_) => "sweep",
            Request::Relation(_) => "relation",
            Request::Oracle(_) => "oracle",
        }
    }

    /// Parses a JSON body for the named route.
    pub fn parse(route: &str, body: &[u8]) -> Result<Request, (String, ApiError)> {
        let fail = |e: serde_json::Error| (digest(route, &String::from_utf8_lossy(body)), ApiError::from(e));
        Ok(match route {
            "analyze" => Request::Analyze(serde_json::from_slice(body).map_err(fail)?),
            "slice" => Request::Slice(serde_json::from_slice(body).map_err(fail)?),
            "sweep" => Request::Sweep(serde_json::from_slice(body).map_err(fail)?),
            "relation" => Request::Relation(serde_json::from_slice(body).map_err(fail)?),
            "oracle" => Request::Oracle(serde_json::from_slice(body).map_err(fail)?),
            other => {
                return Err((digest(route, &other), ApiError::new(ErrorCode::NotFound, format!("unknown route {other:?}"))))
            }
        })
    }

    fn normalized(&self) -> ApiResult<Request> {
        Ok(match self {
            Request::Analyze(r) => Request::Analyze(r.clone()),
            Request::Slice(r) => Request::Slice(r.normalized()?),
            Request::Sweep(r) => Request::Sweep(r.normalized()?),
            Request::Relation(r) => Request::Relation(r.normalized()?),
            Request::Oracle(r) => Request::Oracle(r.normalized()?),
        })
    }

    fn digest(&self) -> String {
        match self {
            Request::Analyze(r) => digest(self.route(), r),
            Request::Slice(r) => digest(self.route(), r),
            Request::Sweep(r) => digest(self.route(), r),
            Request::Relation(r) => digest(self.route(), r),
            Request::Oracle(r) => digest(self.route(), r),
        }
    }
}

/// Runs a request, reporting sweep levels to `on_line` as they finish.
pub fn execute_streaming(req: &Request, on_line: &(dyn Fn(SweepLine) + Sync)) -> Envelope {
    let normalized = match req.normalized() {
        Ok(n) => n,
        Err(e) => return envelope(req.digest(), Err(e)),
    };
    let outcome = match &normalized {
        Request::Analyze(r) => run_analyze(r),
        Request::Slice(r) => run_slice(r),
        Request::Sweep(r) => run_sweep(r, on_line),
        Request::Relation(r) => run_relation(r),
        Request::Oracle(r) => run_oracle(r),
    };
    envelope(normalized.digest(), outcome)
}

/// The error envelope a request fails with before any computation starts.
pub fn preflight(req: &Request) -> Option<Envelope> {
    req.normalized().err().map(|e| envelope(req.digest(), Err(e)))
}

pub fn execute(req: &Request) -> Envelope {
    execute_streaming(req, &|_| {})
}

/// The shipped presets, for `GET /api/presets`.
pub fn preset_listing() -> Envelope {
    envelope(digest("presets", &()), to_value(presets()))
}

/// Status, content type and body for one request; the single entry point for
/// every route, shared by the HTTP service and tests.
pub struct Reply {
    pub status: u16,
    pub content_type: &'static str,
    pub body: Vec<u8>,
}

impl Reply {
    pub fn json(env: &Envelope) -> Reply {
        let status = env.error().map_or(200, ApiError::status);
        Reply { status, content_type: "application/json", body: env.to_json().into_bytes() }
    }
}

pub fn handle_request(method: &str, path: &str, body: &[u8]) -> Reply {
    match (method, path) {
        ("GET", "/healthz") => Reply { status: 200, content_type: "text/plain; charset=utf-8", body: b"ok".to_vec() },
        ("GET", "/api/presets") => Reply::json(&preset_listing()),
        ("POST", p) if p.starts_with("/api/") => match Request::parse(&p["/api/".len()..], body) {
            Ok(req) => Reply::json(&execute(&req)),
            Err((d, e)) => Reply::json(&envelope(d, Err(e))),
        },
        _ => {
            let e = ApiError::new(ErrorCode::NotFound, format!("no route for {method} {path}"));
            Reply::json(&envelope(digest("unknown", &path), Err(e)))
        }
    }
}
