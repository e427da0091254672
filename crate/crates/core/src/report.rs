//! Stable JSON interchange: input formats for matrices, fields and loops,
//! versioned report objects, deterministic serialization with fixed-width
//! floats, and a structural validator for the shipped schemas.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::classify::AutClassification;
use crate::holonomy::{
    FiberId, GeneratorResult, HolonomyResult, LoopPath, Segment, SynthesisReport,
};
use crate::matrix::{Mat3, C64};
use crate::normal_form::{FiberSet, Rejection, RiccatiCnForm, RiccatiCp2Form};
use crate::poly::{MultiPoly, PolyError, PolyVectorField};

pub const SCHEMA_VERSION: &str = "1.0.0";

// ---------------------------------------------------------------------------
// Primitive encodings
// ---------------------------------------------------------------------------

/// Complex scalars travel as two-element arrays [re, im].
pub type CxDto = [f64; 2];

pub fn cx(z: C64) -> CxDto {
    [z.re, z.im]
}

pub fn cx_back(v: &CxDto) -> C64 {
    Complex64::new(v[0], v[1])
}

pub type MatrixDto = [[CxDto; 3]; 3];

pub fn matrix_dto(m: &Mat3) -> MatrixDto {
    let mut out = [[[0.0; 2]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = cx(m.0[i][j]);
        }
    }
    out
}

pub fn matrix_back(d: &MatrixDto) -> Mat3 {
    let mut m = Mat3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            m.0[i][j] = cx_back(&d[i][j]);
        }
    }
    m
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermDto {
    pub exp: Vec<u32>,
    pub coef: CxDto,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolyDto {
    pub vars: Vec<String>,
    pub terms: Vec<TermDto>,
}

impl PolyDto {
    pub fn from_poly(p: &MultiPoly) -> Self {
        PolyDto {
            vars: p.vars().to_vec(),
            terms: p
                .terms()
                .map(|(e, c)| TermDto {
                    exp: e.clone(),
                    coef: cx(*c),
                })
                .collect(),
        }
    }

    pub fn into_poly(&self) -> Result<MultiPoly, PolyError> {
        MultiPoly::from_terms(
            self.vars.clone(),
            self.terms.iter().map(|t| (t.exp.clone(), cx_back(&t.coef))),
        )
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldDto {
    pub chart: String,
    pub components: Vec<PolyDto>,
}

impl FieldDto {
    pub fn from_field(f: &PolyVectorField) -> Self {
        FieldDto {
            chart: f.chart_id.clone(),
            components: f.components.iter().map(PolyDto::from_poly).collect(),
        }
    }

    pub fn into_field(&self) -> Result<PolyVectorField, PolyError> {
        let comps = self
            .components
            .iter()
            .map(|p| p.into_poly())
            .collect::<Result<Vec<_>, _>>()?;
        PolyVectorField::new(&self.chart, comps)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SegmentDto {
    Arc {
        center: CxDto,
        radius: f64,
        theta0: f64,
        theta1: f64,
    },
    Segment {
        from: CxDto,
        to: CxDto,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LoopDto {
    pub base_point: CxDto,
    #[serde(default)]
    pub forbidden: Vec<CxDto>,
    #[serde(default)]
    pub clearance: f64,
    pub segments: Vec<SegmentDto>,
}

impl LoopDto {
    pub fn from_loop(lp: &LoopPath) -> Self {
        LoopDto {
            base_point: cx(lp.base_point),
            forbidden: lp.forbidden.iter().map(|f| cx(*f)).collect(),
            clearance: lp.clearance,
            segments: lp
                .segments
                .iter()
                .map(|s| match s {
                    Segment::Arc {
                        center,
                        radius,
                        theta0,
                        theta1,
                    } => SegmentDto::Arc {
                        center: cx(*center),
                        radius: *radius,
                        theta0: *theta0,
                        theta1: *theta1,
                    },
                    Segment::Line { from, to } => SegmentDto::Segment {
                        from: cx(*from),
                        to: cx(*to),
                    },
                })
                .collect(),
        }
    }

    pub fn into_loop(&self) -> Result<LoopPath, crate::holonomy::HolonomyError> {
        let segments = self
            .segments
            .iter()
            .map(|s| match s {
                SegmentDto::Arc {
                    center,
                    radius,
                    theta0,
                    theta1,
                } => Segment::Arc {
                    center: cx_back(center),
                    radius: *radius,
                    theta0: *theta0,
                    theta1: *theta1,
                },
                SegmentDto::Segment { from, to } => Segment::Line {
                    from: cx_back(from),
                    to: cx_back(to),
                },
            })
            .collect();
        LoopPath::new(
            segments,
            self.forbidden.iter().map(cx_back).collect(),
            self.clearance,
        )
    }
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub schema_version: String,
    pub kind: String,
    pub jordan_case: String,
    pub paper_type: String,
    pub fixed_points: Vec<[CxDto; 3]>,
    pub fixed_lines: Vec<[CxDto; 3]>,
    pub is_all: bool,
    pub normal_form: MatrixDto,
    pub conjugator: MatrixDto,
    pub conjugator_condition: f64,
    pub ill_conditioned: bool,
    pub borderline_clustering: bool,
}

impl ClassificationReport {
    pub fn from_classification(c: &AutClassification) -> Self {
        let triple = |v: &[C64; 3]| [cx(v[0]), cx(v[1]), cx(v[2])];
        ClassificationReport {
            schema_version: SCHEMA_VERSION.into(),
            kind: "classification".into(),
            jordan_case: c.jordan_case.label().into(),
            paper_type: c.paper_type.label().into(),
            fixed_points: c.fixed_locus.points.iter().map(triple).collect(),
            fixed_lines: c.fixed_locus.lines.iter().map(triple).collect(),
            is_all: c.fixed_locus.is_all,
            normal_form: matrix_dto(c.normal_form.matrix()),
            conjugator: matrix_dto(&c.conjugator),
            conjugator_condition: c.conjugator_condition,
            ill_conditioned: c.ill_conditioned,
            borderline_clustering: c.borderline_clustering,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RejectionDto {
    pub constraint: String,
    pub possibility: Option<u8>,
    pub component: usize,
    pub witness_monomial: String,
    pub witness_exponents: Vec<u32>,
    pub witness_coefficient: CxDto,
}

impl RejectionDto {
    pub fn from_rejection(r: &Rejection) -> Self {
        RejectionDto {
            constraint: r.constraint.name(),
            possibility: r.possibility,
            component: r.witness.component,
            witness_monomial: r.witness.rendered.clone(),
            witness_exponents: r.witness.exponents.clone(),
            witness_coefficient: cx(r.witness.coefficient),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FibersDto {
    pub finite: Vec<CxDto>,
    pub multiplicities: Vec<usize>,
    pub infinity: bool,
    pub every_fiber: bool,
}

impl FibersDto {
    pub fn from_fibers(f: &FiberSet) -> Self {
        FibersDto {
            finite: f.finite_fibers.iter().map(|(v, _)| cx(*v)).collect(),
            multiplicities: f.finite_fibers.iter().map(|(_, m)| *m).collect(),
            infinity: f.infinity_invariant,
            every_fiber: f.every_fiber_invariant,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Cp2FormDto {
    pub p: PolyDto,
    #[serde(rename = "A")]
    pub big_a: PolyDto,
    #[serde(rename = "B")]
    pub big_b: PolyDto,
    #[serde(rename = "C")]
    pub big_c: PolyDto,
    #[serde(rename = "D")]
    pub big_d: PolyDto,
    #[serde(rename = "E")]
    pub big_e: PolyDto,
    pub a: PolyDto,
    pub b: PolyDto,
    pub c: PolyDto,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CnFormDto {
    pub p: PolyDto,
    /// Per fiber coordinate: [q2, q1, q0].
    pub coeffs: Vec<[PolyDto; 3]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormalFormReport {
    pub schema_version: String,
    pub kind: String,
    pub geometry: String,
    pub accepted: bool,
    pub form_cp2: Option<Cp2FormDto>,
    pub form_cn: Option<CnFormDto>,
    pub rejection: Option<RejectionDto>,
    pub fibers: Option<FibersDto>,
}

impl NormalFormReport {
    pub fn accepted_cp2(form: &RiccatiCp2Form, fibers: &FiberSet) -> Self {
        NormalFormReport {
            schema_version: SCHEMA_VERSION.into(),
            kind: "normal_form".into(),
            geometry: "cp2".into(),
            accepted: true,
            form_cp2: Some(Cp2FormDto {
                p: PolyDto::from_poly(&form.p),
                big_a: PolyDto::from_poly(&form.big_a),
                big_b: PolyDto::from_poly(&form.big_b),
                big_c: PolyDto::from_poly(&form.big_c),
                big_d: PolyDto::from_poly(&form.big_d),
                big_e: PolyDto::from_poly(&form.big_e),
                a: PolyDto::from_poly(&form.a),
                b: PolyDto::from_poly(&form.b),
                c: PolyDto::from_poly(&form.c),
            }),
            form_cn: None,
            rejection: None,
            fibers: Some(FibersDto::from_fibers(fibers)),
        }
    }

    pub fn accepted_cn(form: &RiccatiCnForm, fibers: &FiberSet) -> Self {
        NormalFormReport {
            schema_version: SCHEMA_VERSION.into(),
            kind: "normal_form".into(),
            geometry: format!("cn{}", form.n),
            accepted: true,
            form_cp2: None,
            form_cn: Some(CnFormDto {
                p: PolyDto::from_poly(&form.p),
                coeffs: form
                    .coeffs
                    .iter()
                    .map(|(q2, q1, q0)| {
                        [
                            PolyDto::from_poly(q2),
                            PolyDto::from_poly(q1),
                            PolyDto::from_poly(q0),
                        ]
                    })
                    .collect(),
            }),
            rejection: None,
            fibers: Some(FibersDto::from_fibers(fibers)),
        }
    }

    pub fn rejected(geometry: &str, rejection: &Rejection) -> Self {
        NormalFormReport {
            schema_version: SCHEMA_VERSION.into(),
            kind: "normal_form".into(),
            geometry: geometry.into(),
            accepted: false,
            form_cp2: None,
            form_cn: None,
            rejection: Some(RejectionDto::from_rejection(rejection)),
            fibers: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StatsDto {
    pub steps: u64,
    pub rejected: u64,
    pub chart_switches: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HolonomyReport {
    pub schema_version: String,
    pub kind: String,
    /// "loop" for an explicit loop; "[re,im]" rendering or "infinity" for
    /// generator entries.
    pub fiber: Option<String>,
    pub matrix: MatrixDto,
    pub residual: f64,
    pub n_samples: usize,
    pub stats: StatsDto,
}

impl HolonomyReport {
    pub fn from_result(result: &HolonomyResult, fiber: Option<&FiberId>) -> Self {
        HolonomyReport {
            schema_version: SCHEMA_VERSION.into(),
            kind: "holonomy".into(),
            fiber: fiber.map(|f| match f {
                FiberId::Finite(v) => format!("{v}"),
                FiberId::Infinity => "infinity".into(),
            }),
            matrix: matrix_dto(result.map.matrix()),
            residual: result.residual,
            n_samples: result.n_samples,
            stats: StatsDto {
                steps: result.stats.steps,
                rejected: result.stats.rejected_steps,
                chart_switches: result.stats.chart_switches,
            },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratorsReport {
    pub schema_version: String,
    pub kind: String,
    pub base_point: CxDto,
    pub generators: Vec<HolonomyReport>,
    /// Projective distance of the ordered generator product from the
    /// identity (the fundamental-group relation of the punctured sphere).
    pub product_identity_error: f64,
}

impl GeneratorsReport {
    pub fn from_generators(base_point: C64, gens: &[GeneratorResult]) -> Self {
        let product = crate::holonomy::generator_product(gens);
        let product_identity_error =
            crate::matrix::projective_distance(&product, &Mat3::identity());
        GeneratorsReport {
            schema_version: SCHEMA_VERSION.into(),
            kind: "holonomy_generators".into(),
            base_point: cx(base_point),
            generators: gens
                .iter()
                .map(|g| {
                    let mut entry = HolonomyReport::from_result(&g.holonomy, Some(&g.fiber));
                    entry.kind = "holonomy".into();
                    entry
                })
                .collect(),
            product_identity_error,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SynthesisGeneratorDto {
    pub index: usize,
    pub paper_type: String,
    pub jordan_case: String,
    pub model_case: String,
    pub model_center: CxDto,
    pub analytic_error: f64,
    pub numeric_error: f64,
    pub conjugator: MatrixDto,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SynthesisReportDto {
    pub schema_version: String,
    pub kind: String,
    pub generators: Vec<SynthesisGeneratorDto>,
    pub product_error: f64,
    pub passed: bool,
}

impl SynthesisReportDto {
    pub fn from_report(r: &SynthesisReport) -> Self {
        SynthesisReportDto {
            schema_version: SCHEMA_VERSION.into(),
            kind: "synthesis".into(),
            generators: r
                .generators
                .iter()
                .map(|g| SynthesisGeneratorDto {
                    index: g.index,
                    paper_type: g.paper_type.label().into(),
                    jordan_case: g.jordan_case.label().into(),
                    model_case: g.model.case_label().to_string(),
                    model_center: cx(g.model.center()),
                    analytic_error: g.analytic_error,
                    numeric_error: g.numeric_error,
                    conjugator: matrix_dto(&g.conjugator),
                })
                .collect(),
            product_error: r.product_error,
            passed: r.passed,
        }
    }
}

// ---------------------------------------------------------------------------
// Deterministic serialization
// ---------------------------------------------------------------------------

/// Formatter writing every float with 17 significant digits so equal
/// inputs produce byte-identical reports.
struct FixedWidthFloats;

impl serde_json::ser::Formatter for FixedWidthFloats {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serialize a report deterministically (17 significant digits, compact,
/// trailing newline).
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String, serde_json::Error> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedWidthFloats);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serializer emits utf-8"))
}

// ---------------------------------------------------------------------------
// Schema validation (structural subset of JSON Schema)
// ---------------------------------------------------------------------------

/// Validate an instance against the subset of JSON Schema used by the
/// shipped schemas: type, properties, required, items, enum, and simple
/// numeric/array bounds.
pub fn validate_schema(schema: &Value, instance: &Value) -> Result<(), String> {
    validate_at(schema, instance, "$")
}

fn type_matches(ty: &str, instance: &Value) -> bool {
    match ty {
        "object" => instance.is_object(),
        "array" => instance.is_array(),
        "string" => instance.is_string(),
        "number" => instance.is_number(),
        "integer" => instance.is_i64() || instance.is_u64(),
        "boolean" => instance.is_boolean(),
        "null" => instance.is_null(),
        _ => false,
    }
}

fn validate_at(schema: &Value, instance: &Value, path: &str) -> Result<(), String> {
    let obj = match schema.as_object() {
        Some(o) => o,
        None => return Ok(()),
    };
    if let Some(ty) = obj.get("type") {
        let ok = match ty {
            Value::String(s) => type_matches(s, instance),
            Value::Array(list) => list
                .iter()
                .filter_map(|t| t.as_str())
                .any(|t| type_matches(t, instance)),
            _ => true,
        };
        if !ok {
            return Err(format!("{path}: expected type {ty}, got {instance}"));
        }
    }
    if let Some(options) = obj.get("enum").and_then(|e| e.as_array()) {
        if !options.contains(instance) {
            return Err(format!("{path}: value {instance} not in enum"));
        }
    }
    if let Some(expected) = obj.get("const") {
        if expected != instance {
            return Err(format!("{path}: value {instance} differs from const"));
        }
    }
    if let Some(props) = obj.get("properties").and_then(|p| p.as_object()) {
        if let Some(map) = instance.as_object() {
            for (key, sub) in props {
                if let Some(value) = map.get(key) {
                    validate_at(sub, value, &format!("{path}.{key}"))?;
                }
            }
        }
    }
    if let Some(required) = obj.get("required").and_then(|r| r.as_array()) {
        if let Some(map) = instance.as_object() {
            for key in required.iter().filter_map(|k| k.as_str()) {
                if !map.contains_key(key) {
                    return Err(format!("{path}: missing required property {key}"));
                }
            }
        }
    }
    if let Some(items) = obj.get("items") {
        if let Some(list) = instance.as_array() {
            for (i, value) in list.iter().enumerate() {
                validate_at(items, value, &format!("{path}[{i}]"))?;
            }
        }
    }
    for (bound, cmp) in [("minItems", true), ("maxItems", false)] {
        if let (Some(limit), Some(list)) = (
            obj.get(bound).and_then(|v| v.as_u64()),
            instance.as_array(),
        ) {
            let n = list.len() as u64;
            if (cmp && n < limit) || (!cmp && n > limit) {
                return Err(format!("{path}: array length {n} violates {bound} {limit}"));
            }
        }
    }
    Ok(())
}

/// The shipped schema texts, embedded so the binary is self-contained.
pub fn schema_for_kind(kind: &str) -> Option<&'static str> {
    match kind {
        "classification" => Some(include_str!("../../../schemas/classification_report.schema.json")),
        "normal_form" => Some(include_str!("../../../schemas/normal_form_report.schema.json")),
        "holonomy" => Some(include_str!("../../../schemas/holonomy_report.schema.json")),
        "holonomy_generators" => Some(include_str!(
            "../../../schemas/holonomy_generators_report.schema.json"
        )),
        "synthesis" => Some(include_str!("../../../schemas/synthesis_report.schema.json")),
        _ => None,
    }
}

/// Validate a report value against the schema selected by its "kind".
pub fn validate_report(instance: &Value) -> Result<String, String> {
    let kind = instance
        .get("kind")
        .and_then(|k| k.as_str())
        .ok_or_else(|| "report has no kind field".to_string())?;
    let schema_text =
        schema_for_kind(kind).ok_or_else(|| format!("no schema for kind {kind}"))?;
    let schema: Value =
        serde_json::from_str(schema_text).map_err(|e| format!("schema parse error: {e}"))?;
    validate_schema(&schema, instance)?;
    Ok(kind.to_string())
}
