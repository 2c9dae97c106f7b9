//! The subcommands. Each returns a report value and an exit status.

use serde_json::{json, Value};

use l2betti::betti::{
    betti_hochschild, betti_sauer, verify_theorem, BettiTable, Instance, Pipeline, Theorem, TheoremReport,
    VerifyOptions,
};
use l2betti::complex::{check_classifying_homotopy, geometric_complex, ChainComplex, WordComplex, WordKind};
use l2betti::extension::{convolution_algebra, twisted_convolution, Extension};
use l2betti::fiber_square::{balanced_tensor, fiber_square, groupoid_iso, routes_agree, FiberOptions, Reading};
use l2betti::groupoid::FiniteGroupoid;
use l2betti::peirce::Peirce;
use l2betti::spaces::{GeometricKind, GeometricSpace};
use l2betti::Rational;

use crate::input::{self, Document, InputError, InstanceSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DISCREPANCY: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// A finished command: the report, and the exit status it implies.
pub struct Outcome {
    pub report: Value,
    pub status: i32,
}

/// Failure before a report could be produced.
#[derive(Debug)]
pub enum Failure {
    Input(InputError),
    /// Preconditions or computation limits, with a witness message.
    Rejected(String),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e)
    }
}

type Run = Result<Outcome, Failure>;

fn q(r: &Rational) -> Value {
    Value::String(r.to_string())
}

fn qs(rs: &[Rational]) -> Value {
    Value::Array(rs.iter().map(q).collect())
}

fn status(ok: bool) -> i32 {
    if ok {
        EXIT_OK
    } else {
        EXIT_DISCREPANCY
    }
}

fn rejected(e: impl std::fmt::Display) -> Failure {
    Failure::Rejected(e.to_string())
}

pub fn validate(doc: &Document, name: &str) -> Run {
    let loc = name;
    let (details, problems): (Value, Vec<String>) = match doc {
        Document::Groupoid(spec) => {
            let g = input::groupoid_unchecked(spec, loc)?;
            let v = input::groupoid_violations(&g);
            (
                json!({"atoms": g.base().len(), "elements": g.len(), "equivalence_relation": g.is_equivalence_relation()}),
                v.iter().map(|x| x.to_string()).collect(),
            )
        }
        Document::Extension(spec) => {
            let b = input::extension_unchecked(spec, loc)?;
            let a = b.extension.algebra();
            let mut problems: Vec<String> = b.algebra_violations.iter().map(|x| x.to_string()).collect();
            problems.extend(b.extension_violations.iter().map(|x| x.to_string()));
            (
                json!({
                    "algebra_dim": a.dim(),
                    "subalgebra_dim": b.extension.sub_dim(),
                    "subalgebra_commutative": b.extension.sub_is_commutative(),
                    "semisimple": a.is_semisimple(),
                    "normalizing_unitaries": b.extension.normalizing_unitaries().len(),
                }),
                problems,
            )
        }
        Document::Cocycle(spec) => {
            let (r, sigma) = input::cocycle_unchecked(spec, loc)?;
            // a valid cocycle can still give a twisted algebra whose trace is not positive
            let problems = match sigma.validate(&r) {
                Ok(()) => twisted_convolution(&r, &sigma)
                    .map(|e| e.algebra().validate())
                    .unwrap_or_default()
                    .iter()
                    .map(|v| format!("twisted algebra: {v}"))
                    .collect(),
                Err(e) => vec![e.to_string()],
            };
            (json!({"atoms": r.base().len(), "relation_elements": r.len()}), problems)
        }
        Document::Instance(spec) => {
            let inst = instance(spec, loc)?;
            (json!({"theorem": inst.theorem().name()}), Vec::new())
        }
    };
    let ok = problems.is_empty();
    Ok(Outcome {
        report: json!({
            "command": "validate",
            "document": doc.kind(),
            "details": details,
            "valid": ok,
            "violations": problems,
        }),
        status: status(ok),
    })
}

fn instance(spec: &InstanceSpec, loc: &str) -> Result<Instance, InputError> {
    Ok(match spec {
        InstanceSpec::Compression { extension, projection } => {
            let ext = input::extension(extension, &format!("{loc}.extension"))?;
            let p = input::elem(projection, ext.algebra().labels(), &format!("{loc}.projection"))?;
            Instance::Compression { ext, p }
        }
        InstanceSpec::DirectedSum { parts } => {
            let (parts, weights) = input::parts_of(parts, &format!("{loc}.parts"))?;
            Instance::DirectedSum { parts, weights }
        }
        InstanceSpec::CentralQuadratic { parts } => {
            let (parts, weights) = input::parts_of(parts, &format!("{loc}.parts"))?;
            Instance::CentralQuadratic { parts, weights }
        }
        InstanceSpec::GroupoidEquality { groupoid } => {
            Instance::GroupoidEquality { groupoid: input::groupoid(groupoid, &format!("{loc}.groupoid"))? }
        }
        InstanceSpec::Residual { cocycle } => {
            let (relation, cocycle) = input::cocycle(cocycle, &format!("{loc}.cocycle"))?;
            Instance::Residual { relation, cocycle }
        }
    })
}

enum Subject {
    Groupoid(FiniteGroupoid),
    Extension(Extension),
}

impl Subject {
    fn extension(&self) -> Extension {
        match self {
            Subject::Groupoid(g) => convolution_algebra(g),
            Subject::Extension(e) => e.clone(),
        }
    }
}

fn subject(doc: &Document, loc: &str) -> Result<Subject, Failure> {
    match doc {
        Document::Groupoid(spec) => Ok(Subject::Groupoid(input::groupoid(spec, loc)?)),
        Document::Extension(spec) => Ok(Subject::Extension(input::extension(spec, loc)?)),
        other => Err(Failure::Input(InputError {
            location: loc.to_string(),
            message: format!("expected a groupoid or an extension, found a {}", other.kind()),
        })),
    }
}

pub fn table_value(t: &BettiTable) -> Value {
    json!({
        "pipeline": t.pipeline.name(),
        "degrees": t.cap,
        "betti": qs(&t.values),
        "homology_dims": t.homology_dims,
        "methods": t.methods.iter().map(|m| m.name()).collect::<Vec<_>>(),
        "coefficient_algebra_dim": t.coefficient_dim,
        "input_sha256": t.input_hash,
        "notes": t.notes,
    })
}

pub fn betti(doc: &Document, loc: &str, hash: &str, cap: usize, pipeline: Option<Pipeline>, both: bool) -> Run {
    let subject = subject(doc, loc)?;
    let pipelines: Vec<Pipeline> = match (&subject, both, pipeline) {
        (Subject::Groupoid(_), true, _) => vec![Pipeline::Sauer, Pipeline::Hochschild],
        (Subject::Extension(_), true, _) | (Subject::Extension(_), _, Some(Pipeline::Sauer)) => {
            return Err(rejected("the sauer pipeline needs a groupoid input"))
        }
        (_, false, p) => vec![p.unwrap_or(Pipeline::Hochschild)],
    };
    let mut tables = Vec::new();
    for p in pipelines {
        let t = match (p, &subject) {
            (Pipeline::Sauer, Subject::Groupoid(g)) => betti_sauer(g, cap),
            _ => betti_hochschild(&subject.extension(), cap),
        }
        .map_err(rejected)?;
        tables.push(t.with_hash(hash.to_string()));
    }
    let mut report = json!({
        "command": "betti",
        "document": doc.kind(),
        "tables": tables.iter().map(table_value).collect::<Vec<_>>(),
    });
    let mut st = EXIT_OK;
    if let [a, b] = tables.as_slice() {
        let equal = a.same_values(b);
        let diff: Vec<Rational> = a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect();
        report["pipelines_agree"] = json!(equal);
        report["difference"] = qs(&diff);
        st = status(equal);
    }
    Ok(Outcome { report, status: st })
}

fn word_kind(s: &str) -> Option<WordKind> {
    match s {
        "bar" => Some(WordKind::Bar),
        "cyclic" => Some(WordKind::Cyclic),
        "acyclic" => Some(WordKind::Acyclic),
        _ => None,
    }
}

fn complex_value(c: &ChainComplex, cap: usize) -> Value {
    json!({
        "chain_dims": c.dims(),
        "boundary_ranks": (0..=cap).map(|n| c.rank(n)).collect::<Vec<_>>(),
        "homology_dims": (0..cap).map(|n| c.homology_dim(n).unwrap_or(0)).collect::<Vec<_>>(),
        "d_squared_zero": c.check_d_squared().is_ok(),
        "presimplicial": c.check_presimplicial().is_ok(),
    })
}

pub fn homology(doc: &Document, loc: &str, cap: usize, kind: &str, geometric: bool) -> Run {
    let subject = subject(doc, loc)?;
    let (mut report, ok) = if geometric {
        let Subject::Groupoid(g) = &subject else {
            return Err(rejected("geometric complexes need a groupoid input"));
        };
        let gk = GeometricKind::parse(kind).ok_or_else(|| rejected(format!("unknown geometric complex `{kind}`")))?;
        let space = GeometricSpace::new(g, gk, cap);
        let c = geometric_complex(&space);
        let mut v = complex_value(&c, cap);
        let mut ok = v["d_squared_zero"] == json!(true) && v["presimplicial"] == json!(true);
        if gk == GeometricKind::Classifying {
            let h = check_classifying_homotopy(g, &space).is_ok();
            v["homotopy"] = json!(h);
            ok &= h;
        }
        v["complex"] = json!(format!("geometric {}", gk.name()));
        (v, ok)
    } else {
        let wk =
            word_kind(kind).ok_or_else(|| rejected(format!("unknown complex `{kind}`; use bar, cyclic or acyclic")))?;
        let ext = subject.extension();
        let peirce = Peirce::new(&ext).map_err(rejected)?;
        let wc = WordComplex::new(peirce, wk);
        let (c, _) = wc.materialize(cap);
        let mut v = complex_value(&c, cap);
        let mut ok = v["d_squared_zero"] == json!(true) && v["presimplicial"] == json!(true);
        if let Some(start) = wc.homotopy_range_start() {
            let checked: Vec<usize> = (start..cap).collect();
            let h = checked.iter().all(|&n| wc.check_homotopy(n).is_ok());
            v["homotopy_degrees"] = json!(checked);
            v["homotopy"] = json!(h);
            ok &= h;
        }
        v["complex"] = json!(wk.name());
        (v, ok)
    };
    report["command"] = json!("homology");
    report["degrees"] = json!(cap);
    Ok(Outcome { report, status: status(ok) })
}

pub fn fiber(doc: &Document, loc: &str, reading: Reading) -> Run {
    let subject = subject(doc, loc)?;
    let ext = subject.extension();
    let fs = fiber_square(&ext, &ext, FiberOptions { reading, bound: None }).map_err(rejected)?;
    let rad = balanced_tensor(&ext, &ext).map_err(rejected)?;
    let r = &fs.report;
    let agree = routes_agree(&rad, fs.tensor());
    let mut ok = agree
        && r.products_realized
        && r.violations.is_empty()
        && r.well_defined
        && r.commutes_with_bimodule
        && r.ev_central;
    let mut report = json!({
        "command": "fiber-square",
        "document": doc.kind(),
        "reading": match reading { Reading::Standard => "standard", Reading::Swapped => "swapped" },
        "dim": fs.dim(),
        "balanced_tensor_dim": fs.tensor().dim(),
        "tensor_routes_agree": agree,
        "candidate_pairs": r.candidate_pairs,
        "admissible_pairs": r.admissible_pairs,
        "generators": r.generators,
        "well_defined": r.well_defined,
        "commutes_with_bimodule": r.commutes_with_bimodule,
        "star_rule": r.star_rule,
        "ev_central": r.ev_central,
        "faithful_on_invariants": r.faithful_on_invariants,
        "products_realized": r.products_realized,
        "trace_violations": r.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "reading_discrepancy": [r.reading_discrepancy.0, r.reading_discrepancy.1],
        "other_reading_ill_defined": r.other_reading_ill_defined,
    });
    if let Subject::Groupoid(g) = &subject {
        let iso = groupoid_iso(&fs, g);
        report["enveloping_groupoid"] = json!({
            "dim": iso.envelope_dim,
            "ev_in_envelope": iso.ev_in_envelope,
            "structure_match": iso.structure_match,
            "star_match": iso.star_match,
            "trace_match": iso.trace_match,
            "diagonal_fixed": iso.diagonal_fixed,
            "isomorphism": iso.holds(),
        });
        ok &= iso.holds();
    }
    Ok(Outcome { report, status: status(ok) })
}

/// Instance from a document: an instance document, or a groupoid / cocycle
/// for the theorems that take one directly.
pub fn instance_for(theorem: Theorem, doc: &Document, loc: &str) -> Result<Instance, Failure> {
    let inst = match doc {
        Document::Instance(spec) => instance(spec, loc)?,
        Document::Groupoid(spec) if theorem == Theorem::GroupoidEquality => {
            Instance::GroupoidEquality { groupoid: input::groupoid(spec, loc)? }
        }
        Document::Cocycle(spec) if theorem == Theorem::Residual => {
            let (relation, cocycle) = input::cocycle(spec, loc)?;
            Instance::Residual { relation, cocycle }
        }
        other => {
            return Err(Failure::Input(InputError {
                location: loc.to_string(),
                message: format!("a {} document is not an instance of {}", other.kind(), theorem.name()),
            }))
        }
    };
    if inst.theorem() != theorem {
        return Err(Failure::Input(InputError {
            location: loc.to_string(),
            message: format!("instance is for {}, not {}", inst.theorem().name(), theorem.name()),
        }));
    }
    Ok(inst)
}

pub fn summary(rep: &TheoremReport) -> String {
    let line = |a: &Rational, b: &Rational| {
        if a == b {
            format!("lhs = rhs = {a}")
        } else {
            format!("lhs = {a}, rhs = {b}, lhs - rhs = {}", a - b)
        }
    };
    match (rep.lhs.as_slice(), rep.rhs.as_slice()) {
        ([a], [b]) => line(a, b),
        _ => rep
            .lhs
            .iter()
            .zip(&rep.rhs)
            .enumerate()
            .map(|(n, (a, b))| format!("degree {n}: {}", line(a, b)))
            .collect::<Vec<_>>()
            .join("; "),
    }
}

pub fn verify(theorem: Theorem, doc: &Document, loc: &str, hash: &str, cap: usize, extended_scope: bool) -> Run {
    let inst = instance_for(theorem, doc, loc)?;
    let rep = verify_theorem(&inst, VerifyOptions { cap, extended_scope }).map_err(rejected)?;
    let ok = rep.holds();
    let report = json!({
        "command": "verify",
        "theorem": theorem.name(),
        "scope": rep.scope.name(),
        "input_sha256": hash,
        "lhs": qs(&rep.lhs),
        "rhs": qs(&rep.rhs),
        "equal": rep.sides_equal(),
        "discrepancy": qs(&rep.discrepancy()),
        "side_checks": rep.side_checks.iter().map(|(k, v)| json!({"check": k, "holds": v})).collect::<Vec<_>>(),
        "tables": rep.tables.iter().map(|(k, t)| json!({"name": k, "table": table_value(t)})).collect::<Vec<_>>(),
        "notes": rep.notes,
        "holds": ok,
        "summary": summary(&rep),
    });
    Ok(Outcome { report, status: status(ok) })
}
