//! Command-line driver: curve records in, JSON lines out.

use crate::ecurve::{count_points, reduce_curve, Curve, Point, ReductionKind};
use crate::error::{Error, Result};
use crate::growth::{classify_growth, allowed_groups, GrowthResult, TorsionF};
use crate::modcurves::{fermat_quartic_search, ogg_cusps, verify_suite};
use crate::qfield::{set_factor_norm_bound, FieldElem, QField};
use crate::torsion::Shape;
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::{BTreeMap, HashSet};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "quadtors", version, about = "Torsion growth of elliptic curves over Q(i) and Q(sqrt(-3))")]
pub struct Cli {
    /// Largest norm the integer factorization will attempt.
    #[arg(long, global = true)]
    pub factor_norm_bound: Option<u64>,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Classify E(K)_tors and E(F)_tors for one curve or a file of curve records.
    Classify {
        #[arg(long, default_value = "gauss")]
        field: String,
        /// Five coefficients `[a1,a2,a3,a4,a6]`.
        #[arg(long, conflicts_with = "input", required_unless_present = "input")]
        curve: Option<String>,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write per-record timings to this file.
        #[arg(long)]
        timing: Option<PathBuf>,
    },
    /// Run a named group of reference checks.
    Verify {
        #[arg(default_value = "all", value_parser = ["all", "cusps", "inventories", "fermat", "jacobian", "jinv", "division"])]
        suite: String,
    },
    /// Classify every short model with integral coefficients of norm <= bound, or a record file.
    Corpus {
        #[arg(long, default_value = "gauss")]
        field: String,
        #[arg(long, required_unless_present = "input")]
        coeff_bound: Option<u64>,
        #[arg(long, conflicts_with = "coeff_bound")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        timing: Option<PathBuf>,
    },
    /// Cusp table of X0(n).
    Cusps { n: u64 },
    /// Reduce a curve at an odd prime and count points.
    CountPoints {
        #[arg(long, default_value = "gauss")]
        field: String,
        #[arg(long)]
        curve: String,
        #[arg(long)]
        prime: String,
    },
    /// Bounded search for x^4 + y^4 = 1 over K(sqrt(d1), sqrt(d2)).
    FermatSearch {
        #[arg(long, default_value = "gauss")]
        field: String,
        /// Comma-separated radicands.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        radicands: Vec<String>,
        #[arg(long, default_value_t = 10)]
        height: u64,
    },
}

/// An input line.  `coefficients` is either a list or a bracketed string.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CurveRecord {
    #[serde(default)]
    pub id: String,
    #[serde(default)]
    pub field: Option<QField>,
    pub coefficients: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<Expected>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Expected {
    #[serde(rename = "torsion_K", default, skip_serializing_if = "Option::is_none")]
    pub torsion_k: Option<Shape>,
    #[serde(rename = "torsion_F", default, skip_serializing_if = "Option::is_none")]
    pub torsion_f: Option<TorsionF>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct StepRecord {
    pub rule: String,
    pub anchor: String,
    pub inputs: Vec<String>,
    pub conclusion: String,
}

/// One classified curve.  No wall-clock data: identical input gives identical bytes.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ResultRecord {
    pub v: u32,
    pub id: String,
    pub field: QField,
    pub curve: String,
    #[serde(rename = "torsion_K")]
    pub torsion_k: Shape,
    #[serde(rename = "torsion_K_generators")]
    pub generators: Vec<[String; 2]>,
    #[serde(rename = "torsion_F")]
    pub torsion_f: TorsionF,
    pub certificate: Vec<StepRecord>,
    pub witness_radicands: Vec<String>,
}

impl ResultRecord {
    pub fn new(id: &str, e: &Curve<FieldElem>, g: &GrowthResult) -> ResultRecord {
        ResultRecord {
            v: SCHEMA_VERSION,
            id: id.to_string(),
            field: e.field(),
            curve: e.to_string(),
            torsion_k: g.torsion_k.shape,
            generators: g
                .torsion_k
                .generators
                .iter()
                .filter_map(|p| match p {
                    Point::Aff(x, y) => Some([x.to_string(), y.to_string()]),
                    Point::Inf => None,
                })
                .collect(),
            torsion_f: g.torsion_f.clone(),
            certificate: g
                .certificate
                .iter()
                .map(|s| StepRecord {
                    rule: s.rule.to_string(),
                    anchor: s.anchor.to_string(),
                    inputs: s.inputs.clone(),
                    conclusion: s.conclusion.clone(),
                })
                .collect(),
            witness_radicands: g.witness_radicands.iter().map(|d| d.to_string()).collect(),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }

    pub fn from_line(line: &str) -> Result<ResultRecord> {
        serde_json::from_str(line).map_err(|e| json_error(line, e))
    }
}

#[derive(Clone, Debug, Serialize)]
struct TimingRecord<'a> {
    v: u32,
    id: &'a str,
    ms: f64,
}

fn json_error(line: &str, e: serde_json::Error) -> Error {
    let pos = line.split_inclusive('\n').take(e.line().saturating_sub(1)).map(str::len).sum::<usize>() + e.column().saturating_sub(1);
    let token: String = line.get(pos..).unwrap_or("").chars().take(8).collect();
    Error::Parse { pos, token, msg: e.to_string() }
}

/// Parses the coefficients of a record into a curve.
pub fn parse_record(rec: &CurveRecord, default_field: QField) -> Result<Curve<FieldElem>> {
    let field = rec.field.unwrap_or(default_field);
    match &rec.coefficients {
        Value::String(s) => Curve::parse(field, s),
        Value::Array(items) => {
            let mut c = Vec::new();
            for (k, v) in items.iter().enumerate() {
                let text = match v {
                    Value::String(s) => s.clone(),
                    Value::Number(n) => n.to_string(),
                    other => {
                        return Err(Error::Parse { pos: k, token: other.to_string(), msg: "coefficient must be a string or integer".into() })
                    }
                };
                c.push(field.parse(&text).map_err(|e| match e {
                    Error::Parse { pos, token, msg } => Error::Parse { pos, token, msg: format!("coefficient {k}: {msg}") },
                    e => e,
                })?);
            }
            let c: [FieldElem; 5] = c
                .try_into()
                .map_err(|v: Vec<FieldElem>| Error::Parse { pos: v.len(), token: String::new(), msg: "expected 5 coefficients".into() })?;
            Curve::new(c)
        }
        other => Err(Error::Parse { pos: 0, token: other.to_string(), msg: "coefficients must be a list or a string".into() }),
    }
}

/// Classifies one curve and checks any expectations the record carries.
pub fn classify_record(id: &str, e: &Curve<FieldElem>, expected: Option<&Expected>) -> Result<ResultRecord> {
    let g = classify_growth(e)?;
    let r = ResultRecord::new(id, e, &g);
    if let Some(x) = expected {
        if x.torsion_k.is_some_and(|s| s != r.torsion_k) || x.torsion_f.as_ref().is_some_and(|t| *t != r.torsion_f) {
            return Err(Error::Violation(format!("{id}: result {} / {} differs from the expected one", r.torsion_k, r.torsion_f)));
        }
    }
    Ok(r)
}

/// Rational integers of O_K with norm <= bound, ordered by (norm, coordinates).
pub fn integers_of_norm(field: QField, bound: u64) -> Vec<FieldElem> {
    let r = (bound as f64).sqrt() as i64 + 2;
    let mut v: Vec<FieldElem> = Vec::new();
    for x in -2 * r..=2 * r {
        for y in -2 * r..=2 * r {
            let e = match field {
                QField::Gauss => field.elem(x, y),
                // x + y(-1 + sqrt(-3))/2
                QField::Eisenstein => field.frac(2 * x - y, 2, y, 2),
            };
            if e.norm() <= crate::qfield::rat(bound as i64) {
                v.push(e);
            }
        }
    }
    v.sort_by(|a, b| (a.norm(), a).cmp(&(b.norm(), b)));
    v.dedup();
    v
}

/// Short models `y^2 = x^3 + ax + b` with integral a, b of norm <= bound,
/// one per j-invariant (quadratic twists share E(F)); j = 0 and 1728 are all kept.
pub fn short_model_corpus(field: QField, bound: u64) -> (Vec<(String, Curve<FieldElem>)>, usize) {
    let ints = integers_of_norm(field, bound);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut dups = 0;
    for a in &ints {
        for b in &ints {
            let Ok(e) = Curve::short(a.clone(), b.clone()) else { continue };
            let j = e.j().clone();
            if !crate::Field::is_zero(&j) && j != field.int(1728) && !seen.insert(j) {
                dups += 1;
                continue;
            }
            out.push((format!("E({a},{b})"), e));
        }
    }
    (out, dups)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. }
        | Error::Singular
        | Error::WrongField(_)
        | Error::Io(_)
        | Error::OutOfRange(_)
        | Error::Zero
        | Error::NotPrime(_)
        | Error::ResidueCharTwo
        | Error::NormBound { .. } => 1,
        _ => 2,
    }
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn write_lines(out: Option<&Path>, lines: &[String]) -> Result<()> {
    let mut text = String::new();
    for l in lines {
        text.push_str(l);
        text.push('\n');
    }
    match out {
        Some(p) => std::fs::write(p, text).map_err(io),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(io),
    }
}

fn read_records(path: &Path) -> Result<Vec<(usize, CurveRecord)>> {
    let text = std::fs::read_to_string(path).map_err(io)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: CurveRecord = serde_json::from_str(line).map_err(|e| with_line(i + 1, json_error(line, e)))?;
        out.push((i + 1, rec));
    }
    Ok(out)
}

fn with_line(line: usize, e: Error) -> Error {
    match e {
        Error::Parse { pos, token, msg } => Error::Parse { pos, token, msg: format!("line {line}: {msg}") },
        e => e,
    }
}

type Job = (String, Curve<FieldElem>, Option<Expected>);

fn load_jobs(path: &Path, field: QField) -> Result<Vec<Job>> {
    read_records(path)?
        .into_iter()
        .map(|(line, rec)| {
            let e = parse_record(&rec, field).map_err(|e| with_line(line, e))?;
            let id = if rec.id.is_empty() { format!("line{line}") } else { rec.id.clone() };
            Ok((id, e, rec.expected))
        })
        .collect()
}

/// Classifies in parallel; results come back in input order.
fn run_jobs(jobs: &[Job]) -> Vec<(Result<ResultRecord>, f64)> {
    jobs.par_iter()
        .map(|(id, e, x)| {
            let t = Instant::now();
            let r = classify_record(id, e, x.as_ref());
            (r, t.elapsed().as_secs_f64() * 1e3)
        })
        .collect()
}

fn write_timing(path: Option<&Path>, jobs: &[Job], res: &[(Result<ResultRecord>, f64)]) -> Result<()> {
    let Some(p) = path else { return Ok(()) };
    let lines: Vec<String> = jobs
        .iter()
        .zip(res)
        .map(|((id, _, _), (_, ms))| serde_json::to_string(&TimingRecord { v: SCHEMA_VERSION, id, ms: *ms }).unwrap())
        .collect();
    write_lines(Some(p), &lines)
}

fn classify_cmd(field: QField, curve: Option<String>, input: Option<PathBuf>, out: Option<PathBuf>, timing: Option<PathBuf>) -> Result<i32> {
    let jobs = match (curve, input) {
        (Some(c), _) => vec![("cli".to_string(), Curve::parse(field, &c)?, None)],
        (None, Some(p)) => load_jobs(&p, field)?,
        (None, None) => unreachable!("clap requires one of --curve and --input"),
    };
    let res = run_jobs(&jobs);
    write_timing(timing.as_deref(), &jobs, &res)?;
    let mut lines = Vec::new();
    let mut code = 0;
    for (r, _) in res {
        match r {
            Ok(r) => lines.push(r.to_line()),
            Err(e) => {
                eprintln!("error: {e}");
                code = code.max(exit_code(&e));
            }
        }
    }
    write_lines(out.as_deref(), &lines)?;
    Ok(code)
}

/// Histogram of torsion_F over a batch, keyed by the displayed group.
pub fn histogram(records: &[ResultRecord]) -> BTreeMap<String, usize> {
    let mut h = BTreeMap::new();
    for r in records {
        *h.entry(r.torsion_f.to_string()).or_insert(0) += 1;
    }
    h
}

/// Every candidate group lies in the list for the field.
pub fn check_membership(r: &ResultRecord) -> Result<()> {
    let list = allowed_groups(r.field);
    match r.torsion_f.shapes().into_iter().find(|s| !list.contains(s)) {
        Some(s) => Err(Error::Violation(format!("{} ({}): {s} is not in the list for {}", r.id, r.curve, r.field.name()))),
        None => Ok(()),
    }
}

fn corpus_cmd(field: QField, bound: Option<u64>, input: Option<PathBuf>, out: Option<PathBuf>, timing: Option<PathBuf>) -> Result<i32> {
    let (jobs, dups) = match (bound, input) {
        (_, Some(p)) => (load_jobs(&p, field)?, 0),
        (Some(b), None) => {
            if b > 10_000 {
                return Err(Error::OutOfRange(format!("coefficient bound {b}")));
            }
            let (c, d) = short_model_corpus(field, b);
            (c.into_iter().map(|(id, e)| (id, e, None)).collect(), d)
        }
        (None, None) => unreachable!("clap requires one of --coeff-bound and --input"),
    };
    let res = run_jobs(&jobs);
    write_timing(timing.as_deref(), &jobs, &res)?;
    let mut records = Vec::new();
    let mut failure = None;
    for (r, _) in res {
        match r.and_then(|r| check_membership(&r).map(|_| r)) {
            Ok(r) => records.push(r),
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    let lines: Vec<String> = records.iter().map(|r| r.to_line()).collect();
    write_lines(out.as_deref(), &lines)?;
    if let Some(e) = failure {
        eprintln!("error: {e}");
        return Ok(exit_code(&e));
    }
    let summary = json!({
        "v": SCHEMA_VERSION,
        "field": field,
        "classified": records.len(),
        "twist_duplicates": dups,
        "candidate_sets": records.iter().filter(|r| r.torsion_f.exact().is_none()).count(),
        "histogram": histogram(&records),
    });
    eprintln!("{summary}");
    Ok(0)
}

fn verify_cmd(suite: &str) -> Result<i32> {
    let checks = verify_suite(suite)?;
    let failed = checks.iter().filter(|c| !c.pass).count();
    let mut lines: Vec<String> = checks
        .iter()
        .map(|c| {
            let mut v = serde_json::to_value(c).unwrap();
            v["v"] = json!(SCHEMA_VERSION);
            v["suite"] = json!(suite);
            v.to_string()
        })
        .collect();
    lines.push(json!({"v": SCHEMA_VERSION, "suite": suite, "passed": checks.len() - failed, "failed": failed}).to_string());
    write_lines(None, &lines)?;
    Ok(if failed > 0 { 2 } else { 0 })
}

fn count_points_cmd(field: QField, curve: &str, prime: &str) -> Result<i32> {
    let e = Curve::parse(field, curve)?;
    let p = field.parse(prime)?;
    let r = reduce_curve(&e, &p)?;
    let points = match (&r.kind, &r.curve) {
        (ReductionKind::Good, Some(c)) => Some(count_points(c)?),
        _ => None,
    };
    let kind = match r.kind {
        ReductionKind::Good => "good",
        ReductionKind::Multiplicative => "multiplicative",
        ReductionKind::Additive => "additive",
    };
    let line = json!({
        "v": SCHEMA_VERSION,
        "field": field,
        "curve": e.to_string(),
        "prime": r.map.prime.elem().to_string(),
        "q": r.map.q(),
        "reduction": kind,
        "minimal_model": r.model.to_string(),
        "points": points,
    });
    write_lines(None, &[line.to_string()])?;
    Ok(0)
}

fn fermat_cmd(field: QField, radicands: &[String], height: u64) -> Result<i32> {
    let rads = radicands.iter().map(|d| field.parse(d)).collect::<Result<Vec<_>>>()?;
    let sols = fermat_quartic_search(field, &rads, height)?;
    let mut lines: Vec<String> = sols
        .iter()
        .map(|s| {
            let mut v = serde_json::to_value(s).unwrap();
            v["v"] = json!(SCHEMA_VERSION);
            v.to_string()
        })
        .collect();
    let nontrivial = sols.iter().filter(|s| !s.trivial).count();
    lines.push(json!({"v": SCHEMA_VERSION, "field": field, "radicands": radicands, "height": height, "solutions": sols.len(), "nontrivial": nontrivial}).to_string());
    write_lines(None, &lines)?;
    Ok(0)
}

fn dispatch(cli: Cli) -> Result<i32> {
    if let Some(b) = cli.factor_norm_bound {
        set_factor_norm_bound(b);
    }
    match cli.cmd {
        Cmd::Classify { field, curve, input, out, timing } => classify_cmd(QField::from_name(&field)?, curve, input, out, timing),
        Cmd::Verify { suite } => verify_cmd(&suite),
        Cmd::Corpus { field, coeff_bound, input, out, timing } => corpus_cmd(QField::from_name(&field)?, coeff_bound, input, out, timing),
        Cmd::Cusps { n } => {
            let t = ogg_cusps(n)?;
            let mut v = serde_json::to_value(&t).unwrap();
            v["v"] = json!(SCHEMA_VERSION);
            write_lines(None, &[v.to_string()])?;
            Ok(0)
        }
        Cmd::CountPoints { field, curve, prime } => count_points_cmd(QField::from_name(&field)?, &curve, &prime),
        Cmd::FermatSearch { field, radicands, height } => fermat_cmd(QField::from_name(&field)?, &radicands, height),
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
