//! Input formats (sequence CSV, sampled-triple CSV, triple TOML, inline
//! function descriptors) and report rows.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::continuous::{Interval, Monotonicity, SampledFunction, WeightedTriple};
use crate::curvature::parse_list;
use crate::discrete::WeightedSequence;
use crate::error::{bail, Error, Result};
use crate::report::{sig12, BoundReport, Extremum};

#[derive(Debug, Deserialize)]
struct SequenceRecord {
    a: f64,
    b: f64,
    p: f64,
}

/// Reads a sequence from CSV with header columns `a,b,p` (any order).
pub fn read_sequence_csv<R: Read>(reader: R) -> Result<WeightedSequence> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let (mut a, mut b, mut p) = (Vec::new(), Vec::new(), Vec::new());
    for rec in rdr.deserialize() {
        let rec: SequenceRecord = rec?;
        a.push(rec.a);
        b.push(rec.b);
        p.push(rec.p);
    }
    WeightedSequence::new(a, b, p)
}

pub fn read_sequence_path(path: &Path) -> Result<WeightedSequence> {
    read_sequence_csv(std::fs::File::open(path)?)
}

#[derive(Debug, Deserialize)]
struct SampleRecord {
    x: f64,
    f: f64,
    g: f64,
    p: f64,
}

/// Monotonicity read off the samples; constant samples count as nonincreasing.
fn infer_tag(ys: &[f64]) -> Monotonicity {
    if ys.windows(2).all(|w| w[0] >= w[1]) {
        Monotonicity::Nonincreasing
    } else if ys.windows(2).all(|w| w[0] <= w[1]) {
        Monotonicity::Nondecreasing
    } else {
        Monotonicity::None
    }
}

/// Reads a sampled triple from CSV columns `x,f,g,p`; the functions are the
/// piecewise-linear interpolants and the monotonicity tags of `f` and `g`
/// are inferred from the samples.
pub fn read_triple_csv<R: Read>(reader: R) -> Result<WeightedTriple> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let (mut xs, mut fs, mut gs, mut ps) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for rec in rdr.deserialize() {
        let rec: SampleRecord = rec?;
        xs.push(rec.x);
        fs.push(rec.f);
        gs.push(rec.g);
        ps.push(rec.p);
    }
    if xs.len() < 2 {
        bail!(Parse, "sampled triple needs at least 2 rows, got {}", xs.len());
    }
    let iv = Interval::new(xs[0], xs[xs.len() - 1])?;
    let f_tag = infer_tag(&fs);
    if f_tag == Monotonicity::None {
        bail!(Invariant, "column f is not monotone");
    }
    let f = SampledFunction::piecewise_linear(iv, &xs, &fs, f_tag)?.with_label("f");
    let g = SampledFunction::piecewise_linear(iv, &xs, &gs, infer_tag(&gs))?.with_label("g");
    let p = SampledFunction::piecewise_linear(iv, &xs, &ps, Monotonicity::None)?.with_label("p");
    WeightedTriple::new(f, g, p)
}

pub fn read_triple_csv_path(path: &Path) -> Result<WeightedTriple> {
    read_triple_csv(std::fs::File::open(path)?)
}

fn parse_real(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}")))
}

/// Builds a function on `iv` from a descriptor:
///
/// | descriptor | function | tag |
/// |---|---|---|
/// | `const`, `const:c`, `zero` | `1`, `c`, `0` | nonincreasing |
/// | `lin-inc`, `lin-dec` | `x - a`, `b - x` | by direction |
/// | `exp-dec:λ`, `exp-inc:λ` | `e^{-λ(x-a)}`, `1 - e^{-λ(x-a)}` | by direction |
/// | `pow:e` | `(x - a)^e` | nondecreasing |
/// | `step:<breaks>@<values>` | step function | inferred |
/// | `plin:<xs>@<ys>` | linear interpolation | inferred |
pub fn parse_function(descriptor: &str, iv: Interval) -> Result<SampledFunction> {
    let d = descriptor.trim();
    let (name, params) = match d.split_once(':') {
        Some((n, p)) => (n.trim(), Some(p)),
        None => (d, None),
    };
    let a = iv.left;
    let need = |what: &str| params.ok_or_else(|| Error::Parse(format!("{name} needs a parameter ({what})")));
    let f = match name {
        "const" => SampledFunction::constant(iv, params.map(parse_real).transpose()?.unwrap_or(1.0))?,
        "zero" => SampledFunction::constant(iv, 0.0)?,
        "lin-inc" => SampledFunction::linear_increasing(iv)?,
        "lin-dec" => SampledFunction::linear_decreasing(iv)?,
        "exp-dec" => {
            let l = parse_real(need("rate")?)?;
            SampledFunction::from_fn(iv, d, Monotonicity::Nonincreasing, move |x| (-l * (x - a)).exp())?
        }
        "exp-inc" => {
            let l = parse_real(need("rate")?)?;
            SampledFunction::from_fn(iv, d, Monotonicity::Nondecreasing, move |x| 1.0 - (-l * (x - a)).exp())?
        }
        "pow" => {
            let e = parse_real(need("exponent")?)?;
            if !(e >= 0.0) {
                bail!(Parse, "pow exponent must be nonnegative, got {e}");
            }
            SampledFunction::from_fn(iv, d, Monotonicity::Nondecreasing, move |x| (x - a).max(0.0).powf(e))?
        }
        "step" => {
            let (breaks, values) = need("breaks@values")?
                .split_once('@')
                .ok_or_else(|| Error::Parse("step needs <breaks>@<values>".into()))?;
            let breaks = if breaks.trim().is_empty() {
                Vec::new()
            } else {
                parse_list(breaks)?
            };
            let values = parse_list(values)?;
            SampledFunction::steps(iv, &breaks, &values, infer_tag(&values))?
        }
        "plin" => {
            let (xs, ys) = need("xs@ys")?
                .split_once('@')
                .ok_or_else(|| Error::Parse("plin needs <xs>@<ys>".into()))?;
            let ys = parse_list(ys)?;
            SampledFunction::piecewise_linear(iv, &parse_list(xs)?, &ys, infer_tag(&ys))?
        }
        other => bail!(Parse, "unknown function family {other:?}"),
    };
    Ok(f.with_label(d))
}

fn parse_tag(s: &str) -> Result<Monotonicity> {
    match s.trim() {
        "nonincreasing" => Ok(Monotonicity::Nonincreasing),
        "nondecreasing" => Ok(Monotonicity::Nondecreasing),
        "none" => Ok(Monotonicity::None),
        other => bail!(Parse, "unknown monotonicity tag {other:?}"),
    }
}

/// `builtin:f=<desc>,g=<desc>,p=<desc>[,a=<left>][,b=<right>]`; `p`
/// defaults to `const` and the interval to `[0, 1]`. Descriptors may contain
/// commas; a new field starts only at `,<key>=`.
pub fn parse_builtin_triple(text: &str) -> Result<WeightedTriple> {
    let body = text
        .trim()
        .strip_prefix("builtin:")
        .ok_or_else(|| Error::Parse(format!("{text:?}: expected builtin:f=...,g=...,p=...")))?;
    let mut fields: Vec<(String, String)> = Vec::new();
    for part in body.split(',') {
        match part.split_once('=') {
            Some((k, v)) if matches!(k.trim(), "f" | "g" | "p" | "a" | "b") => {
                fields.push((k.trim().to_string(), v.to_string()));
            }
            _ => match fields.last_mut() {
                Some((_, v)) => {
                    v.push(',');
                    v.push_str(part);
                }
                None => bail!(Parse, "{text:?}: expected key=value fields"),
            },
        }
    }
    let get = |k: &str| fields.iter().rev().find(|(key, _)| key == k).map(|(_, v)| v.as_str());
    let left = get("a").map(parse_real).transpose()?.unwrap_or(0.0);
    let right = get("b").map(parse_real).transpose()?.unwrap_or(1.0);
    let iv = Interval::new(left, right)?;
    let f = parse_function(
        get("f").ok_or_else(|| Error::Parse("builtin triple needs f=".into()))?,
        iv,
    )?;
    let g = parse_function(
        get("g").ok_or_else(|| Error::Parse("builtin triple needs g=".into()))?,
        iv,
    )?;
    let p = parse_function(get("p").unwrap_or("const"), iv)?;
    WeightedTriple::new(f, g, p)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RoleSpec {
    family: String,
    tag: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TripleSpec {
    interval: [f64; 2],
    /// Treat the right end as a finite horizon standing in for infinity.
    #[serde(default)]
    truncated: bool,
    f: RoleSpec,
    g: RoleSpec,
    p: RoleSpec,
}

/// Reads a triple from TOML:
///
/// ```toml
/// interval = [0.0, 1.0]
/// f = { family = "lin-dec" }
/// g = { family = "lin-inc", tag = "nondecreasing" }
/// p = { family = "const" }
/// ```
pub fn read_triple_toml(text: &str) -> Result<WeightedTriple> {
    let spec: TripleSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let [left, right] = spec.interval;
    let iv = if spec.truncated {
        Interval::truncated_infinite(left, right)?
    } else {
        Interval::new(left, right)?
    };
    let build = |role: &RoleSpec| -> Result<SampledFunction> {
        let f = parse_function(&role.family, iv)?;
        match &role.tag {
            Some(tag) => f.retag(parse_tag(tag)?),
            None => Ok(f),
        }
    };
    WeightedTriple::new(build(&spec.f)?, build(&spec.g)?, build(&spec.p)?)
}

pub fn read_triple_toml_path(path: &Path) -> Result<WeightedTriple> {
    read_triple_toml(&std::fs::read_to_string(path)?)
}

/// One line of a bound report export.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub instance_id: String,
    pub theorem: String,
    pub lhs: f64,
    pub bound: f64,
    /// 1-based index for sequences, point `s` for functions.
    pub extremal_s: f64,
    pub slack: f64,
    pub holds: bool,
    pub divergent: bool,
}

impl ReportRow {
    pub fn new(instance_id: impl Into<String>, theorem: impl Into<String>, r: &BoundReport) -> Self {
        Self {
            instance_id: instance_id.into(),
            theorem: theorem.into(),
            lhs: r.lhs,
            bound: r.bound,
            extremal_s: match r.extremal_s {
                Extremum::Index(i) => i as f64,
                Extremum::Point(s) => s,
            },
            slack: r.slack,
            holds: r.holds,
            divergent: r.divergent,
        }
    }
}

/// Rounds every float in a JSON tree to 12 significant digits.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => match n.as_f64() {
            Some(x) => serde_json::Number::from_f64(sig12(x)).map_or(Value::Null, Value::Number),
            None => Value::Number(n),
        },
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

/// Pretty JSON with floats at 12 significant digits, newline-terminated.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let v = round_json(serde_json::to_value(value)?);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

/// Formats a float for text and CSV output at 12 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = sig12(x);
    if r == 0.0 {
        return "0".into();
    }
    let exp = r.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

/// Writes records as CSV with a header; floats (as rendered by serde) are
/// rounded through [`round_json`] first so CSV and JSON agree.
pub fn write_csv<T: Serialize, W: Write>(records: &[T], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let rows: Vec<Value> = records
        .iter()
        .map(|r| serde_json::to_value(r).map(round_json))
        .collect::<std::result::Result<_, _>>()?;
    let Some(Value::Object(first)) = rows.first() else {
        wtr.flush()?;
        return Ok(());
    };
    let header: Vec<String> = first.keys().cloned().collect();
    wtr.write_record(&header)?;
    for row in &rows {
        let Value::Object(map) = row else {
            bail!(Invariant, "CSV rows must be flat records");
        };
        let fields: Vec<String> = header
            .iter()
            .map(|k| match map.get(k) {
                None | Some(Value::Null) => String::new(),
                Some(Value::String(s)) => s.clone(),
                Some(Value::Number(n)) => match n.as_f64() {
                    Some(x) if !(n.is_i64() || n.is_u64()) => fmt_num(x),
                    _ => n.to_string(),
                },
                Some(v) => v.to_string(),
            })
            .collect();
        wtr.write_record(&fields)?;
    }
    wtr.flush()?;
    Ok(())
}
