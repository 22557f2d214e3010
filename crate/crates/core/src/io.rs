//! Connection documents, builtin catalog and JSON helpers.
//!
//! A connection document (schema version 1):
//!
//! ```json
//! {
//!   "schema": 1,
//!   "dimension": 2,
//!   "domain": {"lo": [-1, -1], "hi": [1, 1]},
//!   "christoffel": [
//!     {"i": 1, "j": 2, "k": 2, "poly": [{"coeff": 1.0, "exp": [2, 0]}]}
//!   ]
//! }
//! ```
//!
//! Indices are 1-based with `j <= k`; the `(k, j)` entry is filled in by
//! symmetry. Omitted entries are zero, as is an omitted or empty `poly`.
//! A builtin is requested with `{"schema": 1, "builtin": NAME, "params": {...}}`.

use serde_json::{json, Map, Value};

use crate::chart::{ChartConnection, Domain, OneFormField};
use crate::error::{Error, Result};
use crate::poly::PolyField;
use crate::tensor::PolyTensor;

pub const SCHEMA_VERSION: u64 = 1;
/// Largest total degree accepted for an input polynomial.
pub const MAX_INPUT_DEGREE: u32 = 8;
pub const BUILTIN_NAMES: [&str; 3] = ["flat", "alpha_shift", "nonflat_demo"];

pub fn poly_to_json(p: &PolyField) -> Value {
    Value::Array(
        p.terms()
            .map(|(exp, coeff)| json!({"coeff": coeff, "exp": exp}))
            .collect(),
    )
}

pub fn poly_from_json(v: &Value, n: usize, pointer: &str) -> Result<PolyField> {
    let terms = match v {
        Value::Null => return Ok(PolyField::zero(n)),
        Value::Array(a) => a,
        _ => {
            return Err(Error::parse(
                pointer,
                "polynomial must be an array of terms",
            ))
        }
    };
    let mut out = Vec::with_capacity(terms.len());
    for (t, term) in terms.iter().enumerate() {
        let here = format!("{pointer}/{t}");
        let obj = term
            .as_object()
            .ok_or_else(|| Error::parse(&here, "term must be an object"))?;
        if let Some(key) = obj.keys().find(|k| *k != "coeff" && *k != "exp") {
            return Err(Error::parse(format!("{here}/{key}"), "unknown term field"));
        }
        let coeff = obj
            .get("coeff")
            .and_then(Value::as_f64)
            .ok_or_else(|| Error::parse(format!("{here}/coeff"), "coefficient must be a number"))?;
        let exp_v = obj
            .get("exp")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::parse(format!("{here}/exp"), "exponent must be an array"))?;
        if exp_v.len() != n {
            return Err(Error::parse(
                format!("{here}/exp"),
                format!("exponent has {} entries, expected {n}", exp_v.len()),
            ));
        }
        let mut exp = Vec::with_capacity(n);
        for (e, x) in exp_v.iter().enumerate() {
            let val = x
                .as_u64()
                .filter(|v| *v <= u64::from(u32::MAX))
                .ok_or_else(|| {
                    Error::parse(
                        format!("{here}/exp/{e}"),
                        "exponent must be a non-negative integer",
                    )
                })?;
            exp.push(val as u32);
        }
        let degree: u32 = exp.iter().sum();
        if degree > MAX_INPUT_DEGREE {
            return Err(Error::parse(
                format!("{here}/exp"),
                format!("degree {degree} exceeds the limit of {MAX_INPUT_DEGREE}"),
            ));
        }
        out.push((exp, coeff));
    }
    PolyField::from_terms(n, out).map_err(|e| Error::parse(pointer, e.to_string()))
}

fn index_field(obj: &Map<String, Value>, key: &str, n: usize, here: &str) -> Result<usize> {
    let v = obj
        .get(key)
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::parse(format!("{here}/{key}"), "index must be a positive integer"))?;
    if v == 0 || v as usize > n {
        return Err(Error::parse(
            format!("{here}/{key}"),
            format!("index {v} out of range 1..={n}"),
        ));
    }
    Ok(v as usize - 1)
}

fn domain_from_json(v: Option<&Value>, n: usize) -> Result<Domain> {
    let Some(v) = v else {
        return Ok(Domain::symmetric_unit(n));
    };
    let read = |key: &str| -> Result<Vec<f64>> {
        let arr = v.get(key).and_then(Value::as_array).ok_or_else(|| {
            Error::parse(format!("/domain/{key}"), "expected an array of numbers")
        })?;
        if arr.len() != n {
            return Err(Error::parse(
                format!("/domain/{key}"),
                format!("expected {n} bounds, got {}", arr.len()),
            ));
        }
        arr.iter()
            .enumerate()
            .map(|(i, x)| {
                x.as_f64().ok_or_else(|| {
                    Error::parse(format!("/domain/{key}/{i}"), "bound must be a number")
                })
            })
            .collect()
    };
    Domain::new(read("lo")?, read("hi")?).map_err(|e| Error::parse("/domain", e.to_string()))
}

fn dimension_from(v: Option<&Value>, pointer: &str) -> Result<usize> {
    let n = v
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::parse(pointer, "dimension must be an integer"))?;
    if n < 2 {
        return Err(Error::parse(
            pointer,
            format!("dimension must be at least 2, got {n}"),
        ));
    }
    if n > 16 {
        return Err(Error::parse(
            pointer,
            format!("dimension {n} is unreasonably large"),
        ));
    }
    Ok(n as usize)
}

pub fn parse_connection(document: &str) -> Result<ChartConnection> {
    let value: Value = serde_json::from_str(document)
        .map_err(|e| Error::parse("", format!("malformed JSON: {e}")))?;
    parse_connection_value(&value)
}

pub fn parse_connection_value(doc: &Value) -> Result<ChartConnection> {
    let obj = doc
        .as_object()
        .ok_or_else(|| Error::parse("", "document must be a JSON object"))?;
    match obj.get("schema").and_then(Value::as_u64) {
        Some(SCHEMA_VERSION) => {}
        Some(other) => {
            return Err(Error::parse(
                "/schema",
                format!("unsupported schema version {other}"),
            ))
        }
        None => return Err(Error::parse("/schema", "missing schema version")),
    }
    if let Some(name) = obj.get("builtin") {
        let name = name
            .as_str()
            .ok_or_else(|| Error::parse("/builtin", "builtin name must be a string"))?;
        return builtin_from_json(name, obj.get("params"));
    }
    let n = dimension_from(obj.get("dimension"), "/dimension")?;
    let domain = domain_from_json(obj.get("domain"), n)?;
    let entries = match obj.get("christoffel") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(a)) => a.clone(),
        Some(_) => return Err(Error::parse("/christoffel", "expected an array of entries")),
    };
    let mut gamma = PolyTensor::zeros(n, 3, n);
    let mut seen = std::collections::BTreeSet::new();
    for (e, entry) in entries.iter().enumerate() {
        let here = format!("/christoffel/{e}");
        let eo = entry
            .as_object()
            .ok_or_else(|| Error::parse(&here, "entry must be an object"))?;
        let i = index_field(eo, "i", n, &here)?;
        let j = index_field(eo, "j", n, &here)?;
        let k = index_field(eo, "k", n, &here)?;
        if j > k {
            return Err(Error::parse(&here, "entries must satisfy j <= k"));
        }
        if !seen.insert((i, j, k)) {
            return Err(Error::parse(
                &here,
                format!("duplicate entry G^{}_{{{}{}}}", i + 1, j + 1, k + 1),
            ));
        }
        let p = poly_from_json(
            eo.get("poly").unwrap_or(&Value::Null),
            n,
            &format!("{here}/poly"),
        )?;
        gamma.set(&[i, k, j], p.clone());
        gamma.set(&[i, j, k], p);
    }
    ChartConnection::new(domain, gamma).map_err(|e| Error::parse("", e.to_string()))
}

/// Inverse of [`parse_connection_value`] for torsion-free connections.
pub fn connection_to_json(c: &ChartConnection) -> Value {
    let n = c.dim();
    let mut entries = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in j..n {
                let p = c.gamma(i, j, k);
                if !p.is_zero() {
                    entries
                        .push(json!({"i": i + 1, "j": j + 1, "k": k + 1, "poly": poly_to_json(p)}));
                }
            }
        }
    }
    json!({
        "schema": SCHEMA_VERSION,
        "dimension": n,
        "domain": {"lo": c.domain().lo(), "hi": c.domain().hi()},
        "christoffel": entries,
    })
}

pub fn serialize_connection(c: &ChartConnection) -> String {
    to_report_string(&connection_to_json(c))
}

/// Pretty JSON with sorted keys and shortest round-trip floats.
pub fn to_report_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("Value serialization cannot fail");
    s.push('\n');
    s
}

/// `n=2` nonflat demo: `G^1_{22} = x1^2` on `[-1, 1]^2`.
pub fn nonflat_demo() -> ChartConnection {
    let x1sq = PolyField::monomial(2, 1.0, vec![2, 0]).expect("length 2");
    ChartConnection::from_fn(Domain::symmetric_unit(2), |i, j, k| {
        if (i, j, k) == (0, 1, 1) {
            x1sq.clone()
        } else {
            PolyField::zero(2)
        }
    })
    .expect("n = 2")
}

pub fn flat(n: usize) -> Result<ChartConnection> {
    if n < 2 {
        return Err(Error::invalid(format!(
            "dimension must be at least 2, got {n}"
        )));
    }
    ChartConnection::zero(Domain::symmetric_unit(n))
}

/// `projective_shift(0, alpha)` on `[-1, 1]^n`.
pub fn alpha_shift(alpha: &OneFormField) -> Result<ChartConnection> {
    flat(alpha.dim())?.projective_shift(alpha)
}

fn default_alpha(n: usize) -> OneFormField {
    let mut comps = vec![PolyField::zero(n); n];
    comps[0] = PolyField::variable(n, 0).expect("n >= 1");
    OneFormField::new(comps).expect("uniform n")
}

fn builtin_from_json(name: &str, params: Option<&Value>) -> Result<ChartConnection> {
    let params = match params {
        None | Some(Value::Null) => Map::new(),
        Some(Value::Object(m)) => m.clone(),
        Some(_) => return Err(Error::parse("/params", "params must be an object")),
    };
    let n = match params.get("dimension") {
        Some(v) => dimension_from(Some(v), "/params/dimension")?,
        None => 2,
    };
    match name {
        "flat" => flat(n),
        "nonflat_demo" => {
            if n != 2 {
                return Err(Error::parse(
                    "/params/dimension",
                    "nonflat_demo is two-dimensional",
                ));
            }
            Ok(nonflat_demo())
        }
        "alpha_shift" => {
            let alpha = match params.get("alpha") {
                None => default_alpha(n),
                Some(Value::Array(a)) => {
                    if a.len() != n {
                        return Err(Error::parse(
                            "/params/alpha",
                            format!("expected {n} components, got {}", a.len()),
                        ));
                    }
                    let comps = a
                        .iter()
                        .enumerate()
                        .map(|(k, p)| poly_from_json(p, n, &format!("/params/alpha/{k}")))
                        .collect::<Result<Vec<_>>>()?;
                    OneFormField::new(comps)?
                }
                Some(_) => {
                    return Err(Error::parse(
                        "/params/alpha",
                        "expected an array of polynomials",
                    ))
                }
            };
            alpha_shift(&alpha)
        }
        other => Err(Error::parse(
            "/builtin",
            format!(
                "unknown builtin '{other}' (known: {})",
                BUILTIN_NAMES.join(", ")
            ),
        )),
    }
}

/// Parses the command-line builtin form `NAME[:key=value,...]`.
///
/// Keys: `n` (dimension, for `flat` and `alpha_shift`) and `alpha` (a one-form
/// such as `x1dx1 - 2*x1^2*x2 dx2`, for `alpha_shift`).
pub fn parse_builtin(arg: &str) -> Result<ChartConnection> {
    let (name, rest) = match arg.split_once(':') {
        Some((n, r)) => (n.trim(), r),
        None => (arg.trim(), ""),
    };
    let mut n: Option<usize> = None;
    let mut alpha_src: Option<&str> = None;
    for kv in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| Error::parse("/params", format!("expected key=value, got '{kv}'")))?;
        match key.trim() {
            "n" => {
                let v: usize = value.trim().parse().map_err(|_| {
                    Error::parse("/params/dimension", format!("bad dimension '{value}'"))
                })?;
                n = Some(v);
            }
            "alpha" => alpha_src = Some(value.trim()),
            other => {
                return Err(Error::parse(
                    "/params",
                    format!("unknown builtin parameter '{other}'"),
                ))
            }
        }
    }
    let mut params = Map::new();
    if let Some(v) = n {
        params.insert("dimension".into(), json!(v));
    }
    if let Some(src) = alpha_src {
        if name != "alpha_shift" {
            return Err(Error::parse(
                "/params/alpha",
                "alpha only applies to alpha_shift",
            ));
        }
        let dim = n.unwrap_or(2);
        let alpha = parse_one_form(src, dim)?;
        params.insert(
            "alpha".into(),
            Value::Array(alpha.components().iter().map(poly_to_json).collect()),
        );
    }
    builtin_from_json(name, Some(&Value::Object(params)))
}

/// Parses `sum of coeff * monomial * dx<k>` terms into a one-form in `n`
/// variables. Factors may be juxtaposed (`x1dx1`) or joined by `*`.
pub fn parse_one_form(src: &str, n: usize) -> Result<OneFormField> {
    let err = |msg: String| Error::parse("/params/alpha", msg);
    let chars: Vec<char> = src.chars().filter(|c| !c.is_whitespace()).collect();
    let mut comps = vec![Vec::<(Vec<u32>, f64)>::new(); n];
    let mut pos = 0;
    let read_int = |pos: &mut usize| -> Option<u32> {
        let start = *pos;
        while *pos < chars.len() && chars[*pos].is_ascii_digit() {
            *pos += 1;
        }
        chars[start..*pos].iter().collect::<String>().parse().ok()
    };
    if chars.is_empty() {
        return Err(err("empty one-form".into()));
    }
    while pos < chars.len() {
        let mut coeff = 1.0;
        match chars[pos] {
            '+' => pos += 1,
            '-' => {
                coeff = -1.0;
                pos += 1;
            }
            _ if pos == 0 => {}
            c => return Err(err(format!("expected '+' or '-', found '{c}'"))),
        }
        let mut exp = vec![0u32; n];
        let mut form: Option<usize> = None;
        let mut factors = 0;
        while pos < chars.len() && chars[pos] != '+' && chars[pos] != '-' {
            let c = chars[pos];
            if c == '*' {
                pos += 1;
                continue;
            }
            if c == 'd' {
                if chars.get(pos + 1) != Some(&'x') {
                    return Err(err("expected 'dx<k>'".into()));
                }
                pos += 2;
                let k = read_int(&mut pos).ok_or_else(|| err("missing index after dx".into()))?;
                if k == 0 || k as usize > n {
                    return Err(err(format!("dx{k} out of range for n = {n}")));
                }
                if form.replace(k as usize - 1).is_some() {
                    return Err(err("a term may contain only one dx".into()));
                }
            } else if c == 'x' {
                pos += 1;
                let v = read_int(&mut pos).ok_or_else(|| err("missing index after x".into()))?;
                if v == 0 || v as usize > n {
                    return Err(err(format!("x{v} out of range for n = {n}")));
                }
                let mut power = 1;
                if chars.get(pos) == Some(&'^') {
                    pos += 1;
                    power = read_int(&mut pos).ok_or_else(|| err("missing exponent".into()))?;
                }
                exp[v as usize - 1] += power;
            } else if c.is_ascii_digit() || c == '.' {
                let start = pos;
                while pos < chars.len()
                    && (chars[pos].is_ascii_digit()
                        || chars[pos] == '.'
                        || chars[pos] == 'e'
                        || ((chars[pos] == '-' || chars[pos] == '+')
                            && pos > start
                            && chars[pos - 1] == 'e'))
                {
                    pos += 1;
                }
                let text: String = chars[start..pos].iter().collect();
                let v: f64 = text
                    .parse()
                    .map_err(|_| err(format!("bad number '{text}'")))?;
                coeff *= v;
            } else {
                return Err(err(format!("unexpected character '{c}'")));
            }
            factors += 1;
        }
        if factors == 0 {
            return Err(err("empty term".into()));
        }
        let k = form.ok_or_else(|| err("every term needs a dx<k> factor".into()))?;
        if exp.iter().sum::<u32>() > MAX_INPUT_DEGREE {
            return Err(err(format!(
                "degree exceeds the limit of {MAX_INPUT_DEGREE}"
            )));
        }
        comps[k].push((exp, coeff));
    }
    let polys = comps
        .into_iter()
        .map(|terms| PolyField::from_terms(n, terms))
        .collect::<Result<Vec<_>>>()?;
    OneFormField::new(polys)
}

/// Sparse JSON listing of the nonzero components of a tensor.
pub fn tensor_to_json(t: &PolyTensor, index_names: &[&str], one_based_from: usize) -> Value {
    let entries = t
        .iter()
        .filter(|(_, p)| !p.is_zero())
        .map(|(idx, p)| {
            let mut m = Map::new();
            for (name, i) in index_names.iter().zip(&idx) {
                m.insert((*name).into(), json!(i + one_based_from));
            }
            m.insert("poly".into(), poly_to_json(p));
            Value::Object(m)
        })
        .collect();
    Value::Array(entries)
}

/// Reads a JSON array of points.
pub fn parse_points(document: &str, n: usize) -> Result<Vec<Vec<f64>>> {
    let value: Value = serde_json::from_str(document)
        .map_err(|e| Error::parse("", format!("malformed JSON: {e}")))?;
    let arr = value
        .as_array()
        .ok_or_else(|| Error::parse("", "expected an array of points"))?;
    arr.iter()
        .enumerate()
        .map(|(p, pt)| {
            let coords = pt.as_array().filter(|c| c.len() == n).ok_or_else(|| {
                Error::parse(format!("/{p}"), format!("point must have {n} coordinates"))
            })?;
            coords
                .iter()
                .enumerate()
                .map(|(i, x)| {
                    x.as_f64().ok_or_else(|| {
                        Error::parse(format!("/{p}/{i}"), "coordinate must be a number")
                    })
                })
                .collect()
        })
        .collect()
}
