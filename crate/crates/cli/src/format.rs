//! Deterministic number formatting and matrix serialization.

use std::io;

use nalgebra::DMatrix;
use serde_json::ser::Formatter;
use serde_json::{json, Map, Value};

/// `%.17g`: 17 significant digits with trailing zeros dropped, so every
/// `f64` round-trips and short values print short (`2.75`, `4`).
pub fn g17(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..17).contains(&exp) {
        let m = trim(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    trim(&format!("{x:.*}", (16 - exp) as usize)).to_string()
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Compact JSON whose floats are written with [`g17`].
struct G17;

impl Formatter for G17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(g17(value).as_bytes())
    }
}

pub fn to_json(value: &Value) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, G17);
    serde::Serialize::serialize(value, &mut ser).expect("serializing a JSON value");
    String::from_utf8(out).expect("JSON is UTF-8") + "\n"
}

pub fn num(x: f64) -> Value {
    // Non-finite numbers have no JSON form.
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn vector(v: impl IntoIterator<Item = f64>) -> Value {
    Value::Array(v.into_iter().map(num).collect())
}

pub fn rows(m: &DMatrix<f64>) -> Value {
    Value::Array(m.row_iter().map(|r| vector(r.iter().copied())).collect())
}

pub fn residual_map(residuals: &[(&str, f64)]) -> Value {
    let mut map = Map::new();
    for (name, value) in residuals {
        map.insert((*name).to_string(), num(*value));
    }
    Value::Object(map)
}

/// `{ "n", "target", "rows", "residuals" }`.
pub fn matrix_json(target: &[f64], m: &DMatrix<f64>, residuals: &[(&str, f64)]) -> Value {
    json!({
        "n": m.nrows(),
        "target": vector(target.iter().copied()),
        "rows": rows(m),
        "residuals": residual_map(residuals),
    })
}

/// Header of vertex indices, then the grid.
pub fn matrix_csv(m: &DMatrix<f64>) -> String {
    let header: Vec<String> = (0..m.ncols()).map(|j| j.to_string()).collect();
    let mut out = header.join(",") + "\n";
    for r in m.row_iter() {
        let cells: Vec<String> = r.iter().map(|&x| g17(x)).collect();
        out += &cells.join(",");
        out.push('\n');
    }
    out
}
