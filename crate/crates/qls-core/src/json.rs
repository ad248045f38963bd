//! Canonical JSON for systems: sorted keys, shortest round-trip floats, LF.

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::JsonError;
use crate::passive::PassiveComplexSystem;
use crate::system::QuantumLinearSystem;

/// Row-major nested array.
pub fn matrix_to_value(x: &DMatrix<f64>) -> Value {
    Value::Array(
        (0..x.nrows())
            .map(|i| Value::Array((0..x.ncols()).map(|j| json!(x[(i, j)])).collect()))
            .collect(),
    )
}

fn matrix_from_rows(
    name: &'static str,
    rows: &[Vec<f64>],
    ncols: usize,
) -> Result<DMatrix<f64>, JsonError> {
    for (row, r) in rows.iter().enumerate() {
        if r.len() != ncols {
            return Err(JsonError::Ragged {
                name,
                row,
                got: r.len(),
                want: ncols,
            });
        }
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn ncols_of(rows: &[Vec<f64>]) -> usize {
    rows.first().map_or(0, Vec::len)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    n: usize,
    m: usize,
    l: usize,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    c: Vec<Vec<f64>>,
    #[serde(rename = "D")]
    d: Vec<Vec<f64>>,
}

pub fn system_to_value(sys: &QuantumLinearSystem<f64>) -> Value {
    json!({
        "n": sys.n(),
        "m": sys.m(),
        "l": sys.l(),
        "A": matrix_to_value(sys.a()),
        "B": matrix_to_value(sys.b()),
        "C": matrix_to_value(sys.c()),
        "D": matrix_to_value(sys.d()),
    })
}

pub fn system_from_value(v: Value) -> Result<QuantumLinearSystem<f64>, JsonError> {
    let raw: RawSystem = serde_json::from_value(v)?;
    let a = matrix_from_rows("A", &raw.a, ncols_of(&raw.a))?;
    let b = matrix_from_rows("B", &raw.b, ncols_of(&raw.b))?;
    let c = matrix_from_rows("C", &raw.c, ncols_of(&raw.c))?;
    let d = matrix_from_rows("D", &raw.d, ncols_of(&raw.d))?;
    Ok(QuantumLinearSystem::new(raw.n, raw.m, raw.l, a, b, c, d)?)
}

/// Canonical text form, newline-terminated.
pub fn to_canonical_string(v: &Value) -> String {
    // serde_json's default map is ordered by key and floats print through ryu
    let mut s = serde_json::to_string(v).expect("values built here always serialize");
    s.push('\n');
    s
}

pub fn system_to_json(sys: &QuantumLinearSystem<f64>) -> String {
    to_canonical_string(&system_to_value(sys))
}

/// Parses the `{"n","m","l","A","B","C","D"}` format. Non-finite entries are rejected.
pub fn system_from_json(text: &str) -> Result<QuantumLinearSystem<f64>, JsonError> {
    system_from_value(serde_json::from_str(text)?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComplex {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPassive {
    #[serde(rename = "F")]
    f: RawComplex,
    #[serde(rename = "G")]
    g: RawComplex,
    #[serde(rename = "H")]
    h: RawComplex,
    #[serde(rename = "K")]
    k: RawComplex,
}

fn complex_from_raw(
    name: &'static str,
    raw: &RawComplex,
) -> Result<DMatrix<Complex<f64>>, JsonError> {
    let re = matrix_from_rows(name, &raw.re, ncols_of(&raw.re))?;
    let im = matrix_from_rows(name, &raw.im, ncols_of(&raw.im))?;
    if re.shape() != im.shape() {
        return Err(JsonError::Ragged {
            name,
            row: 0,
            got: im.ncols(),
            want: re.ncols(),
        });
    }
    Ok(DMatrix::from_fn(re.nrows(), re.ncols(), |i, j| {
        Complex::new(re[(i, j)], im[(i, j)])
    }))
}

fn complex_to_value(z: &DMatrix<Complex<f64>>) -> Value {
    json!({
        "re": matrix_to_value(&z.map(|v| v.re)),
        "im": matrix_to_value(&z.map(|v| v.im)),
    })
}

pub fn passive_to_json(ps: &PassiveComplexSystem<f64>) -> String {
    to_canonical_string(&json!({
        "F": complex_to_value(&ps.f),
        "G": complex_to_value(&ps.g),
        "H": complex_to_value(&ps.h),
        "K": complex_to_value(&ps.k),
    }))
}

pub fn passive_from_json(text: &str) -> Result<PassiveComplexSystem<f64>, JsonError> {
    let raw: RawPassive = serde_json::from_str(text)?;
    Ok(PassiveComplexSystem::new(
        complex_from_raw("F", &raw.f)?,
        complex_from_raw("G", &raw.g)?,
        complex_from_raw("H", &raw.h)?,
        complex_from_raw("K", &raw.k)?,
    )?)
}
