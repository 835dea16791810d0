//! Reading and writing the JSON documents handled by the CLI.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use mlrank::decomp::PartitionDecomposition;
use mlrank::field::{FieldCtx, FieldElem};
use mlrank::json::{self, FormJson, MatrixJson};
use mlrank::mform::Poly;
use mlrank::tensor3::{unflatten, Tensor3};
use mlrank::FormMatrix;
use serde_json::Value;

/// Marks failures caused by malformed input, which exit with status 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

pub fn input_error(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(InputError(msg.into()))
}

fn read_value(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| input_error(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn parse<T: serde::de::DeserializeOwned>(v: Value, path: &Path) -> Result<T> {
    serde_json::from_value(v).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

pub enum Input {
    Matrix(FormMatrix),
    Tensor(Tensor3),
}

/// A matrix document (has `"entries"`) or a form document with blocks `[1, 2, 3]`.
pub fn read_input(path: &Path) -> Result<Input> {
    let v = read_value(path)?;
    if v.get("entries").is_some() {
        let j: MatrixJson = parse(v, path)?;
        Ok(Input::Matrix(json::matrix_from_json(&j)?))
    } else if v.get("blocks").is_some() {
        let j: FormJson = parse(v, path)?;
        Ok(Input::Tensor(Tensor3::new(json::form_from_json(&j, None)?)?))
    } else {
        Err(input_error(format!("{}: neither a matrix nor a form document", path.display())))
    }
}

pub fn read_matrix(path: &Path) -> Result<FormMatrix> {
    match read_input(path)? {
        Input::Matrix(m) => Ok(m),
        Input::Tensor(_) => Err(input_error(format!("{}: expected a matrix document", path.display()))),
    }
}

/// Tensors may also be given by their flattening, a matrix of linear forms.
pub fn read_tensor(path: &Path) -> Result<Tensor3> {
    match read_input(path)? {
        Input::Tensor(t) => Ok(t),
        Input::Matrix(m) => Ok(unflatten(&m)?),
    }
}

pub fn read_decomposition(path: &Path) -> Result<PartitionDecomposition> {
    let j = parse(read_value(path)?, path)?;
    Ok(json::decomposition_from_json(&j)?)
}

pub fn read_poly(path: &Path) -> Result<Poly> {
    let j = parse(read_value(path)?, path)?;
    Ok(json::poly_from_json(&j, None)?)
}

/// An element is either a coordinate array or a nonnegative integer read as
/// the element with that index (the residue itself over a prime field).
pub fn parse_elem(f: FieldCtx, v: &Value) -> Result<FieldElem> {
    match v {
        Value::Number(n) => {
            let i = n.as_u64().ok_or_else(|| input_error(format!("{n} is not a nonnegative integer")))?;
            if i >= f.order() {
                bail!(input_error(format!("{i} is not an element of F_{}", f.order())));
            }
            Ok(f.from_index(i))
        }
        Value::Array(_) => {
            let coords: Vec<u32> =
                serde_json::from_value(v.clone()).map_err(|e| input_error(format!("bad coordinates: {e}")))?;
            f.from_coords(&coords).map_err(|_| input_error(format!("{coords:?} is not an element of F_{}", f.order())))
        }
        _ => Err(input_error(format!("{v} is not a field element"))),
    }
}

/// A point file holds one array of elements per block.
pub fn read_point(path: &Path, f: FieldCtx) -> Result<Vec<Vec<FieldElem>>> {
    let v = read_value(path)?;
    let blocks = v.as_array().ok_or_else(|| input_error("a point is an array of vectors"))?;
    blocks
        .iter()
        .map(|b| {
            let xs = b.as_array().ok_or_else(|| input_error("a point is an array of vectors"))?;
            xs.iter().map(|x| parse_elem(f, x)).collect()
        })
        .collect()
}

/// Comma-separated nonnegative integers.
pub fn parse_list(s: &str) -> Result<Vec<u64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|_| input_error(format!("{t:?} is not a nonnegative integer"))))
        .collect()
}

pub fn parse_elems(f: FieldCtx, s: &str) -> Result<Vec<FieldElem>> {
    parse_list(s)?.into_iter().map(|i| parse_elem(f, &Value::from(i))).collect()
}

pub fn elems_json(f: FieldCtx, xs: &[FieldElem]) -> Value {
    xs.iter().map(|&x| Value::from(f.coords(x))).collect()
}

/// Pretty JSON to `out`, or to standard output.
pub fn emit(value: &Value, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => fs::write(p, text + "\n").with_context(|| format!("cannot write {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}
