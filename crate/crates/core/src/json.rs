//! JSON interchange formats.
//!
//! * field: `{"p": 2, "k": 3, "modulus": [1, 1, 0, 1]}`, modulus constant
//!   term first and omitted for prime fields; elements are length-`k`
//!   coordinate arrays;
//! * form: `{"blocks": [1, 2], "n": 2, "terms": [{"idx": [1, 2], "coef": [1]}]}`
//!   with 1-based variable indices and an optional `"field"`;
//! * matrix: `{"field", "d", "n", "rows", "cols", "entries": [{"row", "col", "terms"}]}`
//!   with 0-based positions and absent entries zero;
//! * decomposition: `{"field", "d", "n", "rows", "cols", "terms": [{"S", "u", "v"}], "log"}`;
//! * polynomial: `{"nvars": 2, "terms": [{"exp": [2, 0], "coef": [1]}]}` with an
//!   optional `"field"`.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::decomp::{IterationRecord, PartitionDecomposition};
use crate::error::{Error, Result};
use crate::field::{Extension, FieldCtx, FieldElem};
use crate::mform::{MultilinearForm, Poly};
use crate::mlmatrix::FormMatrix;
use crate::schur::RankOneTerm;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldJson {
    pub p: u32,
    pub k: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub idx: Vec<usize>,
    pub coef: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldJson>,
    pub blocks: Vec<u8>,
    pub n: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryJson {
    pub row: usize,
    pub col: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub field: FieldJson,
    pub d: usize,
    pub n: usize,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<EntryJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankOneJson {
    #[serde(rename = "S")]
    pub subset: Vec<u8>,
    pub u: Vec<FormJson>,
    pub v: Vec<FormJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationJson {
    /// Coordinates over the round's field, `k·extension_degree` per element.
    pub point: Vec<Vec<Vec<u32>>>,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub r: usize,
    pub cr_before: usize,
    pub cr_after: usize,
    pub terms: usize,
    pub extension_degree: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionJson {
    pub field: FieldJson,
    pub d: usize,
    pub n: usize,
    pub rows: usize,
    pub cols: usize,
    pub terms: Vec<RankOneJson>,
    #[serde(default)]
    pub log: Vec<IterationJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialJson {
    pub exp: Vec<u16>,
    pub coef: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldJson>,
    pub nvars: usize,
    pub terms: Vec<MonomialJson>,
}

pub fn field_to_json(f: FieldCtx) -> FieldJson {
    FieldJson { p: f.characteristic(), k: f.degree(), modulus: if f.degree() > 1 { f.modulus() } else { None } }
}

pub fn field_from_json(j: &FieldJson) -> Result<FieldCtx> {
    match &j.modulus {
        Some(m) => FieldCtx::with_modulus(j.p, j.k, m),
        None => FieldCtx::new(j.p, j.k),
    }
}

fn elem(f: FieldCtx, coef: &[u32]) -> Result<FieldElem> {
    f.from_coords(coef).map_err(|_| Error::Parse(format!("{coef:?} is not an element of F_{}", f.order())))
}

fn terms_to_json(f: &MultilinearForm) -> Vec<TermJson> {
    f.terms()
        .map(|(idx, c)| TermJson { idx: idx.iter().map(|&i| i as usize + 1).collect(), coef: f.field().coords(c) })
        .collect()
}

fn form_from_terms(field: FieldCtx, blocks: &[u8], n: usize, terms: &[TermJson]) -> Result<MultilinearForm> {
    let mut parsed = Vec::with_capacity(terms.len());
    for t in terms {
        if t.idx.iter().any(|&i| i == 0 || i > n) {
            return Err(Error::Parse(format!("variable index {:?} outside 1..={n}", t.idx)));
        }
        parsed.push((t.idx.iter().map(|&i| i - 1).collect(), elem(field, &t.coef)?));
    }
    MultilinearForm::from_terms(field, blocks, n, parsed)
}

pub fn form_to_json(f: &MultilinearForm, with_field: bool) -> FormJson {
    FormJson {
        field: with_field.then(|| field_to_json(f.field())),
        blocks: f.blocks().to_vec(),
        n: f.n(),
        terms: terms_to_json(f),
    }
}

/// Parses a form; its own `"field"` takes precedence over `default`.
pub fn form_from_json(j: &FormJson, default: Option<FieldCtx>) -> Result<MultilinearForm> {
    let field = match (&j.field, default) {
        (Some(fj), _) => field_from_json(fj)?,
        (None, Some(f)) => f,
        (None, None) => return Err(Error::Parse("form has no field".into())),
    };
    form_from_terms(field, &j.blocks, j.n, &j.terms)
}

pub fn matrix_to_json(m: &FormMatrix) -> MatrixJson {
    MatrixJson {
        field: field_to_json(m.field()),
        d: m.d(),
        n: m.n(),
        rows: m.rows(),
        cols: m.cols(),
        entries: m
            .entries()
            .filter(|(_, _, e)| !e.is_zero())
            .map(|(row, col, e)| EntryJson { row, col, terms: terms_to_json(e) })
            .collect(),
    }
}

pub fn matrix_from_json(j: &MatrixJson) -> Result<FormMatrix> {
    let field = field_from_json(&j.field)?;
    if j.d > 8 || j.rows.checked_mul(j.cols).is_none_or(|c| c > 1 << 20) {
        return Err(Error::Parse("matrix dimensions out of range".into()));
    }
    let blocks: Vec<u8> = (1..=j.d as u8).collect();
    let mut m = FormMatrix::zeros(field, j.d, j.n, j.rows, j.cols);
    for e in &j.entries {
        if e.row >= j.rows || e.col >= j.cols {
            return Err(Error::Parse(format!("entry ({}, {}) outside {}×{}", e.row, e.col, j.rows, j.cols)));
        }
        let f = form_from_terms(field, &blocks, j.n, &e.terms)?;
        let sum = m.get(e.row, e.col).add(&f);
        m.set(e.row, e.col, sum)?;
    }
    Ok(m)
}

fn term_to_json(t: &RankOneTerm) -> RankOneJson {
    RankOneJson {
        subset: t.subset.clone(),
        u: t.u.iter().map(|f| form_to_json(f, false)).collect(),
        v: t.v.iter().map(|f| form_to_json(f, false)).collect(),
    }
}

pub fn terms_to_json_list(terms: &[RankOneTerm]) -> Vec<RankOneJson> {
    terms.iter().map(term_to_json).collect()
}

fn term_from_json(j: &RankOneJson, field: FieldCtx) -> Result<RankOneTerm> {
    let parse = |v: &[FormJson]| v.iter().map(|f| form_from_json(f, Some(field))).collect::<Result<Vec<_>>>();
    Ok(RankOneTerm { subset: j.subset.clone(), u: parse(&j.u)?, v: parse(&j.v)? })
}

fn round_field(base: FieldCtx, e: u32) -> Result<FieldCtx> {
    if e == 1 {
        Ok(base)
    } else {
        Ok(Extension::new(base, e)?.ext())
    }
}

pub fn decomposition_to_json(dec: &PartitionDecomposition) -> Result<DecompositionJson> {
    let mut log = Vec::with_capacity(dec.log.len());
    for rec in &dec.log {
        let f = round_field(dec.field, rec.extension_degree)?;
        log.push(IterationJson {
            point: rec.point.iter().map(|v| v.iter().map(|&x| f.coords(x)).collect()).collect(),
            rows: rec.rows.clone(),
            cols: rec.cols.clone(),
            r: rec.r,
            cr_before: rec.cr_before,
            cr_after: rec.cr_after,
            terms: rec.terms,
            extension_degree: rec.extension_degree,
            seed: rec.seed,
        });
    }
    Ok(DecompositionJson {
        field: field_to_json(dec.field),
        d: dec.d,
        n: dec.n,
        rows: dec.rows,
        cols: dec.cols,
        terms: terms_to_json_list(&dec.terms),
        log,
    })
}

pub fn decomposition_from_json(j: &DecompositionJson) -> Result<PartitionDecomposition> {
    let field = field_from_json(&j.field)?;
    let mut terms = Vec::with_capacity(j.terms.len());
    for t in &j.terms {
        let t = term_from_json(t, field)?;
        if t.u.len() != j.rows || t.v.len() != j.cols {
            return Err(Error::Parse("term shape does not match the decomposition".into()));
        }
        terms.push(t);
    }
    let mut log = Vec::with_capacity(j.log.len());
    for rec in &j.log {
        let f = round_field(field, rec.extension_degree)?;
        let point = rec
            .point
            .iter()
            .map(|v| v.iter().map(|c| elem(f, c)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        log.push(IterationRecord {
            point,
            rows: rec.rows.clone(),
            cols: rec.cols.clone(),
            r: rec.r,
            cr_before: rec.cr_before,
            cr_after: rec.cr_after,
            terms: rec.terms,
            extension_degree: rec.extension_degree,
            seed: rec.seed,
        });
    }
    Ok(PartitionDecomposition { field, d: j.d, n: j.n, rows: j.rows, cols: j.cols, terms, log })
}

pub fn poly_to_json(p: &Poly, with_field: bool) -> PolyJson {
    PolyJson {
        field: with_field.then(|| field_to_json(p.field())),
        nvars: p.nvars(),
        terms: p.terms().map(|(e, c)| MonomialJson { exp: e.to_vec(), coef: p.field().coords(c) }).collect(),
    }
}

pub fn poly_from_json(j: &PolyJson, default: Option<FieldCtx>) -> Result<Poly> {
    let field = match (&j.field, default) {
        (Some(fj), _) => field_from_json(fj)?,
        (None, Some(f)) => f,
        (None, None) => return Err(Error::Parse("polynomial has no field".into())),
    };
    let mut terms = Vec::with_capacity(j.terms.len());
    for t in &j.terms {
        terms.push((t.exp.clone(), elem(field, &t.coef)?));
    }
    Poly::from_terms(field, j.nvars, terms)
}

pub fn to_string<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))
}

pub fn from_str<T: DeserializeOwned>(s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
}
