//! Named example instances and seeded random generators.
//!
//! Random coefficients come from [`SplitMix64`]: index tuples are visited in
//! lexicographic order (entries row-major), each tuple draws `unit()`, and
//! when that is below the density its coefficient is
//! `from_index(1 + below(q − 1))`.

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};
use crate::mform::MultilinearForm;
use crate::mlmatrix::{full_blocks, FormMatrix};
use crate::rng::SplitMix64;
use crate::tensor3::Tensor3;

/// Names accepted by [`make_example`].
pub const EXAMPLES: &[&str] = &[
    "intro-diag",
    "intro-skew",
    "ex45",
    "tight-diag",
    "tight-kron",
    "random",
    "tensor-diag",
    "tensor-monomial",
    "tensor-random",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instance {
    Matrix(FormMatrix),
    Tensor(Tensor3),
}

impl Instance {
    pub fn into_matrix(self) -> Result<FormMatrix> {
        match self {
            Instance::Matrix(m) => Ok(m),
            Instance::Tensor(_) => Err(Error::InvalidParameter("example is a tensor".into())),
        }
    }

    pub fn into_tensor(self) -> Result<Tensor3> {
        match self {
            Instance::Tensor(t) => Ok(t),
            Instance::Matrix(_) => Err(Error::InvalidParameter("example is a matrix".into())),
        }
    }
}

/// Parameters of [`make_example`]; unset values take per-example defaults.
#[derive(Clone, Debug, PartialEq)]
pub struct ExampleParams {
    pub q: u64,
    pub k: Option<usize>,
    pub d: Option<usize>,
    pub n: Option<usize>,
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    pub density: f64,
    pub seed: u64,
}

impl Default for ExampleParams {
    fn default() -> Self {
        ExampleParams { q: 2, k: None, d: None, n: None, rows: None, cols: None, density: 0.5, seed: 0 }
    }
}

impl ExampleParams {
    pub fn with_q(q: u64) -> Self {
        ExampleParams { q, ..Self::default() }
    }
}

pub fn make_example(name: &str, params: &ExampleParams) -> Result<Instance> {
    let field = FieldCtx::from_order(params.q)?;
    match name {
        "intro-diag" => intro_diag(field).map(Instance::Matrix),
        "intro-skew" => intro_skew(field).map(Instance::Matrix),
        "ex45" => ex45(field).map(Instance::Matrix),
        "tight-diag" => tight_diag(field, params.k.unwrap_or(2)).map(Instance::Matrix),
        "tight-kron" => tight_kron(field, params.k.unwrap_or(2), params.d.unwrap_or(2)).map(Instance::Matrix),
        "random" => gen_random(
            params.d.unwrap_or(1),
            params.n.unwrap_or(2),
            params.rows.unwrap_or(3),
            params.cols.unwrap_or(3),
            params.q,
            params.density,
            params.seed,
        )
        .map(Instance::Matrix),
        "tensor-diag" => {
            let n = params.n.unwrap_or(2);
            check_n(n)?;
            let terms = (0..n).map(|i| (vec![i, i, i], field.one()));
            Ok(Instance::Tensor(Tensor3::new(MultilinearForm::from_terms(field, &[1, 2, 3], n, terms)?)?))
        }
        "tensor-monomial" => {
            let n = params.n.unwrap_or(1);
            check_n(n)?;
            let f = MultilinearForm::from_terms(field, &[1, 2, 3], n, [(vec![0, 0, 0], field.one())])?;
            Ok(Instance::Tensor(Tensor3::new(f)?))
        }
        "tensor-random" => {
            let n = params.n.unwrap_or(2);
            check_n(n)?;
            check_density(params.density)?;
            let mut rng = SplitMix64::new(params.seed);
            let f = random_form(field, &[1, 2, 3], n, params.density, &mut rng)?;
            Ok(Instance::Tensor(Tensor3::new(f)?))
        }
        _ => Err(Error::UnknownExample(name.to_string())),
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > 256 {
        return Err(Error::InvalidParameter(format!("n = {n} must lie in 1..=256")));
    }
    Ok(())
}

fn check_density(density: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::InvalidParameter(format!("density {density} outside [0, 1]")));
    }
    Ok(())
}

fn lin(field: FieldCtx, block: u8, coeffs: &[i64]) -> MultilinearForm {
    let c: Vec<FieldElem> = coeffs.iter().map(|&x| field.from_int(x)).collect();
    MultilinearForm::linear(field, block, &c)
}

/// `diag(α, β, α + β)` with `α = x_{1,1}`, `β = x_{1,2}`.
pub fn intro_diag(field: FieldCtx) -> Result<FormMatrix> {
    let z = MultilinearForm::zero(field, &[1], 2);
    let diag = [lin(field, 1, &[1, 0]), lin(field, 1, &[0, 1]), lin(field, 1, &[1, 1])];
    let entries = (0..3)
        .map(|i| (0..3).map(|j| if i == j { diag[i].clone() } else { z.clone() }).collect())
        .collect();
    FormMatrix::from_entries(field, 1, 2, entries)
}

/// The generic `3×3` skew-symmetric matrix in `α, β, γ`.
pub fn intro_skew(field: FieldCtx) -> Result<FormMatrix> {
    let z = MultilinearForm::zero(field, &[1], 3);
    let a = lin(field, 1, &[1, 0, 0]);
    let b = lin(field, 1, &[0, 1, 0]);
    let c = lin(field, 1, &[0, 0, 1]);
    let entries = vec![
        vec![z.clone(), a.clone(), b.clone()],
        vec![a.neg(), z.clone(), c.clone()],
        vec![b.neg(), c.neg(), z],
    ];
    FormMatrix::from_entries(field, 1, 3, entries)
}

/// `α_iβ_j` with `α = x_1`, `β = x_2`, `n = 2`, indices 0-based.
fn ab(field: FieldCtx, i: usize, j: usize) -> MultilinearForm {
    MultilinearForm::from_terms(field, &[1, 2], 2, [(vec![i, j], field.one())]).expect("valid monomial")
}

/// The `5×5` bilinear matrix whose first row is `(α₁β₁, α₁β₁, α₁β₂, α₂β₁,
/// α₂β₂)`, whose first column is `(α₁β₁, α₁β₁, α₁β₂, α₂β₁, α₂β₂)ᵀ`, and
/// which vanishes elsewhere.
pub fn ex45(field: FieldCtx) -> Result<FormMatrix> {
    let line = [ab(field, 0, 0), ab(field, 0, 0), ab(field, 0, 1), ab(field, 1, 0), ab(field, 1, 1)];
    let mut m = FormMatrix::zeros(field, 2, 2, 5, 5);
    for i in 0..5 {
        m.set(0, i, line[i].clone())?;
        m.set(i, 0, line[i].clone())?;
    }
    Ok(m)
}

/// The differential Schur complement of [`ex45`] with respect to its
/// top-left entry at `p = (e₁, e₁)`, written out by hand.
pub fn ex45_remainder(field: FieldCtx) -> Result<FormMatrix> {
    let z = || MultilinearForm::zero(field, &[1, 2], 2);
    let m = |i, j| ab(field, i, j).neg();
    let rows = [
        [m(0, 0), m(0, 1), m(1, 0), m(1, 1)],
        [m(0, 1), z(), m(1, 1), z()],
        [m(1, 0), m(1, 1), z(), z()],
        [m(1, 1), z(), z(), z()],
    ];
    let mut out = FormMatrix::zeros(field, 2, 2, 5, 5);
    for (i, row) in rows.into_iter().enumerate() {
        for (j, e) in row.into_iter().enumerate() {
            out.set(i + 1, j + 1, e)?;
        }
    }
    Ok(out)
}

/// Coefficient vectors of the nonzero linear forms in `k` variables whose
/// first nonzero coordinate is `1`, ordered by the base-`q` number with the
/// first coordinate least significant.
fn normalized_vectors(field: FieldCtx, k: usize) -> Result<Vec<Vec<FieldElem>>> {
    let q = field.order();
    let total = u32::try_from(k)
        .ok()
        .and_then(|e| q.checked_pow(e))
        .filter(|&t| t <= 1 << 16)
        .ok_or_else(|| Error::InvalidParameter(format!("q^k too large for k = {k}")))?;
    let mut out = Vec::new();
    for mut idx in 1..total {
        let mut v = Vec::with_capacity(k);
        for _ in 0..k {
            v.push(field.from_index(idx % q));
            idx /= q;
        }
        if v.iter().find(|&&x| !field.is_zero(x)) == Some(&field.one()) {
            out.push(v);
        }
    }
    Ok(out)
}

/// The diagonal matrix of all nonzero linear forms in `x_{1,1..k}` up to
/// scaling; size `(q^k − 1)/(q − 1)`.
pub fn tight_diag(field: FieldCtx, k: usize) -> Result<FormMatrix> {
    check_n(k)?;
    let vecs = normalized_vectors(field, k)?;
    let s = vecs.len();
    let mut m = FormMatrix::zeros(field, 1, k, s, s);
    for (i, v) in vecs.iter().enumerate() {
        m.set(i, i, MultilinearForm::linear(field, 1, v))?;
    }
    Ok(m)
}

/// The Kronecker product of `d` copies of [`tight_diag`], copy `b` in
/// block `b`; the first factor indexes most significantly.
pub fn tight_kron(field: FieldCtx, k: usize, d: usize) -> Result<FormMatrix> {
    check_n(k)?;
    if d == 0 || d > 8 {
        return Err(Error::InvalidParameter(format!("d = {d} must lie in 1..=8")));
    }
    let vecs = normalized_vectors(field, k)?;
    let s = vecs.len();
    let size = s
        .checked_pow(d as u32)
        .filter(|&z| z <= 4096)
        .ok_or_else(|| Error::InvalidParameter("Kronecker product too large".into()))?;
    let mut m = FormMatrix::zeros(field, d, k, size, size);
    for pos in 0..size {
        let mut digits = vec![0usize; d];
        let mut rest = pos;
        for slot in digits.iter_mut().rev() {
            *slot = rest % s;
            rest /= s;
        }
        let mut e = MultilinearForm::scalar(field, k, field.one());
        for (b, &i) in digits.iter().enumerate() {
            e = e.mul_disjoint(&MultilinearForm::linear(field, b as u8 + 1, &vecs[i]))?;
        }
        m.set(pos, pos, e)?;
    }
    Ok(m)
}

fn random_form(
    field: FieldCtx,
    blocks: &[u8],
    n: usize,
    density: f64,
    rng: &mut SplitMix64,
) -> Result<MultilinearForm> {
    let q = field.order();
    let count = n.pow(blocks.len() as u32);
    let mut terms = Vec::new();
    for mut t in 0..count {
        let mut idx = vec![0usize; blocks.len()];
        for slot in idx.iter_mut().rev() {
            *slot = t % n;
            t /= n;
        }
        if rng.unit() < density {
            terms.push((idx, field.from_index(1 + rng.below(q - 1))));
        }
    }
    MultilinearForm::from_terms(field, blocks, n, terms)
}

/// A seeded random `rows×cols` matrix of forms in `M_d`.
pub fn gen_random(d: usize, n: usize, rows: usize, cols: usize, q: u64, density: f64, seed: u64) -> Result<FormMatrix> {
    let field = FieldCtx::from_order(q)?;
    check_n(n)?;
    check_density(density)?;
    if d > 8 {
        return Err(Error::InvalidParameter(format!("d = {d} exceeds 8")));
    }
    let cells = rows.checked_mul(cols).and_then(|c| c.checked_mul(n.checked_pow(d as u32)?));
    if cells.is_none_or(|c| c > 1 << 24) {
        return Err(Error::InvalidParameter("instance too large".into()));
    }
    let blocks = full_blocks(d);
    let mut rng = SplitMix64::new(seed);
    let mut m = FormMatrix::zeros(field, d, n, rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m.set(i, j, random_form(field, &blocks, n, density, &mut rng)?)?;
        }
    }
    Ok(m)
}
