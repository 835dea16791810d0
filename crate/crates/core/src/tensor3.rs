//! 3-tensors: flattening, analytic rank, the kernel subspace search and the
//! slice-rank pipeline.
//!
//! A tensor is a form `T(x, y, z) = ∑ c_{ijk} x_i y_j z_k` on blocks
//! `{1,2,3}`. Its flattening `T̂` is the `n×n` matrix of linear forms in `x`
//! with `T = ∑_{j,k} T̂_{jk}(x) y_j z_k`, and `B(x, y)` is the vector
//! `(∑_{ij} c_{ijk} x_i y_j)_k`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::decomp::{pr_decompose_d1, DecomposeOptions};
use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};
use crate::mform::MultilinearForm;
use crate::mlmatrix::{FormMatrix, ScalarMatrix};
use crate::points::{checked_point_count, index_of_point, vector_from_index};

pub const DEFAULT_TENSOR_BUDGET: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tensor3 {
    form: MultilinearForm,
}

impl Tensor3 {
    pub fn new(form: MultilinearForm) -> Result<Self> {
        if form.blocks() != [1, 2, 3] {
            return Err(Error::BlockMismatch(format!("a 3-tensor lives on blocks [1, 2, 3], got {:?}", form.blocks())));
        }
        Ok(Tensor3 { form })
    }

    pub fn zero(field: FieldCtx, n: usize) -> Self {
        Tensor3 { form: MultilinearForm::zero(field, &[1, 2, 3], n) }
    }

    pub fn form(&self) -> &MultilinearForm {
        &self.form
    }

    pub fn into_form(self) -> MultilinearForm {
        self.form
    }

    pub fn field(&self) -> FieldCtx {
        self.form.field()
    }

    pub fn n(&self) -> usize {
        self.form.n()
    }

    pub fn is_zero(&self) -> bool {
        self.form.is_zero()
    }

    /// `B(x, y)` read off the coefficients.
    fn contract(&self, x: &[FieldElem], y: &[FieldElem]) -> Vec<FieldElem> {
        let f = self.field();
        let mut out = vec![f.zero(); self.n()];
        for (idx, c) in self.form.terms() {
            let t = f.mul(c, f.mul(x[idx[0] as usize], y[idx[1] as usize]));
            out[idx[2] as usize] = f.add(out[idx[2] as usize], t);
        }
        out
    }

    /// The matrix of `y ↦ B(−, y)`: entry `(k, i)` is `∑_j c_{ijk} y_j`.
    fn right_map(&self, y: &[FieldElem]) -> ScalarMatrix {
        let f = self.field();
        let n = self.n();
        let mut m = ScalarMatrix::zeros(f, n, n);
        for (idx, c) in self.form.terms() {
            let (i, j, k) = (idx[0] as usize, idx[1] as usize, idx[2] as usize);
            let t = f.add(m.get(k, i), f.mul(c, y[j]));
            m.set(k, i, t);
        }
        m
    }
}

/// The `n×n` matrix `T̂` of linear forms in block 1.
pub fn flatten(t: &Tensor3) -> FormMatrix {
    let (f, n) = (t.field(), t.n());
    let mut cells: BTreeMap<(usize, usize), Vec<(Vec<usize>, FieldElem)>> = BTreeMap::new();
    for (idx, c) in t.form.terms() {
        cells.entry((idx[1] as usize, idx[2] as usize)).or_default().push((vec![idx[0] as usize], c));
    }
    let mut m = FormMatrix::zeros(f, 1, n, n, n);
    for ((j, k), terms) in cells {
        let e = MultilinearForm::from_terms(f, &[1], n, terms).expect("valid flattened entry");
        m.set(j, k, e).expect("entry on block 1");
    }
    m
}

/// Inverse of [`flatten`]; `m` must be an `n×n` matrix of linear forms in
/// `n` variables.
pub fn unflatten(m: &FormMatrix) -> Result<Tensor3> {
    let n = m.n();
    if m.d() != 1 {
        return Err(Error::InvalidParameter(format!("flattened tensors have d = 1, got {}", m.d())));
    }
    if m.rows() != n || m.cols() != n {
        return Err(Error::DimensionMismatch(format!("expected {n}×{n}, got {}×{}", m.rows(), m.cols())));
    }
    let mut terms = Vec::new();
    for (j, k, e) in m.entries() {
        for (idx, c) in e.terms() {
            terms.push((vec![idx[0] as usize, j, k], c));
        }
    }
    Tensor3::new(MultilinearForm::from_terms(m.field(), &[1, 2, 3], n, terms)?)
}

/// Bias and analytic rank of a tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct ArReport {
    /// `Pr_{x,y}[B(x,y) = 0]` by direct enumeration.
    pub bias: BigRational,
    /// `E_x q^{−rank T̂(x)}`; always equal to `bias`.
    pub bias_by_rank: BigRational,
    /// `|Z|` for `Z = B⁻¹(0)`.
    pub zero_set_size: u64,
    /// `rank T̂(x)` for every `x`, by lexicographic index.
    pub ranks: Vec<usize>,
    /// `−log_q(bias)`, for display.
    pub ar: f64,
}

pub fn analytic_rank(t: &Tensor3, budget: u64) -> Result<ArReport> {
    let (f, n) = (t.field(), t.n());
    let q = f.order();
    let total = checked_point_count(f, 2, n, budget)?;
    let count = checked_point_count(f, 1, n, budget)?;
    let flat = flatten(t);
    let per_x: Vec<(u64, usize)> = (0..count)
        .into_par_iter()
        .map(|xi| {
            let x = vector_from_index(f, n, xi);
            let rank = flat.eval_unchecked(std::slice::from_ref(&x)).rank();
            let zeros = (0..count)
                .filter(|&yi| {
                    let y = vector_from_index(f, n, yi);
                    t.contract(&x, &y).iter().all(|&c| f.is_zero(c))
                })
                .count() as u64;
            (zeros, rank)
        })
        .collect();
    let qn = BigInt::from(q).pow(n as u32);
    let mut zero_set_size = 0u64;
    let mut by_rank = BigInt::zero();
    let mut weighted = BigInt::zero();
    for &(zeros, rank) in &per_x {
        let expected = BigInt::from(q).pow((n - rank) as u32);
        if BigInt::from(zeros) != expected {
            return Err(Error::Internal(format!("{zeros} zeros of B(x,−) but rank {rank}")));
        }
        zero_set_size += zeros;
        by_rank += expected;
        weighted += BigInt::from(zeros) * BigInt::from(q).pow(rank as u32);
    }
    // E_{(x,y)∈Z} q^{rank B(x,−)} = q^{2n}/|Z|
    if weighted != BigInt::from(total) {
        return Err(Error::Internal("zero-set identity failed".into()));
    }
    let bias = BigRational::new(BigInt::from(zero_set_size), BigInt::from(total));
    let bias_by_rank = BigRational::new(by_rank, &qn * &qn);
    if bias != bias_by_rank {
        return Err(Error::Internal("bias methods disagree".into()));
    }
    let ar = -(zero_set_size as f64 / total as f64).ln() / (q as f64).ln();
    Ok(ArReport { bias, bias_by_rank, zero_set_size, ranks: per_x.into_iter().map(|p| p.1).collect(), ar: ar.max(0.0) })
}

/// Whether `x ≤ c·AR`, i.e. `q^x · bias^c ≤ 1`, decided in integers.
pub fn within_ar_multiple(q: u64, x: &BigRational, c: &BigRational, bias: &BigRational) -> Result<bool> {
    if x.is_negative() || c.is_negative() || !bias.is_positive() {
        return Err(Error::InvalidParameter("expected x, c ≥ 0 and bias > 0".into()));
    }
    let exp = |v: BigInt| -> Result<u32> {
        v.to_u32().ok_or_else(|| Error::BudgetExceeded("exponent too large".into()))
    };
    // q^{P/Q} (N/D)^{R/S} ≤ 1  ⇔  q^{PS} N^{RQ} ≤ D^{RQ}
    let (p, qd) = (x.numer().clone(), x.denom().clone());
    let (r, s) = (c.numer().clone(), c.denom().clone());
    let e1 = exp(&p * &s)?;
    let e2 = exp(&r * &qd)?;
    let lhs = BigInt::from(q).pow(e1) * bias.numer().pow(e2);
    let rhs = bias.denom().pow(e2);
    Ok(lhs <= rhs)
}

/// Whether `AR ≤ count`, i.e. `q^{−count} ≤ bias`.
pub fn ar_at_most(q: u64, count: usize, bias: &BigRational) -> bool {
    BigInt::from(q).pow(count as u32) * bias.numer() >= *bias.denom()
}

/// The default weight `a = 2/(1 − 1/q)`.
pub fn default_weight(q: u64) -> BigRational {
    BigRational::new(BigInt::from(2 * q), BigInt::from(q - 1))
}

/// Result of [`find_subspace`].
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceReport {
    pub y0: Vec<FieldElem>,
    /// Basis of `U = ker B(−, y₀)`.
    pub basis: Vec<Vec<FieldElem>>,
    pub codim: usize,
    /// `E_{x∈U} rank T̂(x)`.
    pub avg_rank: BigRational,
    /// `a·E_{x∈U} rank T̂(x) + codim U`.
    pub value: BigRational,
    pub a: BigRational,
    pub ar: ArReport,
    /// `value ≤ (a+1)·AR(T)`.
    pub certified: bool,
}

/// Searches `y₀ ∈ F^n` for the kernel `U = ker B(−, y₀)` minimizing
/// `a·E_{x∈U} rank T̂(x) + codim U`; ties go to the lexicographically first
/// `y₀`.
pub fn find_subspace(t: &Tensor3, a: &BigRational, budget: u64) -> Result<SubspaceReport> {
    if a.is_negative() {
        return Err(Error::InvalidParameter("weight must be nonnegative".into()));
    }
    let (f, n) = (t.field(), t.n());
    let q = f.order();
    let ar = analytic_rank(t, budget)?;
    let count = checked_point_count(f, 1, n, budget)?;
    let candidates: Vec<(BigRational, u64, Vec<Vec<FieldElem>>, BigRational)> = (0..count)
        .into_par_iter()
        .map(|yi| {
            let y = vector_from_index(f, n, yi);
            let basis = t.right_map(&y).kernel();
            let dim = basis.len();
            let size = q.pow(dim as u32);
            let mut sum = 0u64;
            for ci in 0..size {
                let coeffs = vector_from_index(f, dim, ci);
                let mut x = vec![f.zero(); n];
                for (c, b) in coeffs.iter().zip(&basis) {
                    for (xj, &bj) in x.iter_mut().zip(b) {
                        *xj = f.add(*xj, f.mul(*c, bj));
                    }
                }
                sum += ar.ranks[index_of_point(f, std::slice::from_ref(&x)) as usize] as u64;
            }
            let avg = BigRational::new(BigInt::from(sum), BigInt::from(size));
            let value = a * &avg + BigRational::from_integer(BigInt::from(n - dim));
            (value, yi, basis, avg)
        })
        .collect();
    let (value, yi, basis, avg_rank) = candidates
        .into_iter()
        .min_by(|l, r| l.0.cmp(&r.0).then(l.1.cmp(&r.1)))
        .expect("F^n is nonempty");
    let c = a + BigRational::one();
    let certified = within_ar_multiple(q, &value, &c, &ar.bias)?;
    Ok(SubspaceReport {
        y0: vector_from_index(f, n, yi),
        codim: n - basis.len(),
        basis,
        avg_rank,
        value,
        a: a.clone(),
        ar,
        certified,
    })
}

/// `linear(x_slot) · rest(other two blocks)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SliceTerm {
    pub slot: u8,
    pub linear: MultilinearForm,
    pub rest: MultilinearForm,
}

impl SliceTerm {
    pub fn value(&self) -> Result<MultilinearForm> {
        self.linear.mul_disjoint(&self.rest)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SliceDecomposition {
    pub field: FieldCtx,
    pub n: usize,
    pub terms: Vec<SliceTerm>,
    /// Terms peeling `T` onto `U`.
    pub codim: usize,
    /// Terms from the restricted flattening, split by slot 2 and slot 3.
    pub r1: usize,
    pub r2: usize,
    pub subspace: SubspaceReport,
    /// `count ≤ (a+1)·AR(T)`.
    pub within_bound: bool,
}

impl SliceDecomposition {
    pub fn count(&self) -> usize {
        self.terms.len()
    }

    pub fn value(&self) -> Result<Tensor3> {
        let mut sum = MultilinearForm::zero(self.field, &[1, 2, 3], self.n);
        for t in &self.terms {
            sum = sum.add(&t.value()?);
        }
        Tensor3::new(sum)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SliceOptions {
    pub budget: u64,
    pub decompose: DecomposeOptions,
}

impl Default for SliceOptions {
    fn default() -> Self {
        SliceOptions { budget: DEFAULT_TENSOR_BUDGET, decompose: DecomposeOptions::default() }
    }
}

/// Slice decomposition with at most `(a+1)·AR(T)` terms, `a = 2/(1 − 1/q)`
/// unless overridden.
pub fn slice_decompose(t: &Tensor3, weight: Option<&BigRational>, opts: &SliceOptions) -> Result<SliceDecomposition> {
    let (f, n) = (t.field(), t.n());
    let q = f.order();
    let a = weight.cloned().unwrap_or_else(|| default_weight(q));
    let sub = find_subspace(t, &a, opts.budget)?;
    let k = sub.basis.len();

    // Columns of L: a basis of U, completed by unit vectors.
    let mut cols = sub.basis.clone();
    for i in 0..n {
        if cols.len() == n {
            break;
        }
        let mut trial = cols.clone();
        let mut e = vec![f.zero(); n];
        e[i] = f.one();
        trial.push(e);
        if ScalarMatrix::from_rows(f, trial.clone())?.rank() == trial.len() {
            cols = trial;
        }
    }
    let l = ScalarMatrix::from_rows(f, cols)?.transpose();
    let linv = l.inverse()?;
    let g = t.form.substitute_linear(1, &l)?;

    let mut terms = Vec::new();
    for i in k..n {
        let mut ei = vec![f.zero(); n];
        ei[i] = f.one();
        let rest = g.partial_eval(&BTreeMap::from([(1u8, ei)]))?;
        if rest.is_zero() {
            continue;
        }
        terms.push(SliceTerm { slot: 1, linear: MultilinearForm::linear(f, 1, linv.row(i)), rest });
    }
    let codim = terms.len();

    let h = MultilinearForm::from_terms(
        f,
        &[1, 2, 3],
        n,
        g.terms()
            .filter(|(idx, _)| (idx[0] as usize) < k)
            .map(|(idx, c)| (idx.iter().map(|&v| v as usize).collect(), c)),
    )?;
    let d1 = pr_decompose_d1(&flatten(&Tensor3::new(h)?), &opts.decompose)?;
    for term in &d1.decomposition.terms {
        let (slot, scalars, forms, other) = if term.subset.is_empty() {
            (2u8, &term.u, &term.v, 3u8)
        } else {
            (3u8, &term.v, &term.u, 2u8)
        };
        let coeffs: Vec<FieldElem> = scalars.iter().map(MultilinearForm::scalar_value).collect();
        let linear = MultilinearForm::linear(f, slot, &coeffs);
        let mut rest = MultilinearForm::zero(f, &[1, other], n);
        for (idx, form) in forms.iter().enumerate() {
            rest = rest.add(&form.mul_disjoint(&MultilinearForm::var(f, other, idx, n))?);
        }
        let rest = rest.substitute_linear(1, &linv)?;
        if linear.is_zero() || rest.is_zero() {
            continue;
        }
        terms.push(SliceTerm { slot, linear, rest });
    }
    let r1 = terms.iter().filter(|t| t.slot == 2).count();
    let r2 = terms.iter().filter(|t| t.slot == 3).count();

    let out = SliceDecomposition { field: f, n, terms, codim, r1, r2, within_bound: false, subspace: sub };
    if out.value()? != *t {
        return Err(Error::Internal("slice decomposition does not reconstruct the tensor".into()));
    }
    let bias = &out.subspace.ar.bias;
    if !ar_at_most(q, out.count(), bias) {
        return Err(Error::Internal("analytic rank exceeds the slice count".into()));
    }
    let count = BigRational::from_integer(BigInt::from(out.count()));
    let within = within_ar_multiple(q, &count, &(a + BigRational::one()), bias)?;
    if !within {
        return Err(Error::BoundViolation(format!("{} slices exceed the analytic-rank bound", out.count())));
    }
    Ok(SliceDecomposition { within_bound: within, ..out })
}
