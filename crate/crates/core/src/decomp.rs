//! Partition-rank decompositions: the iterated differential Schur
//! complement, its transfer through field extensions, the compression
//! normal form for matrices of linear forms, and a verifier.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::field::{Extension, FieldCtx, FieldElem, MAX_DEGREE};
use crate::mform::MultilinearForm;
use crate::mlmatrix::{FormMatrix, ScalarMatrix};
use crate::points::{point_count, unit_vector, Point};
use crate::ranks::{best_point_exhaustive, best_point_sampled, comm_rank, comm_rank_exact, CommRankMode, DEFAULT_BUDGET};
use crate::schur::{diff_schur, terms_value, RankOneTerm, SchurCertificate};

/// One round of the iteration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IterationRecord {
    /// Base point, with coordinates in the field the round ran over.
    pub point: Point,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub r: usize,
    pub cr_before: usize,
    pub cr_after: usize,
    pub terms: usize,
    /// Degree of the extension the round ran over (1 for the base field).
    pub extension_degree: u32,
    /// `None` for an exhaustive point search, else the sampling seed.
    pub seed: Option<u64>,
}

/// A list of rank-one terms summing to a target matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionDecomposition {
    pub field: FieldCtx,
    pub d: usize,
    pub n: usize,
    pub rows: usize,
    pub cols: usize,
    pub terms: Vec<RankOneTerm>,
    pub log: Vec<IterationRecord>,
}

impl PartitionDecomposition {
    pub fn empty(field: FieldCtx, d: usize, n: usize, rows: usize, cols: usize) -> Self {
        PartitionDecomposition { field, d, n, rows, cols, terms: Vec::new(), log: Vec::new() }
    }

    /// `∑ u ⊗ v`.
    pub fn value(&self) -> Result<FormMatrix> {
        terms_value(&self.terms, self.field, self.d, self.n, self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of terms per subset `S`.
    pub fn subset_counts(&self) -> BTreeMap<Vec<u8>, usize> {
        let mut out = BTreeMap::new();
        for t in &self.terms {
            *out.entry(t.subset.clone()).or_insert(0) += 1;
        }
        out
    }
}

/// The constant `C(d, q)` with `|terms| ≤ C(d,q)·CR(M)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundReport {
    pub d: usize,
    /// `None` stands for an infinite field.
    pub q: Option<u64>,
    /// `None` when the denominator is not positive.
    pub constant: Option<BigRational>,
    /// `(2^d−1)(q−1)^d − (2^d−2)q^d`; `None` for an infinite field.
    pub denominator: Option<BigInt>,
}

impl BoundReport {
    pub fn is_valid(&self) -> bool {
        self.constant.is_some()
    }
}

/// `C(d,q) = 2^d(q−1)^d / ((2^d−1)(q−1)^d − (2^d−2)q^d)` when the
/// denominator is positive, and `2^d` for an infinite field.
pub fn bound_constant(d: usize, q: Option<u64>) -> BoundReport {
    let two_d = BigInt::one() << d;
    let Some(q) = q else {
        return BoundReport { d, q: None, constant: Some(BigRational::from_integer(two_d)), denominator: None };
    };
    let qm1 = num_traits::pow(BigInt::from(q) - 1, d);
    let qd = num_traits::pow(BigInt::from(q), d);
    let num = &two_d * &qm1;
    let den: BigInt = (&two_d - 1) * &qm1 - (&two_d - 2) * qd;
    let constant = den.is_positive().then(|| BigRational::new(num, den.clone()));
    BoundReport { d, q: Some(q), constant, denominator: Some(den) }
}

/// Smallest `e ≥ 1` with `C(d, q^e)` valid and `F_{q^e}` supported.
pub fn smallest_valid_extension(d: usize, field: FieldCtx) -> Option<u32> {
    (1..).take_while(|e| (field.degree() * e) as usize <= MAX_DEGREE).find(|&e| {
        field.order().checked_pow(e).is_some_and(|qe| bound_constant(d, Some(qe)).is_valid())
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecomposeOptions {
    /// Restart over an extension field when the commutative rank stalls.
    pub allow_extension: bool,
    /// Largest `q^{dn}` searched exhaustively for a max-rank point.
    pub point_budget: u64,
    /// Number of sampled points when the space is too large.
    pub sample_count: u64,
    pub seed: u64,
    /// Budget for exact commutative-rank computations.
    pub cr_budget: u64,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions {
            allow_extension: false,
            point_budget: 4096,
            sample_count: 4096,
            seed: 0,
            cr_budget: DEFAULT_BUDGET,
        }
    }
}

/// Max-rank point search: exhaustive within budget, else seeded sampling.
fn choose_point(m: &FormMatrix, opts: &DecomposeOptions, round: usize) -> Result<(Point, usize, Option<u64>)> {
    match point_count(m.field(), m.d(), m.n()) {
        Some(c) if c <= opts.point_budget => {
            let (p, r) = best_point_exhaustive(m, opts.point_budget)?;
            Ok((p, r, None))
        }
        _ => {
            let seed = opts.seed.wrapping_add(round as u64);
            let (p, r) = best_point_sampled(m, opts.sample_count, seed);
            Ok((p, r, Some(seed)))
        }
    }
}

enum Run {
    Done(Vec<RankOneTerm>, Vec<IterationRecord>),
    Stalled { before: usize, after: usize },
}

fn run_iteration(m: &FormMatrix, opts: &DecomposeOptions, ext_degree: u32) -> Result<Run> {
    let mut cur = m.clone();
    let mut cr = comm_rank_exact(&cur, opts.cr_budget)?;
    let mut terms = Vec::new();
    let mut log = Vec::new();
    while cr > 0 {
        let (point, r, seed) = choose_point(&cur, opts, log.len())?;
        if r == 0 {
            return Err(Error::BudgetExceeded(format!(
                "no point with a nonzero evaluation found among {} samples",
                opts.sample_count
            )));
        }
        let (rows, cols) = cur.find_invertible_submatrix(&point, r)?;
        let ds = diff_schur(&cur, &rows, &cols, &point, Some(cr), opts.cr_budget)?;
        let SchurCertificate { remainder_cr, .. } = ds.certificate;
        if remainder_cr >= cr {
            return Ok(Run::Stalled { before: cr, after: remainder_cr });
        }
        log.push(IterationRecord {
            point,
            rows,
            cols,
            r,
            cr_before: cr,
            cr_after: remainder_cr,
            terms: ds.terms.len(),
            extension_degree: ext_degree,
            seed,
        });
        terms.extend(ds.terms);
        cur = ds.remainder;
        cr = remainder_cr;
    }
    if !cur.is_zero() {
        return Err(Error::Internal("remainder of commutative rank 0 is nonzero".into()));
    }
    Ok(Run::Done(terms, log))
}

/// Decomposes `M` by repeatedly splitting off differential Schur complements
/// at max-rank points until the remainder vanishes.
///
/// Each round must strictly lower the commutative rank. If it does not and
/// `allow_extension` is set, the computation restarts over the smallest
/// extension `F_{q^e}` for which [`bound_constant`] is valid (trying larger
/// degrees if that stalls too) and the result is brought back with
/// [`lift_project`]; otherwise [`Error::NoProgress`] is returned.
pub fn pr_decompose(m: &FormMatrix, opts: &DecomposeOptions) -> Result<PartitionDecomposition> {
    let (f, d, n, a, b) = (m.field(), m.d(), m.n(), m.rows(), m.cols());
    let stalled = match run_iteration(m, opts, 1)? {
        Run::Done(terms, log) => {
            let dec = PartitionDecomposition { field: f, d, n, rows: a, cols: b, terms, log };
            check_reconstruction(m, &dec)?;
            return Ok(dec);
        }
        Run::Stalled { before, after } => (before, after),
    };
    if !opts.allow_extension {
        return Err(Error::NoProgress { before: stalled.0, after: stalled.1 });
    }
    let first = smallest_valid_extension(d, f).unwrap_or(2).max(2);
    let mut last = stalled;
    for e in first.. {
        if (f.degree() * e) as usize > MAX_DEGREE {
            break;
        }
        match pr_decompose_via_extension(m, e, opts) {
            Ok(dec) => return Ok(dec),
            Err(Error::NoProgress { before, after }) => last = (before, after),
            Err(err) => return Err(err),
        }
    }
    Err(Error::NoProgress { before: last.0, after: last.1 })
}

/// Runs the iteration over the degree-`e` extension and projects the result
/// back to the base field.
pub fn pr_decompose_via_extension(m: &FormMatrix, e: u32, opts: &DecomposeOptions) -> Result<PartitionDecomposition> {
    let ext = Extension::new(m.field(), e)?;
    let big = m.embed(&ext)?;
    match run_iteration(&big, opts, e)? {
        Run::Done(terms, log) => {
            let dk = PartitionDecomposition {
                field: ext.ext(),
                d: m.d(),
                n: m.n(),
                rows: m.rows(),
                cols: m.cols(),
                terms,
                log,
            };
            let dec = lift_project(&dk, &ext)?;
            check_reconstruction(m, &dec)?;
            Ok(dec)
        }
        Run::Stalled { before, after } => Err(Error::NoProgress { before, after }),
    }
}

fn check_reconstruction(m: &FormMatrix, dec: &PartitionDecomposition) -> Result<()> {
    if &dec.value()? != m {
        return Err(Error::Internal("decomposition does not reproduce the matrix".into()));
    }
    Ok(())
}

/// Turns a decomposition over `F_{q^e}` of a matrix with base-field
/// coefficients into one over `F_q`: each term `u ⊗ v` with
/// `u = ∑ u_i β_i` becomes the terms `u_i ⊗ φ(β_i v)`.
pub fn lift_project(dk: &PartitionDecomposition, ext: &Extension) -> Result<PartitionDecomposition> {
    if dk.field != ext.ext() {
        return Err(Error::NotAnExtension(format!("decomposition is over {:?}", dk.field)));
    }
    let base = ext.base();
    let basis = ext.basis();
    let value = dk.value()?;
    value.restrict(ext)?;
    let mut out = PartitionDecomposition::empty(base, dk.d, dk.n, dk.rows, dk.cols);
    out.log = dk.log.clone();
    for t in &dk.terms {
        for (i, &beta) in basis.iter().enumerate() {
            let u: Vec<MultilinearForm> = t.u.iter().map(|f| f.map_coeffs(base, |c| ext.decompose(c)[i])).collect();
            let v: Vec<MultilinearForm> = t
                .v
                .iter()
                .map(|f| f.map_coeffs(base, |c| ext.project_phi(ext.ext().mul(beta, c))))
                .collect();
            let term = RankOneTerm { subset: t.subset.clone(), u, v };
            if !term.is_zero() {
                out.terms.push(term);
            }
        }
    }
    Ok(out)
}

/// Output of [`pr_decompose_d1`]: `P·M·Q` vanishes outside its first `r₁`
/// rows and first `r₂` columns.
#[derive(Clone, Debug)]
pub struct D1Decomposition {
    pub p: ScalarMatrix,
    pub q: ScalarMatrix,
    pub r1: usize,
    pub r2: usize,
    pub decomposition: PartitionDecomposition,
}

/// Invertible `P₀, Q₀` with `P₀·X·Q₀ = diag(I_r, 0)`.
fn normal_form(x: &ScalarMatrix) -> Result<(ScalarMatrix, ScalarMatrix, usize)> {
    let f = x.field();
    let (a, b) = (x.rows(), x.cols());
    let info = x.rank_info();
    let r = info.rank;
    let row_order: Vec<usize> =
        info.pivot_rows.iter().copied().chain((0..a).filter(|i| !info.pivot_rows.contains(i))).collect();
    let col_order: Vec<usize> =
        info.pivot_cols.iter().copied().chain((0..b).filter(|j| !info.pivot_cols.contains(j))).collect();
    let xp = x.submatrix(&row_order, &col_order);
    let top: Vec<usize> = (0..r).collect();
    let ainv = xp.submatrix(&top, &top).inverse()?;
    // P₀ = [[A⁻¹, 0], [−C A⁻¹, I]] Π_r,  Q₀ = Π_c [[I, −A⁻¹B], [0, I]]
    let mut left = ScalarMatrix::identity(f, a);
    let c_ainv = xp.submatrix(&(r..a).collect::<Vec<_>>(), &top).mul(&ainv)?;
    for i in 0..r {
        for j in 0..r {
            left.set(i, j, ainv.get(i, j));
        }
    }
    for i in r..a {
        for j in 0..r {
            left.set(i, j, f.neg(c_ainv.get(i - r, j)));
        }
    }
    let mut right = ScalarMatrix::identity(f, b);
    let ainv_b = ainv.mul(&xp.submatrix(&top, &(r..b).collect::<Vec<_>>()))?;
    for i in 0..r {
        for j in r..b {
            right.set(i, j, f.neg(ainv_b.get(i, j - r)));
        }
    }
    let mut perm_r = ScalarMatrix::zeros(f, a, a);
    for (i, &src) in row_order.iter().enumerate() {
        perm_r.set(i, src, f.one());
    }
    let mut perm_c = ScalarMatrix::zeros(f, b, b);
    for (j, &src) in col_order.iter().enumerate() {
        perm_c.set(src, j, f.one());
    }
    Ok((left.mul(&perm_r)?, perm_c.mul(&right)?, r))
}

fn block_diag(top: usize, lower: &ScalarMatrix) -> ScalarMatrix {
    let f = lower.field();
    let size = top + lower.rows();
    let mut m = ScalarMatrix::identity(f, size);
    for i in 0..lower.rows() {
        for j in 0..lower.cols() {
            m.set(top + i, top + j, lower.get(i, j));
        }
    }
    m
}

/// Matrix `L` with first column `p` (extended by unit vectors to a basis).
fn basis_with_first(p: &[FieldElem], f: FieldCtx) -> Result<ScalarMatrix> {
    let n = p.len();
    let mut cols: Vec<Vec<FieldElem>> = vec![p.to_vec()];
    for i in 0..n {
        if cols.len() == n {
            break;
        }
        let mut cand = cols.clone();
        cand.push(unit_vector(f, n, i));
        if ScalarMatrix::from_rows(f, cand.clone())?.rank() == cand.len() {
            cols = cand;
        }
    }
    Ok(ScalarMatrix::from_rows(f, cols)?.transpose())
}

fn d1_recurse(
    m: &FormMatrix,
    opts: &DecomposeOptions,
    log: &mut Vec<IterationRecord>,
) -> Result<(ScalarMatrix, ScalarMatrix, usize, usize)> {
    let f = m.field();
    let (a, b) = (m.rows(), m.cols());
    if m.is_zero() || a == 0 || b == 0 {
        return Ok((ScalarMatrix::identity(f, a), ScalarMatrix::identity(f, b), 0, 0));
    }
    let (point, r, seed) = choose_point(m, opts, log.len())?;
    if r == 0 {
        return Err(Error::BudgetExceeded("no point with a nonzero evaluation found".into()));
    }
    let (p0, q0, _) = normal_form(&m.eval(&point)?)?;
    let n0 = m.left_mul(&p0)?.right_mul(&q0)?;
    // In coordinates whose first basis vector is the point, the pivot block
    // reads x₁·I + (terms without x₁) and the off-diagonal blocks lack x₁.
    let l = basis_with_first(&point[0], f)?;
    for (i, j, e) in n0.entries() {
        let g = e.substitute_linear(1, &l)?;
        let expect = if i == j && i < r { f.one() } else { f.zero() };
        if g.coefficient(&[0]) != expect {
            return Err(Error::Internal(format!("entry ({i},{j}) is not in normal form at the chosen point")));
        }
    }
    let lower: Vec<usize> = (r..a).collect();
    let right: Vec<usize> = (r..b).collect();
    let dblock = n0.submatrix(&lower, &right);
    let before = comm_rank(m, CommRankMode::Auto { budget: opts.cr_budget }).ok().map_or(0, |v| v.value);
    let after = comm_rank(&dblock, CommRankMode::Auto { budget: opts.cr_budget }).ok().map_or(0, |v| v.value);
    log.push(IterationRecord {
        point,
        rows: (0..r).collect(),
        cols: (0..r).collect(),
        r,
        cr_before: before,
        cr_after: after,
        terms: 2 * r,
        extension_degree: 1,
        seed,
    });
    let (p1, q1, s1, s2) = d1_recurse(&dblock, opts, log)?;
    let p = block_diag(r, &p1).mul(&p0)?;
    let q = q0.mul(&block_diag(r, &q1))?;
    Ok((p, q, r + s1, r + s2))
}

/// Compression normal form of a matrix of linear forms: invertible `P, Q`
/// with `r₁ + r₂ ≤ 2·CR(M)` such that `PMQ` has a zero bottom-right
/// `(a−r₁)×(b−r₂)` block, and the matching decomposition with `r₁` terms on
/// `S = ∅` and `r₂` terms on `S = {1}`.
pub fn pr_decompose_d1(m: &FormMatrix, opts: &DecomposeOptions) -> Result<D1Decomposition> {
    if m.d() != 1 {
        return Err(Error::InvalidParameter(format!("expected d = 1, got {}", m.d())));
    }
    let f = m.field();
    let (a, b, n) = (m.rows(), m.cols(), m.n());
    let mut log = Vec::new();
    let (mut p, mut q, mut r1, mut r2) = d1_recurse(m, opts, &mut log)?;
    let mut nm = m.left_mul(&p)?.right_mul(&q)?;

    // Rows of the top block that vanish on the right block, and columns of
    // the left block that vanish below, can join the zero block.
    loop {
        let row = (0..r1).find(|&i| (r2..b).all(|j| nm.get(i, j).is_zero()));
        if let Some(i) = row {
            swap_rows(&mut nm, &mut p, i, r1 - 1)?;
            r1 -= 1;
            continue;
        }
        let col = (0..r2).find(|&j| (r1..a).all(|i| nm.get(i, j).is_zero()));
        if let Some(j) = col {
            swap_cols(&mut nm, &mut q, j, r2 - 1)?;
            r2 -= 1;
            continue;
        }
        break;
    }
    for i in r1..a {
        for j in r2..b {
            if !nm.get(i, j).is_zero() {
                return Err(Error::Internal("bottom-right block of PMQ is nonzero".into()));
            }
        }
    }

    let pinv = p.inverse()?;
    let qinv = q.inverse()?;
    let mut terms = Vec::with_capacity(r1 + r2);
    for i in 0..r1 {
        let u: Vec<MultilinearForm> =
            (0..a).map(|k| MultilinearForm::scalar(f, n, pinv.get(k, i))).collect();
        let row = nm.submatrix(&[i], &(0..b).collect::<Vec<_>>()).right_mul(&qinv)?;
        let v: Vec<MultilinearForm> = (0..b).map(|l| row.get(0, l).clone()).collect();
        terms.push(RankOneTerm { subset: vec![], u, v });
    }
    for j in 0..r2 {
        let mut col = FormMatrix::zeros(f, 1, n, a, 1);
        for i in r1..a {
            col.set(i, 0, nm.get(i, j).clone())?;
        }
        let col = col.left_mul(&pinv)?;
        let u: Vec<MultilinearForm> = (0..a).map(|k| col.get(k, 0).clone()).collect();
        let v: Vec<MultilinearForm> = (0..b).map(|l| MultilinearForm::scalar(f, n, qinv.get(j, l))).collect();
        terms.push(RankOneTerm { subset: vec![1], u, v });
    }
    let decomposition = PartitionDecomposition { field: f, d: 1, n, rows: a, cols: b, terms, log };
    check_reconstruction(m, &decomposition)?;
    Ok(D1Decomposition { p, q, r1, r2, decomposition })
}

fn swap_rows(nm: &mut FormMatrix, p: &mut ScalarMatrix, i: usize, k: usize) -> Result<()> {
    if i == k {
        return Ok(());
    }
    for j in 0..nm.cols() {
        let (x, y) = (nm.get(i, j).clone(), nm.get(k, j).clone());
        nm.set(i, j, y)?;
        nm.set(k, j, x)?;
    }
    for j in 0..p.cols() {
        let (x, y) = (p.get(i, j), p.get(k, j));
        p.set(i, j, y);
        p.set(k, j, x);
    }
    Ok(())
}

fn swap_cols(nm: &mut FormMatrix, q: &mut ScalarMatrix, j: usize, k: usize) -> Result<()> {
    if j == k {
        return Ok(());
    }
    for i in 0..nm.rows() {
        let (x, y) = (nm.get(i, j).clone(), nm.get(i, k).clone());
        nm.set(i, j, y)?;
        nm.set(i, k, x)?;
    }
    for i in 0..q.rows() {
        let (x, y) = (q.get(i, j), q.get(i, k));
        q.set(i, j, y);
        q.set(i, k, x);
    }
    Ok(())
}

/// Result of [`verify`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub equal: bool,
    pub term_count: usize,
    pub subset_counts: BTreeMap<Vec<u8>, usize>,
    /// Commutative rank of the target, when it could be certified.
    pub comm_rank: Option<usize>,
    pub bound: BoundReport,
    /// `C(d,q)·CR(M)` when both are available.
    pub bound_value: Option<BigRational>,
    pub within_bound: Option<bool>,
}

/// Compares a decomposition against its target matrix.
pub fn verify(m: &FormMatrix, dec: &PartitionDecomposition, cr_budget: u64) -> Result<VerifyReport> {
    if (dec.d, dec.n, dec.rows, dec.cols) != (m.d(), m.n(), m.rows(), m.cols()) {
        return Err(Error::DimensionMismatch(format!(
            "decomposition is d={}, n={}, {}×{}; matrix is d={}, n={}, {}×{}",
            dec.d,
            dec.n,
            dec.rows,
            dec.cols,
            m.d(),
            m.n(),
            m.rows(),
            m.cols()
        )));
    }
    if dec.field != m.field() {
        return Err(Error::ContextMismatch);
    }
    let equal = match dec.value() {
        Ok(v) => &v == m,
        Err(_) => false,
    };
    let cr = comm_rank_exact(m, cr_budget).ok();
    let bound = bound_constant(m.d(), Some(m.field().order()));
    let bound_value = match (&bound.constant, cr) {
        (Some(c), Some(k)) => Some(c * BigRational::from_integer(BigInt::from(k))),
        _ => None,
    };
    let within_bound =
        bound_value.as_ref().map(|bv| BigRational::from_integer(BigInt::from(dec.len())) <= *bv);
    Ok(VerifyReport {
        equal,
        term_count: dec.len(),
        subset_counts: dec.subset_counts(),
        comm_rank: cr,
        bound,
        bound_value,
        within_bound,
    })
}

/// `true` when `count ≤ c·k` for a rational `c`.
pub fn count_within(count: usize, c: &BigRational, k: usize) -> bool {
    BigRational::from_integer(BigInt::from(count)) <= c * BigRational::from_integer(BigInt::from(k))
}
