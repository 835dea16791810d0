//! Schur complements over a field and the differential Schur complement of a
//! matrix of multilinear forms.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::FieldCtx;
use crate::localring::{mask_blocks, LocalElem};
use crate::mform::MultilinearForm;
use crate::mlmatrix::{FormMatrix, ScalarMatrix};
use crate::points::Point;
use crate::ranks::comm_rank_exact;

/// An outer product `u ⊗ v` with `u` over `M_S` and `v` over `M_{[d]∖S}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankOneTerm {
    pub subset: Vec<u8>,
    pub u: Vec<MultilinearForm>,
    pub v: Vec<MultilinearForm>,
}

impl RankOneTerm {
    /// The term as an `a×b` form matrix.
    pub fn to_matrix(&self, field: FieldCtx, d: usize, n: usize) -> Result<FormMatrix> {
        let mut m = FormMatrix::zeros(field, d, n, self.u.len(), self.v.len());
        m.add_outer(&self.u, &self.v)?;
        Ok(m)
    }

    pub fn is_zero(&self) -> bool {
        self.u.iter().all(MultilinearForm::is_zero) || self.v.iter().all(MultilinearForm::is_zero)
    }
}

fn check_pivots(rows: &[usize], cols: &[usize], a: usize, b: usize) -> Result<()> {
    if rows.len() != cols.len() {
        return Err(Error::DimensionMismatch("pivot row and column sets differ in size".into()));
    }
    for (set, bound, what) in [(rows, a, "row"), (cols, b, "column")] {
        if set.iter().any(|&i| i >= bound) {
            return Err(Error::DimensionMismatch(format!("pivot {what} out of range")));
        }
        let mut s = set.to_vec();
        s.sort_unstable();
        s.dedup();
        if s.len() != set.len() {
            return Err(Error::DimensionMismatch(format!("repeated pivot {what}")));
        }
    }
    Ok(())
}

/// `M/A` with the pivot rows and columns zeroed and `D − C A⁻¹ B` elsewhere.
pub fn schur_scalar(m: &ScalarMatrix, rows: &[usize], cols: &[usize]) -> Result<ScalarMatrix> {
    check_pivots(rows, cols, m.rows(), m.cols())?;
    let f = m.field();
    let ainv = m.submatrix(rows, cols).inverse()?;
    let all_cols: Vec<usize> = (0..m.cols()).collect();
    // W = A⁻¹ · M[rows, :]
    let w = ainv.mul(&m.submatrix(rows, &all_cols))?;
    let mut out = m.clone();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let mut acc = m.get(i, j);
            for (k, &c) in cols.iter().enumerate() {
                acc = f.sub(acc, f.mul(m.get(i, c), w.get(k, j)));
            }
            out.set(i, j, acc);
        }
    }
    for &i in rows {
        for j in 0..m.cols() {
            out.set(i, j, f.zero());
        }
    }
    for &j in cols {
        for i in 0..m.rows() {
            out.set(i, j, f.zero());
        }
    }
    Ok(out)
}

/// The two inequalities checked on every differential Schur complement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchurCertificate {
    pub r: usize,
    pub term_count: usize,
    /// `2^d · r`.
    pub term_bound: usize,
    /// Commutative rank of the remainder.
    pub remainder_cr: usize,
    /// `CR(M[p_S])` for each `S ⊆ [d]`, in binary-counter order; the last
    /// entry is `rank M(p)`.
    pub partial_crs: Vec<(Vec<u8>, usize)>,
    /// `∑_{S⊆[d]} (CR(M[p_S]) − r)`. The `S = [d]` summand vanishes when
    /// `r = rank M(p)`.
    pub rank_bound: usize,
}

/// Output of [`diff_schur`].
#[derive(Clone, Debug)]
pub struct DiffSchur {
    pub remainder: FormMatrix,
    pub terms: Vec<RankOneTerm>,
    pub certificate: SchurCertificate,
}

type LocalMatrix = Vec<Vec<LocalElem>>;

fn local_inverse(a: &LocalMatrix) -> Result<LocalMatrix> {
    let r = a.len();
    if r == 0 {
        return Ok(Vec::new());
    }
    let (field, point) = (a[0][0].field(), a[0][0].point().clone());
    let n = a[0][0].component(0).n();
    let zero = LocalElem::zero(field, n, point.clone());
    let one = LocalElem::constant(field, n, point, field.one());
    let mut m = a.clone();
    let mut inv: LocalMatrix = (0..r)
        .map(|i| (0..r).map(|j| if i == j { one.clone() } else { zero.clone() }).collect())
        .collect();
    for col in 0..r {
        let piv = (col..r).find(|&i| !field.is_zero(m[i][col].value())).ok_or(Error::Singular)?;
        m.swap(col, piv);
        inv.swap(col, piv);
        let s = m[col][col].inv()?;
        for j in 0..r {
            m[col][j] = m[col][j].mul_unchecked(&s);
            inv[col][j] = inv[col][j].mul_unchecked(&s);
        }
        for i in 0..r {
            if i == col || m[i][col].is_zero() {
                continue;
            }
            let x = m[i][col].clone();
            for j in 0..r {
                let t = x.mul_unchecked(&m[col][j]);
                m[i][j] = m[i][j].sub_unchecked(&t);
                let t = x.mul_unchecked(&inv[col][j]);
                inv[i][j] = inv[i][j].sub_unchecked(&t);
            }
        }
    }
    Ok(inv)
}

/// Sum of all terms as a form matrix.
pub fn terms_value(terms: &[RankOneTerm], field: FieldCtx, d: usize, n: usize, a: usize, b: usize) -> Result<FormMatrix> {
    let mut m = FormMatrix::zeros(field, d, n, a, b);
    for t in terms {
        m.add_outer(&t.u, &t.v)?;
    }
    Ok(m)
}

/// The differential Schur complement of `M` with respect to the pivot block
/// `A = M[rows, cols]` at `point`, together with the rank-one terms that
/// make up `M − [M/A]_p`.
///
/// Requires `A(p)` invertible. Every entry is expanded in the truncated local
/// ring at `p`; the remainder is the full-subset component of `M/A`, and for
/// pivot `i` and subset `S` the term `U_{·,i}[S] ⊗ W_{i,·}[[d]∖S]` is emitted
/// (`U = M[:, cols]`, `W = A⁻¹ M[rows, :]`), zero terms dropped. Terms are
/// ordered by pivot, then by `S` in binary-counter order.
///
/// The reconstruction `M = remainder + ∑ terms` is checked exactly, as is
/// the agreement of the value of `M/A` at `p` with [`schur_scalar`]. The
/// certificate bounds are enforced: a violation is reported as
/// [`Error::BoundViolation`]. `cr_m` may pass a known `CR(M)`; `budget`
/// limits the commutative-rank computations.
pub fn diff_schur(
    m: &FormMatrix,
    rows: &[usize],
    cols: &[usize],
    point: &Point,
    cr_m: Option<usize>,
    budget: u64,
) -> Result<DiffSchur> {
    let (field, d, n, a, b) = (m.field(), m.d(), m.n(), m.rows(), m.cols());
    check_pivots(rows, cols, a, b)?;
    if point.len() != d || point.iter().any(|v| v.len() != n) {
        return Err(Error::DimensionMismatch(format!("expected {d} vectors of length {n}")));
    }
    let r = rows.len();
    let m_at_p = m.eval(point)?;
    let expected_value = schur_scalar(&m_at_p, rows, cols)?;

    let pt = Arc::new(point.clone());
    let expanded: Vec<LocalElem> = (0..a * b)
        .into_par_iter()
        .map(|k| LocalElem::expand_unchecked(m.get(k / b, k % b), pt.clone()))
        .collect();
    let e = |i: usize, j: usize| &expanded[i * b + j];

    let a_loc: LocalMatrix = rows.iter().map(|&i| cols.iter().map(|&j| e(i, j).clone()).collect()).collect();
    let a_inv = local_inverse(&a_loc)?;
    let zero = LocalElem::zero(field, n, pt.clone());
    // W = A⁻¹ · M[rows, :]
    let w: LocalMatrix = (0..r)
        .map(|i| {
            (0..b)
                .map(|j| {
                    (0..r).fold(zero.clone(), |acc, k| acc.add_unchecked(&a_inv[i][k].mul_unchecked(e(rows[k], j))))
                })
                .collect()
        })
        .collect();
    let schur: Vec<LocalElem> = (0..a * b)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / b, k % b);
            (0..r).fold(e(i, j).clone(), |acc, t| acc.sub_unchecked(&e(i, cols[t]).mul_unchecked(&w[t][j])))
        })
        .collect();

    for (k, s) in schur.iter().enumerate() {
        let (i, j) = (k / b, k % b);
        if (rows.contains(&i) || cols.contains(&j)) && !s.is_zero() {
            return Err(Error::Internal(format!("Schur complement is nonzero on pivot entry ({i},{j})")));
        }
        if s.value() != expected_value.get(i, j) {
            return Err(Error::Internal(format!("value of M/A at p disagrees with the scalar Schur complement at ({i},{j})")));
        }
    }

    let mut remainder = FormMatrix::zeros(field, d, n, a, b);
    for (k, s) in schur.iter().enumerate() {
        remainder.set(k / b, k % b, s.approx_extract())?;
    }

    let full = (1usize << d) - 1;
    let mut terms = Vec::new();
    for i in 0..r {
        for s in 0..=full {
            let u: Vec<MultilinearForm> = (0..a).map(|k| e(k, cols[i]).component(s).clone()).collect();
            let v: Vec<MultilinearForm> = (0..b).map(|l| w[i][l].component(full & !s).clone()).collect();
            let t = RankOneTerm { subset: mask_blocks(s), u, v };
            if !t.is_zero() {
                terms.push(t);
            }
        }
    }

    let rebuilt = terms_value(&terms, field, d, n, a, b)?.add(&remainder)?;
    if &rebuilt != m {
        return Err(Error::Internal("remainder plus terms does not reproduce M".into()));
    }

    let certificate = certify(m, point, r, &remainder, terms.len(), cr_m, budget)?;
    Ok(DiffSchur { remainder, terms, certificate })
}

fn certify(
    m: &FormMatrix,
    point: &Point,
    r: usize,
    remainder: &FormMatrix,
    term_count: usize,
    cr_m: Option<usize>,
    budget: u64,
) -> Result<SchurCertificate> {
    let d = m.d();
    let full = (1usize << d) - 1;
    let mut partial_crs = Vec::with_capacity(full + 1);
    for s in 0..=full {
        let blocks = mask_blocks(s);
        let cr = match (s, cr_m) {
            (0, Some(c)) => c,
            _ if s == full => m.eval(point)?.rank(),
            _ => {
                let assignment: BTreeMap<u8, _> =
                    blocks.iter().map(|&blk| (blk, point[blk as usize - 1].clone())).collect();
                comm_rank_exact(&m.partial_eval(&assignment)?, budget)?
            }
        };
        partial_crs.push((blocks, cr));
    }
    let mut rank_bound = 0usize;
    for (s, cr) in &partial_crs {
        rank_bound += cr.checked_sub(r).ok_or_else(|| {
            Error::Internal(format!("CR(M[p_{s:?}]) = {cr} is below the pivot size {r}"))
        })?;
    }
    let remainder_cr = comm_rank_exact(remainder, budget)?;
    let cert = SchurCertificate { r, term_count, term_bound: (1 << d) * r, remainder_cr, partial_crs, rank_bound };
    if cert.term_count > cert.term_bound {
        return Err(Error::BoundViolation(format!("{} terms exceed 2^d·r = {}", cert.term_count, cert.term_bound)));
    }
    if cert.remainder_cr > cert.rank_bound {
        return Err(Error::BoundViolation(format!(
            "CR of the remainder {} exceeds {}",
            cert.remainder_cr, cert.rank_bound
        )));
    }
    Ok(cert)
}
