//! Max-rank, commutative rank, average rank, and the exact partition rank of
//! matrices of linear forms.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Extension, FieldCtx, FieldElem};
use crate::mlmatrix::{FormMatrix, ScalarMatrix};
use crate::points::{checked_point_count, point_count, point_from_index, Point};
use crate::polyops::{has_nonzero_minor, matrix_polys};
use crate::rng::SplitMix64;

/// Default cap on the number of evaluations an exact computation may use.
pub const DEFAULT_BUDGET: u64 = 1 << 18;

/// Default number of draws for probabilistic commutative rank.
pub const DEFAULT_TRIALS: u32 = 40;

/// A computed rank, with `exact == false` when it is only a lower bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankValue {
    pub value: usize,
    pub exact: bool,
    pub method: &'static str,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaxRankMode {
    Exhaustive { budget: u64 },
    Sample { count: u64, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommRankMode {
    /// Cheapest exact method that fits the budget, else probabilistic.
    Auto { budget: u64 },
    /// Nonzero-minor search over symbolic determinants.
    Symbolic,
    /// Evaluation on a grid `S^{dn}` with `|S| = min(a,b) + 1`, which no
    /// nonzero minor can vanish on.
    Grid { budget: u64 },
    /// Random points of a large enough extension field.
    Probabilistic { trials: u32, seed: u64 },
}

impl Default for CommRankMode {
    fn default() -> Self {
        CommRankMode::Auto { budget: DEFAULT_BUDGET }
    }
}

/// Points are scanned in batches so that a full-rank hit stops the search
/// early without losing the lexicographic tie-break.
const BATCH: u64 = 1 << 12;

/// Highest rank of `m` over the points produced by `point_at(0..count)`,
/// with the smallest index attaining it.
fn scan_max<F>(m: &FormMatrix, count: u64, point_at: F) -> (usize, u64)
where
    F: Fn(u64) -> Point + Sync,
{
    let cap = m.rows().min(m.cols());
    let mut best: Option<(usize, u64)> = None;
    let mut start = 0u64;
    while start < count {
        let end = count.min(start + BATCH);
        let local = (start..end)
            .into_par_iter()
            .map(|i| (m.eval_unchecked(&point_at(i)).rank(), i))
            .reduce(|| (0, u64::MAX), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
        if best.is_none_or(|b| local.0 > b.0) {
            best = Some(local);
        }
        if local.0 == cap {
            break;
        }
        start = end;
    }
    best.unwrap_or((0, 0))
}

/// The lexicographically first point of `F_q^{dn}` attaining the max-rank.
pub fn best_point_exhaustive(m: &FormMatrix, budget: u64) -> Result<(Point, usize)> {
    let (f, d, n) = (m.field(), m.d(), m.n());
    let count = checked_point_count(f, d, n, budget)?;
    let (rank, idx) = scan_max(m, count, |i| point_from_index(f, d, n, i));
    Ok((point_from_index(f, d, n, idx), rank))
}

/// The best of `count` seeded random points (earliest draw wins ties).
pub fn best_point_sampled(m: &FormMatrix, count: u64, seed: u64) -> (Point, usize) {
    let (f, d, n) = (m.field(), m.d(), m.n());
    let mut rng = SplitMix64::new(seed);
    let points: Vec<Point> = (0..count.max(1)).map(|_| (0..d).map(|_| rng.vector(f, n)).collect()).collect();
    let (rank, idx) = scan_max(m, points.len() as u64, |i| points[i as usize].clone());
    (points[idx as usize].clone(), rank)
}

/// Maximum of `rank M(p)` over `p ∈ (F^n)^d`.
pub fn max_rank(m: &FormMatrix, mode: MaxRankMode) -> Result<RankValue> {
    let cap = m.rows().min(m.cols());
    match mode {
        MaxRankMode::Exhaustive { budget } => {
            let (_, r) = best_point_exhaustive(m, budget)?;
            Ok(RankValue { value: r, exact: true, method: "exhaustive" })
        }
        MaxRankMode::Sample { count, seed } => {
            let (_, r) = best_point_sampled(m, count, seed);
            Ok(RankValue { value: r, exact: r == cap, method: "sample" })
        }
    }
}

/// Exact mean of `rank M(p)` over all points.
pub fn avg_rank(m: &FormMatrix, budget: u64) -> Result<BigRational> {
    let (f, d, n) = (m.field(), m.d(), m.n());
    let count = checked_point_count(f, d, n, budget)?;
    let total: u64 =
        (0..count).into_par_iter().map(|i| m.eval_unchecked(&point_from_index(f, d, n, i)).rank() as u64).sum();
    Ok(BigRational::new(BigInt::from(total), BigInt::from(count)))
}

/// Smallest `m` such that the extension of degree `m` has more than `bound`
/// elements.
fn extension_degree_above(field: FieldCtx, bound: u64) -> Result<u32> {
    let mut m = 1u32;
    let mut size = field.order();
    while size <= bound {
        m += 1;
        size = size
            .checked_mul(field.order())
            .filter(|_| (field.degree() * m) as usize <= crate::field::MAX_DEGREE)
            .ok_or_else(|| Error::BudgetExceeded(format!("no supported extension with more than {bound} elements")))?;
    }
    Ok(m)
}

fn grid_rank(m: &FormMatrix, budget: u64) -> Result<usize> {
    let cap = m.rows().min(m.cols());
    let s = cap as u64 + 1;
    let nv = m.d() * m.n();
    let count = u32::try_from(nv)
        .ok()
        .and_then(|e| s.checked_pow(e))
        .filter(|&c| c <= budget)
        .ok_or_else(|| Error::BudgetExceeded(format!("grid of {s}^{nv} points")))?;
    let deg = extension_degree_above(m.field(), s - 1)?;
    let ext = Extension::new(m.field(), deg)?;
    let big = m.embed(&ext)?;
    let kf = ext.ext();
    let values: Vec<FieldElem> = (0..s).map(|i| kf.from_index(i)).collect();
    let (d, n) = (m.d(), m.n());
    let (rank, _) = scan_max(&big, count, |mut i| {
        let mut flat = vec![kf.zero(); nv];
        for slot in flat.iter_mut().rev() {
            *slot = values[(i % s) as usize];
            i /= s;
        }
        if n == 0 {
            return vec![Vec::new(); d];
        }
        flat.chunks(n).map(<[FieldElem]>::to_vec).collect()
    });
    Ok(rank)
}

/// Symbolic limits: `min(a,b) ≤ 5` and `d·n ≤ 12`.
fn symbolic_rank(m: &FormMatrix, lower: usize) -> Result<usize> {
    let cap = m.rows().min(m.cols());
    if cap > 5 || m.d() * m.n() > 12 {
        return Err(Error::BudgetExceeded(format!(
            "symbolic rank needs min(a,b) ≤ 5 and dn ≤ 12 (got {cap}, {})",
            m.d() * m.n()
        )));
    }
    let polys = matrix_polys(m);
    for r in (lower + 1..=cap).rev() {
        if has_nonzero_minor(&polys, r)? {
            return Ok(r);
        }
    }
    Ok(lower)
}

fn probabilistic_rank(m: &FormMatrix, trials: u32, seed: u64) -> Result<usize> {
    let cap = m.rows().min(m.cols()) as u64;
    let deg = extension_degree_above(m.field(), 2 * m.d() as u64 * cap)?;
    let ext = Extension::new(m.field(), deg)?;
    let big = m.embed(&ext)?;
    Ok(best_point_sampled(&big, trials as u64, seed).1)
}

/// A quick lower bound from points of the base field.
fn base_field_lower_bound(m: &FormMatrix) -> usize {
    match point_count(m.field(), m.d(), m.n()) {
        Some(c) if c <= 4096 => best_point_exhaustive(m, c).map(|x| x.1).unwrap_or(0),
        _ => best_point_sampled(m, 64, 0).1,
    }
}

/// The commutative rank: the rank of `M` over the field of rational functions.
pub fn comm_rank(m: &FormMatrix, mode: CommRankMode) -> Result<RankValue> {
    let cap = m.rows().min(m.cols());
    if m.d() == 0 || m.n() == 0 || cap == 0 {
        let pt = vec![vec![m.field().zero(); m.n()]; m.d()];
        let r = m.eval(&pt)?.rank();
        return Ok(RankValue { value: r, exact: true, method: "scalar" });
    }
    match mode {
        CommRankMode::Symbolic => Ok(RankValue { value: symbolic_rank(m, 0)?, exact: true, method: "symbolic" }),
        CommRankMode::Grid { budget } => Ok(RankValue { value: grid_rank(m, budget)?, exact: true, method: "grid" }),
        CommRankMode::Probabilistic { trials, seed } => {
            let r = probabilistic_rank(m, trials, seed)?;
            Ok(RankValue { value: r, exact: r == cap, method: "probabilistic" })
        }
        CommRankMode::Auto { budget } => {
            let lower = base_field_lower_bound(m);
            if lower == cap {
                return Ok(RankValue { value: lower, exact: true, method: "evaluation" });
            }
            match grid_rank(m, budget) {
                Ok(r) => return Ok(RankValue { value: r, exact: true, method: "grid" }),
                Err(Error::BudgetExceeded(_)) => {}
                Err(e) => return Err(e),
            }
            match symbolic_rank(m, lower) {
                Ok(r) => return Ok(RankValue { value: r, exact: true, method: "symbolic" }),
                Err(Error::BudgetExceeded(_)) => {}
                Err(e) => return Err(e),
            }
            let r = probabilistic_rank(m, DEFAULT_TRIALS, 0)?.max(lower);
            Ok(RankValue { value: r, exact: r == cap, method: "probabilistic" })
        }
    }
}

/// The commutative rank, failing unless it can be certified exactly.
pub fn comm_rank_exact(m: &FormMatrix, budget: u64) -> Result<usize> {
    let r = comm_rank(m, CommRankMode::Auto { budget })?;
    if !r.exact {
        return Err(Error::BudgetExceeded("commutative rank could not be certified within the budget".into()));
    }
    Ok(r.value)
}

/// Exact mean of `CR(M[p_d])` over `p_d ∈ F^n`.
pub fn expected_partial_cr(m: &FormMatrix, budget: u64) -> Result<BigRational> {
    if m.d() == 0 {
        return Err(Error::InvalidParameter("partial evaluation needs d ≥ 1".into()));
    }
    let (f, n, d) = (m.field(), m.n(), m.d());
    let count = checked_point_count(f, 1, n, budget)?;
    let ranks = (0..count)
        .into_par_iter()
        .map(|i| {
            let v = point_from_index(f, 1, n, i).pop().unwrap_or_default();
            let part = m.partial_eval(&BTreeMap::from([(d as u8, v)]))?;
            comm_rank_exact(&part, budget)
        })
        .collect::<Result<Vec<_>>>()?;
    let total: u64 = ranks.iter().map(|&r| r as u64).sum();
    Ok(BigRational::new(BigInt::from(total), BigInt::from(count)))
}

/// All subspaces of `F^a`, as reduced row echelon bases, in order of
/// dimension and then pivot set.
pub fn enumerate_subspaces(field: FieldCtx, a: usize, budget: u64) -> Result<Vec<Vec<Vec<FieldElem>>>> {
    let q = field.order();
    let mut out: Vec<Vec<Vec<FieldElem>>> = Vec::new();
    for k in 0..=a {
        for pivots in crate::polyops::subsets(a, k) {
            let free: Vec<(usize, usize)> = pivots
                .iter()
                .enumerate()
                .flat_map(|(i, &pc)| (pc + 1..a).filter(|c| !pivots.contains(c)).map(move |c| (i, c)))
                .collect();
            let combos = u32::try_from(free.len())
                .ok()
                .and_then(|e| q.checked_pow(e))
                .filter(|&c| c <= budget && (out.len() as u64) + c <= budget)
                .ok_or_else(|| Error::BudgetExceeded(format!("too many subspaces of F_{q}^{a}")))?;
            for mut idx in 0..combos {
                let mut basis = vec![vec![field.zero(); a]; k];
                for (i, &pc) in pivots.iter().enumerate() {
                    basis[i][pc] = field.one();
                }
                for &(i, c) in &free {
                    basis[i][c] = field.from_index(idx % q);
                    idx /= q;
                }
                out.push(basis);
            }
        }
    }
    Ok(out)
}

/// Exact partition rank of a matrix of linear forms (`d = 1`): the least
/// `r₁ + r₂` such that some invertible `P, Q` make the bottom-right
/// `(a−r₁)×(b−r₂)` block of `PMQ` vanish.
///
/// For a row space `V ⊆ F^a` of the bottom rows, the best column space is
/// the joint kernel of `v ↦ vᵀM_j` (`M = ∑ x_j M_j`), so the search runs
/// over subspaces `V`. `budget` caps the number of subspaces.
pub fn pr_exact_d1(m: &FormMatrix, budget: u64) -> Result<usize> {
    if m.d() != 1 {
        return Err(Error::InvalidParameter(format!("exact partition rank needs d = 1, got {}", m.d())));
    }
    let (f, a, b, n) = (m.field(), m.rows(), m.cols(), m.n());
    if m.is_zero() {
        return Ok(0);
    }
    let coeff: Vec<ScalarMatrix> = (0..n)
        .map(|j| {
            let mut s = ScalarMatrix::zeros(f, a, b);
            for (r, c, e) in m.entries() {
                s.set(r, c, e.coefficient(&[j as u8]));
            }
            s
        })
        .collect();
    let spaces = enumerate_subspaces(f, a, budget)?;
    let best = spaces
        .par_iter()
        .map(|basis| {
            let k = basis.len();
            if k == 0 {
                return a;
            }
            let mut stacked = Vec::with_capacity(k * n);
            for v in basis {
                for mj in &coeff {
                    let row: Vec<FieldElem> = (0..b)
                        .map(|c| (0..a).fold(f.zero(), |acc, r| f.add(acc, f.mul(v[r], mj.get(r, c)))))
                        .collect();
                    stacked.push(row);
                }
            }
            let r2 = ScalarMatrix::from_rows(f, stacked).expect("rectangular").rank();
            (a - k) + r2
        })
        .min()
        .unwrap_or(0);
    Ok(best.min(a).min(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mform::MultilinearForm;

    fn diag_ab(f: FieldCtx) -> FormMatrix {
        let a = MultilinearForm::var(f, 1, 0, 2);
        let b = MultilinearForm::var(f, 1, 1, 2);
        let z = MultilinearForm::zero(f, &[1], 2);
        FormMatrix::from_entries(f, 1, 2, vec![
            vec![a.clone(), z.clone(), z.clone()],
            vec![z.clone(), b.clone(), z.clone()],
            vec![z.clone(), z, a.add(&b)],
        ])
        .unwrap()
    }

    #[test]
    fn intro_diag_ranks() {
        let f2 = FieldCtx::new(2, 1).unwrap();
        let m = diag_ab(f2);
        assert_eq!(max_rank(&m, MaxRankMode::Exhaustive { budget: 100 }).unwrap().value, 2);
        for mode in [
            CommRankMode::Symbolic,
            CommRankMode::Grid { budget: 1000 },
            CommRankMode::Probabilistic { trials: 40, seed: 0 },
            CommRankMode::default(),
        ] {
            assert_eq!(comm_rank(&m, mode).unwrap().value, 3, "{mode:?}");
        }
        let f3 = FieldCtx::new(3, 1).unwrap();
        assert_eq!(max_rank(&diag_ab(f3), MaxRankMode::Exhaustive { budget: 100 }).unwrap().value, 3);
        assert_eq!(pr_exact_d1(&m, 10_000).unwrap(), 3);
    }

    #[test]
    fn average_rank() {
        let f2 = FieldCtx::new(2, 1).unwrap();
        let m = diag_ab(f2);
        assert_eq!(avg_rank(&m, 100).unwrap(), BigRational::new(3.into(), 2.into()));
        let x = FormMatrix::from_entries(f2, 1, 1, vec![vec![MultilinearForm::var(f2, 1, 0, 1)]]).unwrap();
        assert_eq!(avg_rank(&x, 100).unwrap(), BigRational::new(1.into(), 2.into()));
        let z = FormMatrix::zeros(f2, 2, 2, 3, 3);
        assert_eq!(avg_rank(&z, 100).unwrap(), BigRational::new(0.into(), 1.into()));
        assert!(avg_rank(&z, 10).is_err());
    }

    #[test]
    fn subspace_counts() {
        // Number of subspaces of F_2^3 is 1 + 7 + 7 + 1.
        let f = FieldCtx::new(2, 1).unwrap();
        assert_eq!(enumerate_subspaces(f, 3, 1000).unwrap().len(), 16);
        let f3 = FieldCtx::new(3, 1).unwrap();
        assert_eq!(enumerate_subspaces(f3, 2, 1000).unwrap().len(), 6);
    }
}
