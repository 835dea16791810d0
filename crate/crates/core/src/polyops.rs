//! Multiplicities of polynomials at points, the multiplicity form of the
//! Schwartz–Zippel bound, and symbolic determinants.

use crate::error::{Error, Result};
use crate::field::FieldElem;
use crate::mform::Poly;
use crate::mlmatrix::FormMatrix;

/// Order of vanishing of `f` at `p`: the minimum total degree of `f(x + p)`.
/// `None` stands for `+∞` and is returned only for the zero polynomial.
pub fn mult(f: &Poly, p: &[FieldElem]) -> Result<Option<u32>> {
    Ok(f.shift(p)?.min_degree())
}

/// Both sides of `∑_{p∈Sⁿ} mult(f,p) ≤ deg(f)·|S|^{n-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultSzReport {
    pub lhs: u64,
    pub rhs: u64,
    pub holds: bool,
}

/// Largest number of points [`multsz_check`] will enumerate.
pub const MULTSZ_BUDGET: u64 = 1 << 20;

/// Evaluates both sides of the multiplicity Schwartz–Zippel inequality for a
/// nonzero `f` over the grid `Sⁿ`.
pub fn multsz_check(f: &Poly, s: &[FieldElem]) -> Result<MultSzReport> {
    let deg = f.total_degree().ok_or_else(|| Error::InvalidParameter("the zero polynomial".into()))? as u64;
    let field = f.field();
    if s.iter().any(|&x| !field.contains(x)) {
        return Err(Error::ContextMismatch);
    }
    let n = f.nvars();
    let size = s.len() as u64;
    let count = u32::try_from(n)
        .ok()
        .and_then(|e| size.checked_pow(e))
        .filter(|&c| c <= MULTSZ_BUDGET)
        .ok_or_else(|| Error::BudgetExceeded(format!("{size}^{n} grid points")))?;
    let mut lhs = 0u64;
    let mut point = vec![field.zero(); n];
    for idx in 0..count {
        let mut r = idx;
        for slot in point.iter_mut().rev() {
            *slot = s[(r % size) as usize];
            r /= size;
        }
        lhs += mult(f, &point)?.expect("f is nonzero") as u64;
    }
    let rhs = if n == 0 { 0 } else { deg * size.pow(n as u32 - 1) };
    Ok(MultSzReport { lhs, rhs, holds: lhs <= rhs })
}

/// Entries of a form matrix as polynomials in `d·n` variables.
pub fn matrix_polys(m: &FormMatrix) -> Vec<Vec<Poly>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j).to_poly(m.d())).collect()).collect()
}

/// Determinant of the submatrix on `rows × cols` by Laplace expansion
/// memoized over column subsets.
pub fn minor_poly(entries: &[Vec<Poly>], rows: &[usize], cols: &[usize]) -> Result<Poly> {
    let k = rows.len();
    if cols.len() != k {
        return Err(Error::DimensionMismatch("minor of a non-square selection".into()));
    }
    if k > 20 {
        return Err(Error::BudgetExceeded(format!("{k}×{k} symbolic determinant")));
    }
    let Some(first) = entries.first().and_then(|r| r.first()) else {
        return Err(Error::DimensionMismatch("empty matrix".into()));
    };
    let (field, nvars) = (first.field(), first.nvars());
    // dp[mask] = det of rows[..|mask|] × (cols selected by mask)
    let mut dp: Vec<Poly> = vec![Poly::zero(field, nvars); 1 << k];
    dp[0] = Poly::one(field, nvars);
    for mask in 1usize..1 << k {
        let row = rows[mask.count_ones() as usize - 1];
        let mut acc = Poly::zero(field, nvars);
        for j in 0..k {
            if mask >> j & 1 == 0 {
                continue;
            }
            let rest = mask & !(1 << j);
            if dp[rest].is_zero() {
                continue;
            }
            let e = &entries[row][cols[j]];
            if e.is_zero() {
                continue;
            }
            let term = e.mul(&dp[rest]);
            // The entry sits in the last row; its column position within the
            // selection is the number of chosen columns before `j`.
            let after = (rest >> j).count_ones();
            acc = if after % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
        }
        dp[mask] = acc;
    }
    Ok(dp.pop().unwrap())
}

/// Symbolic determinant of a square polynomial matrix.
pub fn det_poly(entries: &[Vec<Poly>]) -> Result<Poly> {
    let a = entries.len();
    if entries.iter().any(|r| r.len() != a) {
        return Err(Error::DimensionMismatch("determinant of a non-square matrix".into()));
    }
    let idx: Vec<usize> = (0..a).collect();
    minor_poly(entries, &idx, &idx)
}

/// Symbolic determinant of a square form matrix.
pub fn det_form_matrix(m: &FormMatrix) -> Result<Poly> {
    if m.rows() != m.cols() {
        return Err(Error::DimensionMismatch("determinant of a non-square matrix".into()));
    }
    if m.rows() == 0 {
        return Ok(Poly::one(m.field(), m.d() * m.n()));
    }
    det_poly(&matrix_polys(m))
}

/// Lexicographically ordered `k`-subsets of `0..n`.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Whether some `r×r` minor of the polynomial matrix is nonzero.
pub fn has_nonzero_minor(entries: &[Vec<Poly>], r: usize) -> Result<bool> {
    if r == 0 {
        return Ok(true);
    }
    let a = entries.len();
    let b = entries.first().map_or(0, Vec::len);
    if r > a.min(b) {
        return Ok(false);
    }
    for rows in subsets(a, r) {
        for cols in subsets(b, r) {
            if !minor_poly(entries, &rows, &cols)?.is_zero() {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldCtx;

    #[test]
    fn multiplicity_examples() {
        let f = FieldCtx::new(2, 1).unwrap();
        let xy = Poly::var(f, 2, 0).mul(&Poly::var(f, 2, 1));
        let (z, o) = (f.zero(), f.one());
        assert_eq!(mult(&xy, &[z, z]).unwrap(), Some(2));
        assert_eq!(mult(&xy, &[o, z]).unwrap(), Some(1));
        assert_eq!(mult(&xy, &[o, o]).unwrap(), Some(0));
        assert_eq!(mult(&Poly::zero(f, 2), &[o, o]).unwrap(), None);
    }

    #[test]
    fn multsz_examples() {
        let f = FieldCtx::new(2, 1).unwrap();
        let xy = Poly::var(f, 2, 0).mul(&Poly::var(f, 2, 1));
        let all: Vec<_> = f.elements().collect();
        assert_eq!(multsz_check(&xy, &all).unwrap(), MultSzReport { lhs: 4, rhs: 4, holds: true });
        let c = Poly::one(f, 2);
        assert_eq!(multsz_check(&c, &all).unwrap(), MultSzReport { lhs: 0, rhs: 0, holds: true });
        let f3 = FieldCtx::new(3, 1).unwrap();
        let x = Poly::var(f3, 1, 0);
        let all3: Vec<_> = f3.elements().collect();
        assert_eq!(multsz_check(&x, &all3).unwrap(), MultSzReport { lhs: 1, rhs: 1, holds: true });
        assert!(multsz_check(&Poly::zero(f, 2), &all).is_err());
    }

    #[test]
    fn determinants() {
        let f = FieldCtx::new(3, 1).unwrap();
        let a = Poly::var(f, 2, 0);
        let b = Poly::var(f, 2, 1);
        let z = Poly::zero(f, 2);
        let m = vec![vec![a.clone(), z.clone(), z.clone()], vec![z.clone(), b.clone(), z.clone()], vec![
            z.clone(),
            z.clone(),
            a.add(&b),
        ]];
        assert_eq!(det_poly(&m).unwrap(), a.mul(&b).mul(&a.add(&b)));
        let one = Poly::one(f, 2);
        let id = vec![vec![one.clone(), z.clone()], vec![z.clone(), one.clone()]];
        assert_eq!(det_poly(&id).unwrap(), one);
        // [[a, b], [a, b]] is singular; [[a, b], [b, a]] has det a² − b².
        assert!(det_poly(&[vec![a.clone(), b.clone()], vec![a.clone(), b.clone()]]).unwrap().is_zero());
        let d = det_poly(&[vec![a.clone(), b.clone()], vec![b.clone(), a.clone()]]).unwrap();
        assert_eq!(d, a.pow(2).sub(&b.pow(2)));
        assert!(det_poly(&[vec![a.clone(), b]]).is_err());
    }

    #[test]
    fn subset_enumeration() {
        assert_eq!(subsets(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(subsets(2, 0), vec![Vec::<usize>::new()]);
    }
}
