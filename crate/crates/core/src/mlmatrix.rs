//! Scalar matrices and matrices of multilinear forms.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::{Extension, FieldCtx, FieldElem};
use crate::mform::MultilinearForm;

/// Rank together with the pivot rows and columns found by elimination.
///
/// Pivots are listed in discovery order; `pivot_rows[i]` was paired with
/// `pivot_cols[i]`. Every prefix of the two lists selects an invertible
/// submatrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankInfo {
    pub rank: usize,
    pub pivot_rows: Vec<usize>,
    pub pivot_cols: Vec<usize>,
}

/// A dense matrix over a finite field.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ScalarMatrix {
    field: FieldCtx,
    rows: usize,
    cols: usize,
    data: Vec<FieldElem>,
}

impl ScalarMatrix {
    pub fn zeros(field: FieldCtx, rows: usize, cols: usize) -> Self {
        ScalarMatrix { field, rows, cols, data: vec![field.zero(); rows * cols] }
    }

    pub fn identity(field: FieldCtx, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_rows(field: FieldCtx, rows: Vec<Vec<FieldElem>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        if rows.iter().flatten().any(|&x| !field.contains(x)) {
            return Err(Error::ContextMismatch);
        }
        Ok(ScalarMatrix { field, rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// Builds a matrix from small integers reduced into the prime subfield.
    pub fn from_ints(field: FieldCtx, rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(field, rows.iter().map(|r| r.iter().map(|&v| field.from_int(v)).collect()).collect())
    }

    pub fn field(&self) -> FieldCtx {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> FieldElem {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: FieldElem) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[FieldElem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<FieldElem>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| self.field.is_zero(x))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut s = Self::zeros(self.field, rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                s.set(a, b, self.get(i, j));
            }
        }
        s
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.field != other.field {
            return Err(Error::ContextMismatch);
        }
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}×{} times {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = self.field;
        let mut out = Self::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if f.is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let v = f.add(out.get(i, j), f.mul(a, other.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    fn zip_with(&self, other: &Self, op: impl Fn(FieldElem, FieldElem) -> FieldElem) -> Result<Self> {
        if self.field != other.field {
            return Err(Error::ContextMismatch);
        }
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch("shapes differ".into()));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| op(a, b)).collect();
        Ok(ScalarMatrix { data, ..self.clone() })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let f = self.field;
        self.zip_with(other, |a, b| f.add(a, b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let f = self.field;
        self.zip_with(other, |a, b| f.sub(a, b))
    }

    /// Rank and pivots by row-by-row elimination: each row is reduced against
    /// the pivot rows found so far, and if nonzero its first nonzero column
    /// becomes a new pivot.
    pub fn rank_info(&self) -> RankInfo {
        let f = self.field;
        let mut basis: Vec<(usize, Vec<FieldElem>)> = Vec::new();
        let mut pivot_rows = Vec::new();
        for i in 0..self.rows {
            let mut v = self.row(i).to_vec();
            for (c, b) in &basis {
                let x = v[*c];
                if !f.is_zero(x) {
                    for (vj, &bj) in v.iter_mut().zip(b) {
                        *vj = f.sub(*vj, f.mul(x, bj));
                    }
                }
            }
            if let Some(c) = v.iter().position(|&x| !f.is_zero(x)) {
                let inv = f.inv(v[c]).expect("nonzero pivot");
                for x in v.iter_mut() {
                    *x = f.mul(*x, inv);
                }
                basis.push((c, v));
                pivot_rows.push(i);
                if basis.len() == self.cols {
                    break;
                }
            }
        }
        RankInfo { rank: basis.len(), pivot_rows, pivot_cols: basis.into_iter().map(|(c, _)| c).collect() }
    }

    pub fn rank(&self) -> usize {
        let f = self.field;
        let mut m = self.to_rows();
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(piv) = (rank..self.rows).find(|&r| !f.is_zero(m[r][col])) else {
                continue;
            };
            m.swap(rank, piv);
            let inv = f.inv(m[rank][col]).expect("nonzero pivot");
            for r in rank + 1..self.rows {
                let x = m[r][col];
                if f.is_zero(x) {
                    continue;
                }
                let factor = f.mul(x, inv);
                for j in col..self.cols {
                    let t = f.mul(factor, m[rank][j]);
                    m[r][j] = f.sub(m[r][j], t);
                }
            }
            rank += 1;
            if rank == self.rows {
                break;
            }
        }
        rank
    }

    /// Basis of the right kernel `{x : Mx = 0}`, one vector per free column
    /// of the reduced row echelon form.
    pub fn kernel(&self) -> Vec<Vec<FieldElem>> {
        let f = self.field;
        let mut m = self.to_rows();
        let mut pivots = Vec::new();
        for col in 0..self.cols {
            let r = pivots.len();
            let Some(piv) = (r..self.rows).find(|&i| !f.is_zero(m[i][col])) else {
                continue;
            };
            m.swap(r, piv);
            let s = f.inv(m[r][col]).expect("nonzero pivot");
            for x in m[r].iter_mut() {
                *x = f.mul(*x, s);
            }
            for i in 0..self.rows {
                let x = m[i][col];
                if i == r || f.is_zero(x) {
                    continue;
                }
                for j in 0..self.cols {
                    let t = f.mul(x, m[r][j]);
                    m[i][j] = f.sub(m[i][j], t);
                }
            }
            pivots.push(col);
        }
        (0..self.cols)
            .filter(|c| !pivots.contains(c))
            .map(|free| {
                let mut v = vec![f.zero(); self.cols];
                v[free] = f.one();
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = f.neg(m[r][free]);
                }
                v
            })
            .collect()
    }

    /// Inverse by Gauss–Jordan elimination.
    pub fn inverse(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch("inverse of a non-square matrix".into()));
        }
        let f = self.field;
        let n = self.rows;
        let mut a = self.to_rows();
        let mut inv = Self::identity(f, n).to_rows();
        for col in 0..n {
            let piv = (col..n).find(|&r| !f.is_zero(a[r][col])).ok_or(Error::Singular)?;
            a.swap(col, piv);
            inv.swap(col, piv);
            let s = f.inv(a[col][col]).expect("nonzero pivot");
            for j in 0..n {
                a[col][j] = f.mul(a[col][j], s);
                inv[col][j] = f.mul(inv[col][j], s);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let x = a[r][col];
                if f.is_zero(x) {
                    continue;
                }
                for j in 0..n {
                    let t = f.mul(x, a[col][j]);
                    a[r][j] = f.sub(a[r][j], t);
                    let t = f.mul(x, inv[col][j]);
                    inv[r][j] = f.sub(inv[r][j], t);
                }
            }
        }
        Self::from_rows(f, inv)
    }

    /// Determinant by elimination.
    pub fn det(&self) -> Result<FieldElem> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch("determinant of a non-square matrix".into()));
        }
        let f = self.field;
        let n = self.rows;
        let mut a = self.to_rows();
        let mut det = f.one();
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| !f.is_zero(a[r][col])) else {
                return Ok(f.zero());
            };
            if piv != col {
                a.swap(col, piv);
                det = f.neg(det);
            }
            det = f.mul(det, a[col][col]);
            let inv = f.inv(a[col][col]).expect("nonzero pivot");
            for r in col + 1..n {
                let factor = f.mul(a[r][col], inv);
                if f.is_zero(factor) {
                    continue;
                }
                for j in col..n {
                    let t = f.mul(factor, a[col][j]);
                    a[r][j] = f.sub(a[r][j], t);
                }
            }
        }
        Ok(det)
    }

    /// The matrix as a [`FormMatrix`] with `d = 0`.
    pub fn to_form_matrix(&self, n: usize) -> FormMatrix {
        let mut m = FormMatrix::zeros(self.field, 0, n, self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.entries[i * self.cols + j] = MultilinearForm::scalar(self.field, n, self.get(i, j));
            }
        }
        m
    }
}

impl fmt::Debug for ScalarMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ScalarMatrix {}×{} over {:?}", self.rows, self.cols, self.field)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|&x| crate::mform::format_coeff(self.field, x)).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// An `a×b` matrix whose entries are multilinear forms on blocks `1..=d`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FormMatrix {
    field: FieldCtx,
    d: usize,
    n: usize,
    rows: usize,
    cols: usize,
    entries: Vec<MultilinearForm>,
}

pub(crate) fn full_blocks(d: usize) -> Vec<u8> {
    (1..=d as u8).collect()
}

impl FormMatrix {
    pub fn zeros(field: FieldCtx, d: usize, n: usize, rows: usize, cols: usize) -> Self {
        let blocks = full_blocks(d);
        FormMatrix { field, d, n, rows, cols, entries: vec![MultilinearForm::zero(field, &blocks, n); rows * cols] }
    }

    pub fn from_entries(field: FieldCtx, d: usize, n: usize, entries: Vec<Vec<MultilinearForm>>) -> Result<Self> {
        let rows = entries.len();
        let cols = entries.first().map_or(0, Vec::len);
        let mut m = Self::zeros(field, d, n, rows, cols);
        for (i, row) in entries.into_iter().enumerate() {
            if row.len() != cols {
                return Err(Error::DimensionMismatch("ragged rows".into()));
            }
            for (j, e) in row.into_iter().enumerate() {
                m.set(i, j, e)?;
            }
        }
        Ok(m)
    }

    pub fn field(&self) -> FieldCtx {
        self.field
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &MultilinearForm {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, f: MultilinearForm) -> Result<()> {
        if i >= self.rows || j >= self.cols {
            return Err(Error::DimensionMismatch(format!("entry ({i},{j}) out of range")));
        }
        if f.field() != self.field {
            return Err(Error::ContextMismatch);
        }
        if f.n() != self.n || f.blocks() != full_blocks(self.d).as_slice() {
            return Err(Error::BlockMismatch(format!(
                "entry on blocks {:?} (n = {}) in a matrix with d = {}, n = {}",
                f.blocks(),
                f.n(),
                self.d,
                self.n
            )));
        }
        self.entries[i * self.cols + j] = f;
        Ok(())
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &MultilinearForm)> + '_ {
        self.entries.iter().enumerate().map(move |(k, f)| (k / self.cols, k % self.cols, f))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(MultilinearForm::is_zero)
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::ContextMismatch);
        }
        if (self.d, self.n, self.rows, self.cols) != (other.d, other.n, other.rows, other.cols) {
            return Err(Error::DimensionMismatch(format!(
                "matrix shapes differ: d={}, n={}, {}×{} vs d={}, n={}, {}×{}",
                self.d, self.n, self.rows, self.cols, other.d, other.n, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a.add(b)).collect();
        Ok(FormMatrix { entries, ..self.clone() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a.sub(b)).collect();
        Ok(FormMatrix { entries, ..self.clone() })
    }

    /// Adds `u ⊗ v` in place.
    pub fn add_outer(&mut self, u: &[MultilinearForm], v: &[MultilinearForm]) -> Result<()> {
        if u.len() != self.rows || v.len() != self.cols {
            return Err(Error::DimensionMismatch("outer product shape".into()));
        }
        for (i, ui) in u.iter().enumerate() {
            if ui.is_zero() {
                continue;
            }
            for (j, vj) in v.iter().enumerate() {
                if vj.is_zero() {
                    continue;
                }
                let prod = ui.mul_disjoint(vj)?;
                if prod.blocks() != full_blocks(self.d).as_slice() || prod.field() != self.field {
                    return Err(Error::BlockMismatch("outer product does not cover all blocks".into()));
                }
                let k = i * self.cols + j;
                self.entries[k].add_scaled(&prod, self.field.one());
            }
        }
        Ok(())
    }

    fn check_point(&self, point: &[Vec<FieldElem>]) -> Result<()> {
        if point.len() != self.d || point.iter().any(|v| v.len() != self.n) {
            return Err(Error::DimensionMismatch(format!(
                "expected {} vectors of length {}",
                self.d, self.n
            )));
        }
        Ok(())
    }

    /// Entrywise evaluation `M(p)`.
    pub fn eval(&self, point: &[Vec<FieldElem>]) -> Result<ScalarMatrix> {
        self.check_point(point)?;
        Ok(self.eval_unchecked(point))
    }

    pub(crate) fn eval_unchecked(&self, point: &[Vec<FieldElem>]) -> ScalarMatrix {
        let vecs: Vec<&[FieldElem]> = point.iter().map(Vec::as_slice).collect();
        let data = self.entries.iter().map(|e| e.eval_unchecked(&vecs)).collect();
        ScalarMatrix { field: self.field, rows: self.rows, cols: self.cols, data }
    }

    /// `M[p_T]`: substitutes the given blocks and renumbers the remaining
    /// blocks consecutively from 1, preserving their order.
    pub fn partial_eval(&self, assignment: &BTreeMap<u8, Vec<FieldElem>>) -> Result<Self> {
        if assignment.keys().any(|&b| b == 0 || b as usize > self.d) {
            return Err(Error::BlockMismatch(format!("assignment blocks outside 1..={}", self.d)));
        }
        let rest: Vec<u8> = full_blocks(self.d).into_iter().filter(|b| !assignment.contains_key(b)).collect();
        let mut out = Self::zeros(self.field, rest.len(), self.n, self.rows, self.cols);
        for (k, e) in self.entries.iter().enumerate() {
            let g = e.partial_eval(assignment)?;
            out.entries[k] = g.relabel(|b| rest.iter().position(|&x| x == b).unwrap() as u8 + 1)?;
        }
        Ok(out)
    }

    /// Row and column sets of an invertible `r×r` submatrix of `M(p)`: the
    /// first `r` pivots of [`ScalarMatrix::rank_info`].
    pub fn find_invertible_submatrix(&self, point: &[Vec<FieldElem>], r: usize) -> Result<(Vec<usize>, Vec<usize>)> {
        let info = self.eval(point)?.rank_info();
        if info.rank < r {
            return Err(Error::InvalidParameter(format!("rank of M(p) is {} < {r}", info.rank)));
        }
        Ok((info.pivot_rows[..r].to_vec(), info.pivot_cols[..r].to_vec()))
    }

    /// Applies a coefficient map to every entry, moving the matrix to `target`.
    pub fn map_coeffs(&self, target: FieldCtx, map: impl Fn(FieldElem) -> FieldElem) -> Self {
        let entries = self.entries.iter().map(|e| e.map_coeffs(target, &map)).collect();
        FormMatrix { field: target, entries, ..self.clone() }
    }

    pub fn try_map_coeffs(&self, target: FieldCtx, map: impl Fn(FieldElem) -> Result<FieldElem>) -> Result<Self> {
        let entries = self.entries.iter().map(|e| e.try_map_coeffs(target, &map)).collect::<Result<_>>()?;
        Ok(FormMatrix { field: target, entries, ..self.clone() })
    }

    /// The same matrix with coefficients embedded in an extension field.
    pub fn embed(&self, ext: &Extension) -> Result<Self> {
        if ext.base() != self.field {
            return Err(Error::NotAnExtension(format!("{:?} is not the base of the extension", self.field)));
        }
        Ok(self.map_coeffs(ext.ext(), |c| ext.embed(c)))
    }

    /// Pulls a matrix with coefficients in the embedded base field back down.
    pub fn restrict(&self, ext: &Extension) -> Result<Self> {
        if ext.ext() != self.field {
            return Err(Error::NotAnExtension(format!("{:?} is not the extension field", self.field)));
        }
        self.try_map_coeffs(ext.base(), |c| ext.restrict(c))
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut out = Self::zeros(self.field, self.d, self.n, rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out.entries[a * cols.len() + b] = self.get(i, j).clone();
            }
        }
        out
    }

    /// `P·M` for a scalar matrix `P`.
    pub fn left_mul(&self, p: &ScalarMatrix) -> Result<Self> {
        if p.field() != self.field {
            return Err(Error::ContextMismatch);
        }
        if p.cols() != self.rows {
            return Err(Error::DimensionMismatch("left factor has the wrong width".into()));
        }
        let mut out = Self::zeros(self.field, self.d, self.n, p.rows(), self.cols);
        for i in 0..p.rows() {
            for k in 0..self.rows {
                let c = p.get(i, k);
                if self.field.is_zero(c) {
                    continue;
                }
                for j in 0..self.cols {
                    out.entries[i * self.cols + j].add_scaled(self.get(k, j), c);
                }
            }
        }
        Ok(out)
    }

    /// `M·Q` for a scalar matrix `Q`.
    pub fn right_mul(&self, q: &ScalarMatrix) -> Result<Self> {
        if q.field() != self.field {
            return Err(Error::ContextMismatch);
        }
        if q.rows() != self.cols {
            return Err(Error::DimensionMismatch("right factor has the wrong height".into()));
        }
        let mut out = Self::zeros(self.field, self.d, self.n, self.rows, q.cols());
        for i in 0..self.rows {
            for k in 0..self.cols {
                let e = self.get(i, k);
                if e.is_zero() {
                    continue;
                }
                for j in 0..q.cols() {
                    let c = q.get(k, j);
                    if !self.field.is_zero(c) {
                        out.entries[i * q.cols() + j].add_scaled(e, c);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Total number of stored nonzero coefficients.
    pub fn num_terms(&self) -> usize {
        self.entries.iter().map(MultilinearForm::num_terms).sum()
    }
}

impl fmt::Display for FormMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = self.entries.iter().map(|e| e.to_string()).collect();
        let width = cells.iter().map(|c| c.chars().count()).max().unwrap_or(1);
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| {
                    let c = &cells[i * self.cols + j];
                    format!("{c}{}", " ".repeat(width - c.chars().count()))
                })
                .collect();
            writeln!(f, "[ {} ]", row.join(" | "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for FormMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FormMatrix {}×{} d={} n={} over {:?}", self.rows, self.cols, self.d, self.n, self.field)?;
        write!(f, "{self}")
    }
}
