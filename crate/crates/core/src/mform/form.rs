use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};
use crate::mform::Poly;
use crate::mlmatrix::ScalarMatrix;

/// A multilinear form in `M_S`: separately linear in each block `x_s`, `s ∈ S`.
///
/// Terms are keyed by index tuples aligned with `blocks` (0-based variable
/// indices). Zero coefficients are never stored, so structural equality is
/// mathematical equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultilinearForm {
    field: FieldCtx,
    blocks: Vec<u8>,
    n: usize,
    terms: BTreeMap<Vec<u8>, FieldElem>,
}

fn check_blocks(blocks: &[u8]) -> Result<()> {
    if blocks.iter().any(|&b| b == 0) {
        return Err(Error::BlockMismatch("block labels start at 1".into()));
    }
    if blocks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BlockMismatch(format!("blocks {blocks:?} are not strictly increasing")));
    }
    Ok(())
}

impl MultilinearForm {
    /// The zero form on `blocks` (sorted, distinct, positive labels).
    pub fn zero(field: FieldCtx, blocks: &[u8], n: usize) -> Self {
        debug_assert!(check_blocks(blocks).is_ok());
        MultilinearForm { field, blocks: blocks.to_vec(), n, terms: BTreeMap::new() }
    }

    /// A form on the empty block set, i.e. a scalar.
    pub fn scalar(field: FieldCtx, n: usize, c: FieldElem) -> Self {
        let mut f = Self::zero(field, &[], n);
        if !field.is_zero(c) {
            f.terms.insert(Vec::new(), c);
        }
        f
    }

    /// The linear form `∑_j coeffs[j]·x_{block,j}`.
    pub fn linear(field: FieldCtx, block: u8, coeffs: &[FieldElem]) -> Self {
        let mut f = Self::zero(field, &[block], coeffs.len());
        for (j, &c) in coeffs.iter().enumerate() {
            if !field.is_zero(c) {
                f.terms.insert(vec![j as u8], c);
            }
        }
        f
    }

    /// The single variable `x_{block,j}` (0-based `j`).
    pub fn var(field: FieldCtx, block: u8, j: usize, n: usize) -> Self {
        let mut f = Self::zero(field, &[block], n);
        f.terms.insert(vec![j as u8], field.one());
        f
    }

    /// Builds a form from `(index tuple, coefficient)` pairs; repeated tuples
    /// are summed and zeros dropped.
    pub fn from_terms<I>(field: FieldCtx, blocks: &[u8], n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, FieldElem)>,
    {
        check_blocks(blocks)?;
        if n == 0 || n > u8::MAX as usize + 1 {
            return Err(Error::DimensionMismatch(format!("unsupported n = {n}")));
        }
        let mut f = Self::zero(field, blocks, n);
        for (idx, c) in terms {
            if idx.len() != blocks.len() {
                return Err(Error::BlockMismatch(format!(
                    "index tuple {idx:?} does not match blocks {blocks:?}"
                )));
            }
            if idx.iter().any(|&i| i >= n) {
                return Err(Error::DimensionMismatch(format!("index {idx:?} out of range for n = {n}")));
            }
            if !field.contains(c) {
                return Err(Error::ContextMismatch);
            }
            let key: Vec<u8> = idx.iter().map(|&i| i as u8).collect();
            f.accumulate(key, c);
        }
        Ok(f)
    }

    #[inline]
    fn accumulate(&mut self, key: Vec<u8>, c: FieldElem) {
        if self.field.is_zero(c) {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = self.field.add(*e.get(), c);
                if self.field.is_zero(s) {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn field(&self) -> FieldCtx {
        self.field
    }

    pub fn blocks(&self) -> &[u8] {
        &self.blocks
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in canonical (lexicographic index) order.
    pub fn terms(&self) -> impl Iterator<Item = (&[u8], FieldElem)> + '_ {
        self.terms.iter().map(|(k, &c)| (k.as_slice(), c))
    }

    pub fn coefficient(&self, idx: &[u8]) -> FieldElem {
        self.terms.get(idx).copied().unwrap_or_default()
    }

    /// The value of a form on the empty block set.
    pub fn scalar_value(&self) -> FieldElem {
        debug_assert!(self.blocks.is_empty());
        self.coefficient(&[])
    }

    fn assert_same_space(&self, other: &Self) {
        assert!(
            self.field == other.field && self.blocks == other.blocks && self.n == other.n,
            "forms live in different spaces: {:?}/{:?} vs {:?}/{:?}",
            self.field,
            self.blocks,
            other.field,
            other.blocks
        );
    }

    /// `self += c·other`. Panics if the forms live in different spaces.
    pub fn add_scaled(&mut self, other: &Self, c: FieldElem) {
        self.assert_same_space(other);
        if self.field.is_zero(c) {
            return;
        }
        let one = self.field.one();
        for (k, &v) in &other.terms {
            let v = if c == one { v } else { self.field.mul(v, c) };
            self.accumulate(k.clone(), v);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, self.field.one());
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, self.field.from_int(-1));
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(self.field.from_int(-1))
    }

    pub fn scale(&self, c: FieldElem) -> Self {
        if self.field.is_zero(c) {
            return Self::zero(self.field, &self.blocks, self.n);
        }
        let terms = self.terms.iter().map(|(k, &v)| (k.clone(), self.field.mul(v, c))).collect();
        MultilinearForm { terms, ..self.clone_shape() }
    }

    fn clone_shape(&self) -> Self {
        Self::zero(self.field, &self.blocks, self.n)
    }

    /// Evaluates at one vector per block, aligned with [`MultilinearForm::blocks`].
    pub fn eval(&self, vectors: &[&[FieldElem]]) -> Result<FieldElem> {
        if vectors.len() != self.blocks.len() {
            return Err(Error::BlockMismatch(format!(
                "form on {:?} evaluated with {} vectors",
                self.blocks,
                vectors.len()
            )));
        }
        if vectors.iter().any(|v| v.len() != self.n) {
            return Err(Error::DimensionMismatch(format!("expected vectors of length {}", self.n)));
        }
        Ok(self.eval_unchecked(vectors))
    }

    pub(crate) fn eval_unchecked(&self, vectors: &[&[FieldElem]]) -> FieldElem {
        let f = self.field;
        let mut acc = f.zero();
        for (idx, &c) in &self.terms {
            let mut t = c;
            for (pos, &i) in idx.iter().enumerate() {
                t = f.mul(t, vectors[pos][i as usize]);
                if f.is_zero(t) {
                    break;
                }
            }
            acc = f.add(acc, t);
        }
        acc
    }

    /// Evaluates at a full point indexed by block label (`point[s-1]` is the
    /// vector for block `s`).
    pub fn eval_point(&self, point: &[Vec<FieldElem>]) -> Result<FieldElem> {
        let mut vectors = Vec::with_capacity(self.blocks.len());
        for &b in &self.blocks {
            let v = point
                .get(b as usize - 1)
                .ok_or_else(|| Error::BlockMismatch(format!("point has no vector for block {b}")))?;
            vectors.push(v.as_slice());
        }
        self.eval(&vectors)
    }

    /// Substitutes `x_t = p_t` for every block `t` in the assignment; the
    /// result lives on the remaining blocks.
    pub fn partial_eval(&self, assignment: &BTreeMap<u8, Vec<FieldElem>>) -> Result<Self> {
        for (b, v) in assignment {
            if !self.blocks.contains(b) {
                return Err(Error::BlockMismatch(format!("block {b} not in {:?}", self.blocks)));
            }
            if v.len() != self.n {
                return Err(Error::DimensionMismatch(format!("expected vectors of length {}", self.n)));
            }
        }
        if assignment.is_empty() {
            return Ok(self.clone());
        }
        let f = self.field;
        let fixed: Vec<Option<&Vec<FieldElem>>> = self.blocks.iter().map(|b| assignment.get(b)).collect();
        let rest: Vec<u8> = self.blocks.iter().copied().filter(|b| !assignment.contains_key(b)).collect();
        let mut out = Self::zero(f, &rest, self.n);
        for (idx, &c) in &self.terms {
            let mut t = c;
            let mut key = Vec::with_capacity(rest.len());
            for (pos, &i) in idx.iter().enumerate() {
                match fixed[pos] {
                    Some(v) => t = f.mul(t, v[i as usize]),
                    None => key.push(i),
                }
            }
            out.accumulate(key, t);
        }
        Ok(out)
    }

    /// Product of forms on disjoint block sets.
    pub fn mul_disjoint(&self, other: &Self) -> Result<Self> {
        if self.field != other.field {
            return Err(Error::ContextMismatch);
        }
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!("n = {} vs {}", self.n, other.n)));
        }
        if self.blocks.iter().any(|b| other.blocks.contains(b)) {
            return Err(Error::BlockMismatch(format!(
                "blocks {:?} and {:?} overlap",
                self.blocks, other.blocks
            )));
        }
        Ok(self.mul_disjoint_unchecked(other))
    }

    pub(crate) fn mul_disjoint_unchecked(&self, other: &Self) -> Self {
        let f = self.field;
        let mut blocks: Vec<u8> = self.blocks.iter().chain(&other.blocks).copied().collect();
        blocks.sort_unstable();
        let mut out = Self::zero(f, &blocks, self.n);
        if self.is_zero() || other.is_zero() {
            return out;
        }
        // For each merged position: (from self?, position in source).
        let plan: Vec<(bool, usize)> = blocks
            .iter()
            .map(|b| match self.blocks.iter().position(|x| x == b) {
                Some(i) => (true, i),
                None => (false, other.blocks.iter().position(|x| x == b).unwrap()),
            })
            .collect();
        for (i1, &c1) in &self.terms {
            for (i2, &c2) in &other.terms {
                let key: Vec<u8> = plan.iter().map(|&(mine, pos)| if mine { i1[pos] } else { i2[pos] }).collect();
                out.accumulate(key, f.mul(c1, c2));
            }
        }
        out
    }

    /// Replaces `x_block` by `L·x_block` for an invertible `n×n` matrix `L`.
    pub fn substitute_linear(&self, block: u8, l: &ScalarMatrix) -> Result<Self> {
        let pos = self
            .blocks
            .iter()
            .position(|&b| b == block)
            .ok_or_else(|| Error::BlockMismatch(format!("block {block} not in {:?}", self.blocks)))?;
        if l.field() != self.field {
            return Err(Error::ContextMismatch);
        }
        if l.rows() != self.n || l.cols() != self.n {
            return Err(Error::DimensionMismatch(format!("substitution must be {0}×{0}", self.n)));
        }
        if l.rank_info().rank != self.n {
            return Err(Error::Singular);
        }
        let f = self.field;
        let mut out = self.clone_shape();
        for (idx, &c) in &self.terms {
            let j = idx[pos] as usize;
            for k in 0..self.n {
                let lk = l.get(j, k);
                if f.is_zero(lk) {
                    continue;
                }
                let mut key = idx.clone();
                key[pos] = k as u8;
                out.accumulate(key, f.mul(c, lk));
            }
        }
        Ok(out)
    }

    /// Renames block labels; `map` must be injective on the blocks.
    pub fn relabel(&self, map: impl Fn(u8) -> u8) -> Result<Self> {
        let renamed: Vec<u8> = self.blocks.iter().map(|&b| map(b)).collect();
        let mut order: Vec<usize> = (0..renamed.len()).collect();
        order.sort_by_key(|&i| renamed[i]);
        let blocks: Vec<u8> = order.iter().map(|&i| renamed[i]).collect();
        check_blocks(&blocks)?;
        let mut out = Self::zero(self.field, &blocks, self.n);
        for (idx, &c) in &self.terms {
            let key: Vec<u8> = order.iter().map(|&i| idx[i]).collect();
            out.terms.insert(key, c);
        }
        Ok(out)
    }

    /// Applies `map` to every coefficient, moving the form into `target`.
    pub fn map_coeffs(&self, target: FieldCtx, map: impl Fn(FieldElem) -> FieldElem) -> Self {
        let mut out = Self::zero(target, &self.blocks, self.n);
        for (idx, &c) in &self.terms {
            out.accumulate(idx.clone(), map(c));
        }
        out
    }

    /// Fallible variant of [`MultilinearForm::map_coeffs`].
    pub fn try_map_coeffs(&self, target: FieldCtx, map: impl Fn(FieldElem) -> Result<FieldElem>) -> Result<Self> {
        let mut out = Self::zero(target, &self.blocks, self.n);
        for (idx, &c) in &self.terms {
            out.accumulate(idx.clone(), map(c)?);
        }
        Ok(out)
    }

    /// The form as a polynomial in `num_blocks·n` variables, `x_{s,j}` being
    /// variable `(s-1)·n + j`.
    pub fn to_poly(&self, num_blocks: usize) -> Poly {
        let nvars = num_blocks * self.n;
        let terms = self.terms.iter().map(|(idx, &c)| {
            let mut exps = vec![0u16; nvars];
            for (pos, &i) in idx.iter().enumerate() {
                exps[(self.blocks[pos] as usize - 1) * self.n + i as usize] = 1;
            }
            (exps, c)
        });
        Poly::from_terms_unchecked(self.field, nvars, terms)
    }
}

fn block_letter(b: u8) -> String {
    match b {
        1 => "α".into(),
        2 => "β".into(),
        3 => "γ".into(),
        _ => format!("x{b}_"),
    }
}

/// Renders a coefficient, using a signed representative in prime fields and
/// a polynomial in `ω` otherwise.
pub(crate) fn format_coeff(field: FieldCtx, c: FieldElem) -> String {
    let coords = field.coords(c);
    if field.degree() == 1 {
        let p = field.characteristic();
        let v = coords[0];
        if p > 2 && v > p / 2 {
            format!("-{}", p - v)
        } else {
            v.to_string()
        }
    } else {
        let parts: Vec<String> = coords
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(|(i, &v)| match (i, v) {
                (0, _) => v.to_string(),
                (1, 1) => "ω".into(),
                (1, _) => format!("{v}ω"),
                (_, 1) => format!("ω^{i}"),
                _ => format!("{v}ω^{i}"),
            })
            .collect();
        if parts.len() == 1 {
            parts[0].clone()
        } else {
            format!("({})", parts.join("+"))
        }
    }
}

impl fmt::Display for MultilinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (idx, &c) in &self.terms {
            let mono: String = idx
                .iter()
                .zip(&self.blocks)
                .map(|(&i, &b)| format!("{}{}", block_letter(b), i + 1))
                .collect();
            let coeff = format_coeff(self.field, c);
            let (neg, mag) = match coeff.strip_prefix('-') {
                Some(m) => (true, m.to_string()),
                None => (false, coeff),
            };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            match (mag.as_str(), mono.is_empty()) {
                (_, true) => write!(f, "{mag}")?,
                ("1", false) => write!(f, "{mono}")?,
                _ => write!(f, "{mag}·{mono}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MultilinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Form{:?}[{}]", self.blocks, self)
    }
}
