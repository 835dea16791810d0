//! Enumeration of evaluation points `p ∈ (F^n)^d`.
//!
//! Points are ordered lexicographically by their coordinates read block by
//! block, the first coordinate of block 1 being most significant; each
//! coordinate is compared by its [`FieldCtx::index_of`] value.

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};

/// One vector per block.
pub type Point = Vec<Vec<FieldElem>>;

/// `q^{dn}`, or `None` on overflow.
pub fn point_count(field: FieldCtx, d: usize, n: usize) -> Option<u64> {
    let e = u32::try_from(d.checked_mul(n)?).ok()?;
    field.order().checked_pow(e)
}

/// Like [`point_count`] but fails once the count exceeds `budget`.
pub fn checked_point_count(field: FieldCtx, d: usize, n: usize, budget: u64) -> Result<u64> {
    match point_count(field, d, n) {
        Some(c) if c <= budget => Ok(c),
        _ => Err(Error::BudgetExceeded(format!(
            "{}^{} points exceed the budget of {budget}",
            field.order(),
            d * n
        ))),
    }
}

/// The point with lexicographic index `idx`.
pub fn point_from_index(field: FieldCtx, d: usize, n: usize, mut idx: u64) -> Point {
    let q = field.order();
    let mut flat = vec![field.zero(); d * n];
    for slot in flat.iter_mut().rev() {
        *slot = field.from_index(idx % q);
        idx /= q;
    }
    if n == 0 {
        return vec![Vec::new(); d];
    }
    flat.chunks(n).map(<[FieldElem]>::to_vec).collect()
}

/// Lexicographic index of a point.
pub fn index_of_point(field: FieldCtx, point: &[Vec<FieldElem>]) -> u64 {
    let q = field.order();
    point.iter().flatten().fold(0u64, |acc, &x| acc * q + field.index_of(x))
}

/// The vector of `F^n` with lexicographic index `idx`.
pub fn vector_from_index(field: FieldCtx, n: usize, idx: u64) -> Vec<FieldElem> {
    point_from_index(field, 1, n, idx).pop().unwrap_or_default()
}

/// All vectors of `F^n` in lexicographic order.
pub fn all_vectors(field: FieldCtx, n: usize) -> impl Iterator<Item = Vec<FieldElem>> {
    let count = point_count(field, 1, n).expect("vector space too large to enumerate");
    (0..count).map(move |i| vector_from_index(field, n, i))
}

/// The standard basis vector `e_i` (0-based `i`).
pub fn unit_vector(field: FieldCtx, n: usize, i: usize) -> Vec<FieldElem> {
    (0..n).map(|j| if i == j { field.one() } else { field.zero() }).collect()
}
