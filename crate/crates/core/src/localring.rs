//! A truncated model of the ring of rational functions defined at a point.
//!
//! An element is stored through its expansion `f(p₁ + t₁y₁, …, p_d + t_d y_d)`
//! modulo `t₁², …, t_d²`: one multilinear form in the direction variables
//! `y_S` for every subset `S ⊆ [d]` (the coefficient of `∏_{i∈S} t_i`).
//! Subsets are bit masks, block `i` being bit `i-1`. The component on the
//! full set is the multilinear approximation `[f]_p`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};
use crate::mform::{MultilinearForm, Poly};
use crate::mlmatrix::full_blocks;
use crate::points::Point;

/// Blocks of a subset mask, in increasing order.
pub fn mask_blocks(mask: usize) -> Vec<u8> {
    (0..usize::BITS as u8).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect()
}

/// An element of the truncated local ring at a fixed base point.
#[derive(Clone, PartialEq, Eq)]
pub struct LocalElem {
    field: FieldCtx,
    d: usize,
    n: usize,
    point: Arc<Point>,
    comps: Vec<MultilinearForm>,
}

impl std::fmt::Debug for LocalElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut m = f.debug_map();
        for (mask, c) in self.comps.iter().enumerate() {
            if !c.is_zero() {
                m.entry(&mask_blocks(mask), c);
            }
        }
        m.finish()
    }
}

fn check_point(field: FieldCtx, d: usize, n: usize, point: &Point) -> Result<()> {
    if point.len() != d || point.iter().any(|v| v.len() != n) {
        return Err(Error::DimensionMismatch(format!("base point must have {d} vectors of length {n}")));
    }
    if point.iter().flatten().any(|&x| !field.contains(x)) {
        return Err(Error::ContextMismatch);
    }
    Ok(())
}

impl LocalElem {
    pub fn zero(field: FieldCtx, n: usize, point: Arc<Point>) -> Self {
        let d = point.len();
        let comps = (0..1usize << d).map(|m| MultilinearForm::zero(field, &mask_blocks(m), n)).collect();
        LocalElem { field, d, n, point, comps }
    }

    pub fn constant(field: FieldCtx, n: usize, point: Arc<Point>, c: FieldElem) -> Self {
        let mut e = Self::zero(field, n, point);
        e.comps[0] = MultilinearForm::scalar(field, n, c);
        e
    }

    /// Builds an element from explicit components keyed by block sets.
    pub fn from_components(
        field: FieldCtx,
        n: usize,
        point: Arc<Point>,
        comps: impl IntoIterator<Item = MultilinearForm>,
    ) -> Result<Self> {
        check_point(field, point.len(), n, &point)?;
        let mut e = Self::zero(field, n, point);
        for c in comps {
            if c.field() != field || c.n() != n {
                return Err(Error::ContextMismatch);
            }
            let mut mask = 0usize;
            for &b in c.blocks() {
                if b as usize > e.d {
                    return Err(Error::BlockMismatch(format!("block {b} exceeds d = {}", e.d)));
                }
                mask |= 1 << (b - 1);
            }
            e.comps[mask] = e.comps[mask].add(&c);
        }
        Ok(e)
    }

    /// The expansion of a multilinear form on `[d]` at the base point: the
    /// component on `S` is `f` with the blocks outside `S` set to `p`.
    pub fn expand(f: &MultilinearForm, point: Arc<Point>) -> Result<Self> {
        let d = point.len();
        if f.blocks() != full_blocks(d).as_slice() {
            return Err(Error::BlockMismatch(format!("form on {:?} expanded with d = {d}", f.blocks())));
        }
        check_point(f.field(), d, f.n(), &point)?;
        Ok(Self::expand_unchecked(f, point))
    }

    pub(crate) fn expand_unchecked(f: &MultilinearForm, point: Arc<Point>) -> Self {
        let d = point.len();
        let full = (1usize << d) - 1;
        let comps = (0..=full)
            .map(|mask| {
                let fixed: BTreeMap<u8, Vec<FieldElem>> =
                    mask_blocks(full & !mask).into_iter().map(|b| (b, point[b as usize - 1].clone())).collect();
                f.partial_eval(&fixed).expect("blocks checked")
            })
            .collect();
        LocalElem { field: f.field(), d, n: f.n(), point, comps }
    }

    /// The expansion of an arbitrary polynomial in the `d·n` variables
    /// `x_{b,j}` (variable `(b-1)·n + j`).
    pub fn from_poly(poly: &Poly, n: usize, point: Arc<Point>) -> Result<Self> {
        let d = point.len();
        let field = poly.field();
        if poly.nvars() != d * n {
            return Err(Error::DimensionMismatch(format!(
                "polynomial in {} variables, expected {}",
                poly.nvars(),
                d * n
            )));
        }
        check_point(field, d, n, &point)?;
        let vars: Vec<LocalElem> = (0..d * n)
            .map(|v| {
                let (b, j) = (v / n, v % n);
                let mut e = Self::constant(field, n, point.clone(), point[b][j]);
                e.comps[1 << b] = MultilinearForm::var(field, b as u8 + 1, j, n);
                e
            })
            .collect();
        let mut powers: Vec<Vec<LocalElem>> = vec![vec![Self::constant(field, n, point.clone(), field.one())]; d * n];
        let mut out = Self::zero(field, n, point.clone());
        for (exps, c) in poly.terms() {
            let mut t = Self::constant(field, n, point.clone(), c);
            for (v, &k) in exps.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                while powers[v].len() <= k as usize {
                    let next = powers[v].last().unwrap().mul_unchecked(&vars[v]);
                    powers[v].push(next);
                }
                t = t.mul_unchecked(&powers[v][k as usize]);
            }
            out = out.add_unchecked(&t);
        }
        Ok(out)
    }

    pub fn field(&self) -> FieldCtx {
        self.field
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn point(&self) -> &Arc<Point> {
        &self.point
    }

    /// The component on the subset `mask`.
    pub fn component(&self, mask: usize) -> &MultilinearForm {
        &self.comps[mask]
    }

    /// The value at the base point (the component on `∅`).
    pub fn value(&self) -> FieldElem {
        self.comps[0].scalar_value()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(MultilinearForm::is_zero)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.field != other.field || self.n != other.n || self.d != other.d {
            return Err(Error::ContextMismatch);
        }
        if !Arc::ptr_eq(&self.point, &other.point) && self.point != other.point {
            return Err(Error::BasePointMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.add_unchecked(other))
    }

    pub(crate) fn add_unchecked(&self, other: &Self) -> Self {
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a.add(b)).collect();
        LocalElem { comps, ..self.clone_shape() }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.sub_unchecked(other))
    }

    pub(crate) fn sub_unchecked(&self, other: &Self) -> Self {
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a.sub(b)).collect();
        LocalElem { comps, ..self.clone_shape() }
    }

    pub fn neg(&self) -> Self {
        let comps = self.comps.iter().map(MultilinearForm::neg).collect();
        LocalElem { comps, ..self.clone_shape() }
    }

    pub fn scale(&self, c: FieldElem) -> Self {
        let comps = self.comps.iter().map(|f| f.scale(c)).collect();
        LocalElem { comps, ..self.clone_shape() }
    }

    fn clone_shape(&self) -> Self {
        LocalElem { field: self.field, d: self.d, n: self.n, point: self.point.clone(), comps: Vec::new() }
    }

    /// Product: `(fg)_S = ∑_{S₁ ⊔ S₂ = S} f_{S₁} g_{S₂}`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let full = (1usize << self.d) - 1;
        let comps = (0..=full)
            .map(|s| {
                let mut acc = MultilinearForm::zero(self.field, &mask_blocks(s), self.n);
                let mut s1 = s;
                loop {
                    let (a, b) = (&self.comps[s1], &other.comps[s & !s1]);
                    if !a.is_zero() && !b.is_zero() {
                        acc.add_scaled(&a.mul_disjoint_unchecked(b), self.field.one());
                    }
                    if s1 == 0 {
                        break;
                    }
                    s1 = (s1 - 1) & s;
                }
                acc
            })
            .collect();
        LocalElem { comps, ..self.clone_shape() }
    }

    /// Inverse by the finite Neumann series `c⁻¹ ∑_{j=0}^{d} (−c⁻¹(f − c))^j`.
    pub fn inv(&self) -> Result<Self> {
        let c = self.value();
        let ci = self.field.inv(c).ok_or(Error::NotAUnit)?;
        let mut nil = self.scale(self.field.neg(ci));
        nil.comps[0] = MultilinearForm::scalar(self.field, self.n, self.field.zero());
        let one = Self::constant(self.field, self.n, self.point.clone(), self.field.one());
        let mut sum = one.clone();
        let mut pow = one;
        for _ in 0..self.d {
            pow = pow.mul_unchecked(&nil);
            sum = sum.add_unchecked(&pow);
        }
        Ok(sum.scale(ci))
    }

    /// The multilinear approximation: the component on the full set `[d]`.
    pub fn approx_extract(&self) -> MultilinearForm {
        self.comps[self.comps.len() - 1].clone()
    }
}

/// The multilinear approximation of `num/den` at `point`, computed from
/// mixed partial derivatives `∂^d(num/den)/∂x_{1,i₁}⋯∂x_{d,i_d}` at the point.
///
/// Intended as an independent check on [`LocalElem`]; the cost grows like
/// `n^d` symbolic quotient-rule steps.
pub fn approx_derivative_oracle(num: &Poly, den: &Poly, n: usize, point: &Point) -> Result<MultilinearForm> {
    let d = point.len();
    let field = num.field();
    if den.field() != field {
        return Err(Error::ContextMismatch);
    }
    if num.nvars() != d * n || den.nvars() != d * n {
        return Err(Error::DimensionMismatch(format!("expected polynomials in {} variables", d * n)));
    }
    check_point(field, d, n, point)?;
    let den_degs = den
        .block_degrees(n)
        .ok_or_else(|| Error::InvalidParameter("denominator is zero or not multihomogeneous".into()))?;
    if !num.is_zero() {
        let ok = num
            .block_degrees(n)
            .is_some_and(|nd| nd.iter().zip(&den_degs).all(|(&a, &b)| a == b + 1));
        if !ok {
            return Err(Error::InvalidParameter("num/den is not homogeneous of degree (1,…,1)".into()));
        }
    }
    let flat: Vec<FieldElem> = point.iter().flatten().copied().collect();
    let den_at = den.eval(&flat)?;
    if field.is_zero(den_at) {
        return Err(Error::DivisionByZero);
    }
    // Quotients are kept as N / den^k; differentiate prefix by prefix.
    let mut frontier: Vec<(Vec<usize>, Poly, u32)> = vec![(Vec::new(), num.clone(), 1)];
    let den_partials: Vec<Poly> = (0..d * n).map(|v| den.derivative(v)).collect();
    for b in 0..d {
        let mut next = Vec::with_capacity(frontier.len() * n);
        for (idx, nm, k) in &frontier {
            for j in 0..n {
                let v = b * n + j;
                let top = nm.derivative(v).mul(den).sub(&nm.mul(&den_partials[v]).scale(field.from_int(*k as i64)));
                let mut idx2 = idx.clone();
                idx2.push(j);
                next.push((idx2, top, k + 1));
            }
        }
        frontier = next;
    }
    let terms = frontier
        .into_iter()
        .map(|(idx, nm, k)| {
            let val = nm.eval(&flat)?;
            let c = field.div(val, field.pow(den_at, k as u64)).ok_or(Error::DivisionByZero)?;
            Ok((idx, c))
        })
        .collect::<Result<Vec<_>>>()?;
    MultilinearForm::from_terms(field, &full_blocks(d), n, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::points::unit_vector;

    #[test]
    fn expand_examples() {
        let f = FieldCtx::new(3, 1).unwrap();
        let pt = Arc::new(vec![unit_vector(f, 2, 0)]);
        let lin = MultilinearForm::linear(f, 1, &[f.one(), f.one()]);
        let e = LocalElem::expand(&lin, pt).unwrap();
        assert_eq!(e.value(), f.one());
        assert_eq!(e.component(1), &lin);

        let pt2 = Arc::new(vec![unit_vector(f, 2, 0), unit_vector(f, 2, 0)]);
        let mono = MultilinearForm::from_terms(f, &[1, 2], 2, [(vec![0, 0], f.one())]).unwrap();
        let e = LocalElem::expand(&mono, pt2.clone()).unwrap();
        assert_eq!(e.value(), f.one());
        assert_eq!(e.component(1), &MultilinearForm::var(f, 1, 0, 2));
        assert_eq!(e.component(2), &MultilinearForm::var(f, 2, 0, 2));
        assert_eq!(e.component(3), &mono);
        let z = LocalElem::expand(&MultilinearForm::zero(f, &[1, 2], 2), pt2).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn products_and_inverses() {
        let f = FieldCtx::new(5, 1).unwrap();
        let pt = Arc::new(vec![vec![f.one()]]);
        let y = MultilinearForm::var(f, 1, 0, 1);
        let a = LocalElem::from_components(f, 1, pt.clone(), [MultilinearForm::scalar(f, 1, f.one()), y.clone()])
            .unwrap();
        let b = LocalElem::from_components(f, 1, pt.clone(), [MultilinearForm::scalar(f, 1, f.one()), y.neg()])
            .unwrap();
        let one = LocalElem::constant(f, 1, pt.clone(), f.one());
        assert_eq!(a.mul(&b).unwrap(), one);
        assert_eq!(a.inv().unwrap(), b);
        assert_eq!(one.inv().unwrap(), one);
        let three = LocalElem::constant(f, 1, pt.clone(), f.from_int(3));
        assert_eq!(three.inv().unwrap(), LocalElem::constant(f, 1, pt.clone(), f.from_int(2)));
        let nil = LocalElem::from_components(f, 1, pt, [y]).unwrap();
        assert_eq!(nil.inv(), Err(Error::NotAUnit));
        assert!(nil.mul(&nil).unwrap().is_zero());
    }

    #[test]
    fn base_point_mismatch() {
        let f = FieldCtx::new(3, 1).unwrap();
        let a = LocalElem::constant(f, 1, Arc::new(vec![vec![f.one()]]), f.one());
        let b = LocalElem::constant(f, 1, Arc::new(vec![vec![f.zero()]]), f.one());
        assert_eq!(a.mul(&b), Err(Error::BasePointMismatch));
    }

    fn quotient_example(p: u32) -> (FieldCtx, Poly, Poly) {
        let f = FieldCtx::new(p, 1).unwrap();
        let a1 = Poly::var(f, 2, 0);
        let a2 = Poly::var(f, 2, 1);
        (f, a1.pow(2).add(&a2.pow(2)), a1.add(&a2))
    }

    #[test]
    fn quotient_approximation_both_ways() {
        for p in [3, 5, 7] {
            let (f, num, den) = quotient_example(p);
            let point = vec![unit_vector(f, 2, 0)];
            let pt = Arc::new(point.clone());
            let n = LocalElem::from_poly(&num, 2, pt.clone()).unwrap();
            let dd = LocalElem::from_poly(&den, 2, pt).unwrap();
            let ring = n.mul(&dd.inv().unwrap()).unwrap().approx_extract();
            let expect = MultilinearForm::linear(f, 1, &[f.one(), f.from_int(-1)]);
            assert_eq!(ring, expect);
            assert_eq!(approx_derivative_oracle(&num, &den, 2, &point).unwrap(), expect);
        }
    }

    #[test]
    fn oracle_errors() {
        let (f, num, den) = quotient_example(3);
        let zero_pt = vec![vec![f.zero(), f.zero()]];
        assert_eq!(approx_derivative_oracle(&num, &den, 2, &zero_pt), Err(Error::DivisionByZero));
        assert!(approx_derivative_oracle(&den, &den, 2, &zero_pt).is_err());
        let one = Poly::one(f, 2);
        let lin = MultilinearForm::linear(f, 1, &[f.one(), f.from_int(2)]);
        assert_eq!(approx_derivative_oracle(&lin.to_poly(1), &one, 2, &zero_pt).unwrap(), lin);
    }
}
