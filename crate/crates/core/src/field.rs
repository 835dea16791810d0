//! Exact arithmetic in prime fields `F_p` and extension fields `F_{p^k}`.
//!
//! A [`FieldCtx`] fixes a monic irreducible modulus of degree `k` over `F_p`.
//! Elements are coordinate vectors in the power basis `1, ω, …, ω^{k-1}`
//! (constant term first). Contexts are small `Copy` values and elements do not
//! carry their context, so all arithmetic is routed through the context.
//!
//! [`Extension`] relates a field `F_q` to a degree-`m` extension `F_{q^m}`:
//! it embeds, decomposes in the basis `1, ω, …, ω^{m-1}` of the larger field,
//! and exposes the constant-coordinate projection `φ`.

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported extension degree over the prime field.
pub const MAX_DEGREE: usize = 8;

/// Largest supported field order.
pub const MAX_ORDER: u64 = 1 << 31;

/// A finite field `F_{p^k}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldCtx {
    p: u32,
    k: u32,
    /// Monic modulus, constant term first; entry `k` is 1. Unused when `k == 1`.
    modulus: [u32; MAX_DEGREE + 1],
    q: u64,
}

/// An element of some [`FieldCtx`]: coordinates in the power basis.
///
/// Coordinates beyond the field degree are always zero, so the derived
/// ordering compares elements coordinate by coordinate from the constant term.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FieldElem([u32; MAX_DEGREE]);

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let last = self.0.iter().rposition(|&c| c != 0).map_or(1, |i| i + 1);
        write!(f, "{:?}", &self.0[..last])
    }
}

/// Deterministic trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Operation selector for [`FieldCtx::arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Inv,
}

impl FieldCtx {
    /// Builds `F_{p^k}` with the smallest monic irreducible modulus, where
    /// polynomials are ordered by their coefficient sequence read from the
    /// highest degree down.
    pub fn new(p: u32, k: u32) -> Result<Self> {
        Self::check_params(p, k)?;
        let mut modulus = [0u32; MAX_DEGREE + 1];
        let ku = k as usize;
        modulus[ku] = 1;
        if k > 1 {
            let count = (p as u64).pow(k);
            let found = (0..count).find(|&idx| {
                let poly = monic_from_index(p, ku, idx);
                is_irreducible(&poly, p)
            });
            // An irreducible polynomial of every degree exists.
            let idx = found.expect("irreducible polynomial exists");
            let poly = monic_from_index(p, ku, idx);
            modulus[..=ku].copy_from_slice(&poly);
        }
        Ok(Self::assemble(p, k, modulus))
    }

    /// Builds `F_{p^k}` with a caller-chosen modulus given constant term
    /// first, including the leading 1.
    pub fn with_modulus(p: u32, k: u32, coeffs: &[u32]) -> Result<Self> {
        Self::check_params(p, k)?;
        let ku = k as usize;
        if k == 1 {
            // Any monic linear polynomial defines F_p itself.
            if !(coeffs.is_empty() || (coeffs.len() == 2 && coeffs[1] == 1 && coeffs[0] < p)) {
                return Err(Error::ReducibleModulus);
            }
            return Self::new(p, 1);
        }
        if coeffs.len() != ku + 1 || coeffs[ku] != 1 || coeffs.iter().any(|&c| c >= p) {
            return Err(Error::ReducibleModulus);
        }
        if !is_irreducible(coeffs, p) {
            return Err(Error::ReducibleModulus);
        }
        let mut modulus = [0u32; MAX_DEGREE + 1];
        modulus[..=ku].copy_from_slice(coeffs);
        Ok(Self::assemble(p, k, modulus))
    }

    /// Builds the field with `q` elements, `q` a prime power.
    pub fn from_order(q: u64) -> Result<Self> {
        if q < 2 {
            return Err(Error::NotPrime(q));
        }
        let mut p = 2u64;
        while p * p <= q && q % p != 0 {
            p += 1;
        }
        if q % p != 0 {
            p = q;
        }
        let mut rest = q;
        let mut k = 0u32;
        while rest % p == 0 {
            rest /= p;
            k += 1;
        }
        if rest != 1 {
            return Err(Error::InvalidParameter(format!("{q} is not a prime power")));
        }
        let p32 = u32::try_from(p).map_err(|_| Error::InvalidParameter(format!("order {q} too large")))?;
        Self::new(p32, k)
    }

    fn check_params(p: u32, k: u32) -> Result<()> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if k < 1 || k as usize > MAX_DEGREE {
            return Err(Error::InvalidDegree(k));
        }
        let q = (p as u64).checked_pow(k).filter(|&q| q <= MAX_ORDER);
        if q.is_none() {
            return Err(Error::InvalidParameter(format!("field order {p}^{k} exceeds {MAX_ORDER}")));
        }
        Ok(())
    }

    fn assemble(p: u32, k: u32, modulus: [u32; MAX_DEGREE + 1]) -> Self {
        FieldCtx { p, k, modulus, q: (p as u64).pow(k) }
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn order(&self) -> u64 {
        self.q
    }

    /// The modulus, constant term first, or `None` for a prime field.
    pub fn modulus(&self) -> Option<Vec<u32>> {
        (self.k > 1).then(|| self.modulus[..=self.k as usize].to_vec())
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem::default()
    }

    pub fn one(&self) -> FieldElem {
        let mut c = [0; MAX_DEGREE];
        c[0] = 1;
        FieldElem(c)
    }

    /// The class of an integer in the prime subfield.
    pub fn from_int(&self, v: i64) -> FieldElem {
        let p = self.p as i64;
        let mut c = [0; MAX_DEGREE];
        c[0] = v.rem_euclid(p) as u32;
        FieldElem(c)
    }

    /// The generator `ω` of the power basis (`None` for prime fields).
    pub fn generator(&self) -> Option<FieldElem> {
        (self.k > 1).then(|| {
            let mut c = [0; MAX_DEGREE];
            c[1] = 1;
            FieldElem(c)
        })
    }

    /// Element whose coordinates are the base-`p` digits of `idx`
    /// (constant coordinate least significant).
    pub fn from_index(&self, mut idx: u64) -> FieldElem {
        let mut c = [0; MAX_DEGREE];
        for slot in c.iter_mut().take(self.k as usize) {
            *slot = (idx % self.p as u64) as u32;
            idx /= self.p as u64;
        }
        FieldElem(c)
    }

    /// Inverse of [`FieldCtx::from_index`].
    pub fn index_of(&self, a: FieldElem) -> u64 {
        a.0[..self.k as usize].iter().rev().fold(0u64, |acc, &c| acc * self.p as u64 + c as u64)
    }

    /// All elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElem> + '_ {
        (0..self.q).map(move |i| self.from_index(i))
    }

    /// Coordinates of `a` (length `k`).
    pub fn coords(&self, a: FieldElem) -> Vec<u32> {
        a.0[..self.k as usize].to_vec()
    }

    /// Element from a coordinate vector of length `k` with entries below `p`.
    pub fn from_coords(&self, coords: &[u32]) -> Result<FieldElem> {
        if coords.len() != self.k as usize || coords.iter().any(|&c| c >= self.p) {
            return Err(Error::ContextMismatch);
        }
        let mut c = [0; MAX_DEGREE];
        c[..coords.len()].copy_from_slice(coords);
        Ok(FieldElem(c))
    }

    /// Whether `a` is a reduced element of this field.
    pub fn contains(&self, a: FieldElem) -> bool {
        let k = self.k as usize;
        a.0[..k].iter().all(|&c| c < self.p) && a.0[k..].iter().all(|&c| c == 0)
    }

    #[inline]
    pub fn is_zero(&self, a: FieldElem) -> bool {
        a.0 == [0; MAX_DEGREE]
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        let mut c = [0; MAX_DEGREE];
        for i in 0..self.k as usize {
            let s = a.0[i] + b.0[i];
            c[i] = if s >= self.p { s - self.p } else { s };
        }
        FieldElem(c)
    }

    #[inline]
    pub fn neg(&self, a: FieldElem) -> FieldElem {
        let mut c = [0; MAX_DEGREE];
        for i in 0..self.k as usize {
            c[i] = if a.0[i] == 0 { 0 } else { self.p - a.0[i] };
        }
        FieldElem(c)
    }

    #[inline]
    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        let p = self.p as u64;
        if self.k == 1 {
            let mut c = [0; MAX_DEGREE];
            c[0] = ((a.0[0] as u64 * b.0[0] as u64) % p) as u32;
            return FieldElem(c);
        }
        let k = self.k as usize;
        let mut prod = [0u64; 2 * MAX_DEGREE - 1];
        for i in 0..k {
            if a.0[i] == 0 {
                continue;
            }
            for j in 0..k {
                prod[i + j] = (prod[i + j] + a.0[i] as u64 * b.0[j] as u64) % p;
            }
        }
        for i in (k..2 * k - 1).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            for j in 0..k {
                let m = self.modulus[j] as u64;
                prod[i - k + j] = (prod[i - k + j] + (p - m) % p * c) % p;
            }
            prod[i] = 0;
        }
        let mut c = [0; MAX_DEGREE];
        for i in 0..k {
            c[i] = prod[i] as u32;
        }
        FieldElem(c)
    }

    pub fn pow(&self, a: FieldElem, mut e: u64) -> FieldElem {
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(&self, a: FieldElem) -> Option<FieldElem> {
        if self.is_zero(a) {
            return None;
        }
        Some(self.pow(a, self.q - 2))
    }

    pub fn div(&self, a: FieldElem, b: FieldElem) -> Option<FieldElem> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    /// Checked arithmetic that validates both operands against this field.
    pub fn arith(&self, op: ArithOp, a: FieldElem, b: Option<FieldElem>) -> Result<FieldElem> {
        if !self.contains(a) || b.is_some_and(|b| !self.contains(b)) {
            return Err(Error::ContextMismatch);
        }
        let need_b = || b.ok_or_else(|| Error::InvalidParameter("binary operation needs two operands".into()));
        match op {
            ArithOp::Add => Ok(self.add(a, need_b()?)),
            ArithOp::Sub => Ok(self.sub(a, need_b()?)),
            ArithOp::Mul => Ok(self.mul(a, need_b()?)),
            ArithOp::Inv => self.inv(a).ok_or(Error::DivisionByZero),
        }
    }
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.k == 1 {
            write!(f, "F_{}", self.p)
        } else {
            write!(f, "F_{}^{} mod {:?}", self.p, self.k, &self.modulus[..=self.k as usize])
        }
    }
}

impl fmt::Display for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.q)
    }
}

fn monic_from_index(p: u32, k: usize, mut idx: u64) -> Vec<u32> {
    let mut poly = vec![0u32; k + 1];
    for c in poly.iter_mut().take(k) {
        *c = (idx % p as u64) as u32;
        idx /= p as u64;
    }
    poly[k] = 1;
    poly
}

/// Remainder of `a` modulo the monic polynomial `b` over `F_p`.
fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let p64 = p as u64;
    let mut r: Vec<u64> = a.iter().map(|&c| c as u64).collect();
    let db = b.len() - 1;
    while r.len() > db {
        let lead = r.pop().unwrap() % p64;
        if lead != 0 {
            let off = r.len() - db;
            for j in 0..db {
                r[off + j] = (r[off + j] + (p64 - b[j] as u64) * lead) % p64;
            }
        }
    }
    r.into_iter().map(|c| (c % p64) as u32).collect()
}

/// Exhaustive search for a monic factor of degree at most `deg/2`.
fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let deg = poly.len() - 1;
    if deg == 0 {
        return false;
    }
    for fd in 1..=deg / 2 {
        let count = (p as u64).pow(fd as u32);
        for idx in 0..count {
            let factor = monic_from_index(p, fd, idx);
            if poly_rem(poly, &factor, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// Inverse of a square matrix over `F_p` by Gauss–Jordan elimination.
fn inverse_mod_p(mut a: Vec<Vec<u64>>, p: u64) -> Option<Vec<Vec<u64>>> {
    let n = a.len();
    let mut inv: Vec<Vec<u64>> = (0..n).map(|i| (0..n).map(|j| u64::from(i == j)).collect()).collect();
    let inv_mod = |x: u64| -> u64 {
        let mut acc = 1u64;
        let mut b = x % p;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        acc
    };
    for col in 0..n {
        let piv = (col..n).find(|&r| a[r][col] % p != 0)?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let s = inv_mod(a[col][col]);
        for j in 0..n {
            a[col][j] = a[col][j] * s % p;
            inv[col][j] = inv[col][j] * s % p;
        }
        for r in 0..n {
            if r != col && a[r][col] != 0 {
                let f = a[r][col];
                for j in 0..n {
                    a[r][j] = (a[r][j] + (p - a[col][j]) * f) % p;
                    inv[r][j] = (inv[r][j] + (p - inv[col][j]) * f) % p;
                }
            }
        }
    }
    Some(inv)
}

/// A degree-`m` extension `F_{q^m}` of a field `F_q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extension {
    base: FieldCtx,
    ext: FieldCtx,
    degree: u32,
    /// Image of the base generator in the extension (zero for prime bases).
    base_root: FieldElem,
    /// Inverse of the `F_p`-linear map from base coordinates to extension coordinates.
    to_coords: Vec<Vec<u64>>,
}

impl Extension {
    /// The designated degree-`degree` extension of `base`, built with the
    /// default modulus of `F_{p^{k·degree}}`.
    pub fn new(base: FieldCtx, degree: u32) -> Result<Self> {
        if degree < 1 {
            return Err(Error::InvalidDegree(degree));
        }
        if degree == 1 {
            return Self::between(base, base);
        }
        let total = base.k.checked_mul(degree).ok_or(Error::InvalidDegree(degree))?;
        let ext = FieldCtx::new(base.p, total)?;
        Self::between(base, ext)
    }

    /// Relates two existing contexts, failing unless `ext` contains `base`.
    pub fn between(base: FieldCtx, ext: FieldCtx) -> Result<Self> {
        if base.p != ext.p || ext.k % base.k != 0 {
            return Err(Error::NotAnExtension(format!("{base:?} is not a subfield of {ext:?}")));
        }
        let degree = ext.k / base.k;
        let base_root = if base == ext {
            base.generator().unwrap_or_default()
        } else if base.k == 1 {
            FieldElem::default()
        } else {
            let modulus = base.modulus().expect("non-prime base has a modulus");
            ext.elements()
                .find(|&x| {
                    let mut acc = ext.zero();
                    for &c in modulus.iter().rev() {
                        acc = ext.add(ext.mul(acc, x), ext.from_int(c as i64));
                    }
                    ext.is_zero(acc)
                })
                .ok_or_else(|| Error::NotAnExtension("base modulus has no root".into()))?
        };
        let mut ext_self = Extension { base, ext, degree, base_root, to_coords: Vec::new() };
        // Columns: images of base-coordinate unit vectors, block j carrying ω^j.
        let kk = ext.k as usize;
        let bk = base.k as usize;
        let omega = ext.generator().unwrap_or_else(|| ext.one());
        let mut cols: Vec<Vec<u64>> = Vec::with_capacity(kk);
        let mut omega_pow = ext.one();
        for _j in 0..degree {
            for i in 0..bk {
                let mut unit = [0u32; MAX_DEGREE];
                unit[i] = 1;
                let img = ext.mul(ext_self.embed(FieldElem(unit)), omega_pow);
                cols.push(img.0[..kk].iter().map(|&c| c as u64).collect());
            }
            omega_pow = ext.mul(omega_pow, omega);
        }
        let forward: Vec<Vec<u64>> = (0..kk).map(|r| (0..kk).map(|c| cols[c][r]).collect()).collect();
        ext_self.to_coords = inverse_mod_p(forward, base.p as u64)
            .ok_or_else(|| Error::Internal("power basis of the extension is degenerate".into()))?;
        Ok(ext_self)
    }

    pub fn base(&self) -> FieldCtx {
        self.base
    }

    pub fn ext(&self) -> FieldCtx {
        self.ext
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Ring homomorphism `F_q → F_{q^m}`.
    pub fn embed(&self, a: FieldElem) -> FieldElem {
        if self.base == self.ext {
            return a;
        }
        if self.base.k == 1 {
            return self.ext.from_int(a.0[0] as i64);
        }
        let mut acc = self.ext.zero();
        for i in (0..self.base.k as usize).rev() {
            acc = self.ext.add(self.ext.mul(acc, self.base_root), self.ext.from_int(a.0[i] as i64));
        }
        acc
    }

    /// The basis `1, ω, …, ω^{m-1}` of the extension over the base.
    pub fn basis(&self) -> Vec<FieldElem> {
        let omega = self.ext.generator().unwrap_or_else(|| self.ext.one());
        let mut out = Vec::with_capacity(self.degree as usize);
        let mut cur = self.ext.one();
        for _ in 0..self.degree {
            out.push(cur);
            cur = self.ext.mul(cur, omega);
        }
        out
    }

    /// Coordinates of `x` over the base in [`Extension::basis`].
    pub fn decompose(&self, x: FieldElem) -> Vec<FieldElem> {
        if self.base == self.ext {
            return vec![x];
        }
        let kk = self.ext.k as usize;
        let p = self.base.p as u64;
        let flat: Vec<u64> = (0..kk)
            .map(|r| (0..kk).fold(0u64, |acc, c| (acc + self.to_coords[r][c] * x.0[c] as u64) % p))
            .collect();
        let bk = self.base.k as usize;
        flat.chunks(bk)
            .map(|chunk| {
                let mut c = [0u32; MAX_DEGREE];
                for (i, &v) in chunk.iter().enumerate() {
                    c[i] = v as u32;
                }
                FieldElem(c)
            })
            .collect()
    }

    /// The `F_q`-linear projection `φ`: the constant coordinate of
    /// [`Extension::decompose`].
    pub fn project_phi(&self, x: FieldElem) -> FieldElem {
        self.decompose(x)[0]
    }

    /// Inverse of [`Extension::embed`] on its image.
    pub fn restrict(&self, x: FieldElem) -> Result<FieldElem> {
        let parts = self.decompose(x);
        if parts[1..].iter().any(|&c| !self.base.is_zero(c)) {
            return Err(Error::NotInBaseField);
        }
        Ok(parts[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_has_no_modulus() {
        let f2 = FieldCtx::new(2, 1).unwrap();
        assert_eq!(f2.order(), 2);
        assert_eq!(f2.modulus(), None);
        assert_eq!(f2.add(f2.one(), f2.one()), f2.zero());
    }

    #[test]
    fn f4_modulus_found_by_exhaustive_search() {
        // Of t^2, t^2+1, t^2+t, t^2+t+1 only the last has no root in F_2.
        let oracle: Vec<Vec<u32>> = (0..4u32)
            .map(|i| vec![i & 1, i >> 1, 1])
            .filter(|c| (0..2u32).all(|x| (c[0] + c[1] * x + x * x) % 2 != 0))
            .collect();
        assert_eq!(oracle, vec![vec![1, 1, 1]]);
        let f4 = FieldCtx::new(2, 2).unwrap();
        assert_eq!(f4.modulus(), Some(oracle[0].clone()));
    }

    #[test]
    fn f8_uses_smallest_modulus() {
        let f8 = FieldCtx::new(2, 3).unwrap();
        assert_eq!(f8.modulus(), Some(vec![1, 1, 0, 1]));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(FieldCtx::new(4, 1), Err(Error::NotPrime(4)));
        assert_eq!(FieldCtx::new(2, 0), Err(Error::InvalidDegree(0)));
        assert!(FieldCtx::with_modulus(2, 2, &[1, 0, 1]).is_err());
        assert!(FieldCtx::from_order(6).is_err());
        assert_eq!(FieldCtx::from_order(9).unwrap().degree(), 2);
    }

    #[test]
    fn f4_arithmetic() {
        let f4 = FieldCtx::new(2, 2).unwrap();
        let w = f4.generator().unwrap();
        let w1 = f4.add(w, f4.one());
        assert_eq!(f4.mul(w, w), w1);
        // Exhaustive oracle for the inverse of ω.
        let found: Vec<_> = f4.elements().filter(|&b| f4.mul(w, b) == f4.one()).collect();
        assert_eq!(found, vec![w1]);
        assert_eq!(f4.inv(w), Some(w1));
        assert_eq!(f4.arith(ArithOp::Inv, f4.zero(), None), Err(Error::DivisionByZero));
    }

    #[test]
    fn arith_rejects_foreign_elements() {
        let f2 = FieldCtx::new(2, 1).unwrap();
        let f9 = FieldCtx::new(3, 2).unwrap();
        let x = f9.from_index(8);
        assert_eq!(f2.arith(ArithOp::Add, x, Some(f2.one())), Err(Error::ContextMismatch));
    }

    #[test]
    fn inverses_exhaustive_small_fields() {
        for (p, k) in [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2), (2, 4), (13, 1)] {
            let f = FieldCtx::new(p, k).unwrap();
            for a in f.elements().skip(1) {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one(), "{f:?} {a:?}");
            }
        }
    }

    #[test]
    fn index_round_trip() {
        let f = FieldCtx::new(3, 2).unwrap();
        for i in 0..9 {
            assert_eq!(f.index_of(f.from_index(i)), i);
        }
    }

    #[test]
    fn projection_examples() {
        let f2 = FieldCtx::new(2, 1).unwrap();
        let ext = Extension::new(f2, 2).unwrap();
        let k = ext.ext();
        let w = k.generator().unwrap();
        assert_eq!(ext.project_phi(k.one()), f2.one());
        assert_eq!(ext.project_phi(w), f2.zero());
        assert_eq!(ext.project_phi(k.add(k.one(), w)), f2.one());
        assert_eq!(ext.restrict(w), Err(Error::NotInBaseField));
    }

    #[test]
    fn projection_is_linear_exhaustive() {
        for (p, kb, m) in [(2, 1, 2), (3, 1, 2), (2, 2, 2), (2, 1, 1)] {
            let base = FieldCtx::new(p, kb).unwrap();
            let ext = Extension::new(base, m).unwrap();
            let k = ext.ext();
            for c in base.elements() {
                for a in k.elements() {
                    for b in k.elements() {
                        let lhs = ext.project_phi(k.add(k.mul(ext.embed(c), a), b));
                        let rhs = base.add(base.mul(c, ext.project_phi(a)), ext.project_phi(b));
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn tower_embedding_is_homomorphism() {
        let f4 = FieldCtx::new(2, 2).unwrap();
        let ext = Extension::new(f4, 2).unwrap();
        let k = ext.ext();
        assert_eq!(k.order(), 16);
        for a in f4.elements() {
            assert_eq!(ext.project_phi(ext.embed(a)), a);
            assert_eq!(ext.restrict(ext.embed(a)), Ok(a));
            for b in f4.elements() {
                assert_eq!(ext.embed(f4.mul(a, b)), k.mul(ext.embed(a), ext.embed(b)));
                assert_eq!(ext.embed(f4.add(a, b)), k.add(ext.embed(a), ext.embed(b)));
            }
        }
        // Reassembling the decomposition gives the element back.
        let basis = ext.basis();
        for x in k.elements() {
            let parts = ext.decompose(x);
            let back = parts.iter().zip(&basis).fold(k.zero(), |acc, (&c, &b)| k.add(acc, k.mul(ext.embed(c), b)));
            assert_eq!(back, x);
        }
    }

    #[test]
    fn not_an_extension() {
        let f4 = FieldCtx::new(2, 2).unwrap();
        let f8 = FieldCtx::new(2, 3).unwrap();
        assert!(matches!(Extension::between(f4, f8), Err(Error::NotAnExtension(_))));
        let f3 = FieldCtx::new(3, 1).unwrap();
        assert!(matches!(Extension::between(f3, f8), Err(Error::NotAnExtension(_))));
    }
}
