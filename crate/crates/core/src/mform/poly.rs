use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};
use crate::mform::form::format_coeff;

/// A multivariate polynomial over a finite field, sparse in exponent vectors.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    field: FieldCtx,
    nvars: usize,
    terms: BTreeMap<Vec<u16>, FieldElem>,
}

impl Poly {
    pub fn zero(field: FieldCtx, nvars: usize) -> Self {
        Poly { field, nvars, terms: BTreeMap::new() }
    }

    pub fn constant(field: FieldCtx, nvars: usize, c: FieldElem) -> Self {
        let mut p = Self::zero(field, nvars);
        p.accumulate(vec![0; nvars], c);
        p
    }

    pub fn one(field: FieldCtx, nvars: usize) -> Self {
        Self::constant(field, nvars, field.one())
    }

    /// The variable `x_i` (0-based).
    pub fn var(field: FieldCtx, nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable {i} out of range");
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(field, nvars);
        p.terms.insert(e, field.one());
        p
    }

    pub fn from_terms<I>(field: FieldCtx, nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u16>, FieldElem)>,
    {
        let mut p = Self::zero(field, nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::DimensionMismatch(format!(
                    "exponent vector of length {} for {nvars} variables",
                    e.len()
                )));
            }
            if !field.contains(c) {
                return Err(Error::ContextMismatch);
            }
            p.accumulate(e, c);
        }
        Ok(p)
    }

    pub(crate) fn from_terms_unchecked<I>(field: FieldCtx, nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u16>, FieldElem)>,
    {
        let mut p = Self::zero(field, nvars);
        for (e, c) in terms {
            p.accumulate(e, c);
        }
        p
    }

    fn accumulate(&mut self, e: Vec<u16>, c: FieldElem) {
        if self.field.is_zero(c) {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = self.field.add(*o.get(), c);
                if self.field.is_zero(s) {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn field(&self) -> FieldCtx {
        self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u16], FieldElem)> + '_ {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    pub fn coefficient(&self, e: &[u16]) -> FieldElem {
        self.terms.get(e).copied().unwrap_or_default()
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::ContextMismatch);
        }
        if self.nvars != other.nvars {
            return Err(Error::DimensionMismatch(format!("{} vs {} variables", self.nvars, other.nvars)));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.accumulate(e.clone(), c);
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.neg())
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let f = self.field;
        let mut out = Self::zero(f, self.nvars);
        for (e1, &c1) in &self.terms {
            for (e2, &c2) in &other.terms {
                let e: Vec<u16> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.accumulate(e, f.mul(c1, c2));
            }
        }
        Ok(out)
    }

    /// Sum; panics on context mismatch.
    pub fn add(&self, other: &Self) -> Self {
        self.checked_add(other).expect("polynomials from different rings")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.checked_sub(other).expect("polynomials from different rings")
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.checked_mul(other).expect("polynomials from different rings")
    }

    pub fn neg(&self) -> Self {
        self.scale(self.field.from_int(-1))
    }

    pub fn scale(&self, c: FieldElem) -> Self {
        let f = self.field;
        Self::from_terms_unchecked(f, self.nvars, self.terms.iter().map(|(e, &v)| (e.clone(), f.mul(v, c))))
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.field, self.nvars);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Formal partial derivative in variable `i`.
    pub fn derivative(&self, i: usize) -> Self {
        assert!(i < self.nvars, "variable {i} out of range");
        let f = self.field;
        Self::from_terms_unchecked(
            f,
            self.nvars,
            self.terms.iter().filter(|(e, _)| e[i] > 0).map(|(e, &c)| {
                let mut e2 = e.clone();
                e2[i] -= 1;
                (e2, f.mul(c, f.from_int(e[i] as i64)))
            }),
        )
    }

    pub fn eval(&self, point: &[FieldElem]) -> Result<FieldElem> {
        if point.len() != self.nvars {
            return Err(Error::DimensionMismatch(format!(
                "point of length {} for {} variables",
                point.len(),
                self.nvars
            )));
        }
        let f = self.field;
        let mut acc = f.zero();
        for (e, &c) in &self.terms {
            let mut t = c;
            for (x, &k) in point.iter().zip(e) {
                if k > 0 {
                    t = f.mul(t, f.pow(*x, k as u64));
                }
            }
            acc = f.add(acc, t);
        }
        Ok(acc)
    }

    /// `f(x + p)`.
    pub fn shift(&self, point: &[FieldElem]) -> Result<Self> {
        if point.len() != self.nvars {
            return Err(Error::DimensionMismatch(format!(
                "point of length {} for {} variables",
                point.len(),
                self.nvars
            )));
        }
        let f = self.field;
        let n = self.nvars;
        let shifted: Vec<Self> = (0..n)
            .map(|i| Self::var(f, n, i).add(&Self::constant(f, n, point[i])))
            .collect();
        let mut out = Self::zero(f, n);
        // Cache powers of each shifted variable.
        let mut powers: Vec<Vec<Self>> = vec![vec![Self::one(f, n)]; n];
        for (e, &c) in &self.terms {
            let mut t = Self::constant(f, n, c);
            for (i, &k) in e.iter().enumerate() {
                while powers[i].len() <= k as usize {
                    let next = powers[i].last().unwrap().mul(&shifted[i]);
                    powers[i].push(next);
                }
                if k > 0 {
                    t = t.mul(&powers[i][k as usize]);
                }
            }
            for (e2, &c2) in &t.terms {
                out.accumulate(e2.clone(), c2);
            }
        }
        Ok(out)
    }

    /// Smallest total degree in the support; `None` for the zero polynomial.
    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().map(|&k| k as u32).sum()).min()
    }

    /// Largest total degree in the support; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().map(|&k| k as u32).sum()).max()
    }

    /// Per-block degrees when every monomial has the same degree in each
    /// consecutive block of `n` variables; `None` otherwise or for zero.
    pub fn block_degrees(&self, n: usize) -> Option<Vec<u32>> {
        if n == 0 || self.nvars % n != 0 {
            return None;
        }
        let mut out: Option<Vec<u32>> = None;
        for e in self.terms.keys() {
            let degs: Vec<u32> = e.chunks(n).map(|c| c.iter().map(|&k| k as u32).sum()).collect();
            match &out {
                None => out = Some(degs),
                Some(d) if *d == degs => {}
                Some(_) => return None,
            }
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(e, &c)| {
                let mono: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .map(|(i, &k)| if k == 1 { format!("x{}", i + 1) } else { format!("x{}^{k}", i + 1) })
                    .collect();
                let coeff = format_coeff(self.field, c);
                match (coeff.as_str(), mono.is_empty()) {
                    (_, true) => coeff,
                    ("1", false) => mono.join("·"),
                    _ => format!("{coeff}·{}", mono.join("·")),
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly[{self}]")
    }
}
