//! Brute-force reference computations shared by the integration tests.
//! They only use field arithmetic and the data accessors of the library.
#![allow(dead_code)]

use std::collections::BTreeSet;

use mlrank::field::{Extension, FieldCtx, FieldElem};
use mlrank::mform::{MultilinearForm, Poly};
use mlrank::{FormMatrix, Tensor3};
use num_bigint::BigInt;
use num_rational::BigRational;

pub fn rank_of(f: FieldCtx, mut m: Vec<Vec<FieldElem>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !f.is_zero(m[i][c])) else { continue };
        m.swap(r, p);
        let inv = f.inv(m[r][c]).unwrap();
        for i in 0..rows {
            if i != r && !f.is_zero(m[i][c]) {
                let factor = f.mul(m[i][c], inv);
                for j in 0..cols {
                    let t = f.mul(factor, m[r][j]);
                    m[i][j] = f.sub(m[i][j], t);
                }
            }
        }
        r += 1;
    }
    r
}

pub fn eval_form(g: &MultilinearForm, point: &[Vec<FieldElem>]) -> FieldElem {
    let f = g.field();
    let blocks = g.blocks();
    let mut acc = f.zero();
    for (idx, c) in g.terms() {
        let mut t = c;
        for (pos, &i) in idx.iter().enumerate() {
            t = f.mul(t, point[blocks[pos] as usize - 1][i as usize]);
        }
        acc = f.add(acc, t);
    }
    acc
}

pub fn eval_matrix(m: &FormMatrix, point: &[Vec<FieldElem>]) -> Vec<Vec<FieldElem>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| eval_form(m.get(i, j), point)).collect()).collect()
}

/// Every tuple of `len` entries drawn from `pool`, first entry most significant.
pub fn tuples(pool: &[FieldElem], len: usize) -> Vec<Vec<FieldElem>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out.into_iter().flat_map(|t| pool.iter().map(move |&x| [t.clone(), vec![x]].concat())).collect();
    }
    out
}

pub fn all_points(m: &FormMatrix, pool: &[FieldElem]) -> Vec<Vec<Vec<FieldElem>>> {
    let (d, n) = (m.d(), m.n());
    tuples(pool, d * n).into_iter().map(|flat| flat.chunks(n.max(1)).map(<[_]>::to_vec).collect()).collect()
}

pub fn elements(f: FieldCtx) -> Vec<FieldElem> {
    (0..f.order()).map(|i| f.from_index(i)).collect()
}

pub fn max_rank(m: &FormMatrix) -> usize {
    let f = m.field();
    if m.d() == 0 {
        return rank_of(f, eval_matrix(m, &[]));
    }
    all_points(m, &elements(f)).iter().map(|p| rank_of(f, eval_matrix(m, p))).max().unwrap_or(0)
}

pub fn avg_rank(m: &FormMatrix) -> BigRational {
    let f = m.field();
    let pts = all_points(m, &elements(f));
    let total: usize = pts.iter().map(|p| rank_of(f, eval_matrix(m, p))).sum();
    BigRational::new(BigInt::from(total), BigInt::from(pts.len()))
}

/// Commutative rank: the maximum rank over a grid `S^{dn}` with
/// `|S| = min(a,b) + 1` inside an extension large enough to hold `S`.
/// Every `r×r` minor has degree at most `r` in each variable, so it cannot
/// vanish on the whole grid.
pub fn comm_rank(m: &FormMatrix) -> usize {
    let f = m.field();
    let s = m.rows().min(m.cols()) + 1;
    if m.d() == 0 || s == 1 {
        return rank_of(f, eval_matrix(m, &vec![vec![]; m.d()]));
    }
    let mut e = 1;
    while f.order().pow(e) < s as u64 {
        e += 1;
    }
    let (big, mm) = if e == 1 {
        (f, m.clone())
    } else {
        let ext = Extension::new(f, e).unwrap();
        (ext.ext(), m.map_coeffs(ext.ext(), |c| ext.embed(c)))
    };
    let pool: Vec<FieldElem> = (0..s as u64).map(|i| big.from_index(i)).collect();
    let cap = s - 1;
    let mut best = 0;
    for p in all_points(&mm, &pool) {
        best = best.max(rank_of(big, eval_matrix(&mm, &p)));
        if best == cap {
            break;
        }
    }
    best
}

pub fn vector_index(f: FieldCtx, v: &[FieldElem]) -> u64 {
    v.iter().fold(0, |acc, &x| acc * f.order() + f.index_of(x))
}

/// All subspaces of `F^k`, each as the set of indices of its elements.
pub fn subspaces(f: FieldCtx, k: usize) -> Vec<BTreeSet<u64>> {
    let vecs = tuples(&elements(f), k);
    let mut found: BTreeSet<BTreeSet<u64>> = BTreeSet::new();
    let mut frontier: Vec<BTreeSet<u64>> = vec![BTreeSet::from([0])];
    found.insert(BTreeSet::from([0]));
    while let Some(space) = frontier.pop() {
        for v in &vecs {
            if space.contains(&vector_index(f, v)) {
                continue;
            }
            let mut next = space.clone();
            for &s in &space {
                let sv = &vecs[s as usize];
                for c in elements(f) {
                    let w: Vec<FieldElem> = sv.iter().zip(v).map(|(&a, &b)| f.add(a, f.mul(c, b))).collect();
                    next.insert(vector_index(f, &w));
                }
            }
            if found.insert(next.clone()) {
                frontier.push(next);
            }
        }
    }
    found.into_iter().collect()
}

fn dim(f: FieldCtx, space: &BTreeSet<u64>) -> usize {
    let mut size = space.len() as u64;
    let mut d = 0;
    while size > 1 {
        size /= f.order();
        d += 1;
    }
    d
}

/// Partition rank of a matrix of linear forms as the least `r₁ + r₂` over
/// pairs of subspaces `V ⊆ F^a`, `W ⊆ F^b` with `vᵀ M w = 0` identically.
pub fn pr_d1(m: &FormMatrix) -> usize {
    let f = m.field();
    let (a, b) = (m.rows(), m.cols());
    let va = tuples(&elements(f), a);
    let vb = tuples(&elements(f), b);
    let sa = subspaces(f, a);
    let sb = subspaces(f, b);
    let mut best = a + b;
    for v in &sa {
        for w in &sb {
            let cost = (a - dim(f, v)) + (b - dim(f, w));
            if cost >= best {
                continue;
            }
            let vanishes = v.iter().all(|&vi| {
                w.iter().all(|&wi| {
                    let mut form = MultilinearForm::zero(f, &[1], m.n());
                    for i in 0..a {
                        for j in 0..b {
                            let c = f.mul(va[vi as usize][i], vb[wi as usize][j]);
                            form.add_scaled(m.get(i, j), c);
                        }
                    }
                    form.is_zero()
                })
            });
            if vanishes {
                best = cost;
            }
        }
    }
    best
}

/// `Pr_{x,y}[T(x, y, ·) = 0]` by enumeration.
pub fn bias(t: &Tensor3) -> BigRational {
    let f = t.field();
    let n = t.n();
    let vs = tuples(&elements(f), n);
    let mut zeros = 0u64;
    for x in &vs {
        for y in &vs {
            let mut z = vec![f.zero(); n];
            for (idx, c) in t.form().terms() {
                let v = f.mul(c, f.mul(x[idx[0] as usize], y[idx[1] as usize]));
                z[idx[2] as usize] = f.add(z[idx[2] as usize], v);
            }
            if z.iter().all(|&c| f.is_zero(c)) {
                zeros += 1;
            }
        }
    }
    BigRational::new(BigInt::from(zeros), BigInt::from(vs.len() * vs.len()))
}

fn binom(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Multiplicity of `g` at `a`: least total degree present in `g(x + a)`.
pub fn mult(g: &Poly, a: &[FieldElem]) -> Option<u32> {
    let f = g.field();
    let nv = g.nvars();
    let mut shifted: std::collections::BTreeMap<Vec<u16>, FieldElem> = Default::default();
    for (e, c) in g.terms() {
        let mut parts: Vec<(Vec<u16>, FieldElem)> = vec![(vec![0; nv], c)];
        for i in 0..nv {
            let mut next = Vec::new();
            for (exp, coef) in &parts {
                for k in 0..=e[i] {
                    let b = f.from_int((binom(e[i] as u64, k as u64) % f.characteristic() as u64) as i64);
                    let t = f.mul(*coef, f.mul(b, f.pow(a[i], (e[i] - k) as u64)));
                    let mut ex = exp.clone();
                    ex[i] = k;
                    next.push((ex, t));
                }
            }
            parts = next;
        }
        for (ex, t) in parts {
            let slot = shifted.entry(ex).or_insert(f.zero());
            *slot = f.add(*slot, t);
        }
    }
    shifted
        .into_iter()
        .filter(|(_, c)| !f.is_zero(*c))
        .map(|(e, _)| e.iter().map(|&x| x as u32).sum())
        .min()
}
