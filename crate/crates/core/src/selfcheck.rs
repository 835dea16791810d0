//! A fixed, deterministic battery over the named examples and small seeded
//! instances, one row per result.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::corpus::{ex45, ex45_remainder, gen_random, intro_diag, intro_skew, tight_diag, tight_kron};
use crate::decomp::{bound_constant, pr_decompose, pr_decompose_d1, DecomposeOptions};
use crate::error::Result;
use crate::field::FieldCtx;
use crate::localring::{approx_derivative_oracle, LocalElem};
use crate::mform::{MultilinearForm, Poly};
use crate::mlmatrix::ScalarMatrix;
use crate::points::unit_vector;
use crate::polyops::multsz_check;
use crate::ranks::{avg_rank, comm_rank_exact, max_rank, pr_exact_d1, MaxRankMode, DEFAULT_BUDGET};
use crate::rng::SplitMix64;
use crate::schur::{diff_schur, schur_scalar};
use crate::tensor3::{slice_decompose, SliceOptions, Tensor3};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckRow {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn row(name: &'static str, outcome: Result<(bool, String)>) -> CheckRow {
    match outcome {
        Ok((passed, detail)) => CheckRow { name, passed, detail },
        Err(e) => CheckRow { name, passed: false, detail: format!("error: {e}") },
    }
}

fn max_exhaustive(m: &crate::FormMatrix) -> Result<usize> {
    Ok(max_rank(m, MaxRankMode::Exhaustive { budget: DEFAULT_BUDGET })?.value)
}

fn quotient_approximation() -> Result<(bool, String)> {
    let mut ok = true;
    for p in [2, 3, 5, 7] {
        let f = FieldCtx::new(p, 1)?;
        let (a1, a2) = (Poly::var(f, 2, 0), Poly::var(f, 2, 1));
        let num = a1.pow(2).add(&a2.pow(2));
        let den = a1.add(&a2);
        let point = vec![unit_vector(f, 2, 0)];
        let pt = Arc::new(point.clone());
        let ring = LocalElem::from_poly(&num, 2, pt.clone())?
            .mul(&LocalElem::from_poly(&den, 2, pt)?.inv()?)?
            .approx_extract();
        let oracle = approx_derivative_oracle(&num, &den, 2, &point)?;
        let want = MultilinearForm::linear(f, 1, &[f.one(), f.from_int(-1)]);
        ok &= ring == want && oracle == want;
    }
    Ok((ok, "F_2, F_3, F_5, F_7".into()))
}

fn ex45_schur() -> Result<(bool, String)> {
    let f = FieldCtx::new(7, 1)?;
    let m = ex45(f)?;
    let p = vec![unit_vector(f, 2, 0), unit_vector(f, 2, 0)];
    let ds = diff_schur(&m, &[0], &[0], &p, None, DEFAULT_BUDGET)?;
    let cr = comm_rank_exact(&ds.remainder, DEFAULT_BUDGET)?;
    let ok = ds.remainder == ex45_remainder(f)? && cr == 4 && ds.terms.len() == 4;
    Ok((ok, format!("remainder CR {cr}, {} terms", ds.terms.len())))
}

fn intro_gap() -> Result<(bool, String)> {
    let f = FieldCtx::new(2, 1)?;
    let m = intro_diag(f)?;
    let (mr, cr) = (max_exhaustive(&m)?, comm_rank_exact(&m, DEFAULT_BUDGET)?);
    Ok(((mr, cr) == (2, 3), format!("MaxR {mr}, CR {cr}")))
}

fn skew_pr() -> Result<(bool, String)> {
    let mut ok = true;
    let mut detail = Vec::new();
    for p in [2, 3] {
        let m = intro_skew(FieldCtx::new(p, 1)?)?;
        let cr = comm_rank_exact(&m, DEFAULT_BUDGET)?;
        let pr = pr_exact_d1(&m, DEFAULT_BUDGET)?;
        ok &= cr == 2 && pr == 3;
        detail.push(format!("F_{p}: CR {cr}, PR {pr}"));
    }
    Ok((ok, detail.join("; ")))
}

fn tightness() -> Result<(bool, String)> {
    let f = FieldCtx::new(2, 1)?;
    let mut ok = true;
    let mut detail = Vec::new();
    for (m, want) in [(tight_diag(f, 2)?, (2, 3)), (tight_diag(f, 3)?, (4, 7)), (tight_kron(f, 2, 2)?, (4, 9))] {
        let got = (max_exhaustive(&m)?, comm_rank_exact(&m, DEFAULT_BUDGET)?);
        ok &= got == want;
        detail.push(format!("{}×{}: {got:?}", m.rows(), m.cols()));
    }
    Ok((ok, detail.join("; ")))
}

fn multiplicity_sz() -> Result<(bool, String)> {
    let f = FieldCtx::new(2, 1)?;
    let monos: Vec<Vec<u16>> = (0..3u16)
        .flat_map(|i| (0..3u16).map(move |j| vec![i, j]))
        .filter(|e| e[0] + e[1] <= 2)
        .collect();
    let s = [f.zero(), f.one()];
    let mut count = 0;
    for mask in 1u32..(1 << monos.len()) {
        let terms = monos.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, e)| (e.clone(), f.one()));
        let poly = Poly::from_terms(f, 2, terms)?;
        if !multsz_check(&poly, &s)?.holds {
            return Ok((false, format!("fails for {poly}")));
        }
        count += 1;
    }
    Ok((true, format!("{count} polynomials")))
}

fn expected_rank() -> Result<(bool, String)> {
    let mut mats = vec![
        intro_diag(FieldCtx::new(2, 1)?)?,
        intro_skew(FieldCtx::new(3, 1)?)?,
        tight_diag(FieldCtx::new(2, 1)?, 3)?,
    ];
    for seed in 0..6 {
        mats.push(gen_random(1 + (seed as usize % 2), 2, 3, 3, 2 + seed % 2, 0.5, seed)?);
    }
    for m in &mats {
        let q = m.field().order();
        let cr = comm_rank_exact(m, DEFAULT_BUDGET)?;
        let avg = avg_rank(m, DEFAULT_BUDGET)?;
        let mr = max_exhaustive(m)?;
        let factor = num_traits::pow(BigRational::one() - BigRational::new(BigInt::one(), BigInt::from(q)), m.d());
        let lower = factor * BigRational::from_integer(BigInt::from(cr));
        if lower > avg || avg > BigRational::from_integer(BigInt::from(mr)) {
            return Ok((false, format!("violated: CR {cr}, avg {avg}, MaxR {mr}")));
        }
    }
    Ok((true, format!("{} matrices", mats.len())))
}

fn scalar_schur() -> Result<(bool, String)> {
    let mut rng = SplitMix64::new(0);
    let mut ok = true;
    let mut tried = 0;
    for p in [2u32, 3, 7] {
        let f = FieldCtx::new(p, 1)?;
        for _ in 0..30 {
            let rows: Vec<_> = (0..4).map(|_| rng.vector(f, 5)).collect();
            let m = ScalarMatrix::from_rows(f, rows)?;
            let info = m.rank_info();
            if info.rank == 0 {
                continue;
            }
            let r = 1 + rng.below(info.rank as u64) as usize;
            let s = schur_scalar(&m, &info.pivot_rows[..r], &info.pivot_cols[..r])?;
            ok &= s.rank() + r == info.rank;
            tried += 1;
        }
    }
    Ok((ok, format!("{tried} matrices")))
}

fn d1_bound() -> Result<(bool, String)> {
    for seed in 0..20u64 {
        let m = gen_random(1, 2, 3, 3, 2, 0.5, seed)?;
        let dec = pr_decompose_d1(&m, &DecomposeOptions::default())?;
        let cr = comm_rank_exact(&m, DEFAULT_BUDGET)?;
        let pr = pr_exact_d1(&m, DEFAULT_BUDGET)?;
        if dec.r1 + dec.r2 > 2 * cr || dec.r1 + dec.r2 < pr || dec.decomposition.value()? != m {
            return Ok((false, format!("seed {seed}")));
        }
    }
    Ok((true, "20 instances over F_2".into()))
}

fn iterated_bound() -> Result<(bool, String)> {
    let c = bound_constant(2, Some(7)).constant.expect("valid for q = 7");
    for seed in 0..4u64 {
        let m = gen_random(2, 2, 3, 3, 7, 0.4, seed)?;
        let dec = pr_decompose(&m, &DecomposeOptions::default())?;
        let cr = comm_rank_exact(&m, DEFAULT_BUDGET)?;
        if dec.value()? != m || !crate::decomp::count_within(dec.len(), &c, cr) {
            return Ok((false, format!("seed {seed}: {} terms, CR {cr}", dec.len())));
        }
    }
    Ok((true, format!("4 instances over F_7, C = {c}")))
}

fn extension_path() -> Result<(bool, String)> {
    let opts = DecomposeOptions { allow_extension: true, ..DecomposeOptions::default() };
    for seed in 0..3u64 {
        let m = gen_random(2, 2, 3, 3, 2, 0.5, seed)?;
        let dec = pr_decompose(&m, &opts)?;
        if dec.value()? != m {
            return Ok((false, format!("seed {seed}")));
        }
    }
    Ok((true, "3 instances over F_2".into()))
}

fn slice_rank() -> Result<(bool, String)> {
    let f = FieldCtx::new(2, 1)?;
    let mut rng = SplitMix64::new(1);
    for _ in 0..10 {
        let terms: Vec<_> =
            (0..8usize).filter(|_| rng.below(2) == 1).map(|t| (vec![t >> 2 & 1, t >> 1 & 1, t & 1], f.one())).collect();
        let t = Tensor3::new(MultilinearForm::from_terms(f, &[1, 2, 3], 2, terms)?)?;
        let s = slice_decompose(&t, None, &SliceOptions::default())?;
        if !s.within_bound || s.value()? != t {
            return Ok((false, "bound or reconstruction failed".into()));
        }
    }
    Ok((true, "10 tensors over F_2".into()))
}

fn bound_constants() -> Result<(bool, String)> {
    let r = |a: i64, b: i64| Some(BigRational::new(a.into(), b.into()));
    let ok = bound_constant(2, Some(7)).constant == r(72, 5)
        && bound_constant(2, Some(8)).constant == r(196, 19)
        && !bound_constant(2, Some(5)).is_valid()
        && bound_constant(2, None).constant == r(4, 1);
    Ok((ok, "C(2,7) = 72/5, C(2,8) = 196/19, C(2,5) invalid".into()))
}

/// Runs every check in a fixed order.
pub fn run() -> Vec<CheckRow> {
    vec![
        row("approximation of a quotient", quotient_approximation()),
        row("differential Schur complement example", ex45_schur()),
        row("max-rank below commutative rank", intro_gap()),
        row("skew matrix partition rank", skew_pr()),
        row("tightness of the expected-rank bound", tightness()),
        row("multiplicity Schwartz-Zippel", multiplicity_sz()),
        row("expected rank vs commutative rank", expected_rank()),
        row("scalar Schur complement rank", scalar_schur()),
        row("partition rank at most twice commutative rank", d1_bound()),
        row("iterated Schur decomposition bound", iterated_bound()),
        row("decomposition via field extension", extension_path()),
        row("slice rank vs analytic rank", slice_rank()),
        row("bound constants", bound_constants()),
    ]
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_rows_pass() {
        for r in super::run() {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }
}
