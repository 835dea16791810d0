//! Ranks and partition-rank decompositions of matrices of multilinear forms
//! over finite fields, computed with exact arithmetic.

pub mod corpus;
pub mod decomp;
pub mod error;
pub mod field;
pub mod json;
pub mod mform;
pub mod localring;
pub mod mlmatrix;
pub mod points;
pub mod polyops;
pub mod ranks;
pub mod rng;
pub mod schur;
pub mod selfcheck;
pub mod tensor3;

pub use error::{Error, Result};
pub use field::{Extension, FieldCtx, FieldElem};
pub use mform::{MultilinearForm, Poly};
pub use localring::LocalElem;
pub use mlmatrix::{FormMatrix, RankInfo, ScalarMatrix};
pub use tensor3::Tensor3;
