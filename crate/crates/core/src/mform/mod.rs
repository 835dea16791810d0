//! Multilinear forms and general multivariate polynomials.

mod form;
mod poly;

pub use form::MultilinearForm;
pub(crate) use form::format_coeff;
pub use poly::Poly;
