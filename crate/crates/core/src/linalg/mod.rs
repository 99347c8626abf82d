//! Sparse symmetric matrices and an envelope (skyline) Cholesky factorization with
//! reverse Cuthill–McKee ordering.

mod csr;
mod skyline;

pub use csr::CsrMatrix;
pub use skyline::{reverse_cuthill_mckee, EnvelopeCholesky, EnvelopePlan};
