//! Exact evaluation of non-commutative polynomials on 2x2 matrices and
//! classification of their images.

pub mod classify;
pub mod cli;
pub mod field;
pub mod freealg;
pub mod generic;
pub mod linalg;
pub mod matalg;
pub mod oracle;

pub use field::{FieldError, FieldSpec, Scalar};
pub use freealg::{FreePoly, Word};
