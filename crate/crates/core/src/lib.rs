//! Projective differential geometry over truncated Taylor jets.

pub mod conformal;
pub mod connection;
pub mod einstein;
pub mod error;
pub mod expr;
pub mod jet;
pub mod linalg;
pub mod obstructions;
pub mod projective;
pub mod scalar;
pub mod tensor;
pub mod tractor;

pub use error::{Error, Result};
pub use jet::Jet;
pub use scalar::{Rational, Scalar};
pub use tensor::{Tensor, Var};
