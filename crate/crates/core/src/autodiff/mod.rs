//! Minimal reverse-mode differentiation over dense `f64` matrices.

mod adam;
pub mod checkpoint;
pub mod gradcheck;
mod sparse;
pub mod special;
mod tape;
mod tensor;

pub use adam::AdamState;
pub use sparse::{Csr, Segments};
pub use tape::{softplus, Tape, Var};
pub use tensor::Tensor;
