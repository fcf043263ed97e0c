//! Linear algebra support: dense matrices over finite fields and packed
//! F_p systems for the counting and Lang engines.

pub mod fmat;
pub mod fp;

pub use fmat::FMat;
pub use fp::{FpMat, LinearSystem};
