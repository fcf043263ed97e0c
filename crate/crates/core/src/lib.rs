//! Exact-arithmetic library for extended Heisenberg-Weil representations of
//! finite unitary groups over finite fields.
//!
//! The crate builds the unitary Heisenberg groups H_n(q^m), the unitary
//! groups U_n(q^m) and their semidirect products with a Galois group, a
//! monomial matrix model of the Heisenberg-Weil representation together with
//! its canonical extension to the Galois cover, the Gyoja-style norm map on
//! twisted conjugacy classes, and a point-counting oracle for the associated
//! hermitian Artin-Schreier varieties. Everything is computed exactly:
//! character values live in cyclotomic fields with rational coefficients and
//! no floating point appears anywhere.

pub mod cyclo;
pub mod error;
pub mod ff;
pub mod grp;
pub mod herm;
pub mod lefschetz;
pub mod linalg;
pub mod rep;
pub mod report;
pub mod shintani;
pub mod verify;

pub use error::Error;
