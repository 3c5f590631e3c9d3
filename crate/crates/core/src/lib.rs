//! Ext algebras between Weyl modules of GL2 in characteristic p, via a
//! polytopal monomial model and an independent dg-homology oracle.

pub mod error;
pub mod field;
pub mod grading;
pub mod linalg;
pub mod psi;
pub mod dgtensor;
pub mod upsilon;
pub mod product;
pub mod calibration;
pub mod schur;
pub mod report;
pub mod verify;

pub use error::{Error, Result};
