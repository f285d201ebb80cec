//! Numerical workbench for the operator-valued Fourier transform on
//! semidirect products `G = N ⋊ H` with `N = ℝ^d` abelian and `H = ℝ`.

pub mod discretize;
pub mod error;
pub mod grid;
pub mod group;
pub mod schatten;
pub mod suite;
pub mod transform;
pub mod verify;

pub use error::{HywError, Result};
