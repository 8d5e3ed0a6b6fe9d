//! Series solutions of nonlinear ODEs/PDEs by Adomian decomposition, with and
//! without a convergence-control parameter `c`, plus residual-based selection
//! of the optimal `c`.
//!
//! Every series term is an exact [`ratpoly::Polynomial`] over the variables
//! `t, x, c, eps`; floating point appears only when residuals are evaluated.

pub mod calculus;
pub mod cli;
pub mod error;
pub mod minimize;
pub mod problems;
pub mod ratpoly;
pub mod residual;
pub mod scheme;
pub mod series;

pub use error::{Error, Result};
pub use problems::{catalog, catalog_by_name, ProblemId, ProblemSpec};
pub use ratpoly::{Polynomial, Rational, Var};
pub use scheme::{adm_solve, admp_solve, partial_sum, Method, SeriesSolution};
