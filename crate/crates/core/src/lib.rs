//! Exact Bernstein-Sato polynomials of generic hyperplane arrangements.

pub mod error;
pub mod poly;
pub mod rational;
pub mod weyl;
pub mod arrangement;
pub mod linalg;
pub mod ls_module;
pub mod bernstein;
pub mod charvariety;
