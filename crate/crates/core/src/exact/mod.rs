//! Exact rationals, dense polynomials and piecewise polynomials.

pub mod linalg;
mod piecewise;
mod poly;
mod rational;

pub use piecewise::PiecewisePoly;
pub use poly::Poly;
pub use rational::{q, ParseRationalError, Rational};
