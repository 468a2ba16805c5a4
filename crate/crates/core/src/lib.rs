//! Positive-rank quadratic twists over square-class subspaces.
//!
//! The crate computes twist sets of an elliptic curve by explicit witness
//! search, evaluates Laplace-smoothed densities of finite integer sets, finds
//! strict multiplicative parallelepipeds inside those sets, and packages the
//! result as a certificate that can be rechecked with exact arithmetic.

pub mod arith;
pub mod certify;
pub mod curve;
pub mod density;
pub mod parasearch;
