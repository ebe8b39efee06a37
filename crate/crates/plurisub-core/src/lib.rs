//! Construction and numerical verification of plurisubharmonic defining
//! functions for smoothly bounded domains in C^2.
//!
//! The crate is organized around four layers:
//!
//! * [`expr`] - immutable symbolic expression DAGs over (z1, z2) with exact
//!   Wirtinger differentiation to arbitrary order, pointwise evaluation, and
//!   a finite-difference oracle.
//! * [`geometry`] - boundary geometry derived from a defining function:
//!   gradients, the tangential/normal frame, Levi forms, normal projection,
//!   weak/strict classification, and the obstruction term (the normal
//!   derivative of the tangential Levi eigenvalue).
//! * [`transforms`] - the modified defining functions `rho*exp(-C*sigma)`
//!   and `r + K*r^2`, the exhaustion functions with a fractional exponent,
//!   and the sampled constants that select their parameters.
//! * [`verify`] - sampling machinery and the Hessian inequality checks that
//!   certify, on sampled boundary collars, the lower bounds the transforms
//!   are designed to achieve.
//!
//! Everything is pure and deterministic: fixed inputs and seeds produce
//! identical reports.

pub mod expr;
pub mod geometry;
pub mod selftest;
pub mod transforms;
pub mod types;
pub mod verify;

pub use expr::{
    eval, fd_check, parse, wirtinger, EvalError, Evaluator, FdCheck, ParseError, Program,
    ScalarField, WirtingerIndex, WirtingerOp,
};
pub use types::{
    Box4, Classification, ComplexCovector2, ComplexPoint2, ComplexVector2, HermitianForm2, Side,
};
