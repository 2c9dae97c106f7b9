//! Exact computation of L²-Betti numbers for finite measured groupoids and
//! tracial *-algebra extensions.
//!
//! All arithmetic is over the Gaussian rationals `ℚ(i)`, so every reported
//! dimension is an exact rational.

#![no_std]
#![allow(clippy::needless_range_loop, clippy::suspicious_arithmetic_impl)]

extern crate alloc;

pub mod algebra;
pub mod betti;
pub mod bundle_modules;
pub mod complex;
pub mod dimension;
pub mod extension;
pub mod fiber_square;
pub mod groupoid;
pub mod linalg;
pub mod peirce;
pub mod scalar;
pub mod spaces;

pub use scalar::{GScalar, Rational};
