//! Exact arithmetic for tilings and functional pd-tilings of `Z_M`.
//!
//! Everything here works at the resolution of step classes
//! `R_m = {z : gcd(z, M) = m}`: step functions carry one rational per divisor,
//! their Fourier transforms are again step functions, and the Delsarte linear
//! programs are solved exactly over those coefficients.

pub mod class_set;
pub mod cyclotomic;
pub mod delsarte;
pub mod error;
pub mod fourier;
pub mod rational;
pub mod ratlp;
pub mod step_fn;
pub mod sweep;
pub mod tiling;
pub mod zm_arith;

pub use class_set::ClassSet;
pub use error::{Error, Result};
pub use rational::Rational;
pub use step_fn::{DenseFunction, FunctionRef, StepFunction};
pub use zm_arith::Modulus;
