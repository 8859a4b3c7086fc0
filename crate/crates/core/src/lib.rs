//! Reconstruction of binary signals and shapes from incomplete Fourier data.
//!
//! The crate is `no_std` (with `alloc`). It provides the discrete Fourier
//! conventions and measurement operators ([`fourier`]), a split Bregman solver
//! for the box-constrained least squares relaxation ([`solver`]), dual
//! certificates deciding exact recovery through small linear programs
//! ([`certificate`], [`lp`]), a directional zero-crossing complexity measure for
//! 2D shapes ([`complexity`]), recovery probabilities for random signals
//! ([`probability`]) and signal generators ([`generate`]).
//!
//! Enable the `std` feature to get wall-clock timing in solver reports.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` style checks are meant to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
mod math;

pub mod certificate;
pub mod complexity;
pub mod fft;
pub mod fourier;
pub mod generate;
pub mod lp;
pub mod probability;
pub mod rng;
pub mod signal;
pub mod solver;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use signal::{BinarySignal, GridGeometry, IntervalDecomposition, RealSignal};
