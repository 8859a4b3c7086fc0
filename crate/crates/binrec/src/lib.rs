//! File formats, configuration, experiment drivers and reports for the
//! `binrec` command line tool.

// `!(x >= 0.0)` style checks are meant to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod io;
pub mod mask;
pub mod report;
pub mod scenario;
pub mod source;
pub mod stats;

pub use error::{Error, Result};
