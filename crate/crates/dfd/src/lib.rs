//! File formats, dataset handling and the `dfd` command-line tool built on
//! [`dfd_core`].
//!
//! * [`formats`]: PNG (8/16-bit) input, 16-bit PNG and `DFD1` raw float output.
//! * [`dataset`]: split lists, RGB-D pairs and batch synthesis.
//! * [`cli`]: argument parsing and subcommand dispatch.
// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dataset;
mod error;
pub mod formats;

pub use error::{Error, Result};
