//! File formats, parallel evaluation and the command-line front end for
//! the dynamic and static topic model in [`dstm_core`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config_file;
mod error;
pub mod graph_io;
pub mod model_io;
pub mod report;
pub mod snapshot;
pub mod trials;
pub mod uci;

pub use dstm_core as core;
pub use error::{Error, Result};
