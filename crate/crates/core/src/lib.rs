//! Maurer-Cartan forms on discretized domains: development into matrix Lie
//! groups, pointed monodromy, primitive reconstruction into homogeneous
//! spaces, and uniqueness up to symmetries of a Klein geometry.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebroid;
pub mod cli_io;
pub mod error;
pub mod klein;
pub mod lie_core;
pub mod linalg;
pub mod monodromy;
pub mod path_engine;
pub mod reconstruct;
pub mod test_maps;

pub use error::{Error, Result};
