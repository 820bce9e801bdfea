//! Desk-scale workbench for subTuring reducibility between partial functions.
//!
//! * [`machine`]: register machine, numbering, and the dialogue executor.
//! * [`partialfn`]: partial functions, join, meet, graph and jump.
//! * [`search`]: bounded verification and search for reductions.
//! * [`constructions`]: finite-stage degree constructions with replayable certificates.

pub mod constructions;
pub mod error;
pub mod machine;
pub mod pairing;
pub mod partialfn;
pub mod search;

pub use error::{Error, Result};
