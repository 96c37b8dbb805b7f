//! Bullion: a columnar storage format for machine-learning training data.
//!
//! The crate is organised around the life of a file:
//!
//! - [`encoding`]: composable codecs and cascading scheme selection.
//! - [`sparse_delta`]: sliding-window delta codec for long `list<int64>`
//!   sparse-feature sequences.
//! - [`quantization`]: fp16 / bf16 / fp8 narrowing, exact fp32 dual split and
//!   lossless integer rehashing.
//! - [`layout`]: quality-score row ordering and access-frequency column
//!   ordering applied at write time.
//! - [`format`]: writer, flat footer, reader with coalesced projection, and
//!   the page/group/file checksum tree.
//! - [`compliance`]: deletion vectors and physical in-place masking of
//!   encoded pages.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod bench;
pub mod cli;
pub mod compliance;
pub mod encoding;
mod error;
pub mod format;
pub mod layout;
pub mod quantization;
pub mod sparse_delta;

pub use error::{Error, Result};
