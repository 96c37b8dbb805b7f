//! Composable column codecs behind one encode/decode interface, plus
//! sample-based cascading selection.
//!
//! Every codec produces an [`EncodedBlock`]: a scheme tag, value count, opaque
//! payload and zero or more child blocks. Schemes that split a column into
//! sub-columns (RLE values/counts, dictionary entries/codes, ...) encode each
//! sub-column through the cascade again, up to
//! [`EncodingConfig::max_recursion_depth`] levels.

pub mod bitpack;
mod block;
mod cascade;
pub mod chunked;
pub mod constant;
pub mod dictionary;
pub mod for_delta;
pub mod nullable;
pub mod rle;
pub mod trivial;
mod values;
pub mod varint;
pub mod zigzag;

pub use block::{EncodedBlock, SchemeId, SchemeSet, BLOCK_HEADER_LEN};
pub use cascade::{accepts, decode, encode_as, encode_cascading, estimate_size, sample, EncodingConfig, MIN_SAMPLE};
pub use values::{Element, ValueType, Values};

pub(crate) use values::{dispatch_type, dispatch_values};

use cascade::Level;

use crate::error::{Error, Result};

pub fn encode_rle(values: &Values, config: &EncodingConfig) -> Result<EncodedBlock> {
    encode_as(values, SchemeId::Rle, config)
}

pub fn encode_varint(values: &[u64]) -> EncodedBlock {
    varint::encode(values)
}

pub fn encode_bitpack(values: &[u64]) -> EncodedBlock {
    bitpack::encode(values)
}

pub fn encode_dictionary(values: &Values, config: &EncodingConfig) -> Result<EncodedBlock> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    encode_as(values, SchemeId::Dictionary, config)
}

pub fn encode_for_delta(values: &[i64]) -> EncodedBlock {
    for_delta::encode(values)
}

pub fn encode_zigzag(values: &[i64], config: &EncodingConfig) -> Result<EncodedBlock> {
    encode_as(&Values::Int64(values.to_vec()), SchemeId::ZigZag, config)
}

pub fn encode_nullable(present: &[bool], dense: &Values, config: &EncodingConfig) -> Result<EncodedBlock> {
    config.validate()?;
    nullable::encode(present, dense, Level::top(config))
}

pub fn encode_chunked(values: &Values) -> Result<EncodedBlock> {
    dispatch_values!(values, v => Ok(chunked::encode(v)),
        nullable => Err(Error::UnsupportedType("chunked cannot encode nullable values".into())))
}
