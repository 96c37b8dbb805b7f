//! Nullable: a presence bitmap (LSB-first, bit set = non-null) in the payload
//! and the dense non-null values as a cascaded child.

use super::block::{EncodedBlock, SchemeId};
use super::cascade::{self, Level};
use super::values::{ValueType, Values};
use crate::error::{Error, Result};

pub fn pack_bits(bits: &[bool]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, b) in bits.iter().enumerate() {
        if *b {
            out[i / 8] |= 1 << (i % 8);
        }
    }
    out
}

pub fn unpack_bits(bytes: &[u8], count: usize) -> Result<Vec<bool>> {
    if bytes.len() < count.div_ceil(8) {
        return Err(Error::corrupt("bitmap shorter than value count"));
    }
    Ok((0..count).map(|i| bytes[i / 8] & (1 << (i % 8)) != 0).collect())
}

pub(crate) fn encode(present: &[bool], dense: &Values, lvl: Level<'_>) -> Result<EncodedBlock> {
    let set = present.iter().filter(|p| **p).count();
    if set != dense.len() {
        return Err(Error::LengthMismatch(format!("{set} present flags but {} dense values", dense.len())));
    }
    let child = cascade::encode_level(dense, lvl.child())?;
    Ok(EncodedBlock::with_children(SchemeId::Nullable, present.len(), pack_bits(present), vec![child]))
}

pub fn decode(block: &EncodedBlock, ty: ValueType) -> Result<Values> {
    let present = unpack_bits(&block.payload, block.len())?;
    let dense = cascade::decode(block.child(0)?, ty)?;
    if dense.is_nullable() || present.iter().filter(|p| **p).count() != dense.len() {
        return Err(Error::corrupt("nullable bitmap disagrees with dense values"));
    }
    Ok(Values::Nullable { present, values: Box::new(dense) })
}
