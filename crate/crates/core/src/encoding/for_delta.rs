//! Frame of reference: a block base (the minimum) plus bit-packed
//! independent offsets `value - base`. Every element is reachable without
//! touching its neighbours.

use super::bitpack;
use super::block::{EncodedBlock, SchemeId, BLOCK_HEADER_LEN};
use crate::error::{Error, Result};

pub trait ForInt: Copy + Ord + 'static {
    fn to_le(self) -> [u8; 8];
    fn from_le(b: [u8; 8]) -> Self;
    fn offset_from(self, base: Self) -> u64;
    fn add_offset(base: Self, offset: u64) -> Self;
}

impl ForInt for i64 {
    fn to_le(self) -> [u8; 8] {
        self.to_le_bytes()
    }
    fn from_le(b: [u8; 8]) -> Self {
        i64::from_le_bytes(b)
    }
    fn offset_from(self, base: Self) -> u64 {
        self.wrapping_sub(base) as u64
    }
    fn add_offset(base: Self, offset: u64) -> Self {
        base.wrapping_add(offset as i64)
    }
}

impl ForInt for u64 {
    fn to_le(self) -> [u8; 8] {
        self.to_le_bytes()
    }
    fn from_le(b: [u8; 8]) -> Self {
        u64::from_le_bytes(b)
    }
    fn offset_from(self, base: Self) -> u64 {
        self - base
    }
    fn add_offset(base: Self, offset: u64) -> Self {
        base.wrapping_add(offset)
    }
}

/// Base, width and offsets for `values`.
pub fn frame<T: ForInt>(values: &[T]) -> (T, u8, Vec<u64>) {
    let base = values.iter().copied().min().unwrap_or(T::from_le([0; 8]));
    let offsets: Vec<u64> = values.iter().map(|v| v.offset_from(base)).collect();
    let width = offsets.iter().copied().max().map_or(1, bitpack::bit_width);
    (base, width, offsets)
}

pub fn encode<T: ForInt>(values: &[T]) -> EncodedBlock {
    let (base, width, offsets) = frame(values);
    let mut payload = Vec::with_capacity(9 + bitpack::packed_len(values.len(), width));
    payload.extend_from_slice(&base.to_le());
    payload.push(width);
    bitpack::pack(&offsets, width, &mut payload);
    EncodedBlock::leaf(SchemeId::ForDelta, values.len(), payload)
}

pub fn encoded_size<T: ForInt>(values: &[T]) -> usize {
    let (_, width, _) = frame(values);
    BLOCK_HEADER_LEN + 9 + bitpack::packed_len(values.len(), width)
}

/// Base, width and packed offsets of a FOR payload.
pub fn parts(payload: &[u8]) -> Result<([u8; 8], u8, &[u8])> {
    if payload.len() < 9 {
        return Err(Error::corrupt("for-delta payload shorter than its header"));
    }
    Ok((payload[..8].try_into().unwrap(), payload[8], &payload[9..]))
}

pub fn decode<T: ForInt>(block: &EncodedBlock) -> Result<Vec<T>> {
    let (base, width, packed) = parts(&block.payload)?;
    let base = T::from_le(base);
    Ok(bitpack::unpack(packed, block.len(), width)?.into_iter().map(|o| T::add_offset(base, o)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independent_offsets() {
        let (base, width, offsets) = frame(&[100i64, 102, 101, 104]);
        assert_eq!((base, width, offsets), (100, 3, vec![0, 2, 1, 4]));
        let (base, width, offsets) = frame(&[5i64, 5]);
        assert_eq!((base, width, offsets), (5, 1, vec![0, 0]));
        let (base, _, offsets) = frame(&[-3i64, -1]);
        assert_eq!((base, offsets), (-3, vec![0, 2]));
    }

    #[test]
    fn extreme_range_roundtrips() {
        let vals = [i64::MIN, i64::MAX, 0, -1];
        let block = encode(&vals);
        assert_eq!(block.payload[8], 64);
        assert_eq!(decode::<i64>(&block).unwrap(), vals);
        let vals = [u64::MAX, 3];
        assert_eq!(decode::<u64>(&encode(&vals)).unwrap(), vals);
    }
}
