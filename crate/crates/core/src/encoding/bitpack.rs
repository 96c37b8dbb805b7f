//! Fixed-width bit packing: element `i` occupies bits `[i*w, (i+1)*w)` of a
//! little-endian bit stream.

use super::block::{EncodedBlock, SchemeId};
use crate::error::{Error, Result};

/// Bits needed for `v`, with a floor of 1.
pub fn bit_width(v: u64) -> u8 {
    (64 - v.leading_zeros()).max(1) as u8
}

pub fn packed_len(count: usize, width: u8) -> usize {
    (count * width as usize).div_ceil(8)
}

pub fn pack(values: &[u64], width: u8, out: &mut Vec<u8>) {
    let start = out.len();
    out.resize(start + packed_len(values.len(), width), 0);
    let buf = &mut out[start..];
    for (i, &v) in values.iter().enumerate() {
        write_slot(buf, i, width, v);
    }
}

pub fn unpack(buf: &[u8], count: usize, width: u8) -> Result<Vec<u64>> {
    if width == 0 || width > 64 {
        return Err(Error::corrupt(format!("invalid bit width {width}")));
    }
    if buf.len() < packed_len(count, width) {
        return Err(Error::corrupt("bit-packed payload too short"));
    }
    Ok((0..count).map(|i| read_slot(buf, i, width)).collect())
}

/// Random access to element `i`.
pub fn read_slot(buf: &[u8], i: usize, width: u8) -> u64 {
    let bit = i * width as usize;
    let mut value = 0u64;
    let mut got = 0usize;
    while got < width as usize {
        let pos = bit + got;
        let byte = buf[pos / 8] as u64;
        let shift = pos % 8;
        let take = (8 - shift).min(width as usize - got);
        let chunk = (byte >> shift) & ((1u64 << take) - 1);
        value |= chunk << got;
        got += take;
    }
    value
}

pub fn write_slot(buf: &mut [u8], i: usize, width: u8, value: u64) {
    let bit = i * width as usize;
    let mut put = 0usize;
    while put < width as usize {
        let pos = bit + put;
        let shift = pos % 8;
        let take = (8 - shift).min(width as usize - put);
        let mask = (((1u16 << take) - 1) as u8) << shift;
        let chunk = (((value >> put) as u8) << shift) & mask;
        buf[pos / 8] = (buf[pos / 8] & !mask) | chunk;
        put += take;
    }
}

/// FixedBitWidth block: payload is `[width][packed bits]`.
pub fn encode(values: &[u64]) -> EncodedBlock {
    let width = values.iter().copied().max().map_or(1, bit_width);
    let mut payload = Vec::with_capacity(1 + packed_len(values.len(), width));
    payload.push(width);
    pack(values, width, &mut payload);
    EncodedBlock::leaf(SchemeId::FixedBitWidth, values.len(), payload)
}

pub fn encoded_size(values: &[u64]) -> usize {
    let width = values.iter().copied().max().map_or(1, bit_width);
    super::block::BLOCK_HEADER_LEN + 1 + packed_len(values.len(), width)
}

pub fn decode(block: &EncodedBlock) -> Result<Vec<u64>> {
    let width = *block.payload.first().ok_or_else(|| Error::corrupt("fixed-bit-width payload missing width"))?;
    unpack(&block.payload[1..], block.len(), width)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Bit-at-a-time reference packer.
    fn reference_pack(values: &[u64], width: u8) -> Vec<u8> {
        let mut bits = Vec::new();
        for v in values {
            for b in 0..width {
                bits.push((v >> b) & 1 == 1);
            }
        }
        let mut out = vec![0u8; bits.len().div_ceil(8)];
        for (i, bit) in bits.iter().enumerate() {
            if *bit {
                out[i / 8] |= 1 << (i % 8);
            }
        }
        out
    }

    #[test]
    fn three_seven_five_packs_at_width_three() {
        let block = encode(&[3, 7, 5]);
        assert_eq!(block.payload[0], 3);
        assert_eq!(&block.payload[1..], &reference_pack(&[3, 7, 5], 3)[..]);
        assert_eq!(&block.payload[1..], &[0x7B, 0x01]);
        assert_eq!(decode(&block).unwrap(), vec![3, 7, 5]);
    }

    #[test]
    fn all_zero_uses_width_one() {
        let block = encode(&[0, 0, 0]);
        assert_eq!(block.payload, vec![1, 0]);
    }

    #[test]
    fn max_255_is_width_eight() {
        assert_eq!(encode(&[255]).payload, vec![8, 255]);
    }

    #[test]
    fn wide_values_roundtrip() {
        let vals = [u64::MAX, 0, 1 << 63, 12345678901234];
        let block = encode(&vals);
        assert_eq!(block.payload[0], 64);
        assert_eq!(decode(&block).unwrap(), vals);
        for w in 1..=64u8 {
            let mask = if w == 64 { u64::MAX } else { (1 << w) - 1 };
            let vals: Vec<u64> = (0..37u64).map(|i| i.wrapping_mul(0x9E37_79B9_7F4A_7C15) & mask).collect();
            let mut buf = Vec::new();
            pack(&vals, w, &mut buf);
            assert_eq!(buf, reference_pack(&vals, w));
            assert_eq!(unpack(&buf, vals.len(), w).unwrap(), vals);
        }
    }

    #[test]
    fn write_slot_leaves_neighbours() {
        let mut buf = Vec::new();
        pack(&[5, 6, 7, 3], 3, &mut buf);
        write_slot(&mut buf, 1, 3, 0);
        assert_eq!(unpack(&buf, 4, 3).unwrap(), vec![5, 0, 7, 3]);
    }
}
