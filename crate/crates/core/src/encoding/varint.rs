//! Unsigned LEB128: 7 payload bits per byte, continuation flag in the MSB.

use super::block::{EncodedBlock, SchemeId, BLOCK_HEADER_LEN};
use crate::error::{Error, Result};

pub fn write_u64(mut v: u64, out: &mut Vec<u8>) {
    loop {
        let byte = (v & 0x7F) as u8;
        v >>= 7;
        if v == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

pub fn len_u64(v: u64) -> usize {
    let bits = 64 - v.leading_zeros() as usize;
    bits.div_ceil(7).max(1)
}

pub fn read_u64(buf: &[u8], pos: &mut usize) -> Result<u64> {
    let mut value = 0u64;
    let mut shift = 0u32;
    loop {
        let byte = *buf.get(*pos).ok_or_else(|| Error::corrupt("varint runs past end of buffer"))?;
        *pos += 1;
        if shift >= 64 || (shift == 63 && byte & 0x7E != 0) {
            return Err(Error::corrupt("varint overflows 64 bits"));
        }
        value |= ((byte & 0x7F) as u64) << shift;
        if byte & 0x80 == 0 {
            return Ok(value);
        }
        shift += 7;
    }
}

/// Byte span `[start, end)` of every value in a varint stream.
pub fn value_spans(buf: &[u8], count: usize) -> Result<Vec<(usize, usize)>> {
    let mut spans = Vec::with_capacity(count);
    let mut pos = 0;
    for _ in 0..count {
        let start = pos;
        read_u64(buf, &mut pos)?;
        spans.push((start, pos));
    }
    Ok(spans)
}

pub fn encode(values: &[u64]) -> EncodedBlock {
    let mut payload = Vec::with_capacity(values.len());
    for &v in values {
        write_u64(v, &mut payload);
    }
    EncodedBlock::leaf(SchemeId::Varint, values.len(), payload)
}

pub fn encoded_size(values: &[u64]) -> usize {
    BLOCK_HEADER_LEN + values.iter().map(|v| len_u64(*v)).sum::<usize>()
}

pub fn decode(block: &EncodedBlock) -> Result<Vec<u64>> {
    let mut pos = 0;
    let out = (0..block.len()).map(|_| read_u64(&block.payload, &mut pos)).collect::<Result<Vec<_>>>()?;
    if pos != block.payload.len() {
        return Err(Error::corrupt("trailing bytes after varint stream"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Textbook LEB128: emit low 7 bits, set the high bit while more remain.
    fn reference(v: u64) -> Vec<u8> {
        let mut groups = Vec::new();
        let mut x = v;
        loop {
            groups.push((x % 128) as u8);
            x /= 128;
            if x == 0 {
                break;
            }
        }
        let n = groups.len();
        groups.into_iter().enumerate().map(|(i, g)| if i + 1 < n { g + 128 } else { g }).collect()
    }

    #[test]
    fn known_encodings() {
        for (v, expect) in [(300u64, vec![0xAC, 0x02]), (0, vec![0x00]), (127, vec![0x7F]), (128, vec![0x80, 0x01])] {
            assert_eq!(reference(v), expect);
            assert_eq!(encode(&[v]).payload, expect);
        }
    }

    #[test]
    fn matches_reference_and_continuation_rule() {
        let mut x = 1u64;
        for i in 0..2000u64 {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(i);
            let v = x >> (i % 64);
            let bytes = encode(&[v]).payload;
            assert_eq!(bytes, reference(v));
            assert_eq!(bytes.len(), len_u64(v));
            let (last, rest) = bytes.split_last().unwrap();
            assert!(rest.iter().all(|b| b & 0x80 != 0));
            assert_eq!(last & 0x80, 0);
            assert_eq!(decode(&encode(&[v])).unwrap(), vec![v]);
        }
        assert_eq!(encode(&[u64::MAX]).payload.len(), 10);
    }

    #[test]
    fn spans_cover_stream() {
        let block = encode(&[1, 300, 2]);
        assert_eq!(value_spans(&block.payload, 3).unwrap(), vec![(0, 1), (1, 3), (3, 4)]);
    }

    #[test]
    fn overlong_is_rejected() {
        let mut pos = 0;
        assert!(read_u64(&[0xFF; 11], &mut pos).is_err());
        let mut pos = 0;
        assert!(read_u64(&[0x80], &mut pos).is_err());
    }
}
