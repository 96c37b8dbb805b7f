//! Plain little-endian layout; byte strings are `u32` length-prefixed.

use super::block::{EncodedBlock, SchemeId, BLOCK_HEADER_LEN};
use super::values::Element;
use crate::error::{Error, Result};

pub fn encode<T: Element>(values: &[T]) -> EncodedBlock {
    let mut payload = Vec::with_capacity(plain_len(values));
    for v in values {
        v.write_plain(&mut payload);
    }
    EncodedBlock::leaf(SchemeId::Trivial, values.len(), payload)
}

pub fn plain_len<T: Element>(values: &[T]) -> usize {
    values.iter().map(Element::plain_size).sum()
}

pub fn encoded_size<T: Element>(values: &[T]) -> usize {
    BLOCK_HEADER_LEN + plain_len(values)
}

pub fn decode<T: Element>(block: &EncodedBlock) -> Result<Vec<T>> {
    read_all(&block.payload, block.len())
}

pub fn read_all<T: Element>(buf: &[u8], count: usize) -> Result<Vec<T>> {
    let mut pos = 0;
    let out = (0..count).map(|_| T::read_plain(buf, &mut pos)).collect::<Result<Vec<_>>>()?;
    if pos != buf.len() {
        return Err(Error::corrupt("trailing bytes after plain values"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_layouts() {
        assert_eq!(encode(&[1i64, -1]).payload.len(), 16);
        assert_eq!(encode(&[1.5f32]).payload, 1.5f32.to_le_bytes());
        let b = encode(&[b"ab".to_vec(), vec![]]);
        assert_eq!(b.payload, vec![2, 0, 0, 0, b'a', b'b', 0, 0, 0, 0]);
        assert_eq!(decode::<Vec<u8>>(&b).unwrap(), vec![b"ab".to_vec(), vec![]]);
        assert_eq!(b.encoded_len(), encoded_size(&[b"ab".to_vec(), vec![]]));
    }
}
