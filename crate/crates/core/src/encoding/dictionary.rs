//! Dictionary encoding. Code 0 is permanently reserved for the mask entry;
//! distinct values take codes `1..=k` in first-occurrence order. The entries
//! child stores only the `k` real values.

use std::collections::HashMap;

use super::block::{EncodedBlock, SchemeId};
use super::cascade::{self, Level};
use super::values::{Element, Key, ValueType, Values};
use crate::error::{Error, Result};

pub const MASK_CODE: u64 = 0;

/// Distinct entries and per-value codes (starting at 1).
pub fn build<T: Element>(values: &[T]) -> (Vec<T>, Vec<u64>) {
    let mut index: HashMap<Key<'_, T>, u64> = HashMap::new();
    let mut entries = Vec::new();
    let mut codes = Vec::with_capacity(values.len());
    for v in values {
        let next = entries.len() as u64 + 1;
        let code = *index.entry(Key(v)).or_insert_with(|| {
            entries.push(v.clone());
            next
        });
        codes.push(code);
    }
    (entries, codes)
}

pub(crate) fn encode<T: Element>(values: &[T], lvl: Level<'_>) -> Result<EncodedBlock> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (entries, codes) = build(values);
    let children = vec![
        cascade::encode_level(&T::into_values(entries), lvl.child())?,
        cascade::encode_level(&Values::UInt64(codes), lvl.child())?,
    ];
    Ok(EncodedBlock::with_children(SchemeId::Dictionary, values.len(), Vec::new(), children))
}

/// Entries (without the mask slot) and the raw code stream.
pub fn decode_parts<T: Element>(block: &EncodedBlock) -> Result<(Vec<T>, Vec<u64>)> {
    if block.scheme != SchemeId::Dictionary {
        return Err(Error::corrupt(format!("expected dictionary block, found {}", block.scheme)));
    }
    let entries = T::from_values(cascade::decode(block.child(0)?, T::TYPE)?)?;
    let codes = u64::from_values(cascade::decode(block.child(1)?, ValueType::UInt64)?)?;
    if codes.len() != block.len() {
        return Err(Error::corrupt("dictionary code count mismatch"));
    }
    if codes.iter().any(|c| *c > entries.len() as u64) {
        return Err(Error::corrupt("dictionary code out of range"));
    }
    Ok((entries, codes))
}

/// Codes pointing at the mask entry decode to [`Element::mask_value`].
pub fn decode<T: Element>(block: &EncodedBlock) -> Result<Vec<T>> {
    let (entries, codes) = decode_parts::<T>(block)?;
    Ok(codes
        .into_iter()
        .map(|c| match c {
            MASK_CODE => T::mask_value(),
            c => entries[c as usize - 1].clone(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::EncodingConfig;

    #[test]
    fn first_occurrence_codes() {
        let vals: Vec<Vec<u8>> = ["a", "b", "a"].iter().map(|s| s.as_bytes().to_vec()).collect();
        let (entries, codes) = build(&vals);
        assert_eq!(entries, vec![b"a".to_vec(), b"b".to_vec()]);
        assert_eq!(codes, vec![1, 2, 1]);
    }

    #[test]
    fn empty_is_rejected() {
        let cfg = EncodingConfig::default();
        assert!(matches!(encode::<u64>(&[], Level::top(&cfg)), Err(Error::EmptyInput)));
    }

    #[test]
    fn mask_code_decodes_to_mask_value() {
        let block = EncodedBlock::with_children(
            SchemeId::Dictionary,
            3,
            vec![],
            vec![
                super::super::trivial::encode(&[b"a".to_vec(), b"b".to_vec()]),
                super::super::varint::encode(&[1, 2, 2]),
            ],
        );
        assert_eq!(decode::<Vec<u8>>(&block).unwrap(), vec![b"a".to_vec(), b"b".to_vec(), b"b".to_vec()]);
        let masked = EncodedBlock {
            children: vec![block.children[0].clone(), super::super::varint::encode(&[0, 2, 2])],
            ..block
        };
        assert_eq!(decode::<Vec<u8>>(&masked).unwrap()[0], Vec::<u8>::new());
    }
}
