//! Constant and MainlyConstant: one repeated value, optionally with a sparse
//! list of `(position, value)` exceptions held in two child sub-columns.

use std::collections::HashMap;

use super::block::{EncodedBlock, SchemeId, BLOCK_HEADER_LEN};
use super::cascade::{self, Level};
use super::values::{Element, Key, Values};
use crate::error::{Error, Result};

pub fn is_constant<T: Element>(values: &[T]) -> bool {
    match values.split_first() {
        Some((first, rest)) => rest.iter().all(|v| v.same(first)),
        None => false,
    }
}

pub fn encode_constant<T: Element>(values: &[T]) -> Result<EncodedBlock> {
    if !is_constant(values) {
        return Err(Error::UnsupportedType("constant scheme needs one repeated value".into()));
    }
    let mut payload = Vec::new();
    values[0].write_plain(&mut payload);
    Ok(EncodedBlock::leaf(SchemeId::Constant, values.len(), payload))
}

pub fn constant_size<T: Element>(values: &[T]) -> usize {
    BLOCK_HEADER_LEN + values[0].plain_size()
}

pub fn decode_constant<T: Element>(block: &EncodedBlock) -> Result<Vec<T>> {
    let mut pos = 0;
    let v = T::read_plain(&block.payload, &mut pos)?;
    Ok(vec![v; block.len()])
}

/// Most frequent value; ties go to the earliest first occurrence.
pub fn most_frequent<T: Element>(values: &[T]) -> Option<&T> {
    let mut counts: HashMap<Key<'_, T>, (usize, usize)> = HashMap::new();
    for (i, v) in values.iter().enumerate() {
        counts.entry(Key(v)).or_insert((0, i)).0 += 1;
    }
    counts.into_iter().max_by(|a, b| a.1 .0.cmp(&b.1 .0).then(b.1 .1.cmp(&a.1 .1))).map(|(k, _)| k.0)
}

/// Splits into the constant and its exceptions.
pub fn exceptions<T: Element>(values: &[T], constant: &T) -> (Vec<u64>, Vec<T>) {
    let mut positions = Vec::new();
    let mut others = Vec::new();
    for (i, v) in values.iter().enumerate() {
        if !v.same(constant) {
            positions.push(i as u64);
            others.push(v.clone());
        }
    }
    (positions, others)
}

pub(crate) fn encode_mainly_constant<T: Element>(values: &[T], lvl: Level<'_>) -> Result<EncodedBlock> {
    let constant = most_frequent(values).ok_or(Error::EmptyInput)?.clone();
    let (positions, others) = exceptions(values, &constant);
    let mut payload = Vec::new();
    constant.write_plain(&mut payload);
    let children = vec![
        cascade::encode_level(&Values::UInt64(positions), lvl.count_child())?,
        cascade::encode_level(&T::into_values(others), lvl.child())?,
    ];
    Ok(EncodedBlock::with_children(SchemeId::MainlyConstant, values.len(), payload, children))
}

pub fn decode_mainly_constant<T: Element>(block: &EncodedBlock) -> Result<Vec<T>> {
    let mut pos = 0;
    let constant = T::read_plain(&block.payload, &mut pos)?;
    let positions = u64::from_values(cascade::decode(block.child(0)?, super::ValueType::UInt64)?)?;
    let others = T::from_values(cascade::decode(block.child(1)?, T::TYPE)?)?;
    if positions.len() != others.len() {
        return Err(Error::corrupt("mainly-constant exception lists differ in length"));
    }
    let mut out = vec![constant; block.len()];
    let mut prev: Option<u64> = None;
    for (p, v) in positions.into_iter().zip(others) {
        if p as usize >= out.len() || prev.is_some_and(|q| q >= p) {
            return Err(Error::corrupt("mainly-constant exception position out of order"));
        }
        out[p as usize] = v;
        prev = Some(p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{decode, EncodingConfig, ValueType};

    #[test]
    fn constant_roundtrip() {
        let block = encode_constant(&[5i64, 5, 5, 5]).unwrap();
        assert_eq!(block.scheme, SchemeId::Constant);
        assert_eq!(block.value_count, 4);
        assert_eq!(block.payload, 5i64.to_le_bytes());
        assert_eq!(decode(&block, ValueType::Int64).unwrap(), Values::Int64(vec![5; 4]));
        assert!(encode_constant(&[1i64, 2]).is_err());
    }

    #[test]
    fn single_exception() {
        let values = [0i64, 0, 7, 0, 0];
        assert_eq!(*most_frequent(&values).unwrap(), 0);
        assert_eq!(exceptions(&values, &0), (vec![2], vec![7]));
        let cfg = EncodingConfig::default();
        let block = encode_mainly_constant(&values, Level::top(&cfg)).unwrap();
        assert_eq!(block.payload, 0i64.to_le_bytes());
        assert_eq!(decode(&block, ValueType::Int64).unwrap(), Values::Int64(values.to_vec()));
    }

    #[test]
    fn frequency_ties_prefer_first_seen() {
        assert_eq!(*most_frequent(&[3u64, 4, 4, 3]).unwrap(), 3);
    }
}
