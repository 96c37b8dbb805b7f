//! Run-length encoding as two sub-columns: run values and run counts.

use super::block::{EncodedBlock, SchemeId};
use super::cascade::{self, Level};
use super::values::{Element, ValueType, Values};
use crate::error::{Error, Result};

/// Collapses consecutive equal elements. Counts are always `>= 1` and
/// adjacent run values always differ.
pub fn runs<T: Element>(values: &[T]) -> (Vec<T>, Vec<u64>) {
    let mut run_values: Vec<T> = Vec::new();
    let mut counts: Vec<u64> = Vec::new();
    for v in values {
        match run_values.last() {
            Some(last) if last.same(v) => *counts.last_mut().unwrap() += 1,
            _ => {
                run_values.push(v.clone());
                counts.push(1);
            }
        }
    }
    (run_values, counts)
}

pub(crate) fn encode<T: Element>(values: &[T], lvl: Level<'_>) -> Result<EncodedBlock> {
    let (run_values, counts) = runs(values);
    from_runs(run_values, counts, lvl)
}

pub(crate) fn from_runs<T: Element>(run_values: Vec<T>, counts: Vec<u64>, lvl: Level<'_>) -> Result<EncodedBlock> {
    let total: u64 = counts.iter().sum();
    let children = vec![
        cascade::encode_level(&T::into_values(run_values), lvl.child())?,
        cascade::encode_level(&Values::UInt64(counts), lvl.count_child())?,
    ];
    Ok(EncodedBlock::with_children(SchemeId::Rle, total as usize, Vec::new(), children))
}

/// Decoded run lists of an RLE block.
pub fn decode_runs<T: Element>(block: &EncodedBlock) -> Result<(Vec<T>, Vec<u64>)> {
    if block.scheme != SchemeId::Rle {
        return Err(Error::corrupt(format!("expected rle block, found {}", block.scheme)));
    }
    let run_values = T::from_values(cascade::decode(block.child(0)?, T::TYPE)?)?;
    let counts = u64::from_values(cascade::decode(block.child(1)?, ValueType::UInt64)?)?;
    if run_values.len() != counts.len() {
        return Err(Error::corrupt("rle value and count columns differ in length"));
    }
    if counts.contains(&0) {
        return Err(Error::corrupt("rle run with zero count"));
    }
    let total = counts.iter().try_fold(0u64, |a, c| a.checked_add(*c));
    if total != Some(block.value_count as u64) {
        return Err(Error::corrupt("rle counts do not sum to value count"));
    }
    Ok((run_values, counts))
}

pub fn decode<T: Element>(block: &EncodedBlock) -> Result<Vec<T>> {
    let (run_values, counts) = decode_runs::<T>(block)?;
    let mut out = Vec::with_capacity(block.len());
    for (v, c) in run_values.into_iter().zip(counts) {
        out.extend(std::iter::repeat_n(v, c as usize));
    }
    Ok(out)
}
