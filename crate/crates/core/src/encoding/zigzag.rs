//! ZigZag maps signed to unsigned (`0,-1,1,-2,...` to `0,1,2,3,...`); the
//! unsigned stream is a cascaded child.

use super::block::{EncodedBlock, SchemeId};
use super::cascade::{self, Level};
use super::values::{Element, ValueType, Values};
use crate::error::Result;

pub fn zigzag(v: i64) -> u64 {
    ((v << 1) ^ (v >> 63)) as u64
}

pub fn unzigzag(u: u64) -> i64 {
    ((u >> 1) as i64) ^ -((u & 1) as i64)
}

pub(crate) fn encode(values: &[i64], lvl: Level<'_>) -> Result<EncodedBlock> {
    let mapped: Vec<u64> = values.iter().map(|v| zigzag(*v)).collect();
    let child = cascade::encode_level(&Values::UInt64(mapped), lvl.child())?;
    Ok(EncodedBlock::with_children(SchemeId::ZigZag, values.len(), Vec::new(), vec![child]))
}

pub fn decode(block: &EncodedBlock) -> Result<Vec<i64>> {
    let raw = u64::from_values(cascade::decode(block.child(0)?, ValueType::UInt64)?)?;
    if raw.len() != block.len() {
        return Err(crate::Error::corrupt("zigzag child length mismatch"));
    }
    Ok(raw.into_iter().map(unzigzag).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mapping() {
        assert_eq!(zigzag(0), 0);
        assert_eq!(zigzag(-1), 1);
        assert_eq!(zigzag(1), 2);
        assert_eq!(zigzag(-2), 3);
        assert_eq!(zigzag(i64::MAX), u64::MAX - 1);
        assert_eq!(zigzag(i64::MIN), u64::MAX);
        for v in [0, 1, -1, 12345, -98765, i64::MIN, i64::MAX] {
            assert_eq!(unzigzag(zigzag(v)), v);
        }
    }
}
