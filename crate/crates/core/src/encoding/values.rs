use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};

/// Physical element type of a value sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ValueType {
    UInt64,
    Int64,
    Float32,
    Float64,
    Bytes,
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ValueType::UInt64 => "uint64",
            ValueType::Int64 => "int64",
            ValueType::Float32 => "float32",
            ValueType::Float64 => "float64",
            ValueType::Bytes => "bytes",
        };
        f.write_str(name)
    }
}

/// A typed, homogeneous value sequence: the unit every codec consumes and
/// produces.
///
/// `Nullable` carries a presence bitmap plus the dense non-null values; the
/// dense sequence length equals the number of `true` entries in `present`.
#[derive(Clone, Debug)]
pub enum Values {
    UInt64(Vec<u64>),
    Int64(Vec<i64>),
    Float32(Vec<f32>),
    Float64(Vec<f64>),
    Bytes(Vec<Vec<u8>>),
    Nullable { present: Vec<bool>, values: Box<Values> },
}

impl Values {
    pub fn len(&self) -> usize {
        match self {
            Values::UInt64(v) => v.len(),
            Values::Int64(v) => v.len(),
            Values::Float32(v) => v.len(),
            Values::Float64(v) => v.len(),
            Values::Bytes(v) => v.len(),
            Values::Nullable { present, .. } => present.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Element type; for nullable sequences, the type of the dense values.
    pub fn value_type(&self) -> ValueType {
        match self {
            Values::UInt64(_) => ValueType::UInt64,
            Values::Int64(_) => ValueType::Int64,
            Values::Float32(_) => ValueType::Float32,
            Values::Float64(_) => ValueType::Float64,
            Values::Bytes(_) => ValueType::Bytes,
            Values::Nullable { values, .. } => values.value_type(),
        }
    }

    pub fn is_nullable(&self) -> bool {
        matches!(self, Values::Nullable { .. })
    }

    /// Builds a nullable sequence from optional values, collapsing to the plain
    /// variant when nothing is null.
    pub fn from_options<T: Element>(items: Vec<Option<T>>) -> Values {
        if items.iter().all(Option::is_some) {
            return T::into_values(items.into_iter().flatten().collect());
        }
        let present = items.iter().map(Option::is_some).collect();
        let dense = items.into_iter().flatten().collect();
        Values::Nullable { present, values: Box::new(T::into_values(dense)) }
    }

    pub fn empty(ty: ValueType) -> Values {
        match ty {
            ValueType::UInt64 => Values::UInt64(Vec::new()),
            ValueType::Int64 => Values::Int64(Vec::new()),
            ValueType::Float32 => Values::Float32(Vec::new()),
            ValueType::Float64 => Values::Float64(Vec::new()),
            ValueType::Bytes => Values::Bytes(Vec::new()),
        }
    }

    /// Keeps only the positions where `keep` is true.
    pub fn filter(&self, keep: &[bool]) -> Values {
        fn pick<T: Clone>(v: &[T], keep: &[bool]) -> Vec<T> {
            v.iter().zip(keep).filter(|(_, k)| **k).map(|(x, _)| x.clone()).collect()
        }
        match self {
            Values::UInt64(v) => Values::UInt64(pick(v, keep)),
            Values::Int64(v) => Values::Int64(pick(v, keep)),
            Values::Float32(v) => Values::Float32(pick(v, keep)),
            Values::Float64(v) => Values::Float64(pick(v, keep)),
            Values::Bytes(v) => Values::Bytes(pick(v, keep)),
            Values::Nullable { present, values } => {
                let mut dense_keep = Vec::with_capacity(values.len());
                for (p, k) in present.iter().zip(keep) {
                    if *p {
                        dense_keep.push(*k);
                    }
                }
                Values::Nullable { present: pick(present, keep), values: Box::new(values.filter(&dense_keep)) }
            }
        }
    }
}

impl PartialEq for Values {
    /// Floats compare by bit pattern so NaN payloads and signed zeros are
    /// checked exactly.
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Values::UInt64(a), Values::UInt64(b)) => a == b,
            (Values::Int64(a), Values::Int64(b)) => a == b,
            (Values::Float32(a), Values::Float32(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
            }
            (Values::Float64(a), Values::Float64(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
            }
            (Values::Bytes(a), Values::Bytes(b)) => a == b,
            (Values::Nullable { present: pa, values: va }, Values::Nullable { present: pb, values: vb }) => {
                pa == pb && va == vb
            }
            _ => false,
        }
    }
}

/// Element-level behaviour shared by every codec that is generic over the
/// value type.
pub trait Element: Clone + fmt::Debug + Sized + 'static {
    const TYPE: ValueType;

    fn same(&self, other: &Self) -> bool;
    fn hash_key<H: Hasher>(&self, state: &mut H);
    /// Appends the plain little-endian representation.
    fn write_plain(&self, out: &mut Vec<u8>);
    fn read_plain(buf: &[u8], pos: &mut usize) -> Result<Self>;
    fn plain_size(&self) -> usize;
    /// A value with the same plain size whose bytes are all zero in the
    /// payload portion.
    fn zeroed(&self) -> Self;
    /// Value surfaced when a dictionary code points at the mask entry.
    fn mask_value() -> Self;
    fn into_values(v: Vec<Self>) -> Values;
    fn slice(values: &Values) -> Option<&[Self]>;
    fn from_values(values: Values) -> Result<Vec<Self>>;
}

fn take<'a>(buf: &'a [u8], pos: &mut usize, n: usize) -> Result<&'a [u8]> {
    let end = pos
        .checked_add(n)
        .filter(|e| *e <= buf.len())
        .ok_or_else(|| Error::corrupt("plain value runs past payload end"))?;
    let s = &buf[*pos..end];
    *pos = end;
    Ok(s)
}

macro_rules! fixed_element {
    ($t:ty, $variant:ident, $size:expr, $bits:expr) => {
        impl Element for $t {
            const TYPE: ValueType = ValueType::$variant;

            fn same(&self, other: &Self) -> bool {
                $bits(*self) == $bits(*other)
            }
            fn hash_key<H: Hasher>(&self, state: &mut H) {
                $bits(*self).hash(state)
            }
            fn write_plain(&self, out: &mut Vec<u8>) {
                out.extend_from_slice(&self.to_le_bytes());
            }
            fn read_plain(buf: &[u8], pos: &mut usize) -> Result<Self> {
                let s = take(buf, pos, $size)?;
                Ok(<$t>::from_le_bytes(s.try_into().unwrap()))
            }
            fn plain_size(&self) -> usize {
                $size
            }
            fn zeroed(&self) -> Self {
                <$t>::from_le_bytes([0u8; $size])
            }
            fn mask_value() -> Self {
                <$t>::from_le_bytes([0u8; $size])
            }
            fn into_values(v: Vec<Self>) -> Values {
                Values::$variant(v)
            }
            fn from_values(values: Values) -> Result<Vec<Self>> {
                match values {
                    Values::$variant(v) => Ok(v),
                    other => Err(Error::corrupt(format!(
                        "expected {} values, found {}",
                        ValueType::$variant,
                        other.value_type()
                    ))),
                }
            }
            fn slice(values: &Values) -> Option<&[Self]> {
                match values {
                    Values::$variant(v) => Some(v),
                    _ => None,
                }
            }
        }
    };
}

fixed_element!(u64, UInt64, 8, |x: u64| x);
fixed_element!(i64, Int64, 8, |x: i64| x);
fixed_element!(f32, Float32, 4, |x: f32| x.to_bits());
fixed_element!(f64, Float64, 8, |x: f64| x.to_bits());

impl Element for Vec<u8> {
    const TYPE: ValueType = ValueType::Bytes;

    fn same(&self, other: &Self) -> bool {
        self == other
    }
    fn hash_key<H: Hasher>(&self, state: &mut H) {
        self.hash(state)
    }
    fn write_plain(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(self.len() as u32).to_le_bytes());
        out.extend_from_slice(self);
    }
    fn read_plain(buf: &[u8], pos: &mut usize) -> Result<Self> {
        let len = u32::from_le_bytes(take(buf, pos, 4)?.try_into().unwrap()) as usize;
        Ok(take(buf, pos, len)?.to_vec())
    }
    fn plain_size(&self) -> usize {
        4 + self.len()
    }
    fn zeroed(&self) -> Self {
        vec![0; self.len()]
    }
    fn mask_value() -> Self {
        Vec::new()
    }
    fn into_values(v: Vec<Self>) -> Values {
        Values::Bytes(v)
    }
    fn from_values(values: Values) -> Result<Vec<Self>> {
        match values {
            Values::Bytes(v) => Ok(v),
            other => Err(Error::corrupt(format!("expected bytes values, found {}", other.value_type()))),
        }
    }
    fn slice(values: &Values) -> Option<&[Self]> {
        match values {
            Values::Bytes(v) => Some(v),
            _ => None,
        }
    }
}

/// Hash/Eq adapter so elements (including floats, by bits) can key a map.
pub(crate) struct Key<'a, T: Element>(pub &'a T);

impl<T: Element> PartialEq for Key<'_, T> {
    fn eq(&self, other: &Self) -> bool {
        self.0.same(other.0)
    }
}
impl<T: Element> Eq for Key<'_, T> {}
impl<T: Element> Hash for Key<'_, T> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash_key(state)
    }
}

/// Runs `$body` with `$v` bound to the typed slice of a non-nullable
/// `Values`; evaluates `$nullable` otherwise.
macro_rules! dispatch_values {
    ($values:expr, $v:ident => $body:expr, nullable => $nullable:expr) => {
        match $values {
            $crate::encoding::Values::UInt64($v) => $body,
            $crate::encoding::Values::Int64($v) => $body,
            $crate::encoding::Values::Float32($v) => $body,
            $crate::encoding::Values::Float64($v) => $body,
            $crate::encoding::Values::Bytes($v) => $body,
            $crate::encoding::Values::Nullable { .. } => $nullable,
        }
    };
}

/// Runs `$body` with the type alias `$t` bound to the element type for `$ty`.
macro_rules! dispatch_type {
    ($ty:expr, $t:ident => $body:expr) => {
        match $ty {
            $crate::encoding::ValueType::UInt64 => {
                type $t = u64;
                $body
            }
            $crate::encoding::ValueType::Int64 => {
                type $t = i64;
                $body
            }
            $crate::encoding::ValueType::Float32 => {
                type $t = f32;
                $body
            }
            $crate::encoding::ValueType::Float64 => {
                type $t = f64;
                $body
            }
            $crate::encoding::ValueType::Bytes => {
                type $t = Vec<u8>;
                $body
            }
        }
    };
}

pub(crate) use dispatch_type;
pub(crate) use dispatch_values;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_options_collapses_when_dense() {
        let v = Values::from_options(vec![Some(1i64), Some(2)]);
        assert_eq!(v, Values::Int64(vec![1, 2]));
        let v = Values::from_options(vec![Some(1i64), None, Some(3)]);
        assert_eq!(
            v,
            Values::Nullable { present: vec![true, false, true], values: Box::new(Values::Int64(vec![1, 3])) }
        );
    }

    #[test]
    fn nan_compares_by_bits() {
        let a = Values::Float32(vec![f32::NAN]);
        assert_eq!(a, a.clone());
        assert_ne!(Values::Float32(vec![0.0]), Values::Float32(vec![-0.0]));
    }

    #[test]
    fn filter_nullable_keeps_dense_alignment() {
        let v = Values::Nullable {
            present: vec![true, false, true, true],
            values: Box::new(Values::UInt64(vec![10, 30, 40])),
        };
        let f = v.filter(&[true, true, false, true]);
        assert_eq!(
            f,
            Values::Nullable { present: vec![true, false, true], values: Box::new(Values::UInt64(vec![10, 40])) }
        );
    }
}
