//! Sample-based cascading scheme selection and the encode/decode dispatch
//! shared by every codec.

use std::borrow::Cow;

use super::block::{EncodedBlock, SchemeId, SchemeSet};
use super::values::{dispatch_type, dispatch_values, Element, ValueType, Values};
use super::{bitpack, chunked, constant, dictionary, for_delta, nullable, rle, trivial, varint, zigzag};
use crate::error::{Error, Result};

/// Every sample contains at least this many leading values (or the whole
/// input when shorter).
pub const MIN_SAMPLE: usize = 1024;

#[derive(Clone, Debug, PartialEq)]
pub struct EncodingConfig {
    /// Maximum height of the child tree under a top-level block.
    pub max_recursion_depth: usize,
    /// Fraction of the input inspected when estimating sizes.
    pub sample_fraction: f64,
    pub candidate_set: SchemeSet,
    pub allow_chunked: bool,
    /// Restricts count-like sub-columns (RLE run counts, exception positions)
    /// to schemes whose size cannot grow when values shrink or disappear, so
    /// pages can always be masked in place.
    pub maskable_only: bool,
}

impl Default for EncodingConfig {
    fn default() -> Self {
        EncodingConfig {
            max_recursion_depth: 2,
            sample_fraction: 0.01,
            candidate_set: SchemeSet::all(),
            allow_chunked: true,
            maskable_only: false,
        }
    }
}

impl EncodingConfig {
    /// Configuration for columns that must support physical in-place masking.
    pub fn maskable() -> Self {
        EncodingConfig {
            candidate_set: SchemeSet::all().without(SchemeId::Chunked),
            allow_chunked: false,
            maskable_only: true,
            ..EncodingConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_recursion_depth < 1 {
            return Err(Error::InvalidConfig("max_recursion_depth must be >= 1".into()));
        }
        if !(self.sample_fraction > 0.0 && self.sample_fraction <= 1.0) {
            return Err(Error::InvalidConfig("sample_fraction must be in (0, 1]".into()));
        }
        Ok(())
    }

    fn allows(&self, scheme: SchemeId) -> bool {
        // Trivial is always available so selection can never do worse than
        // it; Nullable is the only scheme that takes nullable input.
        matches!(scheme, SchemeId::Trivial | SchemeId::Nullable)
            || (self.candidate_set.contains(scheme) && (scheme != SchemeId::Chunked || self.allow_chunked))
    }
}

const COUNT_SCHEMES: [SchemeId; 3] = [SchemeId::Trivial, SchemeId::FixedBitWidth, SchemeId::Varint];

/// Position in the recursion: how many more child levels may be created.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Level<'a> {
    pub cfg: &'a EncodingConfig,
    pub remaining: usize,
    pub restrict: Option<SchemeSet>,
}

impl<'a> Level<'a> {
    pub fn top(cfg: &'a EncodingConfig) -> Self {
        Level { cfg, remaining: cfg.max_recursion_depth, restrict: None }
    }

    pub fn child(self) -> Self {
        Level { cfg: self.cfg, remaining: self.remaining.saturating_sub(1), restrict: None }
    }

    /// Child level for run counts and exception positions.
    pub fn count_child(self) -> Self {
        let mut lvl = self.child();
        if self.cfg.maskable_only {
            lvl.restrict = Some(SchemeSet::of(&COUNT_SCHEMES));
        }
        lvl
    }

    fn allows(&self, scheme: SchemeId) -> bool {
        self.cfg.allows(scheme)
            && self.restrict.is_none_or(|r| r.contains(scheme))
            && (self.remaining > 0 || !scheme.has_children())
    }
}

/// Whether `scheme` can represent `values` at all (type and data shape).
pub fn accepts(scheme: SchemeId, values: &Values) -> bool {
    let ty = values.value_type();
    if values.is_nullable() {
        return scheme == SchemeId::Nullable;
    }
    match scheme {
        SchemeId::Nullable => false,
        SchemeId::Trivial | SchemeId::Rle | SchemeId::Chunked => true,
        SchemeId::Constant => {
            dispatch_values!(values, v => constant::is_constant(v), nullable => false)
        }
        SchemeId::MainlyConstant | SchemeId::Dictionary => !values.is_empty(),
        SchemeId::FixedBitWidth | SchemeId::Varint => ty == ValueType::UInt64,
        SchemeId::ZigZag => ty == ValueType::Int64,
        SchemeId::ForDelta => matches!(ty, ValueType::UInt64 | ValueType::Int64),
    }
}

fn type_error(scheme: SchemeId, values: &Values) -> Error {
    Error::UnsupportedType(format!(
        "{} cannot encode {}{}",
        scheme,
        if values.is_nullable() { "nullable " } else { "" },
        values.value_type()
    ))
}

/// Encodes with a fixed top-level scheme; children are cascaded.
pub(crate) fn encode_with(values: &Values, scheme: SchemeId, lvl: Level<'_>) -> Result<EncodedBlock> {
    if !accepts(scheme, values) || (scheme.has_children() && lvl.remaining == 0) {
        return Err(type_error(scheme, values));
    }
    match (scheme, values) {
        (SchemeId::Nullable, Values::Nullable { present, values }) => nullable::encode(present, values, lvl),
        (SchemeId::FixedBitWidth, Values::UInt64(v)) => Ok(bitpack::encode(v)),
        (SchemeId::Varint, Values::UInt64(v)) => Ok(varint::encode(v)),
        (SchemeId::ZigZag, Values::Int64(v)) => zigzag::encode(v, lvl),
        (SchemeId::ForDelta, Values::Int64(v)) => Ok(for_delta::encode(v)),
        (SchemeId::ForDelta, Values::UInt64(v)) => Ok(for_delta::encode(v)),
        _ => dispatch_values!(values, v => encode_generic(v, scheme, lvl),
            nullable => Err(type_error(scheme, values))),
    }
}

fn encode_generic<T: Element>(v: &[T], scheme: SchemeId, lvl: Level<'_>) -> Result<EncodedBlock> {
    match scheme {
        SchemeId::Trivial => Ok(trivial::encode(v)),
        SchemeId::Constant => constant::encode_constant(v),
        SchemeId::MainlyConstant => constant::encode_mainly_constant(v, lvl),
        SchemeId::Rle => rle::encode(v, lvl),
        SchemeId::Dictionary => dictionary::encode(v, lvl),
        SchemeId::Chunked => Ok(chunked::encode(v)),
        other => Err(Error::UnsupportedType(format!("{other} cannot encode {}", T::TYPE))),
    }
}

fn trivial_size(values: &Values) -> Option<usize> {
    dispatch_values!(values, v => Some(trivial::encoded_size(v)), nullable => None)
}

/// Deterministic sample: the first [`MIN_SAMPLE`] values plus an even stride
/// over the rest, up to `sample_fraction` of the input.
pub fn sample<'v>(values: &'v Values, cfg: &EncodingConfig) -> Cow<'v, Values> {
    let n = values.len();
    let target = ((n as f64 * cfg.sample_fraction).ceil() as usize).max(MIN_SAMPLE).min(n);
    if target >= n {
        return Cow::Borrowed(values);
    }
    let head = MIN_SAMPLE.min(target);
    let rest = target - head;
    let mut keep = vec![false; n];
    keep[..head].iter_mut().for_each(|k| *k = true);
    for j in 0..rest {
        keep[head + j * (n - head) / rest] = true;
    }
    Cow::Owned(values.filter(&keep))
}

fn candidates(values: &Values, lvl: Level<'_>) -> Vec<SchemeId> {
    SchemeId::ALL.into_iter().filter(|s| lvl.allows(*s) && accepts(*s, values)).collect()
}

/// Picks the smallest encoding among the allowed candidates at this level.
pub(crate) fn encode_level(values: &Values, lvl: Level<'_>) -> Result<EncodedBlock> {
    let cands = candidates(values, lvl);
    match cands.as_slice() {
        [] => return Err(type_error(SchemeId::Trivial, values)),
        [only] => return encode_with(values, *only, lvl),
        _ => {}
    }
    let sample = sample(values, lvl.cfg);
    if sample.len() == values.len() {
        // Exact sizes: keep the smallest block, lowest tag on ties.
        let mut best: Option<EncodedBlock> = None;
        for s in cands {
            let block = encode_with(values, s, lvl)?;
            if best.as_ref().is_none_or(|b| block.encoded_len() < b.encoded_len()) {
                best = Some(block);
            }
        }
        return Ok(best.expect("at least two candidates"));
    }
    let mut best: Option<(usize, SchemeId)> = None;
    for s in cands {
        let size = encode_with(&sample, s, lvl)?.encoded_len();
        if best.is_none_or(|(b, _)| size < b) {
            best = Some((size, s));
        }
    }
    let (_, scheme) = best.expect("at least two candidates");
    let block = encode_with(values, scheme, lvl)?;
    match trivial_size(values) {
        Some(t) if block.encoded_len() > t => encode_with(values, SchemeId::Trivial, lvl),
        _ => Ok(block),
    }
}

/// Cascading encoder entry point.
pub fn encode_cascading(values: &Values, config: &EncodingConfig) -> Result<EncodedBlock> {
    config.validate()?;
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    encode_level(values, Level::top(config))
}

/// Encodes with `scheme` forced at the top level; children are cascaded
/// under `config`.
pub fn encode_as(values: &Values, scheme: SchemeId, config: &EncodingConfig) -> Result<EncodedBlock> {
    config.validate()?;
    encode_with(values, scheme, Level::top(config))
}

/// Size of `sample` encoded with `scheme` on top. Exact when the sample is the
/// whole input.
pub fn estimate_size(sample: &Values, scheme: SchemeId, config: &EncodingConfig) -> Result<usize> {
    match (scheme, sample) {
        (SchemeId::Trivial, _) if !sample.is_nullable() => {
            trivial_size(sample).ok_or_else(|| type_error(scheme, sample))
        }
        (SchemeId::FixedBitWidth, Values::UInt64(v)) => Ok(bitpack::encoded_size(v)),
        (SchemeId::Varint, Values::UInt64(v)) => Ok(varint::encoded_size(v)),
        (SchemeId::ForDelta, Values::Int64(v)) => Ok(for_delta::encoded_size(v)),
        (SchemeId::ForDelta, Values::UInt64(v)) => Ok(for_delta::encoded_size(v)),
        (SchemeId::Constant, _) if accepts(scheme, sample) => {
            dispatch_values!(sample, v => Ok(constant::constant_size(v)),
                nullable => Err(type_error(scheme, sample)))
        }
        _ => Ok(encode_as(sample, scheme, config)?.encoded_len()),
    }
}

/// Decodes a block whose logical element type is `ty`. Nullable blocks
/// decode to [`Values::Nullable`].
pub fn decode(block: &EncodedBlock, ty: ValueType) -> Result<Values> {
    let wrong = || Error::corrupt(format!("{} block cannot hold {ty} values", block.scheme));
    let out = match block.scheme {
        SchemeId::Nullable => return nullable::decode(block, ty),
        SchemeId::FixedBitWidth if ty == ValueType::UInt64 => Values::UInt64(bitpack::decode(block)?),
        SchemeId::Varint if ty == ValueType::UInt64 => Values::UInt64(varint::decode(block)?),
        SchemeId::ZigZag if ty == ValueType::Int64 => Values::Int64(zigzag::decode(block)?),
        SchemeId::ForDelta if ty == ValueType::Int64 => Values::Int64(for_delta::decode(block)?),
        SchemeId::ForDelta if ty == ValueType::UInt64 => Values::UInt64(for_delta::decode(block)?),
        SchemeId::FixedBitWidth | SchemeId::Varint | SchemeId::ZigZag | SchemeId::ForDelta => return Err(wrong()),
        scheme => dispatch_type!(ty, T => T::into_values(decode_generic::<T>(block, scheme)?)),
    };
    if out.len() != block.len() {
        return Err(Error::corrupt("decoded length differs from value count"));
    }
    Ok(out)
}

fn decode_generic<T: Element>(block: &EncodedBlock, scheme: SchemeId) -> Result<Vec<T>> {
    match scheme {
        SchemeId::Trivial => trivial::decode(block),
        SchemeId::Constant => constant::decode_constant(block),
        SchemeId::MainlyConstant => constant::decode_mainly_constant(block),
        SchemeId::Rle => rle::decode(block),
        SchemeId::Dictionary => dictionary::decode(block),
        SchemeId::Chunked => chunked::decode(block),
        _ => unreachable!("typed schemes handled by caller"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_is_prefix_plus_stride() {
        let cfg = EncodingConfig { sample_fraction: 0.5, ..EncodingConfig::default() };
        let values = Values::UInt64((0..4096).collect());
        let s = sample(&values, &cfg);
        let Values::UInt64(v) = s.as_ref() else { panic!() };
        assert_eq!(v.len(), 2048);
        assert_eq!(&v[..1024], &(0..1024).collect::<Vec<u64>>()[..]);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
        let small = Values::UInt64(vec![1, 2, 3]);
        assert!(matches!(sample(&small, &cfg), Cow::Borrowed(_)));
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = EncodingConfig::default();
        cfg.max_recursion_depth = 0;
        assert!(cfg.validate().is_err());
        let cfg = EncodingConfig { sample_fraction: 0.0, ..EncodingConfig::default() };
        assert!(encode_cascading(&Values::UInt64(vec![1]), &cfg).is_err());
    }

    #[test]
    fn restricted_count_child() {
        let cfg = EncodingConfig::maskable();
        let lvl = Level::top(&cfg).count_child();
        assert!(lvl.allows(SchemeId::Varint));
        assert!(!lvl.allows(SchemeId::ForDelta));
        assert!(!lvl.allows(SchemeId::Rle));
        let cfg = EncodingConfig::default();
        assert!(Level::top(&cfg).count_child().allows(SchemeId::Rle));
        assert!(!Level::top(&cfg).child().child().allows(SchemeId::Rle));
    }
}
