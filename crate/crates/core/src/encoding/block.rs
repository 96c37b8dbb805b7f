use std::fmt;

use crate::error::{Error, Result};

/// Codec identifiers. The numeric tags are persisted in files and must never
/// be renumbered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum SchemeId {
    Trivial = 0,
    Constant = 1,
    MainlyConstant = 2,
    Rle = 3,
    Dictionary = 4,
    FixedBitWidth = 5,
    Varint = 6,
    ZigZag = 7,
    ForDelta = 8,
    Nullable = 9,
    Chunked = 10,
}

impl SchemeId {
    pub const ALL: [SchemeId; 11] = [
        SchemeId::Trivial,
        SchemeId::Constant,
        SchemeId::MainlyConstant,
        SchemeId::Rle,
        SchemeId::Dictionary,
        SchemeId::FixedBitWidth,
        SchemeId::Varint,
        SchemeId::ZigZag,
        SchemeId::ForDelta,
        SchemeId::Nullable,
        SchemeId::Chunked,
    ];

    pub fn tag(self) -> u8 {
        self as u8
    }

    pub fn from_tag(tag: u8) -> Result<Self> {
        SchemeId::ALL.get(tag as usize).copied().ok_or_else(|| Error::corrupt(format!("unknown scheme tag {tag}")))
    }

    /// Schemes whose blocks carry sub-column children.
    pub fn has_children(self) -> bool {
        matches!(
            self,
            SchemeId::MainlyConstant | SchemeId::Rle | SchemeId::Dictionary | SchemeId::ZigZag | SchemeId::Nullable
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::Trivial => "trivial",
            SchemeId::Constant => "constant",
            SchemeId::MainlyConstant => "mainly_constant",
            SchemeId::Rle => "rle",
            SchemeId::Dictionary => "dictionary",
            SchemeId::FixedBitWidth => "fixed_bit_width",
            SchemeId::Varint => "varint",
            SchemeId::ZigZag => "zigzag",
            SchemeId::ForDelta => "for_delta",
            SchemeId::Nullable => "nullable",
            SchemeId::Chunked => "chunked",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Compact set of schemes, iterated in tag order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SchemeSet(u16);

impl SchemeSet {
    pub const fn empty() -> Self {
        SchemeSet(0)
    }

    pub fn all() -> Self {
        SchemeSet((1 << SchemeId::ALL.len()) - 1)
    }

    pub fn of(schemes: &[SchemeId]) -> Self {
        schemes.iter().fold(SchemeSet::empty(), |s, id| s.with(*id))
    }

    pub fn with(self, id: SchemeId) -> Self {
        SchemeSet(self.0 | 1 << id.tag())
    }

    pub fn without(self, id: SchemeId) -> Self {
        SchemeSet(self.0 & !(1 << id.tag()))
    }

    pub fn contains(self, id: SchemeId) -> bool {
        self.0 & (1 << id.tag()) != 0
    }

    pub fn intersect(self, other: SchemeSet) -> Self {
        SchemeSet(self.0 & other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = SchemeId> {
        SchemeId::ALL.into_iter().filter(move |id| self.contains(*id))
    }
}

/// Bytes of framing around every block: tag, value count, payload length and
/// child count.
pub const BLOCK_HEADER_LEN: usize = 1 + 4 + 4 + 1;

/// Hard cap on nesting accepted by the parser, independent of the writer's
/// configured recursion depth.
const MAX_PARSE_DEPTH: usize = 16;

/// One encoded (sub-)column. Children hold the cascaded sub-column encodings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedBlock {
    pub scheme: SchemeId,
    pub value_count: u32,
    pub payload: Vec<u8>,
    pub children: Vec<EncodedBlock>,
}

impl EncodedBlock {
    pub fn leaf(scheme: SchemeId, value_count: usize, payload: Vec<u8>) -> Self {
        EncodedBlock { scheme, value_count: value_count as u32, payload, children: Vec::new() }
    }

    pub fn with_children(scheme: SchemeId, value_count: usize, payload: Vec<u8>, children: Vec<EncodedBlock>) -> Self {
        EncodedBlock { scheme, value_count: value_count as u32, payload, children }
    }

    pub fn len(&self) -> usize {
        self.value_count as usize
    }

    pub fn is_empty(&self) -> bool {
        self.value_count == 0
    }

    /// Serialized size in bytes, children included.
    pub fn encoded_len(&self) -> usize {
        BLOCK_HEADER_LEN + self.payload.len() + self.children.iter().map(EncodedBlock::encoded_len).sum::<usize>()
    }

    /// Height of the child tree: 0 for a leaf block.
    pub fn depth(&self) -> usize {
        self.children.iter().map(|c| c.depth() + 1).max().unwrap_or(0)
    }

    /// Whether deleted elements can be overwritten in their original slots
    /// (as opposed to being removed from the sequence).
    pub fn supports_in_place_mask(&self) -> bool {
        match self.scheme {
            SchemeId::Trivial
            | SchemeId::FixedBitWidth
            | SchemeId::Varint
            | SchemeId::ForDelta
            | SchemeId::Nullable => true,
            SchemeId::ZigZag | SchemeId::Dictionary => {
                self.children.last().is_some_and(EncodedBlock::supports_in_place_mask)
            }
            _ => false,
        }
    }

    pub fn write_to(&self, out: &mut Vec<u8>) {
        out.push(self.scheme.tag());
        out.extend_from_slice(&self.value_count.to_le_bytes());
        out.extend_from_slice(&(self.payload.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.payload);
        out.push(self.children.len() as u8);
        for child in &self.children {
            child.write_to(out);
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        self.write_to(&mut out);
        out
    }

    /// Parses one block from the front of `bytes`, returning it and the number
    /// of bytes consumed.
    pub fn parse(bytes: &[u8]) -> Result<(EncodedBlock, usize)> {
        let mut pos = 0;
        let block = Self::parse_at(bytes, &mut pos, 0)?;
        Ok((block, pos))
    }

    fn parse_at(bytes: &[u8], pos: &mut usize, depth: usize) -> Result<EncodedBlock> {
        if depth > MAX_PARSE_DEPTH {
            return Err(Error::corrupt("block nesting too deep"));
        }
        let header = bytes.get(*pos..*pos + 9).ok_or_else(|| Error::corrupt("truncated block header"))?;
        let scheme = SchemeId::from_tag(header[0])?;
        let value_count = u32::from_le_bytes(header[1..5].try_into().unwrap());
        let payload_len = u32::from_le_bytes(header[5..9].try_into().unwrap()) as usize;
        *pos += 9;
        let payload =
            bytes.get(*pos..*pos + payload_len).ok_or_else(|| Error::corrupt("truncated block payload"))?.to_vec();
        *pos += payload_len;
        let child_count = *bytes.get(*pos).ok_or_else(|| Error::corrupt("missing child count"))?;
        *pos += 1;
        let mut children = Vec::with_capacity(child_count as usize);
        for _ in 0..child_count {
            children.push(Self::parse_at(bytes, pos, depth + 1)?);
        }
        Ok(EncodedBlock { scheme, value_count, payload, children })
    }

    pub(crate) fn child(&self, i: usize) -> Result<&EncodedBlock> {
        self.children.get(i).ok_or_else(|| Error::corrupt(format!("{} block missing child {i}", self.scheme)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_are_stable() {
        let tags: Vec<u8> = SchemeId::ALL.iter().map(|s| s.tag()).collect();
        assert_eq!(tags, (0..11).collect::<Vec<u8>>());
        for id in SchemeId::ALL {
            assert_eq!(SchemeId::from_tag(id.tag()).unwrap(), id);
        }
        assert!(SchemeId::from_tag(11).is_err());
    }

    #[test]
    fn layout_is_little_endian_and_count_prefixed() {
        let block = EncodedBlock::with_children(
            SchemeId::ZigZag,
            2,
            vec![],
            vec![EncodedBlock::leaf(SchemeId::Varint, 2, vec![0x01, 0x02])],
        );
        let bytes = block.to_bytes();
        assert_eq!(bytes, vec![7, 2, 0, 0, 0, 0, 0, 0, 0, 1, 6, 2, 0, 0, 0, 2, 0, 0, 0, 1, 2, 0]);
        assert_eq!(bytes.len(), block.encoded_len());
        let (parsed, used) = EncodedBlock::parse(&bytes).unwrap();
        assert_eq!(parsed, block);
        assert_eq!(used, bytes.len());
        assert_eq!(parsed.depth(), 1);
    }

    #[test]
    fn truncated_input_is_corrupt() {
        let bytes = EncodedBlock::leaf(SchemeId::Trivial, 1, vec![1; 8]).to_bytes();
        for cut in 0..bytes.len() {
            assert!(matches!(EncodedBlock::parse(&bytes[..cut]), Err(Error::CorruptBlock(_))));
        }
    }

    #[test]
    fn scheme_set_iterates_in_tag_order() {
        let set = SchemeSet::of(&[SchemeId::Varint, SchemeId::Trivial, SchemeId::Rle]);
        let v: Vec<_> = set.iter().collect();
        assert_eq!(v, vec![SchemeId::Trivial, SchemeId::Rle, SchemeId::Varint]);
        assert!(!set.without(SchemeId::Rle).contains(SchemeId::Rle));
    }
}
