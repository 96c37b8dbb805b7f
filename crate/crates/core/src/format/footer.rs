//! Flat footer: fixed-width little-endian arrays located by offset arithmetic
//! on a 48-byte header, followed by a string heap. Nothing is decoded when a
//! footer is opened; every accessor reads straight from the byte buffer.
//!
//! The byte-level layout is documented in `docs/format.md`.

use std::marker::PhantomData;

use xxhash_rust::xxh3::xxh3_64;

use super::schema::{ColumnSchema, LogicalType};
use crate::error::{Error, Result};
use crate::quantization::QuantSpec;

pub const MAGIC: [u8; 4] = *b"BULN";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 48;
pub const DESCRIPTOR_LEN: usize = 24;
pub const NAME_ENTRY_LEN: usize = 16;
/// `[footer_len: u32][magic]` after the footer.
pub const TAIL_LEN: usize = 8;
/// Page type byte for sparse-delta pages.
pub const SPARSE_PAGE_TAG: u8 = 0xF0;

pub const FLAG_SPARSE: u8 = 1;

pub fn name_hash(name: &[u8]) -> u64 {
    xxh3_64(name)
}

/// Storage representation recorded per stored column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StoredQuant {
    None,
    Float(QuantSpec),
    IntRehash,
    DualHi,
    DualLo,
}

impl StoredQuant {
    pub fn code(self) -> u8 {
        match self {
            StoredQuant::None => 0,
            StoredQuant::Float(q) => q.tag(),
            StoredQuant::IntRehash => 5,
            StoredQuant::DualHi => 6,
            StoredQuant::DualLo => 7,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        Ok(match code {
            0 => StoredQuant::None,
            5 => StoredQuant::IntRehash,
            6 => StoredQuant::DualHi,
            7 => StoredQuant::DualLo,
            c => match QuantSpec::from_tag(c) {
                Some(q) if q.float_format().is_some() => StoredQuant::Float(q),
                _ => return Err(Error::TruncatedFooter(format!("unknown quantization code {c}"))),
            },
        })
    }
}

/// Footer-side description of one stored (physical) column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColumnDescriptor {
    pub name: String,
    pub logical_type: LogicalType,
    pub quant: StoredQuant,
    pub compliance_level: u8,
    pub flags: u8,
    /// Position of the owning column in the logical schema.
    pub logical_index: u32,
    /// Auxiliary bytes (the rehash table for rehashed columns).
    pub aux: Vec<u8>,
}

impl ColumnDescriptor {
    pub fn is_sparse(&self) -> bool {
        self.flags & FLAG_SPARSE != 0
    }
}

/// Owned footer contents, used when building or rewriting a footer.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FooterData {
    pub num_rows: u64,
    pub data_end: u64,
    pub page_offsets: Vec<u64>,
    pub group_offsets: Vec<u64>,
    pub deletion_words: Vec<u64>,
    /// Pages, then groups, then the root.
    pub checksums: Vec<u64>,
    /// Per-page removal bits for pages whose masked rows were removed from
    /// the encoded data, sorted by page index.
    pub page_masks: Vec<(u32, Vec<u64>)>,
    pub rows_per_page: Vec<u32>,
    pub pages_per_group: Vec<u32>,
    pub column_sizes: Vec<u32>,
    pub column_offsets: Vec<u32>,
    pub columns: Vec<ColumnDescriptor>,
    pub page_types: Vec<u8>,
}

struct Layout {
    page_offsets: usize,
    group_offsets: usize,
    deletion: usize,
    checksums: usize,
    name_index: usize,
    mask_words: usize,
    rows_per_page: usize,
    pages_per_group: usize,
    column_sizes: usize,
    column_offsets: usize,
    mask_index: usize,
    schema: usize,
    page_types: usize,
    heap: usize,
    end: usize,
}

#[allow(clippy::too_many_arguments)]
fn layout(c: usize, rows: u64, p: usize, g: usize, m: usize, w: usize, heap: usize) -> Option<Layout> {
    let d = usize::try_from(rows.div_ceil(64)).ok()?;
    let mut at = HEADER_LEN;
    let mut next = |n: usize, width: usize| -> Option<usize> {
        let start = at;
        at = at.checked_add(n.checked_mul(width)?)?;
        Some(start)
    };
    Some(Layout {
        page_offsets: next(p, 8)?,
        group_offsets: next(g, 8)?,
        deletion: next(d, 8)?,
        checksums: next(p.checked_add(g)?.checked_add(1)?, 8)?,
        name_index: next(c, NAME_ENTRY_LEN)?,
        mask_words: next(w, 8)?,
        rows_per_page: next(p, 4)?,
        pages_per_group: next(g, 4)?,
        column_sizes: next(g.checked_mul(c)?, 4)?,
        column_offsets: next(g.checked_mul(c)?, 4)?,
        mask_index: next(m, 8)?,
        schema: next(c, DESCRIPTOR_LEN)?,
        page_types: next(p, 1)?,
        heap: next(heap, 1)?,
        end: at,
    })
}

impl FooterData {
    pub fn to_bytes(&self) -> Vec<u8> {
        self.to_bytes_with(name_hash)
    }

    /// Serializes with a caller-chosen name hash (collision tests).
    pub fn to_bytes_with(&self, hasher: fn(&[u8]) -> u64) -> Vec<u8> {
        let mut heap = Vec::new();
        let mut descs = Vec::with_capacity(self.columns.len() * DESCRIPTOR_LEN);
        for c in &self.columns {
            let name_off = heap.len() as u32;
            heap.extend_from_slice(c.name.as_bytes());
            let aux_off = heap.len() as u32;
            heap.extend_from_slice(&c.aux);
            for v in [name_off, c.name.len() as u32, aux_off, c.aux.len() as u32] {
                descs.extend_from_slice(&v.to_le_bytes());
            }
            descs.extend_from_slice(&[c.logical_type.code(), c.quant.code(), c.compliance_level, c.flags]);
            descs.extend_from_slice(&c.logical_index.to_le_bytes());
        }
        let mut index: Vec<(u64, u32)> =
            self.columns.iter().enumerate().map(|(i, c)| (hasher(c.name.as_bytes()), i as u32)).collect();
        index.sort_unstable();
        let mask_words: usize = self.page_masks.iter().map(|(_, w)| w.len()).sum();

        let mut out = Vec::new();
        let u32s = |out: &mut Vec<u8>, v: &[u32]| v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes()));
        let u64s = |out: &mut Vec<u8>, v: &[u64]| v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes()));
        u32s(&mut out, &[VERSION, self.columns.len() as u32]);
        u64s(&mut out, &[self.num_rows]);
        u32s(
            &mut out,
            &[
                self.page_offsets.len() as u32,
                self.pages_per_group.len() as u32,
                self.page_masks.len() as u32,
                mask_words as u32,
            ],
        );
        u64s(&mut out, &[self.data_end]);
        u32s(&mut out, &[heap.len() as u32, 0]);
        debug_assert_eq!(out.len(), HEADER_LEN);

        u64s(&mut out, &self.page_offsets);
        u64s(&mut out, &self.group_offsets);
        u64s(&mut out, &self.deletion_words);
        u64s(&mut out, &self.checksums);
        for (h, i) in &index {
            out.extend_from_slice(&h.to_le_bytes());
            u32s(&mut out, &[*i, 0]);
        }
        for (_, w) in &self.page_masks {
            u64s(&mut out, w);
        }
        u32s(&mut out, &self.rows_per_page);
        u32s(&mut out, &self.pages_per_group);
        u32s(&mut out, &self.column_sizes);
        u32s(&mut out, &self.column_offsets);
        let mut word_start = 0u32;
        for (page, w) in &self.page_masks {
            u32s(&mut out, &[*page, word_start]);
            word_start += w.len() as u32;
        }
        out.extend_from_slice(&descs);
        out.extend_from_slice(&self.page_types);
        out.extend_from_slice(&heap);
        out
    }
}

/// A little-endian word that can be read from an unaligned byte slice.
pub trait LeWord: Copy + 'static {
    const SIZE: usize;
    fn read(b: &[u8]) -> Self;
}

impl LeWord for u8 {
    const SIZE: usize = 1;
    fn read(b: &[u8]) -> Self {
        b[0]
    }
}
impl LeWord for u32 {
    const SIZE: usize = 4;
    fn read(b: &[u8]) -> Self {
        u32::from_le_bytes(b[..4].try_into().unwrap())
    }
}
impl LeWord for u64 {
    const SIZE: usize = 8;
    fn read(b: &[u8]) -> Self {
        u64::from_le_bytes(b[..8].try_into().unwrap())
    }
}

/// Fixed-width array view over footer bytes.
#[derive(Clone, Copy)]
pub struct LeArray<'a, T> {
    bytes: &'a [u8],
    _t: PhantomData<T>,
}

impl<'a, T: LeWord> LeArray<'a, T> {
    fn new(bytes: &'a [u8]) -> Self {
        LeArray { bytes, _t: PhantomData }
    }

    pub fn len(&self) -> usize {
        self.bytes.len() / T::SIZE
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }

    pub fn get(&self, i: usize) -> T {
        T::read(&self.bytes[i * T::SIZE..])
    }

    pub fn iter(&self) -> impl Iterator<Item = T> + 'a {
        self.bytes.chunks_exact(T::SIZE).map(T::read)
    }

    pub fn to_vec(&self) -> Vec<T> {
        self.iter().collect()
    }

    /// First index whose element is not less than `target`, for sorted
    /// arrays.
    pub fn lower_bound(&self, target: T) -> usize
    where
        T: Ord,
    {
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.get(mid) < target {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// Zero-copy view of a footer. Opening validates only the header and total
/// length, so the cost does not depend on the number of columns.
#[derive(Clone, Copy)]
pub struct FooterView<'a> {
    buf: &'a [u8],
    num_columns: usize,
    num_rows: u64,
    num_pages: usize,
    num_groups: usize,
    num_masks: usize,
    data_end: u64,
    lay_page_offsets: usize,
    lay_group_offsets: usize,
    lay_deletion: usize,
    lay_checksums: usize,
    lay_name_index: usize,
    lay_mask_words: usize,
    lay_rows_per_page: usize,
    lay_pages_per_group: usize,
    lay_column_sizes: usize,
    lay_column_offsets: usize,
    lay_mask_index: usize,
    lay_schema: usize,
    lay_page_types: usize,
    lay_heap: usize,
    lay_end: usize,
}

fn rd32(b: &[u8], at: usize) -> u32 {
    u32::read(&b[at..])
}

fn rd64(b: &[u8], at: usize) -> u64 {
    u64::read(&b[at..])
}

/// Locates the footer inside a complete file image, returning
/// `(footer_start, footer_len)`.
pub fn locate_footer(file_len: u64, tail: &[u8; TAIL_LEN]) -> Result<(u64, usize)> {
    if tail[4..] != MAGIC {
        return Err(Error::BadMagic);
    }
    let len = u32::from_le_bytes(tail[..4].try_into().unwrap()) as u64;
    let start = file_len
        .checked_sub(TAIL_LEN as u64 + len)
        .filter(|s| *s >= MAGIC.len() as u64)
        .ok_or_else(|| Error::TruncatedFooter(format!("footer length {len} exceeds file size {file_len}")))?;
    Ok((start, len as usize))
}

impl<'a> FooterView<'a> {
    /// Opens the footer at the end of a whole-file buffer.
    pub fn from_file(file: &'a [u8]) -> Result<Self> {
        if file.len() < TAIL_LEN + MAGIC.len() {
            return Err(Error::TruncatedFooter("file shorter than footer tail".into()));
        }
        let tail: &[u8; TAIL_LEN] = file[file.len() - TAIL_LEN..].try_into().unwrap();
        let (start, len) = locate_footer(file.len() as u64, tail)?;
        FooterView::parse(&file[start as usize..start as usize + len])
    }

    pub fn parse(buf: &'a [u8]) -> Result<Self> {
        if buf.len() < HEADER_LEN {
            return Err(Error::TruncatedFooter(format!("{} bytes, header needs {HEADER_LEN}", buf.len())));
        }
        let version = rd32(buf, 0);
        if version != VERSION {
            return Err(Error::TruncatedFooter(format!("unsupported footer version {version}")));
        }
        let num_columns = rd32(buf, 4) as usize;
        let num_rows = rd64(buf, 8);
        let num_pages = rd32(buf, 16) as usize;
        let num_groups = rd32(buf, 20) as usize;
        let num_masks = rd32(buf, 24) as usize;
        let mask_words = rd32(buf, 28) as usize;
        let data_end = rd64(buf, 32);
        let heap_len = rd32(buf, 40) as usize;
        let l = layout(num_columns, num_rows, num_pages, num_groups, num_masks, mask_words, heap_len)
            .filter(|l| l.end <= buf.len())
            .ok_or_else(|| Error::TruncatedFooter("footer arrays exceed footer length".into()))?;
        Ok(FooterView {
            buf,
            num_columns,
            num_rows,
            num_pages,
            num_groups,
            num_masks,
            data_end,
            lay_page_offsets: l.page_offsets,
            lay_group_offsets: l.group_offsets,
            lay_deletion: l.deletion,
            lay_checksums: l.checksums,
            lay_name_index: l.name_index,
            lay_mask_words: l.mask_words,
            lay_rows_per_page: l.rows_per_page,
            lay_pages_per_group: l.pages_per_group,
            lay_column_sizes: l.column_sizes,
            lay_column_offsets: l.column_offsets,
            lay_mask_index: l.mask_index,
            lay_schema: l.schema,
            lay_page_types: l.page_types,
            lay_heap: l.heap,
            lay_end: l.end,
        })
    }

    fn arr<T: LeWord>(&self, start: usize, end: usize) -> LeArray<'a, T> {
        LeArray::new(&self.buf[start..end])
    }

    pub fn bytes(&self) -> &'a [u8] {
        self.buf
    }

    /// Bytes actually used by the footer (any trailing slot padding excluded).
    pub fn used_len(&self) -> usize {
        self.lay_end
    }

    pub fn num_rows(&self) -> u64 {
        self.num_rows
    }
    pub fn num_columns(&self) -> usize {
        self.num_columns
    }
    pub fn num_pages(&self) -> usize {
        self.num_pages
    }
    pub fn num_groups(&self) -> usize {
        self.num_groups
    }
    pub fn data_end(&self) -> u64 {
        self.data_end
    }

    pub fn page_offsets(&self) -> LeArray<'a, u64> {
        self.arr(self.lay_page_offsets, self.lay_group_offsets)
    }
    pub fn group_offsets(&self) -> LeArray<'a, u64> {
        self.arr(self.lay_group_offsets, self.lay_deletion)
    }
    pub fn deletion_vec(&self) -> LeArray<'a, u64> {
        self.arr(self.lay_deletion, self.lay_checksums)
    }
    pub fn checksums(&self) -> LeArray<'a, u64> {
        self.arr(self.lay_checksums, self.lay_name_index)
    }
    pub fn rows_per_page(&self) -> LeArray<'a, u32> {
        self.arr(self.lay_rows_per_page, self.lay_pages_per_group)
    }
    pub fn pages_per_group(&self) -> LeArray<'a, u32> {
        self.arr(self.lay_pages_per_group, self.lay_column_sizes)
    }
    pub fn column_sizes(&self) -> LeArray<'a, u32> {
        self.arr(self.lay_column_sizes, self.lay_column_offsets)
    }
    pub fn column_offsets(&self) -> LeArray<'a, u32> {
        self.arr(self.lay_column_offsets, self.lay_mask_index)
    }
    pub fn page_compression_types(&self) -> LeArray<'a, u8> {
        self.arr(self.lay_page_types, self.lay_heap)
    }

    pub fn root_checksum(&self) -> u64 {
        self.checksums().get(self.num_pages + self.num_groups)
    }

    pub fn is_deleted(&self, row: u64) -> bool {
        self.deletion_vec().get((row / 64) as usize) >> (row % 64) & 1 == 1
    }

    pub fn deleted_count(&self) -> u64 {
        self.deletion_vec().iter().map(|w| w.count_ones() as u64).sum()
    }

    fn heap(&self, off: u32, len: u32) -> Result<&'a [u8]> {
        let start = self.lay_heap + off as usize;
        let end = start + len as usize;
        if end > self.lay_end {
            return Err(Error::TruncatedFooter("heap reference out of bounds".into()));
        }
        Ok(&self.buf[start..end])
    }

    fn desc_at(&self, col: usize) -> &'a [u8] {
        let at = self.lay_schema + col * DESCRIPTOR_LEN;
        &self.buf[at..at + DESCRIPTOR_LEN]
    }

    pub fn column_name_bytes(&self, col: usize) -> Result<&'a [u8]> {
        let d = self.desc_at(col);
        self.heap(rd32(d, 0), rd32(d, 4))
    }

    pub fn column_name(&self, col: usize) -> Result<&'a str> {
        std::str::from_utf8(self.column_name_bytes(col)?)
            .map_err(|_| Error::TruncatedFooter("column name is not utf-8".into()))
    }

    pub fn column(&self, col: usize) -> Result<ColumnDescriptor> {
        if col >= self.num_columns {
            return Err(Error::ColumnNotFound(format!("column index {col}")));
        }
        let d = self.desc_at(col);
        Ok(ColumnDescriptor {
            name: self.column_name(col)?.to_string(),
            aux: self.heap(rd32(d, 8), rd32(d, 12))?.to_vec(),
            logical_type: LogicalType::from_code(d[16])?,
            quant: StoredQuant::from_code(d[17])?,
            compliance_level: d[18],
            flags: d[19],
            logical_index: rd32(d, 20),
        })
    }

    pub fn columns(&self) -> Result<Vec<ColumnDescriptor>> {
        (0..self.num_columns).map(|c| self.column(c)).collect()
    }

    fn name_entry(&self, i: usize) -> (u64, u32) {
        let at = self.lay_name_index + i * NAME_ENTRY_LEN;
        (rd64(self.buf, at), rd32(self.buf, at + 8))
    }

    /// Binary search on the name index, verifying the full stored name for
    /// every entry with a matching hash.
    pub fn lookup_hashed(&self, name: &str, hash: u64) -> Result<usize> {
        let (mut lo, mut hi) = (0, self.num_columns);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.name_entry(mid).0 < hash {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        let mut i = lo;
        while i < self.num_columns {
            let (h, col) = self.name_entry(i);
            if h != hash {
                break;
            }
            let col = col as usize;
            if col < self.num_columns && self.column_name_bytes(col)? == name.as_bytes() {
                return Ok(col);
            }
            i += 1;
        }
        Err(Error::ColumnNotFound(name.to_string()))
    }

    pub fn lookup(&self, name: &str) -> Result<usize> {
        self.lookup_hashed(name, name_hash(name.as_bytes()))
    }

    /// Removal bits for a page, if any rows of it were removed by masking.
    pub fn page_mask(&self, page: usize) -> Option<LeArray<'a, u64>> {
        let (mut lo, mut hi) = (0, self.num_masks);
        let entry = |i: usize| {
            let at = self.lay_mask_index + i * 8;
            (rd32(self.buf, at) as usize, rd32(self.buf, at + 4) as usize)
        };
        while lo < hi {
            let mid = (lo + hi) / 2;
            if entry(mid).0 < page {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        if lo == self.num_masks || entry(lo).0 != page {
            return None;
        }
        let start = entry(lo).1;
        let end =
            if lo + 1 < self.num_masks { entry(lo + 1).1 } else { (self.lay_rows_per_page - self.lay_mask_words) / 8 };
        Some(self.arr(self.lay_mask_words + start * 8, self.lay_mask_words + end * 8))
    }

    /// Byte range `[start, end)` of the chunk of stored column `col` in `group`.
    pub fn chunk_range(&self, group: usize, col: usize) -> (u64, u64) {
        let k = group * self.num_columns + col;
        let start = self.group_offsets().get(group) + self.column_offsets().get(k) as u64;
        (start, start + self.column_sizes().get(k) as u64)
    }

    /// Global page indices of a chunk.
    pub fn chunk_pages(&self, group: usize, col: usize) -> std::ops::Range<usize> {
        let (start, _) = self.chunk_range(group, col);
        let first = self.page_offsets().lower_bound(start);
        let per_chunk = self.pages_per_group().get(group) as usize / self.num_columns.max(1);
        first..first + per_chunk
    }

    /// End offset of a page (start of the next page, or the data end).
    pub fn page_end(&self, page: usize) -> u64 {
        if page + 1 < self.num_pages {
            self.page_offsets().get(page + 1)
        } else {
            self.data_end
        }
    }

    /// Copies everything out for modification.
    pub fn to_data(&self) -> Result<FooterData> {
        let mut page_masks = Vec::with_capacity(self.num_masks);
        for i in 0..self.num_masks {
            let page = rd32(self.buf, self.lay_mask_index + i * 8);
            page_masks.push((page, self.page_mask(page as usize).map(|a| a.to_vec()).unwrap_or_default()));
        }
        Ok(FooterData {
            num_rows: self.num_rows,
            data_end: self.data_end,
            page_offsets: self.page_offsets().to_vec(),
            group_offsets: self.group_offsets().to_vec(),
            deletion_words: self.deletion_vec().to_vec(),
            checksums: self.checksums().to_vec(),
            page_masks,
            rows_per_page: self.rows_per_page().to_vec(),
            pages_per_group: self.pages_per_group().to_vec(),
            column_sizes: self.column_sizes().to_vec(),
            column_offsets: self.column_offsets().to_vec(),
            columns: self.columns()?,
            page_types: self.page_compression_types().to_vec(),
        })
    }
}

/// Stored descriptor(s) for a logical column; dual-split columns expand to
/// `name.hi` and `name.lo`.
pub fn descriptors_for(col: &ColumnSchema, logical_index: u32) -> Vec<ColumnDescriptor> {
    let base = |name: String, quant: StoredQuant| ColumnDescriptor {
        name,
        logical_type: col.logical_type,
        quant,
        compliance_level: col.compliance_level,
        flags: if col.is_sparse_sequence { FLAG_SPARSE } else { 0 },
        logical_index,
        aux: Vec::new(),
    };
    match col.quantization {
        Some(QuantSpec::DualSplit16) => vec![
            base(format!("{}.hi", col.name), StoredQuant::DualHi),
            base(format!("{}.lo", col.name), StoredQuant::DualLo),
        ],
        Some(QuantSpec::IntRehash) => vec![base(col.name.clone(), StoredQuant::IntRehash)],
        Some(q) => vec![base(col.name.clone(), StoredQuant::Float(q))],
        None => vec![base(col.name.clone(), StoredQuant::None)],
    }
}
