//! Row deletion with three compliance levels.
//!
//! | level | effect |
//! |-------|--------|
//! | 0 | refused with [`Error::RewriteRequired`] |
//! | 1 | deletion-vector bits set in the footer; pages untouched |
//! | 2 | level 1, plus deleted values of every level-2 column physically masked inside their pages |
//!
//! Masked pages keep their byte size and position. Checksums are updated
//! along one leaf-to-root path per rewritten page. The footer is rewritten in
//! its old slot when it fits (only changed bytes are written); otherwise a
//! new footer and tail are appended after the old one.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions, TryLockError};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub mod mask;

pub use crate::format::{compute_checksum_tree, update_checksums_incremental, ChecksumTree};
pub use mask::{
    decode_with_masks, mask_bitpacked, mask_block, mask_dictionary, mask_for_delta, mask_rle, mask_trivial,
    mask_varint, position_flags, reinsert_masks, remove_elements, Masked,
};

use crate::encoding::{ValueType, Values};
use crate::error::{Error, Result};
use crate::format::io::{ReadAt, WriteAt};
use crate::format::page::{frame_page, page_body, page_kind, PageBody, PageKind};
use crate::format::{
    locate_footer, locate_row, ColumnDescriptor, FooterData, FooterView, StoredQuant, MAGIC, TAIL_LEN,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum ComplianceLevel {
    Plain = 0,
    DeletionVector = 1,
    PhysicalMask = 2,
}

impl ComplianceLevel {
    pub fn as_u8(self) -> u8 {
        self as u8
    }
}

impl From<ComplianceLevel> for u8 {
    fn from(l: ComplianceLevel) -> u8 {
        l as u8
    }
}

impl TryFrom<u8> for ComplianceLevel {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        match v {
            0 => Ok(ComplianceLevel::Plain),
            1 => Ok(ComplianceLevel::DeletionVector),
            2 => Ok(ComplianceLevel::PhysicalMask),
            _ => Err(Error::InvalidConfig(format!("compliance level must be 0, 1 or 2, got {v}"))),
        }
    }
}

/// One bit per row in file order; set means deleted. Bits are never cleared.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeletionVector {
    words: Vec<u64>,
    num_rows: u64,
}

impl DeletionVector {
    pub fn new(num_rows: u64) -> Self {
        DeletionVector { words: vec![0; num_rows.div_ceil(64) as usize], num_rows }
    }

    pub fn from_words(words: Vec<u64>, num_rows: u64) -> Result<Self> {
        if words.len() as u64 != num_rows.div_ceil(64) {
            return Err(Error::LengthMismatch(format!("{} words for {num_rows} rows", words.len())));
        }
        Ok(DeletionVector { words, num_rows })
    }

    pub fn num_rows(&self) -> u64 {
        self.num_rows
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn is_deleted(&self, row: u64) -> bool {
        row < self.num_rows && self.words[(row / 64) as usize] >> (row % 64) & 1 == 1
    }

    /// Sets the bit for `row`; returns whether it was newly set.
    pub fn delete(&mut self, row: u64) -> Result<bool> {
        if row >= self.num_rows {
            return Err(Error::RowOutOfRange { row, num_rows: self.num_rows });
        }
        let (w, b) = ((row / 64) as usize, row % 64);
        let fresh = self.words[w] >> b & 1 == 0;
        self.words[w] |= 1 << b;
        Ok(fresh)
    }

    pub fn count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn iter_deleted(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.num_rows).filter(|r| self.is_deleted(*r))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DeleteStats {
    /// Rows newly marked deleted by this call.
    pub rows_deleted: u64,
    pub pages_rewritten: u64,
    /// Page bytes plus footer and tail bytes written.
    pub bytes_rewritten: u64,
    /// File size after the call.
    pub file_bytes: u64,
    /// Columns that only received deletion-vector bits at level 2.
    pub vector_only_columns: Vec<String>,
}

impl DeleteStats {
    pub fn rewrite_ratio(&self) -> f64 {
        if self.file_bytes == 0 {
            0.0
        } else {
            self.bytes_rewritten as f64 / self.file_bytes as f64
        }
    }
}

fn read_footer_bytes<F: ReadAt + ?Sized>(file: &F) -> Result<(u64, Vec<u8>, u64)> {
    let size = file.size()?;
    if size < (TAIL_LEN + MAGIC.len()) as u64 {
        return Err(Error::TruncatedFooter("file shorter than footer tail".into()));
    }
    let mut tail = [0u8; TAIL_LEN];
    file.read_at(size - TAIL_LEN as u64, &mut tail)?;
    let (start, len) = locate_footer(size, &tail)?;
    Ok((start, file.read_vec(start, len)?, size))
}

fn logical_name(desc: &ColumnDescriptor) -> String {
    match desc.quant {
        StoredQuant::DualHi => desc.name.trim_end_matches(".hi").to_string(),
        StoredQuant::DualLo => desc.name.trim_end_matches(".lo").to_string(),
        _ => desc.name.clone(),
    }
}

fn removal_bits(footer: &FooterView<'_>, page: usize, rows: usize) -> Vec<bool> {
    match footer.page_mask(page) {
        Some(w) => (0..rows).map(|i| w.get(i / 64) >> (i % 64) & 1 == 1).collect(),
        None => vec![false; rows],
    }
}

fn pack_words(bits: &[bool]) -> Vec<u64> {
    let mut w = vec![0u64; bits.len().div_ceil(64)];
    for (i, b) in bits.iter().enumerate() {
        if *b {
            w[i / 64] |= 1 << (i % 64);
        }
    }
    w
}

/// A recomputed page, ready to be written over its old slot.
struct PageEdit {
    page: usize,
    bytes: Vec<u8>,
    type_tag: u8,
    removed: Vec<bool>,
}

/// Masks `offsets` (row offsets within the page) in one page of a level-2
/// column. Returns `None` when the page bytes would not change.
fn mask_page(
    footer: &FooterView<'_>,
    page: usize,
    old: &[u8],
    desc: &ColumnDescriptor,
    offsets: &[usize],
) -> Result<Option<PageEdit>> {
    let rows = footer.rows_per_page().get(page) as usize;
    let kind = page_kind(desc);
    let body = PageBody::parse(page_body(old)?, kind)?;
    let mut removed = removal_bits(footer, page, rows);
    // Row offset -> index among the rows still present in the encoded data.
    let mut compact = Vec::with_capacity(rows);
    let mut live = 0usize;
    for r in &removed {
        compact.push(live);
        live += !*r as usize;
    }
    let positions: Vec<usize> = offsets.iter().filter(|o| !removed[**o]).map(|o| compact[*o]).collect();
    if positions.is_empty() {
        return Ok(None);
    }
    let new_body = match (body, kind) {
        (PageBody::Scalar(b), PageKind::Scalar(ty)) => {
            let m = mask_block(&b, ty, &positions)?;
            if m.removed {
                offsets.iter().for_each(|o| removed[*o] = true);
            }
            PageBody::Scalar(m.block)
        }
        (PageBody::List { lengths, flat }, PageKind::List(ty)) => {
            let lens = crate::encoding::decode(&lengths, ValueType::UInt64)?;
            let lens: Vec<u64> = match lens {
                Values::UInt64(v) => v,
                Values::Nullable { present, values } => {
                    let Values::UInt64(dense) = *values else { return Err(Error::corrupt("list lengths are not u64")) };
                    let mut it = dense.into_iter();
                    present.iter().map(|p| if *p { it.next().unwrap_or(0) } else { 0 }).collect()
                }
                _ => return Err(Error::corrupt("list lengths are not u64")),
            };
            let mut starts = Vec::with_capacity(lens.len() + 1);
            starts.push(0u64);
            for l in &lens {
                starts.push(starts.last().unwrap() + l);
            }
            let flat_positions: Vec<usize> =
                positions.iter().flat_map(|p| starts[*p] as usize..starts[*p + 1] as usize).collect();
            let new_lengths = remove_elements(&lengths, ValueType::UInt64, &positions)?;
            let new_flat = if flat_positions.is_empty() { flat } else { remove_elements(&flat, ty, &flat_positions)? };
            offsets.iter().for_each(|o| removed[*o] = true);
            PageBody::List { lengths: new_lengths, flat: new_flat }
        }
        _ => {
            return Err(Error::UnsupportedEncoding(format!(
                "column {} holds chained sparse-delta pages, which cannot be masked",
                desc.name
            )))
        }
    };
    let bytes = frame_page(&new_body.to_bytes(), Some(old.len()))?;
    if bytes == old {
        return Ok(None);
    }
    Ok(Some(PageEdit { page, bytes, type_tag: new_body.type_tag(), removed }))
}

/// Writes the byte runs where `new` differs from `old`, merging runs closer
/// than a small gap. Returns the number of bytes written.
fn write_diff<F: WriteAt + ?Sized>(file: &mut F, at: u64, old: &[u8], new: &[u8]) -> Result<u64> {
    const GAP: usize = 16;
    debug_assert_eq!(old.len(), new.len());
    let mut written = 0u64;
    let mut i = 0;
    while i < new.len() {
        if old[i] == new[i] {
            i += 1;
            continue;
        }
        let start = i;
        let mut end = i + 1;
        let mut j = end;
        while j < new.len() && j - end < GAP {
            if old[j] != new[j] {
                end = j + 1;
            }
            j += 1;
        }
        file.write_at(at + start as u64, &new[start..end])?;
        written += (end - start) as u64;
        i = end;
    }
    Ok(written)
}

/// Deletes `row_ids` from a Bullion file held by `file`.
///
/// All new page images are computed before anything is written, so an
/// encoding that cannot be masked leaves the file untouched.
pub fn delete_rows<F: ReadAt + WriteAt + ?Sized>(
    file: &mut F,
    row_ids: &[u64],
    level: ComplianceLevel,
) -> Result<DeleteStats> {
    if level == ComplianceLevel::Plain {
        return Err(Error::RewriteRequired);
    }
    let (footer_start, footer_bytes, size) = read_footer_bytes(&*file)?;
    let footer = FooterView::parse(&footer_bytes)?;
    let mut dv = DeletionVector::from_words(footer.deletion_vec().to_vec(), footer.num_rows())?;
    let mut rows: Vec<u64> = Vec::new();
    for &r in row_ids {
        if r >= footer.num_rows() {
            return Err(Error::RowOutOfRange { row: r, num_rows: footer.num_rows() });
        }
    }
    for &r in row_ids {
        if dv.delete(r)? {
            rows.push(r);
        }
    }
    rows.sort_unstable();
    let descs = footer.columns()?;
    let mut stats = DeleteStats { file_bytes: size, ..DeleteStats::default() };
    if level == ComplianceLevel::PhysicalMask {
        let mut names: Vec<String> =
            descs.iter().filter(|d| d.compliance_level < 2 || d.is_sparse()).map(logical_name).collect();
        names.dedup();
        stats.vector_only_columns = names;
    }
    if rows.is_empty() {
        return Ok(stats);
    }
    stats.rows_deleted = rows.len() as u64;

    let mut edits: Vec<PageEdit> = Vec::new();
    if level == ComplianceLevel::PhysicalMask {
        // (group, page within group) -> row offsets
        let mut by_page: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for &r in &rows {
            let loc = locate_row(&footer, r)?;
            by_page.entry((loc.group, loc.page_in_group)).or_default().push(loc.offset);
        }
        let mut src = Vec::new();
        for (c, desc) in descs.iter().enumerate() {
            if desc.compliance_level < 2 || desc.is_sparse() {
                continue;
            }
            for (&(g, k), offsets) in &by_page {
                let page = footer.chunk_pages(g, c).start + k;
                let (s, e) = (footer.page_offsets().get(page), footer.page_end(page));
                src.resize((e - s) as usize, 0);
                file.read_at(s, &mut src)?;
                if let Some(edit) = mask_page(&footer, page, &src, desc, offsets)? {
                    edits.push(edit);
                }
            }
        }
    }

    let mut data: FooterData = footer.to_data()?;
    data.deletion_words = dv.words().to_vec();
    let mut tree = ChecksumTree::from_stored(&data.checksums, &data.pages_per_group)?;
    let mut masks: BTreeMap<u32, Vec<u64>> = data.page_masks.drain(..).collect();
    for e in &edits {
        tree = update_checksums_incremental(&tree, e.page, &e.bytes)?;
        data.page_types[e.page] = e.type_tag;
        if e.removed.contains(&true) {
            masks.insert(e.page as u32, pack_words(&e.removed));
        }
    }
    data.checksums = tree.to_words();
    data.page_masks = masks.into_iter().collect();

    for e in &edits {
        file.write_at(footer.page_offsets().get(e.page), &e.bytes)?;
        stats.bytes_rewritten += e.bytes.len() as u64;
    }
    stats.pages_rewritten = edits.len() as u64;

    let mut new_footer = data.to_bytes();
    if new_footer.len() <= footer_bytes.len() {
        new_footer.resize(footer_bytes.len(), 0);
        stats.bytes_rewritten += write_diff(file, footer_start, &footer_bytes, &new_footer)?;
    } else {
        let mut tail = new_footer;
        let len = tail.len() as u32;
        tail.extend_from_slice(&len.to_le_bytes());
        tail.extend_from_slice(&MAGIC);
        file.write_at(size, &tail)?;
        stats.bytes_rewritten += tail.len() as u64;
        stats.file_bytes = size + tail.len() as u64;
    }
    file.flush_all()?;
    Ok(stats)
}

/// Opens `path` for writing under an exclusive lock and deletes `row_ids`.
pub fn delete_rows_path(path: impl AsRef<Path>, row_ids: &[u64], level: ComplianceLevel) -> Result<DeleteStats> {
    let mut file: File = OpenOptions::new().read(true).write(true).open(path)?;
    match file.try_lock() {
        Ok(()) => {}
        Err(TryLockError::WouldBlock) => return Err(Error::ExclusiveAccessRequired),
        Err(TryLockError::Error(e)) => return Err(e.into()),
    }
    let out = delete_rows(&mut file, row_ids, level);
    file.unlock()?;
    out
}

/// Parses a row-id list: integers separated by whitespace or commas; `#`
/// starts a comment.
pub fn parse_row_ids(text: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
            out.push(tok.parse().map_err(|_| Error::InvalidConfig(format!("bad row id {tok:?}")))?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deletion_vector_is_monotone() {
        let mut dv = DeletionVector::new(130);
        assert_eq!(dv.words().len(), 3);
        assert!(dv.delete(129).unwrap());
        assert!(!dv.delete(129).unwrap());
        assert!(dv.is_deleted(129));
        assert_eq!(dv.count(), 1);
        assert!(matches!(dv.delete(130), Err(Error::RowOutOfRange { .. })));
        assert_eq!(dv.iter_deleted().collect::<Vec<_>>(), vec![129]);
    }

    #[test]
    fn level_from_u8() {
        assert_eq!(ComplianceLevel::try_from(2).unwrap(), ComplianceLevel::PhysicalMask);
        assert!(ComplianceLevel::try_from(3).is_err());
    }

    #[test]
    fn row_id_lists() {
        assert_eq!(parse_row_ids("1 2,3\n# note\n4 # five\n").unwrap(), vec![1, 2, 3, 4]);
        assert!(parse_row_ids("x").is_err());
    }

    #[test]
    fn diff_writes_only_changes() {
        let old = vec![0u8; 100];
        let mut new = old.clone();
        new[10] = 1;
        new[20] = 1;
        new[90] = 1;
        let mut file = vec![0u8; 100];
        let n = write_diff(&mut file, 0, &old, &new).unwrap();
        assert_eq!(n, 12);
        assert_eq!(file, new);
    }
}
