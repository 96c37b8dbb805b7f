use std::borrow::Cow;
use std::fs::File;
use std::path::Path;

use serde::Serialize;

use super::checksum::{hash_bytes, hash_words};
use super::footer::{locate_footer, ColumnDescriptor, FooterView, StoredQuant, TAIL_LEN};
use super::io::ReadAt;
use super::page::{decode_page, page_body, page_kind, reinsert_removed, Cells, PageBody};
use super::schema::{ColumnData, ColumnSchema, ProjectedColumn, Schema};
use crate::error::{Error, Result};
use crate::quantization::QuantSpec;

/// How rows marked in the deletion vector appear in projections.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DeletedRows {
    /// Deleted rows are left out.
    #[default]
    Skip,
    /// Deleted rows are returned; cells of level-2 columns and cells removed
    /// by masking come back as mask placeholders.
    Surface,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MaskPolicy {
    /// Masked cells are flagged in [`ProjectedColumn::masked`].
    #[default]
    Marker,
    /// Masked cells are reported as plain nulls.
    Null,
}

#[derive(Clone, Copy, Debug)]
pub struct ReadOptions {
    /// Column chunk ranges separated by at most this many bytes are fetched
    /// with one read.
    pub coalesce_gap: u64,
    pub deleted: DeletedRows,
    pub mask_policy: MaskPolicy,
}

impl Default for ReadOptions {
    fn default() -> Self {
        ReadOptions { coalesce_gap: 64 * 1024, deleted: DeletedRows::Skip, mask_policy: MaskPolicy::Marker }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RowLocation {
    pub group: usize,
    /// Page ordinal within each column (same for every column).
    pub page: usize,
    pub page_in_group: usize,
    pub offset: usize,
}

/// Maps a file row to its row group, page and offset using prefix sums over
/// `rows_per_page` and `pages_per_group`.
pub fn locate_row(footer: &FooterView<'_>, row: u64) -> Result<RowLocation> {
    if row >= footer.num_rows() {
        return Err(Error::RowOutOfRange { row, num_rows: footer.num_rows() });
    }
    let ncols = footer.num_columns().max(1);
    let rpp = footer.rows_per_page();
    let (mut first_page, mut row_base, mut col_page) = (0usize, 0u64, 0usize);
    for (g, pages) in footer.pages_per_group().iter().enumerate() {
        let per_chunk = pages as usize / ncols;
        let rows: u64 = (first_page..first_page + per_chunk).map(|p| rpp.get(p) as u64).sum();
        if row < row_base + rows {
            let mut r = row - row_base;
            for k in 0..per_chunk {
                let n = rpp.get(first_page + k) as u64;
                if r < n {
                    return Ok(RowLocation { group: g, page: col_page + k, page_in_group: k, offset: r as usize });
                }
                r -= n;
            }
        }
        row_base += rows;
        first_page += pages as usize;
        col_page += per_chunk;
    }
    Err(Error::corrupt("rows_per_page does not cover num_rows"))
}

/// Logical schema recovered from stored descriptors.
pub fn logical_schema(descs: &[ColumnDescriptor]) -> Schema {
    let mut cols: Vec<(u32, ColumnSchema)> = Vec::new();
    for d in descs {
        if d.quant == StoredQuant::DualLo {
            continue;
        }
        let (name, quantization) = match d.quant {
            StoredQuant::None => (d.name.clone(), None),
            StoredQuant::Float(q) => (d.name.clone(), Some(q)),
            StoredQuant::IntRehash => (d.name.clone(), Some(QuantSpec::IntRehash)),
            StoredQuant::DualHi => (d.name.trim_end_matches(".hi").to_string(), Some(QuantSpec::DualSplit16)),
            StoredQuant::DualLo => unreachable!(),
        };
        cols.push((
            d.logical_index,
            ColumnSchema {
                name,
                logical_type: d.logical_type,
                quantization,
                compliance_level: d.compliance_level,
                is_sparse_sequence: d.is_sparse(),
            },
        ));
    }
    cols.sort_by_key(|(i, _)| *i);
    Schema::new(cols.into_iter().map(|(_, c)| c).collect())
}

pub struct BullionReader<R: ReadAt> {
    src: R,
    footer: Vec<u8>,
    footer_start: u64,
}

impl BullionReader<File> {
    pub fn open_path(path: impl AsRef<Path>) -> Result<Self> {
        BullionReader::open(File::open(path)?)
    }
}

impl<R: ReadAt> BullionReader<R> {
    /// One tail read, then one footer read.
    pub fn open(src: R) -> Result<Self> {
        let size = src.size()?;
        if size < (TAIL_LEN + 4) as u64 {
            return Err(Error::TruncatedFooter("file shorter than footer tail".into()));
        }
        let mut tail = [0u8; TAIL_LEN];
        src.read_at(size - TAIL_LEN as u64, &mut tail)?;
        let (start, len) = locate_footer(size, &tail)?;
        let footer = src.read_vec(start, len)?;
        FooterView::parse(&footer)?;
        Ok(BullionReader { src, footer, footer_start: start })
    }

    pub fn footer(&self) -> FooterView<'_> {
        FooterView::parse(&self.footer).expect("validated at open")
    }

    pub fn footer_start(&self) -> u64 {
        self.footer_start
    }

    pub fn source(&self) -> &R {
        &self.src
    }

    pub fn into_source(self) -> R {
        self.src
    }

    pub fn num_rows(&self) -> u64 {
        self.footer().num_rows()
    }

    pub fn schema(&self) -> Result<Schema> {
        Ok(logical_schema(&self.footer().columns()?))
    }

    /// Stored column indices backing a logical column name.
    pub fn resolve(&self, name: &str) -> Result<Vec<usize>> {
        let f = self.footer();
        if let Ok(c) = f.lookup(name) {
            let d = f.column(c)?;
            if !matches!(d.quant, StoredQuant::DualHi | StoredQuant::DualLo) {
                return Ok(vec![c]);
            }
        }
        match (f.lookup(&format!("{name}.hi")), f.lookup(&format!("{name}.lo"))) {
            (Ok(hi), Ok(lo)) => Ok(vec![hi, lo]),
            _ => Err(Error::ColumnNotFound(name.to_string())),
        }
    }

    fn read_range(&self, start: u64, end: u64) -> Result<Cow<'_, [u8]>> {
        if let Some(s) = self.src.as_slice() {
            return s
                .get(start as usize..end as usize)
                .map(Cow::Borrowed)
                .ok_or_else(|| Error::corrupt("column chunk range outside file"));
        }
        Ok(Cow::Owned(self.src.read_vec(start, (end - start) as usize)?))
    }

    /// Decodes one page given its framed bytes; returns the stored cells
    /// (removed rows as `None`) and the removal flags.
    fn decode_framed(&self, page: usize, bytes: &[u8], desc: &ColumnDescriptor) -> Result<(Cells, Vec<bool>)> {
        let f = self.footer();
        let rows = f.rows_per_page().get(page) as usize;
        let kind = page_kind(desc);
        let body = PageBody::parse(page_body(bytes)?, kind)?;
        match f.page_mask(page) {
            None => Ok((decode_page(&body, kind, rows)?, vec![false; rows])),
            Some(words) => {
                let removed: Vec<bool> = (0..rows).map(|i| words.get(i / 64) >> (i % 64) & 1 == 1).collect();
                let survivors = removed.iter().filter(|r| !**r).count();
                let cells = reinsert_removed(decode_page(&body, kind, survivors)?, &removed)?;
                Ok((cells, removed))
            }
        }
    }

    /// Reads requested stored columns for every row group, coalescing nearby
    /// chunk ranges. Returns per stored column the cells and removal flags
    /// over all rows.
    fn read_stored(&self, cols: &[usize], gap: u64) -> Result<Vec<(Cells, Vec<bool>)>> {
        let f = self.footer();
        let descs: Vec<ColumnDescriptor> = cols.iter().map(|c| f.column(*c)).collect::<Result<_>>()?;
        let mut out: Vec<(Cells, Vec<bool>)> =
            descs.iter().map(|d| (Cells::empty_like(page_kind(d)), Vec::new())).collect();
        for g in 0..f.num_groups() {
            let mut ranges: Vec<(u64, u64, usize)> = cols
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    let (s, e) = f.chunk_range(g, *c);
                    (s, e, k)
                })
                .collect();
            ranges.sort_unstable();
            let mut i = 0;
            while i < ranges.len() {
                let start = ranges[i].0;
                let mut end = ranges[i].1;
                let mut j = i + 1;
                while j < ranges.len() && ranges[j].0 <= end.saturating_add(gap) {
                    end = end.max(ranges[j].1);
                    j += 1;
                }
                let buf = self.read_range(start, end)?;
                for &(cs, ce, k) in &ranges[i..j] {
                    let chunk = &buf[(cs - start) as usize..(ce - start) as usize];
                    for p in f.chunk_pages(g, cols[k]) {
                        let ps = (f.page_offsets().get(p) - cs) as usize;
                        let pe = (f.page_end(p).min(ce) - cs) as usize;
                        let (cells, removed) = self.decode_framed(p, &chunk[ps..pe], &descs[k])?;
                        out[k].0.append(cells)?;
                        out[k].1.extend(removed);
                    }
                }
                i = j;
            }
        }
        Ok(out)
    }

    pub fn project(&self, names: &[&str], opts: &ReadOptions) -> Result<Vec<ProjectedColumn>> {
        let f = self.footer();
        let resolved: Vec<Vec<usize>> = names.iter().map(|n| self.resolve(n)).collect::<Result<_>>()?;
        let mut wanted: Vec<usize> = resolved.iter().flatten().copied().collect();
        wanted.sort_unstable();
        wanted.dedup();
        let stored = self.read_stored(&wanted, opts.coalesce_gap)?;
        let at = |c: usize| wanted.binary_search(&c).expect("requested");

        let n = f.num_rows() as usize;
        let deleted: Vec<bool> = (0..n as u64).map(|r| f.is_deleted(r)).collect();
        let keep: Vec<bool> = match opts.deleted {
            DeletedRows::Skip => deleted.iter().map(|d| !d).collect(),
            DeletedRows::Surface => vec![true; n],
        };
        let mut result = Vec::with_capacity(names.len());
        for (name, cols) in names.iter().zip(&resolved) {
            let desc = f.column(cols[0])?;
            let (hi, hi_removed) = &stored[at(cols[0])];
            let mut removed = hi_removed.clone();
            let lo = match cols.get(1) {
                Some(c) => {
                    let (lo, lo_removed) = &stored[at(*c)];
                    removed.iter_mut().zip(lo_removed).for_each(|(a, b)| *a |= *b);
                    Some(lo.clone())
                }
                None => None,
            };
            let data: ColumnData = hi.clone().into_column(&desc, lo)?;
            let mut masked: Vec<bool> =
                removed.iter().zip(&deleted).map(|(r, d)| *r || (*d && desc.compliance_level == 2)).collect();
            let mut data = data.filter(&keep);
            masked = masked.into_iter().zip(&keep).filter(|(_, k)| **k).map(|(m, _)| m).collect();
            for (i, m) in masked.iter().enumerate() {
                if *m {
                    data.set_null(i);
                }
            }
            if opts.mask_policy == MaskPolicy::Null {
                masked.iter_mut().for_each(|m| *m = false);
            }
            result.push(ProjectedColumn { name: name.to_string(), data, masked });
        }
        Ok(result)
    }

    /// Every logical column, in schema order.
    pub fn scan(&self, opts: &ReadOptions) -> Result<Vec<ProjectedColumn>> {
        let schema = self.schema()?;
        let names: Vec<&str> = schema.columns.iter().map(|c| c.name.as_str()).collect();
        self.project(&names, opts)
    }

    pub fn verify(&self) -> Result<VerifyReport> {
        let f = self.footer();
        let stored = f.checksums();
        let (np, ng) = (f.num_pages(), f.num_groups());
        let mut report =
            VerifyReport { ok: true, num_pages: np, bad_pages: Vec::new(), bad_groups: Vec::new(), root_ok: true };
        let mut start = 0usize;
        let mut group_hashes = Vec::with_capacity(ng);
        for g in 0..ng {
            let count = f.pages_per_group().get(g) as usize;
            if g < ng && count > 0 {
                let (s, e) = (f.page_offsets().get(start), f.page_end(start + count - 1));
                let buf = self.read_range(s, e)?;
                for p in start..start + count {
                    let ps = (f.page_offsets().get(p) - s) as usize;
                    let pe = (f.page_end(p) - s) as usize;
                    if hash_bytes(&buf[ps..pe]) != stored.get(p) {
                        report.bad_pages.push(p);
                    }
                }
            }
            let leaves: Vec<u64> = (start..start + count).map(|p| stored.get(p)).collect();
            let gh = hash_words(&leaves);
            if gh != stored.get(np + g) {
                report.bad_groups.push(g);
            }
            group_hashes.push(stored.get(np + g));
            start += count;
        }
        report.root_ok = hash_words(&group_hashes) == stored.get(np + ng);
        report.ok = report.bad_pages.is_empty() && report.bad_groups.is_empty() && report.root_ok;
        Ok(report)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub num_pages: usize,
    /// Pages whose bytes no longer match their stored leaf hash.
    pub bad_pages: Vec<usize>,
    /// Groups whose stored hash disagrees with their stored leaves.
    pub bad_groups: Vec<usize>,
    /// Whether the stored root matches the stored group hashes.
    pub root_ok: bool,
}

impl VerifyReport {
    pub fn first_bad_page(&self) -> Option<usize> {
        self.bad_pages.first().copied()
    }
}

pub fn verify_file<R: ReadAt>(src: R) -> Result<VerifyReport> {
    BullionReader::open(src)?.verify()
}

/// Reads a whole file into a batch in logical schema order (deleted rows
/// skipped).
pub fn read_all<R: ReadAt>(src: R) -> Result<(Schema, Vec<ProjectedColumn>)> {
    let r = BullionReader::open(src)?;
    let schema = r.schema()?;
    let cols = r.scan(&ReadOptions::default())?;
    Ok((schema, cols))
}
