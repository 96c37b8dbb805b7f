use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use super::checksum::compute_checksum_tree;
use super::footer::{descriptors_for, ColumnDescriptor, FooterData, StoredQuant, MAGIC};
use super::page::{encode_page, frame_page, page_kind, Cells};
use super::schema::{ColumnData, RecordBatch, Schema};
use crate::encoding::{EncodingConfig, SchemeId};
use crate::error::{Error, Result};
use crate::layout::{self, ColumnOrderSpec, RowOrderSpec};
use crate::quantization::{rehash_ints, RehashTable};

#[derive(Clone, Debug)]
pub struct WriteOptions {
    pub rows_per_page: usize,
    /// Pages per column chunk; a row group spans `rows_per_page *
    /// pages_per_group` rows.
    pub pages_per_group: usize,
    pub row_order: RowOrderSpec,
    pub column_order: ColumnOrderSpec,
    pub encoding_config: EncodingConfig,
}

impl Default for WriteOptions {
    fn default() -> Self {
        WriteOptions {
            rows_per_page: 4096,
            pages_per_group: 16,
            row_order: RowOrderSpec::None,
            column_order: ColumnOrderSpec::SchemaOrder,
            encoding_config: EncodingConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ColumnWriteStats {
    pub name: String,
    pub bytes: u64,
    pub pages: usize,
    /// Page type name -> page count.
    pub schemes: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct WriteStats {
    pub num_rows: u64,
    pub num_groups: usize,
    pub num_pages: usize,
    pub file_bytes: u64,
    pub footer_bytes: u64,
    /// Stored columns in physical order.
    pub columns: Vec<ColumnWriteStats>,
    /// New row -> input row, when rows were reordered.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row_permutation: Option<Vec<usize>>,
}

pub fn page_type_name(tag: u8) -> String {
    match SchemeId::from_tag(tag) {
        Ok(s) => s.name().to_string(),
        Err(_) if tag == super::footer::SPARSE_PAGE_TAG => "sparse_delta".into(),
        Err(_) => format!("unknown({tag})"),
    }
}

/// Encoding settings for one column: level-2 columns only get schemes that
/// can be masked without growing.
pub fn column_config(base: &EncodingConfig, compliance_level: u8) -> EncodingConfig {
    if compliance_level < 2 {
        return base.clone();
    }
    let m = EncodingConfig::maskable();
    EncodingConfig {
        candidate_set: base.candidate_set.intersect(m.candidate_set),
        allow_chunked: false,
        maskable_only: true,
        ..base.clone()
    }
}

fn rehash_table(data: &ColumnData) -> Result<RehashTable> {
    match data {
        ColumnData::Int64(v) => {
            let present: Vec<i64> = v.iter().flatten().copied().collect();
            Ok(rehash_ints(&present)?.table)
        }
        _ => Err(Error::SchemaMismatch("int_rehash applies to int64 columns".into())),
    }
}

/// Encodes `batches` into a complete file image.
pub fn write_file(schema: &Schema, batches: &[RecordBatch], options: &WriteOptions) -> Result<(Vec<u8>, WriteStats)> {
    schema.validate()?;
    options.encoding_config.validate()?;
    if options.rows_per_page == 0 || options.pages_per_group == 0 {
        return Err(Error::InvalidConfig("rows_per_page and pages_per_group must be >= 1".into()));
    }
    let batch = RecordBatch::concat(schema, batches)?;
    let num_rows = batch.num_rows();
    if num_rows == 0 {
        return Err(Error::EmptyInput);
    }
    let (perm, batch) = match &options.row_order {
        RowOrderSpec::None => (None, batch),
        spec => {
            let (p, b) = layout::reorder_rows(schema, &batch, spec)?;
            (Some(p), b)
        }
    };
    let order = layout::reorder_columns(schema, &options.column_order)?;

    // Stored columns in physical order, with their whole-column cells.
    let mut descs: Vec<ColumnDescriptor> = Vec::new();
    let mut cells: Vec<Cells> = Vec::new();
    let mut configs: Vec<EncodingConfig> = Vec::new();
    for &li in &order {
        let col = &schema.columns[li];
        let data = &batch.columns[li];
        let table = match col.quantization {
            Some(crate::quantization::QuantSpec::IntRehash) => Some(rehash_table(data)?),
            _ => None,
        };
        for mut d in descriptors_for(col, li as u32) {
            if d.quant == StoredQuant::IntRehash {
                d.aux = table.as_ref().expect("rehash table").to_bytes();
            }
            cells.push(Cells::from_column(data, &d, table.as_ref())?);
            configs.push(column_config(&options.encoding_config, col.compliance_level));
            descs.push(d);
        }
    }
    let ncols = descs.len();

    let rpp = options.rows_per_page;
    let num_pages_per_col = num_rows.div_ceil(rpp);
    let ppg = options.pages_per_group;
    let num_groups = num_pages_per_col.div_ceil(ppg);

    let mut out = MAGIC.to_vec();
    let mut footer = FooterData {
        num_rows: num_rows as u64,
        deletion_words: vec![0; num_rows.div_ceil(64)],
        columns: descs.clone(),
        ..FooterData::default()
    };
    let mut leaves = Vec::new();
    let mut col_stats: Vec<ColumnWriteStats> = descs
        .iter()
        .map(|d| ColumnWriteStats { name: d.name.clone(), bytes: 0, pages: 0, schemes: BTreeMap::new() })
        .collect();

    for g in 0..num_groups {
        let first_page = g * ppg;
        let last_page = ((g + 1) * ppg).min(num_pages_per_col);
        let group_start = out.len() as u64;
        footer.group_offsets.push(group_start);
        footer.pages_per_group.push(((last_page - first_page) * ncols) as u32);
        for c in 0..ncols {
            let chunk_start = out.len() as u64;
            let kind = page_kind(&descs[c]);
            for p in first_page..last_page {
                let (r0, r1) = (p * rpp, ((p + 1) * rpp).min(num_rows));
                let body = encode_page(&cells[c].slice(r0, r1), kind, &configs[c])?;
                let page = frame_page(&body.to_bytes(), None)?;
                footer.page_offsets.push(out.len() as u64);
                footer.rows_per_page.push((r1 - r0) as u32);
                footer.page_types.push(body.type_tag());
                leaves.push(super::checksum::hash_bytes(&page));
                *col_stats[c].schemes.entry(page_type_name(body.type_tag())).or_default() += 1;
                col_stats[c].pages += 1;
                out.extend_from_slice(&page);
            }
            let size = out.len() as u64 - chunk_start;
            let rel = chunk_start - group_start;
            if size > u32::MAX as u64 || rel > u32::MAX as u64 {
                return Err(Error::InvalidConfig("row group exceeds 4 GiB; use fewer pages per group".into()));
            }
            col_stats[c].bytes += size;
            footer.column_offsets.push(rel as u32);
            footer.column_sizes.push(size as u32);
        }
    }
    footer.data_end = out.len() as u64;
    let tree = super::checksum::ChecksumTree::from_leaves(leaves, &footer.pages_per_group)?;
    footer.checksums = tree.to_words();
    let fbytes = footer.to_bytes();
    out.extend_from_slice(&fbytes);
    out.extend_from_slice(&(fbytes.len() as u32).to_le_bytes());
    out.extend_from_slice(&MAGIC);

    let stats = WriteStats {
        num_rows: num_rows as u64,
        num_groups,
        num_pages: footer.page_offsets.len(),
        file_bytes: out.len() as u64,
        footer_bytes: fbytes.len() as u64,
        columns: col_stats,
        row_permutation: perm,
    };
    Ok((out, stats))
}

pub fn write_to_path(
    path: impl AsRef<Path>,
    schema: &Schema,
    batches: &[RecordBatch],
    options: &WriteOptions,
) -> Result<WriteStats> {
    let (bytes, stats) = write_file(schema, batches, options)?;
    std::fs::write(path, bytes)?;
    Ok(stats)
}

/// Full recompute of the checksum tree from a file image (test oracle and
/// verification helper).
pub fn recompute_tree(file: &[u8]) -> Result<super::checksum::ChecksumTree> {
    let f = super::footer::FooterView::from_file(file)?;
    let pages: Vec<&[u8]> =
        (0..f.num_pages()).map(|p| &file[f.page_offsets().get(p) as usize..f.page_end(p) as usize]).collect();
    compute_checksum_tree(&pages, &f.pages_per_group().to_vec())
}
