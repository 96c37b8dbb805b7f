//! File layout, writer, flat-footer reader and checksum tree.
//!
//! A file is `"BULN"`, then row groups, then the footer, then
//! `[footer_len: u32 LE]["BULN"]`. Each row group holds one column chunk per
//! stored column; each chunk is a run of pages that share row boundaries with
//! every other chunk in the group.

mod checksum;
mod footer;
pub mod ingest;
pub mod io;
pub mod page;
mod reader;
mod schema;
mod writer;

pub use checksum::{compute_checksum_tree, hash_bytes, hash_words, update_checksums_incremental, ChecksumTree};
pub use footer::{
    descriptors_for, locate_footer, name_hash, ColumnDescriptor, FooterData, FooterView, LeArray, StoredQuant,
    DESCRIPTOR_LEN, HEADER_LEN, MAGIC, SPARSE_PAGE_TAG, TAIL_LEN, VERSION,
};
pub use reader::{
    locate_row, logical_schema, read_all, verify_file, BullionReader, DeletedRows, MaskPolicy, ReadOptions,
    RowLocation, VerifyReport,
};
pub use schema::{ColumnData, ColumnSchema, LogicalType, MaybeMasked, ProjectedColumn, RecordBatch, Schema};
pub use writer::{
    column_config, page_type_name, recompute_tree, write_file, write_to_path, ColumnWriteStats, WriteOptions,
    WriteStats,
};

/// Opens the footer of a file image.
pub fn read_footer(file: &[u8]) -> crate::Result<FooterView<'_>> {
    FooterView::from_file(file)
}

pub fn lookup_column(footer: &FooterView<'_>, name: &str) -> crate::Result<usize> {
    footer.lookup(name)
}
