//! Incremental checksum maintenance, and tamper detection on a file.

use bullion::format::{
    compute_checksum_tree, update_checksums_incremental, verify_file, write_file, ColumnData, ColumnSchema,
    LogicalType, RecordBatch, Schema, WriteOptions,
};

fn main() -> bullion::Result<()> {
    let mut pages: Vec<Vec<u8>> = (0..6u8).map(|i| vec![i; 32]).collect();
    let tree = compute_checksum_tree(&pages, &[3, 3])?;
    pages[4][0] = 0xFF;
    let updated = update_checksums_incremental(&tree, 4, &pages[4])?;
    assert_eq!(updated, compute_checksum_tree(&pages, &[3, 3])?);
    println!("root {:#018x} -> {:#018x} after touching page 4", tree.root, updated.root);

    let schema = Schema::new(vec![ColumnSchema::new("x", LogicalType::Int64)]);
    let batch = RecordBatch::new(vec![ColumnData::Int64((0..4000).map(|i| Some(i * i)).collect())])?;
    let (mut file, _) =
        write_file(&schema, &[batch], &WriteOptions { rows_per_page: 1000, ..WriteOptions::default() })?;
    println!("clean file: {:?}", verify_file(&file[..])?);
    file[100] ^= 0x01;
    let report = verify_file(&file[..])?;
    println!("flipped one bit: ok={}, first bad page {:?}", report.ok, report.first_bad_page());
    Ok(())
}
