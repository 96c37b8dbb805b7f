//! Writes a mixed-type file to disk, reopens it and projects two columns.

use bullion::format::{
    write_to_path, BullionReader, ColumnData, ColumnSchema, LogicalType, ReadOptions, RecordBatch, Schema, WriteOptions,
};
use bullion::quantization::QuantSpec;

fn main() -> bullion::Result<()> {
    let schema = Schema::new(vec![
        ColumnSchema::new("user_id", LogicalType::Int64).with_quantization(QuantSpec::IntRehash),
        ColumnSchema::new("query", LogicalType::Utf8),
        ColumnSchema::new("clicks", LogicalType::ListInt64).sparse(),
        ColumnSchema::new("embedding", LogicalType::ListFloat32).with_quantization(QuantSpec::Bf16),
        ColumnSchema::new("score", LogicalType::Float64),
    ]);
    let n = 3000usize;
    let batch = RecordBatch::new(vec![
        ColumnData::Int64((0..n).map(|i| Some(1_000_000_007 * (i as i64 % 40))).collect()),
        ColumnData::Utf8((0..n).map(|i| if i % 10 == 0 { None } else { Some(format!("q{}", i % 13)) }).collect()),
        ColumnData::ListInt64((0..n).map(|i| Some((i as i64..i as i64 + 20).rev().collect())).collect()),
        ColumnData::ListFloat32((0..n).map(|i| Some(vec![i as f32 / 7.0; 4])).collect()),
        ColumnData::Float64((0..n).map(|i| Some(i as f64 * 0.5)).collect()),
    ])?;

    let path = std::env::temp_dir().join("bullion-example.bln");
    let stats =
        write_to_path(&path, &schema, &[batch], &WriteOptions { rows_per_page: 512, ..WriteOptions::default() })?;
    println!(
        "{} rows, {} pages, {} bytes ({} footer)",
        stats.num_rows, stats.num_pages, stats.file_bytes, stats.footer_bytes
    );
    for c in &stats.columns {
        println!("  {:<14} {:>7} bytes  {:?}", c.name, c.bytes, c.schemes);
    }

    let reader = BullionReader::open_path(&path)?;
    let cols = reader.project(&["query", "clicks"], &ReadOptions::default())?;
    if let (ColumnData::Utf8(q), ColumnData::ListInt64(c)) = (&cols[0].data, &cols[1].data) {
        println!("row 1: query {:?}, clicks {:?}", q[1], &c[1].as_ref().unwrap()[..5]);
    }
    std::fs::remove_file(&path)?;
    Ok(())
}
