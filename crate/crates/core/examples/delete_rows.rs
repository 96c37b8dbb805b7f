//! Deletes rows at compliance level 2 and shows that the erased values are
//! gone from the encoded page while the other rows still read back.

use bullion::compliance::{delete_rows, ComplianceLevel};
use bullion::encoding::{decode, ValueType, Values};
use bullion::format::page::{page_body, PageBody, PageKind};
use bullion::format::{
    read_footer, write_file, BullionReader, ColumnData, ColumnSchema, DeletedRows, LogicalType, ReadOptions,
    RecordBatch, Schema, WriteOptions,
};

/// Raw decoded slots of the first `ssn` page, ignoring deletion metadata.
fn raw_first_page(file: &[u8]) -> bullion::Result<Vec<i64>> {
    let f = read_footer(file)?;
    let page = &file[f.page_offsets().get(0) as usize..f.page_end(0) as usize];
    let PageBody::Scalar(block) = PageBody::parse(page_body(page)?, PageKind::Scalar(ValueType::Int64))? else {
        unreachable!()
    };
    let Values::Int64(v) = decode(&block, ValueType::Int64)? else { unreachable!() };
    Ok(v)
}

fn main() -> bullion::Result<()> {
    let schema = Schema::new(vec![
        ColumnSchema::new("ssn", LogicalType::Int64).with_compliance(2),
        ColumnSchema::new("city", LogicalType::Utf8).with_compliance(2),
        ColumnSchema::new("label", LogicalType::Int64),
    ]);
    let n = 1000;
    let batch = RecordBatch::new(vec![
        ColumnData::Int64((0..n).map(|i| Some(123_450_000 + i)).collect()),
        ColumnData::Utf8((0..n).map(|i| Some(["Oslo", "Lima", "Pune"][i as usize % 3].to_string())).collect()),
        ColumnData::Int64((0..n).map(|i| Some(i % 2)).collect()),
    ])?;
    let (mut file, _) = write_file(&schema, &[batch], &WriteOptions { rows_per_page: 100, ..WriteOptions::default() })?;

    println!("before: raw slots 41..44 = {:?}", &raw_first_page(&file)?[41..44]);
    let stats = delete_rows(&mut file, &[42, 43, 500], ComplianceLevel::PhysicalMask)?;
    println!("after:  raw slots 41..44 = {:?}", &raw_first_page(&file)?[41..44]);
    println!("{stats:?}, rewrite ratio {:.4}", stats.rewrite_ratio());

    let reader = BullionReader::open(&file[..])?;
    let kept = reader.project(&["ssn"], &ReadOptions::default())?;
    let all = reader.project(&["ssn"], &ReadOptions { deleted: DeletedRows::Surface, ..ReadOptions::default() })?;
    println!("{} live rows; with deleted rows included, {} are masked", kept[0].len(), all[0].mask_count());
    println!("checksums ok: {}", reader.verify()?.ok);
    Ok(())
}
