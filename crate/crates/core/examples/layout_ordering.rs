//! Quality-sorted rows and frequency-ranked columns. The hot columns end up
//! adjacent in every row group, so projecting them is one contiguous read.

use bullion::format::{
    write_file, BullionReader, ColumnData, ColumnSchema, LogicalType, ReadOptions, RecordBatch, Schema, WriteOptions,
};
use bullion::layout::{ColumnOrderSpec, RowOrderSpec};

fn main() -> bullion::Result<()> {
    let n = 5000;
    let mut cols = vec![ColumnSchema::new("quality", LogicalType::Float32)];
    let mut data = vec![ColumnData::Float32((0..n).map(|i| Some(((i * 37) % 101) as f32 / 100.0)).collect())];
    for c in 0..8 {
        cols.push(ColumnSchema::new(format!("feat{c}"), LogicalType::Int64));
        data.push(ColumnData::Int64((0..n).map(|i| Some((i * (c + 3)) as i64 % 1000)).collect()));
    }
    let schema = Schema::new(cols);
    let batch = RecordBatch::new(data)?;

    let opts = WriteOptions {
        rows_per_page: 500,
        pages_per_group: 4,
        row_order: RowOrderSpec::QualityDesc { score_column: "quality".into() },
        column_order: ColumnOrderSpec::from_ranking_text("# hottest first\nfeat6\nfeat2\nquality\n"),
        ..WriteOptions::default()
    };
    let (file, stats) = write_file(&schema, &[batch], &opts)?;
    let reader = BullionReader::open(&file[..])?;
    let footer = reader.footer();

    let hot: Vec<usize> =
        ["feat6", "feat2", "quality"].iter().map(|n| reader.resolve(n).map(|v| v[0])).collect::<Result<_, _>>()?;
    let (start, _) = footer.chunk_range(0, hot[0]);
    let (_, end) = footer.chunk_range(0, hot[2]);
    println!("stored order of hot columns: {hot:?}; group 0 hot range {start}..{end} ({} bytes)", end - start);

    let q = reader.project(&["quality"], &ReadOptions::default())?;
    if let ColumnData::Float32(v) = &q[0].data {
        println!("first qualities: {:?}", &v[..5]);
    }
    println!("row 0 in the file was input row {}", stats.row_permutation.as_ref().unwrap()[0]);
    Ok(())
}
