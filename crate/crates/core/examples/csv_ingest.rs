//! Reads CSV against a JSON schema and writes a file, the same path the
//! `write` subcommand takes.

use bullion::format::ingest::read_csv;
use bullion::format::{write_file, Schema, WriteOptions};

const SCHEMA: &str = r#"{"columns": [
    {"name": "id", "type": "int64"},
    {"name": "name", "type": "string"},
    {"name": "weight", "type": "float32"}
]}"#;

const CSV: &str = "id,name,weight\n1,ada,0.5\n2,,1.25\n3,grace,\n";

fn main() -> bullion::Result<()> {
    let schema = Schema::from_json(SCHEMA)?;
    let batch = read_csv(CSV.as_bytes(), &schema)?;
    println!("{:?}", batch.columns);
    let (file, stats) = write_file(&schema, &[batch], &WriteOptions::default())?;
    println!("{} rows in {} bytes", stats.num_rows, file.len());

    // Type errors report the row and column.
    let bad = "id,name,weight\n1,x,heavy\n";
    println!("{}", read_csv(bad.as_bytes(), &schema).unwrap_err());
    Ok(())
}
