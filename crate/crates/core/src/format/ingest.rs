//! CSV and JSON-lines readers producing record batches for a schema.
//!
//! CSV needs a header row naming every schema column; empty cells are null
//! and list cells hold a JSON array such as `[1,2,3]`. JSON-lines input has
//! one object per line; missing keys and `null` are null.

use std::io::{BufRead, Read};

use serde_json::Value;

use super::schema::{ColumnData, RecordBatch, Schema};
use crate::error::{Error, Result};

fn ingest_err(row: usize, column: &str, message: impl Into<String>) -> Error {
    Error::Ingest { row, column: column.to_string(), message: message.into() }
}

fn push_json(col: &mut ColumnData, v: &Value, row: usize, name: &str) -> Result<()> {
    let bad = |what: &str| ingest_err(row, name, format!("expected {what}, found {v}"));
    let null = v.is_null();
    match col {
        ColumnData::Int64(out) => out.push(if null { None } else { Some(v.as_i64().ok_or_else(|| bad("int64"))?) }),
        ColumnData::Float32(out) => {
            out.push(if null { None } else { Some(v.as_f64().ok_or_else(|| bad("float32"))? as f32) })
        }
        ColumnData::Float64(out) => out.push(if null { None } else { Some(v.as_f64().ok_or_else(|| bad("float64"))?) }),
        ColumnData::Utf8(out) => out.push(match v {
            Value::Null => None,
            Value::String(s) => Some(s.clone()),
            other => Some(other.to_string()),
        }),
        ColumnData::ListInt64(out) => out.push(match v {
            Value::Null => None,
            Value::Array(a) => {
                Some(a.iter().map(|x| x.as_i64().ok_or_else(|| bad("array of int64"))).collect::<Result<_>>()?)
            }
            _ => return Err(bad("array of int64")),
        }),
        ColumnData::ListFloat32(out) => out.push(match v {
            Value::Null => None,
            Value::Array(a) => Some(
                a.iter()
                    .map(|x| x.as_f64().map(|f| f as f32).ok_or_else(|| bad("array of float32")))
                    .collect::<Result<_>>()?,
            ),
            _ => return Err(bad("array of float32")),
        }),
    }
    Ok(())
}

fn push_text(col: &mut ColumnData, s: &str, row: usize, name: &str) -> Result<()> {
    if s.is_empty() {
        return push_json(col, &Value::Null, row, name);
    }
    let parse_err = |e: &dyn std::fmt::Display| ingest_err(row, name, format!("cannot parse {s:?}: {e}"));
    match col {
        ColumnData::Int64(out) => out.push(Some(s.trim().parse().map_err(|e| parse_err(&e))?)),
        ColumnData::Float32(out) => out.push(Some(s.trim().parse().map_err(|e| parse_err(&e))?)),
        ColumnData::Float64(out) => out.push(Some(s.trim().parse().map_err(|e| parse_err(&e))?)),
        ColumnData::Utf8(out) => out.push(Some(s.to_string())),
        ColumnData::ListInt64(_) | ColumnData::ListFloat32(_) => {
            let v: Value = serde_json::from_str(s).map_err(|e| parse_err(&e))?;
            push_json(col, &v, row, name)?;
        }
    }
    Ok(())
}

fn empty_columns(schema: &Schema) -> Vec<ColumnData> {
    schema.columns.iter().map(|c| ColumnData::empty(c.logical_type)).collect()
}

pub fn read_csv<R: Read>(input: R, schema: &Schema) -> Result<RecordBatch> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = rdr.headers().map_err(|e| ingest_err(0, "", e.to_string()))?.clone();
    let mut positions = Vec::with_capacity(schema.len());
    for c in &schema.columns {
        let pos = headers
            .iter()
            .position(|h| h.trim() == c.name)
            .ok_or_else(|| Error::SchemaMismatch(format!("csv header lacks column {}", c.name)))?;
        positions.push(pos);
    }
    let mut cols = empty_columns(schema);
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| ingest_err(row, "", e.to_string()))?;
        for ((col, pos), cs) in cols.iter_mut().zip(&positions).zip(&schema.columns) {
            let cell = rec.get(*pos).ok_or_else(|| ingest_err(row, &cs.name, "missing cell"))?;
            push_text(col, cell, row, &cs.name)?;
        }
    }
    RecordBatch::new(cols)
}

pub fn read_jsonl<R: BufRead>(input: R, schema: &Schema) -> Result<RecordBatch> {
    let mut cols = empty_columns(schema);
    let mut row = 0;
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        row += 1;
        let obj: Value = serde_json::from_str(&line).map_err(|e| ingest_err(row, "", e.to_string()))?;
        let obj = obj.as_object().ok_or_else(|| ingest_err(row, "", "line is not a JSON object"))?;
        for (col, cs) in cols.iter_mut().zip(&schema.columns) {
            push_json(col, obj.get(&cs.name).unwrap_or(&Value::Null), row, &cs.name)?;
        }
    }
    RecordBatch::new(cols)
}

/// Picks the reader by extension: `.jsonl`/`.ndjson`/`.json` or CSV.
pub fn read_path(path: &std::path::Path, schema: &Schema) -> Result<RecordBatch> {
    let file = std::fs::File::open(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("jsonl" | "ndjson" | "json") => read_jsonl(std::io::BufReader::new(file), schema),
        _ => read_csv(file, schema),
    }
}
