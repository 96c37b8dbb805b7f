//! Footer-lookup and deletion-I/O benchmarks.
//!
//! Every report carries structural metrics (bytes, pages) that are exact for
//! a given seed next to wall-clock timings that vary by machine.

use std::fs::File;
use std::path::PathBuf;
use std::time::Instant;

use memmap2::Mmap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::compliance::{delete_rows, ComplianceLevel};
use crate::error::Result;
use crate::format::{
    read_footer, write_file, ColumnData, ColumnSchema, LogicalType, RecordBatch, Schema, WriteOptions,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub parameter: String,
    pub metric: String,
    pub value: f64,
    pub unit: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn push(&mut self, parameter: impl ToString, metric: &str, value: f64, unit: &str) {
        self.rows.push(BenchRow {
            parameter: parameter.to_string(),
            metric: metric.to_string(),
            value,
            unit: unit.to_string(),
        });
    }

    pub fn get(&self, parameter: &str, metric: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.parameter == parameter && r.metric == metric).map(|r| r.value)
    }

    /// CSV with the header `parameter,metric,value,unit`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).map_err(|e| crate::Error::InvalidConfig(e.to_string()))?;
        }
        if self.rows.is_empty() {
            w.write_record(["parameter", "metric", "value", "unit"])
                .map_err(|e| crate::Error::InvalidConfig(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| crate::Error::InvalidConfig(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// A file image with `ncols` small int64 columns named `c0..`.
pub fn wide_file(ncols: usize, rows: usize, seed: u64) -> Result<Vec<u8>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let schema = Schema::new((0..ncols).map(|i| ColumnSchema::new(format!("c{i}"), LogicalType::Int64)).collect());
    let cols =
        (0..ncols).map(|_| ColumnData::Int64((0..rows).map(|_| Some(rng.random_range(0..1000))).collect())).collect();
    let batch = RecordBatch::new(cols)?;
    Ok(write_file(&schema, &[batch], &WriteOptions::default())?.0)
}

struct TempPath(PathBuf);

impl Drop for TempPath {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.0);
    }
}

/// Times opening a file (open, map, footer view) and resolving one column
/// name, for each column count. Reports the median over `trials`. Trials
/// alternate between column counts so drift affects every count alike.
pub fn bench_footer(column_counts: &[usize], trials: usize, seed: u64) -> Result<BenchReport> {
    let mut report = BenchReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut files = Vec::with_capacity(column_counts.len());
    for &ncols in column_counts {
        let image = wide_file(ncols, 8, seed)?;
        let path = TempPath(std::env::temp_dir().join(format!("bullion-bench-{}-{ncols}.bln", std::process::id())));
        std::fs::write(&path.0, &image)?;
        let footer_len = read_footer(&image)?.bytes().len();
        files.push((ncols, path, footer_len, image.len(), Vec::with_capacity(trials)));
    }
    for _ in 0..trials.max(1) {
        for (ncols, path, _, _, times) in files.iter_mut() {
            let target = format!("c{}", rng.random_range(0..*ncols));
            let t = Instant::now();
            let file = File::open(&path.0)?;
            // SAFETY: the file is private to this benchmark and not modified while mapped.
            let map = unsafe { Mmap::map(&file)? };
            let footer = read_footer(&map)?;
            let col = footer.lookup(&target)?;
            std::hint::black_box(footer.chunk_range(0, col));
            times.push(t.elapsed().as_secs_f64() * 1e3);
        }
    }
    for (ncols, _, footer_len, file_len, times) in files {
        report.push(ncols, "lookup_median", median(times), "ms");
        report.push(ncols, "footer_bytes", footer_len as f64, "bytes");
        report.push(ncols, "file_bytes", file_len as f64, "bytes");
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeletePattern {
    /// Contiguous rows starting at a page boundary.
    Clustered,
    /// Rows spread evenly across the whole file.
    Scattered,
}

#[derive(Clone, Debug)]
pub struct DeleteBenchParams {
    pub columns: usize,
    pub pages_per_column: usize,
    pub rows_per_page: usize,
    pub fraction: f64,
    pub level: ComplianceLevel,
    pub seed: u64,
}

impl Default for DeleteBenchParams {
    fn default() -> Self {
        DeleteBenchParams {
            columns: 4,
            pages_per_column: 100,
            rows_per_page: 1000,
            fraction: 0.02,
            level: ComplianceLevel::PhysicalMask,
            seed: 0,
        }
    }
}

/// A file of random int64 level-2 columns with `pages_per_column` equal pages.
pub fn deletion_fixture(p: &DeleteBenchParams) -> Result<Vec<u8>> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let rows = p.pages_per_column * p.rows_per_page;
    let schema = Schema::new(
        (0..p.columns).map(|i| ColumnSchema::new(format!("f{i}"), LogicalType::Int64).with_compliance(2)).collect(),
    );
    let cols = (0..p.columns).map(|_| ColumnData::Int64((0..rows).map(|_| Some(rng.random())).collect())).collect();
    let opts = WriteOptions { rows_per_page: p.rows_per_page, pages_per_group: 10, ..WriteOptions::default() };
    Ok(write_file(&schema, &[RecordBatch::new(cols)?], &opts)?.0)
}

/// Row ids for a deletion pattern.
pub fn pick_rows(p: &DeleteBenchParams, pattern: DeletePattern) -> Vec<u64> {
    let rows = (p.pages_per_column * p.rows_per_page) as u64;
    let k = ((rows as f64 * p.fraction).round() as u64).min(rows);
    if k == 0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed ^ 0x5eed);
    match pattern {
        DeletePattern::Clustered => {
            let rpp = p.rows_per_page as u64;
            let span_pages = k.div_ceil(rpp);
            let start_page = rng.random_range(0..=(p.pages_per_column as u64 - span_pages));
            let start = start_page * rpp;
            (start..start + k).collect()
        }
        DeletePattern::Scattered => {
            let stride = rows as f64 / k as f64;
            (0..k)
                .map(|i| ((i as f64 * stride) as u64 + rng.random_range(0..stride.max(1.0) as u64)).min(rows - 1))
                .collect()
        }
    }
}

/// Deletes `fraction` of rows in each pattern and compares bytes written to
/// a full rewrite of the file.
pub fn bench_delete(p: &DeleteBenchParams, patterns: &[DeletePattern]) -> Result<BenchReport> {
    let mut report = BenchReport::default();
    for &pattern in patterns {
        let mut file = deletion_fixture(p)?;
        let rows = pick_rows(p, pattern);
        let name = match pattern {
            DeletePattern::Clustered => "clustered",
            DeletePattern::Scattered => "scattered",
        };
        let param = format!("{name}:{}", p.fraction);
        let t = Instant::now();
        let stats = delete_rows(&mut file, &rows, p.level)?;
        let ms = t.elapsed().as_secs_f64() * 1e3;
        report.push(&param, "rows_deleted", stats.rows_deleted as f64, "rows");
        report.push(&param, "pages_rewritten", stats.pages_rewritten as f64, "pages");
        report.push(&param, "bytes_rewritten", stats.bytes_rewritten as f64, "bytes");
        report.push(&param, "file_bytes", stats.file_bytes as f64, "bytes");
        report.push(&param, "full_rewrite_bytes", stats.file_bytes as f64, "bytes");
        report.push(&param, "rewrite_ratio", stats.rewrite_ratio(), "ratio");
        let factor =
            if stats.bytes_rewritten == 0 { 0.0 } else { stats.file_bytes as f64 / stats.bytes_rewritten as f64 };
        report.push(&param, "reduction_factor", factor, "x");
        report.push(&param, "elapsed", ms, "ms");
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_header_and_rows() {
        let mut r = BenchReport::default();
        r.push(100, "lookup_median", 0.5, "ms");
        assert_eq!(r.to_csv().unwrap(), "parameter,metric,value,unit\n100,lookup_median,0.5,ms\n");
        assert_eq!(BenchReport::default().to_csv().unwrap(), "parameter,metric,value,unit\n");
    }

    #[test]
    fn clustered_rows_span_whole_pages() {
        let p = DeleteBenchParams { pages_per_column: 10, rows_per_page: 100, fraction: 0.2, ..Default::default() };
        let rows = pick_rows(&p, DeletePattern::Clustered);
        assert_eq!(rows.len(), 200);
        assert_eq!(rows[0] % 100, 0);
        let s = pick_rows(&p, DeletePattern::Scattered);
        assert_eq!(s.len(), 200);
        let pages: std::collections::BTreeSet<u64> = s.iter().map(|r| r / 100).collect();
        assert_eq!(pages.len(), 10);
    }

    #[test]
    fn median_of_even_count() {
        assert_eq!(median(vec![3.0, 1.0, 2.0, 10.0]), 2.5);
    }
}
