//! Command-line surface. `main.rs` only parses arguments and prints the
//! [`Output`] of [`run`].

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::bench::{bench_delete, bench_footer, BenchReport, DeleteBenchParams, DeletePattern};
use crate::compliance::{delete_rows_path, parse_row_ids, ComplianceLevel};
use crate::error::{Error, Result};
use crate::format::ingest::read_path;
use crate::format::{
    page_type_name, write_to_path, BullionReader, ColumnData, DeletedRows, ProjectedColumn, ReadOptions, Schema,
    StoredQuant, WriteOptions,
};
use crate::layout::{ColumnOrderSpec, RowOrderSpec};
use crate::quantization::QuantSpec;

#[derive(Debug, Parser)]
#[command(name = "bullion", version, about = "Columnar storage for ML training data")]
pub struct Cli {
    /// Print machine-readable JSON (including error diagnostics).
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for benchmark data generation.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ingest CSV or JSON-lines into a new file.
    Write(WriteArgs),
    /// Summarize a file's footer, encodings and checksum status.
    Inspect { file: PathBuf },
    /// Read selected columns.
    Project(ProjectArgs),
    /// Delete rows in place.
    Delete(DeleteArgs),
    /// Check every page against the checksum tree.
    Verify { file: PathBuf },
    /// Footer open + column lookup time across column counts.
    BenchFooter(BenchFooterArgs),
    /// Bytes rewritten by in-place deletion versus a full rewrite.
    BenchDelete(BenchDeleteArgs),
}

#[derive(Debug, Args)]
pub struct WriteArgs {
    /// CSV (header required) or .jsonl input.
    pub input: PathBuf,
    /// JSON schema: {"columns": [{"name": .., "type": ..}, ..]}.
    #[arg(long)]
    pub schema: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 4096)]
    pub rows_per_page: usize,
    #[arg(long, default_value_t = 16)]
    pub pages_per_group: usize,
    /// Sort rows by this numeric column, highest first.
    #[arg(long, value_name = "COL")]
    pub sort_by_quality: Option<String>,
    /// File with one column name per line, most frequently read first.
    #[arg(long, value_name = "FILE")]
    pub column_order: Option<PathBuf>,
    /// Store a column quantized, e.g. `emb=bf16`. Repeatable.
    #[arg(long, value_name = "COL=SPEC")]
    pub quantize: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    pub file: PathBuf,
    /// Comma-separated column names; all columns when omitted.
    #[arg(long, value_delimiter = ',')]
    pub columns: Vec<String>,
    /// Return deleted rows too, with masked cells marked.
    #[arg(long)]
    pub include_deleted: bool,
    #[arg(long)]
    pub limit: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DeleteArgs {
    #[arg(long)]
    pub file: PathBuf,
    /// Text file of row ids (whitespace or comma separated, `#` comments).
    #[arg(long)]
    pub rows: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub level: u8,
}

#[derive(Debug, Args)]
pub struct BenchFooterArgs {
    #[arg(long, value_delimiter = ',', default_value = "100,1000,5000,10000,20000")]
    pub columns: Vec<usize>,
    #[arg(long, default_value_t = 21)]
    pub trials: usize,
    /// Also write the CSV report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PatternArg {
    Clustered,
    Scattered,
    Both,
}

#[derive(Debug, Args)]
pub struct BenchDeleteArgs {
    #[arg(long, default_value_t = 4)]
    pub columns: usize,
    #[arg(long, default_value_t = 100)]
    pub pages: usize,
    #[arg(long, default_value_t = 1000)]
    pub rows_per_page: usize,
    #[arg(long, default_value_t = 0.02)]
    pub fraction: f64,
    #[arg(long, default_value_t = 2)]
    pub level: u8,
    #[arg(long, value_enum, default_value_t = PatternArg::Both)]
    pub pattern: PatternArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Result of one command: a JSON value, its human rendering and the exit code.
#[derive(Debug)]
pub struct Output {
    pub json: Value,
    pub text: String,
    pub exit_code: i32,
}

impl Output {
    fn ok(json: Value, text: String) -> Self {
        Output { json, text, exit_code: 0 }
    }

    pub fn render(&self, as_json: bool) -> String {
        if as_json {
            serde_json::to_string_pretty(&self.json).expect("json value serializes")
        } else {
            self.text.clone()
        }
    }
}

/// JSON diagnostic for a failed command.
pub fn error_json(e: &Error) -> Value {
    let mut v = json!({ "error": e.kind(), "message": e.to_string() });
    match e {
        Error::Ingest { row, column, .. } => {
            v["row"] = json!(row);
            v["column"] = json!(column);
        }
        Error::RowOutOfRange { row, num_rows } => {
            v["row"] = json!(row);
            v["num_rows"] = json!(num_rows);
        }
        _ => {}
    }
    v
}

pub fn run(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Write(a) => cmd_write(a),
        Command::Inspect { file } => cmd_inspect(file),
        Command::Project(a) => cmd_project(a),
        Command::Delete(a) => cmd_delete(a),
        Command::Verify { file } => cmd_verify(file),
        Command::BenchFooter(a) => {
            let report = bench_footer(&a.columns, a.trials, cli.seed)?;
            report_output(&report, a.out.as_ref())
        }
        Command::BenchDelete(a) => {
            let params = DeleteBenchParams {
                columns: a.columns,
                pages_per_column: a.pages,
                rows_per_page: a.rows_per_page,
                fraction: a.fraction,
                level: level(a.level)?,
                seed: cli.seed,
            };
            let patterns: &[DeletePattern] = match a.pattern {
                PatternArg::Clustered => &[DeletePattern::Clustered],
                PatternArg::Scattered => &[DeletePattern::Scattered],
                PatternArg::Both => &[DeletePattern::Clustered, DeletePattern::Scattered],
            };
            report_output(&bench_delete(&params, patterns)?, a.out.as_ref())
        }
    }
}

fn level(n: u8) -> Result<ComplianceLevel> {
    ComplianceLevel::try_from(n)
}

fn report_output(report: &BenchReport, out: Option<&PathBuf>) -> Result<Output> {
    let csv = report.to_csv()?;
    if let Some(path) = out {
        std::fs::write(path, &csv)?;
    }
    Ok(Output::ok(serde_json::to_value(report).expect("report serializes"), csv))
}

fn parse_quantize(items: &[String], schema: &mut Schema) -> Result<()> {
    for item in items {
        let (col, spec) = item
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("--quantize expects COL=SPEC, got {item:?}")))?;
        let q = QuantSpec::parse(spec).ok_or_else(|| Error::InvalidConfig(format!("unknown quantization {spec:?}")))?;
        let idx = schema.index_of(col).ok_or_else(|| Error::ColumnNotFound(col.to_string()))?;
        schema.columns[idx].quantization = Some(q);
    }
    Ok(())
}

pub fn cmd_write(a: &WriteArgs) -> Result<Output> {
    let mut schema = Schema::from_json(&std::fs::read_to_string(&a.schema)?)?;
    parse_quantize(&a.quantize, &mut schema)?;
    schema.validate()?;
    let batch = read_path(&a.input, &schema)?;
    let mut opts =
        WriteOptions { rows_per_page: a.rows_per_page, pages_per_group: a.pages_per_group, ..WriteOptions::default() };
    if let Some(col) = &a.sort_by_quality {
        opts.row_order = RowOrderSpec::QualityDesc { score_column: col.clone() };
    }
    if let Some(path) = &a.column_order {
        opts.column_order = ColumnOrderSpec::from_ranking_text(&std::fs::read_to_string(path)?);
    }
    let mut stats = write_to_path(&a.output, &schema, &[batch], &opts)?;
    stats.row_permutation = None;
    let mut text = format!(
        "wrote {}: {} rows, {} groups, {} pages, {} bytes (footer {})\n",
        a.output.display(),
        stats.num_rows,
        stats.num_groups,
        stats.num_pages,
        stats.file_bytes,
        stats.footer_bytes
    );
    for c in &stats.columns {
        let schemes: Vec<String> = c.schemes.iter().map(|(k, v)| format!("{k}x{v}")).collect();
        let _ = writeln!(text, "  {:<24} {:>10} bytes  {}", c.name, c.bytes, schemes.join(" "));
    }
    Ok(Output::ok(serde_json::to_value(&stats).expect("stats serialize"), text))
}

fn quant_name(q: StoredQuant) -> Option<String> {
    match q {
        StoredQuant::None => None,
        StoredQuant::Float(q) => Some(format!("{q:?}").to_lowercase()),
        StoredQuant::IntRehash => Some("int_rehash".into()),
        StoredQuant::DualHi => Some("dual_hi".into()),
        StoredQuant::DualLo => Some("dual_lo".into()),
    }
}

pub fn cmd_inspect(file: &PathBuf) -> Result<Output> {
    let reader = BullionReader::open_path(file)?;
    let f = reader.footer();
    let verify = reader.verify()?;
    let mut cols = Vec::new();
    let mut text = format!(
        "rows {}  groups {}  pages {}  columns {}  footer {} bytes\ndeleted rows {}\nchecksums {}\n",
        f.num_rows(),
        f.num_groups(),
        f.num_pages(),
        f.num_columns(),
        f.bytes().len(),
        f.deleted_count(),
        if verify.ok { "ok" } else { "MISMATCH" }
    );
    for (c, d) in f.columns()?.iter().enumerate() {
        let mut schemes = std::collections::BTreeMap::<String, usize>::new();
        let mut bytes = 0u64;
        for g in 0..f.num_groups() {
            for p in f.chunk_pages(g, c) {
                *schemes.entry(page_type_name(f.page_compression_types().get(p))).or_default() += 1;
            }
            let (s, e) = f.chunk_range(g, c);
            bytes += e - s;
        }
        let schemes_text: Vec<String> = schemes.iter().map(|(k, v)| format!("{k}x{v}")).collect();
        let _ = writeln!(
            text,
            "  {:<24} {:<14} level {}  {:>10} bytes  {}{}",
            d.name,
            d.logical_type.to_string(),
            d.compliance_level,
            bytes,
            schemes_text.join(" "),
            quant_name(d.quant).map(|q| format!("  [{q}]")).unwrap_or_default()
        );
        cols.push(json!({
            "name": d.name,
            "type": d.logical_type.to_string(),
            "quantization": quant_name(d.quant),
            "compliance_level": d.compliance_level,
            "sparse": d.is_sparse(),
            "bytes": bytes,
            "schemes": schemes,
        }));
    }
    if !verify.ok {
        let _ = writeln!(
            text,
            "bad pages {:?}  bad groups {:?}  root ok {}",
            verify.bad_pages, verify.bad_groups, verify.root_ok
        );
    }
    let json = json!({
        "num_rows": f.num_rows(),
        "num_groups": f.num_groups(),
        "num_pages": f.num_pages(),
        "footer_bytes": f.bytes().len(),
        "deleted_rows": f.deleted_count(),
        "checksum": verify,
        "columns": cols,
    });
    Ok(Output::ok(json, text))
}

fn cell_text(data: &ColumnData, i: usize) -> String {
    fn list<T: ToString>(v: &[T]) -> String {
        let items: Vec<String> = v.iter().map(T::to_string).collect();
        format!("[{}]", items.join(","))
    }
    match data {
        ColumnData::Int64(v) => v[i].map(|x| x.to_string()),
        ColumnData::Float32(v) => v[i].map(|x| x.to_string()),
        ColumnData::Float64(v) => v[i].map(|x| x.to_string()),
        ColumnData::Utf8(v) => v[i].clone(),
        ColumnData::ListInt64(v) => v[i].as_deref().map(list),
        ColumnData::ListFloat32(v) => v[i].as_deref().map(list),
    }
    .unwrap_or_default()
}

fn table_text(cols: &[ProjectedColumn], limit: usize) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::InvalidConfig(e.to_string());
    w.write_record(cols.iter().map(|c| c.name.as_str())).map_err(csv_err)?;
    let rows = cols.first().map_or(0, ProjectedColumn::len).min(limit);
    for i in 0..rows {
        w.write_record(cols.iter().map(|c| if c.masked[i] { "<masked>".to_string() } else { cell_text(&c.data, i) }))
            .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn cmd_project(a: &ProjectArgs) -> Result<Output> {
    let reader = BullionReader::open_path(&a.file)?;
    let opts = ReadOptions {
        deleted: if a.include_deleted { DeletedRows::Surface } else { DeletedRows::Skip },
        ..ReadOptions::default()
    };
    let cols = if a.columns.is_empty() {
        reader.scan(&opts)?
    } else {
        let names: Vec<&str> = a.columns.iter().map(String::as_str).collect();
        reader.project(&names, &opts)?
    };
    let limit = a.limit.unwrap_or(usize::MAX);
    let text = table_text(&cols, limit)?;
    let json = Value::Array(
        cols.iter()
            .map(|c| {
                let mut v = serde_json::to_value(c).expect("column serializes");
                if let Some(vals) = v["data"]["values"].as_array_mut() {
                    vals.truncate(limit);
                }
                if let Some(m) = v["masked"].as_array_mut() {
                    m.truncate(limit);
                }
                v
            })
            .collect(),
    );
    Ok(Output::ok(json, text))
}

pub fn cmd_delete(a: &DeleteArgs) -> Result<Output> {
    let rows = parse_row_ids(&std::fs::read_to_string(&a.rows)?)?;
    let stats = delete_rows_path(&a.file, &rows, level(a.level)?)?;
    let json = serde_json::to_value(&stats).expect("stats serialize");
    let text = serde_json::to_string_pretty(&json).expect("json value serializes");
    Ok(Output::ok(json, text))
}

pub fn cmd_verify(file: &PathBuf) -> Result<Output> {
    let report = BullionReader::open_path(file)?.verify()?;
    let text = if report.ok {
        format!("ok: {} pages verified", report.num_pages)
    } else {
        format!(
            "checksum mismatch: bad pages {:?}, bad groups {:?}, root ok {}",
            report.bad_pages, report.bad_groups, report.root_ok
        )
    };
    let exit_code = if report.ok { 0 } else { 2 };
    Ok(Output { json: serde_json::to_value(&report).expect("report serializes"), text, exit_code })
}
