use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantization::QuantSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LogicalType {
    #[serde(rename = "int64")]
    Int64,
    #[serde(rename = "float32")]
    Float32,
    #[serde(rename = "float64")]
    Float64,
    #[serde(rename = "string", alias = "utf8")]
    Utf8,
    #[serde(rename = "list<int64>")]
    ListInt64,
    #[serde(rename = "list<float32>")]
    ListFloat32,
}

impl LogicalType {
    pub fn code(self) -> u8 {
        match self {
            LogicalType::Int64 => 0,
            LogicalType::Float32 => 1,
            LogicalType::Float64 => 2,
            LogicalType::Utf8 => 3,
            LogicalType::ListInt64 => 4,
            LogicalType::ListFloat32 => 5,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        Ok(match code {
            0 => LogicalType::Int64,
            1 => LogicalType::Float32,
            2 => LogicalType::Float64,
            3 => LogicalType::Utf8,
            4 => LogicalType::ListInt64,
            5 => LogicalType::ListFloat32,
            c => return Err(Error::TruncatedFooter(format!("unknown logical type code {c}"))),
        })
    }

    pub fn is_list(self) -> bool {
        matches!(self, LogicalType::ListInt64 | LogicalType::ListFloat32)
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, LogicalType::Int64 | LogicalType::Float32 | LogicalType::Float64)
    }
}

impl fmt::Display for LogicalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogicalType::Int64 => "int64",
            LogicalType::Float32 => "float32",
            LogicalType::Float64 => "float64",
            LogicalType::Utf8 => "string",
            LogicalType::ListInt64 => "list<int64>",
            LogicalType::ListFloat32 => "list<float32>",
        })
    }
}

fn default_level() -> u8 {
    1
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    #[serde(rename = "type")]
    pub logical_type: LogicalType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantization: Option<QuantSpec>,
    #[serde(default = "default_level")]
    pub compliance_level: u8,
    #[serde(default, rename = "sparse")]
    pub is_sparse_sequence: bool,
}

impl ColumnSchema {
    pub fn new(name: impl Into<String>, logical_type: LogicalType) -> Self {
        ColumnSchema {
            name: name.into(),
            logical_type,
            quantization: None,
            compliance_level: default_level(),
            is_sparse_sequence: false,
        }
    }

    pub fn with_quantization(mut self, q: QuantSpec) -> Self {
        self.quantization = Some(q);
        self
    }

    pub fn with_compliance(mut self, level: u8) -> Self {
        self.compliance_level = level;
        self
    }

    pub fn sparse(mut self) -> Self {
        self.is_sparse_sequence = true;
        self
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::SchemaMismatch(format!("column {}: {msg}", self.name)));
        if self.compliance_level > 2 {
            return bad(format!("compliance level {} not in 0..=2", self.compliance_level));
        }
        if self.is_sparse_sequence && self.logical_type != LogicalType::ListInt64 {
            return bad("sparse sequence columns must be list<int64>".into());
        }
        if self.is_sparse_sequence && self.quantization.is_some() {
            return bad("sparse sequence columns cannot be quantized".into());
        }
        if self.is_sparse_sequence && self.compliance_level == 2 {
            return Err(Error::UnsupportedEncoding(format!(
                "column {}: sparse delta blocks cannot be masked in place (compliance level 2)",
                self.name
            )));
        }
        if let Some(q) = self.quantization {
            let ok = match q {
                QuantSpec::IntRehash => self.logical_type == LogicalType::Int64,
                QuantSpec::DualSplit16 => self.logical_type == LogicalType::Float32,
                _ => matches!(self.logical_type, LogicalType::Float32 | LogicalType::ListFloat32),
            };
            if !ok {
                return bad(format!("{q:?} does not apply to {}", self.logical_type));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<ColumnSchema>,
}

impl Schema {
    pub fn new(columns: Vec<ColumnSchema>) -> Self {
        Schema { columns }
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn validate(&self) -> Result<()> {
        if self.columns.is_empty() {
            return Err(Error::SchemaMismatch("schema has no columns".into()));
        }
        let mut seen = HashSet::new();
        for c in &self.columns {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::SchemaMismatch(format!("duplicate column name {}", c.name)));
            }
            c.validate()?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::SchemaMismatch(format!("schema json: {e}")))
    }
}

/// One column's cells; `None` is null.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", content = "values")]
pub enum ColumnData {
    #[serde(rename = "int64")]
    Int64(Vec<Option<i64>>),
    #[serde(rename = "float32")]
    Float32(Vec<Option<f32>>),
    #[serde(rename = "float64")]
    Float64(Vec<Option<f64>>),
    #[serde(rename = "string")]
    Utf8(Vec<Option<String>>),
    #[serde(rename = "list<int64>")]
    ListInt64(Vec<Option<Vec<i64>>>),
    #[serde(rename = "list<float32>")]
    ListFloat32(Vec<Option<Vec<f32>>>),
}

macro_rules! each_column {
    ($data:expr, $v:ident => $body:expr) => {
        match $data {
            ColumnData::Int64($v) => $body,
            ColumnData::Float32($v) => $body,
            ColumnData::Float64($v) => $body,
            ColumnData::Utf8($v) => $body,
            ColumnData::ListInt64($v) => $body,
            ColumnData::ListFloat32($v) => $body,
        }
    };
}

macro_rules! map_column {
    ($data:expr, $v:ident => $body:expr) => {
        match $data {
            ColumnData::Int64($v) => ColumnData::Int64($body),
            ColumnData::Float32($v) => ColumnData::Float32($body),
            ColumnData::Float64($v) => ColumnData::Float64($body),
            ColumnData::Utf8($v) => ColumnData::Utf8($body),
            ColumnData::ListInt64($v) => ColumnData::ListInt64($body),
            ColumnData::ListFloat32($v) => ColumnData::ListFloat32($body),
        }
    };
}

fn f32_bits(v: &[Option<f32>]) -> Vec<Option<u32>> {
    v.iter().map(|x| x.map(f32::to_bits)).collect()
}

impl PartialEq for ColumnData {
    /// Floats compare by bit pattern.
    fn eq(&self, other: &Self) -> bool {
        use ColumnData::*;
        match (self, other) {
            (Int64(a), Int64(b)) => a == b,
            (Float32(a), Float32(b)) => f32_bits(a) == f32_bits(b),
            (Float64(a), Float64(b)) => a.iter().map(|x| x.map(f64::to_bits)).eq(b.iter().map(|x| x.map(f64::to_bits))),
            (Utf8(a), Utf8(b)) => a == b,
            (ListInt64(a), ListInt64(b)) => a == b,
            (ListFloat32(a), ListFloat32(b)) => a
                .iter()
                .map(|l| l.as_ref().map(|l| l.iter().map(|x| x.to_bits()).collect::<Vec<_>>()))
                .eq(b.iter().map(|l| l.as_ref().map(|l| l.iter().map(|x| x.to_bits()).collect::<Vec<_>>()))),
            _ => false,
        }
    }
}

impl ColumnData {
    pub fn empty(ty: LogicalType) -> Self {
        match ty {
            LogicalType::Int64 => ColumnData::Int64(Vec::new()),
            LogicalType::Float32 => ColumnData::Float32(Vec::new()),
            LogicalType::Float64 => ColumnData::Float64(Vec::new()),
            LogicalType::Utf8 => ColumnData::Utf8(Vec::new()),
            LogicalType::ListInt64 => ColumnData::ListInt64(Vec::new()),
            LogicalType::ListFloat32 => ColumnData::ListFloat32(Vec::new()),
        }
    }

    pub fn logical_type(&self) -> LogicalType {
        match self {
            ColumnData::Int64(_) => LogicalType::Int64,
            ColumnData::Float32(_) => LogicalType::Float32,
            ColumnData::Float64(_) => LogicalType::Float64,
            ColumnData::Utf8(_) => LogicalType::Utf8,
            ColumnData::ListInt64(_) => LogicalType::ListInt64,
            ColumnData::ListFloat32(_) => LogicalType::ListFloat32,
        }
    }

    pub fn len(&self) -> usize {
        each_column!(self, v => v.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_null(&self, i: usize) -> bool {
        each_column!(self, v => v[i].is_none())
    }

    pub fn null_count(&self) -> usize {
        each_column!(self, v => v.iter().filter(|x| x.is_none()).count())
    }

    /// Rows `perm[0], perm[1], ...` in that order.
    pub fn take(&self, perm: &[usize]) -> ColumnData {
        map_column!(self, v => perm.iter().map(|&i| v[i].clone()).collect())
    }

    pub fn slice(&self, start: usize, end: usize) -> ColumnData {
        map_column!(self, v => v[start..end].to_vec())
    }

    pub fn filter(&self, keep: &[bool]) -> ColumnData {
        map_column!(self, v => v.iter().zip(keep).filter(|(_, k)| **k).map(|(x, _)| x.clone()).collect())
    }

    pub fn set_null(&mut self, i: usize) {
        each_column!(self, v => v[i] = None)
    }

    pub fn append(&mut self, other: &ColumnData) -> Result<()> {
        match (self, other) {
            (ColumnData::Int64(a), ColumnData::Int64(b)) => a.extend_from_slice(b),
            (ColumnData::Float32(a), ColumnData::Float32(b)) => a.extend_from_slice(b),
            (ColumnData::Float64(a), ColumnData::Float64(b)) => a.extend_from_slice(b),
            (ColumnData::Utf8(a), ColumnData::Utf8(b)) => a.extend_from_slice(b),
            (ColumnData::ListInt64(a), ColumnData::ListInt64(b)) => a.extend_from_slice(b),
            (ColumnData::ListFloat32(a), ColumnData::ListFloat32(b)) => a.extend_from_slice(b),
            (a, b) => {
                return Err(Error::SchemaMismatch(format!(
                    "cannot append {} to {}",
                    b.logical_type(),
                    a.logical_type()
                )))
            }
        }
        Ok(())
    }

    /// Numeric cell as f64 for ordering; `None` for nulls.
    pub fn numeric(&self, i: usize) -> Option<f64> {
        match self {
            ColumnData::Int64(v) => v[i].map(|x| x as f64),
            ColumnData::Float32(v) => v[i].map(|x| x as f64),
            ColumnData::Float64(v) => v[i],
            _ => None,
        }
    }
}

/// Columns aligned with a schema, all of equal length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordBatch {
    pub columns: Vec<ColumnData>,
}

impl RecordBatch {
    pub fn new(columns: Vec<ColumnData>) -> Result<Self> {
        if let Some(first) = columns.first() {
            if let Some(c) = columns.iter().find(|c| c.len() != first.len()) {
                return Err(Error::SchemaMismatch(format!("column lengths differ ({} vs {})", first.len(), c.len())));
            }
        }
        Ok(RecordBatch { columns })
    }

    pub fn num_rows(&self) -> usize {
        self.columns.first().map_or(0, ColumnData::len)
    }

    pub fn check(&self, schema: &Schema) -> Result<()> {
        if self.columns.len() != schema.len() {
            return Err(Error::SchemaMismatch(format!(
                "batch has {} columns, schema has {}",
                self.columns.len(),
                schema.len()
            )));
        }
        for (c, s) in self.columns.iter().zip(&schema.columns) {
            if c.logical_type() != s.logical_type {
                return Err(Error::SchemaMismatch(format!(
                    "column {} is {} but schema says {}",
                    s.name,
                    c.logical_type(),
                    s.logical_type
                )));
            }
            if c.len() != self.num_rows() {
                return Err(Error::SchemaMismatch(format!("column {} has a different length", s.name)));
            }
        }
        Ok(())
    }

    pub fn take(&self, perm: &[usize]) -> RecordBatch {
        RecordBatch { columns: self.columns.iter().map(|c| c.take(perm)).collect() }
    }

    /// Concatenates batches that all conform to `schema`.
    pub fn concat(schema: &Schema, batches: &[RecordBatch]) -> Result<RecordBatch> {
        let mut columns: Vec<ColumnData> = schema.columns.iter().map(|c| ColumnData::empty(c.logical_type)).collect();
        for b in batches {
            b.check(schema)?;
            for (acc, c) in columns.iter_mut().zip(&b.columns) {
                acc.append(c)?;
            }
        }
        Ok(RecordBatch { columns })
    }
}

/// A projected cell: a value, a null, or a compliance mask placeholder.
#[derive(Clone, Debug, PartialEq)]
pub enum MaybeMasked<T> {
    Value(T),
    Null,
    Mask,
}

/// Projection output for one logical column. Masked rows hold `None` in
/// `data` and `true` in `masked`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectedColumn {
    pub name: String,
    pub data: ColumnData,
    pub masked: Vec<bool>,
}

impl ProjectedColumn {
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn mask_count(&self) -> usize {
        self.masked.iter().filter(|m| **m).count()
    }

    pub fn cell_i64(&self, i: usize) -> Option<MaybeMasked<i64>> {
        match &self.data {
            ColumnData::Int64(v) => Some(self.wrap(i, v[i])),
            _ => None,
        }
    }

    fn wrap<T>(&self, i: usize, v: Option<T>) -> MaybeMasked<T> {
        match (self.masked[i], v) {
            (true, _) => MaybeMasked::Mask,
            (false, Some(x)) => MaybeMasked::Value(x),
            (false, None) => MaybeMasked::Null,
        }
    }
}
