//! Write-time data organization: quality-score row ordering and
//! access-frequency column ordering.
//!
//! Row order changes the row ids of the written file. Column order changes
//! only where column chunks sit inside each row group; readers still see the
//! logical schema order.

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::{RecordBatch, Schema};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum RowOrderSpec {
    #[default]
    None,
    QualityDesc {
        score_column: String,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ColumnOrderSpec {
    #[default]
    SchemaOrder,
    Frequency {
        ranking: Vec<String>,
    },
}

impl ColumnOrderSpec {
    /// Reads a ranking file: one column name per line, `#` comments allowed.
    pub fn from_ranking_text(text: &str) -> Self {
        let ranking =
            text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(String::from).collect();
        ColumnOrderSpec::Frequency { ranking }
    }
}

/// Stable descending sort on the score column. Nulls and NaN scores go last.
/// Returns the permutation (new position -> old row) and the reordered batch.
pub fn reorder_rows(schema: &Schema, batch: &RecordBatch, spec: &RowOrderSpec) -> Result<(Vec<usize>, RecordBatch)> {
    let n = batch.num_rows();
    let score_column = match spec {
        RowOrderSpec::None => return Ok(((0..n).collect(), batch.clone())),
        RowOrderSpec::QualityDesc { score_column } => score_column,
    };
    let idx = schema.index_of(score_column).ok_or_else(|| Error::MissingScoreColumn(score_column.clone()))?;
    let col = &batch.columns[idx];
    if !col.logical_type().is_numeric() {
        return Err(Error::NonNumericScore(score_column.clone()));
    }
    let key = |i: usize| col.numeric(i).filter(|x| !x.is_nan());
    let mut perm: Vec<usize> = (0..n).collect();
    perm.sort_by(|&a, &b| match (key(a), key(b)) {
        (Some(x), Some(y)) => y.partial_cmp(&x).unwrap_or(Ordering::Equal),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    });
    let reordered = batch.take(&perm);
    Ok((perm, reordered))
}

/// Physical placement of logical columns: ranked columns first in ranking
/// order, then the rest in schema order.
pub fn reorder_columns(schema: &Schema, spec: &ColumnOrderSpec) -> Result<Vec<usize>> {
    let ranking = match spec {
        ColumnOrderSpec::SchemaOrder => return Ok((0..schema.len()).collect()),
        ColumnOrderSpec::Frequency { ranking } => ranking,
    };
    let mut order = Vec::with_capacity(schema.len());
    let mut placed = HashSet::new();
    for name in ranking {
        let i = schema.index_of(name).ok_or_else(|| Error::UnknownColumn(name.clone()))?;
        if placed.insert(i) {
            order.push(i);
        }
    }
    order.extend((0..schema.len()).filter(|i| !placed.contains(i)));
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::{ColumnData, ColumnSchema, LogicalType};

    fn scored(scores: Vec<Option<f64>>) -> (Schema, RecordBatch) {
        let n = scores.len() as i64;
        let schema = Schema::new(vec![
            ColumnSchema::new("id", LogicalType::Int64),
            ColumnSchema::new("q", LogicalType::Float64),
        ]);
        let batch =
            RecordBatch::new(vec![ColumnData::Int64((0..n).map(Some).collect()), ColumnData::Float64(scores)]).unwrap();
        (schema, batch)
    }

    #[test]
    fn stable_descending() {
        let (schema, batch) = scored(vec![Some(0.2), Some(0.9), Some(0.9), Some(0.1)]);
        let spec = RowOrderSpec::QualityDesc { score_column: "q".into() };
        let (perm, out) = reorder_rows(&schema, &batch, &spec).unwrap();
        assert_eq!(perm, vec![1, 2, 0, 3]);
        assert_eq!(out.columns[0], ColumnData::Int64(vec![Some(1), Some(2), Some(0), Some(3)]));
    }

    #[test]
    fn sorted_input_is_identity_and_missing_go_last() {
        let (schema, batch) = scored(vec![Some(3.0), Some(2.0), Some(1.0)]);
        let spec = RowOrderSpec::QualityDesc { score_column: "q".into() };
        assert_eq!(reorder_rows(&schema, &batch, &spec).unwrap().0, vec![0, 1, 2]);
        let (schema, batch) = scored(vec![None, Some(f64::NAN), Some(1.0), Some(5.0)]);
        assert_eq!(reorder_rows(&schema, &batch, &spec).unwrap().0, vec![3, 2, 0, 1]);
    }

    #[test]
    fn score_column_errors() {
        let (schema, batch) = scored(vec![Some(1.0)]);
        let missing = RowOrderSpec::QualityDesc { score_column: "nope".into() };
        assert!(matches!(reorder_rows(&schema, &batch, &missing), Err(Error::MissingScoreColumn(_))));
        let schema = Schema::new(vec![ColumnSchema::new("s", LogicalType::Utf8)]);
        let batch = RecordBatch::new(vec![ColumnData::Utf8(vec![Some("x".into())])]).unwrap();
        let spec = RowOrderSpec::QualityDesc { score_column: "s".into() };
        assert!(matches!(reorder_rows(&schema, &batch, &spec), Err(Error::NonNumericScore(_))));
    }

    #[test]
    fn column_order() {
        let schema = Schema::new(["a", "b", "c"].iter().map(|n| ColumnSchema::new(*n, LogicalType::Int64)).collect());
        let spec = ColumnOrderSpec::Frequency { ranking: vec!["c".into()] };
        assert_eq!(reorder_columns(&schema, &spec).unwrap(), vec![2, 0, 1]);
        let empty = ColumnOrderSpec::Frequency { ranking: vec![] };
        assert_eq!(reorder_columns(&schema, &empty).unwrap(), vec![0, 1, 2]);
        let bad = ColumnOrderSpec::Frequency { ranking: vec!["zz".into()] };
        assert!(matches!(reorder_columns(&schema, &bad), Err(Error::UnknownColumn(_))));
        assert_eq!(
            ColumnOrderSpec::from_ranking_text("# hot\nc\n\nb\n"),
            ColumnOrderSpec::Frequency { ranking: vec!["c".into(), "b".into()] }
        );
    }
}
