//! Column statistics, normalization strategies and the fitted helper that
//! turns raw text rows into model vectors and back.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::csv::parse_real;
use super::encoding::{decode_one_of_n, encode_one_of_n, equilateral_matrix, nearest_row};
use super::DataPair;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Continuous,
    Nominal,
    Ordinal,
}

impl ColumnType {
    pub fn is_categorical(self) -> bool {
        !matches!(self, ColumnType::Continuous)
    }
}

impl fmt::Display for ColumnType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ColumnType::Continuous => "continuous",
            ColumnType::Nominal => "nominal",
            ColumnType::Ordinal => "ordinal",
        })
    }
}

impl std::str::FromStr for ColumnType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "continuous" => Ok(ColumnType::Continuous),
            "nominal" => Ok(ColumnType::Nominal),
            "ordinal" => Ok(ColumnType::Ordinal),
            other => Err(Error::Config(format!("unknown column type '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnRole {
    Input,
    Output,
    Ignored,
}

impl fmt::Display for ColumnRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ColumnRole::Input => "input",
            ColumnRole::Output => "output",
            ColumnRole::Ignored => "ignored",
        })
    }
}

/// Summary statistics of a numeric column (population standard deviation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

impl ColumnStats {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("column has no values".into()));
        }
        let n = values.len() as f64;
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        for &v in values {
            min = min.min(v);
            max = max.max(v);
        }
        let mean = (values.iter().sum::<f64>() / n).clamp(min, max);
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Ok(Self {
            min,
            max,
            mean,
            std: var.sqrt(),
            count: values.len(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NormalizationStrategy {
    Range { lo: f64, hi: f64 },
    Zscore,
    OneOfN { off: f64, on: f64 },
    Equilateral,
    Passthrough,
}

impl NormalizationStrategy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NormalizationStrategy::Range { lo, hi } if !(lo < hi) => Err(Error::Config(format!(
                "range normalization needs lo < hi, got [{lo}, {hi}]"
            ))),
            NormalizationStrategy::OneOfN { off, on } if off == on => Err(Error::Config(
                "one-of-n encoding needs distinct off/on values".into(),
            )),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for NormalizationStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormalizationStrategy::Range { lo, hi } => write!(f, "range[{lo},{hi}]"),
            NormalizationStrategy::Zscore => f.write_str("zscore"),
            NormalizationStrategy::OneOfN { off, on } => write!(f, "one_of_n({off},{on})"),
            NormalizationStrategy::Equilateral => f.write_str("equilateral"),
            NormalizationStrategy::Passthrough => f.write_str("passthrough"),
        }
    }
}

fn check_scalar(stats: &ColumnStats, strategy: &NormalizationStrategy, column: &str) -> Result<()> {
    match strategy {
        NormalizationStrategy::Range { .. } if !(stats.max > stats.min) => {
            Err(Error::ConstantColumn(column.to_string()))
        }
        NormalizationStrategy::Zscore if !(stats.std > 0.0) => {
            Err(Error::ConstantColumn(column.to_string()))
        }
        NormalizationStrategy::Range { .. } | NormalizationStrategy::Zscore => Ok(()),
        other => Err(Error::InvalidArgument(format!(
            "{other} is not a scalar normalization"
        ))),
    }
}

pub fn normalize_value(
    x: f64,
    stats: &ColumnStats,
    strategy: &NormalizationStrategy,
) -> Result<f64> {
    check_scalar(stats, strategy, "value")?;
    Ok(match *strategy {
        NormalizationStrategy::Range { lo, hi } => {
            (x - stats.min) * (hi - lo) / (stats.max - stats.min) + lo
        }
        _ => (x - stats.mean) / stats.std,
    })
}

pub fn denormalize_value(
    v: f64,
    stats: &ColumnStats,
    strategy: &NormalizationStrategy,
) -> Result<f64> {
    check_scalar(stats, strategy, "value")?;
    Ok(match *strategy {
        NormalizationStrategy::Range { lo, hi } => {
            (v - lo) * (stats.max - stats.min) / (hi - lo) + stats.min
        }
        _ => v * stats.std + stats.mean,
    })
}

/// One column of a fitted normalization plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedColumn {
    pub name: String,
    pub source_index: usize,
    pub kind: ColumnType,
    pub role: ColumnRole,
    pub strategy: NormalizationStrategy,
    /// Numeric stats; for ordinal columns these describe the category ranks.
    pub stats: Option<ColumnStats>,
    pub categories: Vec<String>,
}

impl NormalizedColumn {
    pub fn encoded_width(&self) -> usize {
        match self.strategy {
            NormalizationStrategy::OneOfN { .. } => self.categories.len(),
            NormalizationStrategy::Equilateral => self.categories.len().saturating_sub(1),
            _ => 1,
        }
    }

    fn validate(&self) -> Result<()> {
        self.strategy.validate()?;
        let categorical_code = matches!(
            self.strategy,
            NormalizationStrategy::OneOfN { .. } | NormalizationStrategy::Equilateral
        );
        if categorical_code {
            if !self.kind.is_categorical() {
                return Err(Error::Config(format!(
                    "column '{}': {} needs a nominal or ordinal column",
                    self.name, self.strategy
                )));
            }
            if self.categories.len() < 2 {
                return Err(Error::Config(format!(
                    "column '{}': {} needs at least 2 categories",
                    self.name, self.strategy
                )));
            }
        }
        if matches!(
            self.strategy,
            NormalizationStrategy::Range { .. } | NormalizationStrategy::Zscore
        ) {
            let stats = self.stats.as_ref().ok_or_else(|| {
                Error::Config(format!("column '{}' has no statistics", self.name))
            })?;
            check_scalar(stats, &self.strategy, &self.name)?;
        }
        Ok(())
    }

    fn category_index(&self, cell: &str, row: usize) -> Result<usize> {
        let cell = cell.trim();
        self.categories
            .iter()
            .position(|c| c == cell)
            .ok_or_else(|| {
                Error::Schema(format!(
                    "row {row}, column '{}': unknown category '{cell}'",
                    self.name
                ))
            })
    }

    fn encode_cell(&self, cell: &str, row: usize, out: &mut Vec<f64>) -> Result<()> {
        let scalar = if self.kind.is_categorical() {
            let idx = self.category_index(cell, row)?;
            match self.strategy {
                NormalizationStrategy::OneOfN { off, on } => {
                    out.extend(encode_one_of_n(idx, self.categories.len(), off, on)?);
                    return Ok(());
                }
                NormalizationStrategy::Equilateral => {
                    let m = equilateral_matrix(self.categories.len())?;
                    out.extend_from_slice(&m[idx]);
                    return Ok(());
                }
                _ => idx as f64,
            }
        } else {
            parse_real(cell, row, &self.name)?
        };
        out.push(match (&self.strategy, &self.stats) {
            (NormalizationStrategy::Passthrough, _) => scalar,
            (strategy, Some(stats)) => normalize_value(scalar, stats, strategy)?,
            (_, None) => {
                return Err(Error::Config(format!(
                    "column '{}' has no statistics",
                    self.name
                )))
            }
        });
        Ok(())
    }

    fn decode(&self, code: &[f64]) -> Result<DecodedValue> {
        let n = self.categories.len();
        let scalar = |v: f64| -> Result<f64> {
            match (&self.strategy, &self.stats) {
                (NormalizationStrategy::Passthrough, _) => Ok(v),
                (strategy, Some(stats)) => denormalize_value(v, stats, strategy),
                (_, None) => Err(Error::Config(format!(
                    "column '{}' has no statistics",
                    self.name
                ))),
            }
        };
        if !self.kind.is_categorical() {
            return Ok(DecodedValue::Value(scalar(code[0])?));
        }
        let index = match self.strategy {
            NormalizationStrategy::OneOfN { off, on } => {
                // Flip so the "on" direction is always the maximum.
                let oriented: Vec<f64> = code
                    .iter()
                    .map(|x| if on > off { *x } else { -x })
                    .collect();
                decode_one_of_n(&oriented)?
            }
            NormalizationStrategy::Equilateral => nearest_row(&equilateral_matrix(n)?, code)?,
            _ => {
                let rank = scalar(code[0])?.round();
                rank.clamp(0.0, (n.max(1) - 1) as f64) as usize
            }
        };
        Ok(DecodedValue::Label {
            index,
            label: self.categories[index].clone(),
        })
    }

    fn describe_fit(&self) -> String {
        if self.kind.is_categorical() {
            let mut s = format!("categories=[{}]", self.categories.join(","));
            if let (ColumnType::Ordinal, Some(st)) = (self.kind, &self.stats) {
                s.push_str(&format!(" rank_mean={} rank_std={}", st.mean, st.std));
            }
            s
        } else if let Some(st) = &self.stats {
            format!(
                "min={} max={} mean={} std={}",
                st.min, st.max, st.mean, st.std
            )
        } else {
            String::from("unfitted")
        }
    }
}

/// A decoded model output in source units.
#[derive(Debug, Clone, PartialEq)]
pub enum DecodedValue {
    Value(f64),
    Label { index: usize, label: String },
}

impl fmt::Display for DecodedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecodedValue::Value(v) => write!(f, "{v}"),
            DecodedValue::Label { label, .. } => f.write_str(label),
        }
    }
}

/// Fitted per-column strategies; encodes rows and decodes predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationHelper {
    columns: Vec<NormalizedColumn>,
    input_width: usize,
    output_width: usize,
}

impl NormalizationHelper {
    pub fn new(columns: Vec<NormalizedColumn>) -> Result<Self> {
        for c in &columns {
            if c.role != ColumnRole::Ignored {
                c.validate()?;
            }
        }
        let width = |role| {
            columns
                .iter()
                .filter(|c| c.role == role)
                .map(NormalizedColumn::encoded_width)
                .sum()
        };
        let input_width = width(ColumnRole::Input);
        let output_width = width(ColumnRole::Output);
        Ok(Self {
            columns,
            input_width,
            output_width,
        })
    }

    /// Re-runs the construction checks, e.g. after deserialization.
    pub fn revalidate(self) -> Result<Self> {
        let rebuilt = Self::new(self.columns.clone())?;
        if rebuilt != self {
            return Err(Error::Load("normalization widths are inconsistent".into()));
        }
        Ok(rebuilt)
    }

    pub fn columns(&self) -> &[NormalizedColumn] {
        &self.columns
    }

    pub fn input_width(&self) -> usize {
        self.input_width
    }

    pub fn output_width(&self) -> usize {
        self.output_width
    }

    pub fn input_columns(&self) -> impl Iterator<Item = &NormalizedColumn> {
        self.columns.iter().filter(|c| c.role == ColumnRole::Input)
    }

    pub fn output_columns(&self) -> impl Iterator<Item = &NormalizedColumn> {
        self.columns.iter().filter(|c| c.role == ColumnRole::Output)
    }

    /// The single categorical output column, if the plan describes a classifier.
    pub fn class_column(&self) -> Option<&NormalizedColumn> {
        let mut outputs = self.output_columns();
        match (outputs.next(), outputs.next()) {
            (Some(c), None) if c.kind.is_categorical() => Some(c),
            _ => None,
        }
    }

    fn cell<'a>(
        &self,
        cells: &'a [String],
        column: &NormalizedColumn,
        row: usize,
    ) -> Result<&'a str> {
        cells
            .get(column.source_index)
            .map(String::as_str)
            .ok_or_else(|| {
                Error::Schema(format!(
                    "row {row} has {} cells, column '{}' needs index {}",
                    cells.len(),
                    column.name,
                    column.source_index
                ))
            })
    }

    /// Encodes the input columns of a full source row.
    pub fn encode_input(&self, cells: &[String], row: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.input_width);
        for c in self.input_columns() {
            c.encode_cell(self.cell(cells, c, row)?, row, &mut out)?;
        }
        Ok(out)
    }

    /// Encodes input cells given in input-column order (no target present).
    pub fn encode_input_only(&self, cells: &[String], row: usize) -> Result<Vec<f64>> {
        let count = self.input_columns().count();
        if cells.len() != count {
            return Err(Error::Schema(format!(
                "row {row} has {} cells, expected {count} input values",
                cells.len()
            )));
        }
        let mut out = Vec::with_capacity(self.input_width);
        for (c, cell) in self.input_columns().zip(cells) {
            c.encode_cell(cell, row, &mut out)?;
        }
        Ok(out)
    }

    pub fn encode_ideal(&self, cells: &[String], row: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.output_width);
        for c in self.output_columns() {
            c.encode_cell(self.cell(cells, c, row)?, row, &mut out)?;
        }
        Ok(out)
    }

    pub fn encode_row(&self, cells: &[String], row: usize) -> Result<DataPair> {
        Ok(DataPair {
            input: self.encode_input(cells, row)?,
            ideal: self.encode_ideal(cells, row)?,
        })
    }

    /// Decodes a model output vector into one value per output column.
    pub fn decode_output(&self, output: &[f64]) -> Result<Vec<DecodedValue>> {
        if output.len() != self.output_width {
            return Err(Error::DimensionMismatch {
                expected: self.output_width,
                actual: output.len(),
            });
        }
        let mut offset = 0;
        let mut decoded = Vec::new();
        for c in self.output_columns() {
            let w = c.encoded_width();
            decoded.push(c.decode(&output[offset..offset + w])?);
            offset += w;
        }
        Ok(decoded)
    }

    /// Predicted class of a classifier output; `None` for non-classifiers.
    pub fn decode_class(&self, output: &[f64]) -> Result<Option<usize>> {
        let Some(column) = self.class_column() else {
            return Ok(None);
        };
        if output.len() != column.encoded_width() {
            return Err(Error::DimensionMismatch {
                expected: column.encoded_width(),
                actual: output.len(),
            });
        }
        match column.decode(output)? {
            DecodedValue::Label { index, .. } => Ok(Some(index)),
            DecodedValue::Value(_) => Ok(None),
        }
    }

    /// Report line for one column.
    pub fn describe_column(&self, column: &NormalizedColumn) -> String {
        format!(
            "{}: {} {} {} {} width={}",
            column.name,
            column.kind,
            column.role,
            column.strategy,
            column.describe_fit(),
            if column.role == ColumnRole::Ignored {
                0
            } else {
                column.encoded_width()
            }
        )
    }
}

impl fmt::Display for NormalizationHelper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.columns {
            writeln!(f, "{}", self.describe_column(c))?;
        }
        write!(
            f,
            "encoded input width={} output width={}",
            self.input_width, self.output_width
        )
    }
}
