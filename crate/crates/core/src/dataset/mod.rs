//! Typed columns over raw CSV rows: definition, analysis, normalization
//! and the splitting utilities used for validation.

mod csv;
mod encoding;
mod normalize;
mod split;

use serde::{Deserialize, Serialize};

pub use self::csv::{parse_real, parse_records, CsvTable};
pub use encoding::{decode_one_of_n, encode_one_of_n, equilateral_decode, equilateral_matrix};
pub use normalize::{
    denormalize_value, normalize_value, ColumnRole, ColumnStats, ColumnType, DecodedValue,
    NormalizationHelper, NormalizationStrategy, NormalizedColumn,
};
pub use split::{holdback_count, kfold, split_holdback, window_time_series, Fold};

use crate::error::{Error, Result};

/// An encoded input vector with its expected output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataPair {
    pub input: Vec<f64>,
    pub ideal: Vec<f64>,
}

impl DataPair {
    pub fn new(input: Vec<f64>, ideal: Vec<f64>) -> Self {
        Self { input, ideal }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnDefinition {
    pub name: String,
    pub source_index: usize,
    pub kind: ColumnType,
    /// Distinct values of a nominal/ordinal column; filled by analysis unless
    /// an ordinal order was given up front.
    pub categories: Vec<String>,
    pub role: ColumnRole,
}

/// Raw rows plus column definitions and, after analysis, per-column stats.
#[derive(Debug, Clone, Default)]
pub struct VersatileDataset {
    rows: Vec<Vec<String>>,
    columns: Vec<ColumnDefinition>,
    stats: Option<Vec<Option<ColumnStats>>>,
}

impl VersatileDataset {
    pub fn new(rows: Vec<Vec<String>>) -> Self {
        Self {
            rows,
            columns: Vec::new(),
            stats: None,
        }
    }

    pub fn from_table(table: CsvTable) -> Self {
        Self::new(table.rows)
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn columns(&self) -> &[ColumnDefinition] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&ColumnDefinition> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn is_analyzed(&self) -> bool {
        self.stats.is_some()
    }

    /// Numeric stats of column `i` (by definition order); `None` for nominal
    /// columns or before analysis.
    pub fn stats(&self, i: usize) -> Option<&ColumnStats> {
        self.stats.as_ref()?.get(i)?.as_ref()
    }

    /// Registers a column as an input. Any change invalidates earlier analysis.
    pub fn define_source_column(
        &mut self,
        name: &str,
        index: usize,
        kind: ColumnType,
    ) -> Result<ColumnDefinition> {
        if self.columns.iter().any(|c| c.source_index == index) {
            return Err(Error::Config(format!(
                "source index {index} is already defined"
            )));
        }
        if self.columns.iter().any(|c| c.name == name) {
            return Err(Error::Config(format!(
                "column name '{name}' is already defined"
            )));
        }
        let def = ColumnDefinition {
            name: name.to_string(),
            source_index: index,
            kind,
            categories: Vec::new(),
            role: ColumnRole::Input,
        };
        self.columns.push(def.clone());
        self.stats = None;
        Ok(def)
    }

    /// Fixes the rank order of an ordinal column instead of first appearance.
    pub fn define_ordinal_order(&mut self, name: &str, order: &[&str]) -> Result<()> {
        let col = self.column_mut(name)?;
        if col.kind != ColumnType::Ordinal {
            return Err(Error::Config(format!("column '{name}' is not ordinal")));
        }
        col.categories = order.iter().map(|s| s.to_string()).collect();
        self.stats = None;
        Ok(())
    }

    fn column_mut(&mut self, name: &str) -> Result<&mut ColumnDefinition> {
        self.columns
            .iter_mut()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::Config(format!("column '{name}' is not defined")))
    }

    /// Makes `column` the only output; every other non-ignored column becomes an input.
    pub fn define_single_output(&mut self, column: &ColumnDefinition) -> Result<()> {
        self.define_single_output_by_name(&column.name)
    }

    pub fn define_single_output_by_name(&mut self, name: &str) -> Result<()> {
        self.column_mut(name)?;
        for c in &mut self.columns {
            if c.name == name {
                c.role = ColumnRole::Output;
            } else if c.role != ColumnRole::Ignored {
                c.role = ColumnRole::Input;
            }
        }
        Ok(())
    }

    pub fn set_role(&mut self, name: &str, role: ColumnRole) -> Result<()> {
        self.column_mut(name)?.role = role;
        Ok(())
    }

    fn cell<'a>(&'a self, row: usize, col: &ColumnDefinition) -> Result<&'a str> {
        let cell = self.rows[row]
            .get(col.source_index)
            .map(|s| s.trim())
            .unwrap_or("");
        if cell.is_empty() {
            return Err(Error::Parse {
                row: row + 1,
                column: col.name.clone(),
                message: "missing value".into(),
            });
        }
        Ok(cell)
    }

    /// Computes min/max/mean/std for continuous columns and the category list
    /// (first-appearance order) for nominal and ordinal ones. Ordinal columns
    /// additionally get stats over their ranks.
    pub fn analyze(&mut self) -> Result<()> {
        if self.rows.is_empty() {
            return Err(Error::Empty("dataset has no rows".into()));
        }
        if self.columns.is_empty() {
            return Err(Error::Config("no columns defined".into()));
        }
        let mut all_stats = Vec::with_capacity(self.columns.len());
        let mut all_categories = Vec::with_capacity(self.columns.len());
        for col in &self.columns {
            let mut values = Vec::with_capacity(self.rows.len());
            let mut categories = col.categories.clone();
            let preset = !categories.is_empty();
            for r in 0..self.rows.len() {
                let cell = self.cell(r, col)?;
                match col.kind {
                    ColumnType::Continuous => values.push(parse_real(cell, r + 1, &col.name)?),
                    _ => {
                        let rank = match categories.iter().position(|c| c == cell) {
                            Some(i) => i,
                            None if preset => {
                                return Err(Error::Parse {
                                    row: r + 1,
                                    column: col.name.clone(),
                                    message: format!("'{cell}' is not a declared category"),
                                })
                            }
                            None => {
                                categories.push(cell.to_string());
                                categories.len() - 1
                            }
                        };
                        values.push(rank as f64);
                    }
                }
            }
            let stats = match col.kind {
                ColumnType::Nominal => None,
                _ => Some(ColumnStats::from_values(&values)?),
            };
            all_stats.push(stats);
            all_categories.push(categories);
        }
        for (col, cats) in self.columns.iter_mut().zip(all_categories) {
            col.categories = cats;
        }
        self.stats = Some(all_stats);
        Ok(())
    }

    /// Builds the fitted helper for one strategy per defined column.
    pub fn build_helper(
        &self,
        strategies: &[NormalizationStrategy],
    ) -> Result<NormalizationHelper> {
        let stats = self
            .stats
            .as_ref()
            .ok_or_else(|| Error::StageOrder("analyze must run before normalization".into()))?;
        if strategies.len() != self.columns.len() {
            return Err(Error::DimensionMismatch {
                expected: self.columns.len(),
                actual: strategies.len(),
            });
        }
        NormalizationHelper::new(
            self.columns
                .iter()
                .zip(strategies)
                .zip(stats)
                .map(|((c, s), st)| NormalizedColumn {
                    name: c.name.clone(),
                    source_index: c.source_index,
                    kind: c.kind,
                    role: c.role,
                    strategy: *s,
                    stats: *st,
                    categories: c.categories.clone(),
                })
                .collect(),
        )
    }

    /// Encodes every row with `helper`.
    pub fn encode(&self, helper: &NormalizationHelper) -> Result<Vec<DataPair>> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| helper.encode_row(row, i + 1))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(data: &[&[&str]]) -> Vec<Vec<String>> {
        data.iter()
            .map(|r| r.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    #[test]
    fn define_columns_and_roles() {
        let mut ds = VersatileDataset::new(rows(&[&["1", "a"]]));
        let x = ds
            .define_source_column("sepal-length", 0, ColumnType::Continuous)
            .unwrap();
        assert_eq!(x.role, ColumnRole::Input);
        assert_eq!(x.kind, ColumnType::Continuous);
        let species = ds
            .define_source_column("species", 1, ColumnType::Nominal)
            .unwrap();
        assert_eq!(species.kind, ColumnType::Nominal);
        assert!(ds
            .define_source_column("dup", 0, ColumnType::Continuous)
            .is_err());

        ds.define_single_output(&species).unwrap();
        assert_eq!(ds.column("species").unwrap().role, ColumnRole::Output);
        ds.define_single_output(&x).unwrap();
        assert_eq!(ds.column("sepal-length").unwrap().role, ColumnRole::Output);
        assert_eq!(ds.column("species").unwrap().role, ColumnRole::Input);

        let ghost = ColumnDefinition {
            name: "ghost".into(),
            ..x
        };
        assert!(ds.define_single_output(&ghost).is_err());
    }

    #[test]
    fn analyze_continuous_and_nominal() {
        let mut ds = VersatileDataset::new(rows(&[&["1", "b"], &["2", "a"], &["3", "b"]]));
        ds.define_source_column("x", 0, ColumnType::Continuous)
            .unwrap();
        ds.define_source_column("c", 1, ColumnType::Nominal)
            .unwrap();
        ds.analyze().unwrap();
        let s = ds.stats(0).unwrap();
        assert_eq!((s.min, s.max, s.mean), (1.0, 3.0, 2.0));
        assert!((s.std - 0.816496580927726).abs() < 1e-12);
        assert_eq!(ds.column("c").unwrap().categories, vec!["b", "a"]);
        assert!(ds.stats(1).is_none());
    }

    #[test]
    fn analyze_errors() {
        let mut empty = VersatileDataset::new(vec![]);
        empty
            .define_source_column("x", 0, ColumnType::Continuous)
            .unwrap();
        assert!(matches!(empty.analyze(), Err(Error::Empty(_))));

        let mut bad = VersatileDataset::new(rows(&[&["1"], &["abc"]]));
        bad.define_source_column("x", 0, ColumnType::Continuous)
            .unwrap();
        match bad.analyze() {
            Err(Error::Parse { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "x");
            }
            other => panic!("unexpected {other:?}"),
        }

        let mut missing = VersatileDataset::new(rows(&[&["1", "a"], &["2"]]));
        missing
            .define_source_column("x", 0, ColumnType::Continuous)
            .unwrap();
        missing
            .define_source_column("c", 1, ColumnType::Nominal)
            .unwrap();
        assert!(matches!(
            missing.analyze(),
            Err(Error::Parse { row: 2, .. })
        ));
    }

    #[test]
    fn ordinal_ranks() {
        let mut ds = VersatileDataset::new(rows(&[&["high"], &["low"], &["mid"]]));
        ds.define_source_column("level", 0, ColumnType::Ordinal)
            .unwrap();
        ds.define_ordinal_order("level", &["low", "mid", "high"])
            .unwrap();
        ds.analyze().unwrap();
        let s = ds.stats(0).unwrap();
        assert_eq!((s.min, s.max, s.mean), (0.0, 2.0, 1.0));
        let helper = ds
            .build_helper(&[NormalizationStrategy::Range { lo: 0.0, hi: 1.0 }])
            .unwrap();
        let pairs = ds.encode(&helper).unwrap();
        let encoded: Vec<f64> = pairs.iter().map(|p| p.input[0]).collect();
        assert_eq!(encoded, vec![1.0, 0.0, 0.5]);
    }

    #[test]
    fn build_helper_requires_analysis() {
        let mut ds = VersatileDataset::new(rows(&[&["1"], &["2"]]));
        ds.define_source_column("x", 0, ColumnType::Continuous)
            .unwrap();
        assert!(matches!(
            ds.build_helper(&[NormalizationStrategy::Zscore]),
            Err(Error::StageOrder(_))
        ));
    }
}
