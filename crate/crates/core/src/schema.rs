use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::ValidationError;

/// Lowercased, whitespace-collapsed form used for column identity.
pub fn normalize_name(name: &str) -> String {
    name.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// A table: ordered column names plus optional distinct cell values per column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableSchema {
    pub table_id: String,
    pub columns: Vec<String>,
    #[serde(default)]
    pub cells: BTreeMap<String, Vec<String>>,
}

impl TableSchema {
    pub fn new(table_id: impl Into<String>, columns: Vec<String>) -> Result<Self, ValidationError> {
        let schema = TableSchema { table_id: table_id.into(), columns, cells: BTreeMap::new() };
        schema.validate()?;
        Ok(schema)
    }

    pub fn with_cells(mut self, column: &str, values: &[&str]) -> Result<Self, ValidationError> {
        self.cells.insert(column.to_string(), values.iter().map(|v| v.to_string()).collect());
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        let mut seen = HashSet::new();
        for column in &self.columns {
            let key = normalize_name(column);
            if key.is_empty() {
                return Err(ValidationError::EmptyColumn { table_id: self.table_id.clone() });
            }
            if !seen.insert(key) {
                return Err(ValidationError::DuplicateColumn {
                    table_id: self.table_id.clone(),
                    column: column.clone(),
                });
            }
        }
        for key in self.cells.keys() {
            if !self.columns.contains(key) {
                return Err(ValidationError::UnknownCellColumn { column: key.clone() });
            }
        }
        Ok(())
    }

    /// Index of `name` under case/whitespace-insensitive comparison.
    pub fn column_index(&self, name: &str) -> Option<usize> {
        let key = normalize_name(name);
        self.columns.iter().position(|c| normalize_name(c) == key)
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.column_index(name).is_some()
    }

    /// Every column concept followed by every cell-value concept, both in column order.
    pub fn concepts(&self) -> Vec<Concept> {
        let mut out: Vec<Concept> = self.columns.iter().map(|c| Concept::column(c)).collect();
        for column in &self.columns {
            if let Some(values) = self.cells.get(column) {
                out.extend(values.iter().map(|v| Concept::value(v, column)));
            }
        }
        out
    }

    /// Copy without `column` and its cells.
    pub fn without_column(&self, column: &str) -> TableSchema {
        let mut out = self.clone();
        if let Some(i) = self.column_index(column) {
            let removed = out.columns.remove(i);
            out.cells.remove(&removed);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConceptKind {
    Column,
    Value,
}

/// A grounding target: a column name, or a cell value under its column.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Concept {
    pub kind: ConceptKind,
    pub text: String,
    pub column: String,
}

impl Concept {
    pub fn column(name: &str) -> Concept {
        Concept { kind: ConceptKind::Column, text: name.to_string(), column: name.to_string() }
    }

    pub fn value(text: &str, column: &str) -> Concept {
        Concept { kind: ConceptKind::Value, text: text.to_string(), column: column.to_string() }
    }
}
