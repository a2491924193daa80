//! JSONL dataset files: one example per line.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ValidationError};
use crate::example::{GroundingPair, LabeledExample};
use crate::label::{BioLabel, Category};
use crate::schema::TableSchema;
use crate::sql::parse_sql;
use crate::token::tokenize;

/// Wire form of one dataset line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExampleRecord {
    pub question: String,
    pub table_id: String,
    pub columns: Vec<String>,
    #[serde(default)]
    pub cells: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub sql: Option<String>,
    #[serde(default)]
    pub labels: Option<Vec<BioLabel>>,
    #[serde(default)]
    pub groundings: Vec<GroundingPair>,
    #[serde(default)]
    pub category: Option<Category>,
}

impl From<&LabeledExample> for ExampleRecord {
    fn from(ex: &LabeledExample) -> Self {
        ExampleRecord {
            question: ex.question.clone(),
            table_id: ex.schema.table_id.clone(),
            columns: ex.schema.columns.clone(),
            cells: ex.schema.cells.clone(),
            sql: ex.sql.as_ref().map(|q| q.to_string()),
            labels: Some(ex.labels.clone()),
            groundings: ex.groundings.clone(),
            category: Some(ex.category),
        }
    }
}

impl ExampleRecord {
    fn schema(&self) -> TableSchema {
        TableSchema { table_id: self.table_id.clone(), columns: self.columns.clone(), cells: self.cells.clone() }
    }

    /// Strict conversion: labels and category must be present and consistent.
    pub fn into_example(self, line: usize) -> Result<LabeledExample> {
        let invalid = |source| Error::InvalidRecord { line, source };
        let sql = match &self.sql {
            Some(text) => Some(parse_sql(text).map_err(|source| Error::InvalidSql { line, source })?),
            None => None,
        };
        let schema = self.schema();
        let labels = self.labels.ok_or(invalid(ValidationError::MissingField("labels")))?;
        let category = self.category.ok_or(invalid(ValidationError::MissingField("category")))?;
        let tokens = tokenize(&self.question);
        let example = LabeledExample {
            question: self.question,
            tokens,
            schema,
            sql,
            labels,
            groundings: self.groundings,
            category,
        };
        example.validate().map_err(invalid)?;
        Ok(example)
    }
}

fn parse_line(line: &str, number: usize) -> Result<ExampleRecord> {
    serde_json::from_str(line).map_err(|e| Error::Malformed { line: number, message: e.to_string() })
}

pub fn read_dataset(reader: impl BufRead) -> Result<Vec<LabeledExample>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let number = i + 1;
        let line = line.map_err(|e| Error::Malformed { line: number, message: e.to_string() })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_line(&line, number)?.into_example(number)?);
    }
    Ok(out)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<LabeledExample>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(BufReader::new(file))
}

pub fn write_dataset(examples: &[LabeledExample], mut writer: impl Write) -> std::io::Result<()> {
    for ex in examples {
        let line = serde_json::to_string(&ExampleRecord::from(ex)).map_err(std::io::Error::other)?;
        writer.write_all(line.as_bytes())?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub fn save_dataset(examples: &[LabeledExample], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset(examples, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

/// Answerable seed questions. Labels in the file are ignored; lines whose SQL falls
/// outside the supported fragment are skipped and counted.
#[derive(Debug, Clone, Default)]
pub struct SeedCorpus {
    pub examples: Vec<LabeledExample>,
    pub skipped_unsupported_sql: usize,
    pub skipped_missing_sql: usize,
}

pub fn read_seed_corpus(reader: impl BufRead) -> Result<SeedCorpus> {
    let mut corpus = SeedCorpus::default();
    for (i, line) in reader.lines().enumerate() {
        let number = i + 1;
        let line = line.map_err(|e| Error::Malformed { line: number, message: e.to_string() })?;
        if line.trim().is_empty() {
            continue;
        }
        let record = parse_line(&line, number)?;
        let Some(text) = &record.sql else {
            corpus.skipped_missing_sql += 1;
            continue;
        };
        let Ok(sql) = parse_sql(text) else {
            corpus.skipped_unsupported_sql += 1;
            continue;
        };
        let example = LabeledExample::unlabeled(record.question.clone(), record.schema(), Some(sql))
            .map_err(|source| Error::InvalidRecord { line: number, source })?;
        corpus.examples.push(example);
    }
    Ok(corpus)
}

pub fn load_seed_corpus(path: impl AsRef<Path>) -> Result<SeedCorpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_seed_corpus(BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::BioLabel::*;
    use crate::sql::parse_sql;

    fn sample() -> LabeledExample {
        let schema = TableSchema::new("t", vec!["Sales".into(), "Region".into()]).unwrap();
        let sql = parse_sql("SELECT Sales FROM t WHERE Region = 'West'").unwrap();
        LabeledExample::new("show sales by region", schema, Some(sql), vec![O, BCol, O, BCol], vec![]).unwrap()
    }

    #[test]
    fn empty_input_is_empty_list() {
        assert!(read_dataset("".as_bytes()).unwrap().is_empty());
        let mut buf = Vec::new();
        write_dataset(&[], &mut buf).unwrap();
        assert!(buf.is_empty());
    }

    #[test]
    fn one_example_one_line() {
        let mut buf = Vec::new();
        write_dataset(&[sample()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1);
        let back = read_dataset(text.as_bytes()).unwrap();
        assert_eq!(back, vec![sample()]);
    }

    #[test]
    fn malformed_line_reports_number() {
        let mut buf = Vec::new();
        write_dataset(&[sample()], &mut buf).unwrap();
        buf.extend_from_slice(b"{not json\n");
        match read_dataset(buf.as_slice()) {
            Err(Error::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn length_mismatch_is_validation_error() {
        let line = r#"{"question":"show sales","table_id":"t","columns":["Sales"],"cells":{},"sql":null,"labels":["O"],"groundings":[],"category":"answerable"}"#;
        let err = read_dataset(line.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::InvalidRecord { line: 1, .. }));
        assert!(err.to_string().contains("label/token length mismatch"));
    }

    #[test]
    fn category_redundancy_is_checked() {
        let line = r#"{"question":"show sales","table_id":"t","columns":["Sales"],"labels":["O","B-UNK"],"category":"answerable"}"#;
        let err = read_dataset(line.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("category mismatch"));
    }

    #[test]
    fn seed_corpus_skips_unsupported_sql() {
        let text = concat!(
            r#"{"question":"show sales","table_id":"t","columns":["Sales"],"sql":"SELECT Sales FROM t"}"#,
            "\n",
            r#"{"question":"show sales","table_id":"t","columns":["Sales"],"sql":"SELECT Sales FROM t WHERE a = 1 OR b = 2"}"#,
            "\n",
            r#"{"question":"show sales","table_id":"t","columns":["Sales"]}"#,
        );
        let corpus = read_seed_corpus(text.as_bytes()).unwrap();
        assert_eq!(corpus.examples.len(), 1);
        assert_eq!(corpus.skipped_unsupported_sql, 1);
        assert_eq!(corpus.skipped_missing_sql, 1);
    }
}
