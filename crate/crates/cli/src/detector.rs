use std::path::Path;

use ambiq_core::pipeline::heuristic_then_explain;
use ambiq_core::{detect_then_explain, CrfModel, DetectionResult, MatchConfig, TableSchema};

use crate::error::{CliError, CliResult};

/// The tagger behind `detect`, `eval` and the service.
#[derive(Debug, Clone)]
pub enum Detector {
    Crf(Box<CrfModel>),
    Heuristic,
}

impl Detector {
    pub fn load(model: Option<&Path>) -> CliResult<Detector> {
        Ok(match model {
            Some(path) => Detector::Crf(Box::new(CrfModel::load(path)?)),
            None => Detector::Heuristic,
        })
    }

    /// Matching settings the model was trained with, or the defaults.
    pub fn base_config(&self) -> MatchConfig {
        match self {
            Detector::Crf(model) => model.config.match_config(),
            Detector::Heuristic => MatchConfig::default(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Detector::Crf(_) => "crf",
            Detector::Heuristic => "heuristic",
        }
    }

    pub fn detect(
        &self,
        question: &str,
        schema: &TableSchema,
        cfg: &MatchConfig,
    ) -> ambiq_core::Result<DetectionResult> {
        match self {
            Detector::Crf(model) => detect_then_explain(question, schema, model, cfg),
            Detector::Heuristic => heuristic_then_explain(question, schema, cfg),
        }
    }
}

/// Reads and validates one table schema JSON file.
pub fn load_table(path: &Path) -> CliResult<TableSchema> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let schema: TableSchema = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: invalid table schema: {e}", path.display())))?;
    schema.validate().map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    Ok(schema)
}

/// Every `*.json` file in `dir`, in file-name order. Duplicate table ids are an error.
pub fn load_tables_dir(dir: &Path) -> CliResult<Vec<TableSchema>> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|x| x == "json") {
            paths.push(path);
        }
    }
    paths.sort();
    let mut tables: Vec<TableSchema> = Vec::with_capacity(paths.len());
    for path in paths {
        let schema = load_table(&path)?;
        if tables.iter().any(|t| t.table_id == schema.table_id) {
            return Err(CliError::Validation(format!("{}: duplicate table_id {:?}", path.display(), schema.table_id)));
        }
        tables.push(schema);
    }
    Ok(tables)
}
