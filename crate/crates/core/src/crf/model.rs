use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::aligner::MatchConfig;
use crate::error::{Error, Result};
use crate::label::{BioLabel, NUM_LABELS};

use super::features::{ColumnLexicon, FeatureVocabulary};

/// Fixed score of a transition that would break the BIO scheme.
pub const FORBIDDEN: f64 = -1e4;

pub type LabelRow = [f64; NUM_LABELS];

/// Transition scores `matrix[prev][next]`, plus sequence start and stop scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transitions {
    pub matrix: [LabelRow; NUM_LABELS],
    pub start: LabelRow,
    pub stop: LabelRow,
}

impl Transitions {
    pub fn zeros() -> Transitions {
        Transitions { matrix: [[0.0; NUM_LABELS]; NUM_LABELS], start: [0.0; NUM_LABELS], stop: [0.0; NUM_LABELS] }
    }

    /// Zero everywhere except the forbidden entries.
    pub fn initial() -> Transitions {
        let mut t = Transitions::zeros();
        t.enforce_constraints();
        t
    }

    pub fn enforce_constraints(&mut self) {
        for next in BioLabel::ALL {
            if !BioLabel::transition_allowed(None, next) {
                self.start[next.index()] = FORBIDDEN;
            }
            for prev in BioLabel::ALL {
                if !BioLabel::transition_allowed(Some(prev), next) {
                    self.matrix[prev.index()][next.index()] = FORBIDDEN;
                }
            }
        }
    }

    /// Whether `matrix[prev][next]` is a free parameter.
    pub fn is_free(prev: usize, next: usize) -> bool {
        BioLabel::transition_allowed(Some(BioLabel::from_index(prev)), BioLabel::from_index(next))
    }

    pub fn is_free_start(next: usize) -> bool {
        BioLabel::transition_allowed(None, BioLabel::from_index(next))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub l2_lambda: f64,
    pub learning_rate: f64,
    /// Multiplies the learning rate after every epoch.
    pub lr_decay: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub rng_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { l2_lambda: 1e-4, learning_rate: 0.5, lr_decay: 0.9, epochs: 15, batch_size: 16, rng_seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Model(format!("invalid training config: {what}")));
        if !(self.l2_lambda >= 0.0 && self.l2_lambda.is_finite()) {
            return bad("l2_lambda must be finite and non-negative");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return bad("lr_decay must be in (0, 1]");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        Ok(())
    }
}

/// Settings the model was trained with; stored alongside the weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub train: TrainConfig,
    pub max_ngram: usize,
    pub threshold: f64,
    pub top_k: usize,
}

impl ModelConfig {
    pub fn new(train: TrainConfig, cfg: &MatchConfig) -> ModelConfig {
        ModelConfig { train, max_ngram: cfg.max_ngram, threshold: cfg.threshold, top_k: cfg.top_k }
    }

    pub fn match_config(&self) -> MatchConfig {
        MatchConfig {
            max_ngram: self.max_ngram,
            threshold: self.threshold,
            top_k: self.top_k,
            ..MatchConfig::default()
        }
    }
}

/// Linear-chain CRF over the nine BIO labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrfModel {
    pub feature_vocabulary: FeatureVocabulary,
    /// One row of label scores per feature id.
    pub emission_weights: Vec<LabelRow>,
    pub transition_weights: Transitions,
    pub config: ModelConfig,
    pub label_order: Vec<BioLabel>,
    #[serde(default)]
    pub column_lexicon: ColumnLexicon,
    /// Mean regularized loss before training and after each epoch.
    #[serde(default)]
    pub loss_history: Vec<f64>,
}

impl CrfModel {
    pub fn new(feature_vocabulary: FeatureVocabulary, config: ModelConfig) -> CrfModel {
        CrfModel {
            emission_weights: vec![[0.0; NUM_LABELS]; feature_vocabulary.len()],
            feature_vocabulary,
            transition_weights: Transitions::initial(),
            config,
            label_order: BioLabel::ALL.to_vec(),
            column_lexicon: ColumnLexicon::default(),
            loss_history: Vec::new(),
        }
    }

    pub fn num_features(&self) -> usize {
        self.emission_weights.len()
    }

    /// Sum of squares over the free parameters.
    pub fn l2_norm_sq(&self) -> f64 {
        let mut s: f64 = self.emission_weights.iter().flatten().map(|w| w * w).sum();
        let t = &self.transition_weights;
        for a in 0..NUM_LABELS {
            if Transitions::is_free_start(a) {
                s += t.start[a] * t.start[a];
            }
            s += t.stop[a] * t.stop[a];
            for b in 0..NUM_LABELS {
                if Transitions::is_free(a, b) {
                    s += t.matrix[a][b] * t.matrix[a][b];
                }
            }
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.label_order != BioLabel::ALL {
            return Err(Error::Model("label_order does not match the nine BIO labels".into()));
        }
        if self.emission_weights.len() != self.feature_vocabulary.len() {
            return Err(Error::Model(format!(
                "{} emission rows for {} features",
                self.emission_weights.len(),
                self.feature_vocabulary.len()
            )));
        }
        let t = &self.transition_weights;
        let all =
            self.emission_weights.iter().flatten().chain(t.matrix.iter().flatten()).chain(&t.start).chain(&t.stop);
        if all.into_iter().any(|w| !w.is_finite()) {
            return Err(Error::Model("non-finite weight".into()));
        }
        let mut fixed = t.clone();
        fixed.enforce_constraints();
        if fixed != *t {
            return Err(Error::Model("forbidden transitions are not fixed".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Model(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<CrfModel> {
        let model: CrfModel = serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<CrfModel> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        CrfModel::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forbidden_entries() {
        let t = Transitions::initial();
        let (o, i_col, b_col, i_amb) =
            (BioLabel::O.index(), BioLabel::ICol.index(), BioLabel::BCol.index(), BioLabel::IAmb.index());
        assert_eq!(t.matrix[o][i_col], FORBIDDEN);
        assert_eq!(t.matrix[b_col][i_amb], FORBIDDEN);
        assert_eq!(t.matrix[b_col][i_col], 0.0);
        assert_eq!(t.start[i_col], FORBIDDEN);
        assert_eq!(t.stop[i_col], 0.0);
    }

    #[test]
    fn json_round_trip() {
        let vocab = FeatureVocabulary::from_names(["bias".to_string()]);
        let mut m = CrfModel::new(vocab, ModelConfig::new(TrainConfig::default(), &MatchConfig::default()));
        m.emission_weights[0][3] = 0.1 + 0.2;
        m.transition_weights.stop[2] = -1.0 / 3.0;
        let back = CrfModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_loosened_constraint() {
        let vocab = FeatureVocabulary::from_names(["bias".to_string()]);
        let mut m = CrfModel::new(vocab, ModelConfig::new(TrainConfig::default(), &MatchConfig::default()));
        m.transition_weights.start[BioLabel::IVal.index()] = 0.0;
        assert!(CrfModel::from_json(&m.to_json().unwrap()).is_err());
    }
}
