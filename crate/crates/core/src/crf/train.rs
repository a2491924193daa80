use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::aligner::MatchConfig;
use crate::error::{Error, Result};
use crate::example::LabeledExample;
use crate::label::{BioLabel, NUM_LABELS};
use crate::schema::TableSchema;
use crate::token::Token;

use super::features::{featurize_with, ColumnLexicon, FeatureVector, FeatureVocabulary, TokenFeatures};
use super::inference::{data_gradient, emissions, log_partition, path_score, viterbi_decode};
use super::model::{CrfModel, ModelConfig, TrainConfig, Transitions};

/// One featurized, labeled question.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSequence {
    pub features: Vec<FeatureVector>,
    pub labels: Vec<BioLabel>,
}

/// Mean negative log-likelihood plus `λ‖w‖²`.
pub fn regularized_loss(model: &CrfModel, data: &[TrainingSequence], l2_lambda: f64) -> f64 {
    let nll: Vec<f64> = data
        .par_iter()
        .map(|seq| {
            let em = emissions(model, &seq.features);
            let gold: Vec<usize> = seq.labels.iter().map(|l| l.index()).collect();
            log_partition(&em, &model.transition_weights) - path_score(&em, &model.transition_weights, &gold)
        })
        .collect();
    nll.iter().sum::<f64>() / data.len().max(1) as f64 + l2_lambda * model.l2_norm_sq()
}

/// Mini-batch gradient ascent on the log-likelihood with a proximal L2 step,
/// `w ← (w + η·g) / (1 + 2ηλ)`. Deterministic for a given seed.
pub fn train(data: &[TrainingSequence], vocabulary: FeatureVocabulary, config: ModelConfig) -> Result<CrfModel> {
    let tc = config.train.clone();
    tc.validate()?;
    for seq in data {
        if seq.features.len() != seq.labels.len() {
            return Err(Error::LengthMismatch { left: seq.features.len(), right: seq.labels.len() });
        }
    }
    let data: Vec<&TrainingSequence> = data.iter().filter(|s| !s.labels.is_empty()).collect();
    if data.is_empty() {
        return Err(Error::EmptyInput("no training sequences"));
    }
    let owned: Vec<TrainingSequence> = data.iter().map(|s| (*s).clone()).collect();
    let mut model = CrfModel::new(vocabulary, config);
    model.loss_history.push(regularized_loss(&model, &owned, tc.l2_lambda));

    let mut rng = ChaCha8Rng::seed_from_u64(tc.rng_seed);
    let mut order: Vec<usize> = (0..owned.len()).collect();
    let mut lr = tc.learning_rate;
    let mut dense = vec![[0.0; NUM_LABELS]; model.num_features()];
    for _ in 0..tc.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(tc.batch_size) {
            let grads = batch
                .par_iter()
                .map(|&i| data_gradient(&model, &owned[i].features, &owned[i].labels))
                .collect::<Result<Vec<_>>>()?;
            let scale = lr / batch.len() as f64;
            let shrink = 1.0 / (1.0 + 2.0 * lr * tc.l2_lambda);
            for row in dense.iter_mut() {
                *row = [0.0; NUM_LABELS];
            }
            let mut trans = Transitions::zeros();
            for g in &grads {
                for (f, row) in &g.emission {
                    let dst = &mut dense[*f as usize];
                    for y in 0..NUM_LABELS {
                        dst[y] += row[y];
                    }
                }
                for a in 0..NUM_LABELS {
                    trans.start[a] += g.transitions.start[a];
                    trans.stop[a] += g.transitions.stop[a];
                    for b in 0..NUM_LABELS {
                        trans.matrix[a][b] += g.transitions.matrix[a][b];
                    }
                }
            }
            for (w, g) in model.emission_weights.iter_mut().zip(&dense) {
                for y in 0..NUM_LABELS {
                    w[y] = (w[y] + scale * g[y]) * shrink;
                }
            }
            let w = &mut model.transition_weights;
            for a in 0..NUM_LABELS {
                w.start[a] = (w.start[a] + scale * trans.start[a]) * shrink;
                w.stop[a] = (w.stop[a] + scale * trans.stop[a]) * shrink;
                for b in 0..NUM_LABELS {
                    w.matrix[a][b] = (w.matrix[a][b] + scale * trans.matrix[a][b]) * shrink;
                }
            }
            w.enforce_constraints();
        }
        model.loss_history.push(regularized_loss(&model, &owned, tc.l2_lambda));
        lr *= tc.lr_decay;
    }
    Ok(model)
}

pub fn featurize_examples(
    examples: &[LabeledExample],
    cfg: &MatchConfig,
    lexicon: &ColumnLexicon,
) -> Vec<Vec<TokenFeatures>> {
    examples.par_iter().map(|ex| featurize_with(&ex.tokens, &ex.schema, cfg, lexicon)).collect()
}

/// Featurizes labeled examples, builds the vocabulary and column lexicon from them and trains.
pub fn train_on_examples(examples: &[LabeledExample], cfg: &MatchConfig, tc: &TrainConfig) -> Result<CrfModel> {
    let lexicon = ColumnLexicon::from_schemas(examples.iter().map(|ex| &ex.schema), cfg);
    let named = featurize_examples(examples, cfg, &lexicon);
    let vocabulary = FeatureVocabulary::build(named.iter().map(Vec::as_slice));
    let data: Vec<TrainingSequence> = named
        .iter()
        .zip(examples)
        .map(|(f, ex)| TrainingSequence { features: vocabulary.encode(f), labels: ex.labels.clone() })
        .collect();
    let mut model = train(&data, vocabulary, ModelConfig::new(tc.clone(), cfg))?;
    model.column_lexicon = lexicon;
    Ok(model)
}

/// Viterbi labels for a question's tokens under `model`.
pub fn predict(model: &CrfModel, tokens: &[Token], schema: &TableSchema, cfg: &MatchConfig) -> Vec<BioLabel> {
    let features = model.feature_vocabulary.encode(&featurize_with(tokens, schema, cfg, &model.column_lexicon));
    viterbi_decode(model, &features)
}
