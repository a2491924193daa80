//! Shared fixtures for the criterion benches.

use ambiq_core::crf::train_on_examples;
use ambiq_core::synth::seed_corpus;
use ambiq_core::{build_dataset, CrfModel, GenConfig, LabeledExample, MatchConfig, TemplateProvider, TrainConfig};

/// Generated dataset over `seeds` synthetic questions at default settings.
pub fn dataset(seeds: usize, rng_seed: u64) -> Vec<LabeledExample> {
    let gen = GenConfig { rng_seed, ..GenConfig::default() };
    build_dataset(&seed_corpus(seeds, rng_seed), &TemplateProvider::default(), &gen, &MatchConfig::default())
        .expect("synthetic corpus builds")
        .0
}

/// A small CRF trained for a few epochs; good enough to time inference.
pub fn small_model() -> CrfModel {
    let tc = TrainConfig { epochs: 3, ..TrainConfig::default() };
    train_on_examples(&dataset(300, 5), &MatchConfig::default(), &tc).expect("training succeeds")
}
