//! Linear-chain CRF tagger.

pub mod features;
pub mod inference;
pub mod model;
pub mod train;

pub use features::{featurize, featurize_with, ColumnLexicon, FeatureVector, FeatureVocabulary, TokenFeatures};
pub use inference::{log_likelihood_and_grad, viterbi_decode, Gradient};
pub use model::{CrfModel, ModelConfig, TrainConfig, Transitions, FORBIDDEN};
pub use train::{predict, train, train_on_examples, TrainingSequence};
