//! Brute-force CRF oracles shared by the test targets.

#![allow(dead_code)]

use ambiq_core::crf::inference::{log_partition, viterbi};
use ambiq_core::crf::{
    log_likelihood_and_grad, CrfModel, FeatureVector, FeatureVocabulary, ModelConfig, TrainConfig, FORBIDDEN,
};
use ambiq_core::label::BioLabel;
use ambiq_core::MatchConfig;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const L: usize = 9;

pub struct Instance {
    pub model: CrfModel,
    pub features: Vec<FeatureVector>,
    pub gold: Vec<BioLabel>,
}

/// Random weights over 4 features, random free transitions, length in `1..=max_len`.
pub fn random_instance(rng: &mut ChaCha8Rng, max_len: usize) -> Instance {
    let num_features = 4;
    let vocab = FeatureVocabulary::from_names((0..num_features).map(|i| format!("f{i}")));
    let mut model = CrfModel::new(vocab, ModelConfig::new(TrainConfig::default(), &MatchConfig::default()));
    for row in &mut model.emission_weights {
        for w in row.iter_mut() {
            *w = rng.gen_range(-2.0..2.0);
        }
    }
    let t = &mut model.transition_weights;
    for a in 0..L {
        t.start[a] = rng.gen_range(-2.0..2.0);
        t.stop[a] = rng.gen_range(-2.0..2.0);
        for b in 0..L {
            t.matrix[a][b] = rng.gen_range(-2.0..2.0);
        }
    }
    t.enforce_constraints();
    let m = rng.gen_range(1..=max_len);
    let features = (0..m)
        .map(|_| {
            let mut entries = Vec::new();
            for f in 0..num_features as u32 {
                if rng.gen_bool(0.6) {
                    entries.push((f, rng.gen_range(0.5..1.5)));
                }
            }
            FeatureVector::new(entries)
        })
        .collect();
    // Well-formed gold: an inside label must continue its own kind, otherwise it becomes a begin.
    let mut gold_idx: Vec<usize> = (0..m).map(|_| rng.gen_range(0..L)).collect();
    for t in 0..m {
        let y = gold_idx[t];
        if y % 2 == 1 && y < 8 && (t == 0 || (gold_idx[t - 1] != y && gold_idx[t - 1] != y - 1)) {
            gold_idx[t] = y - 1;
        }
    }
    let gold = gold_idx.into_iter().map(BioLabel::from_index).collect();
    Instance { model, features, gold }
}

pub fn ref_emissions(inst: &Instance) -> Vec<[f64; L]> {
    inst.features
        .iter()
        .map(|fv| {
            let mut row = [0.0; L];
            for &(f, v) in &fv.entries {
                for (y, r) in row.iter_mut().enumerate() {
                    *r += v * inst.model.emission_weights[f as usize][y];
                }
            }
            row
        })
        .collect()
}

pub fn all_paths(m: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..L.pow(m as u32)).map(move |mut code| {
        let mut p = vec![0; m];
        for slot in p.iter_mut().rev() {
            *slot = code % L;
            code /= L;
        }
        p
    })
}

pub fn ref_path_score(inst: &Instance, em: &[[f64; L]], path: &[usize]) -> f64 {
    let t = &inst.model.transition_weights;
    let mut s = t.start[path[0]] + em[0][path[0]];
    for i in 1..path.len() {
        s = s + t.matrix[path[i - 1]][path[i]] + em[i][path[i]];
    }
    s + t.stop[path[path.len() - 1]]
}

pub fn ref_log_z(inst: &Instance, em: &[[f64; L]]) -> f64 {
    let scores: Vec<f64> = all_paths(em.len()).map(|p| ref_path_score(inst, em, &p)).collect();
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln()
}

/// Viterbi score equals the brute-force maximum exactly; logZ within 1e-8 relative.
pub fn check_decode(inst: &Instance) -> Result<(), String> {
    let em = ref_emissions(inst);
    let (path, score) = viterbi(&em, &inst.model.transition_weights);
    let best = all_paths(em.len()).map(|p| ref_path_score(inst, &em, &p)).fold(f64::NEG_INFINITY, f64::max);
    if score != best || ref_path_score(inst, &em, &path) != best {
        return Err(format!("viterbi {score} vs brute force {best}"));
    }
    let (z, rz) = (log_partition(&em, &inst.model.transition_weights), ref_log_z(inst, &em));
    if (z - rz).abs() > 1e-8 * rz.abs().max(f64::MIN_POSITIVE) {
        return Err(format!("logZ {z} vs brute force {rz}"));
    }
    Ok(())
}

/// Every free parameter's analytic gradient against central differences, 1e-4 relative.
pub fn check_gradient(inst: &Instance, lambda: f64) -> Result<(), String> {
    let (_, grad) =
        log_likelihood_and_grad(&inst.model, &inst.features, &inst.gold, lambda).map_err(|e| e.to_string())?;
    let f = |m: &CrfModel| log_likelihood_and_grad(m, &inst.features, &inst.gold, lambda).unwrap().0;
    let h = 1e-5;
    let check = |what: &str, analytic: f64, perturb: &dyn Fn(&mut CrfModel, f64)| -> Result<(), String> {
        let mut plus = inst.model.clone();
        perturb(&mut plus, h);
        let mut minus = inst.model.clone();
        perturb(&mut minus, -h);
        let numeric = (f(&plus) - f(&minus)) / (2.0 * h);
        let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-3);
        if rel > 1e-4 {
            return Err(format!("{what}: analytic {analytic} numeric {numeric}"));
        }
        Ok(())
    };
    for feat in 0..inst.model.num_features() {
        for y in 0..L {
            check("emission", grad.emission[feat][y], &|m, d| m.emission_weights[feat][y] += d)?;
        }
    }
    let t = &inst.model.transition_weights;
    for a in 0..L {
        check("stop", grad.transitions.stop[a], &|m, d| m.transition_weights.stop[a] += d)?;
        if t.start[a] != FORBIDDEN {
            check("start", grad.transitions.start[a], &|m, d| m.transition_weights.start[a] += d)?;
        } else if grad.transitions.start[a] != 0.0 {
            return Err("gradient on a forbidden start".into());
        }
        for b in 0..L {
            if t.matrix[a][b] != FORBIDDEN {
                check("transition", grad.transitions.matrix[a][b], &|m, d| m.transition_weights.matrix[a][b] += d)?;
            } else if grad.transitions.matrix[a][b] != 0.0 {
                return Err("gradient on a forbidden transition".into());
            }
        }
    }
    Ok(())
}

// ---------- metric fixture ----------

use ambiq_core::aligner::Annotation;
use ambiq_core::label::LabelKind;
use ambiq_core::{Concept, GroundingPair, ScoredConcept, TokenSpan};

fn col(name: &str) -> ScoredConcept {
    ScoredConcept { concept: Concept::column(name), score: 0.9 }
}

fn val(text: &str, column: &str) -> ScoredConcept {
    ScoredConcept { concept: Concept::value(text, column), score: 0.9 }
}

fn pair(start: usize, end: usize, candidates: Vec<ScoredConcept>) -> GroundingPair {
    GroundingPair { span: TokenSpan::new(start, end), candidates }
}

fn ann(labels: &str, groundings: Vec<GroundingPair>) -> Annotation {
    let labels = labels.split_whitespace().map(|l| l.parse().unwrap()).collect();
    Annotation { labels, groundings }
}

/// Ten predicted/gold pairs with planted label and grounding errors.
pub fn metric_fixture() -> (Vec<Annotation>, Vec<Annotation>) {
    let ratings = || vec![col("IMDB Rating"), col("Rotten Tomatoes Rating"), col("Content Rating")];
    let gold = vec![
        ann("O B-COL O B-COL", vec![pair(1, 1, vec![col("Sales")]), pair(3, 3, vec![col("Region")])]),
        ann("O O O B-AMB O B-VAL", vec![pair(3, 3, ratings()), pair(5, 5, vec![val("Avatar", "Title")])]),
        ann("O O O B-UNK I-UNK O O O B-COL O O O O", vec![pair(8, 8, vec![col("Price")])]),
        ann("B-COL I-COL O", vec![pair(0, 1, vec![col("Release Year")])]),
        ann("O B-VAL I-VAL O", vec![pair(1, 2, vec![val("The Godfather", "Title")])]),
        ann("O B-AMB O", vec![pair(1, 1, vec![col("Our Score"), col("Opponent Score")])]),
        ann("B-COL O B-VAL", vec![pair(0, 0, vec![col("Brand")]), pair(2, 2, vec![val("Apple", "Brand")])]),
        ann("O O O", vec![]),
        ann("O B-COL I-COL O", vec![pair(1, 2, vec![col("IMDB Rating")])]),
        ann("O B-COL O B-AMB I-AMB", vec![pair(1, 1, vec![col("Storage")]), pair(3, 4, ratings())]),
    ];
    let pred = vec![
        // identical
        gold[0].clone(),
        // AMB grounded to two of the three columns
        ann("O O O B-AMB O B-VAL", vec![pair(3, 3, ratings()[..2].to_vec()), pair(5, 5, vec![val("Avatar", "Title")])]),
        // UNK span cut short by one token
        ann("O O O B-UNK O O O O B-COL O O O O", vec![pair(8, 8, vec![col("Price")])]),
        // right span, wrong column
        ann("B-COL I-COL O", vec![pair(0, 1, vec![col("Year")])]),
        // value read as a column
        ann("O B-COL I-COL O", vec![pair(1, 2, vec![col("Title")])]),
        // same AMB set in another order
        ann("O B-AMB O", vec![pair(1, 1, vec![col("Opponent Score"), col("Our Score")])]),
        // value missed
        ann("B-COL O O", vec![pair(0, 0, vec![col("Brand")])]),
        // spurious UNK
        ann("O B-UNK O", vec![]),
        // narrower span, same column
        ann("O B-COL O O", vec![pair(1, 1, vec![col("IMDB Rating")])]),
        // wrong column on COL, AMB right
        ann("O B-COL O B-AMB I-AMB", vec![pair(1, 1, vec![col("Price")]), pair(3, 4, ratings())]),
    ];
    (pred, gold)
}

/// Hand counts `(kind, correct, total)` for the fixture.
pub const FIXTURE_LABELS: [(LabelKind, usize, usize); 5] = [
    (LabelKind::Col, 8, 9),
    (LabelKind::Val, 1, 4),
    (LabelKind::Amb, 4, 4),
    (LabelKind::Unk, 1, 2),
    (LabelKind::O, 28, 29),
];
pub const FIXTURE_GROUNDING: [(LabelKind, usize, usize); 3] =
    [(LabelKind::Col, 5, 7), (LabelKind::Val, 1, 3), (LabelKind::Amb, 2, 3)];
pub const FIXTURE_SPANS_EXACT: [(LabelKind, usize, usize); 4] =
    [(LabelKind::Col, 6, 7), (LabelKind::Val, 1, 3), (LabelKind::Amb, 3, 3), (LabelKind::Unk, 0, 1)];
