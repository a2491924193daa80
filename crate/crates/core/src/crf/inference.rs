//! Forward-backward, Viterbi and the log-likelihood gradient.

#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};
use crate::label::{BioLabel, NUM_LABELS};

use super::features::FeatureVector;
use super::model::{CrfModel, LabelRow, Transitions};

const L: usize = NUM_LABELS;

fn log_sum_exp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Per-token label scores `Σ_f value_f · W[f]`.
pub fn emissions(model: &CrfModel, features: &[FeatureVector]) -> Vec<LabelRow> {
    features
        .iter()
        .map(|fv| {
            let mut row = [0.0; L];
            for &(f, v) in &fv.entries {
                if let Some(w) = model.emission_weights.get(f as usize) {
                    for y in 0..L {
                        row[y] += v * w[y];
                    }
                }
            }
            row
        })
        .collect()
}

/// Unnormalized score of one label path, summed left to right.
pub fn path_score(emissions: &[LabelRow], trans: &Transitions, path: &[usize]) -> f64 {
    let Some((&first, rest)) = path.split_first() else {
        return 0.0;
    };
    let mut s = trans.start[first] + emissions[0][first];
    let mut prev = first;
    for (t, &y) in rest.iter().enumerate() {
        s = s + trans.matrix[prev][y] + emissions[t + 1][y];
        prev = y;
    }
    s + trans.stop[prev]
}

/// Log-space forward scores; `alpha[t][y]` covers tokens `0..=t` ending in `y`.
pub fn forward(emissions: &[LabelRow], trans: &Transitions) -> Vec<LabelRow> {
    let mut alpha: Vec<LabelRow> = Vec::with_capacity(emissions.len());
    for (t, e) in emissions.iter().enumerate() {
        let mut row = [0.0; L];
        for y in 0..L {
            row[y] = if t == 0 {
                trans.start[y] + e[y]
            } else {
                let prev = &alpha[t - 1];
                log_sum_exp((0..L).map(|p| prev[p] + trans.matrix[p][y])) + e[y]
            };
        }
        alpha.push(row);
    }
    alpha
}

/// Log-space backward scores; `beta[t][y]` covers tokens after `t` given `y` at `t`.
pub fn backward(emissions: &[LabelRow], trans: &Transitions) -> Vec<LabelRow> {
    let m = emissions.len();
    let mut beta = vec![[0.0; L]; m];
    if m == 0 {
        return beta;
    }
    beta[m - 1] = trans.stop;
    for t in (0..m - 1).rev() {
        for y in 0..L {
            beta[t][y] = log_sum_exp((0..L).map(|n| trans.matrix[y][n] + emissions[t + 1][n] + beta[t + 1][n]));
        }
    }
    beta
}

/// Log partition function over all label paths.
pub fn log_partition(emissions: &[LabelRow], trans: &Transitions) -> f64 {
    let alpha = forward(emissions, trans);
    match alpha.last() {
        Some(last) => log_sum_exp((0..L).map(|y| last[y] + trans.stop[y])),
        None => 0.0,
    }
}

/// Posterior marginals of one sequence.
#[derive(Debug, Clone)]
pub struct Marginals {
    pub log_z: f64,
    pub unary: Vec<LabelRow>,
    /// `pairwise[t][a][b]` = P(y_{t-1} = a, y_t = b); entry 0 is unused.
    pub pairwise: Vec<[LabelRow; L]>,
}

pub fn marginals(emissions: &[LabelRow], trans: &Transitions) -> Marginals {
    let m = emissions.len();
    let alpha = forward(emissions, trans);
    let beta = backward(emissions, trans);
    let log_z = match alpha.last() {
        Some(last) => log_sum_exp((0..L).map(|y| last[y] + trans.stop[y])),
        None => 0.0,
    };
    let mut unary = vec![[0.0; L]; m];
    let mut pairwise = vec![[[0.0; L]; L]; m];
    for t in 0..m {
        for y in 0..L {
            unary[t][y] = (alpha[t][y] + beta[t][y] - log_z).exp();
            if t > 0 {
                for p in 0..L {
                    pairwise[t][p][y] =
                        (alpha[t - 1][p] + trans.matrix[p][y] + emissions[t][y] + beta[t][y] - log_z).exp();
                }
            }
        }
    }
    Marginals { log_z, unary, pairwise }
}

/// Best label path and its score. Ties go to the label earliest in enum order.
pub fn viterbi(emissions: &[LabelRow], trans: &Transitions) -> (Vec<usize>, f64) {
    let m = emissions.len();
    if m == 0 {
        return (Vec::new(), 0.0);
    }
    let mut delta: Vec<LabelRow> = Vec::with_capacity(m);
    let mut back: Vec<[usize; L]> = Vec::with_capacity(m);
    let mut first = [0.0; L];
    for y in 0..L {
        first[y] = trans.start[y] + emissions[0][y];
    }
    delta.push(first);
    back.push([0; L]);
    for t in 1..m {
        let mut row = [0.0; L];
        let mut ptr = [0; L];
        for y in 0..L {
            let mut best = 0;
            let mut best_score = delta[t - 1][0] + trans.matrix[0][y];
            for p in 1..L {
                let s = delta[t - 1][p] + trans.matrix[p][y];
                if s > best_score {
                    best = p;
                    best_score = s;
                }
            }
            row[y] = best_score + emissions[t][y];
            ptr[y] = best;
        }
        delta.push(row);
        back.push(ptr);
    }
    let mut last = 0;
    let mut best_score = delta[m - 1][0] + trans.stop[0];
    for y in 1..L {
        let s = delta[m - 1][y] + trans.stop[y];
        if s > best_score {
            last = y;
            best_score = s;
        }
    }
    let mut path = vec![last; m];
    for t in (1..m).rev() {
        path[t - 1] = back[t][path[t]];
    }
    (path, best_score)
}

pub fn viterbi_decode(model: &CrfModel, features: &[FeatureVector]) -> Vec<BioLabel> {
    let (path, _) = viterbi(&emissions(model, features), &model.transition_weights);
    path.into_iter().map(BioLabel::from_index).collect()
}

/// Gradient with the same shape as the model's free parameters; entries for
/// forbidden transitions stay zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub emission: Vec<LabelRow>,
    pub transitions: Transitions,
}

impl Gradient {
    pub fn zeros(num_features: usize) -> Gradient {
        Gradient { emission: vec![[0.0; L]; num_features], transitions: Transitions::zeros() }
    }

    pub fn add_scaled(&mut self, other: &Gradient, scale: f64) {
        for (a, b) in self.emission.iter_mut().zip(&other.emission) {
            for y in 0..L {
                a[y] += scale * b[y];
            }
        }
        let (a, b) = (&mut self.transitions, &other.transitions);
        for p in 0..L {
            a.start[p] += scale * b.start[p];
            a.stop[p] += scale * b.stop[p];
            for y in 0..L {
                a.matrix[p][y] += scale * b.matrix[p][y];
            }
        }
    }
}

/// Sparse per-sequence gradient of the data term; emission rows may repeat a feature id.
#[derive(Debug, Clone)]
pub(crate) struct SparseGradient {
    pub emission: Vec<(u32, LabelRow)>,
    pub transitions: Transitions,
    pub log_likelihood: f64,
}

pub(crate) fn data_gradient(model: &CrfModel, features: &[FeatureVector], gold: &[BioLabel]) -> Result<SparseGradient> {
    if features.len() != gold.len() {
        return Err(Error::LengthMismatch { left: features.len(), right: gold.len() });
    }
    if features.is_empty() {
        return Err(Error::EmptyInput("sequence has no tokens"));
    }
    let trans = &model.transition_weights;
    let em = emissions(model, features);
    let gold: Vec<usize> = gold.iter().map(|l| l.index()).collect();
    let marg = marginals(&em, trans);
    let log_likelihood = path_score(&em, trans, &gold) - marg.log_z;

    let mut emission = Vec::new();
    for (t, fv) in features.iter().enumerate() {
        let mut diff = [0.0; L];
        for y in 0..L {
            diff[y] = -marg.unary[t][y];
        }
        diff[gold[t]] += 1.0;
        for &(f, v) in &fv.entries {
            if (f as usize) < model.num_features() {
                let mut row = [0.0; L];
                for y in 0..L {
                    row[y] = v * diff[y];
                }
                emission.push((f, row));
            }
        }
    }
    let m = gold.len();
    let mut g = Transitions::zeros();
    for y in 0..L {
        if Transitions::is_free_start(y) {
            g.start[y] = f64::from(u8::from(gold[0] == y)) - marg.unary[0][y];
        }
        g.stop[y] = f64::from(u8::from(gold[m - 1] == y)) - marg.unary[m - 1][y];
    }
    for t in 1..m {
        for p in 0..L {
            for y in 0..L {
                if Transitions::is_free(p, y) {
                    g.matrix[p][y] -= marg.pairwise[t][p][y];
                }
            }
        }
        g.matrix[gold[t - 1]][gold[t]] += 1.0;
    }
    // The gold path may itself cross a forbidden transition; that entry is not a parameter.
    for p in 0..L {
        for y in 0..L {
            if !Transitions::is_free(p, y) {
                g.matrix[p][y] = 0.0;
            }
        }
    }
    Ok(SparseGradient { emission, transitions: g, log_likelihood })
}

/// `log p(gold | x) − λ‖w‖²` and its gradient with respect to every free parameter.
pub fn log_likelihood_and_grad(
    model: &CrfModel,
    features: &[FeatureVector],
    gold: &[BioLabel],
    l2_lambda: f64,
) -> Result<(f64, Gradient)> {
    let sparse = data_gradient(model, features, gold)?;
    let mut grad = Gradient::zeros(model.num_features());
    for (f, row) in &sparse.emission {
        let dst = &mut grad.emission[*f as usize];
        for y in 0..L {
            dst[y] += row[y];
        }
    }
    grad.transitions = sparse.transitions;
    let w = &model.transition_weights;
    for (g, w) in grad.emission.iter_mut().zip(&model.emission_weights) {
        for y in 0..L {
            g[y] -= 2.0 * l2_lambda * w[y];
        }
    }
    let g = &mut grad.transitions;
    for a in 0..L {
        if Transitions::is_free_start(a) {
            g.start[a] -= 2.0 * l2_lambda * w.start[a];
        }
        g.stop[a] -= 2.0 * l2_lambda * w.stop[a];
        for b in 0..L {
            if Transitions::is_free(a, b) {
                g.matrix[a][b] -= 2.0 * l2_lambda * w.matrix[a][b];
            }
        }
    }
    Ok((sparse.log_likelihood - l2_lambda * model.l2_norm_sq(), grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_stable() {
        assert!((log_sum_exp([1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-9);
        assert_eq!(log_sum_exp([f64::NEG_INFINITY]), f64::NEG_INFINITY);
    }

    #[test]
    fn single_token_marginals_sum_to_one() {
        let em = vec![[0.3, -1.0, 2.0, 0.0, 0.5, 0.0, 1.0, 0.0, 0.2]];
        let m = marginals(&em, &Transitions::initial());
        let total: f64 = m.unary[0].iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(m.unary[0][BioLabel::ICol.index()] < 1e-100);
    }

    #[test]
    fn viterbi_ties_prefer_first_label() {
        let em = vec![[0.0; L]; 3];
        let (path, _) = viterbi(&em, &Transitions::initial());
        assert_eq!(path, vec![0, 0, 0]);
    }
}
