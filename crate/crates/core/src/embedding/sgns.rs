//! Skip-gram negative-sampling objective and its gradient step.
//!
//! For a center word with input vector `w`, a true context word with output
//! vector `c` and noise words with output vectors `n_k`:
//!
//! ```text
//! loss = -ln σ(w·c) - Σ_k ln σ(-w·n_k)
//! ```

use rand::Rng;

use super::{EmbeddingError, Matrix, TrainingPair};

/// Input (word) and output (context) weight matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SgnsModel {
    pub input: Matrix,
    pub output: Matrix,
}

impl SgnsModel {
    /// Input vectors uniform in `[-0.5/dims, 0.5/dims)`, output vectors zero.
    pub fn initialize<R: Rng + ?Sized>(words: usize, dims: usize, rng: &mut R) -> Self {
        let bound = 0.5 / dims as f64;
        let data = (0..words * dims).map(|_| rng.random_range(-bound..bound)).collect();
        SgnsModel { input: Matrix::from_vec(words, dims, data), output: Matrix::zeros(words, dims) }
    }

    pub fn dims(&self) -> usize {
        self.input.cols()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `ln(1 + e^x)` without overflow.
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Loss contribution of one output word: `-ln σ(x)` for the true context,
/// `-ln σ(-x)` for noise.
pub(crate) fn target_loss(score: f64, is_context: bool) -> f64 {
    if is_context {
        softplus(-score)
    } else {
        softplus(score)
    }
}

/// `label - σ(score)`: the negative gradient of the target loss with
/// respect to the score.
pub(crate) fn target_coefficient(score: f64, is_context: bool) -> f64 {
    let label = if is_context { 1.0 } else { 0.0 };
    label - sigmoid(score)
}

fn targets(pair: TrainingPair, negatives: &[usize]) -> impl Iterator<Item = (usize, bool)> + '_ {
    std::iter::once((pair.context, true)).chain(negatives.iter().map(|&n| (n, false)))
}

pub fn sgns_loss(model: &SgnsModel, pair: TrainingPair, negatives: &[usize]) -> f64 {
    let w = model.input.row(pair.center);
    targets(pair, negatives)
        .map(|(t, is_context)| target_loss(dot(w, model.output.row(t)), is_context))
        .sum()
}

/// Gradient of [`sgns_loss`]. Output gradients are listed per target
/// occurrence (context first, then negatives in order), so a word drawn
/// twice appears twice.
#[derive(Debug, Clone, PartialEq)]
pub struct SgnsGradients {
    pub center: Vec<f64>,
    pub outputs: Vec<(usize, Vec<f64>)>,
}

pub fn sgns_gradients(model: &SgnsModel, pair: TrainingPair, negatives: &[usize]) -> (f64, SgnsGradients) {
    let w = model.input.row(pair.center);
    let mut center = vec![0.0; model.dims()];
    let mut outputs = Vec::with_capacity(negatives.len() + 1);
    let mut loss = 0.0;
    for (t, is_context) in targets(pair, negatives) {
        let out = model.output.row(t);
        let score = dot(w, out);
        loss += target_loss(score, is_context);
        let g = target_coefficient(score, is_context);
        for (c, o) in center.iter_mut().zip(out) {
            *c -= g * o;
        }
        outputs.push((t, w.iter().map(|x| -g * x).collect()));
    }
    (loss, SgnsGradients { center, outputs })
}

/// Reusable buffers for [`step_in_place`].
#[derive(Debug, Default)]
pub(crate) struct StepScratch {
    coefficients: Vec<f64>,
    center_update: Vec<f64>,
}

/// One gradient-descent step on a (center, context) pair and its noise
/// words. All scores are computed from the pre-step parameters, so the
/// update equals `-lr` times the full gradient even when a word repeats.
/// Returns the pre-step loss. Leaves the model untouched on divergence.
pub(crate) fn step_in_place(
    model: &mut SgnsModel,
    pair: TrainingPair,
    negatives: &[usize],
    lr: f64,
    scratch: &mut StepScratch,
) -> Result<f64, EmbeddingError> {
    let dims = model.dims();
    let StepScratch { coefficients, center_update } = scratch;
    coefficients.clear();
    center_update.clear();
    center_update.resize(dims, 0.0);

    let mut loss = 0.0;
    {
        let w = model.input.row(pair.center);
        for (t, is_context) in targets(pair, negatives) {
            let score = dot(w, model.output.row(t));
            loss += target_loss(score, is_context);
            coefficients.push(target_coefficient(score, is_context));
        }
    }
    if !loss.is_finite() {
        return Err(EmbeddingError::Divergence { loss });
    }
    for ((t, _), &g) in targets(pair, negatives).zip(coefficients.iter()) {
        for (u, o) in center_update.iter_mut().zip(model.output.row(t)) {
            *u += g * o;
        }
    }
    // input and output live in different matrices, so the center row can
    // be borrowed while output rows are mutated
    let SgnsModel { input, output } = model;
    let w = input.row_mut(pair.center);
    for ((t, _), &g) in targets(pair, negatives).zip(coefficients.iter()) {
        let scale = lr * g;
        for (o, x) in output.row_mut(t).iter_mut().zip(w.iter()) {
            *o += scale * x;
        }
    }
    for (x, u) in w.iter_mut().zip(center_update.iter()) {
        *x += lr * u;
    }
    Ok(loss)
}

/// Applies one SGD step and returns the loss before the update.
pub fn sgns_step(
    pair: TrainingPair,
    negatives: &[usize],
    model: &mut SgnsModel,
    lr: f64,
) -> Result<f64, EmbeddingError> {
    step_in_place(model, pair, negatives, lr, &mut StepScratch::default())
}
