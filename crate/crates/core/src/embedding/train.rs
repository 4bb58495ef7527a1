use std::sync::atomic::{AtomicU64, Ordering};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::pairs::for_each_pair;
use super::sgns::{dot, step_in_place, target_coefficient, target_loss, StepScratch};
use super::{build_vocabulary, EmbeddingError, SgnsModel, TrainingConfig, TrainingPair, Vocabulary, Window, WordVectors};

const NOISE_POWER: f64 = 0.75;
const MIN_LR_FRACTION: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub vocabulary: Vocabulary,
    pub model: SgnsModel,
    /// Mean loss per training pair for each epoch.
    pub epoch_losses: Vec<f64>,
}

impl TrainedModel {
    pub fn word_vectors(&self) -> WordVectors {
        WordVectors {
            words: self.vocabulary.words().map(str::to_string).collect(),
            vectors: self.model.input.clone(),
        }
    }
}

/// Trains skip-gram embeddings on pre-normalized sentences.
///
/// The vocabulary is built from all tokens, then each epoch walks the
/// sentences in order: out-of-vocabulary tokens are dropped, frequent
/// words are subsampled, pairs are generated from the remaining tokens and
/// every pair gets `negative_samples` noise words drawn from the unigram
/// distribution raised to the 3/4 power. The learning rate decays linearly
/// with the number of center tokens processed.
///
/// With `threads == 1` the result is a pure function of the corpus and the
/// config.
pub fn train<S: AsRef<str>>(sentences: &[Vec<S>], config: &TrainingConfig) -> Result<TrainedModel, EmbeddingError> {
    config.validate()?;
    let vocabulary = build_vocabulary(sentences.iter().flatten(), config)?;
    let encoded: Vec<Vec<usize>> = sentences
        .iter()
        .map(|s| s.iter().filter_map(|t| vocabulary.get(t.as_ref())).collect())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut model = SgnsModel::initialize(vocabulary.len(), config.dims, &mut rng);
    let noise = WeightedIndex::new(
        vocabulary.entries().iter().map(|e| (e.count as f64).powf(NOISE_POWER)),
    )
    .map_err(|e| EmbeddingError::InvalidConfig(format!("noise distribution: {e}")))?;
    let keep: Vec<f64> = match config.downsample_threshold {
        Some(t) => (0..vocabulary.len()).map(|i| vocabulary.keep_probability(i, t)).collect(),
        None => vec![1.0; vocabulary.len()],
    };
    let schedule = Schedule {
        initial: config.learning_rate,
        total: (config.epochs as u64 * encoded.iter().map(|s| s.len() as u64).sum::<u64>()).max(1),
    };

    let epoch_losses = if config.threads <= 1 {
        train_serial(&mut model, &encoded, config, &noise, &keep, &schedule, &mut rng)?
    } else {
        train_parallel(&mut model, &encoded, config, &noise, &keep, &schedule)?
    };
    Ok(TrainedModel { vocabulary, model, epoch_losses })
}

struct Schedule {
    initial: f64,
    total: u64,
}

impl Schedule {
    fn rate(&self, processed: u64) -> f64 {
        let remaining = 1.0 - processed as f64 / self.total as f64;
        self.initial * remaining.max(MIN_LR_FRACTION)
    }
}

fn subsample<R: Rng>(sentence: &[usize], keep: &[f64], rng: &mut R, out: &mut Vec<usize>) {
    out.clear();
    out.extend(sentence.iter().copied().filter(|&w| keep[w] >= 1.0 || rng.random::<f64>() < keep[w]));
}

fn draw_negatives<R: Rng>(noise: &WeightedIndex<f64>, context: usize, count: usize, rng: &mut R, out: &mut Vec<usize>) {
    out.clear();
    for _ in 0..count {
        let n = noise.sample(rng);
        if n != context {
            out.push(n);
        }
    }
}

fn train_serial(
    model: &mut SgnsModel,
    sentences: &[Vec<usize>],
    config: &TrainingConfig,
    noise: &WeightedIndex<f64>,
    keep: &[f64],
    schedule: &Schedule,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>, EmbeddingError> {
    let window = config.window();
    let mut scratch = StepScratch::default();
    let mut kept = Vec::new();
    let mut pairs = Vec::new();
    let mut negatives = Vec::new();
    let mut processed = 0u64;
    let mut losses = Vec::with_capacity(config.epochs);

    for _ in 0..config.epochs {
        let (mut loss_sum, mut pair_count) = (0.0, 0u64);
        for sentence in sentences {
            let lr = schedule.rate(processed);
            subsample(sentence, keep, rng, &mut kept);
            pairs.clear();
            for_each_pair(&kept, window, rng, |p| pairs.push(p));
            for &pair in &pairs {
                draw_negatives(noise, pair.context, config.negative_samples, rng, &mut negatives);
                loss_sum += step_in_place(model, pair, &negatives, lr, &mut scratch)?;
                pair_count += 1;
            }
            processed += sentence.len() as u64;
        }
        losses.push(if pair_count == 0 { 0.0 } else { loss_sum / pair_count as f64 });
    }
    Ok(losses)
}

/// Matrix of `f64` stored as bits in atomics so several threads can update
/// it without locks. Individual reads and writes are atomic; read-modify-write
/// sequences are not, and concurrent updates to a row may be lost.
struct SharedMatrix {
    cols: usize,
    cells: Vec<AtomicU64>,
}

impl SharedMatrix {
    fn from_slice(cols: usize, values: &[f64]) -> Self {
        SharedMatrix { cols, cells: values.iter().map(|v| AtomicU64::new(v.to_bits())).collect() }
    }

    fn load_row(&self, row: usize, out: &mut [f64]) {
        let cells = &self.cells[row * self.cols..(row + 1) * self.cols];
        for (o, c) in out.iter_mut().zip(cells) {
            *o = f64::from_bits(c.load(Ordering::Relaxed));
        }
    }

    fn add_to_row(&self, row: usize, scale: f64, delta: &[f64]) {
        let cells = &self.cells[row * self.cols..(row + 1) * self.cols];
        for (c, d) in cells.iter().zip(delta) {
            let v = f64::from_bits(c.load(Ordering::Relaxed)) + scale * d;
            c.store(v.to_bits(), Ordering::Relaxed);
        }
    }

    fn write_into(&self, out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.cells) {
            *o = f64::from_bits(c.load(Ordering::Relaxed));
        }
    }
}

fn train_parallel(
    model: &mut SgnsModel,
    sentences: &[Vec<usize>],
    config: &TrainingConfig,
    noise: &WeightedIndex<f64>,
    keep: &[f64],
    schedule: &Schedule,
) -> Result<Vec<f64>, EmbeddingError> {
    let dims = model.dims();
    let input = SharedMatrix::from_slice(dims, model.input.as_slice());
    let output = SharedMatrix::from_slice(dims, model.output.as_slice());
    let threads = config.threads;
    let window = config.window();
    let words_per_epoch: u64 = sentences.iter().map(|s| s.len() as u64).sum();
    let mut losses = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let results: Vec<Result<(f64, u64), EmbeddingError>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads)
                .map(|worker| {
                    let (input, output) = (&input, &output);
                    scope.spawn(move || {
                        let seed = config.rng_seed ^ ((epoch as u64) << 32 | worker as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        let mut worker_state = HogwildWorker::new(dims);
                        let mut processed = epoch as u64 * words_per_epoch;
                        let (mut loss_sum, mut pair_count) = (0.0, 0u64);
                        for sentence in sentences.iter().skip(worker).step_by(threads) {
                            let lr = schedule.rate(processed);
                            let (loss, count) = worker_state.sentence(
                                input, output, sentence, window, config.negative_samples, noise, keep, lr, &mut rng,
                            )?;
                            loss_sum += loss;
                            pair_count += count;
                            // other workers advance the schedule at the same pace
                            processed += sentence.len() as u64 * threads as u64;
                        }
                        Ok((loss_sum, pair_count))
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("training worker panicked")).collect()
        });
        let (mut loss_sum, mut pair_count) = (0.0, 0u64);
        for r in results {
            let (l, c) = r?;
            loss_sum += l;
            pair_count += c;
        }
        losses.push(if pair_count == 0 { 0.0 } else { loss_sum / pair_count as f64 });
    }
    input.write_into(model.input.as_mut_slice());
    output.write_into(model.output.as_mut_slice());
    Ok(losses)
}

struct HogwildWorker {
    center: Vec<f64>,
    target: Vec<f64>,
    update: Vec<f64>,
    coefficients: Vec<f64>,
    kept: Vec<usize>,
    pairs: Vec<TrainingPair>,
    negatives: Vec<usize>,
}

impl HogwildWorker {
    fn new(dims: usize) -> Self {
        HogwildWorker {
            center: vec![0.0; dims],
            target: vec![0.0; dims],
            update: vec![0.0; dims],
            coefficients: Vec::new(),
            kept: Vec::new(),
            pairs: Vec::new(),
            negatives: Vec::new(),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn sentence(
        &mut self,
        input: &SharedMatrix,
        output: &SharedMatrix,
        sentence: &[usize],
        window: Window,
        negative_samples: usize,
        noise: &WeightedIndex<f64>,
        keep: &[f64],
        lr: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<(f64, u64), EmbeddingError> {
        subsample(sentence, keep, rng, &mut self.kept);
        self.pairs.clear();
        let pairs = &mut self.pairs;
        for_each_pair(&self.kept, window, rng, |p| pairs.push(p));
        let mut loss_sum = 0.0;
        for i in 0..self.pairs.len() {
            let pair = self.pairs[i];
            draw_negatives(noise, pair.context, negative_samples, rng, &mut self.negatives);
            input.load_row(pair.center, &mut self.center);
            self.coefficients.clear();
            self.update.iter_mut().for_each(|u| *u = 0.0);
            let mut loss = 0.0;
            for (t, is_context) in std::iter::once((pair.context, true)).chain(self.negatives.iter().map(|&n| (n, false))) {
                output.load_row(t, &mut self.target);
                let score = dot(&self.center, &self.target);
                loss += target_loss(score, is_context);
                let g = target_coefficient(score, is_context);
                self.coefficients.push(g);
                for (u, o) in self.update.iter_mut().zip(&self.target) {
                    *u += g * o;
                }
            }
            if !loss.is_finite() {
                return Err(EmbeddingError::Divergence { loss });
            }
            for (t, &g) in std::iter::once(pair.context).chain(self.negatives.iter().copied()).zip(&self.coefficients) {
                output.add_to_row(t, lr * g, &self.center);
            }
            input.add_to_row(pair.center, lr, &self.update);
            loss_sum += loss;
        }
        Ok((loss_sum, self.pairs.len() as u64))
    }
}
