use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TrainingPair {
    pub center: usize,
    pub context: usize,
}

/// Context radius for pair generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    /// Radius drawn uniformly from `1..=max` for every center position.
    Dynamic(usize),
    /// Constant radius.
    Fixed(usize),
}

/// Emits `(doc[i], doc[j])` for every `j != i` within the radius of `i`.
///
/// `document` holds vocabulary indices only; out-of-vocabulary tokens are
/// dropped by the caller before windowing. Pairs come out grouped by
/// center position in document order.
pub fn generate_pairs<R: Rng + ?Sized>(document: &[usize], window: Window, rng: &mut R) -> Vec<TrainingPair> {
    let mut pairs = Vec::new();
    for_each_pair(document, window, rng, |pair| pairs.push(pair));
    pairs
}

pub(crate) fn for_each_pair<R, F>(document: &[usize], window: Window, rng: &mut R, mut emit: F)
where
    R: Rng + ?Sized,
    F: FnMut(TrainingPair),
{
    let n = document.len();
    for i in 0..n {
        let radius = match window {
            Window::Dynamic(max) => rng.random_range(1..=max.max(1)),
            Window::Fixed(b) => b,
        };
        let lo = i.saturating_sub(radius);
        let hi = (i + radius).min(n.saturating_sub(1));
        for j in lo..=hi {
            if j != i {
                emit(TrainingPair { center: document[i], context: document[j] });
            }
        }
    }
}
