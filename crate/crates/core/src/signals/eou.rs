//! Peak-threshold end-of-utterance detection.

use crate::Scalar;

/// Index of the chunk completing `k` consecutive chunks whose peak
/// absolute amplitude is at most `amp_threshold`.
pub fn detect_end_of_utterance<S, C>(chunks: impl IntoIterator<Item = C>, amp_threshold: S, k: usize) -> Option<usize>
where
    S: Scalar,
    C: AsRef<[S]>,
{
    let mut detector = EouDetector::new(amp_threshold, k);
    chunks.into_iter().position(|c| detector.push(c.as_ref()))
}

/// Streaming detector; [`EouDetector::push`] reports whether recording
/// should stop after this chunk.
#[derive(Clone, Debug)]
pub struct EouDetector<S> {
    amp_threshold: S,
    k: usize,
    quiet: usize,
}

impl<S: Scalar> EouDetector<S> {
    /// Defaults: 0.05 amplitude, 25 chunks.
    pub fn with_defaults() -> Self {
        Self::new(S::of(0.05), 25)
    }

    pub fn new(amp_threshold: S, k: usize) -> Self {
        EouDetector { amp_threshold, k: k.max(1), quiet: 0 }
    }

    pub fn push(&mut self, chunk: &[S]) -> bool {
        let peak = chunk.iter().fold(S::zero(), |m, x| m.max(x.abs()));
        if peak <= self.amp_threshold {
            self.quiet += 1;
        } else {
            self.quiet = 0;
        }
        self.quiet >= self.k
    }

    pub fn reset(&mut self) {
        self.quiet = 0;
    }
}
