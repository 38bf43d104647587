//! Single-step LSTM/GRU cells and dense layers with hand-derived gradients.
//!
//! Every forward call returns a cache holding exactly what the matching
//! backward call needs. Backward calls take the upstream gradient of a scalar
//! loss and return parameter gradients shaped like the parameters themselves.

mod dense;
mod gru;
mod lstm;

pub use dense::{Activation, DenseBackward, DenseCache, DenseParams};
pub use gru::{GruBackward, GruCache, GruParams};
pub use lstm::{LstmBackward, LstmCache, LstmParams, LstmState, LstmStateGrad};

use crate::error::{Error, Result};
use crate::numerics::Rng;

/// Uniform access to every trainable tensor of a parameter block, in a
/// fixed canonical order. Optimizers and flat (de)serialization use this.
pub trait ParamSet {
    fn tensors(&self) -> Vec<&[f64]>;
    fn tensors_mut(&mut self) -> Vec<&mut [f64]>;

    fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    fn fill_zero(&mut self) {
        for t in self.tensors_mut() {
            t.fill(0.0);
        }
    }
}

/// Inverted-dropout mask: each entry is `0` with probability `rate`, else `1/(1-rate)`.
pub fn dropout_mask(rng: &mut Rng, len: usize, rate: f64) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::InvalidArgument(format!(
            "dropout rate must lie in [0, 1), got {rate}"
        )));
    }
    let keep = 1.0 / (1.0 - rate);
    Ok((0..len)
        .map(|_| if rng.next_f64() < rate { 0.0 } else { keep })
        .collect())
}

pub(crate) fn check_len(op: &'static str, what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::shape(op, format!("{what} has length {got}, expected {want}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dropout_rate_zero_keeps_everything() {
        let m = dropout_mask(&mut Rng::new(1), 100, 0.0).unwrap();
        assert!(m.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn dropout_zero_fraction_matches_rate() {
        let m = dropout_mask(&mut Rng::new(99), 1_000_000, 0.2).unwrap();
        let zeros = m.iter().filter(|&&v| v == 0.0).count() as f64 / 1e6;
        assert!((zeros - 0.2).abs() < 0.002, "zero fraction {zeros}");
        assert!(m.iter().all(|&v| v == 0.0 || v == 1.25));
    }

    #[test]
    fn dropout_is_seeded_and_validates_rate() {
        let a = dropout_mask(&mut Rng::new(5), 64, 0.5).unwrap();
        let b = dropout_mask(&mut Rng::new(5), 64, 0.5).unwrap();
        assert_eq!(a, b);
        assert!(dropout_mask(&mut Rng::new(5), 4, 1.0).is_err());
        assert!(dropout_mask(&mut Rng::new(5), 4, -0.1).is_err());
    }
}
