//! Categorical policy head: stable softmax, sampling, argmax, entropy.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Log-softmax with the max subtracted before exponentiation.
pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    logits.iter().map(|z| z - lse).collect()
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    log_softmax(logits).iter().map(|lp| lp.exp()).collect()
}

/// Entropy of the categorical distribution given its log-probabilities.
pub fn entropy_from_log_probs(log_probs: &[f64]) -> f64 {
    -log_probs.iter().map(|lp| lp.exp() * lp).sum::<f64>()
}

/// Samples an action by inverse-CDF over the softmax probabilities; returns
/// `(action, log_prob)`.
pub fn sample_action(logits: &[f64], rng: &mut ChaCha8Rng) -> Result<(usize, f64)> {
    if logits.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite("logits contain a non-finite value".into()));
    }
    let log_probs = log_softmax(logits);
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (a, lp) in log_probs.iter().enumerate() {
        acc += lp.exp();
        if u < acc {
            return Ok((a, *lp));
        }
    }
    // Rounding left u at or beyond the accumulated mass; take the last action.
    let last = log_probs.len() - 1;
    Ok((last, log_probs[last]))
}

/// Deterministic evaluation-time action: argmax over logits, lowest index
/// on ties.
pub fn argmax_action(logits: &[f64]) -> usize {
    let mut best = 0;
    for (i, z) in logits.iter().enumerate().skip(1) {
        if *z > logits[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};

    #[test]
    fn softmax_sums_to_one_even_with_huge_logits() {
        for logits in [
            vec![0.0, 0.0, 0.0],
            vec![1000.0, 999.0, -1000.0],
            vec![-700.0, -701.0],
        ] {
            let p = softmax(&logits);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12, "{logits:?}");
            assert!(p.iter().all(|v| v.is_finite() && *v >= 0.0));
        }
    }

    #[test]
    fn uniform_logits_give_log_n_entropy() {
        let lp = log_softmax(&[2.0, 2.0, 2.0, 2.0, 2.0]);
        let h = entropy_from_log_probs(&lp);
        assert!((h - (5.0f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn near_deterministic_distribution_has_near_zero_entropy() {
        let lp = log_softmax(&[100.0, 0.0, 0.0]);
        assert!(entropy_from_log_probs(&lp) < 1e-12);
    }

    #[test]
    fn sampling_frequencies_match_probabilities() {
        let logits = [1.0, 0.0, -1.0];
        let p = softmax(&logits);
        let mut rng = stream_rng(1, Stream::ActionSampling(0));
        let mut counts = [0usize; 3];
        let n = 200_000;
        for _ in 0..n {
            let (a, lp) = sample_action(&logits, &mut rng).unwrap();
            counts[a] += 1;
            assert!((lp - p[a].ln()).abs() < 1e-12);
        }
        for (i, c) in counts.iter().enumerate() {
            let freq = *c as f64 / n as f64;
            assert!((freq - p[i]).abs() < 0.01, "action {i}: {freq} vs {}", p[i]);
        }
    }

    #[test]
    fn argmax_breaks_ties_toward_lowest_index() {
        assert_eq!(argmax_action(&[0.5, 1.5, 1.5, 0.0]), 1);
        assert_eq!(argmax_action(&[2.0]), 0);
    }

    #[test]
    fn non_finite_logits_are_rejected() {
        let mut rng = stream_rng(1, Stream::ActionSampling(0));
        assert!(sample_action(&[f64::NAN, 0.0], &mut rng).is_err());
    }
}
