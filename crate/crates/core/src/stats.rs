//! Binomial interval estimates for Monte Carlo rates.

use serde::Serialize;
use statrs::distribution::{Beta, ContinuousCDF, Normal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinomialEstimate {
    pub successes: u64,
    pub trials: u64,
    pub rate: f64,
    pub lower: f64,
    pub upper: f64,
    pub confidence: f64,
}

impl BinomialEstimate {
    pub fn contains(&self, p: f64) -> bool {
        self.lower <= p && p <= self.upper
    }
}

/// Exact (Clopper–Pearson) two-sided interval.
pub fn clopper_pearson(successes: u64, trials: u64, confidence: f64) -> BinomialEstimate {
    assert!(successes <= trials, "successes exceed trials");
    assert!(confidence > 0.0 && confidence < 1.0);
    let alpha = 1.0 - confidence;
    let (k, n) = (successes as f64, trials as f64);
    let lower = if successes == 0 {
        0.0
    } else {
        Beta::new(k, n - k + 1.0).unwrap().inverse_cdf(alpha / 2.0)
    };
    let upper = if successes == trials {
        1.0
    } else {
        Beta::new(k + 1.0, n - k)
            .unwrap()
            .inverse_cdf(1.0 - alpha / 2.0)
    };
    BinomialEstimate {
        successes,
        trials,
        rate: if trials == 0 { 0.0 } else { k / n },
        lower,
        upper,
        confidence,
    }
}

/// Upper acceptance bound for a fair-coin rate over `trials`, two-sided at
/// family-wise level `alpha` across `comparisons` independent batches.
pub fn fair_coin_bound(trials: u64, alpha: f64, comparisons: u32) -> f64 {
    let per = alpha / f64::from(comparisons.max(1));
    let z = Normal::standard().inverse_cdf(1.0 - per / 2.0);
    0.5 + z * (0.25 / trials as f64).sqrt()
}
