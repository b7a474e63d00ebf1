//! Johnson-noise sample streams and the estimators the protocol runs on them.
//!
//! Noise is modelled as independent Gaussian samples taken once per
//! correlation interval `1/B` of the band-limited generator, so a stream of
//! `n` samples spans `n/B` seconds. The product `4·k·T_eff·B` is carried as a
//! single intensity [`NoiseScale`] in V²/Ω: the protocol only ever compares
//! levels, never absolute temperatures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{ensure_positive, KljnError, Result};

/// Noise intensity `a = 4·k·T_eff·B` in V²/Ω.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct NoiseScale(f64);

impl NoiseScale {
    pub const DEFAULT: NoiseScale = NoiseScale(1e-6);

    pub fn new(a: f64) -> Result<Self> {
        ensure_positive("noise scale", a).map(NoiseScale)
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl Default for NoiseScale {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// An immutable run of voltage (or current) samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStream {
    values: Vec<f64>,
    dt: f64,
    /// Seed the stream was drawn from; `None` for streams derived from others.
    rng_seed: Option<u64>,
}

impl SampleStream {
    pub fn new(values: Vec<f64>, dt: f64) -> Result<Self> {
        ensure_positive("sample interval", dt)?;
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(KljnError::InvalidConfig(format!("non-finite sample {bad}")));
        }
        Ok(Self {
            values,
            dt,
            rng_seed: None,
        })
    }

    pub(crate) fn derived(values: Vec<f64>, dt: f64) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self {
            values,
            dt,
            rng_seed: None,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn rng_seed(&self) -> Option<u64> {
        self.rng_seed
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Time spanned by the stream.
    pub fn duration(&self) -> f64 {
        self.values.len() as f64 * self.dt
    }
}

/// Mean-square Johnson noise voltage `a·R` of a resistor.
pub fn johnson_variance(resistance: f64, scale: NoiseScale) -> Result<f64> {
    let r = ensure_positive("resistance", resistance)?;
    Ok(scale.get() * r)
}

/// Draws `n` independent zero-mean Gaussian samples with variance `a·R`.
pub fn generate_noise(
    resistance: f64,
    scale: NoiseScale,
    n: usize,
    dt: f64,
    seed: u64,
) -> Result<SampleStream> {
    let sigma = johnson_variance(resistance, scale)?.sqrt();
    ensure_positive("sample interval", dt)?;
    if n == 0 {
        return Err(KljnError::ZeroSamples);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n)
        .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Ok(SampleStream {
        values,
        dt,
        rng_seed: Some(seed),
    })
}

/// Arithmetic mean of squared samples.
pub fn mean_square(stream: &SampleStream) -> Result<f64> {
    mean_square_of(stream.values())
}

/// Arithmetic mean of the elementwise product of two streams.
pub fn mean_cross(stream_u: &SampleStream, stream_i: &SampleStream) -> Result<f64> {
    mean_cross_of(stream_u.values(), stream_i.values())
}

pub fn mean_square_of(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(KljnError::EmptyStream);
    }
    Ok(values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64)
}

pub fn mean_cross_of(u: &[f64], i: &[f64]) -> Result<f64> {
    if u.len() != i.len() {
        return Err(KljnError::LengthMismatch {
            left: u.len(),
            right: i.len(),
        });
    }
    if u.is_empty() {
        return Err(KljnError::EmptyStream);
    }
    Ok(u.iter().zip(i).map(|(a, b)| a * b).sum::<f64>() / u.len() as f64)
}

pub(crate) fn mean_of(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n − 1 denominator).
pub(crate) fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mean = mean_of(values);
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// Derives a child seed from a parent seed, a component label and an index.
///
/// Every random draw in the crate is addressed this way, so a given
/// `(seed, label, index)` always maps to the same stream regardless of how
/// many other streams were drawn before it or on which worker.
pub fn derive_seed(parent: u64, label: u64, index: u64) -> u64 {
    let mut x = splitmix64(parent ^ splitmix64(label.wrapping_add(0x632b_e59b_d9b4_e019)));
    x = splitmix64(x ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    x
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Labels for [`derive_seed`]; one per consumer of randomness.
pub mod stream {
    pub const BEP: u64 = 1;
    pub const CHOICE: u64 = 2;
    pub const NOISE_ALICE: u64 = 3;
    pub const NOISE_BOB: u64 = 4;
    pub const EVE: u64 = 5;
    pub const REVEAL: u64 = 6;
    pub const TRIAL: u64 = 7;
    pub const BASELINE: u64 = 8;
    pub const YIELD: u64 = 9;
}

pub(crate) fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
