//! One KLJN link: resistor selection, quasi-static wire physics, level
//! decisions, bit extraction and the BEP timing model.
//!
//! Alice and Bob each connect `R_L` or `R_H`, driven by its own Johnson-noise
//! generator, to the two ends of a lossless wire. In the quasi-static limit
//! the wire is a single node, so the wire voltage is the resistive divider of
//! the two generator voltages and one current flows through the loop. Both
//! parties measure the mean-square wire voltage over a bit exchange period
//! (BEP), classify it into the `LL`, mixed or `HH` level, and combine that
//! with their own choice. Only mixed states yield key bits.

use rand::Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{ensure_positive, KljnError, Result};
use crate::noise::{self, derive_seed, generate_noise, mean_cross_of, mean_square_of, stream};
use crate::noise::{NoiseScale, SampleStream};

/// Propagation velocity in typical cable, m/s.
pub const DEFAULT_WAVE_VELOCITY: f64 = 2e8;
/// Independent samples needed for one mean-square estimate.
pub const DEFAULT_SAMPLES_PER_BEP: usize = 100;
pub const DEFAULT_GUARD_FRACTION: f64 = 0.05;
/// Significance level of each party's level-consistency test.
pub const DEFAULT_CONSISTENCY_ALPHA: f64 = 1e-9;

/// Stop an exchange that has not produced its key after this many BEPs per bit.
const MAX_BEPS_PER_BIT: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Resistor {
    Low,
    High,
}

impl Resistor {
    pub fn letter(self) -> char {
        match self {
            Resistor::Low => 'L',
            Resistor::High => 'H',
        }
    }

    pub fn other(self) -> Self {
        match self {
            Resistor::Low => Resistor::High,
            Resistor::High => Resistor::Low,
        }
    }

    pub(crate) fn fair<R: Rng + ?Sized>(rng: &mut R) -> Self {
        if rng.random_bool(0.5) {
            Resistor::High
        } else {
            Resistor::Low
        }
    }
}

/// Resistor pair on the wire; first letter is Alice's, second Bob's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BepState {
    LL,
    LH,
    HL,
    HH,
}

impl BepState {
    pub const ALL: [BepState; 4] = [BepState::LL, BepState::LH, BepState::HL, BepState::HH];

    pub fn from_choices(alice: Resistor, bob: Resistor) -> Self {
        match (alice, bob) {
            (Resistor::Low, Resistor::Low) => BepState::LL,
            (Resistor::Low, Resistor::High) => BepState::LH,
            (Resistor::High, Resistor::Low) => BepState::HL,
            (Resistor::High, Resistor::High) => BepState::HH,
        }
    }

    pub fn alice(self) -> Resistor {
        match self {
            BepState::LL | BepState::LH => Resistor::Low,
            BepState::HL | BepState::HH => Resistor::High,
        }
    }

    pub fn bob(self) -> Resistor {
        match self {
            BepState::LL | BepState::HL => Resistor::Low,
            BepState::LH | BepState::HH => Resistor::High,
        }
    }

    pub fn is_mixed(self) -> bool {
        matches!(self, BepState::LH | BepState::HL)
    }

    /// Publicly agreed mapping: `LH → 0`, `HL → 1`.
    pub fn key_bit(self) -> Option<u8> {
        match self {
            BepState::LH => Some(0),
            BepState::HL => Some(1),
            _ => None,
        }
    }

    pub fn band(self) -> Band {
        match self {
            BepState::LL => Band::Low,
            BepState::LH | BepState::HL => Band::Mixed,
            BepState::HH => Band::High,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BepState::LL => "LL",
            BepState::LH => "LH",
            BepState::HL => "HL",
            BepState::HH => "HH",
        }
    }
}

impl std::fmt::Display for BepState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Level band of a mean-square wire reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Band {
    Low,
    Mixed,
    High,
}

/// Physical parameters of one KLJN link.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkConfig {
    pub r_low: f64,
    pub r_high: f64,
    pub scale: NoiseScale,
    /// Wire length `L`, m.
    pub length: f64,
    /// Wave velocity in the cable `c`, m/s.
    pub wave_velocity: f64,
    pub samples_per_bep: usize,
    pub parallel_wires: u32,
    /// Relative distance to a decision threshold below which a BEP is discarded.
    pub guard_fraction: f64,
    pub consistency_alpha: f64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            r_low: 1_000.0,
            r_high: 10_000.0,
            scale: NoiseScale::DEFAULT,
            length: 1_000.0,
            wave_velocity: DEFAULT_WAVE_VELOCITY,
            samples_per_bep: DEFAULT_SAMPLES_PER_BEP,
            parallel_wires: 1,
            guard_fraction: DEFAULT_GUARD_FRACTION,
            consistency_alpha: DEFAULT_CONSISTENCY_ALPHA,
        }
    }
}

impl LinkConfig {
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(KljnError::InvalidConfig(msg));
        if !(self.r_low.is_finite() && self.r_high.is_finite() && self.r_low > 0.0) {
            return invalid(format!(
                "resistances must be positive and finite (r_low = {}, r_high = {})",
                self.r_low, self.r_high
            ));
        }
        if self.r_low >= self.r_high {
            return invalid(format!(
                "r_low ({}) must be strictly below r_high ({})",
                self.r_low, self.r_high
            ));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return invalid(format!("length must be positive, got {}", self.length));
        }
        if !(self.wave_velocity.is_finite() && self.wave_velocity > 0.0) {
            return invalid(format!(
                "wave velocity must be positive, got {}",
                self.wave_velocity
            ));
        }
        if self.samples_per_bep < 2 {
            return invalid(format!(
                "samples per BEP must be at least 2, got {}",
                self.samples_per_bep
            ));
        }
        if self.parallel_wires < 1 {
            return invalid("parallel wires must be at least 1".into());
        }
        if !(0.0..0.5).contains(&self.guard_fraction) {
            return invalid(format!(
                "guard fraction must lie in [0, 0.5), got {}",
                self.guard_fraction
            ));
        }
        if !(self.consistency_alpha > 0.0 && self.consistency_alpha < 1.0) {
            return invalid(format!(
                "consistency alpha must lie in (0, 1), got {}",
                self.consistency_alpha
            ));
        }
        Ok(())
    }

    pub fn noise_bandwidth(&self) -> f64 {
        self.wave_velocity / (2.0 * self.length) / 10.0
    }

    pub fn bep_duration(&self) -> f64 {
        2000.0 * self.length / self.wave_velocity
    }

    /// Spacing of independent samples, `1/B`.
    pub fn sample_interval(&self) -> f64 {
        1.0 / self.noise_bandwidth()
    }

    pub fn resistance(&self, choice: Resistor) -> f64 {
        match choice {
            Resistor::Low => self.r_low,
            Resistor::High => self.r_high,
        }
    }
}

/// Noise bandwidth: one tenth of the lowest standing-wave frequency `c/(2L)`.
pub fn noise_bandwidth(length: f64, wave_velocity: f64) -> Result<f64> {
    let l = ensure_positive("length", length)?;
    let c = ensure_positive("wave velocity", wave_velocity)?;
    Ok(c / (2.0 * l) / 10.0)
}

/// Best-case bit exchange period `2000·L/c`.
pub fn bep_duration(length: f64, wave_velocity: f64) -> Result<f64> {
    let l = ensure_positive("length", length)?;
    let c = ensure_positive("wave velocity", wave_velocity)?;
    Ok(2000.0 * l / c)
}

/// Ideal time for a `key_length`-bit key at one key bit per BEP.
pub fn key_time(key_length: u64, length: f64, wave_velocity: f64) -> Result<f64> {
    if key_length == 0 {
        return Err(KljnError::ZeroKeyLength);
    }
    let l = ensure_positive("length", length)?;
    let c = ensure_positive("wave velocity", wave_velocity)?;
    Ok(2000.0 * key_length as f64 * l / c)
}

/// Quasi-static solution of the loop: wire voltage is the divider of the two
/// generator voltages, current flows from Alice toward Bob.
pub fn wire_waveforms(
    u_a: &SampleStream,
    u_b: &SampleStream,
    r_a: f64,
    r_b: f64,
) -> Result<(SampleStream, SampleStream)> {
    let r_a = ensure_positive("Alice resistance", r_a)?;
    let r_b = ensure_positive("Bob resistance", r_b)?;
    if u_a.len() != u_b.len() {
        return Err(KljnError::LengthMismatch {
            left: u_a.len(),
            right: u_b.len(),
        });
    }
    let total = r_a + r_b;
    let (u_w, i_w) = u_a
        .values()
        .iter()
        .zip(u_b.values())
        .map(|(&a, &b)| ((a * r_b + b * r_a) / total, (a - b) / total))
        .unzip();
    Ok((
        SampleStream::derived(u_w, u_a.dt()),
        SampleStream::derived(i_w, u_a.dt()),
    ))
}

/// Analytic mean-square wire levels for the three distinguishable situations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Levels {
    pub u2_ll: f64,
    pub u2_mixed: f64,
    pub u2_hh: f64,
    pub i2_ll: f64,
    pub i2_mixed: f64,
    pub i2_hh: f64,
}

impl Levels {
    /// `⟨U²⟩ = a·(R_A∥R_B)`, `⟨I²⟩ = a/(R_A + R_B)`.
    pub fn for_state(&self, state: BepState) -> (f64, f64) {
        match state.band() {
            Band::Low => (self.u2_ll, self.i2_ll),
            Band::Mixed => (self.u2_mixed, self.i2_mixed),
            Band::High => (self.u2_hh, self.i2_hh),
        }
    }

    /// Geometric-mean decision thresholds between adjacent voltage levels.
    pub fn thresholds(&self) -> (f64, f64) {
        (
            (self.u2_ll * self.u2_mixed).sqrt(),
            (self.u2_mixed * self.u2_hh).sqrt(),
        )
    }
}

pub fn expected_levels(config: &LinkConfig) -> Result<Levels> {
    config.validate()?;
    let a = config.scale.get();
    let (rl, rh) = (config.r_low, config.r_high);
    Ok(Levels {
        u2_ll: a * rl / 2.0,
        u2_mixed: a * (rl * rh) / (rl + rh),
        u2_hh: a * rh / 2.0,
        i2_ll: a / (2.0 * rl),
        i2_mixed: a / (rl + rh),
        i2_hh: a / (2.0 * rh),
    })
}

/// A party's reading of the wire level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Decision {
    pub band: Band,
    /// Full state named from the band and the party's own choice, Alice's
    /// resistor first. When the band is impossible for that choice, the
    /// nearest compatible state.
    pub state: BepState,
    /// False inside the guard band or when the band is impossible.
    pub confident: bool,
}

/// Classifies a mean-square wire voltage reading from Alice's side, whose
/// own resistor is `own`.
pub fn decide_state(measured_u2: f64, own: Resistor, config: &LinkConfig) -> Result<Decision> {
    Ok(Classifier::new(config)?.decide(measured_u2, own))
}

/// Precomputed thresholds and test bounds for one configuration.
#[derive(Debug, Clone)]
pub struct Classifier {
    config: LinkConfig,
    levels: Levels,
    t_low: f64,
    t_high: f64,
    /// Acceptance interval of `n·m/level` under the χ²ₙ law.
    chi_lo: f64,
    chi_hi: f64,
}

impl Classifier {
    pub fn new(config: &LinkConfig) -> Result<Self> {
        let levels = expected_levels(config)?;
        let (t_low, t_high) = levels.thresholds();
        let chi = ChiSquared::new(config.samples_per_bep as f64)
            .map_err(|e| KljnError::InvalidConfig(e.to_string()))?;
        let half = config.consistency_alpha / 2.0;
        Ok(Self {
            config: config.clone(),
            levels,
            t_low,
            t_high,
            chi_lo: chi.inverse_cdf(half),
            chi_hi: chi.inverse_cdf(1.0 - half),
        })
    }

    pub fn config(&self) -> &LinkConfig {
        &self.config
    }

    pub fn levels(&self) -> &Levels {
        &self.levels
    }

    pub fn thresholds(&self) -> (f64, f64) {
        (self.t_low, self.t_high)
    }

    pub fn decide(&self, measured_u2: f64, own: Resistor) -> Decision {
        let band = if measured_u2 < self.t_low {
            Band::Low
        } else if measured_u2 < self.t_high {
            Band::Mixed
        } else {
            Band::High
        };
        let guard = self.config.guard_fraction;
        let near = |t: f64| (measured_u2 - t).abs() < guard * t;
        let guarded = near(self.t_low) || near(self.t_high);

        let (state, possible) = match (own, band) {
            (Resistor::Low, Band::Low) => (BepState::LL, true),
            (Resistor::Low, Band::Mixed) => (BepState::LH, true),
            (Resistor::Low, Band::High) => (BepState::LH, false),
            (Resistor::High, Band::Low) => (BepState::HL, false),
            (Resistor::High, Band::Mixed) => (BepState::HL, true),
            (Resistor::High, Band::High) => (BepState::HH, true),
        };
        Decision {
            band,
            state,
            confident: possible && !guarded,
        }
    }

    /// Decision from Bob's side: Bob's own resistor is the second letter.
    pub fn decide_as_bob(&self, measured_u2: f64, own: Resistor) -> Decision {
        let mut d = self.decide(measured_u2, own);
        d.state = swap_roles(d.state);
        d
    }

    /// Whether a voltage and current reading is statistically plausible for
    /// at least one state compatible with the party's own resistor.
    pub fn consistent(&self, u2: f64, i2: f64, own: Resistor) -> bool {
        let n = self.config.samples_per_bep as f64;
        let accept = |m: f64, level: f64| {
            let stat = n * m / level;
            stat >= self.chi_lo && stat <= self.chi_hi
        };
        let compatible = match own {
            Resistor::Low => [BepState::LL, BepState::LH],
            Resistor::High => [BepState::HL, BepState::HH],
        };
        compatible.iter().any(|&s| {
            let (lu, li) = self.levels.for_state(s);
            accept(u2, lu) && accept(i2, li)
        })
    }
}

/// `decide` names states as (own, other); Bob's view has roles swapped.
fn swap_roles(state: BepState) -> BepState {
    BepState::from_choices(state.bob(), state.alice())
}

/// What one party sees at its end of the wire during a BEP.
#[derive(Debug, Clone, PartialEq)]
pub struct PartyView {
    pub choice: Resistor,
    pub u_wire: SampleStream,
    /// Current at this party's terminal, positive from Alice toward Bob.
    pub i_wire: SampleStream,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BepWaveforms {
    pub alice: PartyView,
    pub bob: PartyView,
}

/// Generator voltages and choices for one BEP, before anything touches the wire.
#[derive(Debug, Clone, PartialEq)]
pub struct BepInputs {
    pub alice: Resistor,
    pub bob: Resistor,
    pub u_alice: SampleStream,
    pub u_bob: SampleStream,
}

impl BepInputs {
    pub fn draw(config: &LinkConfig, alice: Resistor, bob: Resistor, seed: u64) -> Result<Self> {
        let n = config.samples_per_bep;
        let dt = config.sample_interval();
        let u_alice = generate_noise(
            config.resistance(alice),
            config.scale,
            n,
            dt,
            derive_seed(seed, stream::NOISE_ALICE, 0),
        )?;
        let u_bob = generate_noise(
            config.resistance(bob),
            config.scale,
            n,
            dt,
            derive_seed(seed, stream::NOISE_BOB, 0),
        )?;
        Ok(Self {
            alice,
            bob,
            u_alice,
            u_bob,
        })
    }

    /// Fair, independent resistor choices for both parties.
    pub fn draw_fair(config: &LinkConfig, seed: u64) -> Result<Self> {
        let mut rng = noise::rng_for(derive_seed(seed, stream::CHOICE, 0));
        let alice = Resistor::fair(&mut rng);
        let bob = Resistor::fair(&mut rng);
        Self::draw(config, alice, bob, seed)
    }

    pub fn state(&self) -> BepState {
        BepState::from_choices(self.alice, self.bob)
    }

    /// Both parties on one shared wire.
    pub fn connect(&self, config: &LinkConfig) -> Result<BepWaveforms> {
        let (u_w, i_w) = wire_waveforms(
            &self.u_alice,
            &self.u_bob,
            config.resistance(self.alice),
            config.resistance(self.bob),
        )?;
        Ok(BepWaveforms {
            alice: PartyView {
                choice: self.alice,
                u_wire: u_w.clone(),
                i_wire: i_w.clone(),
            },
            bob: PartyView {
                choice: self.bob,
                u_wire: u_w,
                i_wire: i_w,
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartyReading {
    pub choice: Resistor,
    pub u2: f64,
    pub i2: f64,
    pub ui: f64,
    pub decision: Decision,
    pub consistent: bool,
}

impl PartyReading {
    fn take(view: &PartyView, classifier: &Classifier, as_bob: bool) -> Self {
        let u = view.u_wire.values();
        let i = view.i_wire.values();
        // Streams inside a BEP are non-empty and equal-length by construction.
        let u2 = mean_square_of(u).unwrap_or(0.0);
        let i2 = mean_square_of(i).unwrap_or(0.0);
        let ui = mean_cross_of(u, i).unwrap_or(0.0);
        let decision = if as_bob {
            classifier.decide_as_bob(u2, view.choice)
        } else {
            classifier.decide(u2, view.choice)
        };
        Self {
            choice: view.choice,
            u2,
            i2,
            ui,
            decision,
            consistent: classifier.consistent(u2, i2, view.choice),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KeyBit {
    Zero,
    One,
    Discarded,
}

impl KeyBit {
    pub fn value(self) -> Option<u8> {
        match self {
            KeyBit::Zero => Some(0),
            KeyBit::One => Some(1),
            KeyBit::Discarded => None,
        }
    }
}

/// Full record of one bit exchange period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BepRecord {
    pub alice: PartyReading,
    pub bob: PartyReading,
    pub bit: KeyBit,
    pub alarm: bool,
}

impl BepRecord {
    pub fn evaluate(classifier: &Classifier, waves: &BepWaveforms) -> Self {
        let alice = PartyReading::take(&waves.alice, classifier, false);
        let bob = PartyReading::take(&waves.bob, classifier, true);
        let alarm = !(alice.consistent && bob.consistent);
        let (da, db) = (alice.decision, bob.decision);
        let bit = if !alarm && da.confident && db.confident && da.state == db.state {
            match da.state.key_bit() {
                Some(0) => KeyBit::Zero,
                Some(_) => KeyBit::One,
                None => KeyBit::Discarded,
            }
        } else {
            KeyBit::Discarded
        };
        Self {
            alice,
            bob,
            bit,
            alarm,
        }
    }

    /// The true resistor state on the wire.
    pub fn true_state(&self) -> BepState {
        BepState::from_choices(self.alice.choice, self.bob.choice)
    }

    pub fn measured_u2(&self) -> f64 {
        self.alice.u2
    }

    pub fn measured_i2(&self) -> f64 {
        self.alice.i2
    }

    pub fn measured_ui(&self) -> f64 {
        self.alice.ui
    }

    pub fn both_confident(&self) -> bool {
        self.alice.decision.confident && self.bob.decision.confident
    }

    /// Both parties confident, yet their decided states differ.
    pub fn disagreement(&self) -> bool {
        self.both_confident() && self.alice.decision.state != self.bob.decision.state
    }
}

/// One BEP with fair random choices on an unattacked wire.
pub fn run_bep(config: &LinkConfig, seed: u64) -> Result<BepRecord> {
    let classifier = Classifier::new(config)?;
    run_bep_with(&classifier, seed)
}

pub fn run_bep_with(classifier: &Classifier, seed: u64) -> Result<BepRecord> {
    let inputs = BepInputs::draw_fair(classifier.config(), seed)?;
    let waves = inputs.connect(classifier.config())?;
    Ok(BepRecord::evaluate(classifier, &waves))
}

/// One BEP with the resistor choices fixed by the caller.
pub fn run_bep_forced(
    classifier: &Classifier,
    alice: Resistor,
    bob: Resistor,
    seed: u64,
) -> Result<BepRecord> {
    let inputs = BepInputs::draw(classifier.config(), alice, bob, seed)?;
    let waves = inputs.connect(classifier.config())?;
    Ok(BepRecord::evaluate(classifier, &waves))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeyExchangeResult {
    pub key_bits: Vec<u8>,
    pub beps_used: u64,
    pub discarded: u64,
    pub alarms: u64,
    /// Discarded periods in which both parties were confident but disagreed.
    pub disagreements: u64,
    /// `ceil(beps_used / parallel_wires) × bep_duration`.
    pub elapsed_time: f64,
    /// One key bit per BEP on a single wire.
    pub ideal_time: f64,
    pub bep_duration: f64,
    pub parallel_wires: u32,
}

impl KeyExchangeResult {
    pub fn aborted(&self) -> bool {
        self.alarms > 0
    }

    pub fn discard_rate(&self) -> f64 {
        if self.beps_used == 0 {
            0.0
        } else {
            self.discarded as f64 / self.beps_used as f64
        }
    }

    /// Key bits per BEP; the factor between ideal and effective time on one wire.
    pub fn yield_fraction(&self) -> f64 {
        if self.beps_used == 0 {
            0.0
        } else {
            self.key_bits.len() as f64 / self.beps_used as f64
        }
    }
}

/// The seed of the `index`-th BEP of an exchange.
///
/// BEP `index` runs on channel `index % parallel_wires`. Seeds do not depend
/// on the wire count, so the same exchange seed yields the same BEP outcomes
/// whatever the parallelism; only their packing into rounds changes.
pub fn bep_seed(exchange_seed: u64, index: u64) -> u64 {
    derive_seed(exchange_seed, stream::BEP, index)
}

/// Runs BEPs round-robin over the parallel wires until `key_length` bits are
/// agreed, or aborts at the first alarm.
pub fn exchange_key(config: &LinkConfig, key_length: u64, seed: u64) -> Result<KeyExchangeResult> {
    let classifier = Classifier::new(config)?;
    exchange_key_by(config, key_length, |index| {
        run_bep_with(&classifier, bep_seed(seed, index))
    })
}

/// Exchange loop shared with the adversary module; `run` executes BEP `index`.
pub(crate) fn exchange_key_by<F>(
    config: &LinkConfig,
    key_length: u64,
    mut run: F,
) -> Result<KeyExchangeResult>
where
    F: FnMut(u64) -> Result<BepRecord>,
{
    config.validate()?;
    if key_length == 0 {
        return Err(KljnError::ZeroKeyLength);
    }
    let limit = key_length
        .saturating_mul(MAX_BEPS_PER_BIT as u64)
        .max(10_000);
    let mut key_bits = Vec::with_capacity(key_length as usize);
    let (mut beps, mut discarded, mut alarms, mut disagreements) = (0u64, 0u64, 0u64, 0u64);

    while (key_bits.len() as u64) < key_length {
        if beps >= limit {
            return Err(KljnError::InvalidConfig(format!(
                "no key after {beps} BEPs; the configuration yields no usable periods"
            )));
        }
        let record = run(beps)?;
        beps += 1;
        if record.alarm {
            alarms += 1;
            break;
        }
        match record.bit.value() {
            Some(b) => key_bits.push(b),
            None => {
                discarded += 1;
                if record.disagreement() {
                    disagreements += 1;
                }
            }
        }
    }

    let tau = config.bep_duration();
    let p = u64::from(config.parallel_wires);
    Ok(KeyExchangeResult {
        key_bits,
        beps_used: beps,
        discarded,
        alarms,
        disagreements,
        elapsed_time: beps.div_ceil(p) as f64 * tau,
        ideal_time: key_time(key_length, config.length, config.wave_velocity)?,
        bep_duration: tau,
        parallel_wires: config.parallel_wires,
    })
}

/// Aggregate outcome counts over many independent BEPs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct LinkSurvey {
    pub trials: u64,
    pub mixed_states: u64,
    pub both_confident: u64,
    pub disagreements: u64,
    pub keyed: u64,
    pub alarms: u64,
}

impl LinkSurvey {
    pub fn add(&mut self, record: &BepRecord) {
        self.trials += 1;
        self.mixed_states += u64::from(record.true_state().is_mixed());
        self.both_confident += u64::from(record.both_confident());
        self.disagreements += u64::from(record.disagreement());
        self.keyed += u64::from(record.bit != KeyBit::Discarded);
        self.alarms += u64::from(record.alarm);
    }

    /// Fraction of both-confident periods in which the parties' states differ.
    pub fn disagreement_rate(&self) -> f64 {
        ratio(self.disagreements, self.both_confident)
    }

    pub fn yield_fraction(&self) -> f64 {
        ratio(self.keyed, self.trials)
    }

    pub fn mixed_fraction(&self) -> f64 {
        ratio(self.mixed_states, self.trials)
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Runs `trials` fair BEPs and tallies the outcomes.
pub fn survey(config: &LinkConfig, trials: u64, seed: u64) -> Result<LinkSurvey> {
    let classifier = Classifier::new(config)?;
    let mut out = LinkSurvey::default();
    for t in 0..trials {
        out.add(&run_bep_with(
            &classifier,
            derive_seed(seed, stream::TRIAL, t),
        )?);
    }
    Ok(out)
}

/// Monte Carlo estimate of key bits per BEP, used to turn ideal times into
/// effective ones.
pub fn estimate_yield(config: &LinkConfig, trials: u64, seed: u64) -> Result<f64> {
    Ok(survey(config, trials, derive_seed(seed, stream::YIELD, 0))?.yield_fraction())
}
