//! Eavesdropper models against a simulated link and the intrusion check run
//! by the legitimate parties.
//!
//! Eve sits at the wire midpoint. Passively she sees exactly the wire voltage
//! and current. Actively she can cut the wire and run her own KLJN endpoint
//! toward each party, or inject a current into the wire. The parties detect
//! activity by publicly comparing a random subset of their per-sample
//! voltage and current readings, which are identical at both ends of an
//! untouched quasi-static wire, and by testing their own readings against
//! the levels their resistor choice allows.

use rand::seq::index;
use rand::Rng;
use serde::Serialize;

use crate::error::{KljnError, Result};
use crate::link::{
    exchange_key_by, wire_waveforms, BepInputs, BepRecord, BepState, BepWaveforms, Classifier,
    KeyExchangeResult, LinkConfig, PartyView, Resistor,
};
use crate::noise::{self, derive_seed, generate_noise, mean_of, sample_std, stream, SampleStream};
use crate::stats::{clopper_pearson, BinomialEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InjectWaveform {
    Constant,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum AttackKind {
    PassiveListen,
    MitmSplit,
    /// Current injected at the wire midpoint; `amplitude` in A is the constant
    /// value or the standard deviation of the Gaussian waveform.
    CurrentInject {
        amplitude: f64,
        waveform: InjectWaveform,
    },
}

impl AttackKind {
    pub fn validate(&self) -> Result<()> {
        if let AttackKind::CurrentInject { amplitude, .. } = *self {
            if !(amplitude.is_finite() && amplitude > 0.0) {
                return Err(KljnError::InvalidAttack(format!(
                    "injection amplitude must be positive, got {amplitude}"
                )));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            AttackKind::PassiveListen => "passive",
            AttackKind::MitmSplit => "mitm",
            AttackKind::CurrentInject { .. } => "inject",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EveVerdict {
    pub guessed_bit: u8,
    /// Posterior probability Eve assigns to her guess.
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionConfig {
    /// Fraction of per-BEP samples Alice and Bob publish and compare.
    pub reveal_fraction: f64,
    /// Relative tolerance for two published samples to count as equal.
    pub mismatch_tolerance: f64,
    /// Standard errors the wire-voltage mean may stray from zero.
    pub mean_z: f64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            reveal_fraction: 0.1,
            mismatch_tolerance: 1e-9,
            mean_z: 5.0,
        }
    }
}

impl DetectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.reveal_fraction > 0.0 && self.reveal_fraction <= 1.0) {
            return Err(KljnError::InvalidDetection(format!(
                "reveal fraction must lie in (0, 1], got {}",
                self.reveal_fraction
            )));
        }
        if self.mismatch_tolerance.is_nan() || self.mismatch_tolerance < 0.0 {
            return Err(KljnError::InvalidDetection(format!(
                "mismatch tolerance must be non-negative, got {}",
                self.mismatch_tolerance
            )));
        }
        if self.mean_z.is_nan() || self.mean_z <= 0.0 {
            return Err(KljnError::InvalidDetection(format!(
                "mean threshold must be positive, got {}",
                self.mean_z
            )));
        }
        Ok(())
    }

    pub fn revealed_count(&self, samples: usize) -> usize {
        ((self.reveal_fraction * samples as f64).ceil() as usize).clamp(1, samples)
    }
}

/// Log-likelihood of the joint wire samples when Alice holds `r_a` and Bob `r_b`.
///
/// Voltage and current are Gaussian with `var u = a·r_a·r_b/(r_a+r_b)` and
/// `var i = a/(r_a+r_b)`. Their covariance `a·(r_b·r_a − r_a·r_b)/(r_a+r_b)²`
/// vanishes, so the joint density factorizes.
fn wire_log_likelihood(u: &[f64], i: &[f64], r_a: f64, r_b: f64, a: f64) -> f64 {
    let total = r_a + r_b;
    let var_u = a * (r_a * r_b) / total;
    let var_i = a / total;
    let quad: f64 = u
        .iter()
        .zip(i)
        .map(|(&x, &y)| x * x / var_u + y * y / var_i)
        .sum();
    -0.5 * u.len() as f64 * (var_u * var_i).ln() - 0.5 * quad
}

/// Eve's best guess of the key bit from the wire voltage and current of a
/// mixed-state BEP: a likelihood-ratio test between `LH` and `HL`, with a
/// fair coin on a tie.
pub fn eve_passive_guess<R: Rng + ?Sized>(
    u_wire: &SampleStream,
    i_wire: &SampleStream,
    config: &LinkConfig,
    rng: &mut R,
) -> Result<EveVerdict> {
    config.validate()?;
    if u_wire.len() != i_wire.len() {
        return Err(KljnError::LengthMismatch {
            left: u_wire.len(),
            right: i_wire.len(),
        });
    }
    let a = config.scale.get();
    let (rl, rh) = (config.r_low, config.r_high);
    let ll_lh = wire_log_likelihood(u_wire.values(), i_wire.values(), rl, rh, a);
    let ll_hl = wire_log_likelihood(u_wire.values(), i_wire.values(), rh, rl, a);
    let llr = ll_lh - ll_hl;
    let guess_lh = if llr == 0.0 || !llr.is_finite() {
        rng.random_bool(0.5)
    } else {
        llr > 0.0
    };
    let confidence = if llr.is_finite() {
        1.0 / (1.0 + (-llr.abs()).exp())
    } else {
        0.5
    };
    let state = if guess_lh { BepState::LH } else { BepState::HL };
    Ok(EveVerdict {
        guessed_bit: state.key_bit().expect("mixed state"),
        confidence,
    })
}

/// Resistors Eve connected toward each party in a split-wire attack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SplitEndpoints {
    pub toward_alice: Resistor,
    pub toward_bob: Resistor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackedWaveforms {
    pub waves: BepWaveforms,
    pub split: Option<SplitEndpoints>,
}

/// What each party sees when `attack` acts on a BEP.
pub fn apply_attack(
    attack: &AttackKind,
    inputs: &BepInputs,
    config: &LinkConfig,
    seed: u64,
) -> Result<AttackedWaveforms> {
    attack.validate()?;
    match *attack {
        AttackKind::PassiveListen => Ok(AttackedWaveforms {
            waves: inputs.connect(config)?,
            split: None,
        }),
        AttackKind::MitmSplit => split_wire(inputs, config, seed),
        AttackKind::CurrentInject {
            amplitude,
            waveform,
        } => inject_current(inputs, config, amplitude, waveform, seed),
    }
}

fn split_wire(inputs: &BepInputs, config: &LinkConfig, seed: u64) -> Result<AttackedWaveforms> {
    let mut rng = noise::rng_for(derive_seed(seed, stream::EVE, 0));
    let toward_alice = Resistor::fair(&mut rng);
    let toward_bob = Resistor::fair(&mut rng);
    let (n, dt) = (config.samples_per_bep, config.sample_interval());
    let (r_ea, r_eb) = (
        config.resistance(toward_alice),
        config.resistance(toward_bob),
    );
    let u_ea = generate_noise(r_ea, config.scale, n, dt, derive_seed(seed, stream::EVE, 1))?;
    let u_eb = generate_noise(r_eb, config.scale, n, dt, derive_seed(seed, stream::EVE, 2))?;

    let (u_a, i_a) = wire_waveforms(
        &inputs.u_alice,
        &u_ea,
        config.resistance(inputs.alice),
        r_ea,
    )?;
    let (u_b, i_b) = wire_waveforms(&u_eb, &inputs.u_bob, r_eb, config.resistance(inputs.bob))?;
    Ok(AttackedWaveforms {
        waves: BepWaveforms {
            alice: PartyView {
                choice: inputs.alice,
                u_wire: u_a,
                i_wire: i_a,
            },
            bob: PartyView {
                choice: inputs.bob,
                u_wire: u_b,
                i_wire: i_b,
            },
        },
        split: Some(SplitEndpoints {
            toward_alice,
            toward_bob,
        }),
    })
}

/// Midpoint current injection on the single-node wire:
/// `u_w = (u_a·r_b + u_b·r_a + I·r_a·r_b)/(r_a + r_b)`; Alice's terminal
/// carries `(u_a − u_w)/r_a`, Bob's `(u_w − u_b)/r_b`, and the two differ by `I`.
fn inject_current(
    inputs: &BepInputs,
    config: &LinkConfig,
    amplitude: f64,
    waveform: InjectWaveform,
    seed: u64,
) -> Result<AttackedWaveforms> {
    let n = inputs.u_alice.len();
    let dt = inputs.u_alice.dt();
    let injected: Vec<f64> = match waveform {
        InjectWaveform::Constant => vec![amplitude; n],
        InjectWaveform::Gaussian => {
            // Unit-variance draw scaled to the requested RMS current.
            let unit = generate_noise(
                1.0,
                crate::noise::NoiseScale::new(1.0)?,
                n,
                dt,
                derive_seed(seed, stream::EVE, 3),
            )?;
            unit.values().iter().map(|v| amplitude * v).collect()
        }
    };
    let r_a = config.resistance(inputs.alice);
    let r_b = config.resistance(inputs.bob);
    let total = r_a + r_b;
    let mut u_w = Vec::with_capacity(n);
    let mut i_a = Vec::with_capacity(n);
    let mut i_b = Vec::with_capacity(n);
    for ((&ua, &ub), &ie) in inputs
        .u_alice
        .values()
        .iter()
        .zip(inputs.u_bob.values())
        .zip(&injected)
    {
        let node = (ua * r_b + ub * r_a + ie * r_a * r_b) / total;
        u_w.push(node);
        i_a.push((ua - node) / r_a);
        i_b.push((node - ub) / r_b);
    }
    let u_w = SampleStream::new(u_w, dt)?;
    Ok(AttackedWaveforms {
        waves: BepWaveforms {
            alice: PartyView {
                choice: inputs.alice,
                u_wire: u_w.clone(),
                i_wire: SampleStream::new(i_a, dt)?,
            },
            bob: PartyView {
                choice: inputs.bob,
                u_wire: u_w,
                i_wire: SampleStream::new(i_b, dt)?,
            },
        },
        split: None,
    })
}

/// Which intrusion tests fired for one BEP.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct IntrusionCheck {
    /// Published sample subsets disagree beyond tolerance.
    pub sample_mismatch: bool,
    /// A party's levels fit no state its own choice allows.
    pub level_inconsistent: bool,
    /// A party's wire-voltage mean is far from zero.
    pub mean_offset: bool,
}

impl IntrusionCheck {
    pub fn alarm(&self) -> bool {
        self.sample_mismatch || self.level_inconsistent || self.mean_offset
    }
}

/// Public comparison and level checks after a BEP. `reveal_seed` is the
/// public randomness choosing which sample indices get published.
pub fn detect_intrusion(
    waves: &BepWaveforms,
    classifier: &Classifier,
    det: &DetectionConfig,
    reveal_seed: u64,
) -> Result<IntrusionCheck> {
    det.validate()?;
    let (alice, bob) = (&waves.alice, &waves.bob);
    let n = alice.u_wire.len();
    if bob.u_wire.len() != n || alice.i_wire.len() != n || bob.i_wire.len() != n {
        return Err(KljnError::LengthMismatch {
            left: n,
            right: bob.u_wire.len(),
        });
    }
    if n == 0 {
        return Err(KljnError::EmptyStream);
    }

    let mut rng = noise::rng_for(reveal_seed);
    let picked = index::sample(&mut rng, n, det.revealed_count(n));
    let tol = det.mismatch_tolerance;
    let differs = |x: f64, y: f64| (x - y).abs() > tol * x.abs().max(y.abs());
    let sample_mismatch = picked.iter().any(|k| {
        differs(alice.u_wire.values()[k], bob.u_wire.values()[k])
            || differs(alice.i_wire.values()[k], bob.i_wire.values()[k])
    });

    let level_inconsistent = [alice, bob].iter().any(|v| {
        let u2 = noise::mean_square_of(v.u_wire.values()).unwrap_or(0.0);
        let i2 = noise::mean_square_of(v.i_wire.values()).unwrap_or(0.0);
        !classifier.consistent(u2, i2, v.choice)
    });

    let mean_offset = [alice, bob].iter().any(|v| {
        let u = v.u_wire.values();
        let se = sample_std(u) / (u.len() as f64).sqrt();
        mean_of(u).abs() > det.mean_z * se
    });

    Ok(IntrusionCheck {
        sample_mismatch,
        level_inconsistent,
        mean_offset,
    })
}

/// One BEP under attack, after the parties' intrusion check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackedBep {
    /// The parties' record; `alarm` folds in the intrusion check.
    pub record: BepRecord,
    pub check: IntrusionCheck,
    /// State on the wire segment Alice is connected to.
    pub alice_segment: BepState,
    /// Eve's guess of Alice's bit when that segment is in a mixed state.
    pub eve_guess: Option<EveVerdict>,
}

pub fn run_attacked_bep(
    classifier: &Classifier,
    attack: &AttackKind,
    det: &DetectionConfig,
    seed: u64,
) -> Result<AttackedBep> {
    let config = classifier.config();
    let inputs = BepInputs::draw_fair(config, seed)?;
    let attacked = apply_attack(attack, &inputs, config, seed)?;
    let waves = &attacked.waves;
    let check = detect_intrusion(waves, classifier, det, derive_seed(seed, stream::REVEAL, 0))?;
    let mut record = BepRecord::evaluate(classifier, waves);
    record.alarm |= check.alarm();
    if record.alarm {
        record.bit = crate::link::KeyBit::Discarded;
    }

    let alice_partner = match attacked.split {
        Some(ends) => ends.toward_alice,
        None => inputs.bob,
    };
    let alice_segment = BepState::from_choices(inputs.alice, alice_partner);
    let eve_guess = if !alice_segment.is_mixed() {
        None
    } else if let Some(ends) = attacked.split {
        // Eve is a legitimate-looking endpoint toward Alice and decides as Bob would.
        let u2 = noise::mean_square_of(waves.alice.u_wire.values())?;
        let d = classifier.decide_as_bob(u2, ends.toward_alice);
        Some(EveVerdict {
            guessed_bit: d.state.key_bit().unwrap_or(0),
            confidence: if d.confident { 1.0 } else { 0.5 },
        })
    } else {
        let mut rng = noise::rng_for(derive_seed(seed, stream::EVE, 4));
        Some(eve_passive_guess(
            &waves.alice.u_wire,
            &waves.alice.i_wire,
            config,
            &mut rng,
        )?)
    };

    Ok(AttackedBep {
        record,
        check,
        alice_segment,
        eve_guess,
    })
}

/// A full key exchange while `attack` is active; aborts at the first alarm.
pub fn exchange_under_attack(
    config: &LinkConfig,
    key_length: u64,
    seed: u64,
    attack: &AttackKind,
    det: &DetectionConfig,
) -> Result<KeyExchangeResult> {
    let classifier = Classifier::new(config)?;
    attack.validate()?;
    det.validate()?;
    exchange_key_by(config, key_length, |index| {
        run_attacked_bep(&classifier, attack, det, crate::link::bep_seed(seed, index))
            .map(|b| b.record)
    })
}

/// Index of the first alarmed BEP within `max_beps`, if any.
pub fn beps_until_detection(
    classifier: &Classifier,
    attack: &AttackKind,
    det: &DetectionConfig,
    max_beps: u64,
    seed: u64,
) -> Result<Option<u64>> {
    for k in 0..max_beps {
        let bep = run_attacked_bep(classifier, attack, det, crate::link::bep_seed(seed, k))?;
        if bep.record.alarm {
            return Ok(Some(k + 1));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AttackEvaluation {
    pub trials: u64,
    /// Eve's accuracy on Alice's bit over mixed-segment BEPs.
    pub eve_accuracy: BinomialEstimate,
    /// Fraction of attacked BEPs that raised an alarm.
    pub detection: BinomialEstimate,
    /// Fraction of unattacked baseline BEPs that raised an alarm.
    pub false_alarm: BinomialEstimate,
}

/// Monte Carlo evaluation of one attack over `trials` independent BEPs plus
/// an equally long unattacked baseline.
pub fn evaluate_attack(
    config: &LinkConfig,
    attack: &AttackKind,
    det: &DetectionConfig,
    trials: u64,
    seed: u64,
    confidence: f64,
) -> Result<AttackEvaluation> {
    let classifier = Classifier::new(config)?;
    let (mut eve_n, mut eve_ok, mut alarms) = (0u64, 0u64, 0u64);
    for t in 0..trials {
        let bep = run_attacked_bep(
            &classifier,
            attack,
            det,
            derive_seed(seed, stream::TRIAL, t),
        )?;
        alarms += u64::from(bep.record.alarm);
        if let (Some(guess), Some(bit)) = (bep.eve_guess, bep.alice_segment.key_bit()) {
            eve_n += 1;
            eve_ok += u64::from(guess.guessed_bit == bit);
        }
    }
    let mut false_alarms = 0u64;
    for t in 0..trials {
        let bep = run_attacked_bep(
            &classifier,
            &AttackKind::PassiveListen,
            det,
            derive_seed(seed, stream::BASELINE, t),
        )?;
        false_alarms += u64::from(bep.record.alarm);
    }
    Ok(AttackEvaluation {
        trials,
        eve_accuracy: clopper_pearson(eve_ok, eve_n, confidence),
        detection: clopper_pearson(alarms, trials, confidence),
        false_alarm: clopper_pearson(false_alarms, trials, confidence),
    })
}
