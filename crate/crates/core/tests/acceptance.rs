//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::collections::HashSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use kljn_core::adversary::{
    beps_until_detection, evaluate_attack, eve_passive_guess, AttackKind, DetectionConfig,
    InjectWaveform,
};
use kljn_core::link::{
    bep_duration, exchange_key, noise_bandwidth, run_bep_forced, survey, BepInputs, Classifier,
    LinkConfig, Resistor,
};
use kljn_core::network::{parse_network_spec, read_network_spec, NetworkSpec};
use kljn_core::noise::derive_seed;
use kljn_core::planner::{full_mesh_hardware, plan_full_mesh, plan_star};
use kljn_core::security::{classify_pairs, SecurityClass, TrustParams};
use kljn_core::stats::fair_coin_bound;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fixture(name: &str) -> NetworkSpec {
    read_network_spec(
        &Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("fixtures")
            .join(name),
    )
    .expect("fixture parses")
}

fn mean_and_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, v)
}

// 1
fn bep_timing() -> Outcome {
    let tau = bep_duration(1000.0, 2e8).unwrap();
    let via_band = 100.0 / noise_bandwidth(1000.0, 2e8).unwrap();
    check(
        tau == 0.01 && via_band == tau,
        format!("tau = {tau} s, 100/B = {via_band} s"),
    )
}

// 2
fn mesh_time_independent_of_n() -> Outcome {
    let spec = fixture("mesh_uniform.net");
    let mut totals = Vec::new();
    for n in [4, 8, 12] {
        let plan = plan_full_mesh(&spec.restrict(n), 256).map_err(|e| e.to_string())?;
        totals.push((n, plan.total_time));
    }
    let ok = totals.iter().all(|&(_, t)| t == 2.56) && (2.56f64 - 2.5).abs() / 2.5 < 0.05;
    check(ok, format!("total_time by N: {totals:?}"))
}

// 3
fn mesh_hardware() -> Outcome {
    let ten = full_mesh_hardware(10).map_err(|e| e.to_string())?;
    let mut mismatches = Vec::new();
    for n in 2..=50u64 {
        let mut wires = 0u64;
        let mut units = 0u64;
        for i in 0..n {
            for j in 0..n {
                if i < j {
                    wires += 1;
                }
                if i != j {
                    units += 1;
                }
            }
        }
        if full_mesh_hardware(n).map_err(|e| e.to_string())? != (units, wires) {
            mismatches.push(n);
        }
    }
    check(
        ten == (90, 45) && mismatches.is_empty(),
        format!("N=10 -> {ten:?}; brute-force mismatches for N<=50: {mismatches:?}"),
    )
}

// 4
fn mixed_states_indistinguishable() -> Outcome {
    let c = Classifier::new(&LinkConfig::default()).unwrap();
    let (mut u_lh, mut i_lh, mut u_hl, mut i_hl) = (vec![], vec![], vec![], vec![]);
    for t in 0..10_000u64 {
        let a = run_bep_forced(&c, Resistor::Low, Resistor::High, derive_seed(41, 1, t)).unwrap();
        let b = run_bep_forced(&c, Resistor::High, Resistor::Low, derive_seed(41, 2, t)).unwrap();
        u_lh.push(a.measured_u2());
        i_lh.push(a.measured_i2());
        u_hl.push(b.measured_u2());
        i_hl.push(b.measured_i2());
    }
    let z = |x: &[f64], y: &[f64]| {
        let ((mx, vx), (my, vy)) = (mean_and_var(x), mean_and_var(y));
        (mx - my).abs() / (vx / x.len() as f64 + vy / y.len() as f64).sqrt()
    };
    let (zu, zi) = (z(&u_lh, &u_hl), z(&i_lh, &i_hl));
    check(
        zu < 5.0 && zi < 5.0,
        format!("2x10^4 BEPs: |du2| = {zu:.2} SE, |di2| = {zi:.2} SE (limit 5)"),
    )
}

fn eve_batch(config: &LinkConfig, mixed: u64, seed: u64) -> f64 {
    let mut choice = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut coin = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut right = 0u64;
    for t in 0..mixed {
        let alice = if choice.random_bool(0.5) {
            Resistor::Low
        } else {
            Resistor::High
        };
        let inputs =
            BepInputs::draw(config, alice, alice.other(), derive_seed(seed, 7, t)).unwrap();
        let bit = inputs.state().key_bit().unwrap();
        let waves = inputs.connect(config).unwrap();
        let v =
            eve_passive_guess(&waves.alice.u_wire, &waves.alice.i_wire, config, &mut coin).unwrap();
        right += u64::from(v.guessed_bit == bit);
    }
    right as f64 / mixed as f64
}

// 5
fn eve_passive_accuracy() -> Outcome {
    let config = LinkConfig::default();
    let main = eve_batch(&config, 10_000, 501);
    let bound = fair_coin_bound(10_000, 0.05, 20);
    let batches: Vec<f64> = (0..20)
        .map(|b| eve_batch(&config, 10_000, 600 + b))
        .collect();
    let worst = batches.iter().cloned().fold(0.0, f64::max);
    check(
        (0.485..=0.515).contains(&main) && worst <= bound,
        format!("accuracy {main:.4} over 10^4 mixed BEPs; worst of 20 batches {worst:.4} vs bound {bound:.4}"),
    )
}

// 6
fn power_balance() -> Outcome {
    let config = LinkConfig::default();
    let mut products = Vec::with_capacity(1_000_000);
    for t in 0..10_000u64 {
        let alice = if t % 2 == 0 {
            Resistor::Low
        } else {
            Resistor::High
        };
        let w = BepInputs::draw(&config, alice, alice.other(), derive_seed(66, 1, t))
            .unwrap()
            .connect(&config)
            .unwrap();
        products.extend(
            w.alice
                .u_wire
                .values()
                .iter()
                .zip(w.alice.i_wire.values())
                .map(|(u, i)| u * i),
        );
    }
    let (m, v) = mean_and_var(&products);
    let z = m.abs() / (v / products.len() as f64).sqrt();
    check(
        products.len() >= 1_000_000 && z < 5.0,
        format!(
            "<u i> = {m:.3e} over {} samples, {z:.2} SE (limit 5)",
            products.len()
        ),
    )
}

// 7
fn intrusion_detection() -> Outcome {
    let config = LinkConfig::default();
    let det = DetectionConfig::default();
    let e = |a: &AttackKind| evaluate_attack(&config, a, &det, 10_000, 77, 0.95).unwrap();
    let mitm = e(&AttackKind::MitmSplit);
    let passive = e(&AttackKind::PassiveListen);
    let classifier = Classifier::new(&config).unwrap();
    let inject = AttackKind::CurrentInject {
        amplitude: 1e-3,
        waveform: InjectWaveform::Constant,
    };
    let sessions = 1000u64;
    let caught = (0..sessions)
        .filter(|&s| {
            matches!(
                beps_until_detection(&classifier, &inject, &det, 10, derive_seed(78, 1, s)).unwrap(),
                Some(k) if k <= 10
            )
        })
        .count() as f64
        / sessions as f64;
    let passive_alarms = passive.detection.successes + passive.false_alarm.successes;
    check(
        mitm.detection.rate >= 0.99 && passive_alarms == 0 && caught >= 0.99,
        format!(
            "mitm per-BEP detection {:.4}; passive alarms {passive_alarms} over 2x10^4 BEPs; inject 1 mA caught within 10 BEPs in {caught:.3} of {sessions} sessions",
            mitm.detection.rate
        ),
    )
}

/// Standalone classifier: draws the wire voltage directly from its
/// mixed-resistance Gaussian law, thresholds at geometric means of the
/// analytic levels and counts confident disagreements.
fn oracle_disagreement(config: &LinkConfig, trials: u64, seed: u64) -> (u64, u64) {
    let a = config.scale.get();
    let (rl, rh) = (config.r_low, config.r_high);
    let par = |x: f64, y: f64| x * y / (x + y);
    let (ll, mixed, hh) = (a * rl / 2.0, a * par(rl, rh), a * rh / 2.0);
    let (t1, t2) = ((ll * mixed).sqrt(), (mixed * hh).sqrt());
    let g = config.guard_fraction;
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    // Party with its own resistor `low`: Some(other side is low) when confident.
    let read = |m: f64, low: bool| -> Option<bool> {
        if (m - t1).abs() < g * t1 || (m - t2).abs() < g * t2 {
            return None;
        }
        match (low, m < t1, m >= t2) {
            (true, true, _) => Some(true),
            (true, false, false) => Some(false),
            (false, _, true) => Some(false),
            (false, false, false) => Some(true),
            _ => None,
        }
    };
    let (mut confident, mut disagree) = (0u64, 0u64);
    for _ in 0..trials {
        let (al, bl) = (rng.random_bool(0.5), rng.random_bool(0.5));
        let r = |low: bool| if low { rl } else { rh };
        let sigma = (a * par(r(al), r(bl))).sqrt();
        let n = config.samples_per_bep;
        let m = (0..n)
            .map(|_| {
                let x: f64 = sigma * rng.sample::<f64, _>(StandardNormal);
                x * x
            })
            .sum::<f64>()
            / n as f64;
        if let (Some(bob_low_per_alice), Some(alice_low_per_bob)) = (read(m, al), read(m, bl)) {
            confident += 1;
            let alice_state = (al, bob_low_per_alice);
            let bob_state = (alice_low_per_bob, bl);
            disagree += u64::from(alice_state != bob_state);
        }
    }
    (disagree, confident)
}

// 8
fn disagreement_decreases() -> Outcome {
    // Analytic χ² values at these settings: 2.4512e-2, 1.0219e-3, 1.9810e-8.
    let analytic = [2.4512e-2, 1.0219e-3, 1.9810e-8];
    let runs = [(25usize, 100_000u64), (100, 1_000_000), (400, 100_000)];
    let mut rates = Vec::new();
    let mut lines = Vec::new();
    let mut ok = true;
    for (k, &(n, trials)) in runs.iter().enumerate() {
        let config = LinkConfig {
            samples_per_bep: n,
            ..LinkConfig::default()
        };
        let s = survey(&config, trials, 800 + k as u64).unwrap();
        let sim = s.disagreement_rate();
        let (od, oc) = oracle_disagreement(&config, trials, 900 + k as u64);
        let orc = od as f64 / oc as f64;
        let rel = |x: f64, y: f64| (x - y).abs() <= 0.2 * x.max(y);
        let expected_events = analytic[k] * s.both_confident as f64;
        let analytic_ok = expected_events < 100.0 || rel(sim, analytic[k]);
        ok &= rel(sim, orc) && analytic_ok;
        rates.push(sim);
        lines.push(format!(
            "n={n}: sim {sim:.4e} ({} of {}), oracle {orc:.4e} ({od} of {oc}), analytic {:.4e}",
            s.disagreements, s.both_confident, analytic[k]
        ));
    }
    ok &= rates.windows(2).all(|w| w[1] < w[0]);
    check(ok, lines.join("; "))
}

fn star_spec(n: usize) -> NetworkSpec {
    let mut text = String::from("station id=hub island=x kljn=no\n");
    for i in 0..n {
        text.push_str(&format!("station id=m{i} island=x kljn=yes\n"));
    }
    for i in 0..n {
        text.push_str(&format!("link a=hub b=m{i} kind=wire length=500\n"));
    }
    parse_network_spec(&text).unwrap()
}

// 9
fn star_schedule() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for n in (2..=12).step_by(2) {
        let plan = plan_star(&star_spec(n), "hub", 256).map_err(|e| e.to_string())?;
        let mut seen = HashSet::new();
        let mut valid = plan.rounds.len() == n - 1;
        for r in &plan.rounds {
            let mut used = HashSet::new();
            for p in &r.pairs {
                valid &= used.insert(p.a.clone()) && used.insert(p.b.clone());
                let key = if p.a < p.b {
                    (p.a.clone(), p.b.clone())
                } else {
                    (p.b.clone(), p.a.clone())
                };
                valid &= seen.insert(key);
            }
        }
        valid &= seen.len() == n * (n - 1) / 2;
        let per_round = plan.rounds[0].duration;
        let expected = (n as f64 - 1.0) * per_round;
        valid &= plan.rounds.iter().all(|r| r.duration == per_round);
        valid &= ((plan.total_time - expected) / expected).abs() < 1e-12;
        ok &= valid;
        notes.push(format!(
            "N={n}: {} rounds, {}",
            plan.rounds.len(),
            plan.total_time
        ));
    }
    check(ok, notes.join(", "))
}

// 10
fn island_scenarios() -> Outcome {
    let p = TrustParams::default();
    let cross = |spec: &NetworkSpec| {
        let r = classify_pairs(spec, &p).unwrap();
        let island = |id: &str| spec.station(id).unwrap().island.clone();
        let pairs: HashSet<(String, String)> = r
            .pairs()
            .filter(|(a, b, c)| *c == SecurityClass::Unconditional && island(a) != island(b))
            .map(|(a, b, _)| (a.to_string(), b.to_string()))
            .collect();
        (r, pairs)
    };
    let fig3 = fixture("fig3.net");
    let (_, c3) = cross(&fig3);
    let fig4 = fixture("fig4.net");
    let (r4, c4) = cross(&fig4);
    let island = |id: &str| fig4.station(id).unwrap().island.clone();
    let merged: Vec<&Vec<String>> = r4
        .components
        .iter()
        .filter(|c| c.iter().map(|s| island(s)).collect::<HashSet<_>>().len() > 1)
        .collect();
    let mut expected = HashSet::new();
    for comp in &merged {
        for (i, a) in comp.iter().enumerate() {
            for b in &comp[i + 1..] {
                if island(a) != island(b) {
                    let ia = fig4.station_index()[a.as_str()];
                    let ib = fig4.station_index()[b.as_str()];
                    let (x, y) = if ia < ib { (a, b) } else { (b, a) };
                    expected.insert((x.clone(), y.clone()));
                }
            }
        }
    }
    check(
        c3.is_empty() && !c4.is_empty() && c4 == expected,
        format!(
            "fig3 cross-island unconditional pairs: {}; fig4: {} (merged component pairs: {})",
            c3.len(),
            c4.len(),
            expected.len()
        ),
    )
}

// 11
fn parallel_speedup() -> Outcome {
    let k = 16_384;
    let one = exchange_key(&LinkConfig::default(), k, 1100).unwrap();
    let many = exchange_key(
        &LinkConfig {
            parallel_wires: 500,
            ..LinkConfig::default()
        },
        k,
        1100,
    )
    .unwrap();
    let ratio = many.elapsed_time / one.elapsed_time;
    let target = 1.0 / 500.0;
    let dev = (ratio - target).abs() / target;
    check(
        dev <= 0.02 && one.beps_used == many.beps_used,
        format!(
            "K={k}: {} BEPs; P=1 {:.2} s, P=500 {:.4} s, ratio x{:.1} ({:.2}% from 1/500)",
            one.beps_used,
            one.elapsed_time,
            many.elapsed_time,
            1.0 / ratio,
            100.0 * dev
        ),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("bep duration and bandwidth", bep_timing),
        (
            "full-mesh time independent of N",
            mesh_time_independent_of_n,
        ),
        ("full-mesh hardware counts", mesh_hardware),
        (
            "mixed states indistinguishable",
            mixed_states_indistinguishable,
        ),
        ("passive eavesdropper accuracy", eve_passive_accuracy),
        ("zero mean power flow", power_balance),
        ("intrusion detection", intrusion_detection),
        ("disagreement rate vs samples", disagreement_decreases),
        ("star schedule", star_schedule),
        ("island scenarios", island_scenarios),
        ("parallel-wire speedup", parallel_speedup),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS {:>2} {name} [{secs:.1} s]: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name} [{secs:.1} s]: {d}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
