//! Browser bindings for the KLJN simulator. Each export takes plain numbers or
//! text and returns a JSON string for the page script to render.

use kljn_core::link::{estimate_yield, expected_levels, survey, BepState, Classifier, LinkConfig};
use kljn_core::network::{parse_network_spec, LinkKind, NetLink, NetworkSpec, Station};
use kljn_core::noise::{derive_seed, NoiseScale};
use kljn_core::planner::{plan_full_mesh, plan_line, plan_star, DistributionPlan};
use kljn_core::security::{classify_pairs, SecurityClass, TrustParams};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const BINS: usize = 60;

fn link_config(r_low: f64, r_high: f64, samples: u32) -> Result<LinkConfig, String> {
    let c = LinkConfig {
        r_low,
        r_high,
        samples_per_bep: samples as usize,
        scale: NoiseScale::DEFAULT,
        ..LinkConfig::default()
    };
    c.validate().map_err(|e| e.to_string())?;
    Ok(c)
}

/// Histogram of measured mean-square wire voltage per true state, on a log
/// axis, with the analytic levels and decision thresholds.
pub fn level_histogram(
    r_low: f64,
    r_high: f64,
    samples: u32,
    trials: u32,
    seed: u64,
) -> Result<Value, String> {
    let config = link_config(r_low, r_high, samples)?;
    if trials == 0 || trials > 200_000 {
        return Err("trials must lie in 1..=200000".into());
    }
    let classifier = Classifier::new(&config).map_err(|e| e.to_string())?;
    let levels = expected_levels(&config).map_err(|e| e.to_string())?;
    let (t_low, t_high) = classifier.thresholds();

    let mut readings: Vec<(BepState, f64)> = Vec::with_capacity(trials as usize);
    for t in 0..u64::from(trials) {
        let r = kljn_core::link::run_bep_with(&classifier, derive_seed(seed, 1, t))
            .map_err(|e| e.to_string())?;
        readings.push((r.true_state(), r.measured_u2()));
    }
    let lo = levels.u2_ll / 4.0;
    let hi = levels.u2_hh * 4.0;
    let (llo, lhi) = (lo.ln(), hi.ln());
    let bin = |x: f64| {
        let f = (x.clamp(lo, hi).ln() - llo) / (lhi - llo);
        ((f * BINS as f64) as usize).min(BINS - 1)
    };
    let mut counts = [[0u32; BINS]; 3];
    for &(state, u2) in &readings {
        let row = match state {
            BepState::LL => 0,
            BepState::LH | BepState::HL => 1,
            BepState::HH => 2,
        };
        counts[row][bin(u2)] += 1;
    }
    let edges: Vec<f64> = (0..=BINS)
        .map(|i| (llo + (lhi - llo) * i as f64 / BINS as f64).exp())
        .collect();
    let s = survey(&config, u64::from(trials), seed).map_err(|e| e.to_string())?;
    Ok(json!({
        "edges": edges,
        "counts": { "LL": counts[0].to_vec(), "mixed": counts[1].to_vec(), "HH": counts[2].to_vec() },
        "levels": levels,
        "thresholds": [t_low, t_high],
        "guard": config.guard_fraction,
        "bep_duration": config.bep_duration(),
        "survey": {
            "trials": s.trials,
            "yield": s.yield_fraction(),
            "disagreement_rate": s.disagreement_rate(),
            "mixed_fraction": s.mixed_fraction(),
            "alarms": s.alarms,
        },
    }))
}

fn uniform_network(
    n: usize,
    length: f64,
    wires: u32,
) -> Result<(NetworkSpec, NetworkSpec, NetworkSpec), String> {
    let station = |id: String, kljn: bool| Station {
        id,
        island: "main".into(),
        has_kljn: kljn,
        has_qkd: false,
        kljn_unit_budget: None,
    };
    let wire = |a: String, b: String, length: f64| NetLink {
        a,
        b,
        kind: LinkKind::Wire,
        length,
        parallel_wires: wires,
        qkd_equipped: false,
    };
    let ids: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let stations: Vec<Station> = ids.iter().map(|id| station(id.clone(), true)).collect();
    let defaults = LinkConfig::default();

    let mut mesh_links = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            mesh_links.push(wire(ids[i].clone(), ids[j].clone(), length));
        }
    }
    let mesh = NetworkSpec::new(None, stations.clone(), mesh_links, defaults.clone());

    let mut star_stations = vec![station("hub".into(), false)];
    star_stations.extend(stations.iter().cloned());
    let spokes = ids
        .iter()
        .map(|id| wire("hub".into(), id.clone(), length / 2.0))
        .collect();
    let star = NetworkSpec::new(None, star_stations, spokes, defaults.clone());

    let chain = ids
        .windows(2)
        .map(|w| wire(w[0].clone(), w[1].clone(), length))
        .collect();
    let line = NetworkSpec::new(None, stations, chain, defaults);

    let e = |e: kljn_core::network::SpecError| e.to_string();
    Ok((mesh.map_err(e)?, star.map_err(e)?, line.map_err(e)?))
}

fn plan_json(plan: &DistributionPlan, yield_fraction: f64) -> Value {
    json!({
        "mode": plan.mode.label(),
        "kljn_units": plan.kljn_units_required,
        "wires": plan.wires_required,
        "rounds": plan.rounds.len(),
        "ideal_time": plan.total_time,
        "effective_time": plan.total_time / yield_fraction,
    })
}

/// Hardware and key-loading time of full mesh, star and line layouts for
/// `n` stations `length` metres apart.
pub fn compare_layouts(n: u32, length: f64, key_bits: u32, wires: u32) -> Result<Value, String> {
    if !(2..=200).contains(&n) {
        return Err("stations must lie in 2..=200".into());
    }
    if key_bits == 0 || wires == 0 {
        return Err("key bits and wires must be at least 1".into());
    }
    let (mesh, star, line) = uniform_network(n as usize, length, wires)?;
    let y = estimate_yield(&LinkConfig::default(), 4000, 7).map_err(|e| e.to_string())?;
    let k = u64::from(key_bits);
    let order: Vec<String> = line.stations().iter().map(|s| s.id.clone()).collect();
    let e = |e: kljn_core::planner::PlanError| e.to_string();
    Ok(json!({
        "yield": y,
        "plans": [
            plan_json(&plan_full_mesh(&mesh, k).map_err(e)?, y),
            plan_json(&plan_star(&star, "hub", k).map_err(e)?, y),
            plan_json(&plan_line(&line, &order, k).map_err(e)?, y),
        ],
    }))
}

/// Pairwise security classes, secure components and trust scores of a
/// `.net` description.
pub fn analyze_network(text: &str) -> Result<Value, String> {
    let spec = parse_network_spec(text).map_err(|e| e.to_string())?;
    let report = classify_pairs(&spec, &TrustParams::default()).map_err(|e| e.to_string())?;
    let island = |id: &str| {
        spec.station(id)
            .map(|s| s.island.as_str())
            .unwrap_or_default()
    };
    let cross = report
        .pairs()
        .filter(|(a, b, c)| *c == SecurityClass::Unconditional && island(a) != island(b))
        .count();
    let classes: Vec<Vec<&str>> = report
        .classes
        .iter()
        .map(|row| row.iter().map(|c| c.label()).collect())
        .collect();
    Ok(json!({
        "stations": report.stations,
        "islands": spec.stations().iter().map(|s| s.island.clone()).collect::<Vec<_>>(),
        "classes": classes,
        "components": report.components,
        "trust": report.trust,
        "counts": {
            "unconditional": report.count(SecurityClass::Unconditional),
            "conditional": report.count(SecurityClass::Conditional),
            "none": report.count(SecurityClass::None),
            "cross_island_unconditional": cross,
        },
    }))
}

fn to_js(r: Result<Value, String>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = levelHistogram)]
pub fn level_histogram_js(
    r_low: f64,
    r_high: f64,
    samples: u32,
    trials: u32,
    seed: u32,
) -> Result<String, JsError> {
    to_js(level_histogram(
        r_low,
        r_high,
        samples,
        trials,
        u64::from(seed),
    ))
}

#[wasm_bindgen(js_name = compareLayouts)]
pub fn compare_layouts_js(
    n: u32,
    length: f64,
    key_bits: u32,
    wires: u32,
) -> Result<String, JsError> {
    to_js(compare_layouts(n, length, key_bits, wires))
}

#[wasm_bindgen(js_name = analyzeNetwork)]
pub fn analyze_network_js(text: &str) -> Result<String, JsError> {
    to_js(analyze_network(text))
}
