use std::collections::HashSet;

use kljn_core::link::{expected_levels, LinkConfig};
use kljn_core::network::{
    parse_network_spec, write_network_spec, LinkKind, NetLink, NetworkSpec, Station,
};
use kljn_core::noise::{generate_noise, johnson_variance, NoiseScale};
use kljn_core::planner::{full_mesh_hardware, plan_full_mesh, plan_star, round_robin};
use kljn_core::security::{classify_pairs, secure_path, trust_from_counts, TrustParams};
use proptest::prelude::*;

fn station(i: usize, island: usize, kljn: bool, qkd: bool) -> Station {
    Station {
        id: format!("s{i}"),
        island: format!("i{island}"),
        has_kljn: kljn,
        has_qkd: qkd,
        kljn_unit_budget: None,
    }
}

/// Random two-island network: a flag per station and a list of candidate
/// links, filtered to the ones the validator accepts.
fn arb_network() -> impl Strategy<Value = NetworkSpec> {
    (2usize..9)
        .prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec((0usize..2, any::<bool>(), any::<bool>()), n),
                prop::collection::vec(
                    (0..n, 0..n, 0u8..3, any::<bool>(), 1u32..4, 1u32..5000),
                    0..20,
                ),
            )
        })
        .prop_map(|(_, flags, cands)| {
            let stations: Vec<Station> = flags
                .iter()
                .enumerate()
                .map(|(i, &(isl, k, q))| station(i, isl, k, q))
                .collect();
            let mut spec = NetworkSpec::new(
                Some("random".into()),
                stations.clone(),
                vec![],
                LinkConfig::default(),
            )
            .unwrap();
            for (a, b, kind, qkd, wires, len) in cands {
                let kind = [LinkKind::Wire, LinkKind::Wireless, LinkKind::Satellite][kind as usize];
                let link = NetLink {
                    a: stations[a].id.clone(),
                    b: stations[b].id.clone(),
                    kind,
                    length: f64::from(len) * 1.5,
                    parallel_wires: if kind == LinkKind::Wire { wires } else { 1 },
                    qkd_equipped: kind == LinkKind::Satellite && qkd,
                };
                if let Ok(next) = spec.with_link(link) {
                    spec = next;
                }
            }
            spec
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn variance_ratio_equals_resistance_ratio(r1 in 1e-3f64..1e7, r2 in 1e-3f64..1e7, a in 1e-12f64..1.0) {
        let s = NoiseScale::new(a).unwrap();
        let v1 = johnson_variance(r1, s).unwrap();
        let v2 = johnson_variance(r2, s).unwrap();
        prop_assert!(((v1 / v2) / (r1 / r2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noise_streams_are_deterministic(seed in any::<u64>(), n in 1usize..200) {
        let s = NoiseScale::DEFAULT;
        let a = generate_noise(1000.0, s, n, 1e-4, seed).unwrap();
        let b = generate_noise(1000.0, s, n, 1e-4, seed).unwrap();
        prop_assert_eq!(a.values(), b.values());
    }

    #[test]
    fn level_ordering(rl in 1.0f64..1e5, ratio in 1.001f64..1e3, a in 1e-9f64..1.0) {
        let c = LinkConfig {
            r_low: rl,
            r_high: rl * ratio,
            scale: NoiseScale::new(a).unwrap(),
            ..LinkConfig::default()
        };
        let l = expected_levels(&c).unwrap();
        prop_assert!(l.u2_ll < l.u2_mixed && l.u2_mixed < l.u2_hh);
        prop_assert!(l.i2_ll > l.i2_mixed && l.i2_mixed > l.i2_hh);
    }

    #[test]
    fn full_mesh_hardware_matches_enumeration(n in 2u64..=50) {
        let pairs = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).count() as u64;
        prop_assert_eq!(full_mesh_hardware(n).unwrap(), (2 * pairs, pairs));
    }

    #[test]
    fn trust_is_monotone_and_bounded(k in 0u32..500, s in 0u32..500, kappa in 0.1f64..10.0, beta in 0.01f64..1.0) {
        let p = TrustParams { kappa, beta };
        let t = trust_from_counts(k, s, &p);
        prop_assert!((0.0..1.0).contains(&t));
        prop_assert!(trust_from_counts(k + 1, s, &p) > t);
        prop_assert!(trust_from_counts(k, s + 1, &p) > t);
    }

    #[test]
    fn parse_write_parse_round_trip(spec in arb_network()) {
        let text = write_network_spec(&spec);
        let back = parse_network_spec(&text).unwrap();
        prop_assert_eq!(&back, &spec);
        prop_assert_eq!(write_network_spec(&back), text);
    }

    #[test]
    fn pair_classes_are_symmetric_and_witnessed(spec in arb_network()) {
        let r = classify_pairs(&spec, &TrustParams::default()).unwrap();
        let n = r.stations.len();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(r.classes[i][j], r.classes[j][i]);
            }
        }
        for comp in &r.components {
            for a in comp {
                for b in comp {
                    if a != b {
                        let path = secure_path(&spec, a, b);
                        prop_assert!(path.is_some());
                        let path = path.unwrap();
                        prop_assert_eq!(path.first(), Some(a));
                        prop_assert_eq!(path.last(), Some(b));
                    }
                }
            }
        }
    }

    #[test]
    fn adding_a_link_never_demotes(spec in arb_network(), a in 0usize..8, b in 0usize..8, kind in 0u8..3) {
        let ids: Vec<String> = spec.stations().iter().map(|s| s.id.clone()).collect();
        let (a, b) = (a % ids.len(), b % ids.len());
        let kind = [LinkKind::Wire, LinkKind::Wireless, LinkKind::Satellite][kind as usize];
        let link = NetLink {
            a: ids[a].clone(),
            b: ids[b].clone(),
            kind,
            length: 100.0,
            parallel_wires: 1,
            qkd_equipped: kind == LinkKind::Satellite,
        };
        if let Ok(bigger) = spec.with_link(link) {
            let p = TrustParams::default();
            let before = classify_pairs(&spec, &p).unwrap();
            let after = classify_pairs(&bigger, &p).unwrap();
            for (x, y, c) in before.pairs() {
                prop_assert!(after.class_of(x, y).unwrap() >= c);
            }
        }
    }
}

fn uniform_mesh(n: usize) -> NetworkSpec {
    let stations: Vec<Station> = (0..n).map(|i| station(i, 0, true, false)).collect();
    let mut links = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            links.push(NetLink {
                a: format!("s{i}"),
                b: format!("s{j}"),
                kind: LinkKind::Wire,
                length: 1000.0,
                parallel_wires: 1,
                qkd_equipped: false,
            });
        }
    }
    NetworkSpec::new(None, stations, links, LinkConfig::default()).unwrap()
}

fn uniform_star(n: usize) -> NetworkSpec {
    let mut stations = vec![Station {
        id: "hub".into(),
        island: "i0".into(),
        has_kljn: false,
        has_qkd: false,
        kljn_unit_budget: None,
    }];
    stations.extend((0..n).map(|i| station(i, 0, true, false)));
    let links = (0..n)
        .map(|i| NetLink {
            a: "hub".into(),
            b: format!("s{i}"),
            kind: LinkKind::Wire,
            length: 500.0,
            parallel_wires: 1,
            qkd_equipped: false,
        })
        .collect();
    NetworkSpec::new(None, stations, links, LinkConfig::default()).unwrap()
}

#[test]
fn round_robin_covers_each_pair_once() {
    for n in 2..=12 {
        let mut seen = HashSet::new();
        for (pairs, bye) in round_robin(n) {
            let mut used = HashSet::new();
            for &(i, j) in &pairs {
                assert!(
                    used.insert(i) && used.insert(j),
                    "station reused in a round"
                );
                assert!(seen.insert((i.min(j), i.max(j))), "pair repeated");
            }
            if let Some(b) = bye {
                assert!(!used.contains(&b));
            }
        }
        assert_eq!(seen.len(), n * (n - 1) / 2);
    }
}

#[test]
fn star_to_mesh_time_ratio_is_n_minus_one() {
    for n in (2..=12).step_by(2) {
        let mesh = plan_full_mesh(&uniform_mesh(n), 256).unwrap();
        let star = plan_star(&uniform_star(n), "hub", 256).unwrap();
        let ratio = star.total_time / mesh.total_time;
        assert!((ratio - (n as f64 - 1.0)).abs() < 1e-9, "n = {n}: {ratio}");
        assert_eq!(star.kljn_units_required, n as u64);
        assert_eq!(star.wires_required, n as u64);
    }
}

#[test]
fn mesh_plan_pairs_once_with_matching_hardware() {
    for n in 2..=12 {
        let plan = plan_full_mesh(&uniform_mesh(n), 256).unwrap();
        let mut seen = HashSet::new();
        for r in &plan.rounds {
            for p in &r.pairs {
                let key = if p.a < p.b {
                    (&p.a, &p.b)
                } else {
                    (&p.b, &p.a)
                };
                assert!(seen.insert(key));
            }
        }
        assert_eq!(seen.len(), n * (n - 1) / 2);
        assert_eq!(
            (plan.kljn_units_required, plan.wires_required),
            full_mesh_hardware(n as u64).unwrap()
        );
        assert_eq!(plan.total_time, 2.56);
    }
}
