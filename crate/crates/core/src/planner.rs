//! Key-distribution planning for KLJN ground networks.
//!
//! Three wiring geometries trade hardware for time:
//!
//! * full mesh: every pair of stations has its own wire and KLJN unit pair,
//!   so all keys load in parallel; `M = N(N−1)` units, `W = N(N−1)/2` wires;
//! * star: each station has one unit and one spoke to a passive switching
//!   exchange that connects disjoint pairs simultaneously, one pairing per
//!   round (circle-method round robin);
//! * line: each station talks to its neighbours only and distant pairs get
//!   end-to-end keys by trusted-relay composition, so inner links carry the
//!   traffic of every pair routed across them.
//!
//! Times use one key bit per BEP (`τ_K = 2000·K·L/c`) divided by the number
//! of parallel wires on the link.

use serde::Serialize;

use crate::link::key_time;
use crate::network::{NetworkSpec, Station};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanError {
    #[error("need at least 2 stations, found {0}")]
    TooFewStations(usize),
    #[error("unknown station `{0}`")]
    UnknownStation(String),
    #[error("no wire link between `{a}` and `{b}`; add `link a={a} b={b} kind=wire length=<m>` or plan a star or line instead")]
    MissingLink { a: String, b: String },
    #[error("station `{station}` has no wire spoke to the exchange `{center}`; add `link a={center} b={station} kind=wire length=<m>`")]
    MissingSpoke { center: String, station: String },
    #[error("line order breaks between `{a}` and `{b}`: no wire link joins them")]
    BrokenChain { a: String, b: String },
    #[error("station `{0}` appears twice in the line order")]
    RepeatedStation(String),
    #[error("key length must be at least 1 bit")]
    ZeroKeyLength,
    #[error("plan has no rounds")]
    EmptyPlan,
    #[error("yield fraction must lie in (0, 1], got {0}")]
    BadYield(f64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum PlanMode {
    FullMesh,
    Star { center: String },
    Line { order: Vec<String> },
}

impl PlanMode {
    pub fn label(&self) -> String {
        match self {
            PlanMode::FullMesh => "full_mesh".into(),
            PlanMode::Star { center } => format!("star({center})"),
            PlanMode::Line { order } => format!("line({})", order.join(">")),
        }
    }
}

/// One station pair exchanging a key within a round.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairTask {
    pub a: String,
    pub b: String,
    /// Length of the KLJN loop (or of the relay path), m.
    pub length: f64,
    pub parallel_wires: u32,
    /// Wire hops between the pair; 1 for a direct loop.
    pub hops: usize,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Round {
    pub pairs: Vec<PairTask>,
    /// Station sitting out this round (odd-sized star).
    pub bye: Option<String>,
    pub duration: f64,
}

/// Key traffic carried by one wire of a line network.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkLoad {
    pub a: String,
    pub b: String,
    pub length: f64,
    pub parallel_wires: u32,
    /// Station pairs whose relay path uses this wire.
    pub pairs_routed: u64,
    pub demand_bits: u64,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionPlan {
    pub mode: PlanMode,
    pub stations: Vec<String>,
    pub rounds: Vec<Round>,
    pub link_loads: Vec<LinkLoad>,
    /// `M`
    pub kljn_units_required: u64,
    /// `W`
    pub wires_required: u64,
    pub total_time: f64,
    pub per_pair_key_bits: u64,
}

impl DistributionPlan {
    pub fn pair_count(&self) -> usize {
        self.rounds.iter().map(|r| r.pairs.len()).sum()
    }
}

/// Hardware of an `n`-station full mesh: `(N(N−1), N(N−1)/2)`.
pub fn full_mesh_hardware(n: u64) -> Result<(u64, u64), PlanError> {
    if n < 2 {
        return Err(PlanError::TooFewStations(n as usize));
    }
    let m = n * (n - 1);
    Ok((m, m / 2))
}

fn pair_time(spec: &NetworkSpec, k: u64, length: f64, wires: u32) -> Result<f64, PlanError> {
    key_time(k, length, spec.kljn_defaults().wave_velocity)
        .map(|t| t / f64::from(wires))
        .map_err(|_| PlanError::ZeroKeyLength)
}

fn check_key_bits(k: u64) -> Result<(), PlanError> {
    if k == 0 {
        Err(PlanError::ZeroKeyLength)
    } else {
        Ok(())
    }
}

fn max_duration<'a>(it: impl IntoIterator<Item = &'a PairTask>) -> f64 {
    it.into_iter().map(|p| p.duration).fold(0.0, f64::max)
}

/// All KLJN stations pairwise wired; one round carrying every pair.
pub fn plan_full_mesh(spec: &NetworkSpec, k: u64) -> Result<DistributionPlan, PlanError> {
    check_key_bits(k)?;
    let stations: Vec<&Station> = spec.kljn_stations().collect();
    let (m, w) = full_mesh_hardware(stations.len() as u64)?;
    let mut pairs = Vec::with_capacity(w as usize);
    for (i, x) in stations.iter().enumerate() {
        for y in &stations[i + 1..] {
            let link = spec
                .wire_between(&x.id, &y.id)
                .ok_or_else(|| PlanError::MissingLink {
                    a: x.id.clone(),
                    b: y.id.clone(),
                })?;
            pairs.push(PairTask {
                a: x.id.clone(),
                b: y.id.clone(),
                length: link.length,
                parallel_wires: link.parallel_wires,
                hops: 1,
                duration: pair_time(spec, k, link.length, link.parallel_wires)?,
            });
        }
    }
    let duration = max_duration(&pairs);
    Ok(DistributionPlan {
        mode: PlanMode::FullMesh,
        stations: stations.iter().map(|s| s.id.clone()).collect(),
        rounds: vec![Round {
            pairs,
            bye: None,
            duration,
        }],
        link_loads: Vec::new(),
        kljn_units_required: m,
        wires_required: w,
        total_time: duration,
        per_pair_key_bits: k,
    })
}

/// Index pairs playing in one round, and the participant sitting out.
pub type IndexRound = (Vec<(usize, usize)>, Option<usize>);

/// Circle-method round robin over `n` participants: `n−1` rounds for even
/// `n`, `n` rounds with one bye each for odd `n`. Returns index pairs and the
/// bye of each round.
pub fn round_robin(n: usize) -> Vec<IndexRound> {
    if n < 2 {
        return Vec::new();
    }
    // Slot `n` is the dummy opponent for odd counts.
    let slots = if n.is_multiple_of(2) { n } else { n + 1 };
    let mut ring: Vec<usize> = (0..slots).collect();
    let mut rounds = Vec::with_capacity(slots - 1);
    for _ in 0..slots - 1 {
        let mut pairs = Vec::with_capacity(slots / 2);
        let mut bye = None;
        for i in 0..slots / 2 {
            let (x, y) = (ring[i], ring[slots - 1 - i]);
            if x >= n {
                bye = Some(y);
            } else if y >= n {
                bye = Some(x);
            } else {
                pairs.push((x.min(y), x.max(y)));
            }
        }
        rounds.push((pairs, bye));
        // Keep slot 0 fixed and rotate the rest by one.
        ring[1..].rotate_right(1);
    }
    rounds
}

/// Star around a passive switching exchange at `center`.
///
/// A switched pair forms one KLJN loop through both spokes, so its length is
/// the sum of the two spoke lengths.
pub fn plan_star(spec: &NetworkSpec, center: &str, k: u64) -> Result<DistributionPlan, PlanError> {
    check_key_bits(k)?;
    if spec.station(center).is_none() {
        return Err(PlanError::UnknownStation(center.to_string()));
    }
    let members: Vec<&Station> = spec.kljn_stations().filter(|s| s.id != center).collect();
    if members.len() < 2 {
        return Err(PlanError::TooFewStations(members.len()));
    }
    let spokes = members
        .iter()
        .map(|s| {
            spec.wire_between(center, &s.id)
                .ok_or_else(|| PlanError::MissingSpoke {
                    center: center.to_string(),
                    station: s.id.clone(),
                })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut rounds = Vec::new();
    for (idx_pairs, bye) in round_robin(members.len()) {
        let pairs = idx_pairs
            .into_iter()
            .map(|(i, j)| {
                let length = spokes[i].length + spokes[j].length;
                let wires = spokes[i].parallel_wires.min(spokes[j].parallel_wires);
                Ok(PairTask {
                    a: members[i].id.clone(),
                    b: members[j].id.clone(),
                    length,
                    parallel_wires: wires,
                    hops: 1,
                    duration: pair_time(spec, k, length, wires)?,
                })
            })
            .collect::<Result<Vec<_>, PlanError>>()?;
        let duration = max_duration(&pairs);
        rounds.push(Round {
            pairs,
            bye: bye.map(|b| members[b].id.clone()),
            duration,
        });
    }
    let n = members.len() as u64;
    Ok(DistributionPlan {
        mode: PlanMode::Star {
            center: center.to_string(),
        },
        stations: members.iter().map(|s| s.id.clone()).collect(),
        total_time: rounds.iter().map(|r| r.duration).sum(),
        rounds,
        link_loads: Vec::new(),
        kljn_units_required: n,
        wires_required: n,
        per_pair_key_bits: k,
    })
}

/// Chain of stations in `order`, neighbours wired directly.
///
/// Every pair gets a `k`-bit key: neighbours directly, others by relaying
/// over each hop with a fresh `k`-bit hop key. Wire `i` (between positions
/// `i` and `i+1`) carries the `(i+1)·(N−1−i)` pairs straddling it; all wires
/// work in parallel, so completion is set by the most loaded one.
pub fn plan_line(
    spec: &NetworkSpec,
    order: &[String],
    k: u64,
) -> Result<DistributionPlan, PlanError> {
    check_key_bits(k)?;
    let n = order.len();
    if n < 2 {
        return Err(PlanError::TooFewStations(n));
    }
    for (i, id) in order.iter().enumerate() {
        if spec.station(id).is_none() {
            return Err(PlanError::UnknownStation(id.clone()));
        }
        if order[..i].contains(id) {
            return Err(PlanError::RepeatedStation(id.clone()));
        }
    }
    let hops = order
        .windows(2)
        .map(|w| {
            spec.wire_between(&w[0], &w[1])
                .ok_or_else(|| PlanError::BrokenChain {
                    a: w[0].clone(),
                    b: w[1].clone(),
                })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut loads = Vec::with_capacity(n - 1);
    for (i, link) in hops.iter().enumerate() {
        let routed = ((i + 1) * (n - 1 - i)) as u64;
        let demand = routed * k;
        loads.push(LinkLoad {
            a: order[i].clone(),
            b: order[i + 1].clone(),
            length: link.length,
            parallel_wires: link.parallel_wires,
            pairs_routed: routed,
            demand_bits: demand,
            duration: pair_time(spec, demand, link.length, link.parallel_wires)?,
        });
    }

    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let path = &loads[i..j];
            pairs.push(PairTask {
                a: order[i].clone(),
                b: order[j].clone(),
                length: path.iter().map(|l| l.length).sum(),
                parallel_wires: path.iter().map(|l| l.parallel_wires).min().unwrap_or(1),
                hops: j - i,
                duration: path.iter().map(|l| l.duration).fold(0.0, f64::max),
            });
        }
    }
    let total = loads.iter().map(|l| l.duration).fold(0.0, f64::max);
    Ok(DistributionPlan {
        mode: PlanMode::Line {
            order: order.to_vec(),
        },
        stations: order.to_vec(),
        rounds: vec![Round {
            pairs,
            bye: None,
            duration: total,
        }],
        link_loads: loads,
        kljn_units_required: 2 * (n as u64 - 1),
        wires_required: n as u64 - 1,
        total_time: total,
        per_pair_key_bits: k,
    })
}

/// One report row per round.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub round: usize,
    pub pairs: String,
    pub pair_count: usize,
    pub bye: String,
    pub ideal_duration: f64,
    /// Ideal duration divided by the simulated key-bit yield per BEP.
    pub effective_duration: f64,
    pub ideal_elapsed: f64,
    pub effective_elapsed: f64,
}

/// Per-round rows with ideal and yield-adjusted effective durations.
pub fn plan_time_summary(
    plan: &DistributionPlan,
    yield_fraction: f64,
) -> Result<Vec<SummaryRow>, PlanError> {
    if plan.rounds.is_empty() {
        return Err(PlanError::EmptyPlan);
    }
    if !(yield_fraction > 0.0 && yield_fraction <= 1.0) {
        return Err(PlanError::BadYield(yield_fraction));
    }
    let mut elapsed = 0.0;
    Ok(plan
        .rounds
        .iter()
        .enumerate()
        .map(|(i, r)| {
            elapsed += r.duration;
            SummaryRow {
                round: i + 1,
                pairs: r
                    .pairs
                    .iter()
                    .map(|p| format!("{}-{}", p.a, p.b))
                    .collect::<Vec<_>>()
                    .join(" "),
                pair_count: r.pairs.len(),
                bye: r.bye.clone().unwrap_or_default(),
                ideal_duration: r.duration,
                effective_duration: r.duration / yield_fraction,
                ideal_elapsed: elapsed,
                effective_elapsed: elapsed / yield_fraction,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::LinkConfig;
    use crate::network::{LinkKind, NetLink, Station};
    use std::collections::HashSet;

    fn station(id: &str, kljn: bool) -> Station {
        Station {
            id: id.into(),
            island: "i".into(),
            has_kljn: kljn,
            has_qkd: false,
            kljn_unit_budget: None,
        }
    }

    fn wire(a: &str, b: &str, length: f64) -> NetLink {
        NetLink {
            a: a.into(),
            b: b.into(),
            kind: LinkKind::Wire,
            length,
            parallel_wires: 1,
            qkd_equipped: false,
        }
    }

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("s{i}")).collect()
    }

    fn mesh(n: usize, length: f64) -> NetworkSpec {
        let ids = ids(n);
        let stations = ids.iter().map(|i| station(i, true)).collect();
        let mut links = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                links.push(wire(&ids[i], &ids[j], length));
            }
        }
        NetworkSpec::new(None, stations, links, LinkConfig::default()).unwrap()
    }

    fn star(n: usize, spoke: f64) -> NetworkSpec {
        let ids = ids(n);
        let mut stations = vec![station("hub", false)];
        stations.extend(ids.iter().map(|i| station(i, true)));
        let links = ids.iter().map(|i| wire("hub", i, spoke)).collect();
        NetworkSpec::new(None, stations, links, LinkConfig::default()).unwrap()
    }

    fn line(n: usize, length: f64) -> (NetworkSpec, Vec<String>) {
        let ids = ids(n);
        let stations = ids.iter().map(|i| station(i, true)).collect();
        let links = ids.windows(2).map(|w| wire(&w[0], &w[1], length)).collect();
        (
            NetworkSpec::new(None, stations, links, LinkConfig::default()).unwrap(),
            ids,
        )
    }

    #[test]
    fn hardware_examples() {
        assert_eq!(full_mesh_hardware(10).unwrap(), (90, 45));
        assert_eq!(full_mesh_hardware(2).unwrap(), (2, 1));
        assert_eq!(full_mesh_hardware(3).unwrap(), (6, 3));
        assert_eq!(full_mesh_hardware(1), Err(PlanError::TooFewStations(1)));
    }

    #[test]
    fn mesh_time_is_independent_of_station_count() {
        for n in [2, 4, 8, 12] {
            let p = plan_full_mesh(&mesh(n, 1000.0), 256).unwrap();
            assert!((p.total_time - 2.56).abs() < 1e-12);
            assert_eq!(p.rounds.len(), 1);
            assert_eq!(p.pair_count(), n * (n - 1) / 2);
        }
    }

    #[test]
    fn mesh_time_set_by_longest_pair() {
        let spec = NetworkSpec::new(
            None,
            vec![station("a", true), station("b", true), station("c", true)],
            vec![
                wire("a", "b", 1000.0),
                wire("a", "c", 2000.0),
                wire("b", "c", 1000.0),
            ],
            LinkConfig::default(),
        )
        .unwrap();
        let p = plan_full_mesh(&spec, 256).unwrap();
        assert!((p.total_time - 5.12).abs() < 1e-12);
    }

    #[test]
    fn mesh_missing_link_is_reported() {
        let spec = NetworkSpec::new(
            None,
            vec![station("a", true), station("b", true), station("c", true)],
            vec![wire("a", "b", 1000.0)],
            LinkConfig::default(),
        )
        .unwrap();
        assert!(matches!(
            plan_full_mesh(&spec, 8),
            Err(PlanError::MissingLink { .. })
        ));
    }

    #[test]
    fn star_four_stations() {
        let p = plan_star(&star(4, 500.0), "hub", 256).unwrap();
        assert_eq!(p.rounds.len(), 3);
        assert!(p
            .rounds
            .iter()
            .all(|r| r.pairs.len() == 2 && r.bye.is_none()));
        assert!(p
            .rounds
            .iter()
            .flat_map(|r| &r.pairs)
            .all(|t| t.length == 1000.0));
        assert!((p.total_time - 7.68).abs() < 1e-12);
        assert_eq!((p.kljn_units_required, p.wires_required), (4, 4));
    }

    #[test]
    fn star_two_and_five_stations() {
        let p = plan_star(&star(2, 500.0), "hub", 16).unwrap();
        assert_eq!((p.rounds.len(), p.pair_count()), (1, 1));
        let p = plan_star(&star(5, 500.0), "hub", 16).unwrap();
        assert_eq!(p.rounds.len(), 5);
        assert!(p
            .rounds
            .iter()
            .all(|r| r.pairs.len() == 2 && r.bye.is_some()));
    }

    #[test]
    fn star_errors() {
        assert!(matches!(
            plan_star(&star(4, 500.0), "nowhere", 1),
            Err(PlanError::UnknownStation(_))
        ));
        let spec = star(3, 100.0).with_link(wire("s0", "s1", 5.0)).unwrap();
        let mut stations = spec.stations().to_vec();
        stations.push(station("late", true));
        let spec =
            NetworkSpec::new(None, stations, spec.links().to_vec(), LinkConfig::default()).unwrap();
        assert!(matches!(
            plan_star(&spec, "hub", 1),
            Err(PlanError::MissingSpoke { .. })
        ));
    }

    #[test]
    fn round_robin_covers_every_pair_once() {
        for n in 2..=12 {
            let rounds = round_robin(n);
            let expected_rounds = if n % 2 == 0 { n - 1 } else { n };
            assert_eq!(rounds.len(), expected_rounds, "n = {n}");
            let mut seen = HashSet::new();
            for (pairs, bye) in &rounds {
                let mut busy = HashSet::new();
                for &(a, b) in pairs {
                    assert!(busy.insert(a) && busy.insert(b), "station twice in a round");
                    assert!(seen.insert((a, b)), "pair repeated");
                }
                assert_eq!(bye.is_some(), n % 2 == 1);
            }
            assert_eq!(seen.len(), n * (n - 1) / 2);
        }
    }

    #[test]
    fn line_three_stations() {
        let (spec, order) = line(3, 1000.0);
        let p = plan_line(&spec, &order, 256).unwrap();
        assert!((p.total_time - 5.12).abs() < 1e-12);
        assert_eq!(
            p.link_loads
                .iter()
                .map(|l| l.demand_bits)
                .collect::<Vec<_>>(),
            vec![512, 512]
        );
        assert_eq!((p.kljn_units_required, p.wires_required), (4, 2));
        assert_eq!(p.pair_count(), 3);
    }

    #[test]
    fn line_two_stations_is_single_link() {
        let (spec, order) = line(2, 1000.0);
        let p = plan_line(&spec, &order, 256).unwrap();
        assert!((p.total_time - key_time(256, 1000.0, 2e8).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn line_demand_matches_enumeration_and_grows() {
        let mut last = 0.0;
        for n in 2..=10 {
            let (spec, order) = line(n, 1000.0);
            let p = plan_line(&spec, &order, 8).unwrap();
            for (i, load) in p.link_loads.iter().enumerate() {
                let brute = (0..n)
                    .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                    .filter(|&(a, b)| a <= i && i < b)
                    .count() as u64;
                assert_eq!(load.pairs_routed, brute);
            }
            let central = p.link_loads.iter().map(|l| l.pairs_routed).max().unwrap();
            assert_eq!(central, ((n / 2) * n.div_ceil(2)) as u64);
            assert!(p.total_time >= last);
            last = p.total_time;
        }
    }

    #[test]
    fn line_errors() {
        let (spec, _) = line(3, 10.0);
        let order = vec!["s0".to_string(), "s2".to_string()];
        assert!(matches!(
            plan_line(&spec, &order, 1),
            Err(PlanError::BrokenChain { .. })
        ));
        let order = vec!["s0".to_string(), "s1".to_string(), "s0".to_string()];
        assert!(matches!(
            plan_line(&spec, &order, 1),
            Err(PlanError::RepeatedStation(_))
        ));
    }

    #[test]
    fn parallel_wires_divide_time() {
        let spec = NetworkSpec::new(
            None,
            vec![station("a", true), station("b", true)],
            vec![NetLink {
                parallel_wires: 500,
                ..wire("a", "b", 1000.0)
            }],
            LinkConfig::default(),
        )
        .unwrap();
        let p = plan_full_mesh(&spec, 256).unwrap();
        assert!((p.total_time - 2.56 / 500.0).abs() < 1e-15);
    }

    #[test]
    fn summary_rows() {
        let p = plan_full_mesh(&mesh(4, 1000.0), 256).unwrap();
        let rows = plan_time_summary(&p, 0.5).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].effective_duration - 5.12).abs() < 1e-12);

        let p = plan_star(&star(4, 500.0), "hub", 256).unwrap();
        let rows = plan_time_summary(&p, 0.5).unwrap();
        assert_eq!(rows.len(), 3);
        assert!((rows[2].ideal_elapsed - 7.68).abs() < 1e-12);

        let empty = DistributionPlan {
            rounds: vec![],
            ..p.clone()
        };
        assert_eq!(plan_time_summary(&empty, 0.5), Err(PlanError::EmptyPlan));
        assert_eq!(plan_time_summary(&p, 0.0), Err(PlanError::BadYield(0.0)));
    }
}
