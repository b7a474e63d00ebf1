//! Which station pairs can share keys with unconditional security.
//!
//! A link is unconditionally secure when it is a wire between two KLJN
//! stations, or a QKD-equipped satellite link between two QKD ground
//! stations. Keys travel over chains of such links by trusted-relay
//! forwarding, so two stations can communicate unconditionally securely
//! when they sit in the same connected component of secure links. Any other
//! connected pair only gets conditional (computational) security.

use std::collections::BTreeMap;

use petgraph::algo::astar;
use petgraph::graph::{NodeIndex, UnGraph};
use petgraph::unionfind::UnionFind;
use serde::Serialize;

use crate::error::{KljnError, Result};
use crate::network::{LinkKind, NetLink, NetworkSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum SecurityClass {
    None,
    Conditional,
    Unconditional,
}

impl SecurityClass {
    pub fn label(self) -> &'static str {
        match self {
            SecurityClass::None => "none",
            SecurityClass::Conditional => "conditional",
            SecurityClass::Unconditional => "unconditional",
        }
    }
}

/// Whether `link` can carry unconditionally secure keys.
pub fn is_unconditional(spec: &NetworkSpec, link: &NetLink) -> bool {
    let both = |f: fn(&crate::network::Station) -> bool| {
        spec.station(&link.a).is_some_and(f) && spec.station(&link.b).is_some_and(f)
    };
    match link.kind {
        LinkKind::Wire => both(|s| s.has_kljn),
        LinkKind::Satellite => link.qkd_equipped && both(|s| s.has_qkd),
        LinkKind::Wireless => false,
    }
}

/// Indices into `spec.links()` of the unconditionally secure links.
pub fn unconditional_edges(spec: &NetworkSpec) -> Vec<usize> {
    spec.links()
        .iter()
        .enumerate()
        .filter(|(_, l)| is_unconditional(spec, l))
        .map(|(i, _)| i)
        .collect()
}

fn graph_of<'a>(spec: &NetworkSpec, links: impl Iterator<Item = &'a NetLink>) -> UnGraph<(), ()> {
    let index = spec.station_index();
    let mut g = UnGraph::with_capacity(spec.stations().len(), 0);
    for _ in spec.stations() {
        g.add_node(());
    }
    for l in links {
        g.add_edge(
            NodeIndex::new(index[l.a.as_str()]),
            NodeIndex::new(index[l.b.as_str()]),
            (),
        );
    }
    g
}

fn components(spec: &NetworkSpec, links: &[&NetLink]) -> UnionFind<usize> {
    let index = spec.station_index();
    let mut uf = UnionFind::new(spec.stations().len());
    for l in links {
        uf.union(index[l.a.as_str()], index[l.b.as_str()]);
    }
    uf
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrustParams {
    /// Half-saturation count.
    pub kappa: f64,
    /// Weight of a secure satellite link relative to a KLJN wire.
    pub beta: f64,
}

impl Default for TrustParams {
    fn default() -> Self {
        Self {
            kappa: 2.0,
            beta: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrustScore {
    pub station: String,
    pub kljn_links: u32,
    pub secure_satellite_links: u32,
    pub score: f64,
}

/// Saturating trust `C/(C + κ)` with `C = n_kljn + β·n_satellite`.
pub fn trust_from_counts(kljn_links: u32, satellite_links: u32, params: &TrustParams) -> f64 {
    let c = f64::from(kljn_links) + params.beta * f64::from(satellite_links);
    if c == 0.0 {
        0.0
    } else {
        c / (c + params.kappa)
    }
}

pub fn trust_score(spec: &NetworkSpec, station: &str, params: &TrustParams) -> Result<TrustScore> {
    if spec.station(station).is_none() {
        return Err(KljnError::UnknownStation(station.to_string()));
    }
    let (mut kljn, mut sat) = (0u32, 0u32);
    for l in spec.links() {
        if l.other_end(station).is_some() && is_unconditional(spec, l) {
            match l.kind {
                LinkKind::Wire => kljn += 1,
                LinkKind::Satellite => sat += 1,
                LinkKind::Wireless => {}
            }
        }
    }
    Ok(TrustScore {
        station: station.to_string(),
        kljn_links: kljn,
        secure_satellite_links: sat,
        score: trust_from_counts(kljn, sat, params),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecurityReport {
    pub stations: Vec<String>,
    /// `classes[i][j]` for stations `i`, `j`; the diagonal is `None`.
    pub classes: Vec<Vec<SecurityClass>>,
    /// Groups of at least two stations joined by secure links.
    pub components: Vec<Vec<String>>,
    pub trust: Vec<TrustScore>,
}

impl SecurityReport {
    pub fn class_of(&self, a: &str, b: &str) -> Option<SecurityClass> {
        let i = self.stations.iter().position(|s| s == a)?;
        let j = self.stations.iter().position(|s| s == b)?;
        Some(self.classes[i][j])
    }

    /// Unordered pairs `(a, b)` with `a` declared before `b`.
    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str, SecurityClass)> + '_ {
        let n = self.stations.len();
        (0..n).flat_map(move |i| {
            (i + 1..n).map(move |j| {
                (
                    self.stations[i].as_str(),
                    self.stations[j].as_str(),
                    self.classes[i][j],
                )
            })
        })
    }

    pub fn count(&self, class: SecurityClass) -> usize {
        self.pairs().filter(|(_, _, c)| *c == class).count()
    }
}

pub fn classify_pairs(spec: &NetworkSpec, params: &TrustParams) -> Result<SecurityReport> {
    let n = spec.stations().len();
    let secure: Vec<&NetLink> = spec
        .links()
        .iter()
        .filter(|l| is_unconditional(spec, l))
        .collect();
    let all: Vec<&NetLink> = spec.links().iter().collect();
    let secure_uf = components(spec, &secure);
    let any_uf = components(spec, &all);

    let index = spec.station_index();
    let mut on_secure = vec![false; n];
    for l in &secure {
        on_secure[index[l.a.as_str()]] = true;
        on_secure[index[l.b.as_str()]] = true;
    }

    let mut classes = vec![vec![SecurityClass::None; n]; n];
    for (i, row) in classes.iter_mut().enumerate() {
        for (j, class) in row.iter_mut().enumerate() {
            if i == j {
                continue;
            }
            *class = if on_secure[i] && secure_uf.equiv(i, j) {
                SecurityClass::Unconditional
            } else if any_uf.equiv(i, j) {
                SecurityClass::Conditional
            } else {
                SecurityClass::None
            };
        }
    }

    let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (i, s) in spec.stations().iter().enumerate() {
        if on_secure[i] {
            groups
                .entry(secure_uf.find(i))
                .or_default()
                .push(s.id.clone());
        }
    }
    let mut comps: Vec<Vec<String>> = groups.into_values().collect();
    comps.sort_by_key(|c| index[c[0].as_str()]);

    let trust = spec
        .stations()
        .iter()
        .map(|s| trust_score(spec, &s.id, params))
        .collect::<Result<Vec<_>>>()?;

    Ok(SecurityReport {
        stations: spec.stations().iter().map(|s| s.id.clone()).collect(),
        classes,
        components: comps,
        trust,
    })
}

/// A chain of unconditionally secure links from `a` to `b`, if one exists.
pub fn secure_path(spec: &NetworkSpec, a: &str, b: &str) -> Option<Vec<String>> {
    let index = spec.station_index();
    let (&ia, &ib) = (index.get(a)?, index.get(b)?);
    let g = graph_of(
        spec,
        spec.links().iter().filter(|l| is_unconditional(spec, l)),
    );
    let (_, path) = astar(
        &g,
        NodeIndex::new(ia),
        |v| v.index() == ib,
        |_| 1u32,
        |_| 0u32,
    )?;
    Some(
        path.into_iter()
            .map(|v| spec.stations()[v.index()].id.clone())
            .collect(),
    )
}
