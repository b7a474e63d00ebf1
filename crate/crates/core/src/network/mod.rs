//! Stations, links and the validated network description shared by the
//! planner and the security analysis.

mod format;

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use crate::link::LinkConfig;

pub use format::{parse_network_spec, read_network_spec, write_network_spec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Station {
    pub id: String,
    pub island: String,
    pub has_kljn: bool,
    pub has_qkd: bool,
    /// KLJN units installed at the station, when declared.
    pub kljn_unit_budget: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum LinkKind {
    Wire,
    Wireless,
    Satellite,
}

impl LinkKind {
    pub fn keyword(self) -> &'static str {
        match self {
            LinkKind::Wire => "wire",
            LinkKind::Wireless => "wireless",
            LinkKind::Satellite => "satellite",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetLink {
    pub a: String,
    pub b: String,
    pub kind: LinkKind,
    /// Metres.
    pub length: f64,
    /// Parallel screened wires in the cable; 1 on non-wire links.
    pub parallel_wires: u32,
    /// Satellite links only.
    pub qkd_equipped: bool,
}

impl NetLink {
    pub fn joins(&self, x: &str, y: &str) -> bool {
        (self.a == x && self.b == y) || (self.a == y && self.b == x)
    }

    pub fn other_end(&self, id: &str) -> Option<&str> {
        if self.a == id {
            Some(&self.b)
        } else if self.b == id {
            Some(&self.a)
        } else {
            None
        }
    }
}

/// Stable error codes for network descriptions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpecErrorCode {
    Syntax,
    UnknownStation,
    BadLength,
    CrossIsland,
    DuplicateStation,
    DuplicateLink,
    SelfLink,
    BadValue,
    MissingField,
    UnknownField,
    Io,
}

impl SpecErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            SpecErrorCode::Syntax => "E_SYNTAX",
            SpecErrorCode::UnknownStation => "E_UNKNOWN_STATION",
            SpecErrorCode::BadLength => "E_BAD_LENGTH",
            SpecErrorCode::CrossIsland => "E_CROSS_ISLAND",
            SpecErrorCode::DuplicateStation => "E_DUPLICATE_STATION",
            SpecErrorCode::DuplicateLink => "E_DUPLICATE_LINK",
            SpecErrorCode::SelfLink => "E_SELF_LINK",
            SpecErrorCode::BadValue => "E_BAD_VALUE",
            SpecErrorCode::MissingField => "E_MISSING_FIELD",
            SpecErrorCode::UnknownField => "E_UNKNOWN_FIELD",
            SpecErrorCode::Io => "E_IO",
        }
    }
}

impl fmt::Display for SpecErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct SpecError {
    pub code: SpecErrorCode,
    /// 1-based line in the source file, when parsed from text.
    pub line: Option<usize>,
    pub message: String,
}

impl SpecError {
    pub fn new(code: SpecErrorCode, message: impl Into<String>) -> Self {
        Self {
            code,
            line: None,
            message: message.into(),
        }
    }

    pub(crate) fn at(mut self, line: usize) -> Self {
        self.line.get_or_insert(line);
        self
    }
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}: {}", self.code, self.message),
            None => write!(f, "{}: {}", self.code, self.message),
        }
    }
}

/// A validated network: unique station ids, links between declared and
/// distinct stations, positive lengths, wire and wireless links confined to
/// one island.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkSpec {
    name: Option<String>,
    stations: Vec<Station>,
    links: Vec<NetLink>,
    kljn_defaults: LinkConfig,
}

impl NetworkSpec {
    pub fn new(
        name: Option<String>,
        stations: Vec<Station>,
        links: Vec<NetLink>,
        kljn_defaults: LinkConfig,
    ) -> Result<Self, SpecError> {
        let mut spec = Self {
            name,
            stations: Vec::with_capacity(stations.len()),
            links: Vec::with_capacity(links.len()),
            kljn_defaults,
        };
        spec.kljn_defaults
            .validate()
            .map_err(|e| SpecError::new(SpecErrorCode::BadValue, e.to_string()))?;
        for s in stations {
            spec.push_station(s)?;
        }
        for l in links {
            spec.push_link(l)?;
        }
        Ok(spec)
    }

    pub(crate) fn empty(name: Option<String>, kljn_defaults: LinkConfig) -> Self {
        Self {
            name,
            stations: Vec::new(),
            links: Vec::new(),
            kljn_defaults,
        }
    }

    pub(crate) fn push_station(&mut self, s: Station) -> Result<(), SpecError> {
        if s.id.is_empty() || s.island.is_empty() {
            return Err(SpecError::new(
                SpecErrorCode::MissingField,
                "station needs a non-empty id and island",
            ));
        }
        if self.station(&s.id).is_some() {
            return Err(SpecError::new(
                SpecErrorCode::DuplicateStation,
                format!("station `{}` declared twice", s.id),
            ));
        }
        self.stations.push(s);
        Ok(())
    }

    pub(crate) fn push_link(&mut self, l: NetLink) -> Result<(), SpecError> {
        let island_of = |id: &str| {
            self.station(id).map(|s| s.island.clone()).ok_or_else(|| {
                SpecError::new(
                    SpecErrorCode::UnknownStation,
                    format!("link references undeclared station `{id}`"),
                )
            })
        };
        let ia = island_of(&l.a)?;
        let ib = island_of(&l.b)?;
        if l.a == l.b {
            return Err(SpecError::new(
                SpecErrorCode::SelfLink,
                format!("link joins station `{}` to itself", l.a),
            ));
        }
        if !(l.length.is_finite() && l.length > 0.0) {
            return Err(SpecError::new(
                SpecErrorCode::BadLength,
                format!("link length must be positive, got {}", l.length),
            ));
        }
        if l.parallel_wires < 1 {
            return Err(SpecError::new(
                SpecErrorCode::BadValue,
                "a link needs at least one wire",
            ));
        }
        if l.kind != LinkKind::Wire && l.parallel_wires != 1 {
            return Err(SpecError::new(
                SpecErrorCode::BadValue,
                format!(
                    "`wires` applies to wire links only, not {}",
                    l.kind.keyword()
                ),
            ));
        }
        if l.kind != LinkKind::Satellite && l.qkd_equipped {
            return Err(SpecError::new(
                SpecErrorCode::BadValue,
                format!(
                    "`qkd` applies to satellite links only, not {}",
                    l.kind.keyword()
                ),
            ));
        }
        if l.kind != LinkKind::Satellite && ia != ib {
            return Err(SpecError::new(
                SpecErrorCode::CrossIsland,
                format!(
                    "{} link {}–{} crosses islands `{ia}` and `{ib}`; only satellite links may",
                    l.kind.keyword(),
                    l.a,
                    l.b
                ),
            ));
        }
        if self
            .links
            .iter()
            .any(|o| o.kind == l.kind && o.joins(&l.a, &l.b))
        {
            return Err(SpecError::new(
                SpecErrorCode::DuplicateLink,
                format!("duplicate {} link {}–{}", l.kind.keyword(), l.a, l.b),
            ));
        }
        self.links.push(l);
        Ok(())
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn stations(&self) -> &[Station] {
        &self.stations
    }

    pub fn links(&self) -> &[NetLink] {
        &self.links
    }

    pub fn kljn_defaults(&self) -> &LinkConfig {
        &self.kljn_defaults
    }

    pub fn station(&self, id: &str) -> Option<&Station> {
        self.stations.iter().find(|s| s.id == id)
    }

    pub fn station_index(&self) -> HashMap<&str, usize> {
        self.stations
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id.as_str(), i))
            .collect()
    }

    pub fn islands(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.stations
            .iter()
            .filter_map(|s| seen.insert(s.island.as_str()).then_some(s.island.as_str()))
            .collect()
    }

    pub fn kljn_stations(&self) -> impl Iterator<Item = &Station> {
        self.stations.iter().filter(|s| s.has_kljn)
    }

    pub fn wire_between(&self, x: &str, y: &str) -> Option<&NetLink> {
        self.links
            .iter()
            .find(|l| l.kind == LinkKind::Wire && l.joins(x, y))
    }

    /// The sub-network on the first `n` declared stations.
    pub fn restrict(&self, n: usize) -> NetworkSpec {
        let keep: HashSet<&str> = self
            .stations
            .iter()
            .take(n)
            .map(|s| s.id.as_str())
            .collect();
        NetworkSpec {
            name: self.name.clone(),
            stations: self.stations.iter().take(n).cloned().collect(),
            links: self
                .links
                .iter()
                .filter(|l| keep.contains(l.a.as_str()) && keep.contains(l.b.as_str()))
                .cloned()
                .collect(),
            kljn_defaults: self.kljn_defaults.clone(),
        }
    }

    pub fn with_link(&self, link: NetLink) -> Result<NetworkSpec, SpecError> {
        let mut out = self.clone();
        out.push_link(link)?;
        Ok(out)
    }
}
