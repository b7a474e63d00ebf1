//! Line-oriented `.net` network description.
//!
//! ```text
//! # comment
//! network  name=<token>
//! defaults r_low=<Ω> r_high=<Ω> noise=<V²/Ω> velocity=<m/s> samples=<n> guard=<frac>
//! station  id=<token> island=<token> [kljn=yes|no] [qkd=yes|no] [units=<n>]
//! link     a=<id> b=<id> kind=wire|wireless|satellite length=<m> [wires=<n>] [qkd=yes|no]
//! ```
//!
//! One record per line, fields in any order, `#` starts a comment. `network`
//! and `defaults` may appear at most once; every `defaults` field is
//! optional. Errors carry the 1-based line of the offending record.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{LinkKind, NetLink, NetworkSpec, SpecError, SpecErrorCode, Station};
use crate::link::LinkConfig;
use crate::noise::NoiseScale;

struct Record<'a> {
    line: usize,
    kind: &'a str,
    fields: HashMap<&'a str, &'a str>,
}

impl<'a> Record<'a> {
    fn err(&self, code: SpecErrorCode, msg: impl Into<String>) -> SpecError {
        SpecError::new(code, msg).at(self.line)
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<(), SpecError> {
        let mut keys: Vec<_> = self.fields.keys().collect();
        keys.sort();
        match keys.into_iter().find(|k| !allowed.contains(k)) {
            Some(k) => Err(self.err(
                SpecErrorCode::UnknownField,
                format!("unknown field `{k}` in `{}` record", self.kind),
            )),
            None => Ok(()),
        }
    }

    fn required(&self, key: &str) -> Result<&'a str, SpecError> {
        self.fields.get(key).copied().ok_or_else(|| {
            self.err(
                SpecErrorCode::MissingField,
                format!("`{}` record needs `{key}=`", self.kind),
            )
        })
    }

    fn flag(&self, key: &str, default: bool) -> Result<bool, SpecError> {
        match self.fields.get(key).copied() {
            None => Ok(default),
            Some("yes" | "true") => Ok(true),
            Some("no" | "false") => Ok(false),
            Some(v) => Err(self.err(
                SpecErrorCode::BadValue,
                format!("`{key}` must be yes or no, got `{v}`"),
            )),
        }
    }

    fn number<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, SpecError> {
        self.fields
            .get(key)
            .map(|v| {
                v.parse::<T>().map_err(|_| {
                    self.err(
                        SpecErrorCode::BadValue,
                        format!("`{key}` has malformed value `{v}`"),
                    )
                })
            })
            .transpose()
    }
}

fn tokenize(text: &str) -> Result<Vec<Record<'_>>, SpecError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut parts = body.split_whitespace();
        let kind = parts.next().unwrap_or_default();
        let mut fields = HashMap::new();
        for tok in parts {
            let (k, v) = tok.split_once('=').ok_or_else(|| {
                SpecError::new(
                    SpecErrorCode::Syntax,
                    format!("expected key=value, found `{tok}`"),
                )
                .at(line)
            })?;
            if k.is_empty() || v.is_empty() {
                return Err(SpecError::new(
                    SpecErrorCode::Syntax,
                    format!("empty key or value in `{tok}`"),
                )
                .at(line));
            }
            if fields.insert(k, v).is_some() {
                return Err(
                    SpecError::new(SpecErrorCode::Syntax, format!("field `{k}` repeated")).at(line),
                );
            }
        }
        out.push(Record { line, kind, fields });
    }
    Ok(out)
}

fn parse_defaults(rec: &Record<'_>) -> Result<LinkConfig, SpecError> {
    rec.check_keys(&["r_low", "r_high", "noise", "velocity", "samples", "guard"])?;
    let mut c = LinkConfig::default();
    if let Some(v) = rec.number("r_low")? {
        c.r_low = v;
    }
    if let Some(v) = rec.number("r_high")? {
        c.r_high = v;
    }
    if let Some(v) = rec.number::<f64>("noise")? {
        c.scale =
            NoiseScale::new(v).map_err(|e| rec.err(SpecErrorCode::BadValue, e.to_string()))?;
    }
    if let Some(v) = rec.number("velocity")? {
        c.wave_velocity = v;
    }
    if let Some(v) = rec.number("samples")? {
        c.samples_per_bep = v;
    }
    if let Some(v) = rec.number("guard")? {
        c.guard_fraction = v;
    }
    c.validate()
        .map_err(|e| rec.err(SpecErrorCode::BadValue, e.to_string()))?;
    Ok(c)
}

fn parse_station(rec: &Record<'_>) -> Result<Station, SpecError> {
    rec.check_keys(&["id", "island", "kljn", "qkd", "units"])?;
    Ok(Station {
        id: rec.required("id")?.to_string(),
        island: rec.required("island")?.to_string(),
        has_kljn: rec.flag("kljn", false)?,
        has_qkd: rec.flag("qkd", false)?,
        kljn_unit_budget: rec.number("units")?,
    })
}

fn parse_link(rec: &Record<'_>) -> Result<NetLink, SpecError> {
    rec.check_keys(&["a", "b", "kind", "length", "wires", "qkd"])?;
    let kind = match rec.required("kind")? {
        "wire" => LinkKind::Wire,
        "wireless" => LinkKind::Wireless,
        "satellite" => LinkKind::Satellite,
        other => {
            return Err(rec.err(
                SpecErrorCode::BadValue,
                format!("link kind must be wire, wireless or satellite, got `{other}`"),
            ))
        }
    };
    let length_text = rec.required("length")?;
    let length: f64 = length_text.parse().map_err(|_| {
        rec.err(
            SpecErrorCode::BadLength,
            format!("link length `{length_text}` is not a number"),
        )
    })?;
    Ok(NetLink {
        a: rec.required("a")?.to_string(),
        b: rec.required("b")?.to_string(),
        kind,
        length,
        parallel_wires: rec.number("wires")?.unwrap_or(1),
        qkd_equipped: rec.flag("qkd", false)?,
    })
}

/// Parses and validates a `.net` description.
pub fn parse_network_spec(text: &str) -> Result<NetworkSpec, SpecError> {
    let records = tokenize(text)?;
    let mut name = None;
    let mut defaults: Option<LinkConfig> = None;
    for rec in records.iter() {
        match rec.kind {
            "network" => {
                if name.is_some() {
                    return Err(rec.err(SpecErrorCode::Syntax, "`network` record repeated"));
                }
                rec.check_keys(&["name"])?;
                name = Some(rec.required("name")?.to_string());
            }
            "defaults" => {
                if defaults.is_some() {
                    return Err(rec.err(SpecErrorCode::Syntax, "`defaults` record repeated"));
                }
                defaults = Some(parse_defaults(rec)?);
            }
            "station" | "link" => {}
            other => {
                return Err(rec.err(
                    SpecErrorCode::Syntax,
                    format!(
                        "unknown record `{other}`; expected network, defaults, station or link"
                    ),
                ))
            }
        }
    }

    let mut spec = NetworkSpec::empty(name, defaults.unwrap_or_default());
    for rec in records.iter().filter(|r| r.kind == "station") {
        spec.push_station(parse_station(rec)?)
            .map_err(|e| e.at(rec.line))?;
    }
    for rec in records.iter().filter(|r| r.kind == "link") {
        spec.push_link(parse_link(rec)?)
            .map_err(|e| e.at(rec.line))?;
    }
    Ok(spec)
}

pub fn read_network_spec(path: &Path) -> Result<NetworkSpec, SpecError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        SpecError::new(
            SpecErrorCode::Io,
            format!("cannot read {}: {e}", path.display()),
        )
    })?;
    parse_network_spec(&text)
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Canonical text form; parsing it yields an identical spec.
pub fn write_network_spec(spec: &NetworkSpec) -> String {
    let mut out = String::new();
    if let Some(name) = spec.name() {
        let _ = writeln!(out, "network name={name}");
    }
    let d = spec.kljn_defaults();
    let _ = writeln!(
        out,
        "defaults r_low={} r_high={} noise={} velocity={} samples={} guard={}",
        d.r_low,
        d.r_high,
        d.scale.get(),
        d.wave_velocity,
        d.samples_per_bep,
        d.guard_fraction
    );
    for s in spec.stations() {
        let _ = write!(
            out,
            "station id={} island={} kljn={} qkd={}",
            s.id,
            s.island,
            yes_no(s.has_kljn),
            yes_no(s.has_qkd)
        );
        if let Some(u) = s.kljn_unit_budget {
            let _ = write!(out, " units={u}");
        }
        out.push('\n');
    }
    for l in spec.links() {
        let _ = write!(
            out,
            "link a={} b={} kind={} length={}",
            l.a,
            l.b,
            l.kind.keyword(),
            l.length
        );
        if l.kind == LinkKind::Wire {
            let _ = write!(out, " wires={}", l.parallel_wires);
        }
        if l.kind == LinkKind::Satellite {
            let _ = write!(out, " qkd={}", yes_no(l.qkd_equipped));
        }
        out.push('\n');
    }
    out
}
