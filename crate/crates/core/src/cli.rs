//! The `kljn` command-line front end.
//!
//! Every command takes `--seed` and `--out-dir`, prints a human-readable
//! summary to stdout and writes comma-delimited tables into the output
//! directory. Each table starts with `# key=value` lines recording the run
//! manifest (command, input, seed, parameters), so identical invocations
//! produce byte-identical files.
//!
//! Seeds: `simulate-link` uses the manifest seed as the exchange seed;
//! `eavesdrop` uses it as the evaluation seed, from which attacked trials and
//! the unattacked baseline draw disjoint derived streams; `plan` derives the
//! yield-estimation seed from it. `reach` is deterministic and records the
//! seed only for provenance.
//!
//! Exit codes: 0 success, 1 alarm or abort, 2 usage error, 3 specification error.

use std::fmt::Write as _;
use std::fs::File;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::adversary::{evaluate_attack, AttackKind, DetectionConfig, InjectWaveform};
use crate::link::{estimate_yield, exchange_key, LinkConfig};
use crate::network::{read_network_spec, NetworkSpec, SpecError};
use crate::noise::NoiseScale;
use crate::planner::{plan_full_mesh, plan_line, plan_star, plan_time_summary, PlanError};
use crate::security::{classify_pairs, secure_path, TrustParams};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ALARM: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_SPEC: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "kljn",
    version,
    about = "KLJN key exchange simulator and network planner"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a key exchange over one KLJN link.
    SimulateLink(SimulateLinkArgs),
    /// Evaluate an eavesdropping attack and the intrusion detector.
    Eavesdrop(EavesdropArgs),
    /// Plan key distribution over a network description.
    Plan(PlanArgs),
    /// Classify pairwise security and station trust of a network description.
    Reach(ReachArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct LinkArgs {
    /// Low resistance R_L, Ω.
    #[arg(long, default_value_t = 1_000.0)]
    pub rl: f64,
    /// High resistance R_H, Ω.
    #[arg(long, default_value_t = 10_000.0)]
    pub rh: f64,
    /// Wire length, m.
    #[arg(long, default_value_t = 1_000.0)]
    pub length: f64,
    /// Independent samples per bit exchange period.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Noise intensity a = 4kT_eff·B, V²/Ω.
    #[arg(long, default_value_t = 1e-6)]
    pub noise: f64,
    #[arg(long, default_value_t = 2e8)]
    pub velocity: f64,
    #[arg(long, default_value_t = 0.05)]
    pub guard: f64,
}

impl LinkArgs {
    fn config(&self, wires: u32) -> Result<LinkConfig, CliError> {
        let scale = NoiseScale::new(self.noise).map_err(|e| CliError::Usage(e.to_string()))?;
        let c = LinkConfig {
            r_low: self.rl,
            r_high: self.rh,
            scale,
            length: self.length,
            wave_velocity: self.velocity,
            samples_per_bep: self.samples,
            parallel_wires: wires,
            guard_fraction: self.guard,
            ..LinkConfig::default()
        };
        c.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(c)
    }

    fn params(&self) -> Vec<(String, String)> {
        vec![
            ("rl".into(), self.rl.to_string()),
            ("rh".into(), self.rh.to_string()),
            ("length".into(), self.length.to_string()),
            ("samples".into(), self.samples.to_string()),
            ("noise".into(), self.noise.to_string()),
            ("velocity".into(), self.velocity.to_string()),
            ("guard".into(), self.guard.to_string()),
        ]
    }
}

#[derive(Debug, Clone, Args)]
pub struct SimulateLinkArgs {
    #[command(flatten)]
    pub link: LinkArgs,
    #[arg(long, default_value_t = 256)]
    pub key_bits: u64,
    /// Parallel wires in the cable.
    #[arg(long, default_value_t = 1)]
    pub wires: u32,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AttackName {
    Passive,
    Mitm,
    Inject,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WaveformName {
    Constant,
    Gaussian,
}

#[derive(Debug, Clone, Args)]
pub struct EavesdropArgs {
    #[arg(long, value_enum)]
    pub attack: AttackName,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Injected current for `inject`, A.
    #[arg(long, default_value_t = 1e-3)]
    pub amplitude: f64,
    #[arg(long, value_enum, default_value_t = WaveformName::Constant)]
    pub waveform: WaveformName,
    /// Fraction of samples the parties publish and compare.
    #[arg(long, default_value_t = 0.1)]
    pub reveal: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    /// Confidence level of the reported intervals.
    #[arg(long, default_value_t = 0.95)]
    pub confidence: f64,
    #[command(flatten)]
    pub link: LinkArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeName {
    Mesh,
    Star,
    Line,
}

#[derive(Debug, Clone, Args)]
pub struct PlanArgs {
    /// Network description (`.net`).
    pub spec: PathBuf,
    #[arg(long, value_enum)]
    pub mode: ModeName,
    /// Switching exchange for `star`.
    #[arg(long)]
    pub center: Option<String>,
    /// Comma-separated station order for `line`.
    #[arg(long, value_delimiter = ',')]
    pub order: Option<Vec<String>>,
    #[arg(long, default_value_t = 256)]
    pub key_bits: u64,
    /// Plan over the first N declared stations only.
    #[arg(long)]
    pub limit: Option<usize>,
    /// BEPs simulated to estimate the key-bit yield.
    #[arg(long, default_value_t = 20_000)]
    pub yield_trials: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct ReachArgs {
    /// Network description (`.net`).
    pub spec: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Spec(#[from] SpecError),
    #[error("{0}")]
    Plan(#[from] PlanError),
    #[error("{0}")]
    Sim(#[from] crate::KljnError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Spec(_) | CliError::Plan(_) => EXIT_SPEC,
            CliError::Sim(_) | CliError::Io { .. } => EXIT_ALARM,
        }
    }
}

/// Command, input, seed and parameters of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub input: Option<PathBuf>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub params: Vec<(String, String)>,
}

impl RunManifest {
    fn lines(&self) -> Vec<String> {
        let mut out = vec![format!("command={}", self.command)];
        if let Some(input) = &self.input {
            out.push(format!("input={}", input.display()));
        }
        out.push(format!("seed={}", self.seed));
        out.extend(self.params.iter().map(|(k, v)| format!("{k}={v}")));
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: u8,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

struct Report {
    manifest: RunManifest,
    summary: String,
    files: Vec<PathBuf>,
}

impl Report {
    fn new(manifest: RunManifest) -> Result<Self, CliError> {
        std::fs::create_dir_all(&manifest.out_dir).map_err(|source| CliError::Io {
            path: manifest.out_dir.clone(),
            source,
        })?;
        let mut summary = String::new();
        for line in manifest.lines() {
            let _ = writeln!(summary, "# {line}");
        }
        Ok(Self {
            manifest,
            summary,
            files: Vec::new(),
        })
    }

    fn say(&mut self, line: impl AsRef<str>) {
        self.summary.push_str(line.as_ref());
        self.summary.push('\n');
    }

    fn table<R: Serialize>(&mut self, name: &str, rows: &[R]) -> Result<(), CliError> {
        let path = self.manifest.out_dir.join(name);
        let io = |source| CliError::Io {
            path: path.clone(),
            source,
        };
        let mut file = File::create(&path).map_err(io)?;
        for line in self.manifest.lines() {
            writeln!(file, "# {line}").map_err(io)?;
        }
        let mut w = csv::Writer::from_writer(file);
        for r in rows {
            w.serialize(r).map_err(|e| io(e.into()))?;
        }
        w.flush().map_err(io)?;
        self.files.push(path);
        Ok(())
    }

    fn finish(self, exit_code: u8) -> Outcome {
        Outcome {
            exit_code,
            summary: self.summary,
            files: self.files,
        }
    }
}

/// Seconds rounded to microseconds for the summary text; tables keep full precision.
fn secs(t: f64) -> String {
    let s = format!("{t:.6}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::SimulateLink(a) => simulate_link(&a),
        Command::Eavesdrop(a) => eavesdrop(&a),
        Command::Plan(a) => plan(&a),
        Command::Reach(a) => reach(&a),
    }
}

/// Parses `args` (including the program name) and runs the command. Parse
/// failures come back as usage errors carrying clap's message.
pub fn run_from<I, T>(args: I) -> Result<Outcome, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    run(cli)
}

#[derive(Serialize)]
struct LinkRow {
    key_length: u64,
    beps_used: u64,
    discarded: u64,
    discard_rate: f64,
    disagreements: u64,
    alarms: u64,
    parallel_wires: u32,
    bep_duration: f64,
    ideal_time: f64,
    effective_time: f64,
    key_bits: String,
}

pub fn simulate_link(a: &SimulateLinkArgs) -> Result<Outcome, CliError> {
    if a.key_bits == 0 {
        return Err(CliError::Usage("--key-bits must be at least 1".into()));
    }
    if a.wires == 0 {
        return Err(CliError::Usage("--wires must be at least 1".into()));
    }
    let config = a.link.config(a.wires)?;
    let mut params = a.link.params();
    params.push(("key_bits".into(), a.key_bits.to_string()));
    params.push(("wires".into(), a.wires.to_string()));
    let mut rep = Report::new(RunManifest {
        command: "simulate-link".into(),
        input: None,
        seed: a.common.seed,
        out_dir: a.common.out_dir.clone(),
        params,
    })?;

    let r = exchange_key(&config, a.key_bits, a.common.seed)?;
    let bits: String = r.key_bits.iter().map(|b| char::from(b'0' + b)).collect();
    rep.say(format!(
        "key: {} of {} bits after {} BEPs ({} discarded, {:.1}% discard rate, {} disagreements)",
        r.key_bits.len(),
        a.key_bits,
        r.beps_used,
        r.discarded,
        100.0 * r.discard_rate(),
        r.disagreements
    ));
    rep.say(format!(
        "timing: bep_duration = {} s, ideal_time = {} s, effective_time = {} s over {} wire(s)",
        secs(r.bep_duration),
        secs(r.ideal_time),
        secs(r.elapsed_time),
        r.parallel_wires
    ));
    rep.say(format!("alarms: {}", r.alarms));
    rep.table(
        "simulate_link.csv",
        &[LinkRow {
            key_length: r.key_bits.len() as u64,
            beps_used: r.beps_used,
            discarded: r.discarded,
            discard_rate: r.discard_rate(),
            disagreements: r.disagreements,
            alarms: r.alarms,
            parallel_wires: r.parallel_wires,
            bep_duration: r.bep_duration,
            ideal_time: r.ideal_time,
            effective_time: r.elapsed_time,
            key_bits: bits,
        }],
    )?;
    let code = if r.aborted() {
        rep.say("exchange aborted: intrusion alarm");
        EXIT_ALARM
    } else {
        EXIT_OK
    };
    Ok(rep.finish(code))
}

#[derive(Serialize)]
struct RateRow {
    metric: &'static str,
    rate: f64,
    lower: f64,
    upper: f64,
    successes: u64,
    trials: u64,
    confidence: f64,
}

pub fn eavesdrop(a: &EavesdropArgs) -> Result<Outcome, CliError> {
    let attack = match a.attack {
        AttackName::Passive => AttackKind::PassiveListen,
        AttackName::Mitm => AttackKind::MitmSplit,
        AttackName::Inject => AttackKind::CurrentInject {
            amplitude: a.amplitude,
            waveform: match a.waveform {
                WaveformName::Constant => InjectWaveform::Constant,
                WaveformName::Gaussian => InjectWaveform::Gaussian,
            },
        },
    };
    attack
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let det = DetectionConfig {
        reveal_fraction: a.reveal,
        mismatch_tolerance: a.tolerance,
        ..DetectionConfig::default()
    };
    det.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    if a.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    if !(a.confidence > 0.0 && a.confidence < 1.0) {
        return Err(CliError::Usage("--confidence must lie in (0, 1)".into()));
    }
    let config = a.link.config(1)?;

    let mut params = vec![
        ("attack".to_string(), attack.name().to_string()),
        ("trials".into(), a.trials.to_string()),
        ("reveal".into(), a.reveal.to_string()),
        ("tolerance".into(), a.tolerance.to_string()),
        ("confidence".into(), a.confidence.to_string()),
    ];
    if a.attack == AttackName::Inject {
        params.push(("amplitude".into(), a.amplitude.to_string()));
        params.push((
            "waveform".into(),
            format!("{:?}", a.waveform).to_lowercase(),
        ));
    }
    params.extend(a.link.params());
    let mut rep = Report::new(RunManifest {
        command: "eavesdrop".into(),
        input: None,
        seed: a.common.seed,
        out_dir: a.common.out_dir.clone(),
        params,
    })?;

    let e = evaluate_attack(
        &config,
        &attack,
        &det,
        a.trials,
        a.common.seed,
        a.confidence,
    )?;
    let pct = 100.0 * a.confidence;
    rep.say(format!(
        "eve accuracy: {:.4} ({pct}% CI [{:.4}, {:.4}]) over {} mixed periods",
        e.eve_accuracy.rate, e.eve_accuracy.lower, e.eve_accuracy.upper, e.eve_accuracy.trials
    ));
    rep.say(format!(
        "detection rate: {:.4} ({pct}% CI [{:.4}, {:.4}]) over {} attacked periods",
        e.detection.rate, e.detection.lower, e.detection.upper, e.detection.trials
    ));
    rep.say(format!(
        "false-alarm rate: {:.4} ({pct}% CI [{:.4}, {:.4}]) over {} unattacked periods",
        e.false_alarm.rate, e.false_alarm.lower, e.false_alarm.upper, e.false_alarm.trials
    ));
    let row = |metric, b: crate::stats::BinomialEstimate| RateRow {
        metric,
        rate: b.rate,
        lower: b.lower,
        upper: b.upper,
        successes: b.successes,
        trials: b.trials,
        confidence: b.confidence,
    };
    rep.table(
        "eavesdrop.csv",
        &[
            row("eve_accuracy", e.eve_accuracy),
            row("detection", e.detection),
            row("false_alarm", e.false_alarm),
        ],
    )?;
    Ok(rep.finish(EXIT_OK))
}

fn load_spec(path: &Path, limit: Option<usize>) -> Result<NetworkSpec, CliError> {
    let spec = read_network_spec(path)?;
    Ok(match limit {
        Some(n) => spec.restrict(n),
        None => spec,
    })
}

#[derive(Serialize)]
struct PlanRow {
    mode: String,
    stations: usize,
    kljn_units: u64,
    wires: u64,
    rounds: usize,
    pairs: usize,
    key_bits: u64,
    ideal_total_time: f64,
    yield_fraction: f64,
    effective_total_time: f64,
}

#[derive(Serialize)]
struct PairRow<'a> {
    round: usize,
    a: &'a str,
    b: &'a str,
    loop_length: f64,
    parallel_wires: u32,
    hops: usize,
    ideal_duration: f64,
}

pub fn plan(a: &PlanArgs) -> Result<Outcome, CliError> {
    if a.key_bits == 0 {
        return Err(CliError::Usage("--key-bits must be at least 1".into()));
    }
    if a.yield_trials == 0 {
        return Err(CliError::Usage("--yield-trials must be at least 1".into()));
    }
    let center = match (a.mode, &a.center) {
        (ModeName::Star, None) => {
            return Err(CliError::Usage(
                "--mode star needs --center <exchange station id>".into(),
            ))
        }
        (_, c) => c.clone(),
    };
    let order = match (a.mode, &a.order) {
        (ModeName::Line, None) => {
            return Err(CliError::Usage(
                "--mode line needs --order <id,id,...>".into(),
            ))
        }
        (_, o) => o.clone(),
    };
    let spec = load_spec(&a.spec, a.limit)?;
    let plan = match a.mode {
        ModeName::Mesh => plan_full_mesh(&spec, a.key_bits)?,
        ModeName::Star => plan_star(&spec, center.as_deref().unwrap_or_default(), a.key_bits)?,
        ModeName::Line => plan_line(&spec, order.as_deref().unwrap_or_default(), a.key_bits)?,
    };
    let y = estimate_yield(spec.kljn_defaults(), a.yield_trials, a.common.seed)?;
    if y <= 0.0 {
        return Err(CliError::Usage(
            "the link defaults produce no key bits; relax `guard` or raise `samples`".into(),
        ));
    }
    let rows = plan_time_summary(&plan, y)?;

    let mut params = vec![
        ("mode".to_string(), plan.mode.label()),
        ("key_bits".into(), a.key_bits.to_string()),
        ("yield_trials".into(), a.yield_trials.to_string()),
    ];
    if let Some(n) = a.limit {
        params.push(("limit".into(), n.to_string()));
    }
    let mut rep = Report::new(RunManifest {
        command: "plan".into(),
        input: Some(a.spec.clone()),
        seed: a.common.seed,
        out_dir: a.common.out_dir.clone(),
        params,
    })?;

    let effective = plan.total_time / y;
    rep.say(format!(
        "{} over {} stations: M = {} KLJN units, W = {} wires",
        plan.mode.label(),
        plan.stations.len(),
        plan.kljn_units_required,
        plan.wires_required
    ));
    rep.say(format!(
        "{} round(s), {} pairs, {} bits per pair",
        plan.rounds.len(),
        plan.pair_count(),
        a.key_bits
    ));
    rep.say(format!(
        "total_time: ideal = {} s, effective = {} s (simulated yield {:.4} key bits per BEP)",
        secs(plan.total_time),
        secs(effective),
        y
    ));
    if matches!(plan.mode, crate::planner::PlanMode::Star { .. }) && plan.stations.len() % 2 == 1 {
        rep.say("odd station count: one station sits out each round, N rounds instead of N-1");
    }
    for r in &rows {
        rep.say(format!(
            "round {:>3}: {:>3} pairs, ideal {} s, effective {} s{}",
            r.round,
            r.pair_count,
            secs(r.ideal_duration),
            secs(r.effective_duration),
            if r.bye.is_empty() {
                String::new()
            } else {
                format!(", bye {}", r.bye)
            }
        ));
    }

    rep.table(
        "plan.csv",
        &[PlanRow {
            mode: plan.mode.label(),
            stations: plan.stations.len(),
            kljn_units: plan.kljn_units_required,
            wires: plan.wires_required,
            rounds: plan.rounds.len(),
            pairs: plan.pair_count(),
            key_bits: a.key_bits,
            ideal_total_time: plan.total_time,
            yield_fraction: y,
            effective_total_time: effective,
        }],
    )?;
    rep.table("plan_rounds.csv", &rows)?;
    let pairs: Vec<PairRow<'_>> = plan
        .rounds
        .iter()
        .enumerate()
        .flat_map(|(i, r)| {
            r.pairs.iter().map(move |p| PairRow {
                round: i + 1,
                a: &p.a,
                b: &p.b,
                loop_length: p.length,
                parallel_wires: p.parallel_wires,
                hops: p.hops,
                ideal_duration: p.duration,
            })
        })
        .collect();
    rep.table("plan_pairs.csv", &pairs)?;
    if !plan.link_loads.is_empty() {
        rep.table("plan_links.csv", &plan.link_loads)?;
    }
    Ok(rep.finish(EXIT_OK))
}

#[derive(Serialize)]
struct ReachPairRow<'a> {
    a: &'a str,
    b: &'a str,
    class: &'static str,
    secure_path: String,
}

#[derive(Serialize)]
struct ComponentRow {
    component: usize,
    size: usize,
    stations: String,
}

pub fn reach(a: &ReachArgs) -> Result<Outcome, CliError> {
    if !(a.kappa > 0.0 && a.beta >= 0.0) {
        return Err(CliError::Usage(
            "--kappa must be positive and --beta non-negative".into(),
        ));
    }
    let spec = load_spec(&a.spec, None)?;
    let params = TrustParams {
        kappa: a.kappa,
        beta: a.beta,
    };
    let report = classify_pairs(&spec, &params)?;
    let mut rep = Report::new(RunManifest {
        command: "reach".into(),
        input: Some(a.spec.clone()),
        seed: a.common.seed,
        out_dir: a.common.out_dir.clone(),
        params: vec![
            ("kappa".into(), a.kappa.to_string()),
            ("beta".into(), a.beta.to_string()),
        ],
    })?;

    use crate::security::SecurityClass as C;
    let islands: std::collections::HashMap<&str, &str> = spec
        .stations()
        .iter()
        .map(|s| (s.id.as_str(), s.island.as_str()))
        .collect();
    let cross_unconditional = report
        .pairs()
        .filter(|(x, y, c)| *c == C::Unconditional && islands[x] != islands[y])
        .count();
    rep.say(format!(
        "{} stations on {} island(s): {} unconditional, {} conditional, {} unconnected pairs",
        spec.stations().len(),
        spec.islands().len(),
        report.count(C::Unconditional),
        report.count(C::Conditional),
        report.count(C::None)
    ));
    rep.say(format!(
        "cross-island unconditional pairs: {cross_unconditional}"
    ));
    for (i, c) in report.components.iter().enumerate() {
        rep.say(format!("component {}: {}", i + 1, c.join(" ")));
    }

    let rows: Vec<ReachPairRow<'_>> = report
        .pairs()
        .map(|(x, y, c)| ReachPairRow {
            a: x,
            b: y,
            class: c.label(),
            secure_path: if c == C::Unconditional {
                secure_path(&spec, x, y).unwrap_or_default().join(">")
            } else {
                String::new()
            },
        })
        .collect();
    rep.table("reach_pairs.csv", &rows)?;

    let mut matrix = Vec::with_capacity(report.stations.len());
    for (i, s) in report.stations.iter().enumerate() {
        let mut row = vec![s.clone()];
        row.extend(report.classes[i].iter().enumerate().map(|(j, c)| {
            if i == j {
                "-".to_string()
            } else {
                c.label().to_string()
            }
        }));
        matrix.push(row);
    }
    let mut header = vec!["station".to_string()];
    header.extend(report.stations.iter().cloned());
    let mut with_header = vec![header];
    with_header.extend(matrix);
    rep.table("reach_matrix.csv", &with_header)?;

    let comps: Vec<ComponentRow> = report
        .components
        .iter()
        .enumerate()
        .map(|(i, c)| ComponentRow {
            component: i + 1,
            size: c.len(),
            stations: c.join(" "),
        })
        .collect();
    rep.table("reach_components.csv", &comps)?;
    rep.table("reach_trust.csv", &report.trust)?;
    Ok(rep.finish(EXIT_OK))
}

/// Entry point for the binary: parses `std::env::args`, prints the summary
/// or the error and returns the exit code.
pub fn main_exit() -> u8 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{}", out.summary);
            out.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
