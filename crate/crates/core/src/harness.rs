//! Config-driven experiment runs behind the `cribmac` binary.
//!
//! A run is a pure function of its config: the channel file is inlined, a
//! `--seed` override is written into the config, and the SHA-256 of the
//! resulting canonical JSON (sorted keys) is stamped into every output.
//! Every output is rendered in memory before the first file is written, so
//! a failing run leaves no partial files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::block_markov::{
    chain_replicas, default_allocation, sample_chain, BlockConfig, ChainReport, Coupling, RhoAllocation,
    TrajectoryEstimate,
};
use crate::error::{Error, Result};
use crate::model::{full_joint, induced_output, CribbingScenario, InputLaw, MacChannel, TargetOutput, WiretapMac};
use crate::prob::ProbVector;
use crate::region::{union_region_estimate, DistributionSearchConfig, Instance, QMode, RegionKind, UnionEstimate};
use crate::resolvability::{mc_expected_kl, CodebookConfig, SimReport};
use crate::sampling::derive_seed;
use crate::secrecy::{simulate_secrecy, Dither, SecrecyCodeConfig, SecrecyReport};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Region,
    Simulate,
    Secrecy,
    Chain,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Region => "region",
            Command::Simulate => "simulate",
            Command::Secrecy => "secrecy",
            Command::Chain => "chain",
        }
    }
}

fn default_kind() -> RegionKind {
    RegionKind::Resolvability
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSection {
    #[serde(default = "default_kind")]
    pub kind: RegionKind,
    /// Defaults to target-Q when a target is given, induced-Q otherwise.
    pub mode: Option<QMode>,
    pub resolution: Option<usize>,
    pub samples: Option<usize>,
    pub u_cardinality_cap: Option<usize>,
    pub target_tol: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub rates: [f64; 2],
    pub n: Vec<usize>,
    pub trials: usize,
}

fn half() -> f64 {
    0.5
}

fn one() -> usize {
    1
}

fn tenth() -> f64 {
    0.1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecrecySection {
    pub r1: f64,
    pub r2: f64,
    pub dither: Dither,
    pub n: Vec<usize>,
    #[serde(default = "one")]
    pub blocks: usize,
    #[serde(default = "half")]
    pub typicality_epsilon: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    pub r: usize,
    pub blocks: usize,
    /// Slack of the default allocation; ignored when `alloc` is given.
    #[serde(default = "tenth")]
    pub epsilon: f64,
    #[serde(default = "half")]
    pub gamma: f64,
    pub alloc: Option<RhoAllocation>,
    #[serde(default)]
    pub coupling: Coupling,
    #[serde(default = "half")]
    pub typicality_epsilon: f64,
    #[serde(default = "one")]
    pub replicas: usize,
    pub trajectories: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(rename = "schema_version")]
    _schema_version: u64,
    channel: Value,
    scenario: Option<String>,
    law: Option<InputLaw>,
    target: Option<ProbVector>,
    #[serde(default)]
    seed: u64,
    region: Option<RegionSection>,
    simulate: Option<SimulateSection>,
    secrecy: Option<SecrecySection>,
    chain: Option<ChainSection>,
}

/// A parsed, normalized experiment config.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Canonical JSON the hash is taken over (channel inlined, seed applied).
    pub canonical: String,
    pub hash: String,
    pub channel: Value,
    pub scenario: Option<CribbingScenario>,
    pub law: Option<InputLaw>,
    pub target: Option<TargetOutput>,
    pub seed: u64,
    pub region: Option<RegionSection>,
    pub simulate: Option<SimulateSection>,
    pub secrecy: Option<SecrecySection>,
    pub chain: Option<ChainSection>,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl ExperimentConfig {
    /// Parses a config file; a string `channel` is a path relative to it.
    pub fn load(path: impl AsRef<Path>, seed_override: Option<u64>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json_str(&text, path.parent(), seed_override)
    }

    pub fn from_json_str(text: &str, base: Option<&Path>, seed_override: Option<u64>) -> Result<Self> {
        let mut value: Value = serde_json::from_str(text)?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| Error::Config("config must be a JSON object".into()))?;
        match obj.get("schema_version").and_then(Value::as_u64) {
            Some(SCHEMA_VERSION) => {}
            other => {
                return Err(Error::Config(format!(
                    "schema_version must be {SCHEMA_VERSION}, got {other:?}"
                )))
            }
        }
        if let Some(Value::String(rel)) = obj.get("channel") {
            let p: PathBuf = base.map_or_else(|| PathBuf::from(rel), |b| b.join(rel));
            let text = fs::read_to_string(&p)
                .map_err(|e| Error::Config(format!("cannot read channel {}: {e}", p.display())))?;
            obj.insert("channel".into(), serde_json::from_str(&text)?);
        }
        if let Some(s) = seed_override {
            obj.insert("seed".into(), Value::from(s));
        }
        let canonical = serde_json::to_string(&value)?;
        let hash = hex(&Sha256::digest(canonical.as_bytes()));
        let raw: RawConfig = serde_json::from_value(value)?;
        let scenario = raw.scenario.as_deref().map(str::parse).transpose()?;
        Ok(ExperimentConfig {
            canonical,
            hash,
            channel: raw.channel,
            scenario,
            law: raw.law,
            target: raw.target.map(|q_z| TargetOutput { q_z }),
            seed: raw.seed,
            region: raw.region,
            simulate: raw.simulate,
            secrecy: raw.secrecy,
            chain: raw.chain,
        })
    }

    fn mac(&self) -> Result<MacChannel> {
        serde_json::from_value(self.channel.clone())
            .map_err(|e| Error::Config(format!("channel is not a valid MAC: {e}")))
    }

    fn wiretap(&self) -> Result<WiretapMac> {
        serde_json::from_value(self.channel.clone())
            .map_err(|e| Error::Config(format!("channel is not a valid wiretap MAC: {e}")))
    }

    fn scenario(&self) -> Result<CribbingScenario> {
        self.scenario
            .ok_or_else(|| Error::Config("missing \"scenario\"".into()))
    }

    fn law(&self) -> Result<&InputLaw> {
        self.law.as_ref().ok_or_else(|| Error::Config("missing \"law\"".into()))
    }

    fn section<'a, T>(&self, s: &'a Option<T>, name: &str) -> Result<&'a T> {
        s.as_ref()
            .ok_or_else(|| Error::Config(format!("missing \"{name}\" section")))
    }
}

/// One rendered output file.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub contents: Vec<u8>,
}

/// Everything a command produces, not yet written.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub command: Command,
    pub config_hash: String,
    pub files: Vec<OutputFile>,
}

impl RunOutput {
    /// Writes every file into `dir` (created if needed); returns the paths.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        self.files
            .iter()
            .map(|f| {
                let p = dir.join(&f.name);
                fs::write(&p, &f.contents)?;
                Ok(p)
            })
            .collect()
    }
}

fn csv_file<R: Serialize>(name: &str, hash: &str, rows: &[R]) -> Result<OutputFile> {
    let mut buf = format!("# config-sha256:{hash}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    Ok(OutputFile {
        name: name.into(),
        contents: buf,
    })
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    config_hash: &'a str,
    command: &'static str,
    result: &'a T,
}

fn json_file<T: Serialize>(name: &str, hash: &str, command: Command, result: &T) -> Result<OutputFile> {
    let mut contents = serde_json::to_vec_pretty(&Stamped {
        config_hash: hash,
        command: command.name(),
        result,
    })?;
    contents.push(b'\n');
    Ok(OutputFile {
        name: name.into(),
        contents,
    })
}

pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<RunOutput> {
    let files = match command {
        Command::Region => cmd_region(cfg)?,
        Command::Simulate => cmd_simulate(cfg)?,
        Command::Secrecy => cmd_secrecy(cfg)?,
        Command::Chain => cmd_chain(cfg)?,
    };
    Ok(RunOutput {
        command,
        config_hash: cfg.hash.clone(),
        files,
    })
}

#[derive(Serialize)]
struct FrontierRow<'a> {
    r1: f64,
    r2: f64,
    law_id: &'a str,
}

pub fn cmd_region(cfg: &ExperimentConfig) -> Result<Vec<OutputFile>> {
    let sec = cfg.section(&cfg.region, "region")?;
    let scenario = cfg.scenario()?;
    let d = DistributionSearchConfig::default();
    let search = DistributionSearchConfig {
        mode: sec.mode.unwrap_or(if cfg.target.is_some() {
            QMode::TargetQ
        } else {
            QMode::InducedQ
        }),
        resolution: sec.resolution.unwrap_or(d.resolution),
        samples: sec.samples.unwrap_or(d.samples),
        u_cardinality_cap: sec.u_cardinality_cap,
        target_tol: sec.target_tol.unwrap_or(d.target_tol),
        seed: cfg.seed,
    };
    let est: UnionEstimate = match sec.kind {
        RegionKind::Resolvability => {
            let mac = cfg.mac()?;
            union_region_estimate(Instance::Mac(&mac), scenario, cfg.target.as_ref(), &search)?
        }
        RegionKind::Secrecy => {
            let w = cfg.wiretap()?;
            union_region_estimate(Instance::Wiretap(&w), scenario, cfg.target.as_ref(), &search)?
        }
    };
    let rows: Vec<FrontierRow> = est
        .frontier
        .iter()
        .map(|p| FrontierRow {
            r1: p.r1,
            r2: p.r2,
            law_id: &p.law_id,
        })
        .collect();
    Ok(vec![
        csv_file("region_frontier.csv", &cfg.hash, &rows)?,
        json_file("region_laws.json", &cfg.hash, Command::Region, &est)?,
    ])
}

#[derive(Serialize)]
struct DecayRow {
    n: usize,
    r1: f64,
    r2: f64,
    trials: usize,
    mean: f64,
    stderr: f64,
}

#[derive(Serialize)]
struct TrialRow {
    trial: usize,
    n: usize,
    r1: f64,
    r2: f64,
    kl_bits: f64,
}

fn checked_ns(ns: &[usize]) -> Result<()> {
    if ns.is_empty() || ns.contains(&0) {
        return Err(Error::Config("n list must be nonempty with positive entries".into()));
    }
    Ok(())
}

pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<Vec<OutputFile>> {
    let sec = cfg.section(&cfg.simulate, "simulate")?;
    let mac = cfg.mac()?;
    let law = cfg.law()?;
    let scenario = cfg.scenario()?;
    checked_ns(&sec.n)?;
    if sec.trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let target = match &cfg.target {
        Some(t) => t.clone(),
        None => TargetOutput {
            q_z: induced_output(&mac, law)?,
        },
    };
    let codebook = |n: usize| CodebookConfig {
        scenario,
        n,
        r1: sec.rates[0],
        r2: sec.rates[1],
        law: law.clone(),
        seed: derive_seed(cfg.seed, n as u64),
    };
    for &n in &sec.n {
        codebook(n).validate(&mac)?;
    }
    let reports: Vec<SimReport> = sec
        .n
        .iter()
        .map(|&n| mc_expected_kl(&codebook(n), &mac, &target, sec.trials))
        .collect::<Result<_>>()?;
    let decay: Vec<DecayRow> = reports
        .iter()
        .map(|r| DecayRow {
            n: r.n,
            r1: r.r1,
            r2: r.r2,
            trials: r.trials,
            mean: r.mean,
            stderr: r.stderr,
        })
        .collect();
    let trials: Vec<TrialRow> = reports
        .iter()
        .flat_map(|r| {
            r.kl_bits.iter().enumerate().map(|(trial, &kl_bits)| TrialRow {
                trial,
                n: r.n,
                r1: r.r1,
                r2: r.r2,
                kl_bits,
            })
        })
        .collect();
    Ok(vec![
        csv_file("simulate_decay.csv", &cfg.hash, &decay)?,
        csv_file("simulate_trials.csv", &cfg.hash, &trials)?,
        json_file("simulate_report.json", &cfg.hash, Command::Simulate, &reports)?,
    ])
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct SecrecyRow {
    n: usize,
    R1: f64,
    R2: f64,
    R1p: f64,
    R2p: f64,
    p_error: f64,
    leakage_bits: f64,
    resolvability_bound_bits: f64,
}

pub fn cmd_secrecy(cfg: &ExperimentConfig) -> Result<Vec<OutputFile>> {
    let sec = cfg.section(&cfg.secrecy, "secrecy")?;
    let wmac = cfg.wiretap()?;
    let law = cfg.law()?;
    let scenario = cfg.scenario()?;
    checked_ns(&sec.n)?;
    let code = |n: usize| SecrecyCodeConfig {
        scenario,
        n,
        blocks: sec.blocks,
        r1: sec.r1,
        r2: sec.r2,
        dither: sec.dither,
        law: law.clone(),
        seed: derive_seed(cfg.seed, n as u64),
        typicality_epsilon: sec.typicality_epsilon,
    };
    for &n in &sec.n {
        code(n).validate(&wmac)?;
    }
    let reports: Vec<SecrecyReport> = sec
        .n
        .iter()
        .map(|&n| simulate_secrecy(&code(n), &wmac))
        .collect::<Result<_>>()?;
    let (r1p, r2p) = sec.dither.totals();
    let rows: Vec<SecrecyRow> = reports
        .iter()
        .map(|r| SecrecyRow {
            n: r.n,
            R1: r.r1,
            R2: r.r2,
            R1p: r1p,
            R2p: r2p,
            p_error: r.p_error,
            leakage_bits: r.leakage_bits,
            resolvability_bound_bits: r.resolvability_bound_bits,
        })
        .collect();
    Ok(vec![
        csv_file("secrecy_sweep.csv", &cfg.hash, &rows)?,
        json_file("secrecy_report.json", &cfg.hash, Command::Secrecy, &reports)?,
    ])
}

#[derive(Serialize)]
struct ChainRow {
    replica: usize,
    block: usize,
    per_block_kl: f64,
    cross_mi: Option<f64>,
    markov_rhs: Option<f64>,
    secrecy_term: f64,
    p_error: f64,
    decoder_failure: f64,
    coupling_distance: Option<f64>,
    coupling_bound: Option<f64>,
}

#[derive(Serialize)]
struct ChainOutput<'a> {
    replicas: &'a [ChainReport],
    trajectories: Option<TrajectoryEstimate>,
}

/// The block configuration a chain section describes.
pub fn chain_block_config(cfg: &ExperimentConfig, mac: &MacChannel) -> Result<BlockConfig> {
    let sec = cfg.section(&cfg.chain, "chain")?;
    let law = cfg.law()?;
    let alloc = match sec.alloc {
        Some(a) => a,
        None => {
            let mut a = default_allocation(&full_joint(mac, law)?, sec.epsilon)?;
            a.gamma = sec.gamma;
            a
        }
    };
    let bc = BlockConfig {
        r: sec.r,
        blocks: sec.blocks,
        alloc,
        law: law.clone(),
        seed: cfg.seed,
        coupling: sec.coupling,
        typicality_epsilon: sec.typicality_epsilon,
    };
    bc.validate(mac)?;
    Ok(bc)
}

pub fn cmd_chain(cfg: &ExperimentConfig) -> Result<Vec<OutputFile>> {
    let sec = cfg.section(&cfg.chain, "chain")?;
    if let Some(s) = cfg.scenario {
        if s != CribbingScenario::StrictlyCausal {
            return Err(Error::Config(format!("chain runs the strictly-causal code, not {s}")));
        }
    }
    if sec.replicas == 0 {
        return Err(Error::Config("replicas must be at least 1".into()));
    }
    let mac = cfg.mac()?;
    let bc = chain_block_config(cfg, &mac)?;
    let reports = chain_replicas(&bc, &mac, sec.replicas)?;
    let trajectories = sec.trajectories.map(|t| sample_chain(&bc, &mac, t)).transpose()?;
    let mut rows = Vec::new();
    for (k, rep) in reports.iter().enumerate() {
        for b in 1..=rep.blocks {
            let gap = rep.coupling_gap.as_ref().and_then(|g| g.iter().find(|c| c.block == b));
            rows.push(ChainRow {
                replica: k,
                block: b,
                per_block_kl: rep.per_block_kl[b - 1],
                cross_mi: rep.cross_mi.get(b - 1).copied(),
                markov_rhs: rep.markov.get(b - 1).map(|m| m.rhs),
                secrecy_term: rep.secrecy_terms[b - 1],
                p_error: rep.p_error[b - 1],
                decoder_failure: rep.decoder_failure[b - 1],
                coupling_distance: gap.map(|g| g.distance),
                coupling_bound: gap.map(|g| g.bound),
            });
        }
    }
    Ok(vec![
        csv_file("chain_blocks.csv", &cfg.hash, &rows)?,
        json_file(
            "chain_report.json",
            &cfg.hash,
            Command::Chain,
            &ChainOutput {
                replicas: &reports,
                trajectories,
            },
        )?,
    ])
}

/// Machine-readable error report printed by the binary.
pub fn error_json(e: &Error) -> String {
    serde_json::json!({ "error": e.kind(), "message": e.to_string() }).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor_channel() -> Value {
        serde_json::to_value(MacChannel::xor()).unwrap()
    }

    fn config(extra: Value) -> ExperimentConfig {
        let mut v = serde_json::json!({ "schema_version": 1, "channel": xor_channel(), "seed": 3 });
        for (k, x) in extra.as_object().unwrap() {
            v[k] = x.clone();
        }
        ExperimentConfig::from_json_str(&v.to_string(), None, None).unwrap()
    }

    #[test]
    fn schema_version_is_required() {
        let e = ExperimentConfig::from_json_str(r#"{"channel": {}}"#, None, None).unwrap_err();
        assert_eq!(e.kind(), "ConfigError");
    }

    #[test]
    fn seed_override_changes_hash() {
        let text = serde_json::json!({ "schema_version": 1, "channel": xor_channel() }).to_string();
        let a = ExperimentConfig::from_json_str(&text, None, None).unwrap();
        let b = ExperimentConfig::from_json_str(&text, None, Some(9)).unwrap();
        assert_ne!(a.hash, b.hash);
        assert_eq!(b.seed, 9);
        let c = ExperimentConfig::from_json_str(&text, None, None).unwrap();
        assert_eq!(a.hash, c.hash);
    }

    #[test]
    fn degraded_region_has_sum_corner() {
        let cfg = config(serde_json::json!({
            "scenario": "degraded",
            "target": [0.5, 0.5],
            "region": { "resolution": 4, "samples": 4 }
        }));
        let out = run(Command::Region, &cfg).unwrap();
        let csv = String::from_utf8(out.files[0].contents.clone()).unwrap();
        assert!(csv.starts_with(&format!("# config-sha256:{}\nr1,r2,law_id\n", cfg.hash)));
        assert!(csv.lines().skip(2).any(|l| l.starts_with("0.0,1.0,")));
    }

    #[test]
    fn single_row_simulation() {
        let cfg = config(serde_json::json!({
            "scenario": "degraded",
            "law": { "joint": [[0.25, 0.25], [0.25, 0.25]] },
            "simulate": { "rates": [0.5, 1.0], "n": [1], "trials": 1 }
        }));
        let out = run(Command::Simulate, &cfg).unwrap();
        let decay = String::from_utf8(out.files[0].contents.clone()).unwrap();
        assert_eq!(decay.lines().count(), 3);
    }

    #[test]
    fn malformed_channel_is_rejected() {
        let text = r#"{"schema_version":1,"channel":{"x1_size":2,"x2_size":2,"z_size":2,"w":[[0.5,0.6]]},
            "scenario":"degraded","region":{}}"#;
        let cfg = ExperimentConfig::from_json_str(text, None, None).unwrap();
        assert_eq!(run(Command::Region, &cfg).unwrap_err().kind(), "ConfigError");
    }
}
