//! Run configuration: one JSON document, one section per module, with
//! `--section.key value` overrides applied on top.

use std::path::{Path, PathBuf};

use dustlab_core::data::SyntheticConfig;
use dustlab_core::godec::GoDecConfig;
use dustlab_core::network::NetworkConfig;
use dustlab_core::solver::SolverConfig;
use dustlab_core::train::TrainConfig;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSplit {
    Train,
    #[default]
    Test,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleRef {
    pub split: DataSplit,
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecomposeConfig {
    /// Use `Φ(rho, Ŵ)` from the cached mask as the sparse weights; otherwise W = 1.
    pub weighted: bool,
    pub rho: f64,
    pub frames: bool,
}

impl Default for DecomposeConfig {
    fn default() -> Self {
        Self {
            weighted: true,
            rho: 1.0,
            frames: true,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchSource {
    #[default]
    Planted,
    Dataset,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub source: BenchSource,
    pub count: usize,
    pub p: usize,
    pub q: usize,
    pub rank: usize,
    pub fraction: f64,
    pub magnitude: f64,
    pub repeats: usize,
    pub seed: u64,
    pub godec: GoDecConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            source: BenchSource::Planted,
            count: 20,
            p: 1024,
            q: 20,
            rank: 5,
            fraction: 0.05,
            magnitude: 10.0,
            repeats: 5,
            seed: 0,
            godec: GoDecConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    /// Dataset cache read by every command except `gen-data` and planted `bench-mask`.
    pub dataset: Option<PathBuf>,
    pub checkpoints: Vec<PathBuf>,
    /// When set, replaces the data, train and bench seeds.
    pub seed: Option<u64>,
    pub sample: SampleRef,
    pub data: SyntheticConfig,
    pub solver: SolverConfig,
    pub decompose: DecomposeConfig,
    pub network: NetworkConfig,
    pub train: TrainConfig,
    pub bench: BenchConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            output_dir: PathBuf::from("out"),
            dataset: None,
            checkpoints: Vec::new(),
            seed: None,
            sample: SampleRef::default(),
            data: SyntheticConfig::default(),
            solver: SolverConfig::default(),
            decompose: DecomposeConfig::default(),
            network: NetworkConfig::default(),
            train: TrainConfig::default(),
            bench: BenchConfig::default(),
        }
    }
}

impl RunConfig {
    /// Reads `path` (if any), applies `overrides` and rejects unknown keys.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self, String> {
        let mut doc = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| format!("cannot read config {}: {e}", p.display()))?;
                serde_json::from_str::<Value>(&text)
                    .map_err(|e| format!("config {}: {e}", p.display()))?
            }
            None => Value::Object(Map::new()),
        };
        for (key, raw) in overrides {
            set_path(&mut doc, key, parse_value(raw))?;
        }
        let mut cfg: RunConfig =
            serde_json::from_value(doc).map_err(|e| format!("config: {e}"))?;
        if let Some(seed) = cfg.seed {
            cfg.data.seed = seed;
            cfg.train.seed = seed;
            cfg.bench.seed = seed;
        }
        Ok(cfg)
    }
}

/// JSON if it parses as JSON, otherwise a bare string.
fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

fn set_path(doc: &mut Value, key: &str, value: Value) -> Result<(), String> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(format!("bad option --{key}"));
    }
    let mut node = doc;
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| format!("--{key}: {} is not a section", parts[..i].join(".")))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Map::new()));
    }
    unreachable!()
}

/// Splits `--a.b value` / `--a.b=value` pairs.
pub fn parse_overrides(args: &[String]) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let key = arg
            .strip_prefix("--")
            .ok_or_else(|| format!("unexpected argument {arg}"))?;
        match key.split_once('=') {
            Some((k, v)) => out.push((k.to_string(), v.to_string())),
            None => {
                let v = it.next().ok_or_else(|| format!("--{key} needs a value"))?;
                out.push((key.to_string(), v.clone()));
            }
        }
    }
    Ok(out)
}
