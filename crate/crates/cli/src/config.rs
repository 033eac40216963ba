//! Run configuration: one JSON document with a section per subcommand.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use greenchain_core::anfis::TrainConfig;
use greenchain_core::optim::{Algorithm, OptimizerConfig, PenaltySchedule};
use greenchain_core::sensitivity::{BaselineRow, CalibrationConfig};
use greenchain_core::surface::Axis;
use greenchain_core::{DecisionVector, ModelParameters, PolicyKind};
use serde::Deserialize;
use serde_json::Value;

/// Either a path to a parameter document or the document itself.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ParamsSource {
    Path(PathBuf),
    Inline(Value),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    pub algorithm: Option<Algorithm>,
    pub pop_size: Option<usize>,
    pub max_iter: Option<usize>,
    #[serde(rename = "F")]
    pub f: Option<f64>,
    #[serde(rename = "Pc")]
    pub pc: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub m0: Option<f64>,
    pub m_final: Option<f64>,
    pub penalty: Option<PenaltySchedule>,
    /// Number of seeds (streams) to run.
    pub seeds: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub parameters: Vec<String>,
    pub levels: Option<Vec<f64>>,
    pub reoptimize: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnfisSection {
    pub variable: Option<String>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub points: Option<usize>,
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSection {
    pub x: Option<Axis>,
    pub y: Option<Axis>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSection {
    pub target: Option<BaselineRow>,
    #[serde(default)]
    pub settings: CalibrationConfig,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: Option<ParamsSource>,
    pub policy: Option<PolicyKind>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    pub decisions: Option<DecisionVector>,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub anfis: AnfisSection,
    #[serde(default)]
    pub surface: SurfaceSection,
    #[serde(default)]
    pub calibration: CalibrationSection,
    pub out: Option<PathBuf>,
    /// Directory relative paths in this document resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// The raw parameter document, from `--params` if given, else the config.
    pub fn params_document(&self, flag: Option<&Path>) -> Result<Value> {
        let read = |p: &Path| -> Result<Value> {
            let text = fs::read_to_string(p).with_context(|| format!("reading parameters {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing parameters {}", p.display()))
        };
        match (flag, &self.params) {
            (Some(p), _) => read(p),
            (None, Some(ParamsSource::Path(p))) => read(&self.resolve(p)),
            (None, Some(ParamsSource::Inline(v))) => Ok(v.clone()),
            (None, None) => bail!("no model parameters: set \"params\" in the config or pass --params"),
        }
    }

    /// Parameters validated for `policy`.
    pub fn params(&self, flag: Option<&Path>, policy: PolicyKind) -> Result<ModelParameters> {
        let doc = self.params_document(flag)?;
        ModelParameters::from_json(&doc, Some(policy)).map_err(|e| anyhow!("invalid parameters: {e}"))
    }

    pub fn out_dir(&self, flag: Option<&Path>) -> PathBuf {
        match (flag, &self.out) {
            (Some(p), _) => p.to_path_buf(),
            (None, Some(p)) => self.resolve(p),
            (None, None) => PathBuf::from("out"),
        }
    }

    /// Optimizer settings with config values laid over the algorithm's defaults.
    pub fn optimizer(&self, algorithm: Option<Algorithm>, seed: u64) -> OptimizerConfig {
        let s = &self.optimizer;
        let algo = algorithm.or(s.algorithm).unwrap_or(Algorithm::Pso);
        let mut cfg = OptimizerConfig::for_algorithm(algo, seed);
        if let Some(v) = s.pop_size {
            cfg.pop_size = v;
        }
        if let Some(v) = s.max_iter {
            cfg.max_iter = v;
        }
        if let Some(v) = s.f {
            cfg.f = v;
        }
        if let Some(v) = s.pc {
            cfg.pc = v;
        }
        if let Some(v) = s.c1 {
            cfg.c1 = v;
        }
        if let Some(v) = s.c2 {
            cfg.c2 = v;
        }
        if let Some(v) = s.m0 {
            cfg.m0 = v;
        }
        if s.m_final.is_some() {
            cfg.m_final = s.m_final;
        }
        if let Some(p) = s.penalty {
            cfg.penalty = p;
        }
        cfg
    }

    pub fn train_config(&self) -> TrainConfig {
        let mut t = TrainConfig::default();
        if let Some(e) = self.anfis.epochs {
            t.epochs = e;
        }
        if let Some(lr) = self.anfis.learning_rate {
            t.learning_rate = lr;
        }
        t
    }
}

/// Parse `NAME:LO:HI:N`.
pub fn parse_axis(s: &str) -> Result<Axis, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [name, lo, hi, n] = parts.as_slice() else {
        return Err(format!("expected NAME:LO:HI:N, got {s:?}"));
    };
    let num = |v: &str| v.parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok(Axis::new(
        name,
        num(lo)?,
        num(hi)?,
        n.parse().map_err(|e| format!("{n:?}: {e}"))?,
    ))
}

/// Parse `NAME=VALUE`.
pub fn parse_assignment(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got {s:?}"))?;
    let v = value.trim().parse::<f64>().map_err(|e| format!("{value:?}: {e}"))?;
    Ok((name.trim().to_string(), v))
}
