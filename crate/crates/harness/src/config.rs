//! Experiment configuration, read from TOML.
//!
//! ```toml
//! output_dir = "out/strong"        # optional; --out overrides
//!
//! [stream]
//! class = "strong"                 # strong | expconcave | convex
//! dim = 2
//! horizon = 4096
//! seed = 7
//! true_parameter = 0.5             # λ or α; ignored for convex
//! grad_bound = 2.0
//! noise = 4.0                      # optional, see StreamConfig
//! huber_delta = 1.0                # optional
//!
//! [set]
//! kind = "ball"                    # ball: center, radius | box: lower, upper
//! center = [0.0, 0.0]
//! radius = 1.0
//!
//! [pools]
//! strong = ["OGD_STRONG", "OEGD_STRONG"]
//! expconcave = ["ONS"]
//! convex = ["OGD_CONVEX", "SOGD"]
//!
//! [[baselines]]
//! algorithm = "OGD_STRONG"
//! param = 0.5                      # optional; defaults to the grid pick
//!
//! [comparator]
//! pgd_iters = 2000
//! grid_resolution = 1e-3           # optional, dim <= 2 only
//!
//! [experts]
//! sogd_delta = 1.0
//! ons_rebuild_interval = 512
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;
use usc_core::experts::{DEFAULT_ONS_REBUILD_INTERVAL, DEFAULT_SOGD_DELTA};
use usc_core::losses::DEFAULT_HUBER_DELTA;
use usc_core::{AlgorithmId, AlgorithmSpec, ExpertContext, FeasibleSet, StreamClass, StreamConfig, Vector};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub output_dir: Option<PathBuf>,
    pub stream: StreamSection,
    pub set: SetSpec,
    pub pools: PoolSpec,
    #[serde(default)]
    pub baselines: Vec<BaselineSpec>,
    #[serde(default)]
    pub comparator: ComparatorSpec,
    #[serde(default)]
    pub experts: ExpertSettings,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamSection {
    pub class: String,
    pub dim: usize,
    pub horizon: usize,
    pub seed: u64,
    #[serde(default)]
    pub true_parameter: f64,
    pub grad_bound: f64,
    pub noise: Option<f64>,
    pub huber_delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SetSpec {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoolSpec {
    #[serde(default)]
    pub strong: Vec<String>,
    #[serde(default)]
    pub expconcave: Vec<String>,
    #[serde(default)]
    pub convex: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineSpec {
    pub algorithm: String,
    pub param: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparatorSpec {
    #[serde(default = "default_pgd_iters")]
    pub pgd_iters: usize,
    pub grid_resolution: Option<f64>,
}

fn default_pgd_iters() -> usize {
    2000
}

impl Default for ComparatorSpec {
    fn default() -> Self {
        ComparatorSpec { pgd_iters: default_pgd_iters(), grid_resolution: None }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpertSettings {
    #[serde(default = "default_sogd_delta")]
    pub sogd_delta: f64,
    #[serde(default = "default_rebuild")]
    pub ons_rebuild_interval: usize,
}

fn default_sogd_delta() -> f64 {
    DEFAULT_SOGD_DELTA
}

fn default_rebuild() -> usize {
    DEFAULT_ONS_REBUILD_INTERVAL
}

impl Default for ExpertSettings {
    fn default() -> Self {
        ExpertSettings { sogd_delta: DEFAULT_SOGD_DELTA, ons_rebuild_interval: DEFAULT_ONS_REBUILD_INTERVAL }
    }
}

/// A baseline with its id parsed and its parameter resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Baseline {
    pub algorithm: AlgorithmId,
    pub param: f64,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(&text).map_err(|message| HarnessError::Config { path: path.to_path_buf(), message })
    }

    /// Parses and validates. Errors carry line/column or the offending field.
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> std::result::Result<(), String> {
        self.class()?;
        if self.stream.horizon < 1 {
            return Err("stream.horizon: horizon must be ≥ 1".into());
        }
        if self.stream.dim < 1 {
            return Err("stream.dim: must be ≥ 1".into());
        }
        self.build_set().map_err(|e| format!("set: {e}"))?;
        self.pool_specs()?;
        self.resolved_baselines()?;
        if self.comparator.pgd_iters == 0 {
            return Err("comparator.pgd_iters: must be ≥ 1".into());
        }
        if let Some(r) = self.comparator.grid_resolution {
            if !(r > 0.0 && r.is_finite()) {
                return Err(format!("comparator.grid_resolution: must be > 0, got {r}"));
            }
        }
        if !(self.experts.sogd_delta > 0.0 && self.experts.sogd_delta.is_finite()) {
            return Err(format!("experts.sogd_delta: must be > 0, got {}", self.experts.sogd_delta));
        }
        if self.experts.ons_rebuild_interval == 0 {
            return Err("experts.ons_rebuild_interval: must be ≥ 1".into());
        }
        Ok(())
    }

    pub fn class(&self) -> std::result::Result<StreamClass, String> {
        self.stream.class.parse::<StreamClass>().map_err(|e| format!("stream.class: {e}"))
    }

    pub fn build_set(&self) -> usc_core::Result<FeasibleSet> {
        match &self.set {
            SetSpec::Ball { center, radius } => FeasibleSet::ball(Vector::new(center.clone())?, *radius),
            SetSpec::Box { lower, upper } => {
                FeasibleSet::box_set(Vector::new(lower.clone())?, Vector::new(upper.clone())?)
            }
        }
    }

    pub fn stream_config(&self) -> StreamConfig {
        let s = &self.stream;
        let class = self.class().expect("validated at load");
        let mut cfg = StreamConfig::new(class, s.dim, s.horizon, s.seed, s.true_parameter, s.grad_bound);
        cfg.noise = s.noise;
        cfg.huber_delta = s.huber_delta.unwrap_or(DEFAULT_HUBER_DELTA);
        cfg
    }

    pub fn expert_context(&self) -> usc_core::Result<ExpertContext> {
        let mut ctx = ExpertContext::new(self.build_set()?, self.stream.grad_bound);
        ctx.sogd_delta = self.experts.sogd_delta;
        ctx.ons_rebuild_interval = self.experts.ons_rebuild_interval;
        Ok(ctx)
    }

    /// Pool lists in block order: strong, exp-concave, convex.
    pub fn pool_specs(&self) -> std::result::Result<[Vec<AlgorithmSpec>; 3], String> {
        let parse = |field: &str, names: &[String]| {
            names
                .iter()
                .map(|n| {
                    n.parse::<AlgorithmId>()
                        .map(AlgorithmSpec::from)
                        .map_err(|e| format!("pools.{field}: {e}"))
                })
                .collect::<std::result::Result<Vec<_>, _>>()
        };
        let p = &self.pools;
        let out = [parse("strong", &p.strong)?, parse("expconcave", &p.expconcave)?, parse("convex", &p.convex)?];
        if out.iter().all(|v| v.is_empty()) {
            return Err("pools: at least one algorithm is required".into());
        }
        Ok(out)
    }

    /// Baselines with parameters filled in: explicit values are kept, missing
    /// ones take the largest grid value not above the true parameter (convex
    /// algorithms take 0).
    pub fn resolved_baselines(&self) -> std::result::Result<Vec<Baseline>, String> {
        let grid = usc_core::build_grid(self.stream.horizon.max(1)).map_err(|e| e.to_string())?;
        self.baselines
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let algorithm =
                    b.algorithm.parse::<AlgorithmId>().map_err(|e| format!("baselines[{i}].algorithm: {e}"))?;
                let param = match (algorithm.block(), b.param) {
                    (StreamClass::Convex, _) => 0.0,
                    (_, Some(p)) if p > 0.0 && p.is_finite() => p,
                    (_, Some(p)) => return Err(format!("baselines[{i}].param: must be > 0, got {p}")),
                    (_, None) => grid.select(self.stream.true_parameter).ok_or_else(|| {
                        format!(
                            "baselines[{i}].param: no grid value ≤ true_parameter {}",
                            self.stream.true_parameter
                        )
                    })?,
                };
                Ok(Baseline { algorithm, param })
            })
            .collect()
    }
}
