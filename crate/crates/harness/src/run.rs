//! One experiment: USC over the configured pool, standalone baselines, and the
//! comparator, collected into a round-major trace.

use usc_core::{
    build_expert_pool, generate_stream, AlgorithmId, FeasibleSet, Loss, StreamClass, SyntheticLoss, UscLearner,
};

use crate::comparator::{comparator_oracle, ComparatorResult};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};

/// Static description of a learner in the trace.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerInfo {
    pub name: String,
    /// `None` for baselines.
    pub block: Option<StreamClass>,
    pub algorithm: String,
    pub param: f64,
}

/// Everything the bound checks need, in a form that round-trips through CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct RunData {
    pub class: StreamClass,
    pub true_parameter: f64,
    pub grad_bound: f64,
    pub diameter: f64,
    pub dim: usize,
    pub seed: u64,
    /// Largest smoothness constant in the stream.
    pub smoothness: f64,
    pub comparator_point: Vec<f64>,
    pub comparator_gradient_mapping: f64,
    pub experts: Vec<LearnerInfo>,
    pub baselines: Vec<LearnerInfo>,
    /// Per round: `f_t(x_t)`.
    pub usc_loss: Vec<f64>,
    /// Per round: `f_t(x*)`.
    pub comparator_loss: Vec<f64>,
    pub grad_norm: Vec<f64>,
    pub meta_lin: Vec<f64>,
    /// Per round: `max_x ||∇f_t(x) − ∇f_{t−1}(x)||²`.
    pub variation: Vec<f64>,
    pub gradient_queries: Vec<usize>,
    /// Round-major, one entry per expert.
    pub expert_loss: Vec<Vec<f64>>,
    pub expert_lin: Vec<Vec<f64>>,
    pub weights: Vec<Vec<f64>>,
    /// Round-major, one entry per baseline.
    pub baseline_loss: Vec<Vec<f64>>,
}

impl RunData {
    pub fn horizon(&self) -> usize {
        self.usc_loss.len()
    }

    pub fn comparator_total(&self) -> f64 {
        self.comparator_loss.iter().sum()
    }

    pub fn usc_regret(&self) -> f64 {
        self.usc_loss.iter().sum::<f64>() - self.comparator_total()
    }

    pub fn expert_regret(&self, i: usize) -> f64 {
        self.expert_loss.iter().map(|r| r[i]).sum::<f64>() - self.comparator_total()
    }

    pub fn baseline_regret(&self, j: usize) -> f64 {
        self.baseline_loss.iter().map(|r| r[j]).sum::<f64>() - self.comparator_total()
    }

    /// USC regret after each round, against the final comparator.
    pub fn usc_cumregret(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.usc_loss
            .iter()
            .zip(&self.comparator_loss)
            .map(|(u, c)| {
                acc += u - c;
                acc
            })
            .collect()
    }

    pub fn total_variation(&self) -> f64 {
        self.variation.iter().sum()
    }

    pub fn grad_sq_sum(&self) -> f64 {
        self.grad_norm.iter().map(|g| g * g).sum()
    }
}

pub struct RunOutput {
    pub data: RunData,
    pub comparator: ComparatorResult,
}

/// `Σ_t max_x ||∇f_t(x) − ∇f_{t−1}(x)||²` term by term, with `∇f_0 ≡ 0`.
pub fn gradient_variation(stream: &[SyntheticLoss], set: &FeasibleSet) -> Vec<f64> {
    let mut prev: Option<&SyntheticLoss> = None;
    stream
        .iter()
        .map(|f| {
            let v = f.max_gradient_change_sq(prev, set);
            prev = Some(f);
            v
        })
        .collect()
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let set = cfg.build_set()?;
    let stream_cfg = cfg.stream_config();
    let stream = generate_stream(&stream_cfg, &set)?;
    let ctx = cfg.expert_context()?;
    let [strong, exp, con] = cfg.pool_specs().map_err(HarnessError::Invalid)?;
    let pool = build_expert_pool(&strong, &exp, &con, stream_cfg.horizon, &ctx)?;
    let experts: Vec<LearnerInfo> = pool
        .iter()
        .map(|e| LearnerInfo {
            name: e.name(),
            block: Some(e.block),
            algorithm: e.expert.label(),
            param: e.expert.param(),
        })
        .collect();

    let comparator = comparator_oracle(&stream, &set, &cfg.comparator, stream_cfg.seed)?;
    let x_star = usc_core::Vector::new(comparator.point.as_slice().to_vec())?;

    let t_len = stream.len();
    let mut data = RunData {
        class: stream_cfg.class,
        true_parameter: stream_cfg.true_parameter,
        grad_bound: stream_cfg.grad_bound,
        diameter: set.diameter(),
        dim: set.dim(),
        seed: stream_cfg.seed,
        smoothness: stream.iter().filter_map(|f| f.tags().smooth).fold(0.0, f64::max),
        comparator_point: comparator.point.as_slice().to_vec(),
        comparator_gradient_mapping: comparator.gradient_mapping,
        experts,
        baselines: Vec::new(),
        usc_loss: Vec::with_capacity(t_len),
        comparator_loss: stream.iter().map(|f| f.value(&x_star)).collect(),
        grad_norm: Vec::with_capacity(t_len),
        meta_lin: Vec::with_capacity(t_len),
        variation: gradient_variation(&stream, &set),
        gradient_queries: Vec::with_capacity(t_len),
        expert_loss: Vec::with_capacity(t_len),
        expert_lin: Vec::with_capacity(t_len),
        weights: Vec::with_capacity(t_len),
        baseline_loss: vec![Vec::new(); t_len],
    };

    let mut usc = UscLearner::new(pool, set.clone(), stream_cfg.grad_bound)?;
    usc.run_with(&stream, |r| {
        data.usc_loss.push(r.loss_value);
        data.grad_norm.push(r.gradient_norm);
        data.meta_lin.push(r.meta_linloss);
        data.gradient_queries.push(r.gradient_queries);
        data.expert_loss.push(r.expert_values);
        data.expert_lin.push(r.per_expert_linloss);
        data.weights.push(r.weights);
        Ok(())
    })?;

    for b in cfg.resolved_baselines().map_err(HarnessError::Invalid)? {
        let losses = run_single(b.algorithm, b.param, &stream, &ctx)?;
        for (row, l) in data.baseline_loss.iter_mut().zip(losses) {
            row.push(l);
        }
        data.baselines.push(LearnerInfo {
            name: format!("{}[{}]", b.algorithm, b.param),
            block: None,
            algorithm: b.algorithm.to_string(),
            param: b.param,
        });
    }
    Ok(RunOutput { data, comparator })
}

/// Plays one expert alone and returns `f_t(x_t)` per round.
pub fn run_single<L: Loss>(
    algorithm: AlgorithmId,
    param: f64,
    stream: &[L],
    ctx: &usc_core::ExpertContext,
) -> usc_core::Result<Vec<f64>> {
    let mut e = algorithm.instantiate(param, ctx)?;
    let mut out = Vec::with_capacity(stream.len());
    for f in stream {
        out.push(f.value(e.predict()));
        e.update(f)?;
    }
    Ok(out)
}
