//! The two-layer learner: experts see the original losses, the meta layer
//! sees only the gradient at the aggregate.

use crate::error::{Error, Result};
use crate::experts::PooledExpert;
use crate::geometry::{FeasibleSet, Vector, MEMBERSHIP_TOL};
use crate::losses::Loss;
use crate::meta::MetaLearner;

/// Everything observed in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub t: usize,
    pub x_t: Vector,
    pub expert_points: Vec<Vector>,
    pub weights: Vec<f64>,
    /// `f_t(x_t)`.
    pub loss_value: f64,
    /// `f_t(x_t^i)` for each expert.
    pub expert_values: Vec<f64>,
    pub gradient: Vector,
    pub gradient_norm: f64,
    /// `ℓ_t^i`. All 1/2 when the meta layer is bypassed.
    pub per_expert_linloss: Vec<f64>,
    /// `ℓ_t`.
    pub meta_linloss: f64,
    /// One query at `x_t` plus each expert's own.
    pub gradient_queries: usize,
}

impl RoundRecord {
    /// Index of the heaviest expert, lowest index on ties.
    pub fn top_expert(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.weights.iter().enumerate() {
            if p > self.weights[best] {
                best = i;
            }
        }
        best
    }

    /// Shannon entropy of the weights, in nats.
    pub fn weight_entropy(&self) -> f64 {
        -self.weights.iter().filter(|p| **p > 0.0).map(|p| p * p.ln()).sum::<f64>()
    }
}

pub struct UscLearner {
    experts: Vec<PooledExpert>,
    /// `None` for a single-expert pool, which plays the expert directly.
    meta: Option<MetaLearner>,
    set: FeasibleSet,
    round: usize,
}

impl UscLearner {
    /// Anchors the meta layer at the set center.
    pub fn new(experts: Vec<PooledExpert>, set: FeasibleSet, grad_bound: f64) -> Result<Self> {
        let anchor = set.center().clone();
        Self::with_anchor(experts, set, grad_bound, anchor)
    }

    pub fn with_anchor(experts: Vec<PooledExpert>, set: FeasibleSet, grad_bound: f64, anchor: Vector) -> Result<Self> {
        if experts.is_empty() {
            return Err(Error::Config("USC needs at least one expert".into()));
        }
        if anchor.dim() != set.dim() {
            return Err(Error::DimensionMismatch { expected: set.dim(), found: anchor.dim() });
        }
        if !set.contains(&anchor, MEMBERSHIP_TOL) {
            return Err(Error::Config("anchor must lie in the feasible set".into()));
        }
        for e in &experts {
            if e.expert.predict().dim() != set.dim() {
                return Err(Error::DimensionMismatch { expected: set.dim(), found: e.expert.predict().dim() });
            }
        }
        let meta = if experts.len() >= 2 {
            Some(MetaLearner::new(experts.len(), anchor, grad_bound, set.diameter())?)
        } else {
            None
        };
        Ok(UscLearner { experts, meta, set, round: 0 })
    }

    pub fn experts(&self) -> &[PooledExpert] {
        &self.experts
    }

    pub fn meta(&self) -> Option<&MetaLearner> {
        self.meta.as_ref()
    }

    pub fn set(&self) -> &FeasibleSet {
        &self.set
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn weights(&self) -> Vec<f64> {
        match &self.meta {
            Some(m) => m.weights(),
            None => vec![1.0],
        }
    }

    /// The point the learner plays this round.
    pub fn predict(&self) -> Vector {
        let p = self.weights();
        let points: Vec<&Vector> = self.experts.iter().map(|e| e.expert.predict()).collect();
        aggregate(&p, &points)
    }

    pub fn step(&mut self, f: &dyn Loss) -> Result<RoundRecord> {
        let t = self.round + 1;
        if f.dim() != self.set.dim() {
            return Err(Error::DimensionMismatch { expected: self.set.dim(), found: f.dim() });
        }
        let weights = self.weights();
        let expert_points: Vec<Vector> = self.experts.iter().map(|e| e.expert.predict().clone()).collect();
        let x_t = aggregate(&weights, &expert_points.iter().collect::<Vec<_>>());
        if !self.set.contains(&x_t, MEMBERSHIP_TOL) {
            return Err(Error::Invariant(format!("round {t}: aggregate left the feasible set")));
        }

        let loss_value = f.value(&x_t);
        if !loss_value.is_finite() {
            return Err(Error::NonFinite { what: "loss value", round: t });
        }
        let gradient = f.gradient(&x_t);
        if !gradient.is_finite() {
            return Err(Error::NonFinite { what: "gradient", round: t });
        }

        let (per_expert_linloss, meta_linloss) = match &mut self.meta {
            Some(m) => {
                let r = m.update(&gradient, &expert_points, &x_t)?;
                (r.expert_losses, r.meta_loss)
            }
            None => (vec![0.5], 0.5),
        };

        let mut expert_values = Vec::with_capacity(self.experts.len());
        let mut gradient_queries = 1;
        for (e, x) in self.experts.iter_mut().zip(&expert_points) {
            let v = f.value(x);
            if !v.is_finite() {
                return Err(Error::NonFinite { what: "expert loss value", round: t });
            }
            expert_values.push(v);
            e.expert.update(f)?;
            gradient_queries += e.expert.gradient_queries();
        }
        self.round = t;

        Ok(RoundRecord {
            t,
            gradient_norm: gradient.norm(),
            x_t,
            expert_points,
            weights,
            loss_value,
            expert_values,
            gradient,
            per_expert_linloss,
            meta_linloss,
            gradient_queries,
        })
    }

    /// Runs the whole stream, handing each record to `sink` as it is made.
    pub fn run_with<L: Loss, F: FnMut(RoundRecord) -> Result<()>>(&mut self, stream: &[L], mut sink: F) -> Result<()> {
        for f in stream {
            sink(self.step(f)?)?;
        }
        Ok(())
    }

    pub fn run<L: Loss>(&mut self, stream: &[L]) -> Result<Vec<RoundRecord>> {
        let mut out = Vec::with_capacity(stream.len());
        self.run_with(stream, |r| {
            out.push(r);
            Ok(())
        })?;
        Ok(out)
    }
}

fn aggregate(weights: &[f64], points: &[&Vector]) -> Vector {
    // a convex combination of one repeated point is that point; summing would
    // only add rounding
    if points.iter().all(|p| p == &points[0]) {
        return points[0].clone();
    }
    let mut x = vec![0.0; points[0].dim()];
    for (p, pt) in weights.iter().zip(points) {
        for (xi, v) in x.iter_mut().zip(pt.as_slice()) {
            *xi += p * v;
        }
    }
    Vector::from_vec_unchecked(x)
}
