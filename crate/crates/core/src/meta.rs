//! Adapt-ML-Prod over normalized linearized losses.

use crate::error::{Error, Result};
use crate::geometry::{dot, Vector};

/// Tolerance for the `[0, 1]` range check on normalized losses.
pub const LOSS_RANGE_TOL: f64 = 1e-12;
/// Tolerance for `ℓ_t = Σ p_i ℓ_t^i` against the aggregate's own linearized loss.
pub const MIXTURE_TOL: f64 = 1e-10;

/// `(⟨g, x − x̄⟩ + GD) / (2GD)`, clamped into `[0, 1]` after the range check.
pub fn normalized_expert_loss(g: &Vector, x: &Vector, anchor: &Vector, grad_bound: f64, diameter: f64) -> Result<f64> {
    let diff = x.sub(anchor)?;
    let inner = g.dot(&diff)?;
    normalize(inner, grad_bound * diameter)
}

fn normalize(inner: f64, gd: f64) -> Result<f64> {
    let l = (inner + gd) / (2.0 * gd);
    if !(l >= -LOSS_RANGE_TOL && l <= 1.0 + LOSS_RANGE_TOL) {
        return Err(Error::AssumptionViolation(format!(
            "normalized loss {l} outside [0, 1]; check G and D (|<g, x - anchor>| = {} > GD = {gd})",
            inner.abs()
        )));
    }
    Ok(l.clamp(0.0, 1.0))
}

/// `3 ln|E| + ln(1 + |E|/(2e) (1 + ln(T+1)))`.
pub fn gamma_constant(num_experts: usize, horizon: usize) -> Result<f64> {
    if num_experts < 2 {
        return Err(Error::Config(format!("Γ needs at least 2 experts, got {num_experts}")));
    }
    if horizon < 1 {
        return Err(Error::Config("horizon must be ≥ 1".into()));
    }
    let n = num_experts as f64;
    let t = horizon as f64;
    Ok(3.0 * n.ln() + (n / (2.0 * std::f64::consts::E) * (1.0 + t.ln_1p())).ln_1p())
}

/// Right-hand side of the per-expert second-order guarantee:
/// `Γ/√ln|E| · √(1 + Σ(ℓ_t − ℓ_t^i)²) + 2Γ`.
pub fn second_order_bound(gamma: f64, num_experts: usize, sum_sq_excess: f64) -> f64 {
    gamma / (num_experts as f64).ln().sqrt() * (1.0 + sum_sq_excess).sqrt() + 2.0 * gamma
}

/// Right-hand side of the linearized regret guarantee against expert `i`:
/// `2ΓGD(2 + 1/√ln|E|) + Γ/√ln|E| · √(Σ⟨g_t, x_t − x_t^i⟩²)`.
pub fn linearized_bound(gamma: f64, num_experts: usize, grad_bound: f64, diameter: f64, sum_sq_lin: f64) -> f64 {
    let root_ln = (num_experts as f64).ln().sqrt();
    2.0 * gamma * grad_bound * diameter * (2.0 + 1.0 / root_ln) + gamma / root_ln * sum_sq_lin.sqrt()
}

/// Adapt-ML-Prod on losses in `[0, 1]`.
///
/// Weights live in log space. The recurrence
/// `w_t = (w_{t-1} (1 + η_{t-1} (ℓ_t − ℓ_t^i)))^{η_t/η_{t-1}}` becomes
/// `ln w_t = (η_t/η_{t-1}) (ln w_{t-1} + ln(1 + η_{t-1} r))`, so no
/// renormalization is ever applied: the per-expert exponent would not commute
/// with it.
#[derive(Debug, Clone)]
pub struct AdaptMlProd {
    log_weights: Vec<f64>,
    rates: Vec<f64>,
    cum_sq_excess: Vec<f64>,
    ln_n: f64,
    round: usize,
}

impl AdaptMlProd {
    /// `w_0 = 1/|E|`, `η_0 = min{½, √ln|E|}`.
    pub fn new(num_experts: usize) -> Result<Self> {
        if num_experts < 2 {
            return Err(Error::Config(format!(
                "the meta-algorithm needs at least 2 experts, got {num_experts}"
            )));
        }
        let ln_n = (num_experts as f64).ln();
        Ok(AdaptMlProd {
            log_weights: vec![-ln_n; num_experts],
            rates: vec![0.5f64.min(ln_n.sqrt()); num_experts],
            cum_sq_excess: vec![0.0; num_experts],
            ln_n,
            round: 0,
        })
    }

    /// Starts from explicit weights and rates instead of the default
    /// initialization.
    pub fn with_state(weights: &[f64], rates: &[f64]) -> Result<Self> {
        let mut m = Self::new(weights.len())?;
        if rates.len() != weights.len() {
            return Err(Error::DimensionMismatch { expected: weights.len(), found: rates.len() });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Config("weights must be positive and finite".into()));
        }
        if rates.iter().any(|r| !(*r > 0.0 && *r <= 0.5)) {
            return Err(Error::Config("rates must lie in (0, 1/2]".into()));
        }
        m.log_weights = weights.iter().map(|w| w.ln()).collect();
        m.rates = rates.to_vec();
        Ok(m)
    }

    pub fn num_experts(&self) -> usize {
        self.rates.len()
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn cum_sq_excess(&self) -> &[f64] {
        &self.cum_sq_excess
    }

    /// `p^i ∝ η^i w^i`, computed as a max-shifted softmax of `ln η + ln w`.
    pub fn weights(&self) -> Vec<f64> {
        let scores: Vec<f64> = self.log_weights.iter().zip(&self.rates).map(|(lw, r)| lw + r.ln()).collect();
        let top = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut p: Vec<f64> = scores.iter().map(|s| (s - top).exp()).collect();
        let total: f64 = p.iter().sum();
        for v in &mut p {
            *v /= total;
        }
        p
    }

    /// Feeds one round of expert losses; returns the mixture loss
    /// `ℓ_t = Σ p_t^i ℓ_t^i`.
    pub fn update(&mut self, expert_losses: &[f64]) -> Result<f64> {
        let n = self.num_experts();
        if expert_losses.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: expert_losses.len() });
        }
        let t = self.round + 1;
        if expert_losses.iter().any(|l| !l.is_finite()) {
            return Err(Error::NonFinite { what: "expert loss", round: t });
        }
        let p = self.weights();
        let mixed = dot(&p, expert_losses);
        for i in 0..n {
            let r = mixed - expert_losses[i];
            self.cum_sq_excess[i] += r * r;
            let old = self.rates[i];
            let new = 0.5f64.min((self.ln_n / (1.0 + self.cum_sq_excess[i])).sqrt());
            let base = 1.0 + old * r;
            if base <= 0.0 {
                return Err(Error::Invariant(format!(
                    "non-positive weight base {base} for expert {i} at round {t}"
                )));
            }
            let lw = (new / old) * (self.log_weights[i] + base.ln());
            if !lw.is_finite() {
                return Err(Error::NonFinite { what: "log-weight", round: t });
            }
            self.log_weights[i] = lw;
            self.rates[i] = new;
        }
        self.round = t;
        Ok(mixed)
    }
}

/// Per-round output of [`MetaLearner::update`].
#[derive(Debug, Clone, PartialEq)]
pub struct MetaRound {
    /// `ℓ_t^i` for every expert.
    pub expert_losses: Vec<f64>,
    /// `ℓ_t = Σ p_t^i ℓ_t^i`.
    pub meta_loss: f64,
}

/// Adapt-ML-Prod fed with normalized linearized losses.
///
/// Only the gradient at the aggregate is visible here; the experts' own
/// losses never reach this layer.
#[derive(Debug, Clone)]
pub struct MetaLearner {
    inner: AdaptMlProd,
    anchor: Vector,
    grad_bound: f64,
    diameter: f64,
}

impl MetaLearner {
    pub fn new(num_experts: usize, anchor: Vector, grad_bound: f64, diameter: f64) -> Result<Self> {
        if !(grad_bound > 0.0 && grad_bound.is_finite()) {
            return Err(Error::Config(format!("G must be positive, got {grad_bound}")));
        }
        if !(diameter > 0.0 && diameter.is_finite()) {
            return Err(Error::Config(format!("D must be positive, got {diameter}")));
        }
        Ok(MetaLearner { inner: AdaptMlProd::new(num_experts)?, anchor, grad_bound, diameter })
    }

    pub fn weights(&self) -> Vec<f64> {
        self.inner.weights()
    }

    pub fn anchor(&self) -> &Vector {
        &self.anchor
    }

    pub fn state(&self) -> &AdaptMlProd {
        &self.inner
    }

    pub fn num_experts(&self) -> usize {
        self.inner.num_experts()
    }

    /// One meta round. `x_t` must be the current weighted average of
    /// `points`; this is cross-checked through the mixture identity.
    pub fn update(&mut self, g: &Vector, points: &[Vector], x_t: &Vector) -> Result<MetaRound> {
        let n = self.num_experts();
        if points.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: points.len() });
        }
        let t = self.inner.round() + 1;
        if !g.is_finite() {
            return Err(Error::NonFinite { what: "gradient", round: t });
        }
        let p = self.inner.weights();
        let losses = points
            .iter()
            .map(|x| normalized_expert_loss(g, x, &self.anchor, self.grad_bound, self.diameter))
            .collect::<Result<Vec<f64>>>()?;
        let direct = normalized_expert_loss(g, x_t, &self.anchor, self.grad_bound, self.diameter)?;
        let mixed = dot(&p, &losses);
        if (mixed - direct).abs() > MIXTURE_TOL {
            return Err(Error::Invariant(format!(
                "round {t}: mixture loss {mixed} differs from the aggregate's loss {direct}"
            )));
        }
        let meta_loss = self.inner.update(&losses)?;
        Ok(MetaRound { expert_losses: losses, meta_loss })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn normalized_loss_examples() {
        let (g_b, d) = (2.0, 3.0);
        let xbar = v(&[0.5, -0.5]);
        assert_eq!(normalized_expert_loss(&v(&[1.0, 1.0]), &xbar, &xbar, g_b, d).unwrap(), 0.5);
        let g = v(&[g_b, 0.0]);
        assert_eq!(normalized_expert_loss(&g, &v(&[0.5 + d, -0.5]), &xbar, g_b, d).unwrap(), 1.0);
        assert_eq!(normalized_expert_loss(&g, &v(&[0.5 - d, -0.5]), &xbar, g_b, d).unwrap(), 0.0);
    }

    #[test]
    fn normalized_loss_out_of_range() {
        let g = v(&[3.0, 0.0]);
        let err = normalized_expert_loss(&g, &v(&[1.0, 0.0]), &v(&[0.0, 0.0]), 1.0, 2.0).unwrap_err();
        assert!(matches!(err, Error::AssumptionViolation(_)));
    }

    #[test]
    fn weights_examples() {
        let m = AdaptMlProd::new(4).unwrap();
        assert_eq!(m.weights(), vec![0.25; 4]);
        let m = AdaptMlProd::with_state(&[1.0, 1.0], &[0.5, 0.25]).unwrap();
        let p = m.weights();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((p[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn single_expert_rejected() {
        assert!(matches!(AdaptMlProd::new(1), Err(Error::Config(_))));
        assert!(gamma_constant(1, 10).is_err());
    }

    #[test]
    fn identical_losses_keep_uniform() {
        let mut m = AdaptMlProd::new(3).unwrap();
        for k in 0..50 {
            let l = (k as f64 * 0.37).fract();
            assert!((m.update(&[l, l, l]).unwrap() - l).abs() < 1e-15);
            let p = m.weights();
            for pi in p {
                assert!((pi - 1.0 / 3.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn single_round_by_hand() {
        // |E| = 2: η₀ = min(½, √ln2) = ½, p₁ = (½, ½).
        let mut m = AdaptMlProd::new(2).unwrap();
        let mixed = m.update(&[0.75, 0.25]).unwrap();
        assert_eq!(mixed, 0.5);
        let ln2 = 2f64.ln();
        // r = (−¼, ¼); Σr² = 1/16; η₁ = min(½, √(ln2/(1+1/16))) = ½ since ln2/1.0625 > ¼.
        let eta1 = 0.5f64.min((ln2 / 1.0625).sqrt());
        assert_eq!(eta1, 0.5);
        assert_eq!(m.rates(), &[eta1, eta1]);
        // w₁ = (½ (1 ∓ ⅛))^{1}
        let w: [f64; 2] = [0.5 * (1.0 - 0.125), 0.5 * (1.0 + 0.125)];
        for (lw, w) in m.log_weights().iter().zip(w) {
            assert!((lw - w.ln()).abs() < 1e-15);
        }
        let p = m.weights();
        assert!((p[0] - 0.4375).abs() < 1e-15);
        assert!((p[1] - 0.5625).abs() < 1e-15);
    }

    #[test]
    fn rates_shrink_below_half_with_excess() {
        let mut m = AdaptMlProd::new(2).unwrap();
        for _ in 0..10 {
            m.update(&[1.0, 0.0]).unwrap();
        }
        // the losing expert accumulates excess fast; the winner's excess stays
        // small because the mixture drifts toward it
        let r = m.rates();
        assert!(r[0] < 0.5);
        for i in 0..2 {
            let expected = 0.5f64.min((2f64.ln() / (1.0 + m.cum_sq_excess()[i])).sqrt());
            assert_eq!(r[i], expected);
        }
    }

    #[test]
    fn best_expert_takes_the_lead() {
        let mut m = AdaptMlProd::new(5).unwrap();
        for _ in 0..100 {
            m.update(&[1.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        }
        let p = m.weights();
        let best = (0..5).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
        assert_eq!(best, 1);
        assert!(p[1] > 0.99);
    }

    #[test]
    fn gamma_small_case() {
        let g = gamma_constant(2, 1).unwrap();
        let ln2 = 2f64.ln();
        let direct = 3.0 * ln2 + (1.0 + (1.0 + ln2) / std::f64::consts::E).ln();
        assert!((g - direct).abs() < 1e-14);
    }

    #[test]
    fn meta_rejects_inconsistent_aggregate() {
        let mut m = MetaLearner::new(2, v(&[0.0]), 1.0, 2.0).unwrap();
        let pts = [v(&[-1.0]), v(&[1.0])];
        let err = m.update(&v(&[1.0]), &pts, &v(&[0.5])).unwrap_err();
        assert!(matches!(err, Error::Invariant(_)));
        let ok = m.update(&v(&[1.0]), &pts, &v(&[0.0])).unwrap();
        assert_eq!(ok.expert_losses, vec![0.25, 0.75]);
        assert_eq!(ok.meta_loss, 0.5);
    }
}
