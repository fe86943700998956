use super::{check_gradient, Expert, ExpertContext};
use crate::error::Result;
use crate::geometry::{FeasibleSet, Vector};
use crate::losses::Loss;

/// Online extra-gradient descent for λ̂-strongly convex smooth losses.
///
/// Keeps a played iterate `x` and an auxiliary iterate `u`. After observing
/// `g_t = ∇f_t(x_t)`:
///
/// ```text
/// S_t     = Σ_{i<=t} ||g_i - g_{i-1}||²        (g_0 = 0)
/// η_t     = 8G² / (λ̂ (S_t + G²/λ̂))
/// u_{t+1} = Π(u_t - η_t g_t)
/// x_{t+1} = Π(u_{t+1} - η_t g_t)
/// ```
///
/// The x-step uses `η_t`, the newest rate computable before `f_{t+1}` arrives.
#[derive(Debug, Clone)]
pub struct OegdStrong {
    x: Vector,
    u: Vector,
    set: FeasibleSet,
    lambda: f64,
    grad_bound: f64,
    variation_sum: f64,
    prev_grad: Vector,
    rate: f64,
    round: usize,
}

impl OegdStrong {
    pub fn new(lambda: f64, ctx: &ExpertContext) -> Self {
        let center = ctx.set.center().clone();
        OegdStrong {
            x: center.clone(),
            u: center,
            set: ctx.set.clone(),
            lambda,
            grad_bound: ctx.grad_bound,
            variation_sum: 0.0,
            prev_grad: Vector::zeros(ctx.set.dim()),
            rate: f64::NAN,
            round: 0,
        }
    }

    pub fn auxiliary(&self) -> &Vector {
        &self.u
    }

    /// `S_t` after the latest update.
    pub fn variation_sum(&self) -> f64 {
        self.variation_sum
    }

    /// `η_t` of the latest update; NaN before the first one.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    fn rate_for(&self, variation_sum: f64) -> f64 {
        let g2 = self.grad_bound * self.grad_bound;
        8.0 * g2 / (self.lambda * (variation_sum + g2 / self.lambda))
    }
}

impl Expert for OegdStrong {
    fn label(&self) -> String {
        "OEGD_STRONG".into()
    }

    fn param(&self) -> f64 {
        self.lambda
    }

    fn predict(&self) -> &Vector {
        &self.x
    }

    fn update(&mut self, loss: &dyn Loss) -> Result<()> {
        let t = self.round + 1;
        let g = loss.gradient(&self.x);
        check_gradient(&g, t)?;
        self.variation_sum += g.distance(&self.prev_grad)?.powi(2);
        self.rate = self.rate_for(self.variation_sum);
        self.u = self.set.project(&self.u.add_scaled(-self.rate, &g)?)?;
        self.x = self.set.project(&self.u.add_scaled(-self.rate, &g)?)?;
        self.prev_grad = g;
        self.round = t;
        Ok(())
    }

    fn round(&self) -> usize {
        self.round
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::losses::SyntheticLoss;

    #[test]
    fn first_round_rate() {
        let g_bound = 2.0;
        let lambda = 0.5;
        let ctx = ExpertContext::new(FeasibleSet::unit_ball(2), g_bound);
        let mut e = OegdStrong::new(lambda, &ctx);
        let f = SyntheticLoss::quadratic(0.5, vec![0.6, -0.2]);
        let g1 = f.gradient(e.predict());
        e.update(&f).unwrap();
        let expected = 8.0 * g_bound * g_bound / (lambda * (g1.norm_sq() + g_bound * g_bound / lambda));
        assert_eq!(e.rate(), expected);
        assert_eq!(e.variation_sum(), g1.norm_sq());
        // u₂ = Π(-η g₁), x₂ = Π(u₂ - η g₁)
        let u2 = ctx.set.project(&g1.scale(-expected)).unwrap();
        assert_eq!(e.auxiliary(), &u2);
        let x2 = ctx.set.project(&u2.add_scaled(-expected, &g1).unwrap()).unwrap();
        assert_eq!(e.predict(), &x2);
    }

    #[test]
    fn rate_is_nonincreasing_and_iterates_feasible() {
        let ctx = ExpertContext::new(FeasibleSet::unit_ball(2), 2.0);
        let mut e = OegdStrong::new(1.0, &ctx);
        let mut last_rate = f64::INFINITY;
        let mut last_sum = 0.0;
        for k in 0..64 {
            let c = vec![0.8 * (k as f64).sin(), 0.5 * (k as f64 * 0.3).cos()];
            e.update(&SyntheticLoss::quadratic(1.0, c)).unwrap();
            assert!(e.rate() <= last_rate);
            assert!(e.variation_sum() >= last_sum);
            last_rate = e.rate();
            last_sum = e.variation_sum();
            assert!(ctx.set.contains(e.predict(), 1e-12));
            assert!(ctx.set.contains(e.auxiliary(), 1e-12));
        }
    }
}
