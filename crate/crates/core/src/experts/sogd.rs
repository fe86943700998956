use super::{check_gradient, Expert, ExpertContext};
use crate::error::Result;
use crate::geometry::{FeasibleSet, Vector};
use crate::losses::Loss;

/// Self-confident online gradient descent: `η_t = D / sqrt(δ + Σ_{s<=t} ||g_s||²)`.
#[derive(Debug, Clone)]
pub struct Sogd {
    x: Vector,
    set: FeasibleSet,
    diameter: f64,
    delta: f64,
    grad_sq_sum: f64,
    round: usize,
}

impl Sogd {
    pub fn new(ctx: &ExpertContext) -> Self {
        Sogd {
            x: ctx.set.center().clone(),
            set: ctx.set.clone(),
            diameter: ctx.diameter(),
            delta: ctx.sogd_delta,
            grad_sq_sum: 0.0,
            round: 0,
        }
    }

    pub fn grad_sq_sum(&self) -> f64 {
        self.grad_sq_sum
    }

    pub fn current_rate(&self) -> f64 {
        self.diameter / (self.delta + self.grad_sq_sum).sqrt()
    }
}

impl Expert for Sogd {
    fn label(&self) -> String {
        "SOGD".into()
    }

    fn param(&self) -> f64 {
        0.0
    }

    fn predict(&self) -> &Vector {
        &self.x
    }

    fn update(&mut self, loss: &dyn Loss) -> Result<()> {
        let t = self.round + 1;
        let g = loss.gradient(&self.x);
        check_gradient(&g, t)?;
        self.grad_sq_sum += g.norm_sq();
        let eta = self.current_rate();
        self.x = self.set.project(&self.x.add_scaled(-eta, &g)?)?;
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
    fn first_step_uses_current_gradient() {
        let ctx = ExpertContext::new(FeasibleSet::unit_ball(2), 2.0);
        let mut e = Sogd::new(&ctx);
        // gradient at 0 of (1/2)||x - (0.5, 0)||² is (-0.5, 0)
        e.update(&SyntheticLoss::quadratic(1.0, vec![0.5, 0.0])).unwrap();
        let eta = 2.0 / (1.0f64 + 0.25).sqrt();
        assert!((e.predict().as_slice()[0] - 0.5 * eta).abs() < 1e-15);
        assert_eq!(e.grad_sq_sum(), 0.25);
    }

    #[test]
    fn accumulator_is_nondecreasing() {
        let ctx = ExpertContext::new(FeasibleSet::unit_ball(2), 2.0);
        let mut e = Sogd::new(&ctx);
        let mut last = 0.0;
        for k in 0..50 {
            let c = vec![(k as f64).sin() * 0.9, (k as f64).cos() * 0.3];
            e.update(&SyntheticLoss::quadratic(1.0, c)).unwrap();
            assert!(e.grad_sq_sum() >= last);
            last = e.grad_sq_sum();
            assert!(ctx.set.contains(e.predict(), 1e-12));
        }
    }
}
