use super::{check_gradient, Expert, ExpertContext};
use crate::error::Result;
use crate::geometry::{FeasibleSet, Vector};
use crate::losses::Loss;

#[derive(Debug, Clone, Copy, PartialEq)]
enum StepRule {
    /// `η_t = D / (G √t)`.
    Convex { diameter: f64, grad_bound: f64 },
    /// `η_t = 1 / (λ̂ t)`.
    Strong { lambda: f64 },
}

/// Projected online gradient descent.
#[derive(Debug, Clone)]
pub struct Ogd {
    x: Vector,
    set: FeasibleSet,
    rule: StepRule,
    round: usize,
}

impl Ogd {
    pub fn convex(ctx: &ExpertContext) -> Self {
        Self::with_rule(
            StepRule::Convex { diameter: ctx.diameter(), grad_bound: ctx.grad_bound },
            ctx,
        )
    }

    pub fn strong(lambda: f64, ctx: &ExpertContext) -> Self {
        Self::with_rule(StepRule::Strong { lambda }, ctx)
    }

    fn with_rule(rule: StepRule, ctx: &ExpertContext) -> Self {
        Ogd { x: ctx.set.center().clone(), set: ctx.set.clone(), rule, round: 0 }
    }

    /// Step size used at update number `t` (1-based).
    pub fn step_size(&self, t: usize) -> f64 {
        let t = t as f64;
        match self.rule {
            StepRule::Convex { diameter, grad_bound } => diameter / (grad_bound * t.sqrt()),
            StepRule::Strong { lambda } => 1.0 / (lambda * t),
        }
    }
}

impl Expert for Ogd {
    fn label(&self) -> String {
        match self.rule {
            StepRule::Convex { .. } => "OGD_CONVEX".into(),
            StepRule::Strong { .. } => "OGD_STRONG".into(),
        }
    }

    fn param(&self) -> f64 {
        match self.rule {
            StepRule::Convex { .. } => 0.0,
            StepRule::Strong { lambda } => lambda,
        }
    }

    fn predict(&self) -> &Vector {
        &self.x
    }

    fn update(&mut self, loss: &dyn Loss) -> Result<()> {
        let t = self.round + 1;
        let g = loss.gradient(&self.x);
        check_gradient(&g, t)?;
        let eta = self.step_size(t);
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
    use crate::geometry::FeasibleSet;
    use crate::losses::{ClassTags, SyntheticLoss};

    /// Loss with a constant gradient.
    struct Linear(Vec<f64>);

    impl Loss for Linear {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn value(&self, x: &Vector) -> f64 {
            x.as_slice().iter().zip(&self.0).map(|(a, b)| a * b).sum()
        }
        fn gradient(&self, _x: &Vector) -> Vector {
            Vector::new(self.0.clone()).unwrap_or_else(|_| Vector::from_vec_unchecked(self.0.clone()))
        }
        fn tags(&self) -> ClassTags {
            ClassTags::default()
        }
    }

    fn ctx(g: f64) -> ExpertContext {
        ExpertContext::new(FeasibleSet::unit_ball(2), g)
    }

    #[test]
    fn zero_gradient_keeps_center() {
        let mut e = Ogd::convex(&ctx(1.0));
        e.update(&Linear(vec![0.0, 0.0])).unwrap();
        assert_eq!(e.predict(), &Vector::zeros(2));
        assert_eq!(e.round(), 1);
    }

    #[test]
    fn convex_first_step() {
        // η₁ = D/G, so x₂ = Π(center - (D, 0)) with G = 3, D = 2.
        let g = 3.0;
        let mut e = Ogd::convex(&ctx(g));
        e.update(&Linear(vec![g, 0.0])).unwrap();
        let expected = FeasibleSet::unit_ball(2)
            .project(&Vector::new(vec![-2.0, 0.0]).unwrap())
            .unwrap();
        assert_eq!(e.predict(), &expected);
        assert_eq!(e.predict().as_slice(), &[-1.0, 0.0]);
    }

    #[test]
    fn strong_first_step() {
        let mut e = Ogd::strong(1.0, &ctx(1.0));
        e.update(&Linear(vec![1.0, 0.0])).unwrap();
        assert_eq!(e.predict().as_slice(), &[-1.0, 0.0]);
    }

    #[test]
    fn strong_step_sizes() {
        let e = Ogd::strong(0.5, &ctx(1.0));
        assert_eq!(e.step_size(1), 2.0);
        assert_eq!(e.step_size(4), 0.5);
        let e = Ogd::convex(&ctx(2.0));
        assert_eq!(e.step_size(4), 0.5);
    }

    #[test]
    fn non_finite_gradient_reports_round() {
        let mut e = Ogd::convex(&ctx(1.0));
        e.update(&SyntheticLoss::quadratic(1.0, vec![0.1, 0.1])).unwrap();
        let err = e.update(&Linear(vec![f64::NAN, 0.0])).unwrap_err();
        assert_eq!(err, crate::Error::NonFinite { what: "gradient", round: 2 });
    }
}
