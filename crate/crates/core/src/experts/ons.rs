use nalgebra::{DMatrix, DVector};

use super::{check_gradient, Expert, ExpertContext};
use crate::error::{Error, Result};
use crate::geometry::{generalized_project, FeasibleSet, Vector};
use crate::losses::Loss;

/// Online Newton step for α̂-exp-concave losses.
///
/// `γ = ½ min{1/(4GD), α̂}`, `A_0 = εI` with `ε = 1/(γ²D²)`,
/// `A_t = A_{t-1} + g_t g_tᵀ` and
/// `x_{t+1} = Π^{A_t}(x_t - (1/γ) A_t⁻¹ g_t)`.
///
/// `A_t⁻¹` is tracked with Sherman–Morrison rank-one updates and recomputed
/// from `A_t` every `rebuild_interval` rounds.
#[derive(Debug, Clone)]
pub struct Ons {
    x: Vector,
    set: FeasibleSet,
    alpha: f64,
    gamma: f64,
    matrix: DMatrix<f64>,
    inverse: DMatrix<f64>,
    rebuild_interval: usize,
    round: usize,
}

impl Ons {
    pub fn new(alpha: f64, ctx: &ExpertContext) -> Result<Self> {
        if ctx.ons_rebuild_interval == 0 {
            return Err(Error::Config("ONS rebuild interval must be >= 1".into()));
        }
        let d = ctx.set.dim();
        let diameter = ctx.diameter();
        let gamma = 0.5 * (1.0 / (4.0 * ctx.grad_bound * diameter)).min(alpha);
        let eps = 1.0 / (gamma * gamma * diameter * diameter);
        Ok(Ons {
            x: ctx.set.center().clone(),
            set: ctx.set.clone(),
            alpha,
            gamma,
            matrix: DMatrix::identity(d, d) * eps,
            inverse: DMatrix::identity(d, d) / eps,
            rebuild_interval: ctx.ons_rebuild_interval,
            round: 0,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    fn rank_one_update(&mut self, g: &DVector<f64>) {
        self.matrix.ger(1.0, g, g, 1.0);
        let ag = &self.inverse * g;
        let denom = 1.0 + g.dot(&ag);
        self.inverse.ger(-1.0 / denom, &ag, &ag, 1.0);
    }

    fn rebuild_inverse(&mut self) -> Result<()> {
        let chol = self
            .matrix
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Invariant(format!("ONS matrix lost definiteness at round {}", self.round)))?;
        self.inverse = chol.inverse();
        Ok(())
    }
}

impl Expert for Ons {
    fn label(&self) -> String {
        "ONS".into()
    }

    fn param(&self) -> f64 {
        self.alpha
    }

    fn predict(&self) -> &Vector {
        &self.x
    }

    fn update(&mut self, loss: &dyn Loss) -> Result<()> {
        let t = self.round + 1;
        let g = loss.gradient(&self.x);
        check_gradient(&g, t)?;
        let gv = g.to_dvector();
        self.rank_one_update(&gv);
        self.round = t;
        if t % self.rebuild_interval == 0 {
            self.rebuild_inverse()?;
        }
        let direction = &self.inverse * &gv;
        let target: Vec<f64> = self
            .x
            .as_slice()
            .iter()
            .zip(direction.iter())
            .map(|(x, d)| x - d / self.gamma)
            .collect();
        self.x = generalized_project(&self.set, &Vector::new(target)?, &self.matrix)?;
        Ok(())
    }

    fn round(&self) -> usize {
        self.round
    }
}
