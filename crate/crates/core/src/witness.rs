//! Sampling checks for the properties a loss oracle advertises.
//!
//! Everything here treats the oracle as a black box (value and gradient at
//! sampled points), so the checks stay independent of how a family computes
//! its constants.

use rand::Rng;

use crate::geometry::{FeasibleSet, Vector};
use crate::losses::{sample_in_set, Loss};

/// `||g_fd - g|| / max(1, ||g||)` with central differences of step
/// `1e-6 (1 + ||x||)`.
pub fn finite_difference_error(loss: &dyn Loss, x: &Vector) -> f64 {
    let h = 1e-6 * (1.0 + x.norm());
    let g = loss.gradient(x);
    let mut probe = x.as_slice().to_vec();
    let mut err_sq = 0.0;
    for i in 0..x.dim() {
        let orig = probe[i];
        probe[i] = orig + h;
        let up = loss.value_at(&probe);
        probe[i] = orig - h;
        let down = loss.value_at(&probe);
        probe[i] = orig;
        let fd = (up - down) / (2.0 * h);
        err_sq += (fd - g.as_slice()[i]).powi(2);
    }
    err_sq.sqrt() / g.norm().max(1.0)
}

/// `sqrt(4 H f(x)) - ||∇f(x)||`; nonnegative for nonnegative H-smooth losses.
pub fn self_bounding_slack(loss: &dyn Loss, x: &Vector, smoothness: f64) -> f64 {
    (4.0 * smoothness * loss.value(x).max(0.0)).sqrt() - loss.gradient(x).norm()
}

/// `f(y) - f(x) - <∇f(x), y - x> - (λ/2)||y - x||²`.
pub fn strong_convexity_gap(loss: &dyn Loss, x: &Vector, y: &Vector, lambda: f64) -> f64 {
    let d = y.sub(x).expect("same dimension");
    loss.value(y) - loss.value(x) - loss.gradient(x).dot(&d).expect("same dimension") - 0.5 * lambda * d.norm_sq()
}

/// `exp(-α f(m)) - (exp(-α f(x)) + exp(-α f(y)))/2` at the midpoint `m`.
pub fn exp_concavity_gap(loss: &dyn Loss, x: &Vector, y: &Vector, alpha: f64) -> f64 {
    let m = x.add(y).expect("same dimension").scale(0.5);
    (-alpha * loss.value(&m)).exp() - 0.5 * ((-alpha * loss.value(x)).exp() + (-alpha * loss.value(y)).exp())
}

/// `f(y) - f(x) - <∇f(x), y - x> - (β/2)<∇f(x), y - x>²`.
pub fn curvature_gap(loss: &dyn Loss, x: &Vector, y: &Vector, beta: f64) -> f64 {
    let d = y.sub(x).expect("same dimension");
    let lin = loss.gradient(x).dot(&d).expect("same dimension");
    loss.value(y) - loss.value(x) - lin - 0.5 * beta * lin * lin
}

/// `(f(x) + f(y))/2 - f(m)`.
pub fn convexity_gap(loss: &dyn Loss, x: &Vector, y: &Vector) -> f64 {
    let m = x.add(y).expect("same dimension").scale(0.5);
    0.5 * (loss.value(x) + loss.value(y)) - loss.value(&m)
}

/// Worst values observed by [`check_oracle`]. Gaps are minima (should be
/// >= 0 up to tolerance); errors are maxima.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessSummary {
    pub max_fd_error: f64,
    pub min_value: f64,
    pub max_grad_norm: f64,
    pub min_self_bounding_slack: Option<f64>,
    pub min_convexity_gap: f64,
    pub min_strong_gap: Option<f64>,
    pub min_exp_concavity_gap: Option<f64>,
    pub min_curvature_gap: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct WitnessPlan {
    pub fd_points: usize,
    pub pairs: usize,
    pub point_samples: usize,
    /// G and D for the exp-concave curvature check.
    pub grad_bound: f64,
    pub diameter: f64,
}

/// Samples points and pairs from `set` and evaluates every witness the oracle's
/// tags call for.
pub fn check_oracle<R: Rng + ?Sized>(loss: &dyn Loss, set: &FeasibleSet, plan: &WitnessPlan, rng: &mut R) -> WitnessSummary {
    let tags = loss.tags();
    let mut s = WitnessSummary {
        max_fd_error: 0.0,
        min_value: f64::INFINITY,
        max_grad_norm: 0.0,
        min_self_bounding_slack: None,
        min_convexity_gap: f64::INFINITY,
        min_strong_gap: None,
        min_exp_concavity_gap: None,
        min_curvature_gap: None,
    };
    let min_opt = |slot: &mut Option<f64>, v: f64| *slot = Some(slot.map_or(v, |c| c.min(v)));

    for _ in 0..plan.fd_points {
        let x = sample_in_set(set, rng);
        s.max_fd_error = s.max_fd_error.max(finite_difference_error(loss, &x));
    }
    for _ in 0..plan.point_samples {
        let x = sample_in_set(set, rng);
        s.min_value = s.min_value.min(loss.value(&x));
        s.max_grad_norm = s.max_grad_norm.max(loss.gradient(&x).norm());
        if let (Some(h), true) = (tags.smooth, tags.nonnegative) {
            min_opt(&mut s.min_self_bounding_slack, self_bounding_slack(loss, &x, h));
        }
    }
    for _ in 0..plan.pairs {
        let x = sample_in_set(set, rng);
        let y = sample_in_set(set, rng);
        s.min_convexity_gap = s.min_convexity_gap.min(convexity_gap(loss, &x, &y));
        if let Some(lambda) = tags.strongly_convex {
            min_opt(&mut s.min_strong_gap, strong_convexity_gap(loss, &x, &y, lambda));
        }
        if let Some(alpha) = tags.exp_concave {
            min_opt(&mut s.min_exp_concavity_gap, exp_concavity_gap(loss, &x, &y, alpha));
            let beta = 0.5 * (1.0 / (4.0 * plan.grad_bound * plan.diameter)).min(alpha);
            min_opt(&mut s.min_curvature_gap, curvature_gap(loss, &x, &y, beta));
        }
    }
    s
}
