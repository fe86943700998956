//! Vectors, feasible sets and projections.
//!
//! Two domains ship: Euclidean balls and axis-aligned boxes. Both have exact
//! closed-form Euclidean projections; the metric projection used by online
//! Newton step runs a projected-gradient inner loop on top of them.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Absolute slack allowed when checking set membership of a projected point.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

const METRIC_PROJ_TOL: f64 = 1e-10;
const METRIC_PROJ_MAX_STEPS: usize = 10_000;
const POWER_ITERATIONS: usize = 100;

/// A fixed-dimension real vector with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidSet("vector must have dim >= 1".into()));
        }
        if let Some(index) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEntry { index });
        }
        Ok(Vector(entries))
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    /// Builds a vector without the finiteness check. Callers own the invariant.
    pub(crate) fn from_vec_unchecked(entries: Vec<f64>) -> Self {
        Vector(entries)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    fn check_dim(&self, other: &Vector) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn dot(&self, other: &Vector) -> Result<f64> {
        self.check_dim(other)?;
        Ok(dot(&self.0, &other.0))
    }

    pub fn add(&self, other: &Vector) -> Result<Vector> {
        self.check_dim(other)?;
        Ok(Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        self.check_dim(other)?;
        Ok(Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn scale(&self, factor: f64) -> Vector {
        Vector(self.0.iter().map(|v| factor * v).collect())
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, factor: f64, other: &Vector) -> Result<Vector> {
        self.check_dim(other)?;
        Ok(Vector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + factor * b)
                .collect(),
        ))
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.0, &self.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn distance(&self, other: &Vector) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    pub(crate) fn to_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.0)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetKind {
    Ball { center: Vector, radius: f64 },
    Box { lower: Vector, upper: Vector },
}

/// A compact convex domain with a closed-form Euclidean projection.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSet {
    kind: SetKind,
    center: Vector,
    diameter: f64,
}

impl FeasibleSet {
    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidSet(format!("ball radius must be > 0, got {radius}")));
        }
        Ok(FeasibleSet {
            center: center.clone(),
            diameter: 2.0 * radius,
            kind: SetKind::Ball { center, radius },
        })
    }

    pub fn unit_ball(dim: usize) -> Self {
        Self::ball(Vector::zeros(dim), 1.0).expect("unit ball is valid")
    }

    pub fn box_set(lower: Vector, upper: Vector) -> Result<Self> {
        lower.check_dim(&upper)?;
        if let Some(i) = (0..lower.dim()).find(|&i| lower.0[i] >= upper.0[i]) {
            return Err(Error::InvalidSet(format!(
                "box requires lower < upper, violated at coordinate {i}"
            )));
        }
        let center = Vector(
            lower
                .0
                .iter()
                .zip(&upper.0)
                .map(|(l, u)| 0.5 * (l + u))
                .collect(),
        );
        let diameter = upper.distance(&lower)?;
        Ok(FeasibleSet {
            kind: SetKind::Box { lower, upper },
            center,
            diameter,
        })
    }

    pub fn kind(&self) -> &SetKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    fn check_point(&self, p: &Vector) -> Result<()> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: p.dim(),
            });
        }
        Ok(())
    }

    pub fn contains(&self, p: &Vector, tol: f64) -> bool {
        if p.dim() != self.dim() {
            return false;
        }
        match &self.kind {
            SetKind::Ball { center, radius } => {
                p.distance(center).map(|d| d <= radius + tol).unwrap_or(false)
            }
            SetKind::Box { lower, upper } => p
                .0
                .iter()
                .zip(lower.0.iter().zip(&upper.0))
                .all(|(v, (l, u))| *v >= l - tol && *v <= u + tol),
        }
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, p: &Vector) -> Result<Vector> {
        self.check_point(p)?;
        let mut out = p.0.clone();
        self.project_in_place(&mut out);
        Ok(Vector(out))
    }

    pub(crate) fn project_in_place(&self, x: &mut [f64]) {
        match &self.kind {
            SetKind::Ball { center, radius } => {
                let dist = x
                    .iter()
                    .zip(&center.0)
                    .map(|(a, c)| (a - c) * (a - c))
                    .sum::<f64>()
                    .sqrt();
                // Points within a few ulps of the sphere are left untouched so
                // that projecting an already projected point is bitwise stable.
                if dist <= radius * (1.0 + 4.0 * f64::EPSILON) {
                    return;
                }
                let factor = radius / dist;
                for (a, c) in x.iter_mut().zip(&center.0) {
                    *a = c + (*a - c) * factor;
                }
            }
            SetKind::Box { lower, upper } => {
                for ((a, l), u) in x.iter_mut().zip(&lower.0).zip(&upper.0) {
                    *a = a.clamp(*l, *u);
                }
            }
        }
    }

    /// `max_{x in X} ||x - p||`.
    pub fn farthest_distance(&self, p: &Vector) -> Result<f64> {
        self.check_point(p)?;
        Ok(match &self.kind {
            SetKind::Ball { center, radius } => p.distance(center)? + radius,
            SetKind::Box { lower, upper } => p
                .0
                .iter()
                .zip(lower.0.iter().zip(&upper.0))
                .map(|(v, (l, u))| {
                    let d = (v - l).abs().max((u - v).abs());
                    d * d
                })
                .sum::<f64>()
                .sqrt(),
        })
    }

    /// Support half-width `max_{x in X} <w, x - center>`.
    ///
    /// Both shipped sets are symmetric about their center, so this also equals
    /// `max_{x in X} |<w, x - center>|`.
    pub fn half_width(&self, w: &[f64]) -> f64 {
        match &self.kind {
            SetKind::Ball { radius, .. } => radius * dot(w, w).sqrt(),
            SetKind::Box { lower, upper } => w
                .iter()
                .zip(lower.0.iter().zip(&upper.0))
                .map(|(wi, (l, u))| wi.abs() * 0.5 * (u - l))
                .sum(),
        }
    }

    /// `max_{x in X} |<w, x> - s|`.
    pub fn max_abs_affine(&self, w: &[f64], s: f64) -> f64 {
        (dot(w, &self.center.0) - s).abs() + self.half_width(w)
    }

    /// Largest distance from the center to any point of the set.
    pub fn radius(&self) -> f64 {
        match &self.kind {
            SetKind::Ball { radius, .. } => *radius,
            SetKind::Box { .. } => 0.5 * self.diameter,
        }
    }
}

/// Projection in the norm induced by an SPD matrix:
/// `argmin_{x in X} (x - p)^T M (x - p)`.
///
/// Runs projected gradient descent from the Euclidean projection of `p` with
/// step `1 / lambda_max(M)`; `lambda_max` comes from 100 power iterations. Stops
/// once successive iterates move less than 1e-10 or after 10,000 steps.
pub fn generalized_project(set: &FeasibleSet, p: &Vector, metric: &DMatrix<f64>) -> Result<Vector> {
    set.check_point(p)?;
    let d = set.dim();
    if metric.nrows() != d || metric.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: metric.nrows(),
        });
    }
    if metric.clone().cholesky().is_none() {
        return Err(Error::InvalidMetric);
    }
    if set.contains(p, 0.0) {
        return Ok(p.clone());
    }

    let step = 1.0 / max_eigenvalue(metric);
    let target = p.to_dvector();
    let mut x = set.project(p)?.to_dvector();
    let mut next = x.clone();
    for _ in 0..METRIC_PROJ_MAX_STEPS {
        let grad = metric * (&x - &target);
        next.copy_from(&x);
        next.axpy(-step, &grad, 1.0);
        set.project_in_place(next.as_mut_slice());
        let moved = (&next - &x).norm();
        std::mem::swap(&mut x, &mut next);
        if moved < METRIC_PROJ_TOL {
            break;
        }
    }
    Ok(Vector(x.as_slice().to_vec()))
}

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
pub(crate) fn max_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    // Distinct entries keep the start vector off any coordinate-aligned eigenspace.
    let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.1 * i as f64);
    v /= v.norm();
    let mut estimate = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let w = m * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        estimate = v.dot(&w);
        v = w / norm;
    }
    estimate
}
