//! Loss oracles and seeded synthetic loss streams.
//!
//! Three families cover the function classes the learner is built for:
//!
//! * strongly convex: `f(x) = (λ/2)||x - c||² + b`
//! * exp-concave: `f(x) = ½(<a, x> - y)²` with residuals bounded so that
//!   `exp(-α f)` is concave on the domain
//! * general convex: the smoothed absolute deviation `h_δ(<a, x> - y)` with
//!   `h_δ(z) = z²/(2δ)` for `|z| <= δ` and `|z| - δ/2` otherwise
//!
//! Each family has closed-form class constants, gradient bounds and per-round
//! gradient-variation terms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{dot, FeasibleSet, SetKind, Vector};

/// Function-class metadata advertised by an oracle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassTags {
    pub strongly_convex: Option<f64>,
    pub exp_concave: Option<f64>,
    pub smooth: Option<f64>,
    pub nonnegative: bool,
}

/// A per-round loss function exposing value and gradient.
///
/// Implementations are pure: repeated calls with the same point return the
/// same result, and oracles may be shared across threads.
pub trait Loss: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &Vector) -> f64;

    fn gradient(&self, x: &Vector) -> Vector;

    fn tags(&self) -> ClassTags;

    /// `out += weight * ∇f(x)` without allocating, for callers that sum many
    /// oracles.
    fn add_gradient_to(&self, x: &[f64], weight: f64, out: &mut [f64]) {
        let g = self.gradient(&Vector::from_vec_unchecked(x.to_vec()));
        for (o, gi) in out.iter_mut().zip(g.as_slice()) {
            *o += weight * gi;
        }
    }

    /// Value at a raw slice.
    fn value_at(&self, x: &[f64]) -> f64 {
        self.value(&Vector::from_vec_unchecked(x.to_vec()))
    }
}

impl<L: Loss + ?Sized> Loss for &L {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &Vector) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &Vector) -> Vector {
        (**self).gradient(x)
    }
    fn tags(&self) -> ClassTags {
        (**self).tags()
    }
    fn add_gradient_to(&self, x: &[f64], weight: f64, out: &mut [f64]) {
        (**self).add_gradient_to(x, weight, out)
    }
    fn value_at(&self, x: &[f64]) -> f64 {
        (**self).value_at(x)
    }
}

/// The synthetic loss families produced by the stream generators.
#[derive(Debug, Clone, PartialEq)]
pub enum SyntheticLoss {
    /// `(λ/2)||x - c||² + b`.
    Quadratic { curvature: f64, center: Vec<f64>, offset: f64 },
    /// `½(<a, x> - y)²`, advertised as `exp_concavity`-exp-concave on its domain.
    SquaredLinear { coef: Vec<f64>, target: f64, exp_concavity: f64 },
    /// `h_δ(<a, x> - y)` with the smoothed absolute deviation `h_δ`.
    Huber { coef: Vec<f64>, target: f64, delta: f64 },
}

impl SyntheticLoss {
    pub fn quadratic(curvature: f64, center: Vec<f64>) -> Self {
        SyntheticLoss::Quadratic { curvature, center, offset: 0.0 }
    }

    pub fn squared_linear(coef: Vec<f64>, target: f64, exp_concavity: f64) -> Self {
        SyntheticLoss::SquaredLinear { coef, target, exp_concavity }
    }

    pub fn huber(coef: Vec<f64>, target: f64, delta: f64) -> Self {
        SyntheticLoss::Huber { coef, target, delta }
    }

    fn huber_value(z: f64, delta: f64) -> f64 {
        if z.abs() <= delta {
            z * z / (2.0 * delta)
        } else {
            z.abs() - 0.5 * delta
        }
    }

    fn huber_slope(z: f64, delta: f64) -> f64 {
        (z / delta).clamp(-1.0, 1.0)
    }

    fn raw_value(&self, x: &[f64]) -> f64 {
        match self {
            SyntheticLoss::Quadratic { curvature, center, offset } => {
                let sq: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                0.5 * curvature * sq + offset
            }
            SyntheticLoss::SquaredLinear { coef, target, .. } => {
                let r = dot(coef, x) - target;
                0.5 * r * r
            }
            SyntheticLoss::Huber { coef, target, delta } => {
                Self::huber_value(dot(coef, x) - target, *delta)
            }
        }
    }

    fn raw_add_gradient(&self, x: &[f64], weight: f64, out: &mut [f64]) {
        match self {
            SyntheticLoss::Quadratic { curvature, center, .. } => {
                for ((o, a), c) in out.iter_mut().zip(x).zip(center) {
                    *o += weight * curvature * (a - c);
                }
            }
            SyntheticLoss::SquaredLinear { coef, target, .. } => {
                let r = dot(coef, x) - target;
                for (o, a) in out.iter_mut().zip(coef) {
                    *o += weight * r * a;
                }
            }
            SyntheticLoss::Huber { coef, target, delta } => {
                let s = Self::huber_slope(dot(coef, x) - target, *delta);
                for (o, a) in out.iter_mut().zip(coef) {
                    *o += weight * s * a;
                }
            }
        }
    }

    /// `max_{x in X} ||∇f(x)||`, exact for all three families.
    pub fn max_gradient_norm(&self, set: &FeasibleSet) -> f64 {
        match self {
            SyntheticLoss::Quadratic { curvature, center, .. } => {
                curvature
                    * set
                        .farthest_distance(&Vector::from_vec_unchecked(center.clone()))
                        .expect("dimension checked at generation")
            }
            SyntheticLoss::SquaredLinear { coef, target, .. } => {
                dot(coef, coef).sqrt() * set.max_abs_affine(coef, *target)
            }
            SyntheticLoss::Huber { coef, target, delta } => {
                let zmax = set.max_abs_affine(coef, *target);
                dot(coef, coef).sqrt() * (zmax / delta).min(1.0)
            }
        }
    }

    /// `max_{x in X} ||∇f(x) - ∇prev(x)||²`, with `∇prev ≡ 0` when `prev` is
    /// `None`.
    ///
    /// Exact for quadratics sharing one curvature and for the first round of
    /// every family; otherwise an upper bound assembled from coefficient
    /// differences and the set's support function.
    pub fn max_gradient_change_sq(&self, prev: Option<&SyntheticLoss>, set: &FeasibleSet) -> f64 {
        let Some(prev) = prev else {
            return self.max_gradient_norm(set).powi(2);
        };
        let crude = self.max_gradient_norm(set) + prev.max_gradient_norm(set);
        let bound = match (self, prev) {
            (
                SyntheticLoss::Quadratic { curvature: l1, center: c1, .. },
                SyntheticLoss::Quadratic { curvature: l0, center: c0, .. },
            ) => {
                // ∇f - ∇prev = (l1 - l0)(x - m) + v with m the set center.
                let m = set.center().as_slice();
                let v: Vec<f64> = (0..m.len())
                    .map(|i| (l1 - l0) * m[i] - l1 * c1[i] + l0 * c0[i])
                    .collect();
                let vn = dot(&v, &v).sqrt();
                if l1 == l0 {
                    vn
                } else {
                    vn + (l1 - l0).abs() * set.radius()
                }
            }
            (
                SyntheticLoss::SquaredLinear { coef: a1, target: y1, .. },
                SyntheticLoss::SquaredLinear { coef: a0, target: y0, .. },
            ) => {
                let (da, dy) = coef_diff(a1, a0, *y1, *y0);
                let r1 = set.max_abs_affine(a1, *y1);
                let dr = set.max_abs_affine(&da, dy);
                dot(&da, &da).sqrt() * r1 + dot(a0, a0).sqrt() * dr
            }
            (
                SyntheticLoss::Huber { coef: a1, target: y1, delta: d1 },
                SyntheticLoss::Huber { coef: a0, target: y0, delta: d0 },
            ) if d1 == d0 => {
                let (da, dy) = coef_diff(a1, a0, *y1, *y0);
                let s1 = (set.max_abs_affine(a1, *y1) / d1).min(1.0);
                let ds = (set.max_abs_affine(&da, dy) / d1).min(2.0);
                dot(&da, &da).sqrt() * s1 + dot(a0, a0).sqrt() * ds
            }
            _ => crude,
        };
        bound.min(crude).powi(2)
    }
}

fn coef_diff(a1: &[f64], a0: &[f64], y1: f64, y0: f64) -> (Vec<f64>, f64) {
    (a1.iter().zip(a0).map(|(p, q)| p - q).collect(), y1 - y0)
}

impl Loss for SyntheticLoss {
    fn dim(&self) -> usize {
        match self {
            SyntheticLoss::Quadratic { center, .. } => center.len(),
            SyntheticLoss::SquaredLinear { coef, .. } | SyntheticLoss::Huber { coef, .. } => coef.len(),
        }
    }

    fn value(&self, x: &Vector) -> f64 {
        self.raw_value(x.as_slice())
    }

    fn gradient(&self, x: &Vector) -> Vector {
        let mut g = vec![0.0; self.dim()];
        self.raw_add_gradient(x.as_slice(), 1.0, &mut g);
        Vector::from_vec_unchecked(g)
    }

    fn tags(&self) -> ClassTags {
        match self {
            SyntheticLoss::Quadratic { curvature, offset, .. } => ClassTags {
                strongly_convex: Some(*curvature),
                exp_concave: None,
                smooth: Some(*curvature),
                nonnegative: *offset >= 0.0,
            },
            SyntheticLoss::SquaredLinear { coef, exp_concavity, .. } => ClassTags {
                strongly_convex: None,
                exp_concave: Some(*exp_concavity),
                smooth: Some(dot(coef, coef)),
                nonnegative: true,
            },
            SyntheticLoss::Huber { coef, delta, .. } => ClassTags {
                strongly_convex: None,
                exp_concave: None,
                smooth: Some(dot(coef, coef) / delta),
                nonnegative: true,
            },
        }
    }

    fn add_gradient_to(&self, x: &[f64], weight: f64, out: &mut [f64]) {
        self.raw_add_gradient(x, weight, out)
    }

    fn value_at(&self, x: &[f64]) -> f64 {
        self.raw_value(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamClass {
    Strong,
    ExpConcave,
    Convex,
}

impl StreamClass {
    pub fn as_str(self) -> &'static str {
        match self {
            StreamClass::Strong => "strong",
            StreamClass::ExpConcave => "expconcave",
            StreamClass::Convex => "convex",
        }
    }
}

impl std::fmt::Display for StreamClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for StreamClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strong" => Ok(StreamClass::Strong),
            "expconcave" => Ok(StreamClass::ExpConcave),
            "convex" => Ok(StreamClass::Convex),
            other => Err(Error::Config(format!(
                "unknown stream class `{other}` (expected strong, expconcave or convex)"
            ))),
        }
    }
}

/// Default residual-slack fraction for exp-concave streams.
pub const DEFAULT_EXPCONCAVE_NOISE: f64 = 0.5;
/// Default label-noise amplitude for convex streams. Large enough that every
/// residual sits on the linear branch of the smoothed absolute loss.
pub const DEFAULT_CONVEX_NOISE: f64 = 4.0;
pub const DEFAULT_HUBER_DELTA: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct StreamConfig {
    pub class: StreamClass,
    pub dim: usize,
    pub horizon: usize,
    pub seed: u64,
    /// λ for strong streams, α for exp-concave streams; ignored for convex.
    pub true_parameter: f64,
    pub grad_bound: f64,
    /// Exp-concave: fraction in [0, 1] of the admissible residual slack used
    /// as uniform label noise. Convex: amplitude of ±noise label flips; 0 makes
    /// the stream realizable (zero-loss comparator).
    pub noise: Option<f64>,
    pub huber_delta: f64,
}

impl StreamConfig {
    pub fn new(class: StreamClass, dim: usize, horizon: usize, seed: u64, true_parameter: f64, grad_bound: f64) -> Self {
        StreamConfig {
            class,
            dim,
            horizon,
            seed,
            true_parameter,
            grad_bound,
            noise: None,
            huber_delta: DEFAULT_HUBER_DELTA,
        }
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = Some(noise);
        self
    }

    fn validate(&self, set: &FeasibleSet, expected: StreamClass) -> Result<()> {
        if self.class != expected {
            return Err(Error::Config(format!(
                "stream class is {}, generator expects {}",
                self.class, expected
            )));
        }
        if self.horizon < 1 {
            return Err(Error::Config("horizon must be ≥ 1".into()));
        }
        if self.dim != set.dim() {
            return Err(Error::DimensionMismatch { expected: set.dim(), found: self.dim });
        }
        if !(self.grad_bound.is_finite() && self.grad_bound > 0.0) {
            return Err(Error::Config(format!("grad_bound must be > 0, got {}", self.grad_bound)));
        }
        if !(self.huber_delta.is_finite() && self.huber_delta > 0.0) {
            return Err(Error::Config(format!("huber_delta must be > 0, got {}", self.huber_delta)));
        }
        if let Some(n) = self.noise {
            if !(n.is_finite() && n >= 0.0) {
                return Err(Error::Config(format!("noise must be >= 0, got {n}")));
            }
        }
        Ok(())
    }

    fn check_parameter(&self, name: &'static str) -> Result<()> {
        let min = 1.0 / self.horizon as f64;
        let p = self.true_parameter;
        if !(p >= min && p <= 1.0) {
            return Err(Error::ParameterRange { name, value: p, min, max: 1.0 });
        }
        Ok(())
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Uniform sample from the set.
pub fn sample_in_set<R: Rng + ?Sized>(set: &FeasibleSet, rng: &mut R) -> Vector {
    match set.kind() {
        SetKind::Ball { center, radius } => {
            let d = center.dim();
            let u = unit_direction(d, rng);
            let r = radius * rng.gen::<f64>().powf(1.0 / d as f64);
            Vector::from_vec_unchecked(
                center.as_slice().iter().zip(&u).map(|(c, ui)| c + r * ui).collect(),
            )
        }
        SetKind::Box { lower, upper } => Vector::from_vec_unchecked(
            lower
                .as_slice()
                .iter()
                .zip(upper.as_slice())
                .map(|(l, u)| l + (u - l) * rng.gen::<f64>())
                .collect(),
        ),
    }
}

/// Uniform direction on the unit sphere.
pub fn unit_direction<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = dot(&v, &v).sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// A point halfway between the center and a uniform sample, kept away from the
/// boundary.
fn interior_point<R: Rng + ?Sized>(set: &FeasibleSet, rng: &mut R) -> Vec<f64> {
    let s = sample_in_set(set, rng);
    set.center()
        .as_slice()
        .iter()
        .zip(s.as_slice())
        .map(|(c, p)| c + 0.5 * (p - c))
        .collect()
}

fn check_grad_bound(stream: &[SyntheticLoss], set: &FeasibleSet, g: f64) -> Result<()> {
    for (t, f) in stream.iter().enumerate() {
        let m = f.max_gradient_norm(set);
        if m > g * (1.0 + 1e-12) {
            return Err(Error::AssumptionViolation(format!(
                "round {}: max gradient norm {m} exceeds G = {g}",
                t + 1
            )));
        }
    }
    Ok(())
}

/// `f_t(x) = (λ/2)||x - c_t||²` with `c_t` uniform in the set.
pub fn gen_strongly_convex_stream(cfg: &StreamConfig, set: &FeasibleSet) -> Result<Vec<SyntheticLoss>> {
    cfg.validate(set, StreamClass::Strong)?;
    cfg.check_parameter("lambda")?;
    let mut rng = cfg.rng();
    let stream: Vec<SyntheticLoss> = (0..cfg.horizon)
        .map(|_| SyntheticLoss::quadratic(cfg.true_parameter, sample_in_set(set, &mut rng).into_vec()))
        .collect();
    check_grad_bound(&stream, set, cfg.grad_bound)?;
    Ok(stream)
}

/// `f_t(x) = ½(<a_t, x> - y_t)²` with every residual on the set bounded by
/// `R = 1/√α`, which makes each round α-exp-concave (`α r² <= 1`), and
/// `||a_t|| R <= G`.
pub fn gen_expconcave_stream(cfg: &StreamConfig, set: &FeasibleSet) -> Result<Vec<SyntheticLoss>> {
    cfg.validate(set, StreamClass::ExpConcave)?;
    cfg.check_parameter("alpha")?;
    let noise = cfg.noise.unwrap_or(DEFAULT_EXPCONCAVE_NOISE);
    if noise > 1.0 {
        return Err(Error::Config(format!("expconcave noise is a fraction in [0, 1], got {noise}")));
    }
    let alpha = cfg.true_parameter;
    let residual_cap = 1.0 / alpha.sqrt();
    let mut rng = cfg.rng();
    let truth = interior_point(set, &mut rng);
    let stream: Vec<SyntheticLoss> = (0..cfg.horizon)
        .map(|_| {
            let u = unit_direction(cfg.dim, &mut rng);
            let width = set.half_width(&u);
            let norm_cap = (cfg.grad_bound / residual_cap).min(residual_cap / (2.0 * width));
            let norm = norm_cap * rng.gen_range(0.5..=1.0);
            let a: Vec<f64> = u.iter().map(|ui| norm * ui).collect();
            let slack = residual_cap - 2.0 * norm * width;
            let y = dot(&a, &truth) + noise * slack * rng.gen_range(-1.0..=1.0);
            SyntheticLoss::squared_linear(a, y, alpha)
        })
        .collect();
    check_grad_bound(&stream, set, cfg.grad_bound)?;
    for (t, f) in stream.iter().enumerate() {
        if let SyntheticLoss::SquaredLinear { coef, target, .. } = f {
            let r = set.max_abs_affine(coef, *target);
            if alpha * r * r > 1.0 + 1e-12 {
                return Err(Error::AssumptionViolation(format!(
                    "round {}: residual {r} breaks {alpha}-exp-concavity",
                    t + 1
                )));
            }
        }
    }
    Ok(stream)
}

/// `f_t(x) = h_δ(<a_t, x> - y_t)` with `||a_t|| in [G/2, G]` and
/// `y_t = <a_t, x°> ± noise` for a fixed interior `x°`.
pub fn gen_convex_stream(cfg: &StreamConfig, set: &FeasibleSet) -> Result<Vec<SyntheticLoss>> {
    cfg.validate(set, StreamClass::Convex)?;
    let noise = cfg.noise.unwrap_or(DEFAULT_CONVEX_NOISE);
    let mut rng = cfg.rng();
    let truth = interior_point(set, &mut rng);
    let stream: Vec<SyntheticLoss> = (0..cfg.horizon)
        .map(|_| {
            let u = unit_direction(cfg.dim, &mut rng);
            let norm = cfg.grad_bound * rng.gen_range(0.5..=1.0);
            let a: Vec<f64> = u.iter().map(|ui| norm * ui).collect();
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let y = dot(&a, &truth) + sign * noise;
            SyntheticLoss::huber(a, y, cfg.huber_delta)
        })
        .collect();
    check_grad_bound(&stream, set, cfg.grad_bound)?;
    Ok(stream)
}

pub fn generate_stream(cfg: &StreamConfig, set: &FeasibleSet) -> Result<Vec<SyntheticLoss>> {
    match cfg.class {
        StreamClass::Strong => gen_strongly_convex_stream(cfg, set),
        StreamClass::ExpConcave => gen_expconcave_stream(cfg, set),
        StreamClass::Convex => gen_convex_stream(cfg, set),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn quadratic_closed_form() {
        let f = SyntheticLoss::quadratic(1.0, vec![0.0, 0.0]);
        assert_eq!(f.value(&v(&[1.0, 0.0])), 0.5);
        assert_eq!(f.gradient(&v(&[1.0, 0.0])), v(&[1.0, 0.0]));
    }

    #[test]
    fn squared_linear_closed_form() {
        let f = SyntheticLoss::squared_linear(vec![1.0, 0.0], 0.0, 1.0);
        assert_eq!(f.value(&v(&[0.5, 0.0])), 0.125);
        assert_eq!(f.gradient(&v(&[0.5, 0.0])), v(&[0.5, 0.0]));
    }

    #[test]
    fn huber_closed_form() {
        let f = SyntheticLoss::huber(vec![1.0, 0.0], 0.0, 1.0);
        assert_eq!(f.value(&v(&[0.5, 0.0])), 0.125);
        assert_eq!(f.gradient(&v(&[0.5, 0.0])), v(&[0.5, 0.0]));
        // linear branch
        assert_eq!(f.value(&v(&[3.0, 0.0])), 2.5);
        assert_eq!(f.gradient(&v(&[3.0, 0.0])), v(&[1.0, 0.0]));
        assert_eq!(f.tags().smooth, Some(1.0));
    }

    #[test]
    fn add_gradient_matches_gradient() {
        let f = SyntheticLoss::huber(vec![0.3, -1.2], 0.4, 0.5);
        let x = v(&[0.1, 0.2]);
        let mut acc = vec![1.0, 1.0];
        f.add_gradient_to(x.as_slice(), 2.0, &mut acc);
        let g = f.gradient(&x);
        assert_eq!(acc, vec![1.0 + 2.0 * g.as_slice()[0], 1.0 + 2.0 * g.as_slice()[1]]);
    }

    #[test]
    fn strong_stream_rejects_out_of_range_lambda() {
        let set = FeasibleSet::unit_ball(2);
        let cfg = StreamConfig::new(StreamClass::Strong, 2, 8, 1, 0.01, 2.0);
        assert!(matches!(
            gen_strongly_convex_stream(&cfg, &set),
            Err(Error::ParameterRange { name: "lambda", .. })
        ));
        let cfg = StreamConfig::new(StreamClass::Strong, 2, 8, 1, 1.5, 2.0);
        assert!(gen_strongly_convex_stream(&cfg, &set).is_err());
    }

    #[test]
    fn expconcave_stream_rejects_out_of_range_alpha() {
        let set = FeasibleSet::unit_ball(2);
        let cfg = StreamConfig::new(StreamClass::ExpConcave, 2, 100, 1, 0.001, 2.0);
        assert!(matches!(
            gen_expconcave_stream(&cfg, &set),
            Err(Error::ParameterRange { name: "alpha", .. })
        ));
    }

    #[test]
    fn generator_fails_loudly_when_g_too_small() {
        let set = FeasibleSet::unit_ball(2);
        let cfg = StreamConfig::new(StreamClass::Strong, 2, 16, 3, 1.0, 0.5);
        assert!(matches!(
            gen_strongly_convex_stream(&cfg, &set),
            Err(Error::AssumptionViolation(_))
        ));
    }

    #[test]
    fn zero_horizon_is_rejected() {
        let set = FeasibleSet::unit_ball(2);
        let cfg = StreamConfig::new(StreamClass::Convex, 2, 0, 3, 0.0, 1.0);
        let err = gen_convex_stream(&cfg, &set).unwrap_err();
        assert!(err.to_string().contains("horizon must be ≥ 1"));
    }

    #[test]
    fn wrong_class_is_rejected() {
        let set = FeasibleSet::unit_ball(2);
        let cfg = StreamConfig::new(StreamClass::Convex, 2, 4, 3, 0.0, 1.0);
        assert!(gen_strongly_convex_stream(&cfg, &set).is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let set = FeasibleSet::unit_ball(3);
        for class in [StreamClass::Strong, StreamClass::ExpConcave, StreamClass::Convex] {
            let cfg = StreamConfig::new(class, 3, 64, 42, 0.5, 2.0);
            assert_eq!(generate_stream(&cfg, &set).unwrap(), generate_stream(&cfg, &set).unwrap());
            let other = StreamConfig { seed: 43, ..cfg.clone() };
            assert_ne!(generate_stream(&cfg, &set).unwrap(), generate_stream(&other, &set).unwrap());
        }
    }

    #[test]
    fn realizable_convex_stream_has_zero_loss_point() {
        let set = FeasibleSet::unit_ball(2);
        let cfg = StreamConfig::new(StreamClass::Convex, 2, 50, 9, 0.0, 1.0).with_noise(0.0);
        let stream = gen_convex_stream(&cfg, &set).unwrap();
        // Every target is exactly <a_t, x°>, so two rounds pin x° down.
        let (SyntheticLoss::Huber { coef: a, target: y, .. }, SyntheticLoss::Huber { coef: b, target: z, .. }) =
            (&stream[0], &stream[1])
        else {
            panic!("expected huber losses")
        };
        let det = a[0] * b[1] - a[1] * b[0];
        let x = v(&[(y * b[1] - z * a[1]) / det, (a[0] * z - b[0] * y) / det]);
        let total: f64 = stream.iter().map(|f| f.value(&x)).sum();
        assert!(total < 1e-20, "total = {total}");
    }

    #[test]
    fn variation_of_identical_quadratics_is_first_term_only() {
        let set = FeasibleSet::unit_ball(2);
        let f = SyntheticLoss::quadratic(0.5, vec![0.2, 0.0]);
        assert_eq!(f.max_gradient_change_sq(Some(&f), &set), 0.0);
        // max_x ||0.5 (x - c)|| = 0.5 * (0.2 + 1)
        assert!((f.max_gradient_change_sq(None, &set) - 0.36).abs() < 1e-15);
    }

    #[test]
    fn variation_of_shifted_quadratics() {
        let set = FeasibleSet::unit_ball(2);
        let f = SyntheticLoss::quadratic(0.5, vec![0.2, 0.0]);
        let g = SyntheticLoss::quadratic(0.5, vec![-0.2, 0.4]);
        let expected = 0.25 * (0.16 + 0.16);
        assert!((g.max_gradient_change_sq(Some(&f), &set) - expected).abs() < 1e-15);
    }
}
