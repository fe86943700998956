//! Best fixed decision in hindsight.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use usc_core::losses::sample_in_set;
use usc_core::{Error, FeasibleSet, Loss, SetKind, Vector};

use crate::config::ComparatorSpec;

const STARTS: usize = 8;
const START_SEED_SALT: u64 = 0x5eed_c0de_0000_0001;

#[derive(Debug, Clone, PartialEq)]
pub struct GridCheck {
    pub point: Vector,
    pub loss: f64,
    /// Distance between the grid argmin and the descent argmin.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparatorResult {
    pub point: Vector,
    pub loss: f64,
    /// Norm of the projected-gradient mapping at `point`; 0 at an exact
    /// minimizer.
    pub gradient_mapping: f64,
    pub grid: Option<GridCheck>,
}

struct Objective<'a, L> {
    stream: &'a [L],
    set: &'a FeasibleSet,
    lipschitz: f64,
}

impl<L: Loss> Objective<'_, L> {
    fn value(&self, x: &[f64]) -> f64 {
        self.stream.iter().map(|f| f.value_at(x)).sum()
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for f in self.stream {
            f.add_gradient_to(x, 1.0, out);
        }
    }

    fn step(&self, y: &[f64], grad: &[f64]) -> Vector {
        let z: Vec<f64> = y.iter().zip(grad).map(|(a, g)| a - g / self.lipschitz).collect();
        self.set
            .project(&Vector::new(z).expect("finite iterate"))
            .expect("dimension checked")
    }

    fn gradient_mapping(&self, x: &Vector) -> f64 {
        let mut g = vec![0.0; x.dim()];
        self.gradient(x.as_slice(), &mut g);
        let next = self.step(x.as_slice(), &g);
        self.lipschitz * next.distance(x).expect("same dim")
    }

    /// Accelerated projected gradient with gradient-based restarts.
    fn descend(&self, start: Vector, iters: usize) -> Vector {
        let d = start.dim();
        let mut x = start;
        let mut y = x.as_slice().to_vec();
        let mut t = 1.0f64;
        let mut grad = vec![0.0; d];
        for _ in 0..iters {
            self.gradient(&y, &mut grad);
            let next = self.step(&y, &grad);
            let moved = next.distance(&x).expect("same dim");
            let restart = y
                .iter()
                .zip(next.as_slice())
                .zip(x.as_slice())
                .map(|((yi, ni), xi)| (yi - ni) * (ni - xi))
                .sum::<f64>()
                > 0.0;
            if restart {
                t = 1.0;
            }
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let momentum = (t - 1.0) / t_next;
            y = next
                .as_slice()
                .iter()
                .zip(x.as_slice())
                .map(|(n, o)| n + momentum * (n - o))
                .collect();
            t = t_next;
            x = next;
            if moved <= 1e-13 * (1.0 + x.norm()) {
                break;
            }
        }
        x
    }
}

/// Minimizes `Σ_t f_t` over the set from 8 seeded starts, with step
/// `1/Σ H_t`. For `dim ≤ 2` and a configured resolution, a coarse-to-fine grid
/// search cross-checks the result and wins if it finds a lower value.
pub fn comparator_oracle<L: Loss>(
    stream: &[L],
    set: &FeasibleSet,
    spec: &ComparatorSpec,
    seed: u64,
) -> usc_core::Result<ComparatorResult> {
    if stream.is_empty() {
        return Ok(ComparatorResult { point: set.center().clone(), loss: 0.0, gradient_mapping: 0.0, grid: None });
    }
    let mut lipschitz = 0.0;
    for (t, f) in stream.iter().enumerate() {
        match f.tags().smooth {
            Some(h) => lipschitz += h,
            None => {
                return Err(Error::Config(format!(
                    "comparator needs smooth losses; round {} has no smoothness constant",
                    t + 1
                )))
            }
        }
    }
    let obj = Objective { stream, set, lipschitz: lipschitz.max(f64::MIN_POSITIVE) };

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ START_SEED_SALT);
    let mut best: Option<(Vector, f64)> = None;
    for _ in 0..STARTS {
        let x = obj.descend(sample_in_set(set, &mut rng), spec.pgd_iters);
        let v = obj.value(x.as_slice());
        if best.as_ref().map_or(true, |(_, bv)| v < *bv) {
            best = Some((x, v));
        }
    }
    let (mut point, mut loss) = best.expect("at least one start");

    let grid = match spec.grid_resolution {
        Some(res) if set.dim() <= 2 => {
            let (gp, gl) = grid_search(&obj, res);
            let distance = gp.distance(&point)?;
            if gl < loss {
                point = gp.clone();
                loss = gl;
            }
            Some(GridCheck { point: gp, loss: gl, distance })
        }
        _ => None,
    };
    let gradient_mapping = obj.gradient_mapping(&point);
    Ok(ComparatorResult { point, loss, gradient_mapping, grid })
}

/// Grid search over the set's bounding box, refined around the incumbent by a
/// factor of 10 per level until the spacing reaches `resolution`.
fn grid_search<L: Loss>(obj: &Objective<'_, L>, resolution: f64) -> (Vector, f64) {
    const HALF: i64 = 20;
    let (lo, hi) = bounding_box(obj.set);
    let d = lo.len();
    let mut center: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect();
    let mut h = lo.iter().zip(&hi).map(|(l, h)| h - l).fold(0.0, f64::max) / (2 * HALF) as f64;
    let mut best: Option<(Vec<f64>, f64)> = None;
    loop {
        let span = if d == 1 { 0..1 } else { -HALF..HALF + 1 };
        for j in span {
            for i in -HALF..=HALF {
                let mut p = center.clone();
                p[0] += i as f64 * h;
                if d == 2 {
                    p[1] += j as f64 * h;
                }
                let v = Vector::new(p.clone()).expect("finite grid point");
                if !obj.set.contains(&v, 0.0) {
                    continue;
                }
                let val = obj.value(&p);
                if best.as_ref().map_or(true, |(_, b)| val < *b) {
                    best = Some((p, val));
                }
            }
        }
        if h <= resolution {
            break;
        }
        center = best.as_ref().map(|(p, _)| p.clone()).unwrap_or(center);
        h = (h / 10.0).max(resolution);
    }
    let (p, v) = best.expect("grid covers the set center");
    (Vector::new(p).expect("finite"), v)
}

fn bounding_box(set: &FeasibleSet) -> (Vec<f64>, Vec<f64>) {
    match set.kind() {
        SetKind::Ball { center, radius } => (
            center.as_slice().iter().map(|c| c - radius).collect(),
            center.as_slice().iter().map(|c| c + radius).collect(),
        ),
        SetKind::Box { lower, upper } => (lower.as_slice().to_vec(), upper.as_slice().to_vec()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use usc_core::SyntheticLoss;

    fn spec() -> ComparatorSpec {
        ComparatorSpec { pgd_iters: 2000, grid_resolution: None }
    }

    #[test]
    fn common_minimizer() {
        let set = FeasibleSet::unit_ball(2);
        let stream = vec![SyntheticLoss::quadratic(0.7, vec![0.3, -0.2]); 10];
        let r = comparator_oracle(&stream, &set, &spec(), 1).unwrap();
        assert!(r.point.distance(&Vector::new(vec![0.3, -0.2]).unwrap()).unwrap() < 1e-12);
        assert!(r.loss.abs() < 1e-20);
    }

    #[test]
    fn two_quadratics_meet_at_projected_midpoint() {
        let set = FeasibleSet::unit_ball(2);
        let stream = vec![
            SyntheticLoss::quadratic(1.0, vec![0.9, 0.9]),
            SyntheticLoss::quadratic(1.0, vec![0.9, 0.1]),
        ];
        let r = comparator_oracle(&stream, &set, &spec(), 1).unwrap();
        let mid = set.project(&Vector::new(vec![0.9, 0.5]).unwrap()).unwrap();
        assert!(r.point.distance(&mid).unwrap() < 1e-10);
        assert!(r.gradient_mapping < 1e-8);
    }

    #[test]
    fn grid_agrees_with_descent() {
        let set = FeasibleSet::box_set(Vector::new(vec![0.0, 0.0]).unwrap(), Vector::new(vec![1.0, 1.0]).unwrap())
            .unwrap();
        let stream = vec![
            SyntheticLoss::squared_linear(vec![1.0, 0.5], 2.0, 0.1),
            SyntheticLoss::squared_linear(vec![-0.3, 1.0], 0.2, 0.1),
            SyntheticLoss::huber(vec![0.5, 0.5], -0.3, 1.0),
        ];
        let r = comparator_oracle(&stream, &set, &ComparatorSpec { pgd_iters: 5000, grid_resolution: Some(1e-3) }, 4)
            .unwrap();
        let g = r.grid.unwrap();
        assert!(g.distance < 1e-3, "{}", g.distance);
    }
}
