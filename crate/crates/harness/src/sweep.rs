//! Regret-vs-horizon sweeps.

use std::fmt;

use rayon::prelude::*;
use usc_core::StreamClass;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::run::run_experiment;
use crate::verify::verify_bounds;

/// Largest allowed max/min ratio of the normalized regret across horizons.
pub const SCALING_RATIO_LIMIT: f64 = 3.0;

/// Parses `2^8..2^14`, `2^8..2^14:2` (exponent step) or a comma list whose
/// items are integers or `2^k`.
pub fn parse_horizons(spec: &str) -> std::result::Result<Vec<usize>, String> {
    let pow = |s: &str| -> std::result::Result<usize, String> {
        let s = s.trim();
        match s.strip_prefix("2^") {
            Some(k) => {
                let k: u32 = k.parse().map_err(|_| format!("bad exponent in {s:?}"))?;
                1usize.checked_shl(k).filter(|_| k < usize::BITS).ok_or_else(|| format!("2^{k} overflows"))
            }
            None => s.parse().map_err(|_| format!("bad horizon {s:?}")),
        }
    };
    let out: Vec<usize> = if let Some((a, rest)) = spec.split_once("..") {
        let (b, step) = match rest.split_once(':') {
            Some((b, s)) => (b, s.trim().parse::<u32>().map_err(|_| format!("bad step {s:?}"))?),
            None => (rest, 1),
        };
        let exp = |s: &str| {
            s.trim()
                .strip_prefix("2^")
                .and_then(|k| k.parse::<u32>().ok())
                .ok_or_else(|| format!("range endpoints must look like 2^k, got {s:?}"))
        };
        let (lo, hi) = (exp(a)?, exp(b)?);
        if step == 0 || lo > hi {
            return Err(format!("empty horizon range {spec:?}"));
        }
        (lo..=hi).step_by(step as usize).map(|k| pow(&format!("2^{k}"))).collect::<std::result::Result<_, _>>()?
    } else {
        spec.split(',').map(pow).collect::<std::result::Result<_, _>>()?
    };
    if out.is_empty() || out.contains(&0) {
        return Err("horizons must be ≥ 1".into());
    }
    Ok(out)
}

/// How regret is normalized before comparing horizons.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scaling {
    /// `regret / ln T`
    Logarithmic,
    /// `regret / √(T ln ln T)`
    SqrtLogLog,
    /// raw regret, which should stop growing
    Flat,
}

impl Scaling {
    pub fn for_config(cfg: &ExperimentConfig) -> Self {
        match cfg.class().expect("validated") {
            StreamClass::Strong | StreamClass::ExpConcave => Scaling::Logarithmic,
            StreamClass::Convex if cfg.stream.noise == Some(0.0) => Scaling::Flat,
            StreamClass::Convex => Scaling::SqrtLogLog,
        }
    }

    pub fn normalize(self, regret: f64, horizon: usize) -> f64 {
        let t = horizon as f64;
        match self {
            Scaling::Logarithmic => regret / t.ln(),
            Scaling::SqrtLogLog => regret / (t * t.ln().ln()).sqrt(),
            Scaling::Flat => regret,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Scaling::Logarithmic => "regret/lnT",
            Scaling::SqrtLogLog => "regret/sqrt(T lnlnT)",
            Scaling::Flat => "regret",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub horizon: usize,
    /// One regret per seed.
    pub regrets: Vec<f64>,
    pub median: f64,
    pub normalized: f64,
    /// Bound checks that failed in any seed's run.
    pub failed_checks: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub class: StreamClass,
    pub scaling: Scaling,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    /// max/min of the normalized regret; infinite if any entry is not positive.
    pub fn ratio(&self) -> f64 {
        let v: Vec<f64> = self.points.iter().map(|p| p.normalized).collect();
        if v.iter().any(|x| !(*x > 0.0)) {
            return f64::INFINITY;
        }
        v.iter().cloned().fold(f64::MIN, f64::max) / v.iter().cloned().fold(f64::MAX, f64::min)
    }

    /// The class-appropriate scaling law.
    pub fn scaling_holds(&self) -> bool {
        match self.scaling {
            Scaling::Flat => self.points.windows(2).last().map_or(true, |w| {
                w[1].median - w[0].median <= 0.1 * w[0].median.abs() + 1.0
            }),
            _ => self.ratio() <= SCALING_RATIO_LIMIT,
        }
    }

    pub fn bounds_hold(&self) -> bool {
        self.points.iter().all(|p| p.failed_checks.is_empty())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("horizon,median_regret,normalized,seeds\n");
        for p in &self.points {
            s.push_str(&format!(
                "{},{},{},{}\n",
                p.horizon,
                crate::output::sci(p.median),
                crate::output::sci(p.normalized),
                p.regrets.len()
            ));
        }
        s
    }
}

impl fmt::Display for SweepResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "class={} scaling={}", self.class, self.scaling.label())?;
        writeln!(f, "{:>8} {:>14} {:>22}  checks", "T", "median_regret", self.scaling.label())?;
        for p in &self.points {
            writeln!(
                f,
                "{:>8} {:>14.6} {:>22.6}  {}",
                p.horizon,
                p.median,
                p.normalized,
                if p.failed_checks.is_empty() { "ok".to_string() } else { p.failed_checks.join(",") }
            )?;
        }
        match self.scaling {
            Scaling::Flat => writeln!(f, "flat={}", self.scaling_holds())?,
            _ => writeln!(f, "max/min={:.4} (limit {SCALING_RATIO_LIMIT})", self.ratio())?,
        }
        Ok(())
    }
}

pub fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Runs `cfg` at every horizon with seeds `seed, seed+1, …, seed+seeds−1`
/// (the same seeds at each horizon), in parallel.
pub fn sweep(cfg: &ExperimentConfig, horizons: &[usize], seeds: usize) -> Result<SweepResult> {
    if seeds == 0 {
        return Err(HarnessError::Invalid("--multi-seed must be ≥ 1".into()));
    }
    let jobs: Vec<(usize, u64)> = horizons
        .iter()
        .flat_map(|&t| (0..seeds as u64).map(move |k| (t, k)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(t, k)| {
            let mut c = cfg.clone();
            c.stream.horizon = t;
            c.stream.seed = cfg.stream.seed.wrapping_add(k);
            let out = run_experiment(&c)?;
            let report = verify_bounds(&out.data);
            let failed = report.checks.iter().filter(|c| !c.passed()).map(|c| c.name.clone()).collect::<Vec<_>>();
            Ok((t, out.data.usc_regret(), failed))
        })
        .collect::<Result<Vec<_>>>()?;

    let scaling = Scaling::for_config(cfg);
    let points = horizons
        .iter()
        .map(|&t| {
            let mine: Vec<_> = results.iter().filter(|r| r.0 == t).collect();
            let regrets: Vec<f64> = mine.iter().map(|r| r.1).collect();
            let mut failed: Vec<String> = mine.iter().flat_map(|r| r.2.iter().cloned()).collect();
            failed.sort();
            failed.dedup();
            let m = median(&mut regrets.clone());
            SweepPoint { horizon: t, regrets, median: m, normalized: scaling.normalize(m, t), failed_checks: failed }
        })
        .collect();
    Ok(SweepResult { class: cfg.class().expect("validated"), scaling, points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horizon_specs() {
        assert_eq!(parse_horizons("2^8..2^14").unwrap(), vec![256, 512, 1024, 2048, 4096, 8192, 16384]);
        assert_eq!(parse_horizons("2^8..2^14:2").unwrap(), vec![256, 1024, 4096, 16384]);
        assert_eq!(parse_horizons("100, 2^3").unwrap(), vec![100, 8]);
        assert!(parse_horizons("0").is_err());
        assert!(parse_horizons("2^9..2^8").is_err());
        assert!(parse_horizons("x").is_err());
    }

    #[test]
    fn medians() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
