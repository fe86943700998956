//! Expert algorithms, parameter grids and the expert pool.
//!
//! Experts see the original loss oracle each round and keep their own iterate
//! inside the feasible set. The pool instantiates every algorithm of a class
//! block once per grid value (strong and exp-concave blocks) or once (convex
//! block).

mod oegd;
mod ogd;
mod ons;
mod sogd;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

pub use oegd::OegdStrong;
pub use ogd::Ogd;
pub use ons::Ons;
pub use sogd::Sogd;

use crate::error::{Error, Result};
use crate::geometry::{FeasibleSet, Vector};
use crate::losses::{Loss, StreamClass};

pub const DEFAULT_SOGD_DELTA: f64 = 1.0;
pub const DEFAULT_ONS_REBUILD_INTERVAL: usize = 512;

/// An online learner that plays a point, then receives the round's loss.
pub trait Expert: Send {
    /// Algorithm label, e.g. `OGD_STRONG`.
    fn label(&self) -> String;

    /// Assumed class parameter (λ̂ or α̂); 0 for convex experts.
    fn param(&self) -> f64;

    /// Current iterate. Never mutates state.
    fn predict(&self) -> &Vector;

    /// Consumes the loss of the round the current iterate was played in.
    fn update(&mut self, loss: &dyn Loss) -> Result<()>;

    /// Number of completed updates.
    fn round(&self) -> usize;

    /// Gradient queries issued per update.
    fn gradient_queries(&self) -> usize {
        1
    }
}

/// Shared problem constants handed to every expert at construction.
#[derive(Debug, Clone)]
pub struct ExpertContext {
    pub set: FeasibleSet,
    pub grad_bound: f64,
    pub sogd_delta: f64,
    pub ons_rebuild_interval: usize,
}

impl ExpertContext {
    pub fn new(set: FeasibleSet, grad_bound: f64) -> Self {
        ExpertContext {
            set,
            grad_bound,
            sogd_delta: DEFAULT_SOGD_DELTA,
            ons_rebuild_interval: DEFAULT_ONS_REBUILD_INTERVAL,
        }
    }

    pub fn diameter(&self) -> f64 {
        self.set.diameter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AlgorithmId {
    OgdConvex,
    OgdStrong,
    Ons,
    Sogd,
    OegdStrong,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 5] = [
        AlgorithmId::OgdConvex,
        AlgorithmId::OgdStrong,
        AlgorithmId::Ons,
        AlgorithmId::Sogd,
        AlgorithmId::OegdStrong,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AlgorithmId::OgdConvex => "OGD_CONVEX",
            AlgorithmId::OgdStrong => "OGD_STRONG",
            AlgorithmId::Ons => "ONS",
            AlgorithmId::Sogd => "SOGD",
            AlgorithmId::OegdStrong => "OEGD_STRONG",
        }
    }

    /// The function class the algorithm is designed for.
    pub fn block(self) -> StreamClass {
        match self {
            AlgorithmId::OgdStrong | AlgorithmId::OegdStrong => StreamClass::Strong,
            AlgorithmId::Ons => StreamClass::ExpConcave,
            AlgorithmId::OgdConvex | AlgorithmId::Sogd => StreamClass::Convex,
        }
    }

    pub fn instantiate(self, param: f64, ctx: &ExpertContext) -> Result<Box<dyn Expert>> {
        if self.block() != StreamClass::Convex && !(param.is_finite() && param > 0.0) {
            return Err(Error::Config(format!("{self} needs a positive parameter, got {param}")));
        }
        Ok(match self {
            AlgorithmId::OgdConvex => Box::new(Ogd::convex(ctx)),
            AlgorithmId::OgdStrong => Box::new(Ogd::strong(param, ctx)),
            AlgorithmId::Ons => Box::new(Ons::new(param, ctx)?),
            AlgorithmId::Sogd => Box::new(Sogd::new(ctx)),
            AlgorithmId::OegdStrong => Box::new(OegdStrong::new(param, ctx)),
        })
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlgorithmId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        AlgorithmId::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm id `{s}`")))
    }
}

/// Builds experts for algorithms outside the built-in set.
pub trait ExpertFactory: Send + Sync {
    fn name(&self) -> &str;
    fn create(&self, param: f64, ctx: &ExpertContext) -> Result<Box<dyn Expert>>;
}

#[derive(Clone)]
pub enum AlgorithmSpec {
    Builtin(AlgorithmId),
    Custom(Arc<dyn ExpertFactory>),
}

impl AlgorithmSpec {
    pub fn name(&self) -> String {
        match self {
            AlgorithmSpec::Builtin(id) => id.as_str().to_string(),
            AlgorithmSpec::Custom(f) => f.name().to_string(),
        }
    }

    fn create(&self, param: f64, ctx: &ExpertContext) -> Result<Box<dyn Expert>> {
        match self {
            AlgorithmSpec::Builtin(id) => id.instantiate(param, ctx),
            AlgorithmSpec::Custom(f) => f.create(param, ctx),
        }
    }

    // Built-ins first in id order, then custom factories by name.
    fn sort_key(&self) -> (usize, String) {
        match self {
            AlgorithmSpec::Builtin(id) => (*id as usize, String::new()),
            AlgorithmSpec::Custom(f) => (AlgorithmId::ALL.len(), f.name().to_string()),
        }
    }
}

impl From<AlgorithmId> for AlgorithmSpec {
    fn from(id: AlgorithmId) -> Self {
        AlgorithmSpec::Builtin(id)
    }
}

impl fmt::Debug for AlgorithmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Exponentially spaced grid `{2^k / T : k = 0..⌈log₂ T⌉}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrid {
    values: Vec<f64>,
    horizon: usize,
}

impl ParamGrid {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// `N = ⌈log₂ T⌉`.
    pub fn exponent(&self) -> usize {
        self.values.len() - 1
    }

    /// Largest grid value not exceeding `param`. For `param` in `[1/T, 1]` the
    /// result `v` satisfies `v <= param <= 2v`.
    pub fn select(&self, param: f64) -> Option<f64> {
        self.values.iter().rev().copied().find(|v| *v <= param)
    }
}

pub fn build_grid(horizon: usize) -> Result<ParamGrid> {
    if horizon < 1 {
        return Err(Error::Config("horizon must be ≥ 1".into()));
    }
    let n = (usize::BITS - (horizon - 1).leading_zeros()) as usize;
    let t = horizon as f64;
    let values = (0..=n).map(|k| (1u64 << k) as f64 / t).collect();
    Ok(ParamGrid { values, horizon })
}

/// One pool member with the block it was created for.
pub struct PooledExpert {
    pub block: StreamClass,
    pub expert: Box<dyn Expert>,
}

impl PooledExpert {
    pub fn name(&self) -> String {
        format!("{}[{}]", self.expert.label(), self.expert.param())
    }
}

impl fmt::Debug for PooledExpert {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PooledExpert")
            .field("block", &self.block)
            .field("name", &self.name())
            .field("x", self.expert.predict())
            .finish()
    }
}

/// Instantiates the expert set: the strong block (each algorithm × each grid
/// value), then the exp-concave block, then the convex block. Within a block
/// experts are ordered by algorithm, then ascending parameter. Every expert
/// starts at the set center.
pub fn build_expert_pool(
    strong: &[AlgorithmSpec],
    expconcave: &[AlgorithmSpec],
    convex: &[AlgorithmSpec],
    horizon: usize,
    ctx: &ExpertContext,
) -> Result<Vec<PooledExpert>> {
    if strong.is_empty() && expconcave.is_empty() && convex.is_empty() {
        return Err(Error::Config("expert pool needs at least one algorithm".into()));
    }
    let grid = build_grid(horizon)?;
    let mut pool = Vec::new();
    for (block, algs) in [
        (StreamClass::Strong, strong),
        (StreamClass::ExpConcave, expconcave),
        (StreamClass::Convex, convex),
    ] {
        let mut algs: Vec<&AlgorithmSpec> = algs.iter().collect();
        algs.sort_by_key(|a| a.sort_key());
        for pair in algs.windows(2) {
            if pair[0].sort_key() == pair[1].sort_key() {
                return Err(Error::Config(format!("algorithm {} listed twice in the {block} block", pair[0].name())));
            }
        }
        for alg in algs {
            if let AlgorithmSpec::Builtin(id) = alg {
                if id.block() != block {
                    return Err(Error::Config(format!(
                        "{id} is designed for {} functions and cannot join the {block} block",
                        id.block()
                    )));
                }
            }
            let params: &[f64] = if block == StreamClass::Convex { &[0.0] } else { grid.values() };
            for &p in params {
                pool.push(PooledExpert { block, expert: alg.create(p, ctx)? });
            }
        }
    }
    Ok(pool)
}

pub(crate) fn check_gradient(g: &Vector, round: usize) -> Result<()> {
    if g.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { what: "gradient", round })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> ExpertContext {
        ExpertContext::new(FeasibleSet::unit_ball(2), 2.0)
    }

    #[test]
    fn grid_examples() {
        let g = build_grid(8).unwrap();
        assert_eq!(g.values(), &[0.125, 0.25, 0.5, 1.0]);
        assert_eq!(g.exponent(), 3);
        let g = build_grid(1).unwrap();
        assert_eq!(g.values(), &[1.0]);
        assert_eq!(g.exponent(), 0);
        let g = build_grid(1000).unwrap();
        assert_eq!(g.exponent(), 10);
        assert_eq!(g.values().len(), 11);
        assert_eq!(*g.values().last().unwrap(), 1.024);
        assert!(build_grid(0).is_err());
    }

    #[test]
    fn grid_exponent_matches_ceil_log2() {
        for t in 1..=5000usize {
            let g = build_grid(t).unwrap();
            let n = (t as f64).log2().ceil() as usize;
            assert_eq!(g.exponent(), n, "T = {t}");
            for (k, v) in g.values().iter().enumerate() {
                assert_eq!(*v, 2f64.powi(k as i32) / t as f64);
            }
        }
    }

    #[test]
    fn grid_selection_rule() {
        let g = build_grid(8).unwrap();
        assert_eq!(g.select(0.3), Some(0.25));
        assert_eq!(g.select(0.125), Some(0.125));
        assert_eq!(g.select(1.0), Some(1.0));
        assert_eq!(g.select(0.1), None);
    }

    #[test]
    fn pool_sizes() {
        use AlgorithmId::*;
        let pool = build_expert_pool(&[OgdStrong.into()], &[], &[OgdConvex.into()], 8, &ctx()).unwrap();
        assert_eq!(pool.len(), 5);
        let pool = build_expert_pool(
            &[OgdStrong.into(), OegdStrong.into()],
            &[Ons.into()],
            &[OgdConvex.into(), Sogd.into()],
            1000,
            &ctx(),
        )
        .unwrap();
        assert_eq!(pool.len(), 35);
    }

    #[test]
    fn pool_ordering_and_initialization() {
        use AlgorithmId::*;
        // deliberately unsorted input
        let pool = build_expert_pool(
            &[OegdStrong.into(), OgdStrong.into()],
            &[Ons.into()],
            &[Sogd.into(), OgdConvex.into()],
            8,
            &ctx(),
        )
        .unwrap();
        let names: Vec<String> = pool.iter().map(|p| p.name()).collect();
        assert_eq!(
            names,
            [
                "OGD_STRONG[0.125]",
                "OGD_STRONG[0.25]",
                "OGD_STRONG[0.5]",
                "OGD_STRONG[1]",
                "OEGD_STRONG[0.125]",
                "OEGD_STRONG[0.25]",
                "OEGD_STRONG[0.5]",
                "OEGD_STRONG[1]",
                "ONS[0.125]",
                "ONS[0.25]",
                "ONS[0.5]",
                "ONS[1]",
                "OGD_CONVEX[0]",
                "SOGD[0]",
            ]
        );
        for p in &pool {
            assert_eq!(p.expert.predict(), ctx().set.center());
        }
    }

    #[test]
    fn pool_errors() {
        use AlgorithmId::*;
        assert!(build_expert_pool(&[], &[], &[], 8, &ctx()).is_err());
        assert!(build_expert_pool(&[Ons.into()], &[], &[], 8, &ctx()).is_err());
        assert!(build_expert_pool(&[OgdStrong.into(), OgdStrong.into()], &[], &[], 8, &ctx()).is_err());
    }

    struct Frozen {
        x: Vector,
        rounds: usize,
    }

    impl Expert for Frozen {
        fn label(&self) -> String {
            "FROZEN".into()
        }
        fn param(&self) -> f64 {
            0.0
        }
        fn predict(&self) -> &Vector {
            &self.x
        }
        fn update(&mut self, _loss: &dyn Loss) -> Result<()> {
            self.rounds += 1;
            Ok(())
        }
        fn round(&self) -> usize {
            self.rounds
        }
        fn gradient_queries(&self) -> usize {
            0
        }
    }

    struct FrozenFactory;

    impl ExpertFactory for FrozenFactory {
        fn name(&self) -> &str {
            "FROZEN"
        }
        fn create(&self, _param: f64, ctx: &ExpertContext) -> Result<Box<dyn Expert>> {
            Ok(Box::new(Frozen { x: ctx.set.center().clone(), rounds: 0 }))
        }
    }

    #[test]
    fn custom_experts_join_after_builtins() {
        let custom = AlgorithmSpec::Custom(Arc::new(FrozenFactory));
        let pool = build_expert_pool(
            &[custom.clone(), AlgorithmId::OgdStrong.into()],
            &[],
            &[custom],
            4,
            &ctx(),
        )
        .unwrap();
        assert_eq!(pool.len(), 3 + 3 + 1);
        assert_eq!(pool[2].expert.label(), "OGD_STRONG");
        assert_eq!(pool[3].expert.label(), "FROZEN");
        assert_eq!(pool[6].block, StreamClass::Convex);
    }

    #[test]
    fn algorithm_ids_round_trip() {
        for id in AlgorithmId::ALL {
            assert_eq!(id.as_str().parse::<AlgorithmId>().unwrap(), id);
        }
        assert!("ADAM".parse::<AlgorithmId>().is_err());
    }
}
