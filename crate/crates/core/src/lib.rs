//! Universal online convex optimization.
//!
//! A pool of black-box experts, each tuned for one function class and one
//! guess of its curvature parameter, runs on the original losses. An
//! Adapt-ML-Prod meta layer mixes their predictions using only the gradient
//! at the played point, normalized into `[0, 1]` with the known `G` and `D`.

pub mod error;
pub mod experts;
pub mod geometry;
pub mod losses;
pub mod meta;
pub mod usc;
pub mod witness;

pub use error::{Error, Result};
pub use experts::{
    build_expert_pool, build_grid, AlgorithmId, AlgorithmSpec, Expert, ExpertContext, ExpertFactory, ParamGrid,
    PooledExpert,
};
pub use geometry::{generalized_project, FeasibleSet, SetKind, Vector, MEMBERSHIP_TOL};
pub use losses::{generate_stream, ClassTags, Loss, StreamClass, StreamConfig, SyntheticLoss};
pub use meta::{gamma_constant, normalized_expert_loss, AdaptMlProd, MetaLearner};
pub use usc::{RoundRecord, UscLearner};
