//! Flexible skyline queries.
//!
//! Given a relation and a family of linear scoring functions (one transform
//! per attribute, weights ranging over a polytope), the engine computes
//!
//! * `SKY`: the Pareto skyline in transformed space,
//! * `ND`: tuples no other tuple beats under every function of the family,
//! * `PO`: tuples that are the unique best under at least one function.
//!
//! Rate attributes can be scored through the Poisson CDF or survival
//! function, optionally with a band clamp that replaces far-tail
//! evaluations by their limits.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the common double-precision case.

pub mod engine;
pub mod error;
pub mod lp;
pub mod oracle;
pub mod poisson;
pub mod scalar;
pub mod scoring;

pub use engine::{
    f_dominates, nd, po, run_query, sky, EngineConfig, Outputs, QueryResult, SetResult, Witness,
};
pub use error::{Error, Result};
pub use poisson::{NumericsConfig, PoissonParams};
pub use scalar::Scalar;
pub use scoring::{
    Attribute, AttributeKind, AttributeSchema, LinearConstraint, Relation, ScoreMatrix,
    ScoringFamily, Sense, Transform, Tuple, WeightPolytope,
};

pub type Relation64 = Relation<f64>;
pub type Tuple64 = Tuple<f64>;
pub type Transform64 = Transform<f64>;
pub type ScoringFamily64 = ScoringFamily<f64>;
pub type WeightPolytope64 = WeightPolytope<f64>;
pub type ScoreMatrix64 = ScoreMatrix<f64>;
pub type EngineConfig64 = EngineConfig<f64>;
pub type NumericsConfig64 = NumericsConfig<f64>;
pub type QueryResult64 = QueryResult<f64>;
pub type PoissonParams64 = PoissonParams<f64>;

pub type Relation32 = Relation<f32>;
pub type ScoringFamily32 = ScoringFamily<f32>;
pub type EngineConfig32 = EngineConfig<f32>;
