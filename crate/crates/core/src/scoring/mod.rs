//! Scoring families: per-attribute transforms combined linearly under a
//! constrained weight polytope.

mod matrix;
mod polytope;
mod schema;
mod transform;

pub use matrix::{
    is_tuple_distinguishing_sample, score_matrix, transformed_rows, ScoreMatrix, ScoringFamily,
};
pub(crate) use matrix::score_matrix_from_transformed;
pub use polytope::{
    enumerate_vertices, LinearConstraint, Sense, WeightPolytope, MAX_VERTEX_DIMENSION,
};
pub use schema::{Attribute, AttributeKind, AttributeSchema, Relation, Tuple};
pub use transform::{apply_transform, Transform};
