use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::poisson::NumericsConfig;
use crate::scalar::Scalar;

use super::polytope::WeightPolytope;
use super::schema::{validate_tuple, AttributeSchema, Relation, Tuple};
use super::transform::{apply_transform, Transform};

/// The family `{ w ↦ Σ wᵢ·gᵢ(t[Aᵢ]) : w ∈ polytope }`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoringFamily<T> {
    schema: AttributeSchema,
    transforms: Vec<Transform<T>>,
    polytope: WeightPolytope<T>,
}

impl<T: Scalar> ScoringFamily<T> {
    pub fn new(
        schema: AttributeSchema,
        transforms: Vec<Transform<T>>,
        polytope: WeightPolytope<T>,
    ) -> Result<Self> {
        if transforms.len() != schema.arity() {
            return Err(Error::Schema(format!(
                "{} transforms for {} attributes",
                transforms.len(),
                schema.arity()
            )));
        }
        if polytope.dim() != schema.arity() {
            return Err(Error::Schema(format!(
                "weight polytope has dimension {}, schema has {} attributes",
                polytope.dim(),
                schema.arity()
            )));
        }
        for (tr, attr) in transforms.iter().zip(schema.attributes()) {
            tr.validate(attr)?;
        }
        Ok(Self {
            schema,
            transforms,
            polytope,
        })
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn transforms(&self) -> &[Transform<T>] {
        &self.transforms
    }

    pub fn polytope(&self) -> &WeightPolytope<T> {
        &self.polytope
    }

    pub fn is_monotone(&self) -> bool {
        self.transforms.iter().all(Transform::is_monotone)
    }

    pub fn has_poisson_terms(&self) -> bool {
        self.transforms.iter().any(Transform::is_poisson)
    }

    /// Same schema and transforms over another polytope.
    pub fn with_polytope(&self, polytope: WeightPolytope<T>) -> Result<Self> {
        Self::new(self.schema.clone(), self.transforms.clone(), polytope)
    }

    /// `gᵢ(t[Aᵢ])` for every attribute.
    pub fn transform_tuple(&self, tuple: &Tuple<T>, config: &NumericsConfig<T>) -> Result<Vec<T>> {
        validate_tuple(&self.schema, tuple)?;
        self.transforms
            .iter()
            .zip(self.schema.attributes())
            .zip(&tuple.values)
            .map(|((tr, attr), &v)| apply_transform(tr, attr, v, config))
            .collect()
    }

    /// `f_w(t)` for an arbitrary weight vector.
    pub fn score(&self, tuple: &Tuple<T>, weights: &[T], config: &NumericsConfig<T>) -> Result<T> {
        let g = self.transform_tuple(tuple, config)?;
        Ok(dot(weights, &g))
    }

    pub(crate) fn check_relation(&self, relation: &Relation<T>) -> Result<()> {
        if relation.schema() != &self.schema {
            return Err(Error::Schema(
                "relation schema differs from the scoring family schema".into(),
            ));
        }
        Ok(())
    }
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Transformed attribute values, one row per tuple, in relation order.
pub fn transformed_rows<T: Scalar>(
    relation: &Relation<T>,
    family: &ScoringFamily<T>,
    config: &NumericsConfig<T>,
    parallel: bool,
) -> Result<Vec<Vec<T>>> {
    family.check_relation(relation)?;
    config.validate()?;
    let eval = |t: &Tuple<T>| family.transform_tuple(t, config);
    if parallel {
        relation.tuples().par_iter().map(eval).collect()
    } else {
        relation.tuples().iter().map(eval).collect()
    }
}

/// Scores of every tuple at every polytope vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix<T> {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    vertices: usize,
    values: Vec<T>,
}

impl<T: Scalar> ScoreMatrix<T> {
    /// Builds a matrix from explicit rows, each of length `vertices`.
    pub fn from_rows(ids: Vec<String>, rows: Vec<Vec<T>>) -> Result<Self> {
        if ids.len() != rows.len() {
            return Err(Error::Schema(format!(
                "{} ids for {} score rows",
                ids.len(),
                rows.len()
            )));
        }
        let vertices = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != vertices) {
            return Err(Error::Schema("score rows have unequal lengths".into()));
        }
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::Schema(format!("duplicate tuple id `{id}`")));
            }
        }
        Ok(Self {
            ids,
            index,
            vertices,
            values: rows.into_iter().flatten().collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, row: usize) -> &str {
        &self.ids[row]
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownTuple(id.to_owned()))
    }

    pub fn row(&self, row: usize) -> &[T] {
        &self.values[row * self.vertices..(row + 1) * self.vertices]
    }

    pub fn row_by_id(&self, id: &str) -> Result<&[T]> {
        Ok(self.row(self.index_of(id)?))
    }

    pub fn get(&self, row: usize, vertex: usize) -> T {
        self.values[row * self.vertices + vertex]
    }

    pub fn row_sum(&self, row: usize) -> T {
        self.row(row).iter().copied().sum()
    }
}

/// `S[t][v] = Σᵢ w(v)ᵢ·gᵢ(t[Aᵢ])`. Transforms are evaluated once per tuple
/// and attribute, then reused across vertices.
pub fn score_matrix<T: Scalar>(
    relation: &Relation<T>,
    family: &ScoringFamily<T>,
    config: &NumericsConfig<T>,
) -> Result<ScoreMatrix<T>> {
    let rows = transformed_rows(relation, family, config, false)?;
    Ok(score_matrix_from_transformed(relation, family, &rows))
}

pub(crate) fn score_matrix_from_transformed<T: Scalar>(
    relation: &Relation<T>,
    family: &ScoringFamily<T>,
    transformed: &[Vec<T>],
) -> ScoreMatrix<T> {
    let vertices = family.polytope().vertices();
    let mut values = Vec::with_capacity(transformed.len() * vertices.len());
    for g in transformed {
        values.extend(vertices.iter().map(|w| dot(w, g)));
    }
    let ids: Vec<String> = relation.tuples().iter().map(|t| t.id.clone()).collect();
    let index = ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
    ScoreMatrix {
        ids,
        index,
        vertices: vertices.len(),
        values,
    }
}

/// True iff no two tuples of the sample share an identical score row.
pub fn is_tuple_distinguishing_sample<T: Scalar>(
    family: &ScoringFamily<T>,
    tuples: &[Tuple<T>],
    config: &NumericsConfig<T>,
) -> Result<bool> {
    let rows: Vec<Vec<T>> = tuples
        .iter()
        .map(|t| {
            let g = family.transform_tuple(t, config)?;
            Ok(family
                .polytope()
                .vertices()
                .iter()
                .map(|w| dot(w, &g))
                .collect())
        })
        .collect::<Result<_>>()?;
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            if rows[i] == rows[j] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
