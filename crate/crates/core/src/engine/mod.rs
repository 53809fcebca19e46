//! Skyline operators over a scoring family.
//!
//! Lower scores win. `s` F-dominates `t` when `s` scores no worse than `t` at
//! every polytope vertex (within tolerance) and strictly better at one; since
//! every score is linear in the weights, checking vertices covers the whole
//! polytope.

mod query;

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lp::combination_test_rows;
use crate::poisson::NumericsConfig;
use crate::scalar::Scalar;
use crate::scoring::{
    score_matrix_from_transformed, transformed_rows, Relation, ScoreMatrix, ScoringFamily,
};

pub use query::{run_query, Outputs, PhaseTimings, QueryResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig<T> {
    /// Dominance tolerance τ.
    pub tolerance: T,
    /// Evaluate Poisson terms with the band clamp.
    pub use_clamp: bool,
    /// Worker threads for scoring and dominance sweeps; 1 runs inline.
    pub parallelism: usize,
    pub numerics: NumericsConfig<T>,
}

impl<T: Scalar> Default for EngineConfig<T> {
    fn default() -> Self {
        Self {
            tolerance: T::default_tolerance(),
            use_clamp: false,
            parallelism: 1,
            numerics: NumericsConfig::default(),
        }
    }
}

impl<T: Scalar> EngineConfig<T> {
    pub fn with_clamp(mut self, enabled: bool) -> Self {
        self.use_clamp = enabled;
        self
    }

    /// Numerics settings with the clamp flag taken from this config.
    pub fn numerics(&self) -> NumericsConfig<T> {
        self.numerics.with_clamp(self.use_clamp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > T::zero() && self.tolerance.is_finite()) {
            return Err(Error::Config(format!(
                "dominance tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.parallelism == 0 {
            return Err(Error::Config("parallelism must be at least 1".into()));
        }
        self.numerics.validate()
    }

    fn run<R: Send>(&self, job: impl FnOnce() -> R + Send) -> Result<R> {
        if self.parallelism <= 1 {
            return Ok(job());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.parallelism)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        Ok(pool.install(job))
    }
}

/// Why a tuple was excluded from a result set.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness<T> {
    /// A single tuple that dominates the victim.
    Dominator(String),
    /// Mixture weights over other tuples whose combined scores dominate.
    Combination(Vec<(String, T)>),
}

/// Members of one result set plus a witness for every excluded tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct SetResult<T> {
    /// Member ids, sorted.
    pub ids: Vec<String>,
    pub witnesses: BTreeMap<String, Witness<T>>,
}

impl<T> SetResult<T> {
    fn from_parts(mut ids: Vec<String>, witnesses: BTreeMap<String, Witness<T>>) -> Self {
        ids.sort();
        Self { ids, witnesses }
    }

    pub fn contains(&self, id: &str) -> bool {
        self.ids.binary_search_by(|x| x.as_str().cmp(id)).is_ok()
    }

    pub fn is_subset_of(&self, other: &SetResult<T>) -> bool {
        self.ids.iter().all(|id| other.contains(id))
    }
}

/// Componentwise Pareto dominance, exact comparisons.
pub fn pareto_dominates<T: Scalar>(a: &[T], b: &[T]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

/// Vertex-wise dominance of score rows at tolerance `tol`.
#[inline]
pub fn row_dominates<T: Scalar>(s: &[T], t: &[T], tol: T) -> bool {
    let mut strict = false;
    for (&a, &b) in s.iter().zip(t) {
        if a > b + tol {
            return false;
        }
        if a < b - tol {
            strict = true;
        }
    }
    strict
}

/// Does `s` F-dominate `t`?
pub fn f_dominates<T: Scalar>(scores: &ScoreMatrix<T>, s: &str, t: &str, tolerance: T) -> Result<bool> {
    let si = scores.index_of(s)?;
    let ti = scores.index_of(t)?;
    if si == ti {
        return Err(Error::Domain("a tuple is never compared with itself".into()));
    }
    Ok(row_dominates(scores.row(si), scores.row(ti), tolerance))
}

fn sum_order<T: Scalar>(keys: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].partial_cmp(&keys[b]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
    order
}

fn require_non_empty<T: Scalar>(relation: &Relation<T>) -> Result<()> {
    if relation.is_empty() {
        return Err(Error::Domain("relation is empty".into()));
    }
    Ok(())
}

/// Classic skyline in transformed attribute space.
pub fn sky<T: Scalar>(
    relation: &Relation<T>,
    family: &ScoringFamily<T>,
    config: &EngineConfig<T>,
) -> Result<SetResult<T>> {
    config.validate()?;
    require_non_empty(relation)?;
    let rows = transformed_rows(relation, family, &config.numerics(), config.parallelism > 1)?;
    Ok(sky_from_transformed(relation, &rows))
}

/// Block-nested-loop skyline over rows pre-sorted by coordinate sum.
pub(crate) fn sky_from_transformed<T: Scalar>(relation: &Relation<T>, rows: &[Vec<T>]) -> SetResult<T> {
    let sums: Vec<T> = rows.iter().map(|r| r.iter().copied().sum()).collect();
    let mut window: Vec<usize> = Vec::new();
    let mut witnesses = BTreeMap::new();
    let id = |i: usize| relation.tuples()[i].id.clone();
    for t in sum_order(&sums) {
        if let Some(&w) = window.iter().find(|&&w| pareto_dominates(&rows[w], &rows[t])) {
            witnesses.insert(id(t), Witness::Dominator(id(w)));
            continue;
        }
        // Equal sums can hide a dominator behind its victim.
        window.retain(|&w| {
            if pareto_dominates(&rows[t], &rows[w]) {
                witnesses.insert(id(w), Witness::Dominator(id(t)));
                false
            } else {
                true
            }
        });
        window.push(t);
    }
    SetResult::from_parts(window.into_iter().map(id).collect(), witnesses)
}

/// Non-dominated flexible skyline.
pub fn nd<T: Scalar>(
    relation: &Relation<T>,
    family: &ScoringFamily<T>,
    config: &EngineConfig<T>,
) -> Result<SetResult<T>> {
    config.validate()?;
    require_non_empty(relation)?;
    let rows = transformed_rows(relation, family, &config.numerics(), config.parallelism > 1)?;
    let scores = score_matrix_from_transformed(relation, family, &rows);
    nd_from_scores(&scores, config)
}

/// ND over a precomputed score matrix.
///
/// Tuples are visited by ascending score sum and tested against the window
/// of survivors so far. Survivors are then swept against every tuple whose
/// sum could still hide a dominator, which keeps the result exact even where
/// tolerance makes dominance non-transitive.
pub fn nd_from_scores<T: Scalar>(scores: &ScoreMatrix<T>, config: &EngineConfig<T>) -> Result<SetResult<T>> {
    let tol = config.tolerance;
    let n = scores.len();
    let sums: Vec<T> = (0..n).map(|i| scores.row_sum(i)).collect();
    let order = sum_order(&sums);

    let mut window: Vec<usize> = Vec::new();
    let mut witnesses = BTreeMap::new();
    for &t in &order {
        let row = scores.row(t);
        match window.iter().find(|&&w| row_dominates(scores.row(w), row, tol)) {
            Some(&w) => {
                witnesses.insert(scores.id(t).to_owned(), Witness::Dominator(scores.id(w).to_owned()));
            }
            None => window.push(t),
        }
    }

    // A dominator's sum is below its victim's sum + (V − 2)·τ.
    let slack = tol * T::from_count(scores.vertex_count().max(1));
    let sorted_sums: Vec<T> = order.iter().map(|&i| sums[i]).collect();
    let sweep = |&t: &usize| -> Option<usize> {
        let limit = sums[t] + slack;
        let end = sorted_sums.partition_point(|&s| s <= limit);
        order[..end]
            .iter()
            .copied()
            .find(|&s| s != t && row_dominates(scores.row(s), scores.row(t), tol))
    };
    let found: Vec<Option<usize>> = if config.parallelism > 1 {
        config.run(|| window.par_iter().map(sweep).collect())?
    } else {
        window.iter().map(sweep).collect()
    };

    let mut members = Vec::with_capacity(window.len());
    for (&t, dominator) in window.iter().zip(found) {
        match dominator {
            Some(s) => {
                witnesses.insert(scores.id(t).to_owned(), Witness::Dominator(scores.id(s).to_owned()));
            }
            None => members.push(scores.id(t).to_owned()),
        }
    }
    Ok(SetResult::from_parts(members, witnesses))
}

/// Potentially optimal flexible skyline.
pub fn po<T: Scalar>(
    relation: &Relation<T>,
    family: &ScoringFamily<T>,
    config: &EngineConfig<T>,
) -> Result<SetResult<T>> {
    config.validate()?;
    require_non_empty(relation)?;
    let rows = transformed_rows(relation, family, &config.numerics(), config.parallelism > 1)?;
    let scores = score_matrix_from_transformed(relation, family, &rows);
    let nd = nd_from_scores(&scores, config)?;
    po_from_scores(&scores, &nd.ids, config)
}

/// PO restricted to the given ND members: `t` stays unless some convex
/// combination of the other members dominates it.
pub fn po_from_scores<T: Scalar>(
    scores: &ScoreMatrix<T>,
    nd_ids: &[String],
    config: &EngineConfig<T>,
) -> Result<SetResult<T>> {
    let tol = config.tolerance;
    let rows = nd_ids
        .iter()
        .map(|id| scores.index_of(id))
        .collect::<Result<Vec<_>>>()?;
    let test = |(pos, &t): (usize, &usize)| {
        let others: Vec<usize> = rows
            .iter()
            .enumerate()
            .filter(|&(p, _)| p != pos)
            .map(|(_, &r)| r)
            .collect();
        combination_test_rows(scores, &others, t, tol)
    };
    let outcomes = if config.parallelism > 1 {
        config.run(|| rows.par_iter().enumerate().map(test).collect::<Vec<_>>())?
    } else {
        rows.iter().enumerate().map(test).collect()
    };

    let mut members = Vec::new();
    let mut witnesses = BTreeMap::new();
    for (&t, outcome) in rows.iter().zip(outcomes) {
        let outcome = outcome?;
        let id = scores.id(t).to_owned();
        match outcome.witness {
            Some(w) if outcome.dominated => {
                witnesses.insert(id, Witness::Combination(w));
            }
            _ => members.push(id),
        }
    }
    Ok(SetResult::from_parts(members, witnesses))
}

/// Re-checks a witness against the score matrix. Dominator witnesses use the
/// vertex rule; combination witnesses use the mixture rule.
pub fn verify_witness<T: Scalar>(
    scores: &ScoreMatrix<T>,
    victim: &str,
    witness: &Witness<T>,
    tolerance: T,
) -> Result<bool> {
    match witness {
        Witness::Dominator(by) => {
            if by == victim {
                return Ok(false);
            }
            f_dominates(scores, by, victim, tolerance)
        }
        Witness::Combination(weights) => {
            crate::lp::verify_combination(scores, weights, victim, tolerance)
        }
    }
}
