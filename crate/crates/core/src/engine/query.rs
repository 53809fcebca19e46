use std::time::{Duration, Instant};

use crate::error::Result;
use crate::scalar::Scalar;
use crate::scoring::{score_matrix_from_transformed, transformed_rows, Relation, ScoringFamily};

use super::{
    nd_from_scores, pareto_dominates, po_from_scores, require_non_empty, sky_from_transformed,
    verify_witness, EngineConfig, SetResult, Witness,
};

/// Which sets a query should produce.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Outputs {
    pub sky: bool,
    pub nd: bool,
    pub po: bool,
}

impl Outputs {
    pub fn all() -> Self {
        Self {
            sky: true,
            nd: true,
            po: true,
        }
    }

    pub fn none() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        !(self.sky || self.nd || self.po)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimings {
    pub score: Duration,
    pub sky: Duration,
    pub nd: Duration,
    pub po: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult<T> {
    pub sky: Option<SetResult<T>>,
    pub nd: Option<SetResult<T>>,
    pub po: Option<SetResult<T>>,
    pub timing: PhaseTimings,
    pub config: EngineConfig<T>,
    /// Polytope vertices the scores were evaluated at.
    pub vertices: Vec<Vec<T>>,
    /// True when Poisson terms were evaluated with the band clamp.
    pub clamp_used: bool,
}

impl<T: Scalar> QueryResult<T> {
    /// `po ⊆ nd ⊆ sky` over whichever sets are present.
    ///
    /// Guaranteed for monotone families whenever transformed values and
    /// vertex scores of distinct tuples differ by more than the tolerance.
    /// Closer ties can keep a Pareto-dominated tuple in ND, since ND only
    /// counts strict gaps beyond the tolerance while SKY compares exactly.
    pub fn containment_holds(&self) -> bool {
        let po_nd = match (&self.po, &self.nd) {
            (Some(po), Some(nd)) => po.is_subset_of(nd),
            _ => true,
        };
        let nd_sky = match (&self.nd, &self.sky) {
            (Some(nd), Some(sky)) => nd.is_subset_of(sky),
            _ => true,
        };
        po_nd && nd_sky
    }

    /// Re-verifies every recorded witness from freshly computed scores.
    pub fn verify_witnesses(
        &self,
        relation: &Relation<T>,
        family: &ScoringFamily<T>,
    ) -> Result<bool> {
        let numerics = self.config.numerics();
        let rows = transformed_rows(relation, family, &numerics, false)?;
        let scores = score_matrix_from_transformed(relation, family, &rows);
        let tol = self.config.tolerance;
        if let Some(sky) = &self.sky {
            for (victim, witness) in &sky.witnesses {
                let Witness::Dominator(by) = witness else {
                    return Ok(false);
                };
                let a = &rows[scores.index_of(by)?];
                let b = &rows[scores.index_of(victim)?];
                if !pareto_dominates(a, b) {
                    return Ok(false);
                }
            }
        }
        for set in [&self.nd, &self.po].into_iter().flatten() {
            for (victim, witness) in &set.witnesses {
                if !verify_witness(&scores, victim, witness, tol)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Runs the requested operators over one shared score matrix.
pub fn run_query<T: Scalar>(
    relation: &Relation<T>,
    family: &ScoringFamily<T>,
    config: &EngineConfig<T>,
    want: Outputs,
) -> Result<QueryResult<T>> {
    config.validate()?;
    let mut result = QueryResult {
        sky: None,
        nd: None,
        po: None,
        timing: PhaseTimings::default(),
        config: *config,
        vertices: family.polytope().vertices().to_vec(),
        clamp_used: config.use_clamp && family.has_poisson_terms(),
    };
    if want.is_empty() {
        return Ok(result);
    }
    require_non_empty(relation)?;

    let started = Instant::now();
    let numerics = config.numerics();
    let rows = config.run(|| transformed_rows(relation, family, &numerics, config.parallelism > 1))??;
    let scores = score_matrix_from_transformed(relation, family, &rows);
    result.timing.score = started.elapsed();

    if want.sky {
        let started = Instant::now();
        result.sky = Some(sky_from_transformed(relation, &rows));
        result.timing.sky = started.elapsed();
    }
    if want.nd || want.po {
        let started = Instant::now();
        let nd = nd_from_scores(&scores, config)?;
        result.timing.nd = started.elapsed();
        if want.po {
            let started = Instant::now();
            result.po = Some(po_from_scores(&scores, &nd.ids, config)?);
            result.timing.po = started.elapsed();
        }
        if want.nd {
            result.nd = Some(nd);
        }
    }
    Ok(result)
}
