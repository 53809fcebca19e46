//! Exact versus band-clamped evaluation on synthetic data.

use std::collections::BTreeSet;

use flexsky::scoring::{apply_transform, score_matrix};
use flexsky::{
    run_query, Attribute, AttributeSchema, EngineConfig64, LinearConstraint, Outputs, QueryResult64,
    Relation64, ScoringFamily64, Transform64, WeightPolytope64,
};
use serde::Serialize;

use crate::document::TimingDoc;
use crate::error::{CliError, CliResult};
use crate::relation_io::{gen_dataset, RateRange};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchConfig {
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    /// Count threshold of the Poisson survival terms.
    pub k: f64,
    pub rates: RateRange,
    /// Also run the clamped mode and compare.
    pub clamp: bool,
    pub engine: EngineConfig64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            n: 10_000,
            d: 3,
            seed: 1,
            k: 25.0,
            rates: RateRange::default(),
            clamp: true,
            engine: EngineConfig64::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    pub transforms: Vec<String>,
    pub vertices: Vec<Vec<f64>>,
    pub exact: ModeReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clamp: Option<ModeReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nd_difference: Option<SetDifference>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clamp_error: Option<ClampErrorStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub filtered: Option<FilteredReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeReport {
    pub nd_size: usize,
    pub po_size: usize,
    pub timing_ms: TimingDoc,
}

/// ND members found by only one of the two modes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetDifference {
    pub count: usize,
    pub only_exact: Vec<String>,
    pub only_clamp: Vec<String>,
}

/// Per-term `|clamped − exact|` over every Poisson evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClampErrorStats {
    pub evaluations: usize,
    /// Evaluations that fell outside the band.
    pub clamped: usize,
    pub max: f64,
    pub mean: f64,
}

/// Sub-instance whose pairwise score gaps all exceed `threshold`, so the
/// clamp cannot flip any dominance test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilteredReport {
    pub threshold: f64,
    pub tuples: usize,
    pub nd_difference: SetDifference,
}

/// Attributes alternate rate / normalized, starting with a rate; weights
/// are ordered `w0 <= w1 <= ...`.
pub fn bench_family(d: usize, k: f64) -> CliResult<ScoringFamily64> {
    if d == 0 {
        return Err(CliError::Usage("d must be at least 1".into()));
    }
    let mut attributes = Vec::with_capacity(d);
    let mut transforms = Vec::with_capacity(d);
    for i in 0..d {
        if i % 2 == 0 {
            attributes.push(Attribute::rate(format!("r{i}")));
            transforms.push(Transform64::PoissonSurvival(k));
        } else {
            attributes.push(Attribute::normalized(format!("x{i}")));
            transforms.push(Transform64::Identity);
        }
    }
    let schema = AttributeSchema::new(attributes).map_err(|e| CliError::core("bench", e))?;
    let constraints = (1..d).map(|i| LinearConstraint::ordered(d, i - 1, i)).collect();
    let polytope = WeightPolytope64::new(d, constraints).map_err(|e| CliError::core("bench", e))?;
    ScoringFamily64::new(schema, transforms, polytope).map_err(|e| CliError::core("bench", e))
}

fn mode_report(r: &QueryResult64) -> ModeReport {
    let ms = |d: std::time::Duration| d.as_secs_f64() * 1e3;
    ModeReport {
        nd_size: r.nd.as_ref().map_or(0, |s| s.ids.len()),
        po_size: r.po.as_ref().map_or(0, |s| s.ids.len()),
        timing_ms: TimingDoc {
            score: ms(r.timing.score),
            sky: ms(r.timing.sky),
            nd: ms(r.timing.nd),
            po: ms(r.timing.po),
        },
    }
}

fn nd_ids(r: &QueryResult64) -> BTreeSet<String> {
    r.nd.as_ref().map(|s| s.ids.iter().cloned().collect()).unwrap_or_default()
}

fn difference(exact: &BTreeSet<String>, clamp: &BTreeSet<String>) -> SetDifference {
    let only_exact: Vec<String> = exact.difference(clamp).cloned().collect();
    let only_clamp: Vec<String> = clamp.difference(exact).cloned().collect();
    SetDifference {
        count: only_exact.len() + only_clamp.len(),
        only_exact,
        only_clamp,
    }
}

fn engine_err(e: flexsky::Error) -> CliError {
    CliError::core("bench", e)
}

pub fn clamp_error_stats(
    relation: &Relation64,
    family: &ScoringFamily64,
    engine: &EngineConfig64,
) -> CliResult<ClampErrorStats> {
    let exact = engine.with_clamp(false).numerics();
    let clamped = engine.with_clamp(true).numerics();
    let mut stats = ClampErrorStats {
        evaluations: 0,
        clamped: 0,
        max: 0.0,
        mean: 0.0,
    };
    let mut total = 0.0;
    for t in relation.tuples() {
        for ((tr, attr), &v) in family.transforms().iter().zip(family.schema().attributes()).zip(&t.values) {
            if !tr.is_poisson() {
                continue;
            }
            let a = apply_transform(tr, attr, v, &exact).map_err(engine_err)?;
            let b = apply_transform(tr, attr, v, &clamped).map_err(engine_err)?;
            let e = (a - b).abs();
            stats.evaluations += 1;
            if e > 0.0 {
                stats.clamped += 1;
            }
            stats.max = stats.max.max(e);
            total += e;
        }
    }
    if stats.evaluations > 0 {
        stats.mean = total / stats.evaluations as f64;
    }
    Ok(stats)
}

/// Greedily keeps tuples (in relation order) whose exact scores differ from
/// every tuple kept so far by more than `threshold` at every vertex.
pub fn well_separated(
    relation: &Relation64,
    family: &ScoringFamily64,
    engine: &EngineConfig64,
    threshold: f64,
) -> CliResult<Relation64> {
    let scores = score_matrix(relation, family, &engine.with_clamp(false).numerics()).map_err(engine_err)?;
    let mut kept: Vec<usize> = Vec::new();
    for t in 0..scores.len() {
        let row = scores.row(t);
        let separated = kept.iter().all(|&s| {
            scores
                .row(s)
                .iter()
                .zip(row)
                .all(|(a, b)| (a - b).abs() > threshold)
        });
        if separated {
            kept.push(t);
        }
    }
    let keep: BTreeSet<&str> = kept.iter().map(|&i| scores.id(i)).collect();
    Ok(relation.filtered(|t| keep.contains(t.id.as_str())))
}

pub fn bench(config: &BenchConfig) -> CliResult<BenchReport> {
    let family = bench_family(config.d, config.k)?;
    let relation = gen_dataset(config.n, family.schema(), config.seed, config.rates)?;
    bench_relation(config, &relation, &family)
}

pub fn bench_relation(
    config: &BenchConfig,
    relation: &Relation64,
    family: &ScoringFamily64,
) -> CliResult<BenchReport> {
    let want = Outputs {
        nd: true,
        po: true,
        ..Outputs::none()
    };
    let exact_cfg = config.engine.with_clamp(false);
    let exact = run_query(relation, family, &exact_cfg, want).map_err(engine_err)?;
    let mut report = BenchReport {
        n: relation.len(),
        d: family.schema().arity(),
        seed: config.seed,
        transforms: family.transforms().iter().map(|t| t.to_string()).collect(),
        vertices: family.polytope().vertices().to_vec(),
        exact: mode_report(&exact),
        clamp: None,
        nd_difference: None,
        clamp_error: None,
        filtered: None,
    };
    if !config.clamp {
        return Ok(report);
    }

    let clamp_cfg = config.engine.with_clamp(true);
    let clamped = run_query(relation, family, &clamp_cfg, want).map_err(engine_err)?;
    report.clamp = Some(mode_report(&clamped));
    report.nd_difference = Some(difference(&nd_ids(&exact), &nd_ids(&clamped)));

    let stats = clamp_error_stats(relation, family, &config.engine)?;
    // Each score moves by at most `max` (weights sum to one), so a gap moves
    // by at most twice that.
    let threshold = 2.0 * stats.max + config.engine.tolerance;
    report.clamp_error = Some(stats);

    let sub = well_separated(relation, family, &config.engine, threshold)?;
    let want_nd = Outputs {
        nd: true,
        ..Outputs::none()
    };
    let a = run_query(&sub, family, &exact_cfg, want_nd).map_err(engine_err)?;
    let b = run_query(&sub, family, &clamp_cfg, want_nd).map_err(engine_err)?;
    report.filtered = Some(FilteredReport {
        threshold,
        tuples: sub.len(),
        nd_difference: difference(&nd_ids(&a), &nd_ids(&b)),
    });
    Ok(report)
}
