//! Result documents (JSON) and the oracle cross-check.

use std::collections::BTreeMap;

use flexsky::oracle::{nd_brute, po_grid, sky_naive, GridSpec, PO_GRID_MAX_ND};
use flexsky::{QueryResult64, Relation64, SetResult, Witness};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::query::QuerySpec;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultDocument {
    pub sets: BTreeMap<&'static str, Vec<String>>,
    pub witnesses: BTreeMap<&'static str, BTreeMap<String, WitnessDoc>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<TimingDoc>,
    pub config: ConfigDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessDoc {
    DominatedBy(String),
    Combination(Vec<MixtureTerm>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureTerm {
    pub id: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingDoc {
    pub score: f64,
    pub sky: f64,
    pub nd: f64,
    pub po: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigDoc {
    pub tuples: usize,
    pub attributes: Vec<String>,
    pub transforms: Vec<String>,
    pub vertices: Vec<Vec<f64>>,
    pub tolerance: f64,
    pub clamp: bool,
    pub band_multiplier: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleDoc {
    pub sky: &'static str,
    pub nd: &'static str,
    pub po: &'static str,
    pub certified_po: usize,
    pub certified_not_po: usize,
    pub undecided: usize,
}

fn witness_doc(w: &Witness<f64>) -> WitnessDoc {
    match w {
        Witness::Dominator(id) => WitnessDoc::DominatedBy(id.clone()),
        Witness::Combination(terms) => WitnessDoc::Combination(
            terms
                .iter()
                .map(|(id, weight)| MixtureTerm {
                    id: id.clone(),
                    weight: *weight,
                })
                .collect(),
        ),
    }
}

fn ms(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

pub fn result_document(
    result: &QueryResult64,
    relation: &Relation64,
    query: &QuerySpec,
    with_timing: bool,
) -> ResultDocument {
    let mut sets = BTreeMap::new();
    let mut witnesses = BTreeMap::new();
    let named: [(&'static str, &Option<SetResult<f64>>); 3] =
        [("sky", &result.sky), ("nd", &result.nd), ("po", &result.po)];
    for (name, set) in named {
        if let Some(set) = set {
            sets.insert(name, set.ids.clone());
            witnesses.insert(
                name,
                set.witnesses
                    .iter()
                    .map(|(id, w)| (id.clone(), witness_doc(w)))
                    .collect(),
            );
        }
    }
    let family = &query.family;
    ResultDocument {
        sets,
        witnesses,
        timing_ms: with_timing.then(|| TimingDoc {
            score: ms(result.timing.score),
            sky: ms(result.timing.sky),
            nd: ms(result.timing.nd),
            po: ms(result.timing.po),
        }),
        config: ConfigDoc {
            tuples: relation.len(),
            attributes: family.schema().names().map(str::to_owned).collect(),
            transforms: family.transforms().iter().map(|t| t.to_string()).collect(),
            vertices: result.vertices.clone(),
            tolerance: result.config.tolerance,
            clamp: result.config.use_clamp,
            band_multiplier: result.config.numerics.band_multiplier,
        },
        oracle: None,
    }
}

/// Compares the engine's sets with the brute-force oracles. SKY and ND must
/// match exactly; PO must contain every certified member and no certified
/// non-member.
pub fn oracle_check(
    result: &QueryResult64,
    relation: &Relation64,
    query: &QuerySpec,
) -> CliResult<OracleDoc> {
    let family = &query.family;
    let numerics = result.config.numerics();
    let tol = result.config.tolerance;
    let fail = |e| CliError::core("oracle", e);
    let mut doc = OracleDoc {
        sky: "not requested",
        nd: "not requested",
        po: "not requested",
        certified_po: 0,
        certified_not_po: 0,
        undecided: 0,
    };

    if !result.verify_witnesses(relation, family).map_err(fail)? {
        return Err(CliError::OracleMismatch("a recorded witness does not verify".into()));
    }
    if let Some(sky) = &result.sky {
        let expect = sky_naive(relation, family, &numerics).map_err(fail)?;
        if !sky.ids.iter().eq(expect.iter()) {
            return Err(CliError::OracleMismatch(diff("sky", &sky.ids, &expect)));
        }
        doc.sky = "match";
    }
    let need_nd = result.nd.is_some() || result.po.is_some();
    let expect_nd = if need_nd {
        Some(nd_brute(relation, family, &numerics, tol).map_err(fail)?)
    } else {
        None
    };
    if let (Some(nd), Some(expect)) = (&result.nd, &expect_nd) {
        if !nd.ids.iter().eq(expect.iter()) {
            return Err(CliError::OracleMismatch(diff("nd", &nd.ids, expect)));
        }
        doc.nd = "match";
    }
    if let (Some(po), Some(expect_nd)) = (&result.po, &expect_nd) {
        if expect_nd.len() > PO_GRID_MAX_ND {
            doc.po = "skipped: nd too large for grid certification";
        } else {
            let cert = po_grid(relation, family, &numerics, tol, &GridSpec::default()).map_err(fail)?;
            if let Some(id) = cert.certified_po.iter().find(|id| !po.contains(id)) {
                return Err(CliError::OracleMismatch(format!(
                    "po: certified member `{id}` is missing"
                )));
            }
            if let Some(id) = cert.certified_not_po.iter().find(|id| po.contains(id)) {
                return Err(CliError::OracleMismatch(format!(
                    "po: `{id}` is certified not potentially optimal"
                )));
            }
            doc.po = "consistent";
            doc.certified_po = cert.certified_po.len();
            doc.certified_not_po = cert.certified_not_po.len();
            doc.undecided = cert.undecided.len();
        }
    }
    Ok(doc)
}

fn diff(name: &str, got: &[String], expect: &std::collections::BTreeSet<String>) -> String {
    let extra: Vec<&str> = got
        .iter()
        .filter(|id| !expect.contains(*id))
        .map(String::as_str)
        .collect();
    let missing: Vec<&str> = expect
        .iter()
        .filter(|id| !got.contains(id))
        .map(String::as_str)
        .collect();
    format!("{name}: engine has extra {extra:?}, lacks {missing:?}")
}

pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("documents serialize");
    text.push('\n');
    text
}
