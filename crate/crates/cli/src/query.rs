//! Query documents (TOML).
//!
//! ```toml
//! [[schema]]
//! name = "rate"
//! kind = "rate"
//!
//! [[schema]]
//! name = "dist"
//! kind = "normalized"
//!
//! [transforms]
//! rate = { kind = "poisson_survival", k = 8 }
//! dist = { kind = "identity" }
//!
//! [[constraints]]
//! order = ["rate", "dist"]          # w_rate <= w_dist
//!
//! [[constraints]]
//! coefficients = [1.0, 1.0]
//! sense = "eq"
//! bound = 1.0
//!
//! [outputs]
//! sky = true
//! nd = true
//! po = true
//!
//! [engine]
//! clamp = false
//! tolerance = 1e-9
//! oracle = false
//! ```
//!
//! The simplex condition is always implied; listing it again is harmless.
//! Without constraints the family ranges over the whole simplex.

use std::collections::BTreeMap;
use std::path::Path;

use flexsky::{
    Attribute, AttributeKind, AttributeSchema, EngineConfig64, LinearConstraint, NumericsConfig64,
    Outputs, ScoringFamily64, Sense, Transform64, WeightPolytope64,
};
use serde::Deserialize;
use toml::Spanned;

use crate::error::{CliError, CliResult};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuery {
    schema: Vec<Spanned<RawAttribute>>,
    #[serde(default)]
    transforms: BTreeMap<String, Spanned<RawTransform>>,
    #[serde(default)]
    constraints: Vec<Spanned<RawConstraint>>,
    #[serde(default)]
    outputs: RawOutputs,
    #[serde(default)]
    engine: RawEngine,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAttribute {
    name: String,
    kind: RawKind,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawKind {
    Normalized,
    Rate,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawTransform {
    Identity,
    Power { p: f64 },
    PoissonCdf { k: f64 },
    PoissonSurvival { k: f64 },
    Peak { k: f64 },
    Complement,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstraint {
    coefficients: Option<Vec<f64>>,
    sense: Option<String>,
    bound: Option<f64>,
    /// Attribute names whose weights must be non-decreasing.
    order: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutputs {
    #[serde(default = "yes")]
    sky: bool,
    #[serde(default = "yes")]
    nd: bool,
    #[serde(default = "yes")]
    po: bool,
}

impl Default for RawOutputs {
    fn default() -> Self {
        Self {
            sky: true,
            nd: true,
            po: true,
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEngine {
    clamp: Option<bool>,
    tolerance: Option<f64>,
    oracle: Option<bool>,
    parallelism: Option<usize>,
    band_multiplier: Option<f64>,
}

/// Engine switches read from the `[engine]` section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineOptions {
    pub clamp: bool,
    pub tolerance: f64,
    pub oracle: bool,
    pub parallelism: usize,
    pub band_multiplier: f64,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            clamp: false,
            tolerance: 1e-9,
            oracle: false,
            parallelism: 1,
            band_multiplier: 2.0,
        }
    }
}

impl EngineOptions {
    pub fn engine_config(&self) -> EngineConfig64 {
        EngineConfig64 {
            tolerance: self.tolerance,
            use_clamp: self.clamp,
            parallelism: self.parallelism,
            numerics: NumericsConfig64 {
                band_multiplier: self.band_multiplier,
                ..NumericsConfig64::default()
            },
        }
    }
}

/// A validated query: the scoring family plus what to compute and how.
#[derive(Debug, Clone)]
pub struct QuerySpec {
    pub family: ScoringFamily64,
    pub outputs: Outputs,
    pub engine: EngineOptions,
}

impl QuerySpec {
    pub fn schema(&self) -> &AttributeSchema {
        self.family.schema()
    }
}

pub fn parse_query(path: &Path) -> CliResult<QuerySpec> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_query_str(&text).map_err(|e| match e {
        CliError::Data(msg) => CliError::Data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_query_str(text: &str) -> CliResult<QuerySpec> {
    let raw: RawQuery = toml::from_str(text).map_err(|e| CliError::Data(e.to_string()))?;
    let at = |span: std::ops::Range<usize>, field: String| {
        let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
        move |msg: String| CliError::Data(format!("line {line}, {field}: {msg}"))
    };

    let mut attributes = Vec::with_capacity(raw.schema.len());
    for (i, entry) in raw.schema.iter().enumerate() {
        let a = entry.get_ref();
        let kind = match a.kind {
            RawKind::Normalized => AttributeKind::Normalized,
            RawKind::Rate => AttributeKind::Rate,
        };
        attributes.push(Attribute::new(a.name.clone(), kind));
        if a.name.is_empty() {
            return Err(at(entry.span(), format!("schema[{i}]"))("empty attribute name".into()));
        }
    }
    let schema = AttributeSchema::new(attributes)
        .map_err(|e| CliError::Data(format!("schema: {e}")))?;

    for (name, tr) in &raw.transforms {
        if schema.index_of(name).is_none() {
            return Err(at(tr.span(), format!("transforms.{name}"))(
                "no such attribute in schema".into(),
            ));
        }
    }
    let mut transforms = Vec::with_capacity(schema.arity());
    for attr in schema.attributes() {
        let Some(entry) = raw.transforms.get(&attr.name) else {
            return Err(CliError::Data(format!(
                "transforms: no transform given for attribute `{}`",
                attr.name
            )));
        };
        let tr = match *entry.get_ref() {
            RawTransform::Identity => Transform64::Identity,
            RawTransform::Power { p } => Transform64::Power(p),
            RawTransform::PoissonCdf { k } => Transform64::PoissonCdf(k),
            RawTransform::PoissonSurvival { k } => Transform64::PoissonSurvival(k),
            RawTransform::Peak { k } => Transform64::Peak(k),
            RawTransform::Complement => Transform64::Complement,
        };
        tr.validate(attr)
            .map_err(|e| at(entry.span(), format!("transforms.{}", attr.name))(e.to_string()))?;
        transforms.push(tr);
    }

    let mut constraints = Vec::new();
    for (i, entry) in raw.constraints.iter().enumerate() {
        let fail = at(entry.span(), format!("constraints[{i}]"));
        constraints.extend(constraint_rows(entry.get_ref(), &schema).map_err(fail)?);
    }
    let polytope = WeightPolytope64::new(schema.arity(), constraints)
        .map_err(|e| CliError::Data(format!("constraints: {e}")))?;

    let family = ScoringFamily64::new(schema, transforms, polytope)
        .map_err(|e| CliError::Data(format!("transforms: {e}")))?;

    let defaults = EngineOptions::default();
    let engine = EngineOptions {
        clamp: raw.engine.clamp.unwrap_or(defaults.clamp),
        tolerance: raw.engine.tolerance.unwrap_or(defaults.tolerance),
        oracle: raw.engine.oracle.unwrap_or(defaults.oracle),
        parallelism: raw.engine.parallelism.unwrap_or(defaults.parallelism),
        band_multiplier: raw.engine.band_multiplier.unwrap_or(defaults.band_multiplier),
    };
    engine
        .engine_config()
        .validate()
        .map_err(|e| CliError::Data(format!("engine: {e}")))?;

    Ok(QuerySpec {
        family,
        outputs: Outputs {
            sky: raw.outputs.sky,
            nd: raw.outputs.nd,
            po: raw.outputs.po,
        },
        engine,
    })
}

fn constraint_rows(
    raw: &RawConstraint,
    schema: &AttributeSchema,
) -> Result<Vec<LinearConstraint<f64>>, String> {
    let dim = schema.arity();
    match (&raw.order, &raw.coefficients) {
        (Some(_), Some(_)) => Err("give either `order` or `coefficients`, not both".into()),
        (None, None) => Err("missing `coefficients` (or `order`)".into()),
        (Some(order), None) => {
            if raw.sense.is_some() || raw.bound.is_some() {
                return Err("`order` takes no `sense` or `bound`".into());
            }
            if order.len() < 2 {
                return Err("`order` needs at least two attributes".into());
            }
            let idx = order
                .iter()
                .map(|n| schema.index_of(n).ok_or_else(|| format!("unknown attribute `{n}`")))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(idx
                .windows(2)
                .map(|p| LinearConstraint::ordered(dim, p[0], p[1]))
                .collect())
        }
        (None, Some(coefficients)) => {
            if coefficients.len() != dim {
                return Err(format!(
                    "expected {dim} coefficients, got {}",
                    coefficients.len()
                ));
            }
            let sense = match raw.sense.as_deref() {
                Some("le") | Some("<=") => Sense::Le,
                Some("ge") | Some(">=") => Sense::Ge,
                Some("eq") | Some("=") | Some("==") => Sense::Eq,
                Some(other) => return Err(format!("unknown sense `{other}` (use le, ge or eq)")),
                None => return Err("missing `sense`".into()),
            };
            let bound = raw.bound.ok_or("missing `bound`")?;
            if !bound.is_finite() || coefficients.iter().any(|c| !c.is_finite()) {
                return Err("coefficients and bound must be finite".into());
            }
            Ok(vec![LinearConstraint::new(coefficients.clone(), sense, bound)])
        }
    }
}
