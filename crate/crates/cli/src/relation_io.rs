//! Relation files: `id,<attr>...` CSV with decimal values.

use std::io::Write;
use std::path::Path;

use flexsky::{AttributeKind, AttributeSchema, Relation64, Tuple64};
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, CliResult};

pub fn load_relation(path: &Path, schema: &AttributeSchema) -> CliResult<Relation64> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    read_relation(file, schema).map_err(|e| match e {
        CliError::Data(msg) => CliError::Data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Parses CSV text against `schema`. Columns may come in any order but must
/// be exactly `id` plus the schema's attributes.
pub fn read_relation(input: impl std::io::Read, schema: &AttributeSchema) -> CliResult<Relation64> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = reader
        .headers()
        .map_err(|e| CliError::Data(format!("header: {e}")))?
        .clone();
    let id_col = header
        .iter()
        .position(|h| h == "id")
        .ok_or_else(|| CliError::Data("header: missing `id` column".into()))?;
    let mut columns = Vec::with_capacity(schema.arity());
    for name in schema.names() {
        let col = header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Data(format!("header: missing column `{name}`")))?;
        columns.push(col);
    }
    if let Some(extra) = header
        .iter()
        .find(|h| *h != "id" && schema.index_of(h).is_none())
    {
        return Err(CliError::Data(format!("header: column `{extra}` is not in the schema")));
    }
    if header.len() != schema.arity() + 1 {
        return Err(CliError::Data("header: duplicate column".into()));
    }

    let mut relation = Relation64::new(schema.clone());
    for (i, record) in reader.records().enumerate() {
        // header is line 1
        let row = i + 2;
        let record = record.map_err(|e| CliError::Data(format!("row {row}: {e}")))?;
        let id = record.get(id_col).unwrap_or_default().to_owned();
        if id.is_empty() {
            return Err(CliError::Data(format!("row {row}: empty id")));
        }
        let mut values = Vec::with_capacity(columns.len());
        for (attr, &col) in schema.attributes().iter().zip(&columns) {
            let cell = record.get(col).unwrap_or_default();
            let value: f64 = cell.parse().map_err(|_| {
                CliError::Data(format!(
                    "row {row}: tuple `{id}`, attribute `{}`: `{cell}` is not a decimal number",
                    attr.name
                ))
            })?;
            attr.kind.check(value).map_err(|reason| {
                CliError::Data(format!(
                    "row {row}: tuple `{id}`, attribute `{}`, value {cell}: {reason}",
                    attr.name
                ))
            })?;
            values.push(value);
        }
        relation
            .push(Tuple64::new(id, values))
            .map_err(|e| CliError::Data(format!("row {row}: {e}")))?;
    }
    Ok(relation)
}

/// Decimal with 17 significant digits, enough to round-trip any `f64`.
pub fn format_value(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.16e}");
    let exp: i32 = sci[sci.find('e').map_or(0, |p| p + 1)..].parse().unwrap_or(0);
    let decimals = (16 - exp).max(0) as usize;
    format!("{v:.decimals$}")
}

pub fn write_relation(relation: &Relation64, out: &mut impl Write) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["id".to_owned()];
    header.extend(relation.schema().names().map(str::to_owned));
    w.write_record(&header)?;
    for t in relation.tuples() {
        let mut record = vec![t.id.clone()];
        record.extend(t.values.iter().map(|&v| format_value(v)));
        w.write_record(&record)?;
    }
    w.flush()
}

/// Range rate attributes are drawn from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRange {
    pub min: f64,
    pub max: f64,
}

impl Default for RateRange {
    fn default() -> Self {
        Self { min: 1.0, max: 50.0 }
    }
}

/// Seeded synthetic relation: rates uniform on `rates`, normalized values
/// uniform on `[0, 1]`. Ids are `t` plus a zero-padded index.
pub fn gen_dataset(
    n: usize,
    schema: &AttributeSchema,
    seed: u64,
    rates: RateRange,
) -> CliResult<Relation64> {
    if n == 0 {
        return Err(CliError::Usage("n must be at least 1".into()));
    }
    if !(rates.min >= 0.0 && rates.min <= rates.max && rates.max.is_finite()) {
        return Err(CliError::Usage(format!(
            "rate range [{}, {}] must satisfy 0 <= min <= max < inf",
            rates.min, rates.max
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Uniform::new_inclusive(0.0, 1.0);
    let rate = Uniform::new_inclusive(rates.min, rates.max);
    let width = n.to_string().len();
    let mut relation = Relation64::new(schema.clone());
    for i in 0..n {
        let values = schema
            .attributes()
            .iter()
            .map(|a| match a.kind {
                AttributeKind::Normalized => unit.sample(&mut rng),
                AttributeKind::Rate => rate.sample(&mut rng),
            })
            .collect();
        relation
            .push(Tuple64::new(format!("t{i:0width$}"), values))
            .map_err(|e| CliError::core("gen", e))?;
    }
    Ok(relation)
}

/// Parses `name:kind,name:kind` (kind is `rate` or `normalized`).
pub fn parse_schema_arg(text: &str) -> CliResult<AttributeSchema> {
    let mut attributes = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, kind) = part
            .split_once(':')
            .ok_or_else(|| CliError::Usage(format!("schema entry `{part}` is not name:kind")))?;
        let kind = match kind.trim() {
            "rate" => AttributeKind::Rate,
            "normalized" => AttributeKind::Normalized,
            other => return Err(CliError::Usage(format!("unknown attribute kind `{other}`"))),
        };
        attributes.push(flexsky::Attribute::new(name.trim(), kind));
    }
    AttributeSchema::new(attributes).map_err(|e| CliError::Usage(e.to_string()))
}
