use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Value domain of an attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttributeKind {
    /// Values in `[0, 1]`.
    Normalized,
    /// Non-negative mean event rates, stored raw.
    Rate,
}

impl fmt::Display for AttributeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttributeKind::Normalized => f.write_str("normalized"),
            AttributeKind::Rate => f.write_str("rate"),
        }
    }
}

impl AttributeKind {
    pub fn check<T: Scalar>(&self, value: T) -> std::result::Result<(), String> {
        if !value.is_finite() {
            return Err(format!("{value} is not a finite number"));
        }
        match self {
            AttributeKind::Normalized if value < T::zero() || value > T::one() => {
                Err(format!("{value} lies outside [0, 1]"))
            }
            AttributeKind::Rate if value < T::zero() => Err(format!("{value} is negative")),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    pub name: String,
    pub kind: AttributeKind,
}

impl Attribute {
    pub fn new(name: impl Into<String>, kind: AttributeKind) -> Self {
        Self {
            name: name.into(),
            kind,
        }
    }

    pub fn normalized(name: impl Into<String>) -> Self {
        Self::new(name, AttributeKind::Normalized)
    }

    pub fn rate(name: impl Into<String>) -> Self {
        Self::new(name, AttributeKind::Rate)
    }
}

/// Ordered, uniquely named attribute list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeSchema {
    attributes: Vec<Attribute>,
}

impl AttributeSchema {
    pub fn new(attributes: Vec<Attribute>) -> Result<Self> {
        if attributes.is_empty() {
            return Err(Error::Schema("schema declares no attributes".into()));
        }
        let mut seen = HashSet::new();
        for a in &attributes {
            if a.name.is_empty() {
                return Err(Error::Schema("attribute names must be non-empty".into()));
            }
            if a.name == "id" {
                return Err(Error::Schema("`id` is reserved for the tuple identifier".into()));
            }
            if !seen.insert(a.name.as_str()) {
                return Err(Error::Schema(format!("duplicate attribute `{}`", a.name)));
            }
        }
        Ok(Self { attributes })
    }

    pub fn arity(&self) -> usize {
        self.attributes.len()
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn attribute(&self, i: usize) -> &Attribute {
        &self.attributes[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.attributes.iter().map(|a| a.name.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tuple<T> {
    pub id: String,
    pub values: Vec<T>,
}

impl<T> Tuple<T> {
    pub fn new(id: impl Into<String>, values: Vec<T>) -> Self {
        Self {
            id: id.into(),
            values,
        }
    }
}

/// Tuples over a schema. Ids are unique and every value respects its
/// attribute's domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Relation<T> {
    schema: AttributeSchema,
    tuples: Vec<Tuple<T>>,
    ids: HashSet<String>,
}

impl<T: Scalar> Relation<T> {
    pub fn new(schema: AttributeSchema) -> Self {
        Self {
            schema,
            tuples: Vec::new(),
            ids: HashSet::new(),
        }
    }

    pub fn from_tuples(schema: AttributeSchema, tuples: Vec<Tuple<T>>) -> Result<Self> {
        let mut relation = Self::new(schema);
        for t in tuples {
            relation.push(t)?;
        }
        Ok(relation)
    }

    pub fn push(&mut self, tuple: Tuple<T>) -> Result<()> {
        validate_tuple(&self.schema, &tuple)?;
        if !self.ids.insert(tuple.id.clone()) {
            return Err(Error::SchemaMismatch {
                id: tuple.id,
                reason: "duplicate tuple id".into(),
            });
        }
        self.tuples.push(tuple);
        Ok(())
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn tuples(&self) -> &[Tuple<T>] {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// Same tuples in a different order.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            schema: self.schema.clone(),
            tuples: order.iter().map(|&i| self.tuples[i].clone()).collect(),
            ids: self.ids.clone(),
        }
    }

    /// Relation restricted to the tuples whose ids satisfy `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(&Tuple<T>) -> bool) -> Self {
        let tuples: Vec<_> = self.tuples.iter().filter(|t| keep(t)).cloned().collect();
        let ids = tuples.iter().map(|t| t.id.clone()).collect();
        Self {
            schema: self.schema.clone(),
            tuples,
            ids,
        }
    }
}

pub(crate) fn validate_tuple<T: Scalar>(schema: &AttributeSchema, tuple: &Tuple<T>) -> Result<()> {
    if tuple.values.len() != schema.arity() {
        return Err(Error::SchemaMismatch {
            id: tuple.id.clone(),
            reason: format!(
                "expected {} values, got {}",
                schema.arity(),
                tuple.values.len()
            ),
        });
    }
    for (attr, &v) in schema.attributes().iter().zip(&tuple.values) {
        attr.kind.check(v).map_err(|why| Error::SchemaMismatch {
            id: tuple.id.clone(),
            reason: format!("attribute `{}` ({}): {why}", attr.name, attr.kind),
        })?;
    }
    Ok(())
}
