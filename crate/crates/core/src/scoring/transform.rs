use std::fmt;

use crate::error::{Error, Result};
use crate::poisson::{self, NumericsConfig, PoissonParams};
use crate::scalar::Scalar;

use super::schema::{Attribute, AttributeKind};

/// Per-attribute map into `[0, 1]`. Lower outputs are better.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transform<T> {
    Identity,
    /// `value^p`, `p ≥ 1`.
    Power(T),
    /// `P(X ≤ k)` with `X ~ Po(value)`.
    PoissonCdf(T),
    /// `P(X > k)` with `X ~ Po(value)`.
    PoissonSurvival(T),
    /// CDF branch when `k < value`, survival branch otherwise.
    Peak(T),
    /// `1 − value`.
    Complement,
}

impl<T: Scalar> fmt::Display for Transform<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transform::Identity => f.write_str("identity"),
            Transform::Power(p) => write!(f, "power(p={p})"),
            Transform::PoissonCdf(k) => write!(f, "poisson_cdf(k={k})"),
            Transform::PoissonSurvival(k) => write!(f, "poisson_survival(k={k})"),
            Transform::Peak(k) => write!(f, "peak(k={k})"),
            Transform::Complement => f.write_str("complement"),
        }
    }
}

impl<T: Scalar> Transform<T> {
    /// Attribute kind this transform is defined on.
    pub fn required_kind(&self) -> AttributeKind {
        match self {
            Transform::Identity | Transform::Power(_) | Transform::Complement => {
                AttributeKind::Normalized
            }
            Transform::PoissonCdf(_) | Transform::PoissonSurvival(_) | Transform::Peak(_) => {
                AttributeKind::Rate
            }
        }
    }

    /// Every kind except [`Transform::Peak`] is monotone in the raw value.
    pub fn is_monotone(&self) -> bool {
        !matches!(self, Transform::Peak(_))
    }

    pub fn is_poisson(&self) -> bool {
        self.required_kind() == AttributeKind::Rate
    }

    /// Checks parameters and kind compatibility with `attribute`.
    pub fn validate(&self, attribute: &Attribute) -> Result<()> {
        let fail = |reason: String| Error::Transform {
            attribute: attribute.name.clone(),
            reason,
        };
        if self.required_kind() != attribute.kind {
            return Err(fail(format!(
                "{self} requires a {} attribute, found {}",
                self.required_kind(),
                attribute.kind
            )));
        }
        match *self {
            Transform::Power(p) if !(p >= T::one() && p.is_finite()) => {
                Err(fail(format!("power exponent must be a finite value >= 1, got {p}")))
            }
            Transform::PoissonCdf(k) | Transform::PoissonSurvival(k) | Transform::Peak(k)
                if !(k >= T::zero() && k.is_finite()) =>
            {
                Err(fail(format!("count threshold must be finite and >= 0, got {k}")))
            }
            _ => Ok(()),
        }
    }
}

/// Evaluates `tr` on one raw attribute value.
pub fn apply_transform<T: Scalar>(
    tr: &Transform<T>,
    attribute: &Attribute,
    value: T,
    config: &NumericsConfig<T>,
) -> Result<T> {
    let fail = |reason: String| Error::Transform {
        attribute: attribute.name.clone(),
        reason,
    };
    tr.validate(attribute)?;
    attribute.kind.check(value).map_err(&fail)?;
    let out = match *tr {
        Transform::Identity => value,
        Transform::Power(p) => value.powf(p),
        Transform::Complement => T::one() - value,
        Transform::PoissonCdf(k) => {
            let params = PoissonParams::new(value).map_err(|e| fail(e.to_string()))?;
            poisson::clamped_cdf(params, k, config).map_err(|e| fail(e.to_string()))?
        }
        Transform::PoissonSurvival(k) => {
            let params = PoissonParams::new(value).map_err(|e| fail(e.to_string()))?;
            poisson::clamped_survival(params, k, config).map_err(|e| fail(e.to_string()))?
        }
        Transform::Peak(k) => {
            let params = PoissonParams::new(value).map_err(|e| fail(e.to_string()))?;
            let r = if k < value {
                poisson::clamped_cdf(params, k, config)
            } else {
                poisson::clamped_survival(params, k, config)
            };
            r.map_err(|e| fail(e.to_string()))?
        }
    };
    Ok(out.max(T::zero()).min(T::one()))
}
