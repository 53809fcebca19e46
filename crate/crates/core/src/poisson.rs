//! Poisson distribution evaluation.
//!
//! Probabilities are accumulated with the multiplicative recurrence
//! `p(j+1) = p(j)·λ/(j+1)`, anchored at the mode so that neither tail
//! underflows before the bulk of the mass is reached. Single terms switch to
//! log space once `λ` or `k` exceed [`LOG_SPACE_THRESHOLD`].

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Above this rate or count, single mass terms are evaluated in log space.
pub const LOG_SPACE_THRESHOLD: u64 = 30;

/// Rate parameter of a Poisson distribution. Mean and variance are both `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonParams<T> {
    lambda: T,
}

impl<T: Scalar> PoissonParams<T> {
    pub fn new(lambda: T) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::Domain(format!("rate must be finite, got {lambda}")));
        }
        if lambda < T::zero() {
            return Err(Error::Domain(format!(
                "rate must be non-negative, got {lambda}"
            )));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn mean(&self) -> T {
        self.lambda
    }

    pub fn variance(&self) -> T {
        self.lambda
    }

    pub fn std_dev(&self) -> T {
        self.lambda.sqrt()
    }
}

/// Knobs for the approximate and inverse evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericsConfig<T> {
    /// Half-width of the clamp band in standard deviations.
    pub band_multiplier: T,
    /// Substitute the asymptotic limits 0/1 outside the band.
    pub clamp_enabled: bool,
    /// Upper search bound for [`quantile`]. `None` means `λ + 10√λ + 10`.
    pub quantile_upper_clamp: Option<T>,
    /// Relative truncation threshold for tail sums.
    pub summation_tolerance: T,
}

impl<T: Scalar> Default for NumericsConfig<T> {
    fn default() -> Self {
        Self {
            band_multiplier: T::lit(2.0),
            clamp_enabled: false,
            quantile_upper_clamp: None,
            summation_tolerance: T::default_summation_tolerance(),
        }
    }
}

impl<T: Scalar> NumericsConfig<T> {
    pub fn with_clamp(mut self, enabled: bool) -> Self {
        self.clamp_enabled = enabled;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.band_multiplier > T::zero() && self.band_multiplier.is_finite()) {
            return Err(Error::Config(format!(
                "band multiplier must be positive, got {}",
                self.band_multiplier
            )));
        }
        if !(self.summation_tolerance > T::zero()) {
            return Err(Error::Config("summation tolerance must be positive".into()));
        }
        if let Some(c) = self.quantile_upper_clamp {
            if !(c > T::zero() && c.is_finite()) {
                return Err(Error::Config(format!(
                    "quantile upper clamp must be positive, got {c}"
                )));
            }
        }
        Ok(())
    }

    fn quantile_bound(&self, lambda: T) -> Result<T> {
        match self.quantile_upper_clamp {
            Some(c) if c < lambda => Err(Error::Config(format!(
                "quantile upper clamp {c} is below the rate {lambda}"
            ))),
            Some(c) => Ok(c),
            None => Ok(lambda + T::lit(10.0) * lambda.sqrt() + T::lit(10.0)),
        }
    }
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> Band<T> {
    pub fn contains(&self, x: T) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// `ln(n!)`. Exact product below 31, Stirling series above (error < 1e-17).
pub fn ln_factorial<T: Scalar>(n: u64) -> T {
    if n <= LOG_SPACE_THRESHOLD {
        let mut prod = T::one();
        for j in 2..=n {
            prod *= T::lit(j as f64);
        }
        return prod.ln();
    }
    let x = T::lit(n as f64);
    let half = T::lit(0.5);
    let two_pi = T::lit(std::f64::consts::TAU);
    let inv = x.recip();
    let inv2 = inv * inv;
    let series = inv
        * (T::lit(1.0 / 12.0)
            - inv2 * (T::lit(1.0 / 360.0) - inv2 * (T::lit(1.0 / 1260.0) - inv2 * T::lit(1.0 / 1680.0))));
    x * x.ln() - x + half * (two_pi * x).ln() + series
}

/// `ln k! − (k + ½)·ln k + k − ½·ln 2π`, the remainder of Stirling's
/// formula. Small counts go through `f64` so that single precision does not
/// inherit the cancellation.
fn stirling_error<T: Scalar>(k: u64) -> T {
    let x = k as f64;
    if k <= LOG_SPACE_THRESHOLD {
        let exact = ln_factorial::<f64>(k) - (x + 0.5) * x.ln() + x
            - 0.5 * std::f64::consts::TAU.ln();
        return T::lit(exact);
    }
    let inv = T::lit(x).recip();
    let inv2 = inv * inv;
    inv * (T::lit(1.0 / 12.0)
        - inv2 * (T::lit(1.0 / 360.0) - inv2 * (T::lit(1.0 / 1260.0) - inv2 * T::lit(1.0 / 1680.0))))
}

/// `k·ln(k/λ) + λ − k` without cancellation when `k` is close to `λ`.
fn deviance<T: Scalar>(k: T, lambda: T) -> T {
    let diff = k - lambda;
    let sum = k + lambda;
    if diff.abs() >= T::lit(0.1) * sum {
        return k * (k / lambda).ln() + lambda - k;
    }
    let v = diff / sum;
    let v2 = v * v;
    let mut acc = diff * v;
    let mut term = T::lit(2.0) * k * v;
    let mut j = 1;
    loop {
        term *= v2;
        let next = acc + term / T::from_count(2 * j + 1);
        if next == acc {
            return acc;
        }
        acc = next;
        j += 1;
    }
}

/// `P(X = k)` for `X ~ Po(λ)`.
pub fn pmf<T: Scalar>(params: PoissonParams<T>, k: u64) -> T {
    let lambda = params.lambda;
    if lambda == T::zero() {
        return if k == 0 { T::one() } else { T::zero() };
    }
    if lambda > T::from_count(LOG_SPACE_THRESHOLD as usize) || k > LOG_SPACE_THRESHOLD {
        if k == 0 {
            return (-lambda).exp();
        }
        let kf = T::lit(k as f64);
        let log_p = -stirling_error::<T>(k) - deviance(kf, lambda);
        let norm = (T::lit(std::f64::consts::TAU) * kf).sqrt();
        return (log_p.exp() / norm).min(T::one());
    }
    let mut term = (-lambda).exp();
    for j in 1..=k {
        term *= lambda / T::lit(j as f64);
    }
    term
}

fn check_count<T: Scalar>(k: T) -> Result<u64> {
    if !k.is_finite() {
        return Err(Error::Domain(format!("count threshold must be finite, got {k}")));
    }
    if k < T::zero() {
        return Err(Error::Domain(format!(
            "count threshold must be non-negative, got {k}"
        )));
    }
    Ok(k.floor().to_u64().unwrap_or(u64::MAX))
}

fn mode<T: Scalar>(lambda: T) -> u64 {
    lambda.floor().to_u64().unwrap_or(u64::MAX)
}

/// Σ p(j) for j = from, from-1, ..., 0.
fn descend<T: Scalar>(params: PoissonParams<T>, from: u64, tol: T) -> T {
    let lambda = params.lambda;
    let mut term = pmf(params, from);
    let mut acc = term;
    let mut j = from;
    while j > 0 && term > T::zero() {
        let ratio = T::lit(j as f64) / lambda;
        term *= ratio;
        j -= 1;
        acc += term;
        let next = T::lit(j as f64) / lambda;
        if next < T::one() && term * next / (T::one() - next) <= tol * acc {
            break;
        }
    }
    acc
}

/// Σ p(j) for j = from, from+1, ... up to `to` (inclusive) or until the
/// remaining tail is negligible.
fn ascend<T: Scalar>(params: PoissonParams<T>, from: u64, to: Option<u64>, tol: T) -> T {
    let lambda = params.lambda;
    let mut term = pmf(params, from);
    let mut acc = term;
    let mut j = from;
    loop {
        if to.is_some_and(|end| j >= end) {
            break;
        }
        let ratio = lambda / T::lit((j + 1) as f64);
        if ratio < T::one() && term * ratio / (T::one() - ratio) <= tol * acc {
            break;
        }
        if term == T::zero() && T::lit(j as f64) >= lambda {
            break;
        }
        term *= ratio;
        j += 1;
        acc += term;
    }
    acc
}

/// `P(X ≤ k)` as a raw sum.
fn lower_mass<T: Scalar>(params: PoissonParams<T>, k: u64, tol: T) -> T {
    let m = mode(params.lambda);
    if k <= m {
        descend(params, k, tol)
    } else {
        descend(params, m, tol) + ascend(params, m + 1, Some(k), tol)
    }
}

/// `P(X ≥ k)` as a raw sum.
fn upper_mass<T: Scalar>(params: PoissonParams<T>, k: u64, tol: T) -> T {
    let m = mode(params.lambda);
    if k >= m {
        ascend(params, k, None, tol)
    } else {
        ascend(params, k, Some(m - 1), tol) + ascend(params, m, None, tol)
    }
}

/// `(P(X ≤ ⌊k⌋), P(X > ⌊k⌋))`. The smaller side is summed directly and the
/// other obtained as its complement.
fn split<T: Scalar>(params: PoissonParams<T>, k: u64, tol: T) -> (T, T) {
    if params.lambda == T::zero() {
        return (T::one(), T::zero());
    }
    let lower = lower_mass(params, k, tol).min(T::one());
    if lower <= T::lit(0.5) {
        (lower, T::one() - lower)
    } else {
        let upper = if k == u64::MAX {
            T::zero()
        } else {
            upper_mass(params, k + 1, tol).min(T::one())
        };
        (T::one() - upper, upper)
    }
}

/// `P(X ≤ ⌊k⌋)`.
pub fn cdf<T: Scalar>(params: PoissonParams<T>, k: T) -> Result<T> {
    let k = check_count(k)?;
    Ok(split(params, k, T::default_summation_tolerance()).0)
}

/// `P(X > ⌊k⌋)`.
pub fn survival<T: Scalar>(params: PoissonParams<T>, k: T) -> Result<T> {
    let k = check_count(k)?;
    Ok(split(params, k, T::default_summation_tolerance()).1)
}

/// Like [`cdf`] and [`survival`] together, honouring the configured
/// summation tolerance.
pub fn cdf_and_survival<T: Scalar>(
    params: PoissonParams<T>,
    k: T,
    config: &NumericsConfig<T>,
) -> Result<(T, T)> {
    let k = check_count(k)?;
    Ok(split(params, k, config.summation_tolerance))
}

/// Smallest integer `K` with `cdf(K) ≥ p`.
pub fn quantile<T: Scalar>(
    params: PoissonParams<T>,
    p: T,
    config: &NumericsConfig<T>,
) -> Result<u64> {
    if !(p >= T::zero() && p < T::one()) {
        return Err(Error::Domain(format!("probability must lie in [0, 1), got {p}")));
    }
    let tol = config.summation_tolerance;
    let bound = config.quantile_bound(params.lambda)?;
    let mut hi = check_count(bound)?;
    if split(params, hi, tol).0 < p {
        return Err(Error::NumericalFailure(format!(
            "quantile search exceeded the upper clamp {bound} for p = {p}"
        )));
    }
    let mut lo = 0u64;
    // invariant: cdf(hi) >= p; answer in [lo, hi]
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if split(params, mid, tol).0 >= p {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// `[max(0, λ − m·√λ), λ + m·√λ]` with `m` the configured multiplier.
pub fn two_sigma_band<T: Scalar>(params: PoissonParams<T>, config: &NumericsConfig<T>) -> Band<T> {
    let lambda = params.lambda;
    let half = config.band_multiplier * lambda.sqrt();
    Band {
        lo: (lambda - half).max(T::zero()),
        hi: lambda + half,
    }
}

/// Survival with the band clamp: 1 below the band, 0 above it, exact inside.
/// Falls back to the exact value when the clamp is disabled.
pub fn clamped_survival<T: Scalar>(
    params: PoissonParams<T>,
    k: T,
    config: &NumericsConfig<T>,
) -> Result<T> {
    if config.clamp_enabled {
        if k.is_nan() {
            return Err(Error::Domain("count threshold is NaN".into()));
        }
        let band = two_sigma_band(params, config);
        if k < band.lo {
            return Ok(T::one());
        }
        if k > band.hi {
            return Ok(T::zero());
        }
    }
    cdf_and_survival(params, k, config).map(|(_, s)| s)
}

/// CDF with the mirrored band clamp: 0 below the band, 1 above it.
pub fn clamped_cdf<T: Scalar>(
    params: PoissonParams<T>,
    k: T,
    config: &NumericsConfig<T>,
) -> Result<T> {
    if config.clamp_enabled {
        if k.is_nan() {
            return Err(Error::Domain("count threshold is NaN".into()));
        }
        let band = two_sigma_band(params, config);
        if k < band.lo {
            return Ok(T::zero());
        }
        if k > band.hi {
            return Ok(T::one());
        }
    }
    cdf_and_survival(params, k, config).map(|(c, _)| c)
}
