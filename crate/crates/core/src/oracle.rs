//! Brute-force reference implementations.
//!
//! Nothing here sorts, prunes or solves a linear program. These are the
//! yardsticks the engine is checked against, so they favour obviousness over
//! speed.

use std::collections::BTreeSet;

use crate::engine::row_dominates;
use crate::error::{Error, Result};
use crate::poisson::NumericsConfig;
use crate::scalar::Scalar;
use crate::scoring::{apply_transform, score_matrix, Relation, ScoringFamily};

/// Sampling resolution for [`po_grid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Step of the weight-simplex grid.
    pub weight_step: f64,
    /// Step of the mixture-weight grid.
    pub lambda_step: f64,
    /// Margin a certificate must clear.
    pub margin: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            weight_step: 1e-2,
            lambda_step: 1e-2,
            margin: 1e-6,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let in_unit = |x: f64| x > 0.0 && x < 1.0;
        if !in_unit(self.weight_step) || !in_unit(self.lambda_step) {
            return Err(Error::Config("grid steps must lie in (0, 1)".into()));
        }
        if !(self.margin >= 0.0) {
            return Err(Error::Config("grid margin must be non-negative".into()));
        }
        Ok(())
    }
}

/// Largest number of ND tuples [`po_grid`] accepts.
pub const PO_GRID_MAX_ND: usize = 50;
/// Cap on the number of weight samples; the step is coarsened beyond it.
const MAX_WEIGHT_SAMPLES: usize = 250_000;

/// Three-way classification of ND members.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PoCertificate {
    pub certified_po: BTreeSet<String>,
    pub certified_not_po: BTreeSet<String>,
    pub undecided: BTreeSet<String>,
}

fn transformed<T: Scalar>(
    relation: &Relation<T>,
    family: &ScoringFamily<T>,
    config: &NumericsConfig<T>,
) -> Result<Vec<Vec<T>>> {
    relation
        .tuples()
        .iter()
        .map(|t| {
            family
                .transforms()
                .iter()
                .zip(family.schema().attributes())
                .zip(&t.values)
                .map(|((tr, attr), &v)| apply_transform(tr, attr, v, config))
                .collect()
        })
        .collect()
}

/// All-pairs componentwise skyline in transformed space.
pub fn sky_naive<T: Scalar>(
    relation: &Relation<T>,
    family: &ScoringFamily<T>,
    config: &NumericsConfig<T>,
) -> Result<BTreeSet<String>> {
    let rows = transformed(relation, family, config)?;
    let mut out = BTreeSet::new();
    for (i, t) in rows.iter().enumerate() {
        let dominated = rows.iter().enumerate().any(|(j, s)| {
            j != i
                && s.iter().zip(t).all(|(a, b)| a <= b)
                && s.iter().zip(t).any(|(a, b)| a < b)
        });
        if !dominated {
            out.insert(relation.tuples()[i].id.clone());
        }
    }
    Ok(out)
}

/// All-pairs F-dominance over the score matrix.
pub fn nd_brute<T: Scalar>(
    relation: &Relation<T>,
    family: &ScoringFamily<T>,
    config: &NumericsConfig<T>,
    tolerance: T,
) -> Result<BTreeSet<String>> {
    let scores = score_matrix(relation, family, config)?;
    let n = scores.len();
    let mut out = BTreeSet::new();
    for t in 0..n {
        let dominated = (0..n).any(|s| s != t && row_dominates(scores.row(s), scores.row(t), tolerance));
        if !dominated {
            out.insert(scores.id(t).to_owned());
        }
    }
    Ok(out)
}

/// Integer compositions of `total` into `parts` non-negative parts.
fn compositions(total: usize, parts: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(left: usize, slot: usize, buf: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if slot + 1 == buf.len() {
            buf[slot] = left;
            f(buf);
            return;
        }
        for x in 0..=left {
            buf[slot] = x;
            rec(left - x, slot + 1, buf, f);
        }
    }
    if parts == 0 {
        return;
    }
    rec(total, 0, &mut vec![0; parts], f);
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Weight vectors inside the polytope: a simplex grid filtered by the
/// constraints, the vertices, and the midpoints of vertex pairs.
fn weight_samples<T: Scalar>(family: &ScoringFamily<T>, step: f64) -> Vec<Vec<T>> {
    let polytope = family.polytope();
    let dim = polytope.dim();
    let mut divisions = (1.0 / step).round().max(1.0) as usize;
    while divisions > 1 && binomial(divisions + dim - 1, dim - 1) > MAX_WEIGHT_SAMPLES as f64 {
        divisions /= 2;
    }
    let mut samples = Vec::new();
    let denom = T::from_count(divisions);
    compositions(divisions, dim, &mut |parts| {
        let w: Vec<T> = parts.iter().map(|&p| T::from_count(p) / denom).collect();
        if polytope.contains(&w) {
            samples.push(w);
        }
    });
    let vertices = polytope.vertices();
    samples.extend(vertices.iter().cloned());
    let half = T::lit(0.5);
    for i in 0..vertices.len() {
        for j in i + 1..vertices.len() {
            let mid: Vec<T> = vertices[i]
                .iter()
                .zip(&vertices[j])
                .map(|(&a, &b)| half * (a + b))
                .collect();
            samples.push(mid);
        }
    }
    samples
}

/// Grid certification of potential optimality over the ND members.
///
/// A tuple is certified PO when some sampled weight vector makes it the
/// unique minimiser over the whole relation by more than `grid.margin`. It is
/// certified not-PO when a gridded mixture of at most three other ND members
/// scores no worse at every vertex and better by more than the margin at one.
/// Everything else is undecided. Tuples outside ND appear in no set.
pub fn po_grid<T: Scalar>(
    relation: &Relation<T>,
    family: &ScoringFamily<T>,
    config: &NumericsConfig<T>,
    tolerance: T,
    grid: &GridSpec,
) -> Result<PoCertificate> {
    grid.validate()?;
    let nd = nd_brute(relation, family, config, tolerance)?;
    if nd.len() > PO_GRID_MAX_ND {
        return Err(Error::Domain(format!(
            "grid certification supports at most {PO_GRID_MAX_ND} ND tuples, got {}",
            nd.len()
        )));
    }
    let margin = T::lit(grid.margin);
    let rows = transformed(relation, family, config)?;
    let ids: Vec<&str> = relation.tuples().iter().map(|t| t.id.as_str()).collect();

    let mut cert = PoCertificate::default();
    for w in weight_samples(family, grid.weight_step) {
        let mut best: Option<(usize, T)> = None;
        let mut second = T::infinity();
        for (i, g) in rows.iter().enumerate() {
            let s: T = w.iter().zip(g).map(|(&a, &b)| a * b).sum();
            match best {
                Some((_, b)) if s >= b => second = second.min(s),
                Some((_, b)) => {
                    second = b;
                    best = Some((i, s));
                }
                None => best = Some((i, s)),
            }
        }
        if let Some((i, b)) = best {
            if second - b > margin && nd.contains(ids[i]) {
                cert.certified_po.insert(ids[i].to_owned());
            }
        }
    }

    let scores = score_matrix(relation, family, config)?;
    let nd_rows: Vec<usize> = nd
        .iter()
        .map(|id| scores.index_of(id))
        .collect::<Result<_>>()?;
    let vertices = scores.vertex_count();
    let dominated_by = |mix: &[T], target: &[T]| {
        mix.iter().zip(target).all(|(&m, &t)| m <= t)
            && mix.iter().zip(target).any(|(&m, &t)| m < t - margin)
    };
    let fine = (1.0 / grid.lambda_step).round().max(1.0) as usize;
    let coarse = (1.0 / grid.lambda_step.max(0.05)).round().max(1.0) as usize;

    for &t in &nd_rows {
        let target = scores.row(t);
        let others: Vec<usize> = nd_rows.iter().copied().filter(|&r| r != t).collect();
        let mut found = false;
        let mut mix = vec![T::zero(); vertices];
        // pairs on the fine grid (a single tuple is the endpoint of a pair)
        'pairs: for (a_pos, &a) in others.iter().enumerate() {
            if dominated_by(scores.row(a), target) {
                found = true;
                break;
            }
            for &b in &others[a_pos + 1..] {
                for step in 1..fine {
                    let la = T::from_count(step) / T::from_count(fine);
                    for (v, m) in mix.iter_mut().enumerate() {
                        *m = la * scores.get(a, v) + (T::one() - la) * scores.get(b, v);
                    }
                    if dominated_by(&mix, target) {
                        found = true;
                        break 'pairs;
                    }
                }
            }
        }
        if !found && others.len() >= 3 {
            let denom = T::from_count(coarse);
            'triples: for i in 0..others.len() {
                for j in i + 1..others.len() {
                    for k in j + 1..others.len() {
                        let (a, b, c) = (others[i], others[j], others[k]);
                        for p in 1..coarse {
                            for q in 1..coarse - p {
                                let la = T::from_count(p) / denom;
                                let lb = T::from_count(q) / denom;
                                let lc = T::one() - la - lb;
                                for (v, m) in mix.iter_mut().enumerate() {
                                    *m = la * scores.get(a, v)
                                        + lb * scores.get(b, v)
                                        + lc * scores.get(c, v);
                                }
                                if dominated_by(&mix, target) {
                                    found = true;
                                    break 'triples;
                                }
                            }
                        }
                    }
                }
            }
        }
        if found {
            cert.certified_not_po.insert(scores.id(t).to_owned());
        }
    }

    for id in &nd {
        if !cert.certified_po.contains(id) && !cert.certified_not_po.contains(id) {
            cert.undecided.insert(id.clone());
        }
    }
    Ok(cert)
}

/// `P(X ≤ k)` for `X ~ Po(λ)`, each mass term evaluated independently in log
/// space (with `ln j!` as a running sum of logarithms) and accumulated with
/// Neumaier compensated summation.
pub fn poisson_cdf_reference(lambda: f64, k: u64) -> f64 {
    if lambda == 0.0 {
        return 1.0;
    }
    let ln_lambda = lambda.ln();
    let mut ln_fact = 0.0f64;
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for j in 0..=k {
        if j > 0 {
            ln_fact += (j as f64).ln();
        }
        let term = (j as f64 * ln_lambda - lambda - ln_fact).exp();
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        if j as f64 > lambda && term < 1e-300 {
            break;
        }
    }
    (sum + comp).min(1.0)
}
