//! Dense two-phase simplex for the small programs the engine solves, and the
//! convex-combination dominance test built on it.
//!
//! The solver is a revised simplex that refactors its basis from the
//! original rows at every step. The entering column is the improving one
//! with the largest pivot relative to its column, switching to Bland's rule
//! after a long degenerate stall; ratio-test ties go to the largest pivot,
//! then the lowest basic index. A given program always takes the same path.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scoring::{LinearConstraint, ScoreMatrix, Sense};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome<T> {
    pub status: LpStatus,
    /// Objective value, present when optimal.
    pub value: Option<T>,
    /// Optimal point, present when optimal.
    pub point: Option<Vec<T>>,
}

impl<T> LpOutcome<T> {
    fn without_solution(status: LpStatus) -> Self {
        Self {
            status,
            value: None,
            point: None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// `minimize c·x` subject to linear rows and per-variable bounds.
/// Variables default to `[0, +∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<T> {
    objective: Vec<T>,
    constraints: Vec<LinearConstraint<T>>,
    bounds: Vec<(Option<T>, Option<T>)>,
    tolerance: T,
    max_iterations: Option<usize>,
}

impl<T: Scalar> LinearProgram<T> {
    pub fn minimize(objective: Vec<T>) -> Self {
        let n = objective.len();
        Self {
            objective,
            constraints: Vec::new(),
            bounds: vec![(Some(T::zero()), None); n],
            tolerance: T::default_tolerance(),
            max_iterations: None,
        }
    }

    pub fn maximize(objective: Vec<T>) -> Self {
        Self::minimize(objective.into_iter().map(|c| -c).collect())
    }

    pub fn constraint(mut self, coefficients: Vec<T>, sense: Sense, rhs: T) -> Self {
        self.constraints
            .push(LinearConstraint::new(coefficients, sense, rhs));
        self
    }

    pub fn bounds(mut self, var: usize, lower: Option<T>, upper: Option<T>) -> Self {
        if let Some(b) = self.bounds.get_mut(var) {
            *b = (lower, upper);
        } else {
            // Reported by `validate`.
            self.bounds.push((lower, upper));
        }
        self
    }

    pub fn free(self, var: usize) -> Self {
        self.bounds(var, None, None)
    }

    pub fn tolerance(mut self, tolerance: T) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn max_iterations(mut self, cap: usize) -> Self {
        self.max_iterations = Some(cap);
        self
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if self.bounds.len() != n {
            return Err(Error::LpStructure(format!(
                "bounds given for {} variables, objective has {n}",
                self.bounds.len()
            )));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::LpStructure("objective has non-finite entries".into()));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coefficients.len() != n {
                return Err(Error::LpStructure(format!(
                    "row {i} has {} coefficients, expected {n}",
                    c.coefficients.len()
                )));
            }
            if c.coefficients.iter().any(|a| !a.is_finite()) || !c.bound.is_finite() {
                return Err(Error::LpStructure(format!("row {i} has non-finite entries")));
            }
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_some_and(|l| !l.is_finite()) || hi.is_some_and(|h| !h.is_finite()) {
                return Err(Error::LpStructure(format!("variable {j} has non-finite bounds")));
            }
            if let (Some(l), Some(h)) = (lo, hi) {
                if l > h {
                    return Err(Error::LpStructure(format!(
                        "variable {j} has lower bound {l} above upper bound {h}"
                    )));
                }
            }
        }
        if !(self.tolerance > T::zero()) {
            return Err(Error::LpStructure("tolerance must be positive".into()));
        }
        Ok(())
    }

    /// Solves the program. Optimal points are re-checked against the
    /// original rows and bounds before being returned.
    pub fn solve(&self) -> Result<LpOutcome<T>> {
        self.validate()?;
        let standard = StandardForm::build(self);
        let outcome = standard.solve(self)?;
        if let Some(point) = &outcome.point {
            self.certify(point)?;
        }
        Ok(outcome)
    }

    /// Largest constraint or bound violation of `x`.
    pub fn max_violation(&self, x: &[T]) -> T {
        let mut worst = T::zero();
        for c in &self.constraints {
            let scale = T::one() + c.bound.abs();
            worst = worst.max(c.violation(x) / scale);
        }
        for (&v, &(lo, hi)) in x.iter().zip(&self.bounds) {
            if let Some(l) = lo {
                worst = worst.max(l - v);
            }
            if let Some(h) = hi {
                worst = worst.max(v - h);
            }
        }
        worst
    }

    fn certify(&self, x: &[T]) -> Result<()> {
        let worst = self.max_violation(x);
        if worst > self.tolerance {
            return Err(Error::NumericalFailure(format!(
                "simplex returned a point violating the constraints by {worst}"
            )));
        }
        Ok(())
    }
}

/// How an original variable is expressed through non-negative columns.
#[derive(Debug, Clone, Copy)]
enum VarMap<T> {
    /// x = lo + y
    Shift { col: usize, lo: T },
    /// x = hi − y
    Reflect { col: usize, hi: T },
    /// x = y⁺ − y⁻
    Split { pos: usize, neg: usize },
}

struct StandardForm<T> {
    maps: Vec<VarMap<T>>,
    columns: usize,
    rows: Vec<(Vec<T>, Sense, T)>,
    cost: Vec<T>,
}

impl<T: Scalar> StandardForm<T> {
    fn build(lp: &LinearProgram<T>) -> Self {
        let mut maps = Vec::with_capacity(lp.num_vars());
        let mut columns = 0;
        let mut upper_rows = Vec::new();
        for &(lo, hi) in &lp.bounds {
            let map = match (lo, hi) {
                (Some(lo), hi) => {
                    let col = columns;
                    columns += 1;
                    if let Some(hi) = hi {
                        upper_rows.push((col, hi - lo));
                    }
                    VarMap::Shift { col, lo }
                }
                (None, Some(hi)) => {
                    let col = columns;
                    columns += 1;
                    VarMap::Reflect { col, hi }
                }
                (None, None) => {
                    let pos = columns;
                    columns += 2;
                    VarMap::Split { pos, neg: pos + 1 }
                }
            };
            maps.push(map);
        }

        let substitute = |coeffs: &[T]| -> (Vec<T>, T) {
            let mut row = vec![T::zero(); columns];
            let mut offset = T::zero();
            for (&a, map) in coeffs.iter().zip(&maps) {
                match *map {
                    VarMap::Shift { col, lo } => {
                        row[col] += a;
                        offset += a * lo;
                    }
                    VarMap::Reflect { col, hi } => {
                        row[col] -= a;
                        offset += a * hi;
                    }
                    VarMap::Split { pos, neg } => {
                        row[pos] += a;
                        row[neg] -= a;
                    }
                }
            }
            (row, offset)
        };

        let mut rows = Vec::with_capacity(lp.constraints.len() + upper_rows.len());
        for c in &lp.constraints {
            let (mut row, offset) = substitute(&c.coefficients);
            let mut rhs = c.bound - offset;
            // Rows of uniformly tiny entries force tiny pivots; lift them to
            // unit size. The right-hand side counts toward the size, so a
            // nearly empty row cannot inflate the global tolerances. Rows are
            // never shrunk, so a small residual here stays small in the
            // caller's units.
            let size = row.iter().fold(rhs.abs(), |m, a| m.max(a.abs()));
            if size > T::zero() && size < T::one() {
                for a in row.iter_mut() {
                    *a /= size;
                }
                rhs /= size;
            }
            rows.push((row, c.sense, rhs));
        }
        for (col, width) in upper_rows {
            let mut row = vec![T::zero(); columns];
            row[col] = T::one();
            rows.push((row, Sense::Le, width));
        }
        let (cost, _) = substitute(&lp.objective);
        Self {
            maps,
            columns,
            rows,
            cost,
        }
    }

    fn recover(&self, y: &[T]) -> Vec<T> {
        self.maps
            .iter()
            .map(|m| match *m {
                VarMap::Shift { col, lo } => lo + y[col],
                VarMap::Reflect { col, hi } => hi - y[col],
                VarMap::Split { pos, neg } => y[pos] - y[neg],
            })
            .collect()
    }

    fn solve(&self, lp: &LinearProgram<T>) -> Result<LpOutcome<T>> {
        let tol = lp.tolerance;
        let m = self.rows.len();
        let n = self.columns;

        // Column layout: structural | slack/surplus | artificial. Rows are
        // flipped so every right-hand side is non-negative.
        let slack_count = self
            .rows
            .iter()
            .filter(|(_, s, _)| *s != Sense::Eq)
            .count();
        let artificial_start = n + slack_count;
        let effective: Vec<(Sense, bool)> = self
            .rows
            .iter()
            .map(|(_, sense, rhs)| {
                let flip = *rhs < T::zero();
                let s = match (sense, flip) {
                    (Sense::Le, true) => Sense::Ge,
                    (Sense::Ge, true) => Sense::Le,
                    (s, _) => *s,
                };
                (s, flip)
            })
            .collect();
        let artificial_count = effective.iter().filter(|(s, _)| *s != Sense::Le).count();
        let width = artificial_start + artificial_count;

        let mut a = vec![vec![T::zero(); width]; m];
        let mut b = vec![T::zero(); m];
        let mut basis = Vec::with_capacity(m);
        let mut next_slack = n;
        let mut next_artificial = artificial_start;
        for (r, ((coeffs, _, rhs), &(sense, flip))) in self.rows.iter().zip(&effective).enumerate() {
            let sign = if flip { -T::one() } else { T::one() };
            for (dst, &v) in a[r].iter_mut().zip(coeffs) {
                *dst = sign * v;
            }
            b[r] = sign * *rhs;
            if sense != Sense::Eq {
                a[r][next_slack] = if sense == Sense::Le { T::one() } else { -T::one() };
                next_slack += 1;
            }
            if sense == Sense::Le {
                basis.push(next_slack - 1);
            } else {
                a[r][next_artificial] = T::one();
                basis.push(next_artificial);
                next_artificial += 1;
            }
        }

        let cap = lp.max_iterations.unwrap_or(10_000 + 50 * (m + width));
        let mut simplex = Revised {
            a,
            b,
            basis,
            tol,
        };
        let is_artificial = |j: usize| j >= artificial_start;

        if artificial_count > 0 {
            let mut cost = vec![T::zero(); width];
            for c in cost.iter_mut().skip(artificial_start) {
                *c = T::one();
            }
            if let Phase::Unbounded = simplex.optimize(&cost, &|_| true, cap)? {
                return Err(Error::NumericalFailure(
                    "phase one reported an unbounded auxiliary problem".into(),
                ));
            }
            let x = simplex.factor()?.solve(&simplex.b);
            let infeasibility: T = simplex
                .basis
                .iter()
                .zip(&x)
                .filter(|(&j, _)| is_artificial(j))
                .map(|(_, &v)| v.max(T::zero()))
                .sum();
            let scale = T::one() + simplex.b.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
            if infeasibility > tol * scale {
                return Ok(LpOutcome::without_solution(LpStatus::Infeasible));
            }
            simplex.drive_out(&is_artificial)?;
        }

        let mut cost = vec![T::zero(); width];
        cost[..n].copy_from_slice(&self.cost);
        if let Phase::Unbounded = simplex.optimize(&cost, &|j| !is_artificial(j), cap)? {
            return Ok(LpOutcome::without_solution(LpStatus::Unbounded));
        }

        let values = simplex.factor()?.solve(&simplex.b);
        let mut y = vec![T::zero(); width];
        for (&j, &v) in simplex.basis.iter().zip(&values) {
            y[j] = v.max(T::zero());
        }
        let x = self.recover(&y[..n]);
        let value = lp
            .objective
            .iter()
            .zip(&x)
            .map(|(&c, &v)| c * v)
            .sum();
        Ok(LpOutcome {
            status: LpStatus::Optimal,
            value: Some(value),
            point: Some(x),
        })
    }
}

/// Under Bland's rule, entering columns whose pivot is below this fraction
/// of the column's largest entry are passed over while a better one exists.
const MIN_PIVOT_QUALITY: f64 = 1e-6;

enum Phase {
    Optimal,
    Unbounded,
}

/// Dense LU factors `P·B = L·U` of a basis matrix.
struct Lu<T> {
    lu: Vec<Vec<T>>,
    perm: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    fn factor(mut a: Vec<Vec<T>>) -> Option<Self> {
        let n = a.len();
        let scale = a
            .iter()
            .flat_map(|row| row.iter())
            .fold(T::zero(), |acc, v| acc.max(v.abs()));
        let tiny = T::epsilon() * T::lit(64.0) * scale;
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap_or(Ordering::Equal))
                .expect("non-empty range");
            if !(a[p][k].abs() > tiny) {
                return None;
            }
            a.swap(k, p);
            perm.swap(k, p);
            let (top, rest) = a.split_at_mut(k + 1);
            let pivot_row = &top[k];
            for row in rest {
                let f = row[k] / pivot_row[k];
                row[k] = f;
                if f != T::zero() {
                    for j in k + 1..n {
                        row[j] -= f * pivot_row[j];
                    }
                }
            }
        }
        Some(Self { lu: a, perm })
    }

    /// `B·x = rhs`.
    fn solve(&self, rhs: &[T]) -> Vec<T> {
        let n = self.perm.len();
        let mut x: Vec<T> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            for k in 0..i {
                x[i] = x[i] - self.lu[i][k] * x[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                x[i] = x[i] - self.lu[i][k] * x[k];
            }
            x[i] /= self.lu[i][i];
        }
        x
    }

    /// `Bᵀ·y = rhs`.
    fn solve_transposed(&self, rhs: &[T]) -> Vec<T> {
        let n = self.perm.len();
        let mut z = rhs.to_vec();
        for i in 0..n {
            for k in 0..i {
                z[i] = z[i] - self.lu[k][i] * z[k];
            }
            z[i] /= self.lu[i][i];
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                z[i] = z[i] - self.lu[k][i] * z[k];
            }
        }
        let mut y = vec![T::zero(); n];
        for (i, &p) in self.perm.iter().enumerate() {
            y[p] = z[i];
        }
        y
    }
}

/// Revised simplex over `A·x = b, x ≥ 0`. The basis is refactored from the
/// original rows at every iteration, so rounding never accumulates along
/// the pivot path.
struct Revised<T> {
    a: Vec<Vec<T>>,
    b: Vec<T>,
    basis: Vec<usize>,
    tol: T,
}

impl<T: Scalar> Revised<T> {
    fn column(&self, j: usize) -> Vec<T> {
        self.a.iter().map(|row| row[j]).collect()
    }

    fn factor(&self) -> Result<Lu<T>> {
        let m = self.basis.len();
        let mut bm = vec![vec![T::zero(); m]; m];
        for (k, &j) in self.basis.iter().enumerate() {
            for i in 0..m {
                bm[i][k] = self.a[i][j];
            }
        }
        Lu::factor(bm).ok_or_else(|| Error::NumericalFailure("simplex basis became singular".into()))
    }

    fn optimize(&mut self, cost: &[T], allowed: &dyn Fn(usize) -> bool, cap: usize) -> Result<Phase> {
        let width = cost.len();
        let min_quality = T::lit(MIN_PIVOT_QUALITY);
        // Best-pivot pricing can cycle on degenerate vertices; after this
        // many steps without progress, fall back to Bland's rule.
        let patience = 2 * (self.basis.len() + width);
        let mut stalled = 0;
        let mut last_objective = T::infinity();
        for _ in 0..cap {
            let lu = self.factor()?;
            let x = lu.solve(&self.b);
            let cb: Vec<T> = self.basis.iter().map(|&j| cost[j]).collect();
            let objective: T = cb.iter().zip(&x).map(|(&c, &v)| c * v).sum();
            if objective < last_objective - self.tol {
                stalled = 0;
                last_objective = objective;
            } else {
                stalled += 1;
            }
            let bland = stalled > patience;
            let y = lu.solve_transposed(&cb);
            let mut in_basis = vec![false; width];
            for &j in &self.basis {
                in_basis[j] = true;
            }
            let mut best: Option<(usize, usize, T)> = None;
            for j in (0..width).filter(|&j| allowed(j) && !in_basis[j]) {
                let d = cost[j] - self.a.iter().zip(&y).map(|(row, &yi)| row[j] * yi).sum::<T>();
                if d >= -self.tol {
                    continue;
                }
                let u = lu.solve(&self.column(j));
                let Some((r, quality)) = self.ratio_test(&x, &u) else {
                    return Ok(Phase::Unbounded);
                };
                if best.is_none_or(|(_, _, q)| quality > q) {
                    best = Some((r, j, quality));
                }
                if bland && quality >= min_quality {
                    break;
                }
            }
            let Some((r, j, _)) = best else {
                return Ok(Phase::Optimal);
            };
            self.basis[r] = j;
        }
        Err(Error::NumericalFailure(format!("simplex exceeded {cap} iterations")))
    }

    /// Minimum-ratio row for direction `u`. Values within rounding noise of
    /// zero count as zero; among tied rows the largest pivot wins, then the
    /// lowest basic index. Returns the row and the pivot relative to the
    /// largest entry of `u`, or `None` when nothing blocks.
    fn ratio_test(&self, x: &[T], u: &[T]) -> Option<(usize, T)> {
        let umax = u.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
        let xmax = x.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
        let noise = T::epsilon() * T::lit(64.0) * (T::one() + xmax);
        let piv_tol = T::epsilon() * T::lit(64.0) * umax;
        let ratio = |i: usize| {
            let xi = if x[i] <= noise { T::zero() } else { x[i] };
            xi / u[i]
        };
        let rows = || (0..u.len()).filter(|&i| u[i] > piv_tol);
        let theta = rows().map(ratio).fold(None, |m: Option<T>, t| Some(m.map_or(t, |m| m.min(t))))?;
        let slack = theta * T::lit(1e-12);
        let mut best: Option<usize> = None;
        for i in rows().filter(|&i| ratio(i) <= theta + slack) {
            best = match best {
                Some(b) if u[b] > u[i] => Some(b),
                Some(b) if u[b] == u[i] && self.basis[b] < self.basis[i] => Some(b),
                _ => Some(i),
            };
        }
        let r = best?;
        Some((r, u[r] / umax))
    }

    /// Replaces basic columns flagged by `avoid` (left at zero after phase
    /// one) with other columns wherever the row allows it.
    fn drive_out(&mut self, avoid: &dyn Fn(usize) -> bool) -> Result<()> {
        let m = self.basis.len();
        let width = self.a.first().map_or(0, Vec::len);
        for r in 0..m {
            if !avoid(self.basis[r]) {
                continue;
            }
            let lu = self.factor()?;
            let mut e = vec![T::zero(); m];
            e[r] = T::one();
            let rho = lu.solve_transposed(&e);
            let in_basis: Vec<bool> = (0..width).map(|j| self.basis.contains(&j)).collect();
            let alpha = |j: usize| self.a.iter().zip(&rho).map(|(row, &p)| row[j] * p).sum::<T>();
            let entering = (0..width)
                .filter(|&j| !avoid(j) && !in_basis[j])
                .map(|j| (j, alpha(j).abs()))
                .filter(|&(_, v)| v > self.tol)
                .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap_or(Ordering::Equal));
            if let Some((j, _)) = entering {
                self.basis[r] = j;
            }
        }
        Ok(())
    }
}

/// Result of testing a target row against mixtures of candidate rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinationTest<T> {
    /// True when some mixture scores no worse everywhere and strictly
    /// better somewhere.
    pub dominated: bool,
    /// Optimal `δ*` of `min δ` s.t. the mixture is within `δ` of the target
    /// at every vertex.
    pub delta: T,
    /// Mixture weights, present iff `dominated`.
    pub witness: Option<Vec<(String, T)>>,
}

/// Mixture `Σ λⱼ·S[j]` of the given rows.
pub fn mixture<T: Scalar>(scores: &ScoreMatrix<T>, rows: &[usize], weights: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); scores.vertex_count()];
    for (&r, &lambda) in rows.iter().zip(weights) {
        for (o, &s) in out.iter_mut().zip(scores.row(r)) {
            *o += lambda * s;
        }
    }
    out
}

/// `mix ≤ target + τ` at every vertex and `mix < target − τ` at one.
pub fn weakly_below_strictly_somewhere<T: Scalar>(mix: &[T], target: &[T], tol: T) -> bool {
    mix.iter().zip(target).all(|(&m, &t)| m <= t + tol)
        && mix.iter().zip(target).any(|(&m, &t)| m < t - tol)
}

/// Independent re-check of a mixture witness.
pub fn verify_combination<T: Scalar>(
    scores: &ScoreMatrix<T>,
    witness: &[(String, T)],
    target: &str,
    tol: T,
) -> Result<bool> {
    let target_row = scores.row_by_id(target)?;
    let mut rows = Vec::with_capacity(witness.len());
    let mut weights = Vec::with_capacity(witness.len());
    for (id, w) in witness {
        if id == target {
            return Ok(false);
        }
        rows.push(scores.index_of(id)?);
        weights.push(*w);
    }
    let total: T = weights.iter().copied().sum();
    if weights.iter().any(|&w| w < -tol) || (total - T::one()).abs() > tol {
        return Ok(false);
    }
    let mix = mixture(scores, &rows, &weights);
    Ok(weakly_below_strictly_somewhere(&mix, target_row, tol))
}

/// Whether a convex combination of `candidates` F-dominates `target`.
pub fn convex_combination_dominates<T: Scalar>(
    scores: &ScoreMatrix<T>,
    candidates: &[&str],
    target: &str,
    tol: T,
) -> Result<CombinationTest<T>> {
    let target_row = scores.index_of(target)?;
    let rows = candidates
        .iter()
        .map(|id| {
            if *id == target {
                Err(Error::Domain(format!(
                    "target `{target}` must not be among the candidates"
                )))
            } else {
                scores.index_of(id)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    combination_test_rows(scores, &rows, target_row, tol)
}

pub(crate) fn combination_test_rows<T: Scalar>(
    scores: &ScoreMatrix<T>,
    rows: &[usize],
    target: usize,
    tol: T,
) -> Result<CombinationTest<T>> {
    let vertices = scores.vertex_count();
    let k = rows.len();
    let target_scores = scores.row(target);
    if k == 0 {
        return Ok(CombinationTest {
            dominated: false,
            delta: T::infinity(),
            witness: None,
        });
    }
    let witness_of = |weights: &[T]| -> Vec<(String, T)> {
        rows.iter()
            .zip(weights)
            .filter(|(_, &w)| w > T::zero())
            .map(|(&r, &w)| (scores.id(r).to_owned(), w))
            .collect()
    };
    let check = |weights: &[T]| {
        let mix = mixture(scores, rows, weights);
        weakly_below_strictly_somewhere(&mix, target_scores, tol)
    };

    // min δ  s.t.  Σλ = 1, λ ≥ 0, Σⱼ λⱼ·S[j][v] − δ ≤ S[t][v]
    let mut objective = vec![T::zero(); k + 1];
    objective[k] = T::one();
    let mut lp = LinearProgram::minimize(objective)
        .free(k)
        .constraint(
            (0..=k).map(|j| if j < k { T::one() } else { T::zero() }).collect(),
            Sense::Eq,
            T::one(),
        );
    for v in 0..vertices {
        let mut row: Vec<T> = rows.iter().map(|&r| scores.get(r, v)).collect();
        row.push(-T::one());
        lp = lp.constraint(row, Sense::Le, target_scores[v]);
    }
    let outcome = lp.solve()?;
    let (Some(delta), Some(point)) = (outcome.value, outcome.point) else {
        return Err(Error::NumericalFailure(format!(
            "dominance program ended {:?}",
            outcome.status
        )));
    };
    let lambdas = &point[..k];
    if delta < -tol && check(lambdas) {
        return Ok(CombinationTest {
            dominated: true,
            delta,
            witness: Some(witness_of(lambdas)),
        });
    }
    if delta > tol {
        return Ok(CombinationTest {
            dominated: false,
            delta,
            witness: None,
        });
    }

    // δ* ≈ 0: among mixtures within τ of the target everywhere, take the one
    // with the largest total improvement and test it for a strict vertex.
    let objective: Vec<T> = rows.iter().map(|&r| scores.row_sum(r)).collect();
    let mut lp = LinearProgram::minimize(objective).constraint(
        vec![T::one(); k],
        Sense::Eq,
        T::one(),
    );
    for v in 0..vertices {
        let row: Vec<T> = rows.iter().map(|&r| scores.get(r, v)).collect();
        lp = lp.constraint(row, Sense::Le, target_scores[v] + tol);
    }
    let refined = lp.solve()?;
    if let Some(point) = refined.point {
        if check(&point) {
            return Ok(CombinationTest {
                dominated: true,
                delta,
                witness: Some(witness_of(&point)),
            });
        }
    }
    Ok(CombinationTest {
        dominated: false,
        delta,
        witness: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn minimize_first_weight_on_simplex() {
        let out = LinearProgram::minimize(vec![1.0, 0.0])
            .constraint(vec![1.0, 1.0], Sense::Eq, 1.0)
            .solve()
            .unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert!(close(out.value.unwrap(), 0.0));
        let p = out.point.unwrap();
        assert!(close(p[0], 0.0) && close(p[1], 1.0));
    }

    #[test]
    fn forced_sum() {
        let out = LinearProgram::minimize(vec![1.0, 1.0])
            .constraint(vec![1.0, 1.0], Sense::Eq, 1.0)
            .solve()
            .unwrap();
        assert!(close(out.value.unwrap(), 1.0));
    }

    #[test]
    fn feasibility_with_exhibited_point() {
        let out = LinearProgram::minimize(vec![0.0, 0.0])
            .constraint(vec![1.0, 1.0], Sense::Eq, 1.0)
            .constraint(vec![0.2, 0.9], Sense::Le, 0.5)
            .solve()
            .unwrap();
        assert!(out.is_optimal());
        let p = out.point.unwrap();
        assert!(0.2 * p[0] + 0.9 * p[1] <= 0.5 + 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let out = LinearProgram::minimize(vec![1.0])
            .constraint(vec![1.0], Sense::Ge, 2.0)
            .constraint(vec![1.0], Sense::Le, 1.0)
            .solve()
            .unwrap();
        assert_eq!(out.status, LpStatus::Infeasible);
        assert!(out.point.is_none());

        let out = LinearProgram::minimize(vec![-1.0, 0.0])
            .constraint(vec![1.0, -1.0], Sense::Le, 1.0)
            .solve()
            .unwrap();
        assert_eq!(out.status, LpStatus::Unbounded);
    }

    #[test]
    fn free_and_bounded_variables() {
        // min x0 + x1, x0 free, x0 >= -3 via row, x1 in [-2, 5]
        let out = LinearProgram::minimize(vec![1.0, 1.0])
            .free(0)
            .bounds(1, Some(-2.0), Some(5.0))
            .constraint(vec![1.0, 0.0], Sense::Ge, -3.0)
            .solve()
            .unwrap();
        assert!(close(out.value.unwrap(), -5.0));
        // upper-only bound
        let out = LinearProgram::maximize(vec![1.0])
            .bounds(0, None, Some(4.0))
            .solve()
            .unwrap();
        assert!(close(out.point.unwrap()[0], 4.0));
    }

    #[test]
    fn classic_production_problem() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 → (2, 6), 36
        let out = LinearProgram::maximize(vec![3.0, 5.0])
            .constraint(vec![1.0, 0.0], Sense::Le, 4.0)
            .constraint(vec![0.0, 2.0], Sense::Le, 12.0)
            .constraint(vec![3.0, 2.0], Sense::Le, 18.0)
            .solve()
            .unwrap();
        let p = out.point.unwrap();
        assert!(close(p[0], 2.0) && close(p[1], 6.0));
        assert!(close(out.value.unwrap(), -36.0));
    }

    #[test]
    fn structural_errors() {
        let err = LinearProgram::minimize(vec![1.0, 1.0])
            .constraint(vec![1.0], Sense::Le, 1.0)
            .solve();
        assert!(matches!(err, Err(Error::LpStructure(_))));
        let err = LinearProgram::minimize(vec![1.0])
            .bounds(0, Some(2.0), Some(1.0))
            .solve();
        assert!(matches!(err, Err(Error::LpStructure(_))));
    }

    #[test]
    fn iteration_cap_is_an_error() {
        let err = LinearProgram::maximize(vec![3.0, 5.0])
            .constraint(vec![1.0, 0.0], Sense::Le, 4.0)
            .constraint(vec![3.0, 2.0], Sense::Le, 18.0)
            .max_iterations(0)
            .solve();
        assert!(matches!(err, Err(Error::NumericalFailure(_))));
    }

    #[test]
    fn redundant_equalities() {
        let out = LinearProgram::minimize(vec![1.0, 2.0])
            .constraint(vec![1.0, 1.0], Sense::Eq, 1.0)
            .constraint(vec![2.0, 2.0], Sense::Eq, 2.0)
            .solve()
            .unwrap();
        assert!(close(out.value.unwrap(), 1.0));
    }

    fn matrix(rows: &[(&str, &[f64])]) -> ScoreMatrix<f64> {
        ScoreMatrix::from_rows(
            rows.iter().map(|(id, _)| id.to_string()).collect(),
            rows.iter().map(|(_, r)| r.to_vec()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn target_below_everything_is_not_dominated() {
        let m = matrix(&[("t", &[0.1, 0.1]), ("a", &[0.5, 0.3]), ("b", &[0.2, 0.6])]);
        let r = convex_combination_dominates(&m, &["a", "b"], "t", 1e-9).unwrap();
        assert!(!r.dominated && r.delta > 0.0 && r.witness.is_none());
    }

    #[test]
    fn single_strictly_better_candidate() {
        let m = matrix(&[("t", &[0.5, 0.5]), ("a", &[0.2, 0.3])]);
        let r = convex_combination_dominates(&m, &["a"], "t", 1e-9).unwrap();
        assert!(r.dominated);
        let w = r.witness.unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].0, "a");
        assert!(close(w[0].1, 1.0));
    }

    #[test]
    fn one_vertex_mixture() {
        let m = matrix(&[("t", &[0.4]), ("a", &[0.2]), ("b", &[0.8])]);
        let r = convex_combination_dominates(&m, &["a", "b"], "t", 1e-9).unwrap();
        assert!(r.dominated);
        assert!(verify_combination(&m, r.witness.as_ref().unwrap(), "t", 1e-9).unwrap());
        // λ-grid oracle: best mixture value is 0.2 at λ = (1, 0)
        let best = (0..=1000)
            .map(|i| {
                let l = i as f64 / 1000.0;
                l * 0.2 + (1.0 - l) * 0.8
            })
            .fold(f64::INFINITY, f64::min);
        assert!(close(best, 0.2) && close(r.delta, best - 0.4));
    }

    #[test]
    fn midpoint_mixture_dominates() {
        // t is the midpoint of a and b plus 1e-3 everywhere.
        let m = matrix(&[
            ("a", &[0.1, 0.7]),
            ("b", &[0.7, 0.1]),
            ("t", &[0.401, 0.401]),
        ]);
        let r = convex_combination_dominates(&m, &["a", "b"], "t", 1e-9).unwrap();
        assert!(r.dominated);
        let w = r.witness.unwrap();
        assert!(w.iter().all(|(_, x)| close(*x, 0.5)));
    }

    #[test]
    fn zero_gap_tie_with_strict_vertex() {
        // mixture equals t at vertex 0 and beats it at vertex 1
        let m = matrix(&[("a", &[0.3, 0.2]), ("t", &[0.3, 0.5])]);
        let r = convex_combination_dominates(&m, &["a"], "t", 1e-9).unwrap();
        assert!(r.dominated);
        assert!(r.delta.abs() <= 1e-9);
    }

    #[test]
    fn identical_row_is_not_dominating() {
        let m = matrix(&[("a", &[0.3, 0.5]), ("t", &[0.3, 0.5])]);
        let r = convex_combination_dominates(&m, &["a"], "t", 1e-9).unwrap();
        assert!(!r.dominated);
    }

    #[test]
    fn target_among_candidates_is_rejected() {
        let m = matrix(&[("a", &[0.3]), ("t", &[0.4])]);
        assert!(convex_combination_dominates(&m, &["a", "t"], "t", 1e-9).is_err());
        assert!(convex_combination_dominates(&m, &["zz"], "t", 1e-9).is_err());
    }

    #[test]
    fn no_candidates() {
        let m = matrix(&[("t", &[0.4])]);
        let r = convex_combination_dominates(&m, &[], "t", 1e-9).unwrap();
        assert!(!r.dominated);
    }

    #[test]
    fn tiny_degenerate_pivot_is_avoided() {
        // Bland's first column meets a 1e-9 pivot in a degenerate row here.
        let lp = LinearProgram::minimize(vec![0.0f64, 0.0, 0.0, 1.0])
            .free(3)
            .constraint(vec![1.0, 1.0, 1.0, 0.0], Sense::Eq, 1.0)
            .constraint(
                vec![1.0314297616408296e-9, 7.679174850405561e-4, 1.3063354164726036e-16, -1.0],
                Sense::Le,
                3.125215858115093e-22,
            )
            .constraint(
                vec![0.04420824286641664, 0.032957064719532414, 0.06269533194821506, -1.0],
                Sense::Le,
                0.19866721811265314,
            )
            .constraint(
                vec![0.030458954010289196, 0.29742210956023307, 0.3749884615137474, -1.0],
                Sense::Le,
                0.26915784815702914,
            );
        let out = lp.solve().unwrap();
        let x = out.point.unwrap();
        assert!(lp.max_violation(&x) <= 1e-9);
        assert!(out.value.unwrap().abs() < 1e-8);
    }

    #[test]
    fn forced_small_pivots_do_not_drift() {
        // Every improving column meets a ~1e-6 pivot in the degenerate second
        // row; updating a tableau through those pivots drifts by ~1e-6.
        let lp = LinearProgram::minimize(vec![0.0f64, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0])
            .free(8)
            .constraint(vec![1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0], Sense::Eq, 1.0)
            .constraint(
                vec![
                    1.0240449537768768e-7, 1.48005029841612e-6, 4.4559760867639377e-14,
                    8.445745152766526e-6, 6.041693085311958e-8, 1.2787492534786916e-25,
                    3.039330981208476e-10, 3.235240814043017e-12, -1.0,
                ],
                Sense::Le,
                1.5192975063764712e-16,
            )
            .constraint(
                vec![
                    0.034780914589657964, 0.03180302013099229, 0.0035454672911990545,
                    0.003786843105661006, 0.003022766799987396, 0.03774459742099424,
                    0.006733563112923058, 0.034406759715966774, -1.0,
                ],
                Sense::Le,
                0.002693957772165599,
            )
            .constraint(
                vec![
                    0.024831919944558307, 0.021204034459526573, 0.25613320418624674,
                    0.002525404529032103, 0.25652709400490536, 0.025163064947329495,
                    0.08356346149504078, 0.07936299472250116, -1.0,
                ],
                Sense::Le,
                0.3109581105237501,
            );
        let out = lp.solve().unwrap();
        let x = out.point.unwrap();
        assert!(lp.max_violation(&x) <= 1e-12);
        let want = 0.003022766799987396 - 0.002693957772165599;
        assert!((out.value.unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn nearly_empty_rows_do_not_mask_infeasibility() {
        // Lifting the last row by its coefficient alone turned its bound into
        // 2e22 and let x = 0 pass phase one.
        let lp = LinearProgram::minimize(vec![4.31604074470296e-12f64])
            .constraint(vec![1.0], Sense::Eq, 1.0)
            .constraint(vec![4.31604074470296e-12], Sense::Le, 1.0011693217860453e-9)
            .constraint(vec![4.523011730646827e-32], Sense::Le, 1e-9);
        let out = lp.solve().unwrap();
        assert!(out.is_optimal());
        assert!((out.point.unwrap()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rows_of_tiny_coefficients_are_rescaled() {
        // Unscaled, a 2.6e-8 pivot in the second row amplified a 3e-10
        // residual into a point off by 1.6e-3.
        let lp = LinearProgram::minimize(vec![
            0.0025491453562586407f64,
            0.21403475530165175,
            0.09104692698557071,
            0.07541671971091836,
        ])
        .constraint(vec![1.0; 4], Sense::Eq, 1.0)
        .constraint(
            vec![3.579214001373857e-8, 4.63704175084191e-15, 1.2847443712424872e-27, 5.082770998856766e-9],
            Sense::Le,
            3.1412749135842013e-9,
        )
        .constraint(
            vec![0.0015294563325430257, 0.01268906556616455, 0.054624952350629266, 0.02585418265114299],
            Sense::Le,
            0.03517235282756639,
        )
        .constraint(
            vec![0.0010196532315756013, 0.20134568973548256, 0.03642197463494145, 0.04956253197700437],
            Sense::Le,
            0.06137833339397082,
        );
        let out = lp.solve().unwrap();
        assert!(lp.max_violation(&out.point.unwrap()) <= 1e-12);
        assert!((out.value.unwrap() - 0.08628939949893129).abs() < 1e-12);
    }

    #[test]
    fn degenerate_row_of_tiny_scores_does_not_stall() {
        // All entries of the second row are far below the others and its
        // bound is 3e-20; first-index pricing walked it into a singular basis.
        let lp = LinearProgram::minimize(vec![0.0f64, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0])
            .free(7)
            .constraint(vec![1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0], Sense::Eq, 1.0)
            .constraint(
                vec![
                    6.673048464750162e-10, 4.374469919216812e-5, 2.124248652136338e-8,
                    9.315822909623808e-13, 2.2074350697382074e-15, 0.0035060729618203858,
                    6.481281074014757e-8, -1.0,
                ],
                Sense::Le,
                2.7029400561371702e-20,
            )
            .constraint(
                vec![
                    0.008634367418289032, 0.001247854379570455, 0.003271585338342863,
                    0.0020117649529771105, 0.007637429893220466, 0.007290661937542472,
                    0.007871604844204273, -1.0,
                ],
                Sense::Le,
                0.006023446473900964,
            )
            .constraint(
                vec![
                    0.00575626611629779, 0.3294750895098736, 0.3195407887529575,
                    0.3314645063349985, 0.24833571884791097, 0.06686839646583272,
                    0.005247736562811214, -1.0,
                ],
                Sense::Le,
                0.29955632601754617,
            );
        let out = lp.solve().unwrap();
        assert!(lp.max_violation(&out.point.unwrap()) <= 1e-12);
        assert!(out.value.unwrap().abs() < 1e-11);
    }
}
