use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest weight dimension accepted by [`enumerate_vertices`].
pub const MAX_VERTEX_DIMENSION: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

/// `coefficients · w  (<=|>=|=)  bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint<T> {
    pub coefficients: Vec<T>,
    pub sense: Sense,
    pub bound: T,
}

impl<T: Scalar> LinearConstraint<T> {
    pub fn new(coefficients: Vec<T>, sense: Sense, bound: T) -> Self {
        Self {
            coefficients,
            sense,
            bound,
        }
    }

    /// `w[i] <= w[j]`.
    pub fn ordered(dim: usize, i: usize, j: usize) -> Self {
        let mut coefficients = vec![T::zero(); dim];
        coefficients[i] = T::one();
        coefficients[j] = -T::one();
        Self::new(coefficients, Sense::Le, T::zero())
    }

    pub fn lhs(&self, w: &[T]) -> T {
        self.coefficients.iter().zip(w).map(|(&a, &x)| a * x).sum()
    }

    /// Signed violation: positive when `w` breaks the constraint.
    pub fn violation(&self, w: &[T]) -> T {
        let gap = self.lhs(w) - self.bound;
        match self.sense {
            Sense::Le => gap,
            Sense::Ge => -gap,
            Sense::Eq => gap.abs(),
        }
    }
}

/// Admissible weights: the probability simplex intersected with linear
/// constraints. Vertices are enumerated once at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightPolytope<T> {
    dim: usize,
    constraints: Vec<LinearConstraint<T>>,
    vertices: Vec<Vec<T>>,
    tolerance: T,
}

impl<T: Scalar> WeightPolytope<T> {
    pub fn new(dim: usize, constraints: Vec<LinearConstraint<T>>) -> Result<Self> {
        Self::with_tolerance(dim, constraints, T::default_tolerance())
    }

    pub fn with_tolerance(
        dim: usize,
        constraints: Vec<LinearConstraint<T>>,
        tolerance: T,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Schema("weight dimension must be positive".into()));
        }
        for (i, c) in constraints.iter().enumerate() {
            if c.coefficients.len() != dim {
                return Err(Error::Schema(format!(
                    "constraint {i} has {} coefficients, expected {dim}",
                    c.coefficients.len()
                )));
            }
            if c.coefficients.iter().any(|a| !a.is_finite()) || !c.bound.is_finite() {
                return Err(Error::Schema(format!("constraint {i} has non-finite entries")));
            }
        }
        let vertices = enumerate_vertices(dim, &constraints, tolerance)?;
        Ok(Self {
            dim,
            constraints,
            vertices,
            tolerance,
        })
    }

    /// The unconstrained simplex.
    pub fn simplex(dim: usize) -> Result<Self> {
        Self::new(dim, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraints(&self) -> &[LinearConstraint<T>] {
        &self.constraints
    }

    pub fn vertices(&self) -> &[Vec<T>] {
        &self.vertices
    }

    pub fn tolerance(&self) -> T {
        self.tolerance
    }

    /// Membership test within the polytope tolerance.
    pub fn contains(&self, w: &[T]) -> bool {
        contains(self.dim, &self.constraints, w, self.tolerance)
    }

    /// Same simplex with one more constraint.
    pub fn with_constraint(&self, extra: LinearConstraint<T>) -> Result<Self> {
        let mut constraints = self.constraints.clone();
        constraints.push(extra);
        Self::with_tolerance(self.dim, constraints, self.tolerance)
    }
}

fn contains<T: Scalar>(dim: usize, constraints: &[LinearConstraint<T>], w: &[T], tol: T) -> bool {
    if w.len() != dim {
        return false;
    }
    let sum: T = w.iter().copied().sum();
    (sum - T::one()).abs() <= tol
        && w.iter().all(|&x| x >= -tol && x <= T::one() + tol)
        && constraints.iter().all(|c| c.violation(w) <= tol)
}

/// Solves the square system in place by Gaussian elimination with partial
/// pivoting. `None` when the matrix is numerically singular.
fn solve_square<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    let eps = T::lit(1e-12).max(T::epsilon() * T::lit(16.0));
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .unwrap_or(Ordering::Equal)
        })?;
        if a[pivot][col].abs() <= eps {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == T::zero() {
                continue;
            }
            for k in col..n {
                let delta = factor * a[col][k];
                a[row][k] -= delta;
            }
            let delta = factor * b[col];
            b[row] -= delta;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Calls `f` with every `k`-subset of `0..n` in lexicographic order.
fn for_each_subset(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, buf: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if buf.len() == k {
            f(buf);
            return;
        }
        let remaining = k - buf.len();
        for i in start..=n.saturating_sub(remaining) {
            if n - i < remaining {
                break;
            }
            buf.push(i);
            rec(i + 1, n, k, buf, f);
            buf.pop();
        }
    }
    if k > n {
        return;
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}

/// Every extreme point of `{w : Σw = 1, w ≥ 0, constraints}`.
///
/// Each choice of `dim − 1` rows (user constraints and non-negativity bounds)
/// is taken as equalities together with `Σw = 1`; feasible solutions are kept
/// and deduplicated at `tolerance` in the max norm. The result is sorted
/// lexicographically.
pub fn enumerate_vertices<T: Scalar>(
    dim: usize,
    constraints: &[LinearConstraint<T>],
    tolerance: T,
) -> Result<Vec<Vec<T>>> {
    if dim > MAX_VERTEX_DIMENSION {
        return Err(Error::UnsupportedDimension {
            got: dim,
            max: MAX_VERTEX_DIMENSION,
        });
    }
    if dim == 0 {
        return Err(Error::Schema("weight dimension must be positive".into()));
    }

    // Candidate active rows: user constraints, then w_i >= 0.
    let mut rows: Vec<(Vec<T>, T)> = constraints
        .iter()
        .map(|c| (c.coefficients.clone(), c.bound))
        .collect();
    for i in 0..dim {
        let mut e = vec![T::zero(); dim];
        e[i] = T::one();
        rows.push((e, T::zero()));
    }

    let mut vertices: Vec<Vec<T>> = Vec::new();
    for_each_subset(rows.len(), dim - 1, &mut |subset| {
        let mut a = Vec::with_capacity(dim);
        let mut b = Vec::with_capacity(dim);
        a.push(vec![T::one(); dim]);
        b.push(T::one());
        for &r in subset {
            a.push(rows[r].0.clone());
            b.push(rows[r].1);
        }
        let Some(mut w) = solve_square(a, b) else {
            return;
        };
        if !contains(dim, constraints, &w, tolerance) {
            return;
        }
        // Snap round-off so that duplicates compare cleanly.
        for x in w.iter_mut() {
            if x.abs() <= tolerance {
                *x = T::zero();
            }
        }
        let duplicate = vertices.iter().any(|v| {
            v.iter()
                .zip(&w)
                .all(|(&p, &q)| (p - q).abs() <= tolerance)
        });
        if !duplicate {
            vertices.push(w);
        }
    });

    if vertices.is_empty() {
        return Err(Error::InfeasibleFamily);
    }
    vertices.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    });
    Ok(vertices)
}
