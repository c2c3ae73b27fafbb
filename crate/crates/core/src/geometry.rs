//! Homogeneous polyhedral cones `{θ : F θ ≥ 0, S θ > 0}` decided exactly.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{check_dim, Error, Result};
use crate::rational::{integer_row, Rational, RationalVector};
use crate::simplex::{maximize_le, Outcome};

/// Coefficients of a linear functional on the parameter space.
pub type LinearForm = RationalVector;

/// Nonstrict rows mean `form·θ ≥ 0`, strict rows `form·θ > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConstraintSystem {
    pub ambient_dim: usize,
    pub nonstrict: Vec<LinearForm>,
    pub strict: Vec<LinearForm>,
}

impl ConstraintSystem {
    pub fn new(ambient_dim: usize) -> ConstraintSystem {
        ConstraintSystem { ambient_dim, nonstrict: Vec::new(), strict: Vec::new() }
    }

    pub fn push_nonstrict(&mut self, form: LinearForm) {
        self.nonstrict.push(form);
    }

    pub fn push_strict(&mut self, form: LinearForm) {
        self.strict.push(form);
    }

    /// Adds `form·θ = 0` as a pair of opposite nonstrict rows.
    pub fn push_equality(&mut self, form: LinearForm) {
        let neg = form.iter().map(|v| -v).collect();
        self.nonstrict.push(form);
        self.nonstrict.push(neg);
    }

    pub fn validate(&self) -> Result<()> {
        for row in self.nonstrict.iter().chain(&self.strict) {
            check_dim(self.ambient_dim, row.len())?;
        }
        Ok(())
    }

    /// The same system with every strict row relaxed to `≥`.
    pub fn closure(&self) -> ConstraintSystem {
        let mut nonstrict = self.nonstrict.clone();
        nonstrict.extend(self.strict.iter().cloned());
        ConstraintSystem { ambient_dim: self.ambient_dim, nonstrict, strict: Vec::new() }
    }

    /// True iff `θ` satisfies every row exactly.
    pub fn satisfied_by(&self, theta: &[Rational]) -> bool {
        if theta.len() != self.ambient_dim {
            return false;
        }
        let val = |row: &LinearForm| crate::rational::dot(row, theta);
        self.nonstrict.iter().all(|r| !val(r).is_negative()) && self.strict.iter().all(|r| val(r).is_positive())
    }
}

/// A cone together with its dimension and the nonstrict rows that are tight everywhere on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeDescriptor {
    pub system: ConstraintSystem,
    pub dimension: usize,
    pub implied_equalities: Vec<usize>,
}

fn int_rows(rows: &[LinearForm]) -> Vec<Vec<BigInt>> {
    rows.iter().map(|r| integer_row(r)).collect()
}

/// Solves `max Σ_q t_q` subject to `row·θ ≥ t_{group(row)}` (or `≥ 0` without a group) and `0 ≤ t_q ≤ 1`.
///
/// Returns the optimum, a maximizing `θ`, and the `t` values.
pub(crate) fn max_slack(
    dim: usize,
    rows: &[Vec<BigInt>],
    groups: &[Option<usize>],
    group_count: usize,
) -> (Rational, RationalVector, RationalVector) {
    let vars = 2 * dim + group_count;
    let mut a = Vec::with_capacity(rows.len() + group_count);
    let mut b = Vec::with_capacity(rows.len() + group_count);
    for (row, group) in rows.iter().zip(groups) {
        // -row·u + row·v + t_q <= 0
        let mut lp_row = vec![BigInt::zero(); vars];
        for (k, v) in row.iter().enumerate() {
            if !v.is_zero() {
                lp_row[k] = -v;
                lp_row[dim + k] = v.clone();
            }
        }
        if let Some(q) = group {
            lp_row[2 * dim + q] = BigInt::one();
        }
        a.push(lp_row);
        b.push(BigInt::zero());
    }
    for q in 0..group_count {
        let mut lp_row = vec![BigInt::zero(); vars];
        lp_row[2 * dim + q] = BigInt::one();
        a.push(lp_row);
        b.push(BigInt::one());
    }
    let mut c = vec![BigInt::zero(); vars];
    for q in 0..group_count {
        c[2 * dim + q] = BigInt::one();
    }
    match maximize_le(&a, &b, &c) {
        Outcome::Optimal { value, x, .. } => {
            let theta = (0..dim).map(|k| &x[k] - &x[dim + k]).collect();
            let t = x[2 * dim..].to_vec();
            (value, theta, t)
        }
        // every t is bounded by 1
        _ => unreachable!("slack LP is bounded and feasible"),
    }
}

/// Strict feasibility over integer rows; returns a witness when one exists.
pub(crate) fn strictly_feasible(
    dim: usize,
    nonstrict: &[Vec<BigInt>],
    strict: &[Vec<BigInt>],
) -> Option<RationalVector> {
    if strict.is_empty() {
        return Some(vec![Rational::zero(); dim]);
    }
    let mut rows = Vec::with_capacity(nonstrict.len() + strict.len());
    let mut groups = Vec::with_capacity(rows.capacity());
    for r in strict {
        rows.push(r.clone());
        groups.push(Some(0));
    }
    for r in nonstrict {
        rows.push(r.clone());
        groups.push(None);
    }
    let (value, theta, _) = max_slack(dim, &rows, &groups, 1);
    value.is_positive().then_some(theta)
}

/// An exact point satisfying every nonstrict row with `≥` and every strict row with `>`, if any.
pub fn lp_feasible(system: &ConstraintSystem) -> Result<Option<RationalVector>> {
    system.validate()?;
    Ok(strictly_feasible(system.ambient_dim, &int_rows(&system.nonstrict), &int_rows(&system.strict)))
}

/// Integer-row variant of the relative-interior computation.
///
/// Returns the indices of `rows` that vanish on the whole cone `{rows·θ ≥ 0}` and a point of its relative interior.
pub(crate) fn relative_interior(dim: usize, rows: &[Vec<BigInt>]) -> (Vec<usize>, RationalVector) {
    // Each nontrivial row gets its own slack. By homogeneity every non-implied row can reach slack 1 at once,
    // so the optimum is attained exactly with t_r = 1 off the implied equalities and t_r = 0 on them.
    let mut groups = Vec::with_capacity(rows.len());
    let mut count = 0;
    for r in rows {
        if r.iter().all(|v| v.is_zero()) {
            groups.push(None);
        } else {
            groups.push(Some(count));
            count += 1;
        }
    }
    if count == 0 {
        return ((0..rows.len()).collect(), vec![Rational::zero(); dim]);
    }
    let (_, theta, t) = max_slack(dim, rows, &groups, count);
    let implied = groups
        .iter()
        .enumerate()
        .filter(|(_, g)| match g {
            None => true,
            Some(q) => t[*q].is_zero(),
        })
        .map(|(i, _)| i)
        .collect();
    (implied, theta)
}

fn require_feasible(system: &ConstraintSystem) -> Result<()> {
    if !system.strict.is_empty() && lp_feasible(system)?.is_none() {
        return Err(Error::Infeasible);
    }
    Ok(())
}

/// Nonstrict rows that hold with equality at every feasible point, ascending.
///
/// Strict rows, if present, must be jointly satisfiable with the rest.
pub fn implied_equalities(system: &ConstraintSystem) -> Result<Vec<usize>> {
    system.validate()?;
    require_feasible(system)?;
    // strict rows bound the closure too; none of them can be tight everywhere once the system is feasible
    let rows = int_rows(&system.closure().nonstrict);
    let count = system.nonstrict.len();
    Ok(relative_interior(system.ambient_dim, &rows).0.into_iter().filter(|&r| r < count).collect())
}

/// Reference implementation: one slack LP per row.
pub fn implied_equalities_rowwise(system: &ConstraintSystem) -> Result<Vec<usize>> {
    system.validate()?;
    require_feasible(system)?;
    let rows = int_rows(&system.closure().nonstrict);
    let mut out = Vec::new();
    for (r, row) in rows.iter().enumerate().take(system.nonstrict.len()) {
        let others: Vec<Vec<BigInt>> = rows.iter().enumerate().filter(|(q, _)| *q != r).map(|(_, v)| v.clone()).collect();
        if strictly_feasible(system.ambient_dim, &others, core::slice::from_ref(row)).is_none() {
            out.push(r);
        }
    }
    Ok(out)
}

/// A point in the relative interior of the closure of the feasible set.
pub fn relative_interior_point(system: &ConstraintSystem) -> Result<RationalVector> {
    system.validate()?;
    require_feasible(system)?;
    Ok(relative_interior(system.ambient_dim, &int_rows(&system.closure().nonstrict)).1)
}

/// Rank by fraction-free Gaussian elimination.
pub fn rank_int(rows: &[Vec<BigInt>]) -> usize {
    let mut m: Vec<Vec<BigInt>> = rows.iter().filter(|r| r.iter().any(|v| !v.is_zero())).cloned().collect();
    let Some(cols) = m.first().map(|r| r.len()) else { return 0 };
    let mut rank = 0;
    let mut prev = BigInt::one();
    for col in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][col].is_zero()) else { continue };
        m.swap(rank, p);
        let pivot_row = m[rank].clone();
        let pivot = pivot_row[col].clone();
        for row in m.iter_mut().skip(rank + 1) {
            let factor = row[col].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v = (&pivot * &*v - &factor * pv) / &prev;
            }
        }
        prev = pivot;
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

pub fn rank(rows: &[LinearForm]) -> usize {
    rank_int(&int_rows(rows))
}

/// `ambient_dim − rank` of the implied-equality normals.
pub fn cone_dim(system: &ConstraintSystem) -> Result<usize> {
    Ok(describe(system)?.dimension)
}

pub fn describe(system: &ConstraintSystem) -> Result<ConeDescriptor> {
    let implied = implied_equalities(system)?;
    let normals: Vec<LinearForm> = implied.iter().map(|&i| system.nonstrict[i].clone()).collect();
    let dimension = system.ambient_dim - rank(&normals);
    Ok(ConeDescriptor { system: system.clone(), dimension, implied_equalities: implied })
}
