//! Fraction-free exact simplex.
//!
//! The tableau holds integers `T` together with the basis determinant `det`;
//! the rational tableau it represents is `T / det`. Pivoting on `(r, s)` keeps
//! row `r`, replaces every other row by `(p * T_ij - T_is * T_rj) / det` (an
//! exact division) and sets `det = p`. Bland's rule prevents cycling.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Optimal {
        value: Rational,
        /// Values of the structural variables.
        x: Vec<Rational>,
        /// Dual values, one per constraint row.
        duals: Vec<Rational>,
    },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: usize,
    cols: usize,
    // (rows + 1) x (cols + 1), row-major; row `rows` is the objective, column `cols` the rhs
    t: Vec<BigInt>,
    det: BigInt,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> &BigInt {
        &self.t[i * (self.cols + 1) + j]
    }

    fn rhs(&self, i: usize) -> &BigInt {
        self.at(i, self.cols)
    }

    fn pivot(&mut self, r: usize, s: usize) {
        let width = self.cols + 1;
        let p = self.at(r, s).clone();
        debug_assert!(!p.is_zero());
        let pivot_row: Vec<BigInt> = self.t[r * width..(r + 1) * width].to_vec();
        for i in 0..=self.rows {
            if i == r {
                continue;
            }
            let factor = self.t[i * width + s].clone();
            let row = &mut self.t[i * width..(i + 1) * width];
            if factor.is_zero() {
                if !p.is_one() || !self.det.is_one() {
                    for v in row.iter_mut() {
                        if !v.is_zero() {
                            *v = &*v * &p / &self.det;
                        }
                    }
                }
                continue;
            }
            for (v, pr) in row.iter_mut().zip(&pivot_row) {
                let mut num = &*v * &p;
                if !pr.is_zero() {
                    num -= &factor * pr;
                }
                *v = num / &self.det;
            }
        }
        self.det = p;
        if self.det.is_negative() {
            for v in self.t.iter_mut() {
                *v = -&*v;
            }
            self.det = -&self.det;
        }
        self.basis[r] = s;
    }

    /// Runs Bland's-rule simplex on the current objective row, restricted to `allowed` entering columns.
    /// Returns false if unbounded.
    fn optimize(&mut self, allowed: usize) -> bool {
        loop {
            let obj = self.rows;
            let entering = (0..allowed).find(|&j| self.at(obj, j).is_negative());
            let Some(s) = entering else { return true };
            let mut leave: Option<usize> = None;
            for i in 0..self.rows {
                let a = self.at(i, s);
                if !a.is_positive() {
                    continue;
                }
                leave = match leave {
                    None => Some(i),
                    Some(k) => {
                        // compare rhs_i / a_is with rhs_k / a_ks
                        let lhs = self.rhs(i) * self.at(k, s);
                        let rhs = self.rhs(k) * a;
                        if lhs < rhs || (lhs == rhs && self.basis[i] < self.basis[k]) {
                            Some(i)
                        } else {
                            Some(k)
                        }
                    }
                };
            }
            match leave {
                Some(r) => self.pivot(r, s),
                None => return false,
            }
        }
    }

    fn value_of(&self, var: usize) -> Rational {
        match self.basis.iter().position(|&b| b == var) {
            Some(i) => Rational::new(self.rhs(i).clone(), self.det.clone()),
            None => Rational::zero(),
        }
    }
}

/// Maximizes `c·x` subject to `A x <= b`, `x >= 0`, where `b >= 0` so the slack basis is feasible.
pub fn maximize_le(a: &[Vec<BigInt>], b: &[BigInt], c: &[BigInt]) -> Outcome {
    let rows = a.len();
    let n = c.len();
    assert!(b.iter().all(|v| !v.is_negative()), "maximize_le needs b >= 0");
    let cols = n + rows;
    let width = cols + 1;
    let mut t = vec![BigInt::zero(); (rows + 1) * width];
    for (i, row) in a.iter().enumerate() {
        debug_assert_eq!(row.len(), n);
        for (j, v) in row.iter().enumerate() {
            t[i * width + j] = v.clone();
        }
        t[i * width + n + i] = BigInt::one();
        t[i * width + cols] = b[i].clone();
    }
    for (j, v) in c.iter().enumerate() {
        t[rows * width + j] = -v;
    }
    let mut tab = Tableau { rows, cols, t, det: BigInt::one(), basis: (n..n + rows).collect() };
    if !tab.optimize(cols) {
        return Outcome::Unbounded;
    }
    let det = tab.det.clone();
    let value = Rational::new(tab.rhs(rows).clone(), det.clone());
    let x = (0..n).map(|j| tab.value_of(j)).collect();
    let duals = (0..rows).map(|i| Rational::new(tab.at(rows, n + i).clone(), det.clone())).collect();
    Outcome::Optimal { value, x, duals }
}

/// Maximizes `c·x` subject to `A x = b`, `x >= 0` by the two-phase method.
pub fn maximize_eq(a: &[Vec<BigInt>], b: &[BigInt], c: &[BigInt]) -> Outcome {
    let rows = a.len();
    let n = c.len();
    let cols = n + rows;
    let width = cols + 1;
    let mut t = vec![BigInt::zero(); (rows + 1) * width];
    let flipped: Vec<bool> = b.iter().map(|v| v.is_negative()).collect();
    for (i, row) in a.iter().enumerate() {
        debug_assert_eq!(row.len(), n);
        let flip = b[i].is_negative();
        for (j, v) in row.iter().enumerate() {
            t[i * width + j] = if flip { -v } else { v.clone() };
        }
        t[i * width + n + i] = BigInt::one();
        t[i * width + cols] = if flip { -&b[i] } else { b[i].clone() };
    }
    // phase 1: maximize -(sum of artificials); express in terms of nonbasics
    for j in 0..=cols {
        if (n..n + rows).contains(&j) {
            continue;
        }
        let mut s = BigInt::zero();
        for i in 0..rows {
            s -= &t[i * width + j];
        }
        t[rows * width + j] = s;
    }
    let mut tab = Tableau { rows, cols, t, det: BigInt::one(), basis: (n..n + rows).collect() };
    tab.optimize(cols);
    if tab.rhs(rows).is_negative() {
        return Outcome::Infeasible;
    }
    // drive artificial variables out of the basis where possible
    for i in 0..rows {
        if tab.basis[i] >= n {
            if let Some(s) = (0..n).find(|&j| !tab.at(i, j).is_zero()) {
                tab.pivot(i, s);
            }
        }
    }
    // redundant rows keep an artificial basic at zero; forbid artificials from entering again
    let width = tab.cols + 1;
    for j in 0..=tab.cols {
        tab.t[rows * width + j] = BigInt::zero();
    }
    // phase 2 objective row: det * (c_B B^-1 A - c)
    for (j, cj) in c.iter().enumerate() {
        tab.t[rows * width + j] = -cj * &tab.det;
    }
    for i in 0..rows {
        let bv = tab.basis[i];
        if bv >= n {
            continue;
        }
        let cb = &c[bv];
        if cb.is_zero() {
            continue;
        }
        for j in 0..=tab.cols {
            let add = cb * &tab.t[i * width + j];
            tab.t[rows * width + j] += add;
        }
    }
    if !tab.optimize(n) {
        return Outcome::Unbounded;
    }
    let det = tab.det.clone();
    let value = Rational::new(tab.rhs(rows).clone(), det.clone());
    let x = (0..n).map(|j| tab.value_of(j)).collect();
    let duals = (0..rows)
        .map(|i| {
            let y = Rational::new(tab.at(rows, n + i).clone(), det.clone());
            if flipped[i] {
                -y
            } else {
                y
            }
        })
        .collect();
    Outcome::Optimal { value, x, duals }
}
