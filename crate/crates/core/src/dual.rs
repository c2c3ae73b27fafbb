//! Input-space geometry of a fixed parameter: regions, their adjacencies (edges of the dual
//! subdivision), the decision boundary, and exact planar pieces for drawing.
//!
//! Affine cells are homogenized as `(λ, y)` with `x = y / λ` and `λ > 0`.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{self, ConstraintSystem, LinearForm};
use crate::rational::{dot, Rational, RationalVector};
use crate::tropical::{Signomial, TropicalRational};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DualEdge {
    pub i: usize,
    pub j: usize,
    pub sign_mixed: bool,
    pub cell_dim: usize,
}

/// Argmax sets `A_1, ..., A_M` of a point against a family of tropical hyperplanes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TropicalCovector(pub Vec<Vec<usize>>);

/// `term_i − term_k` as a homogeneous form in `(λ, y)`.
fn difference(theta: &Signomial, i: usize, k: usize) -> LinearForm {
    let (ti, tk) = (&theta.terms()[i], &theta.terms()[k]);
    let mut row = Vec::with_capacity(theta.dim() + 1);
    row.push(&ti.a - &tk.a);
    row.extend(ti.s.iter().zip(&tk.s).map(|(x, y)| x - y));
    row
}

fn lambda_positive(dim: usize) -> LinearForm {
    let mut row = vec![Rational::zero(); dim + 1];
    row[0] = Rational::one();
    row
}

/// Homogenized system of the cell where every term in `tied` attains the maximum.
fn cell_system(theta: &Signomial, tied: &[usize]) -> ConstraintSystem {
    let mut system = ConstraintSystem::new(theta.dim() + 1);
    let first = tied[0];
    for &j in &tied[1..] {
        system.push_equality(difference(theta, first, j));
    }
    for k in (0..theta.len()).filter(|k| !tied.contains(k)) {
        system.push_nonstrict(difference(theta, first, k));
    }
    system.push_strict(lambda_positive(theta.dim()));
    system
}

/// Dimension of the cell where all `tied` terms attain the maximum, or `None` if it is empty.
pub fn cell_dim(theta: &Signomial, tied: &[usize]) -> Result<Option<usize>> {
    if tied.is_empty() || tied.iter().any(|&i| i >= theta.len()) {
        return Err(Error::Precondition("cell needs valid term indices".into()));
    }
    let system = cell_system(theta, tied);
    if geometry::lp_feasible(&system)?.is_none() {
        return Ok(None);
    }
    Ok(Some(geometry::cone_dim(&system)? - 1))
}

/// An exact point in the relative interior of a nonempty cell.
pub fn cell_point(theta: &Signomial, tied: &[usize]) -> Result<Option<RationalVector>> {
    let system = cell_system(theta, tied);
    if geometry::lp_feasible(&system)?.is_none() {
        return Ok(None);
    }
    let h = geometry::relative_interior_point(&system)?;
    Ok(Some(h[1..].iter().map(|y| y / &h[0]).collect()))
}

/// Terms whose region is nonempty.
pub fn nonempty_regions(theta: &Signomial) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for i in 0..theta.len() {
        if cell_dim(theta, &[i])?.is_some() {
            out.push(i);
        }
    }
    Ok(out)
}

fn edges(theta: &Signomial, numerator: usize) -> Result<Vec<DualEdge>> {
    let d = theta.dim();
    let live = nonempty_regions(theta)?;
    let mut out = Vec::new();
    for (a, &i) in live.iter().enumerate() {
        for &j in &live[a + 1..] {
            if let Some(cell) = cell_dim(theta, &[i, j])? {
                if cell + 1 >= d {
                    out.push(DualEdge { i, j, sign_mixed: (i < numerator) != (j < numerator), cell_dim: cell });
                }
            }
        }
    }
    Ok(out)
}

/// Pairs of terms whose regions meet in a cell of dimension `d − 1`.
pub fn dual_edges(theta: &Signomial) -> Result<Vec<DualEdge>> {
    let d = theta.dim();
    Ok(edges(theta, theta.len())?.into_iter().filter(|e| e.cell_dim + 1 == d).collect())
}

/// Edges of the merged signomial, flagged by whether they join a numerator and a denominator term.
pub fn dual_edges_of(f: &TropicalRational) -> Result<Vec<DualEdge>> {
    let d = f.dim();
    Ok(edges(&f.merged(), f.n())?.into_iter().filter(|e| e.cell_dim + 1 == d).collect())
}

/// Sign-mixed edges. A numerator term identical to a denominator term shares a full-dimensional cell with it
/// (the classifier vanishes there); such pairs are reported with `cell_dim == d`.
pub fn decision_boundary(f: &TropicalRational) -> Result<Vec<DualEdge>> {
    Ok(edges(&f.merged(), f.n())?.into_iter().filter(|e| e.sign_mixed).collect())
}

/// `A_i = argmax_j (point_j + apex_{i,j})` for each apex.
pub fn tropical_type(apices: &[RationalVector], point: &[Rational]) -> Result<TropicalCovector> {
    let mut out = Vec::with_capacity(apices.len());
    for apex in apices {
        check_dim(point.len(), apex.len())?;
        let values: Vec<Rational> = apex.iter().zip(point).map(|(a, p)| a + p).collect();
        let best = values.iter().max().ok_or_else(|| Error::Precondition("empty apex".into()))?;
        out.push((0..values.len()).filter(|&j| &values[j] == best).collect());
    }
    Ok(TropicalCovector(out))
}

/// Axis-aligned box `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    pub x0: Rational,
    pub x1: Rational,
    pub y0: Rational,
    pub y1: Rational,
}

impl Window {
    pub fn new(x0: Rational, x1: Rational, y0: Rational, y1: Rational) -> Result<Window> {
        if x0 >= x1 || y0 >= y1 {
            return Err(Error::Precondition("window must have positive width and height".into()));
        }
        Ok(Window { x0, x1, y0, y1 })
    }

    /// Half-planes `c + <w, x> ≥ 0` describing the box.
    fn half_planes(&self) -> Vec<(Rational, RationalVector)> {
        let one = Rational::one();
        let zero = Rational::zero();
        vec![
            (-self.x0.clone(), vec![one.clone(), zero.clone()]),
            (self.x1.clone(), vec![-one.clone(), zero.clone()]),
            (-self.y0.clone(), vec![zero.clone(), one.clone()]),
            (self.y1.clone(), vec![zero, -one]),
        ]
    }

    pub fn corners(&self) -> Vec<RationalVector> {
        vec![
            vec![self.x0.clone(), self.y0.clone()],
            vec![self.x1.clone(), self.y0.clone()],
            vec![self.x1.clone(), self.y1.clone()],
            vec![self.x0.clone(), self.y1.clone()],
        ]
    }

    pub fn contains(&self, p: &[Rational]) -> bool {
        p[0] >= self.x0 && p[0] <= self.x1 && p[1] >= self.y0 && p[1] <= self.y1
    }
}

/// A boundary piece clipped to the window, with exact endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub edge: DualEdge,
    pub start: RationalVector,
    pub end: RationalVector,
}

fn require_planar(d: usize) -> Result<()> {
    if d != 2 {
        return Err(Error::Precondition("planar geometry needs d = 2".into()));
    }
    Ok(())
}

fn term_difference(theta: &Signomial, i: usize, k: usize) -> (Rational, RationalVector) {
    let row = difference(theta, i, k);
    (row[0].clone(), row[1..].to_vec())
}

/// Clips the one-dimensional cell of edge `(i, j)` to the window.
fn clip_edge(theta: &Signomial, edge: &DualEdge, window: &Window) -> Option<Segment> {
    // line c + <w, x> = 0 where term_i = term_j
    let (c, w) = term_difference(theta, edge.i, edge.j);
    if w.iter().all(|v| v.is_zero()) {
        return None;
    }
    let norm = dot(&w, &w);
    let base: RationalVector = w.iter().map(|v| -(&c) * v / &norm).collect();
    let dir = vec![-w[1].clone(), w[0].clone()];
    let mut lo: Option<Rational> = None;
    let mut hi: Option<Rational> = None;
    let mut bounds: Vec<(Rational, RationalVector)> = window.half_planes();
    for k in (0..theta.len()).filter(|&k| k != edge.i && k != edge.j) {
        bounds.push(term_difference(theta, edge.i, k));
    }
    for (bc, bw) in bounds {
        // bc + <bw, base + t dir> >= 0
        let slope = dot(&bw, &dir);
        let offset = bc + dot(&bw, &base);
        if slope.is_zero() {
            if offset.is_negative() {
                return None;
            }
            continue;
        }
        let t = -&offset / &slope;
        if slope.is_positive() {
            lo = Some(match lo {
                Some(l) if l >= t => l,
                _ => t,
            });
        } else {
            hi = Some(match hi {
                Some(h) if h <= t => h,
                _ => t,
            });
        }
    }
    let (lo, hi) = (lo?, hi?);
    if lo >= hi {
        return None;
    }
    let at = |t: &Rational| -> RationalVector { base.iter().zip(&dir).map(|(b, v)| b + t * v).collect() };
    Some(Segment { edge: edge.clone(), start: at(&lo), end: at(&hi) })
}

/// Decision-boundary pieces inside the window, in edge order.
pub fn boundary_segments(f: &TropicalRational, window: &Window) -> Result<Vec<Segment>> {
    require_planar(f.dim())?;
    let merged = f.merged();
    Ok(decision_boundary(f)?
        .iter()
        .filter(|e| e.cell_dim == 1)
        .filter_map(|e| clip_edge(&merged, e, window))
        .collect())
}

/// Exact polygon of region `i` inside the window, counter-clockwise; empty if it misses the window.
pub fn region_polygon(theta: &Signomial, i: usize, window: &Window) -> Result<Vec<RationalVector>> {
    require_planar(theta.dim())?;
    let mut poly = window.corners();
    for k in (0..theta.len()).filter(|&k| k != i) {
        let (c, w) = term_difference(theta, i, k);
        poly = clip_half_plane(&poly, &c, &w);
        if poly.is_empty() {
            break;
        }
    }
    Ok(poly)
}

/// Sutherland-Hodgman step keeping `c + <w, x> ≥ 0`.
fn clip_half_plane(poly: &[RationalVector], c: &Rational, w: &[Rational]) -> Vec<RationalVector> {
    let value = |p: &RationalVector| c + dot(w, p);
    let mut out = Vec::new();
    for idx in 0..poly.len() {
        let cur = &poly[idx];
        let next = &poly[(idx + 1) % poly.len()];
        let (vc, vn) = (value(cur), value(next));
        if !vc.is_negative() {
            out.push(cur.clone());
        }
        if (vc.is_negative() && vn.is_positive()) || (vc.is_positive() && vn.is_negative()) {
            let t = &vc / (&vc - &vn);
            out.push(cur.iter().zip(next).map(|(a, b)| a + &t * (b - a)).collect());
        }
    }
    out.dedup();
    if out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    if out.len() < 3 {
        return Vec::new();
    }
    out
}

/// Average of polygon vertices.
pub fn vertex_centroid(poly: &[RationalVector]) -> Option<RationalVector> {
    if poly.is_empty() {
        return None;
    }
    let n = Rational::from_integer(poly.len().into());
    let mut c = vec![Rational::zero(); poly[0].len()];
    for p in poly {
        for (ci, pi) in c.iter_mut().zip(p) {
            *ci += pi;
        }
    }
    Some(c.into_iter().map(|v| v / &n).collect())
}
