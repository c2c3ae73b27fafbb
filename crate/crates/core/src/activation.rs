//! Activation patterns and the activation fan of a dataset.
//!
//! Parameters are flat vectors `(a_1, s_1, ..., a_N, s_N)` of length `N(d+1)`. Term indices are
//! 0-based in the API; text renderings are 1-based.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::Range;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{self, ConeDescriptor, ConstraintSystem, LinearForm};
use crate::rational::{integer_row, Rational, RationalVector, Sign};
use crate::tropical::{signomial_from_flat, Signomial};

/// Largest supported number of terms; neighbor sets are stored as 64-bit masks.
pub const MAX_TERMS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    points: Vec<RationalVector>,
    dim: usize,
    // (1, p) scaled to a primitive-free integer vector
    lifted: Vec<Vec<BigInt>>,
}

impl Dataset {
    pub fn new(points: Vec<RationalVector>) -> Result<Dataset> {
        let dim = points
            .first()
            .ok_or_else(|| Error::Precondition("a dataset needs at least one point".into()))?
            .len();
        for p in &points {
            check_dim(dim, p.len())?;
        }
        let lifted = points
            .iter()
            .map(|p| {
                let mut row = Vec::with_capacity(dim + 1);
                row.push(Rational::one());
                row.extend(p.iter().cloned());
                integer_row(&row)
            })
            .collect();
        Ok(Dataset { points, dim, lifted })
    }

    pub fn from_ints(points: &[&[i64]]) -> Result<Dataset> {
        Dataset::new(points.iter().map(|p| crate::rational::ints(p)).collect())
    }

    pub fn points(&self) -> &[RationalVector] {
        &self.points
    }

    pub fn point(&self, k: usize) -> &RationalVector {
        &self.points[k]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub(crate) fn lifted(&self, k: usize) -> &[BigInt] {
        &self.lifted[k]
    }

    /// Dimension of the affine hull of the points.
    pub fn affine_dim(&self) -> usize {
        let base = &self.points[0];
        let diffs: Vec<LinearForm> =
            self.points[1..].iter().map(|p| p.iter().zip(base).map(|(x, y)| x - y).collect()).collect();
        geometry::rank(&diffs)
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        Dataset::new(indices.iter().map(|&k| self.points[k].clone()).collect())
    }
}

fn cmp_sets(mut a: u64, mut b: u64) -> Ordering {
    loop {
        match (a == 0, b == 0) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let (x, y) = (a.trailing_zeros(), b.trailing_zeros());
        if x != y {
            return x.cmp(&y);
        }
        a &= a - 1;
        b &= b - 1;
    }
}

pub(crate) fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    core::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(i)
        }
    })
}

/// Bipartite graph between data points and terms, stored as one neighbor mask per point.
///
/// Ordered lexicographically by the sequence of sorted neighbor lists.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActivationPattern {
    n_terms: usize,
    masks: Vec<u64>,
}

impl Ord for ActivationPattern {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.masks.iter().zip(&other.masks) {
            match cmp_sets(*a, *b) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        self.masks.len().cmp(&other.masks.len()).then(self.n_terms.cmp(&other.n_terms))
    }
}

impl PartialOrd for ActivationPattern {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl ActivationPattern {
    pub(crate) fn from_masks(n_terms: usize, masks: Vec<u64>) -> ActivationPattern {
        ActivationPattern { n_terms, masks }
    }

    fn check_terms(n_terms: usize) -> Result<()> {
        if n_terms == 0 || n_terms > MAX_TERMS {
            return Err(Error::Precondition(format!("number of terms must be in 1..={MAX_TERMS}, got {n_terms}")));
        }
        Ok(())
    }

    /// Builds a pattern from 0-based neighbor sets. Empty sets are allowed here; see [`ActivationPattern::min_degree`].
    pub fn from_sets(n_terms: usize, sets: &[Vec<usize>]) -> Result<ActivationPattern> {
        Self::check_terms(n_terms)?;
        let mut masks = Vec::with_capacity(sets.len());
        for set in sets {
            let mut mask = 0u64;
            for &i in set {
                if i >= n_terms {
                    return Err(Error::ShapeMismatch(format!("term index {i} out of range for {n_terms} terms")));
                }
                mask |= 1 << i;
            }
            masks.push(mask);
        }
        Ok(ActivationPattern { n_terms, masks })
    }

    /// Builds a pattern from 1-based neighbor sets, as used in text formats.
    pub fn from_one_based(n_terms: usize, sets: &[Vec<usize>]) -> Result<ActivationPattern> {
        let zero_based = sets
            .iter()
            .map(|s| {
                s.iter()
                    .map(|&i| i.checked_sub(1).ok_or_else(|| Error::Parse("term indices are 1-based".into())))
                    .collect::<Result<Vec<usize>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_sets(n_terms, &zero_based)
    }

    /// One term per point.
    pub fn from_labels(n_terms: usize, labels: &[usize]) -> Result<ActivationPattern> {
        let sets: Vec<Vec<usize>> = labels.iter().map(|&l| vec![l]).collect();
        Self::from_sets(n_terms, &sets)
    }

    /// Every point adjacent to every term.
    pub fn complete(n_terms: usize, num_points: usize) -> ActivationPattern {
        let full = if n_terms == 64 { u64::MAX } else { (1u64 << n_terms) - 1 };
        ActivationPattern { n_terms, masks: vec![full; num_points] }
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn num_points(&self) -> usize {
        self.masks.len()
    }

    pub fn mask(&self, k: usize) -> u64 {
        self.masks[k]
    }

    pub fn masks(&self) -> &[u64] {
        &self.masks
    }

    pub fn neighbors(&self, k: usize) -> Vec<usize> {
        bits(self.masks[k]).collect()
    }

    pub fn one_based(&self) -> Vec<Vec<usize>> {
        self.masks.iter().map(|&m| bits(m).map(|i| i + 1).collect()).collect()
    }

    pub fn degree(&self, k: usize) -> usize {
        self.masks[k].count_ones() as usize
    }

    pub fn min_degree(&self) -> usize {
        self.masks.iter().map(|m| m.count_ones() as usize).min().unwrap_or(0)
    }

    pub fn is_deg_one(&self) -> bool {
        self.masks.iter().all(|m| m.count_ones() == 1)
    }

    /// The unique neighbor of every point, if all degrees are one.
    pub fn labels(&self) -> Option<Vec<usize>> {
        self.is_deg_one().then(|| self.masks.iter().map(|m| m.trailing_zeros() as usize).collect())
    }

    pub fn edge_count(&self) -> usize {
        self.masks.iter().map(|m| m.count_ones() as usize).sum()
    }

    /// Points adjacent to term `i`.
    pub fn region(&self, i: usize) -> Vec<usize> {
        (0..self.masks.len()).filter(|&k| self.masks[k] >> i & 1 == 1).collect()
    }

    fn check_same_shape(&self, other: &ActivationPattern) -> Result<()> {
        if self.n_terms != other.n_terms || self.masks.len() != other.masks.len() {
            return Err(Error::ShapeMismatch("patterns over different node sets".into()));
        }
        Ok(())
    }

    pub fn union(&self, other: &ActivationPattern) -> Result<ActivationPattern> {
        self.check_same_shape(other)?;
        let masks = self.masks.iter().zip(&other.masks).map(|(a, b)| a | b).collect();
        Ok(ActivationPattern { n_terms: self.n_terms, masks })
    }

    pub fn is_subgraph_of(&self, other: &ActivationPattern) -> bool {
        self.n_terms == other.n_terms
            && self.masks.len() == other.masks.len()
            && self.masks.iter().zip(&other.masks).all(|(a, b)| a & !b == 0)
    }

    /// Relabels term `i` as `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> ActivationPattern {
        let masks = self.masks.iter().map(|&m| bits(m).fold(0u64, |acc, i| acc | 1 << perm[i])).collect();
        ActivationPattern { n_terms: self.n_terms, masks }
    }

    fn check_data(&self, data: &Dataset) -> Result<()> {
        if self.masks.len() != data.len() {
            return Err(Error::ShapeMismatch(format!(
                "pattern has {} data nodes, dataset has {} points",
                self.masks.len(),
                data.len()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for ActivationPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, &m) in self.masks.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            f.write_str("{")?;
            for (j, i) in bits(m).enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{}", i + 1)?;
            }
            f.write_str("}")?;
        }
        f.write_str("]")
    }
}

/// A cone of the activation fan with its closed pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FanCone {
    pub pattern: ActivationPattern,
    pub descriptor: ConeDescriptor,
}

impl FanCone {
    pub fn dimension(&self) -> usize {
        self.descriptor.dimension
    }
}

/// Argmax sets of a signomial at every data point.
pub fn pattern_of(theta: &Signomial, data: &Dataset) -> Result<ActivationPattern> {
    check_dim(data.dim(), theta.dim())?;
    ActivationPattern::check_terms(theta.len())?;
    let mut masks = Vec::with_capacity(data.len());
    for p in data.points() {
        let e = theta.eval(p)?;
        masks.push(e.argmax.iter().fold(0u64, |acc, &i| acc | 1 << i));
    }
    Ok(ActivationPattern { n_terms: theta.len(), masks })
}

/// Pattern of a flat parameter vector with `n_terms` terms.
pub fn pattern_of_flat(theta: &[Rational], n_terms: usize, data: &Dataset) -> Result<ActivationPattern> {
    pattern_of(&signomial_from_flat(theta, n_terms, data.dim())?, data)
}

fn rational_row(data: &Dataset, n_terms: usize, k: usize, win: usize, lose: usize) -> LinearForm {
    let d1 = data.dim() + 1;
    let mut row = vec![Rational::zero(); n_terms * d1];
    let p = data.point(k);
    row[win * d1] = Rational::one();
    row[lose * d1] = -Rational::one();
    for c in 0..data.dim() {
        row[win * d1 + 1 + c] = p[c].clone();
        row[lose * d1 + 1 + c] = -p[c].clone();
    }
    row
}

/// Rows `(a_w − a_i) + <s_w − s_i, p> ≥ 0` for every edge `(p, w)` of the pattern and every other term `i`.
///
/// Rows are ordered by point, then winning term, then losing term.
pub fn cone_constraints(pattern: &ActivationPattern, data: &Dataset) -> Result<ConstraintSystem> {
    pattern.check_data(data)?;
    let n = pattern.n_terms();
    let mut system = ConstraintSystem::new(n * (data.dim() + 1));
    for k in 0..data.len() {
        for win in bits(pattern.mask(k)) {
            for lose in (0..n).filter(|&i| i != win) {
                system.push_nonstrict(rational_row(data, n, k, win, lose));
            }
        }
    }
    Ok(system)
}

/// Integer rows over a reduced coordinate system.
///
/// Only the listed terms get coordinates, and the block of `gauge` is fixed to zero. Both reductions
/// preserve feasibility and implied equalities: unlisted terms can always be pushed strictly below
/// every point, and adding one affine function to every term changes no row.
struct Frame {
    block: Vec<Option<usize>>,
    used: u64,
    d1: usize,
    width: usize,
}

impl Frame {
    fn new(n_terms: usize, used: u64, gauge: usize, d1: usize) -> Frame {
        let mut block = vec![None; n_terms];
        let mut next = 0;
        for i in bits(used) {
            if i != gauge {
                block[i] = Some(next);
                next += 1;
            }
        }
        Frame { block, used, d1, width: next * d1 }
    }

    fn row(&self, q: &[BigInt], win: usize, lose: usize) -> Vec<BigInt> {
        let mut row = vec![BigInt::zero(); self.width];
        if let Some(b) = self.block[win] {
            for (c, v) in q.iter().enumerate() {
                row[b * self.d1 + c] = v.clone();
            }
        }
        if let Some(b) = self.block[lose] {
            for (c, v) in q.iter().enumerate() {
                row[b * self.d1 + c] = -v;
            }
        }
        row
    }

    /// Embeds a reduced point into the full parameter space.
    fn expand(&self, reduced: &[Rational], n_terms: usize, unused_offset: Option<Rational>) -> RationalVector {
        let mut theta = vec![Rational::zero(); n_terms * self.d1];
        for (i, b) in self.block.iter().enumerate() {
            match b {
                Some(b) => theta[i * self.d1..(i + 1) * self.d1].clone_from_slice(&reduced[b * self.d1..(b + 1) * self.d1]),
                None if self.used >> i & 1 == 0 => {
                    if let Some(off) = &unused_offset {
                        theta[i * self.d1] = off.clone();
                    }
                }
                None => {}
            }
        }
        theta
    }
}

fn used_terms(pattern: &ActivationPattern) -> u64 {
    pattern.masks().iter().fold(0, |acc, m| acc | m)
}

/// Strict realization test: is there a θ whose pattern is exactly `pattern`?
///
/// Returns such a θ in the full parameter space.
pub fn realize(pattern: &ActivationPattern, data: &Dataset) -> Result<Option<RationalVector>> {
    pattern.check_data(data)?;
    if pattern.min_degree() == 0 {
        return Err(Error::Precondition("every data node needs degree at least 1".into()));
    }
    let n = pattern.n_terms();
    let used = used_terms(pattern);
    let gauge = pattern.mask(0).trailing_zeros() as usize;
    let frame = Frame::new(n, used, gauge, data.dim() + 1);
    let mut nonstrict = Vec::new();
    let mut strict = Vec::new();
    for k in 0..data.len() {
        let q = data.lifted(k);
        let mask = pattern.mask(k);
        let first = mask.trailing_zeros() as usize;
        for i in bits(mask).skip(1) {
            nonstrict.push(frame.row(q, first, i));
            nonstrict.push(frame.row(q, i, first));
        }
        for i in bits(used & !mask) {
            strict.push(frame.row(q, first, i));
        }
    }
    let Some(reduced) = geometry::strictly_feasible(frame.width, &nonstrict, &strict) else {
        return Ok(None);
    };
    let mut theta = frame.expand(&reduced, n, None);
    if used.count_ones() as usize != n {
        // push unused terms below the maximum at every point
        let d1 = data.dim() + 1;
        let mut low: Option<Rational> = None;
        for p in data.points() {
            for i in bits(used) {
                let v = &theta[i * d1] + crate::rational::dot(&theta[i * d1 + 1..(i + 1) * d1], p);
                low = Some(match low {
                    Some(l) if l <= v => l,
                    _ => v,
                });
            }
        }
        let off = low.expect("nonempty") - Rational::one();
        theta = frame.expand(&reduced, n, Some(off));
    }
    Ok(Some(theta))
}

/// Closed cone of an arbitrary graph with all degrees at least one, labeled by its closure.
///
/// The set cut out by `cone_constraints(graph)` always contains the lineality space, so it is never empty.
/// An edge `(p, i)` belongs to the closure iff the row comparing a neighbor of `p` with `i` is tight on the cone.
pub fn cone_of_graph(graph: &ActivationPattern, data: &Dataset) -> Result<FanCone> {
    graph.check_data(data)?;
    if graph.min_degree() == 0 {
        return Err(Error::Precondition("every data node needs degree at least 1".into()));
    }
    let n = graph.n_terms();
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let gauge = graph.mask(0).trailing_zeros() as usize;
    let frame = Frame::new(n, full, gauge, data.dim() + 1);
    let mut rows = Vec::new();
    let mut owner = Vec::new();
    for k in 0..data.len() {
        let q = data.lifted(k);
        let mask = graph.mask(k);
        let first = mask.trailing_zeros() as usize;
        for win in bits(mask) {
            for i in (0..n).filter(|&i| i != win) {
                rows.push(frame.row(q, win, i));
                owner.push((win == first).then_some((k, i)));
            }
        }
    }
    let (implied, _) = geometry::relative_interior(frame.width, &rows);
    let mut masks: Vec<u64> = graph.masks().to_vec();
    for r in &implied {
        if let Some((k, i)) = owner[*r] {
            masks[k] |= 1 << i;
        }
    }
    let pattern = ActivationPattern::from_masks(n, masks);
    let tight: Vec<Vec<BigInt>> = implied.iter().map(|&r| rows[r].clone()).collect();
    let dimension = n * (data.dim() + 1) - geometry::rank_int(&tight);
    let descriptor = closed_descriptor(&pattern, data, dimension)?;
    Ok(FanCone { pattern, descriptor })
}

fn closed_descriptor(pattern: &ActivationPattern, data: &Dataset, dimension: usize) -> Result<ConeDescriptor> {
    let system = cone_constraints(pattern, data)?;
    let n = pattern.n_terms();
    let mut implied = Vec::new();
    let mut r = 0;
    for k in 0..data.len() {
        let mask = pattern.mask(k);
        for win in bits(mask) {
            for lose in 0..n {
                if lose == win {
                    continue;
                }
                if mask >> lose & 1 == 1 {
                    implied.push(r);
                }
                r += 1;
            }
        }
    }
    Ok(ConeDescriptor { system, dimension, implied_equalities: implied })
}

/// All degrees one and strictly realizable.
pub fn is_maximal_pattern(pattern: &ActivationPattern, data: &Dataset) -> bool {
    pattern.num_points() == data.len()
        && pattern.is_deg_one()
        && matches!(realize(pattern, data), Ok(Some(_)))
}

/// `(d+1) + (N−1)(d − dim aff D)`.
pub fn lineality_dim(data: &Dataset, n_terms: usize) -> usize {
    (data.dim() + 1) + (n_terms - 1) * (data.dim() - data.affine_dim())
}

/// Vertex `Σ_k v_{i(k)}(p_k)` of the activation polytope dual to a maximal cone.
pub fn polytope_vertex_of(pattern: &ActivationPattern, data: &Dataset) -> Result<RationalVector> {
    if !is_maximal_pattern(pattern, data) {
        return Err(Error::Precondition(format!("pattern {pattern} is not maximal")));
    }
    let d1 = data.dim() + 1;
    let mut v = vec![Rational::zero(); pattern.n_terms() * d1];
    for (k, i) in pattern.labels().expect("degree one").into_iter().enumerate() {
        v[i * d1] += Rational::one();
        for (c, x) in data.point(k).iter().enumerate() {
            v[i * d1 + 1 + c] += x;
        }
    }
    Ok(v)
}

/// Classification cost attached to labels, used to prune enumeration by loss.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LossFilter {
    /// Desired sign at each point.
    pub target: Vec<Sign>,
    /// Terms `0..numerator` count as positive, the rest as negative.
    pub numerator: usize,
    pub min: usize,
    pub max: usize,
}

impl LossFilter {
    fn mistake(&self, k: usize, label: usize) -> bool {
        match self.target[k] {
            Sign::Positive => label >= self.numerator,
            Sign::Negative => label < self.numerator,
            Sign::Zero => false,
        }
    }
}

/// Backtracking enumerator of maximal activation patterns.
///
/// Terms within one block are interchangeable, so only patterns whose labels within each block first
/// appear in increasing order are searched; the rest are recovered by relabeling.
#[derive(Debug, Clone)]
pub struct Enumerator<'a> {
    data: &'a Dataset,
    n_terms: usize,
    blocks: Vec<Range<usize>>,
    cap: Option<usize>,
    loss: Option<LossFilter>,
}

struct Search<'s, 'a> {
    en: &'s Enumerator<'a>,
    labels: Vec<usize>,
    class_masks: Vec<u64>,
    block_used: Vec<usize>,
    mistakes: usize,
    separable: BTreeMap<(u64, u64), bool>,
    checks: usize,
    out: Vec<Vec<usize>>,
}

impl<'a> Enumerator<'a> {
    /// All `n_terms` terms interchangeable.
    pub fn new(data: &'a Dataset, n_terms: usize) -> Result<Enumerator<'a>> {
        ActivationPattern::check_terms(n_terms)?;
        Ok(Enumerator { data, n_terms, blocks: vec![0..n_terms], cap: None, loss: None })
    }

    /// Numerator terms `0..n` and denominator terms `n..n+m` as two interchangeable blocks.
    pub fn split(data: &'a Dataset, n: usize, m: usize) -> Result<Enumerator<'a>> {
        if n == 0 || m == 0 {
            return Err(Error::Precondition("numerator and denominator need at least one term each".into()));
        }
        ActivationPattern::check_terms(n + m)?;
        Ok(Enumerator { data, n_terms: n + m, blocks: vec![0..n, n..n + m], cap: None, loss: None })
    }

    /// Limit on the number of candidate checks per call.
    pub fn with_cap(mut self, cap: Option<usize>) -> Self {
        self.cap = cap;
        self
    }

    pub fn with_loss(mut self, filter: LossFilter) -> Result<Self> {
        if filter.target.len() != self.data.len() {
            return Err(Error::ShapeMismatch("target length differs from the number of points".into()));
        }
        self.loss = Some(filter);
        Ok(self)
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    fn block_of(&self, label: usize) -> usize {
        self.blocks.iter().position(|b| b.contains(&label)).expect("label in some block")
    }

    fn search(&self) -> Search<'_, 'a> {
        Search {
            en: self,
            labels: Vec::new(),
            class_masks: vec![0; self.n_terms],
            block_used: vec![0; self.blocks.len()],
            mistakes: 0,
            separable: BTreeMap::new(),
            checks: 0,
            out: Vec::new(),
        }
    }

    /// Canonical feasible label prefixes of length `depth`.
    pub fn frontier(&self, depth: usize) -> Result<Vec<Vec<usize>>> {
        let depth = depth.min(self.data.len());
        let mut s = self.search();
        s.run(depth)?;
        Ok(s.out)
    }

    /// Canonical maximal labelings extending `prefix`.
    pub fn complete_from(&self, prefix: &[usize]) -> Result<Vec<Vec<usize>>> {
        let mut s = self.search();
        for &l in prefix {
            if !s.push(l)? {
                return Ok(Vec::new());
            }
        }
        s.run(self.data.len())?;
        Ok(s.out)
    }

    /// Every relabeling of a canonical labeling within its blocks, as patterns.
    pub fn expand(&self, canonical: &[usize]) -> Vec<ActivationPattern> {
        // labels used per block, in first-occurrence order
        let mut used: Vec<Vec<usize>> = vec![Vec::new(); self.blocks.len()];
        for &l in canonical {
            let b = self.block_of(l);
            if !used[b].contains(&l) {
                used[b].push(l);
            }
        }
        let mut maps: Vec<Vec<usize>> = vec![(0..self.n_terms).collect()];
        for (b, block) in self.blocks.iter().enumerate() {
            let mut next = Vec::new();
            for base in &maps {
                for images in injections(used[b].len(), block.clone()) {
                    let mut map = base.clone();
                    for (src, img) in used[b].iter().zip(images) {
                        map[*src] = img;
                    }
                    next.push(map);
                }
            }
            maps = next;
        }
        maps.into_iter()
            .map(|map| {
                let labels: Vec<usize> = canonical.iter().map(|&l| map[l]).collect();
                ActivationPattern::from_masks(self.n_terms, labels.iter().map(|&l| 1u64 << l).collect())
            })
            .collect()
    }

    /// All maximal patterns, sorted canonically.
    pub fn run(&self) -> Result<Vec<ActivationPattern>> {
        let mut s = self.search();
        s.run(self.data.len())?;
        Ok(self.finish(s.out))
    }

    /// Expands and sorts canonical labelings.
    pub fn finish(&self, canonical: Vec<Vec<usize>>) -> Vec<ActivationPattern> {
        let mut all: Vec<ActivationPattern> = canonical.iter().flat_map(|c| self.expand(c)).collect();
        all.sort();
        all.dedup();
        all
    }
}

/// Ordered selections of `count` distinct elements of `range`.
fn injections(count: usize, range: Range<usize>) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..count {
        let mut next = Vec::new();
        for partial in &out {
            for x in range.clone() {
                if !partial.contains(&x) {
                    let mut p = partial.clone();
                    p.push(x);
                    next.push(p);
                }
            }
        }
        out = next;
    }
    out
}

impl Search<'_, '_> {
    fn candidate_labels(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (b, block) in self.en.blocks.iter().enumerate() {
            let u = self.block_used[b];
            let upto = (block.start + u + 1).min(block.end);
            out.extend(block.start..upto);
        }
        out
    }

    fn separable(&mut self, a: u64, b: u64) -> bool {
        let key = if a < b { (a, b) } else { (b, a) };
        if let Some(&v) = self.separable.get(&key) {
            return v;
        }
        let data = self.en.data;
        let mut strict = Vec::new();
        for k in bits(a) {
            strict.push(data.lifted(k).to_vec());
        }
        for k in bits(b) {
            strict.push(data.lifted(k).iter().map(|v| -v).collect());
        }
        let ok = geometry::strictly_feasible(data.dim() + 1, &[], &strict).is_some();
        self.separable.insert(key, ok);
        ok
    }

    fn feasible(&mut self) -> Result<bool> {
        self.checks += 1;
        if let Some(cap) = self.en.cap {
            if self.checks > cap {
                return Err(Error::CapExceeded { cap, what: "candidate" });
            }
        }
        let data = self.en.data;
        let n = self.en.n_terms;
        let used = self.class_masks.iter().enumerate().filter(|(_, m)| **m != 0).fold(0u64, |acc, (i, _)| acc | 1 << i);
        if used.count_ones() < 2 {
            return Ok(true);
        }
        let frame = Frame::new(n, used, self.labels[0], data.dim() + 1);
        let mut strict = Vec::new();
        for (k, &l) in self.labels.iter().enumerate() {
            for i in bits(used & !(1 << l)) {
                strict.push(frame.row(data.lifted(k), l, i));
            }
        }
        Ok(geometry::strictly_feasible(frame.width, &[], &strict).is_some())
    }

    /// Assigns the next point; returns false (and undoes) if the partial pattern is infeasible.
    fn push(&mut self, label: usize) -> Result<bool> {
        let k = self.labels.len();
        let mistake = self.en.loss.as_ref().is_some_and(|f| f.mistake(k, label));
        if let Some(f) = &self.en.loss {
            let mistakes = self.mistakes + mistake as usize;
            let remaining = self.en.data.len() - k - 1;
            if mistakes > f.max || mistakes + remaining < f.min {
                return Ok(false);
            }
        }
        let new_mask = self.class_masks[label] | 1 << k;
        for j in 0..self.en.n_terms {
            if j != label && self.class_masks[j] != 0 && !self.separable(new_mask, self.class_masks[j]) {
                return Ok(false);
            }
        }
        let b = self.en.block_of(label);
        let fresh = self.class_masks[label] == 0;
        self.labels.push(label);
        self.class_masks[label] = new_mask;
        if fresh {
            self.block_used[b] += 1;
        }
        self.mistakes += mistake as usize;
        if self.feasible()? {
            return Ok(true);
        }
        self.pop();
        Ok(false)
    }

    fn pop(&mut self) {
        let k = self.labels.len() - 1;
        let label = self.labels.pop().expect("nonempty");
        self.class_masks[label] &= !(1 << k);
        if self.class_masks[label] == 0 {
            let b = self.en.block_of(label);
            self.block_used[b] -= 1;
        }
        if self.en.loss.as_ref().is_some_and(|f| f.mistake(k, label)) {
            self.mistakes -= 1;
        }
    }

    fn run(&mut self, depth: usize) -> Result<()> {
        if self.labels.len() >= depth {
            self.out.push(self.labels.clone());
            return Ok(());
        }
        for label in self.candidate_labels() {
            if self.push(label)? {
                self.run(depth)?;
                self.pop();
            }
        }
        Ok(())
    }
}

/// Maximal patterns sharing a codimension-one wall with the maximal pattern `g`, restricted to `accept`.
///
/// Two maximal cones meet in a wall exactly when one moves every copy of a single data point from its term
/// to another term and the tied pattern in between is realizable, so only those candidates are tested.
pub fn wall_neighbors<F>(g: &ActivationPattern, data: &Dataset, mut accept: F) -> Result<Vec<ActivationPattern>>
where
    F: FnMut(&ActivationPattern) -> bool,
{
    g.check_data(data)?;
    let labels = g.labels().ok_or_else(|| Error::Precondition(format!("pattern {g} is not maximal")))?;
    let mut done = vec![false; data.len()];
    let mut out = Vec::new();
    for k in 0..data.len() {
        if done[k] {
            continue;
        }
        let copies: Vec<usize> = (k..data.len()).filter(|&j| data.point(j) == data.point(k)).collect();
        for &j in &copies {
            done[j] = true;
        }
        if copies.iter().any(|&j| labels[j] != labels[k]) {
            continue;
        }
        for target in (0..g.n_terms()).filter(|&t| t != labels[k]) {
            let mut moved = g.masks().to_vec();
            let mut tied = g.masks().to_vec();
            for &j in &copies {
                moved[j] = 1 << target;
                tied[j] |= 1 << target;
            }
            let h = ActivationPattern::from_masks(g.n_terms(), moved);
            if !accept(&h) {
                continue;
            }
            if realize(&ActivationPattern::from_masks(g.n_terms(), tied), data)?.is_some() {
                out.push(h);
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Intersection of two cones: its closed pattern and dimension.
pub fn intersection(g: &ActivationPattern, h: &ActivationPattern, data: &Dataset) -> Result<FanCone> {
    cone_of_graph(&g.union(h)?, data)
}

/// Maximal patterns for `n_terms` interchangeable terms, in canonical order.
pub fn enumerate_maximal_cones(data: &Dataset, n_terms: usize, cap: Option<usize>) -> Result<Vec<ActivationPattern>> {
    Enumerator::new(data, n_terms)?.with_cap(cap).run()
}

/// Every cone of the fan: the maximal cones closed under intersection, sorted by pattern.
pub fn enumerate_all_cones(data: &Dataset, n_terms: usize, cap: Option<usize>) -> Result<Vec<FanCone>> {
    let maximal = enumerate_maximal_cones(data, n_terms, cap)?;
    let mut cones: BTreeMap<ActivationPattern, FanCone> = BTreeMap::new();
    let full_dim = n_terms * (data.dim() + 1);
    for g in &maximal {
        let descriptor = closed_descriptor(g, data, full_dim)?;
        cones.insert(g.clone(), FanCone { pattern: g.clone(), descriptor });
    }
    let mut frontier: Vec<ActivationPattern> = maximal.clone();
    let mut seen_unions: BTreeSet<ActivationPattern> = BTreeSet::new();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for x in &frontier {
            for g in &maximal {
                let union = x.union(g)?;
                if cones.contains_key(&union) || !seen_unions.insert(union.clone()) {
                    continue;
                }
                let cone = cone_of_graph(&union, data)?;
                if !cones.contains_key(&cone.pattern) {
                    if let Some(cap) = cap {
                        if cones.len() >= cap {
                            return Err(Error::CapExceeded { cap, what: "cone" });
                        }
                    }
                    next.push(cone.pattern.clone());
                    cones.insert(cone.pattern.clone(), cone);
                }
            }
        }
        frontier = next;
    }
    Ok(cones.into_values().collect())
}
