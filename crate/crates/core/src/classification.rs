//! Binary classification by `g − h`: loss, level sets and their wall-connectivity.
//!
//! Terms `0..n` form the numerator and `n..n+m` the denominator.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::activation::{
    cone_of_graph, enumerate_all_cones, intersection, realize, wall_neighbors, ActivationPattern, Dataset,
    Enumerator, LossFilter,
};
use crate::error::{Error, Result};
use crate::rational::Sign;
use crate::tropical::TropicalRational;

fn parse_signs(text: &str) -> Result<Vec<Sign>> {
    let cleaned: String = text.chars().filter(|c| !c.is_whitespace() && !matches!(c, ',' | '(' | ')')).collect();
    cleaned.chars().map(Sign::from_symbol).collect()
}

fn write_signs(f: &mut fmt::Formatter<'_>, signs: &[Sign]) -> fmt::Result {
    for (k, s) in signs.iter().enumerate() {
        if k > 0 {
            f.write_str(",")?;
        }
        write!(f, "{s}")?;
    }
    Ok(())
}

/// A target labeling with no zero entries.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dichotomy(Vec<Sign>);

impl Dichotomy {
    pub fn new(signs: Vec<Sign>) -> Result<Dichotomy> {
        if signs.contains(&Sign::Zero) {
            return Err(Error::Precondition("a dichotomy has no zero entries".into()));
        }
        Ok(Dichotomy(signs))
    }

    /// Parses `+,-,-,+` (separators and whitespace optional).
    pub fn parse(text: &str) -> Result<Dichotomy> {
        Dichotomy::new(parse_signs(text)?)
    }

    pub fn signs(&self) -> &[Sign] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn positives(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&k| self.0[k] == Sign::Positive).collect()
    }

    pub fn negatives(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&k| self.0[k] == Sign::Negative).collect()
    }

    pub fn negated(&self) -> Dichotomy {
        Dichotomy(self.0.iter().map(|&s| -s).collect())
    }
}

impl fmt::Display for Dichotomy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_signs(f, &self.0)
    }
}

/// A sign vector over the data points, zeros allowed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Covector(pub Vec<Sign>);

impl Covector {
    pub fn parse(text: &str) -> Result<Covector> {
        parse_signs(text).map(Covector)
    }

    pub fn signs(&self) -> &[Sign] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_maximal(&self) -> bool {
        !self.0.contains(&Sign::Zero)
    }

    /// Indices where this covector disagrees with the target.
    pub fn separation(&self, target: &Dichotomy) -> Vec<usize> {
        (0..self.0.len()).filter(|&k| self.0[k] != target.signs()[k]).collect()
    }

    /// Reads a two-term pattern: term 1 is `+`, term 2 is `−`, both is `0`.
    pub fn from_pattern(pattern: &ActivationPattern) -> Result<Covector> {
        if pattern.n_terms() != 2 {
            return Err(Error::Precondition("covectors come from two-term patterns".into()));
        }
        Ok(Covector(
            pattern
                .masks()
                .iter()
                .map(|m| match m {
                    1 => Ok(Sign::Positive),
                    2 => Ok(Sign::Negative),
                    3 => Ok(Sign::Zero),
                    _ => Err(Error::Precondition("covector pattern has a degree-zero node".into())),
                })
                .collect::<Result<Vec<_>>>()?,
        ))
    }

    pub fn to_pattern(&self) -> ActivationPattern {
        let sets: Vec<Vec<usize>> = self
            .0
            .iter()
            .map(|s| match s {
                Sign::Positive => vec![0],
                Sign::Negative => vec![1],
                Sign::Zero => vec![0, 1],
            })
            .collect();
        ActivationPattern::from_sets(2, &sets).expect("two terms")
    }
}

impl fmt::Display for Covector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_signs(f, &self.0)
    }
}

fn check_split(pattern: &ActivationPattern, n: usize, m: usize) -> Result<()> {
    if pattern.n_terms() != n + m || n == 0 || m == 0 {
        return Err(Error::ShapeMismatch(format!("pattern has {} terms, split is {n}+{m}", pattern.n_terms())));
    }
    Ok(())
}

/// Misclassified points of a pattern; mixed neighborhoods count as correct.
pub fn loss(pattern: &ActivationPattern, target: &Dichotomy, n: usize, m: usize) -> Result<usize> {
    check_split(pattern, n, m)?;
    if pattern.num_points() != target.len() {
        return Err(Error::ShapeMismatch("target length differs from the number of points".into()));
    }
    let numerator = (1u64 << n) - 1;
    Ok((0..target.len())
        .filter(|&k| {
            let mask = pattern.mask(k);
            match target.signs()[k] {
                Sign::Positive => mask & numerator == 0,
                _ => mask & !numerator == 0,
            }
        })
        .count())
}

/// Misclassified points of a concrete classifier.
pub fn loss_of(f: &TropicalRational, data: &Dataset, target: &Dichotomy) -> Result<usize> {
    if data.len() != target.len() {
        return Err(Error::ShapeMismatch("target length differs from the number of points".into()));
    }
    let mut count = 0;
    for (p, &t) in data.points().iter().zip(target.signs()) {
        if f.classify(p)? == -t {
            count += 1;
        }
    }
    Ok(count)
}

/// The dichotomy induced by a maximal pattern.
pub fn dichotomy_of(pattern: &ActivationPattern, n: usize) -> Result<Dichotomy> {
    let labels = pattern.labels().ok_or_else(|| Error::Precondition(format!("pattern {pattern} is not maximal")))?;
    Ok(Dichotomy(labels.into_iter().map(|l| if l < n { Sign::Positive } else { Sign::Negative }).collect()))
}

/// Maximal cones of one loss value together with their wall graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSetReport {
    pub k: usize,
    pub patterns: Vec<ActivationPattern>,
    /// Indices into `patterns`; each component sorted, components ordered by their first member.
    pub components: Vec<Vec<usize>>,
    /// `(i, j, dim)` with `i < j`: walls between patterns and the dimension of their intersection.
    pub adjacency: Vec<(usize, usize, usize)>,
}

impl LevelSetReport {
    pub fn count(&self) -> usize {
        self.patterns.len()
    }

    pub fn component_sizes(&self) -> Vec<usize> {
        self.components.iter().map(Vec::len).collect()
    }

    /// Index of the component holding `pattern`.
    pub fn component_of(&self, pattern: &ActivationPattern) -> Option<usize> {
        let idx = self.patterns.binary_search(pattern).ok()?;
        self.components.iter().position(|c| c.contains(&idx))
    }
}

/// Options shared by level-set queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Limits {
    /// Maximum number of candidate checks during enumeration.
    pub cap: Option<usize>,
}

/// Maximal patterns with loss in `min..=max`, sorted.
pub fn maximal_with_loss(
    data: &Dataset,
    n: usize,
    m: usize,
    target: &Dichotomy,
    min: usize,
    max: usize,
    limits: Limits,
) -> Result<Vec<ActivationPattern>> {
    let filter = LossFilter { target: target.signs().to_vec(), numerator: n, min, max };
    Enumerator::split(data, n, m)?.with_cap(limits.cap).with_loss(filter)?.run()
}

pub fn level_set(data: &Dataset, n: usize, m: usize, target: &Dichotomy, k: usize, limits: Limits) -> Result<LevelSetReport> {
    if k > data.len() {
        return Ok(LevelSetReport { k, patterns: Vec::new(), components: Vec::new(), adjacency: Vec::new() });
    }
    let patterns = maximal_with_loss(data, n, m, target, k, k, limits)?;
    report(k, patterns, data, n, m)
}

/// Builds a report for a sorted list of maximal patterns.
pub fn report(k: usize, patterns: Vec<ActivationPattern>, data: &Dataset, n: usize, m: usize) -> Result<LevelSetReport> {
    let wall_dim = (n + m) * (data.dim() + 1) - 1;
    let edges = wall_graph(&patterns, data)?;
    let adjacency = edges.iter().map(|&(i, j)| (i, j, wall_dim)).collect();
    let components = components_from_edges(patterns.len(), &edges);
    Ok(LevelSetReport { k, patterns, components, adjacency })
}

/// Perfect fan: maximal cones classifying every point correctly.
pub fn perfect_fan(data: &Dataset, n: usize, m: usize, target: &Dichotomy, limits: Limits) -> Result<LevelSetReport> {
    level_set(data, n, m, target, 0, limits)
}

/// Faces of the perfect maximal cones, as closed patterns, sorted. Requires the full fan, so keep instances small.
pub fn perfect_fan_faces(
    data: &Dataset,
    n: usize,
    m: usize,
    target: &Dichotomy,
    limits: Limits,
) -> Result<Vec<ActivationPattern>> {
    let perfect = perfect_fan(data, n, m, target, limits)?.patterns;
    let all = Enumerator::split(data, n, m)?.with_cap(limits.cap).run()?;
    let mut faces: BTreeSet<ActivationPattern> = perfect.iter().cloned().collect();
    let mut frontier = perfect;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for x in &frontier {
            for g in &all {
                let face = cone_of_graph(&x.union(g)?, data)?.pattern;
                if faces.insert(face.clone()) {
                    next.push(face);
                }
            }
        }
        frontier = next;
    }
    Ok(faces.into_iter().collect())
}

/// Pairs `(i, j)`, `i < j`, of patterns in the sorted list that share a wall.
pub fn wall_graph(patterns: &[ActivationPattern], data: &Dataset) -> Result<Vec<(usize, usize)>> {
    let index: BTreeMap<&ActivationPattern, usize> = patterns.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut edges = Vec::new();
    for (i, g) in patterns.iter().enumerate() {
        // each wall is found from both sides; keep it once
        let neighbors = wall_neighbors(g, data, |h| index.get(h).is_some_and(|&j| j > i))?;
        for h in neighbors {
            edges.push((i, index[&h]));
        }
    }
    edges.sort();
    Ok(edges)
}

fn components_from_edges(count: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..count).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..count {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Whether two maximal cones meet in a wall, and the dimension of their intersection.
pub fn wall_adjacent(g: &ActivationPattern, h: &ActivationPattern, data: &Dataset) -> Result<(bool, usize)> {
    let ambient = g.n_terms() * (data.dim() + 1);
    let dim = intersection(g, h, data)?.dimension();
    Ok((dim + 1 == ambient, dim))
}

/// Classes of the transitive closure of wall adjacency, as indices into `patterns` (which need not be sorted).
pub fn connected_components(patterns: &[ActivationPattern], data: &Dataset) -> Result<Vec<Vec<usize>>> {
    let mut order: Vec<usize> = (0..patterns.len()).collect();
    order.sort_by(|&a, &b| patterns[a].cmp(&patterns[b]));
    let sorted: Vec<ActivationPattern> = order.iter().map(|&i| patterns[i].clone()).collect();
    let edges = wall_graph(&sorted, data)?;
    let mut comps: Vec<Vec<usize>> = components_from_edges(sorted.len(), &edges)
        .into_iter()
        .map(|c| {
            let mut c: Vec<usize> = c.into_iter().map(|i| order[i]).collect();
            c.sort();
            c
        })
        .collect();
    comps.sort();
    Ok(comps)
}

/// Number of maximal cones at every loss value `0..=M`.
pub fn level_sizes(data: &Dataset, n: usize, m: usize, target: &Dichotomy, limits: Limits) -> Result<Vec<usize>> {
    let en = Enumerator::split(data, n, m)?.with_cap(limits.cap);
    let canonical = en.complete_from(&[])?;
    let mut sizes = vec![0usize; data.len() + 1];
    for c in canonical {
        // relabeling within blocks keeps the loss, so weight by orbit size
        let orbit = en.expand(&c);
        let l = loss(&orbit[0], target, n, m)?;
        sizes[l] += orbit.len();
    }
    Ok(sizes)
}

/// Distinct dichotomies induced by maximal cones of the `(n, m)` classification fan.
pub fn count_dichotomies(data: &Dataset, n: usize, m: usize, limits: Limits) -> Result<usize> {
    Ok(dichotomies(data, n, m, limits)?.len())
}

pub fn dichotomies(data: &Dataset, n: usize, m: usize, limits: Limits) -> Result<Vec<Dichotomy>> {
    let en = Enumerator::split(data, n, m)?.with_cap(limits.cap);
    // canonical relabeling stays inside each block, so the sign pattern is already determined
    let set: BTreeSet<Dichotomy> = en
        .complete_from(&[])?
        .into_iter()
        .map(|c| Dichotomy(c.into_iter().map(|l| if l < n { Sign::Positive } else { Sign::Negative }).collect()))
        .collect();
    Ok(set.into_iter().collect())
}

/// Covectors of every cone of the two-term fan, sorted.
pub fn covectors_linear(data: &Dataset) -> Result<Vec<Covector>> {
    let mut out = enumerate_all_cones(data, 2, None)?
        .iter()
        .map(|c| Covector::from_pattern(&c.pattern))
        .collect::<Result<Vec<_>>>()?;
    out.sort();
    Ok(out)
}

/// Greedy walk through walls from a maximal covector to the target chamber, shrinking the separation set.
pub fn chamber_path(start: &Covector, target: &Dichotomy, data: &Dataset) -> Result<Vec<Covector>> {
    if start.len() != data.len() || target.len() != data.len() {
        return Err(Error::ShapeMismatch("covector length differs from the number of points".into()));
    }
    let goal = Covector(target.signs().to_vec());
    if realize(&goal.to_pattern(), data)?.is_none() {
        return Err(Error::Precondition(format!("target {target} is not realized by a chamber")));
    }
    if !start.is_maximal() || realize(&start.to_pattern(), data)?.is_none() {
        return Err(Error::Precondition(format!("start {start} is not a chamber")));
    }
    let mut path = vec![start.clone()];
    let mut current = start.clone();
    while current != goal {
        let separation = current.separation(target);
        let g = current.to_pattern();
        let moves = wall_neighbors(&g, data, |h| {
            let c = Covector::from_pattern(h).expect("two terms");
            c.separation(target).len() < separation.len()
                && c.separation(target).iter().all(|k| separation.contains(k))
        })?;
        let next = moves
            .into_iter()
            .next()
            .ok_or_else(|| Error::Precondition("no separating wall found; data and target disagree".into()))?;
        current = Covector::from_pattern(&next)?;
        path.push(current.clone());
    }
    Ok(path)
}

/// Among all wall paths between two maximal patterns of the `(n, m)` fan, one that minimizes the largest
/// loss along the way and, subject to that, the number of steps. Returns the path and its largest loss.
pub fn minimax_path(
    data: &Dataset,
    n: usize,
    m: usize,
    target: &Dichotomy,
    from: &ActivationPattern,
    to: &ActivationPattern,
    limits: Limits,
) -> Result<Option<(Vec<ActivationPattern>, usize)>> {
    let all = Enumerator::split(data, n, m)?.with_cap(limits.cap).run()?;
    let index: BTreeMap<&ActivationPattern, usize> = all.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let (Some(&s), Some(&t)) = (index.get(from), index.get(to)) else {
        return Err(Error::Precondition("endpoints must be maximal patterns".into()));
    };
    let losses = all.iter().map(|p| loss(p, target, n, m)).collect::<Result<Vec<_>>>()?;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); all.len()];
    for (i, j) in wall_graph(&all, data)? {
        adj[i].push(j);
        adj[j].push(i);
    }
    let mut levels: Vec<usize> = losses.clone();
    levels.sort();
    levels.dedup();
    for bound in levels {
        if losses[s] > bound || losses[t] > bound {
            continue;
        }
        // breadth-first search through cones within the bound
        let mut prev = vec![usize::MAX; all.len()];
        prev[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            if x == t {
                break;
            }
            for &y in &adj[x] {
                if prev[y] == usize::MAX && losses[y] <= bound {
                    prev[y] = x;
                    queue.push_back(y);
                }
            }
        }
        if prev[t] != usize::MAX {
            let mut path = vec![t];
            while *path.last().expect("nonempty") != s {
                path.push(prev[*path.last().expect("nonempty")]);
            }
            path.reverse();
            return Ok(Some((path.into_iter().map(|i| all[i].clone()).collect(), bound)));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ints;

    fn line(points: &[i64]) -> Dataset {
        Dataset::new(points.iter().map(|&p| ints(&[p])).collect()).unwrap()
    }

    fn cov(s: &str) -> Covector {
        Covector::parse(s).unwrap()
    }

    #[test]
    fn loss_examples() {
        let target = Dichotomy::parse("+,-,-,+,+").unwrap();
        assert_eq!(loss(&cov("-,-,-,+,+").to_pattern(), &target, 1, 1).unwrap(), 1);
        assert_eq!(loss(&cov("+,+,+,+,+").to_pattern(), &target, 1, 1).unwrap(), 2);
        assert_eq!(loss(&cov("0,+,0,-,-").to_pattern(), &target, 1, 1).unwrap(), 3);
        assert!(Dichotomy::parse("+,0").is_err());
        assert_eq!(Dichotomy::parse("(+, −, +)").unwrap().to_string(), "+,-,+");
    }

    #[test]
    fn covector_examples() {
        assert_eq!(covectors_linear(&line(&[3])).unwrap(), vec![cov("-"), cov("0"), cov("+")]);
        assert_eq!(covectors_linear(&line(&[1, 2])).unwrap().len(), 9);
        let five = covectors_linear(&line(&[1, 2, 3, 4, 5])).unwrap();
        let chambers: Vec<&Covector> = five.iter().filter(|c| c.is_maximal()).collect();
        assert_eq!(chambers.len(), 10);
        for c in chambers {
            // a single sign change along the line
            let flips = c.signs().windows(2).filter(|w| w[0] != w[1]).count();
            assert!(flips <= 1);
        }
    }

    #[test]
    fn path_examples() {
        let data = line(&[1, 2, 3, 4, 5]);
        let target = Dichotomy::parse("+,+,+,+,+").unwrap();
        let path = chamber_path(&cov("-,-,-,-,-"), &target, &data).unwrap();
        let seps: Vec<usize> = path.iter().map(|c| c.separation(&target).len()).collect();
        assert_eq!(seps, vec![5, 4, 3, 2, 1, 0]);
        let same = chamber_path(&cov("+,+,+,+,+"), &target, &data).unwrap();
        assert_eq!(same.len(), 1);
        assert!(chamber_path(&cov("+,+,+,+,+"), &Dichotomy::parse("+,-,+,-,+").unwrap(), &data).is_err());
    }

    #[test]
    fn perfect_fan_examples() {
        let one = Dataset::from_ints(&[&[0, 0]]).unwrap();
        let r = perfect_fan(&one, 1, 1, &Dichotomy::parse("+").unwrap(), Limits::default()).unwrap();
        assert_eq!(r.patterns, vec![ActivationPattern::from_labels(2, &[0]).unwrap()]);
        let three = line(&[1, 2, 3]);
        let r = perfect_fan(&three, 1, 1, &Dichotomy::parse("+,-,+").unwrap(), Limits::default()).unwrap();
        assert_eq!(r.count(), 0);
        assert_eq!(level_set(&three, 1, 1, &Dichotomy::parse("+,-,+").unwrap(), 4, Limits::default()).unwrap().count(), 0);
    }

    #[test]
    fn dichotomy_counts() {
        assert_eq!(count_dichotomies(&line(&[1, 2, 3, 4, 5]), 1, 1, Limits::default()).unwrap(), 10);
        assert_eq!(count_dichotomies(&line(&[0]), 1, 1, Limits::default()).unwrap(), 2);
    }

    #[test]
    fn wall_filter_matches_pairwise_dimensions() {
        let data = Dataset::from_ints(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1], &[0, 0]]).unwrap();
        let all = Enumerator::split(&data, 2, 1).unwrap().run().unwrap();
        let fast: BTreeSet<(usize, usize)> = wall_graph(&all, &data).unwrap().into_iter().collect();
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                let (adjacent, _) = wall_adjacent(&all[i], &all[j], &data).unwrap();
                assert_eq!(adjacent, fast.contains(&(i, j)), "{} {}", all[i], all[j]);
            }
        }
        let (adjacent, dim) = wall_adjacent(&all[0], &all[0], &data).unwrap();
        assert!(!adjacent);
        assert_eq!(dim, 9);
    }
}
