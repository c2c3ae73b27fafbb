//! Axiom checks for sign-vector covectors and for sets of activation patterns.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::activation::{bits, ActivationPattern};
use crate::classification::Covector;
use crate::error::{Error, Result};
use crate::rational::Sign;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Not applicable to the given input (e.g. boundary patterns in a set of maximal patterns).
    Skipped,
}

/// A counterexample that can be checked again against the same set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// A covector that should be present but is not.
    MissingCovector(Covector),
    CovectorComposition { first: Covector, second: Covector },
    CovectorElimination { first: Covector, second: Covector, index: usize },
    /// A pattern that should be present but is not.
    MissingPattern(ActivationPattern),
    Relabeling { pattern: ActivationPattern, perm: Vec<usize> },
    PatternComposition { first: ActivationPattern, second: ActivationPattern },
    PatternElimination { first: ActivationPattern, second: ActivationPattern, point: usize },
    Comparability { first: ActivationPattern, second: ActivationPattern, point: usize },
}

impl Witness {
    /// True if the violation still shows up in `covectors`.
    pub fn reproduces_in_covectors(&self, covectors: &[Covector]) -> bool {
        let set: BTreeSet<&Covector> = covectors.iter().collect();
        match self {
            Witness::MissingCovector(c) => !set.contains(c),
            Witness::CovectorComposition { first, second } => {
                set.contains(first) && set.contains(second) && !set.contains(&compose_covectors(first, second))
            }
            Witness::CovectorElimination { first, second, index } => {
                set.contains(first) && set.contains(second) && find_eliminator(&set, first, second, *index).is_none()
            }
            _ => false,
        }
    }

    /// True if the violation still shows up in `patterns`.
    pub fn reproduces_in_patterns(&self, patterns: &[ActivationPattern]) -> bool {
        let set: BTreeSet<&ActivationPattern> = patterns.iter().collect();
        match self {
            Witness::MissingPattern(p) => !set.contains(p),
            Witness::Relabeling { pattern, perm } => set.contains(pattern) && !set.contains(&pattern.permuted(perm)),
            Witness::PatternComposition { first, second } => {
                set.contains(first)
                    && set.contains(second)
                    && pattern_compose(first, second).map_or(false, |c| !set.contains(&c))
            }
            Witness::PatternElimination { first, second, point } => {
                let want = first.mask(*point) | second.mask(*point);
                set.contains(first) && set.contains(second) && !patterns.iter().any(|f| f.mask(*point) == want)
            }
            Witness::Comparability { first, second, point } => {
                set.contains(first)
                    && set.contains(second)
                    && comparability_graph(first, second, *point).map_or(false, |g| !g.is_acyclic())
            }
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomCheck {
    pub axiom: &'static str,
    pub name: &'static str,
    pub status: Status,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AxiomReport {
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    fn push(&mut self, axiom: &'static str, name: &'static str, witness: Option<Witness>) {
        let status = if witness.is_some() { Status::Fail } else { Status::Pass };
        self.checks.push(AxiomCheck { axiom, name, status, witness });
    }

    fn skip(&mut self, axiom: &'static str, name: &'static str) {
        self.checks.push(AxiomCheck { axiom, name, status: Status::Skipped, witness: None });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn get(&self, axiom: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.axiom == axiom)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| c.status == Status::Fail).map(|c| c.axiom).collect()
    }
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let s = match c.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Skipped => "skipped",
            };
            writeln!(f, "{:<5} {:<14} {s}", c.axiom, c.name)?;
        }
        Ok(())
    }
}

pub fn compose_covectors(c: &Covector, d: &Covector) -> Covector {
    Covector(c.0.iter().zip(&d.0).map(|(&a, &b)| if a != Sign::Zero { a } else { b }).collect())
}

fn find_eliminator<'a>(set: &BTreeSet<&'a Covector>, c: &Covector, d: &Covector, index: usize) -> Option<&'a Covector> {
    let composed = compose_covectors(c, d);
    let separated: Vec<bool> = c.0.iter().zip(&d.0).map(|(&a, &b)| a != Sign::Zero && a == -b).collect();
    set.iter().copied().find(|z| {
        z.0[index] == Sign::Zero && (0..z.len()).all(|j| separated[j] || z.0[j] == composed.0[j])
    })
}

/// Checks zero, symmetry, composition and elimination. Covectors are assumed to share one length.
pub fn om_axioms_check(covectors: &[Covector]) -> AxiomReport {
    let set: BTreeSet<&Covector> = covectors.iter().collect();
    let len = covectors.first().map_or(0, Covector::len);
    let mut report = AxiomReport::default();

    let zero = Covector(vec![Sign::Zero; len]);
    report.push("C I", "zero", (!set.contains(&zero)).then_some(Witness::MissingCovector(zero)));

    let negation = set.iter().map(|c| Covector(c.0.iter().map(|&s| -s).collect())).find(|n| !set.contains(n));
    report.push("C II", "symmetry", negation.map(Witness::MissingCovector));

    let mut composition = None;
    'outer: for c in &set {
        for d in &set {
            if !set.contains(&compose_covectors(c, d)) {
                composition = Some(Witness::CovectorComposition { first: (*c).clone(), second: (*d).clone() });
                break 'outer;
            }
        }
    }
    report.push("C III", "composition", composition);

    let mut elimination = None;
    'elim: for c in &set {
        for d in &set {
            for i in 0..c.len() {
                if c.0[i] != Sign::Zero && c.0[i] == -d.0[i] && find_eliminator(&set, c, d, i).is_none() {
                    elimination =
                        Some(Witness::CovectorElimination { first: (*c).clone(), second: (*d).clone(), index: i });
                    break 'elim;
                }
            }
        }
    }
    report.push("C IV", "elimination", elimination);
    report
}

/// At each point, the intersection of the neighbor sets if nonempty, else the neighbors in `g`.
pub fn pattern_compose(g: &ActivationPattern, h: &ActivationPattern) -> Result<ActivationPattern> {
    if g.n_terms() != h.n_terms() || g.num_points() != h.num_points() {
        return Err(Error::ShapeMismatch("patterns over different node sets".into()));
    }
    let masks = g
        .masks()
        .iter()
        .zip(h.masks())
        .map(|(&a, &b)| if a & b == 0 { a } else { a & b })
        .collect();
    Ok(ActivationPattern::from_masks(g.n_terms(), masks))
}

/// Mixed graph on the terms of two patterns at one point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparabilityGraph {
    pub nodes: usize,
    pub directed: Vec<(usize, usize)>,
    pub undirected: Vec<(usize, usize)>,
}

impl ComparabilityGraph {
    /// Contracts undirected edges, then looks for a directed cycle. An arc inside a contracted class is a cycle.
    pub fn is_acyclic(&self) -> bool {
        let mut parent: Vec<usize> = (0..self.nodes).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(a, b) in &self.undirected {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
        let mut out: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        let mut indegree = vec![0usize; self.nodes];
        for &(a, b) in &self.directed {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                return false;
            }
            if out.entry(ra).or_default().insert(rb) {
                indegree[rb] += 1;
            }
        }
        let classes: Vec<usize> = (0..self.nodes).filter(|&x| find(&mut parent, x) == x).collect();
        let mut queue: Vec<usize> = classes.iter().copied().filter(|&x| indegree[x] == 0).collect();
        let mut seen = 0;
        while let Some(x) = queue.pop() {
            seen += 1;
            if let Some(next) = out.get(&x) {
                for &y in next {
                    indegree[y] -= 1;
                    if indegree[y] == 0 {
                        queue.push(y);
                    }
                }
            }
        }
        seen == classes.len()
    }
}

fn comparability_from_masks(nodes: usize, a: u64, b: u64) -> ComparabilityGraph {
    let both = a & b;
    let mut directed = Vec::new();
    let mut undirected = Vec::new();
    for j in bits(a) {
        for k in bits(b) {
            if both >> j & 1 == 1 && both >> k & 1 == 1 {
                if j < k {
                    undirected.push((j, k));
                }
            } else {
                directed.push((j, k));
            }
        }
    }
    ComparabilityGraph { nodes, directed, undirected }
}

pub fn comparability_graph(g: &ActivationPattern, h: &ActivationPattern, point: usize) -> Result<ComparabilityGraph> {
    if g.n_terms() != h.n_terms() || g.num_points() != h.num_points() {
        return Err(Error::ShapeMismatch("patterns over different node sets".into()));
    }
    if point >= g.num_points() {
        return Err(Error::ShapeMismatch("point index out of range".into()));
    }
    Ok(comparability_from_masks(g.n_terms(), g.mask(point), h.mask(point)))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    fn heap(k: usize, perm: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(perm.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, perm, out);
            let j = if k % 2 == 0 { i } else { 0 };
            perm.swap(j, k - 1);
        }
    }
    heap(n, &mut perm, &mut out);
    out
}

/// Permutations whose closure is tested: all of them for up to five terms, otherwise
/// a transposition and a full cycle, which generate the symmetric group.
fn relabelings(n: usize) -> Vec<Vec<usize>> {
    if n <= 5 {
        return permutations(n);
    }
    let mut swap: Vec<usize> = (0..n).collect();
    swap.swap(0, 1);
    let cycle: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    vec![swap, cycle]
}

/// Above this many terms the boundary property (one pattern per nonempty term subset) is skipped.
pub const MAX_BOUNDARY_TERMS: usize = 20;

/// Checks the six closure properties of fan patterns. With `maximal_only`, the properties that
/// need lower-dimensional cones (complete graph, elimination, boundary) are skipped.
pub fn pattern_axioms_check(patterns: &[ActivationPattern], maximal_only: bool) -> Result<AxiomReport> {
    let mut report = AxiomReport::default();
    let Some(first) = patterns.first() else {
        return Err(Error::Precondition("empty pattern set".into()));
    };
    let (n_terms, num_points) = (first.n_terms(), first.num_points());
    if patterns.iter().any(|p| p.n_terms() != n_terms || p.num_points() != num_points) {
        return Err(Error::ShapeMismatch("patterns over different node sets".into()));
    }
    let set: BTreeSet<&ActivationPattern> = patterns.iter().collect();
    // distinct neighbor masks at each point, with one pattern realizing each
    let mut at_point: Vec<BTreeMap<u64, &ActivationPattern>> = vec![BTreeMap::new(); num_points];
    for p in patterns {
        for (k, slot) in at_point.iter_mut().enumerate() {
            slot.entry(p.mask(k)).or_insert(p);
        }
    }

    if maximal_only {
        report.skip("A I", "complete graph");
    } else {
        let complete = ActivationPattern::complete(n_terms, num_points);
        report.push("A I", "complete graph", (!set.contains(&complete)).then_some(Witness::MissingPattern(complete)));
    }

    let mut relabel = None;
    'perm: for perm in relabelings(n_terms) {
        for p in &set {
            if !set.contains(&p.permuted(&perm)) {
                relabel = Some(Witness::Relabeling { pattern: (*p).clone(), perm });
                break 'perm;
            }
        }
    }
    report.push("A II", "symmetry", relabel);

    let mut composition = None;
    'comp: for g in &set {
        for h in &set {
            if !set.contains(&pattern_compose(g, h)?) {
                composition = Some(Witness::PatternComposition { first: (*g).clone(), second: (*h).clone() });
                break 'comp;
            }
        }
    }
    report.push("A III", "composition", composition);

    if maximal_only {
        report.skip("A IV", "elimination");
    } else {
        let mut elimination = None;
        'elim: for (k, masks) in at_point.iter().enumerate() {
            for (&a, g) in masks {
                for (&b, h) in masks {
                    if !masks.contains_key(&(a | b)) {
                        elimination =
                            Some(Witness::PatternElimination { first: (*g).clone(), second: (*h).clone(), point: k });
                        break 'elim;
                    }
                }
            }
        }
        report.push("A IV", "elimination", elimination);
    }

    if maximal_only || n_terms > MAX_BOUNDARY_TERMS {
        report.skip("A V", "boundary");
    } else {
        let full = (1u64 << n_terms) - 1;
        let missing = (1..=full)
            .map(|s| ActivationPattern::from_masks(n_terms, vec![s; num_points]))
            .find(|p| !set.contains(p));
        report.push("A V", "boundary", missing.map(Witness::MissingPattern));
    }

    let mut cycle = None;
    'cg: for (k, masks) in at_point.iter().enumerate() {
        for (&a, g) in masks {
            for (&b, h) in masks {
                if !comparability_from_masks(n_terms, a, b).is_acyclic() {
                    cycle = Some(Witness::Comparability { first: (*g).clone(), second: (*h).clone(), point: k });
                    break 'cg;
                }
            }
        }
    }
    report.push("A VI", "comparability", cycle);
    Ok(report)
}
