//! Level sets and walls checked against direct loss evaluation and row-by-row LP oracles.

use std::collections::BTreeSet;

use proptest::prelude::*;

use tropfan_core::activation::{cone_constraints, enumerate_maximal_cones, realize, ActivationPattern, Dataset};
use tropfan_core::classification::{
    chamber_path, connected_components, count_dichotomies, covectors_linear, dichotomies, dichotomy_of, level_set,
    level_sizes, loss, loss_of, minimax_path, wall_adjacent, wall_graph, Covector, Dichotomy, Limits,
};
use tropfan_core::geometry::{implied_equalities_rowwise, rank};
use tropfan_core::{Sign, TropicalRational};

/// Dimension of the intersection of two closed maximal cones, via one slack LP per row.
fn intersection_dim(g: &ActivationPattern, h: &ActivationPattern, data: &Dataset) -> usize {
    let system = cone_constraints(&g.union(h).unwrap(), data).unwrap();
    let tight: Vec<_> = implied_equalities_rowwise(&system).unwrap().into_iter().map(|r| system.nonstrict[r].clone()).collect();
    system.ambient_dim - rank(&tight)
}

/// Loss of a maximal pattern, computed by evaluating a witness classifier at every point.
fn witnessed_loss(g: &ActivationPattern, data: &Dataset, target: &Dichotomy, n: usize, m: usize) -> usize {
    let flat = realize(g, data).unwrap().expect("maximal pattern");
    let f = TropicalRational::from_flat(&flat, n, m, data.dim()).unwrap();
    loss_of(&f, data, target).unwrap()
}

fn union_find_components(count: usize, edges: &[(usize, usize)]) -> BTreeSet<BTreeSet<usize>> {
    let mut label: Vec<usize> = (0..count).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for &(a, b) in edges {
            let low = label[a].min(label[b]);
            if label[a] != low || label[b] != low {
                label[a] = low;
                label[b] = low;
                changed = true;
            }
        }
    }
    let mut out = std::collections::BTreeMap::<usize, BTreeSet<usize>>::new();
    for (i, l) in label.into_iter().enumerate() {
        out.entry(l).or_default().insert(i);
    }
    out.into_values().collect()
}

fn cases() -> Vec<(Dataset, Dichotomy, usize, usize)> {
    vec![
        (Dataset::from_ints(&[&[1], &[2], &[3], &[4], &[5]]).unwrap(), Dichotomy::parse("+,-,+,-,+").unwrap(), 1, 1),
        (Dataset::from_ints(&[&[1], &[2], &[3], &[4]]).unwrap(), Dichotomy::parse("+,-,-,+").unwrap(), 1, 1),
        (Dataset::from_ints(&[&[0, 0], &[1, 1], &[2, 2], &[3, 3]]).unwrap(), Dichotomy::parse("+,-,-,+").unwrap(), 2, 2),
        (Dataset::from_ints(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]).unwrap(), Dichotomy::parse("+,-,-,+").unwrap(), 2, 1),
        (Dataset::from_ints(&[&[0, 0], &[2, 1], &[1, 3]]).unwrap(), Dichotomy::parse("-,+,-").unwrap(), 1, 2),
    ]
}

#[test]
fn level_sets_agree_with_witness_losses() {
    for (data, target, n, m) in cases() {
        let all = enumerate_maximal_cones(&data, n + m, None).unwrap();
        let mut expected = vec![BTreeSet::new(); data.len() + 1];
        for g in &all {
            let l = witnessed_loss(g, &data, &target, n, m);
            assert_eq!(loss(g, &target, n, m).unwrap(), l);
            expected[l].insert(g.clone());
        }
        let sizes = level_sizes(&data, n, m, &target, Limits::default()).unwrap();
        for (k, set) in expected.iter().enumerate() {
            let level = level_set(&data, n, m, &target, k, Limits::default()).unwrap();
            assert_eq!(level.patterns.iter().cloned().collect::<BTreeSet<_>>(), *set, "k = {k}");
            assert_eq!(sizes[k], set.len());
        }
    }
}

#[test]
fn walls_agree_with_rowwise_intersection_dimension() {
    for (data, target, n, m) in cases() {
        let full = (n + m) * (data.dim() + 1);
        for k in 0..=2 {
            let level = level_set(&data, n, m, &target, k, Limits::default()).unwrap();
            let p = &level.patterns;
            let mut oracle = Vec::new();
            for i in 0..p.len() {
                for j in i + 1..p.len() {
                    let dim = intersection_dim(&p[i], &p[j], &data);
                    assert_eq!(wall_adjacent(&p[i], &p[j], &data).unwrap(), (dim + 1 == full, dim));
                    if dim + 1 == full {
                        oracle.push((i, j));
                    }
                }
            }
            assert_eq!(wall_graph(p, &data).unwrap(), oracle);
            let found: BTreeSet<BTreeSet<usize>> =
                level.components.iter().map(|c| c.iter().copied().collect()).collect();
            assert_eq!(found, union_find_components(p.len(), &oracle));
            let again: BTreeSet<BTreeSet<usize>> =
                connected_components(p, &data).unwrap().into_iter().map(|c| c.into_iter().collect()).collect();
            assert_eq!(again, found);
        }
    }
}

#[test]
fn dichotomies_are_the_signs_of_maximal_cones() {
    for (data, _, n, m) in cases() {
        let oracle: BTreeSet<Dichotomy> = enumerate_maximal_cones(&data, n + m, None)
            .unwrap()
            .iter()
            .map(|g| dichotomy_of(g, n).unwrap())
            .collect();
        let found = dichotomies(&data, n, m, Limits::default()).unwrap();
        assert_eq!(found.iter().cloned().collect::<BTreeSet<_>>(), oracle);
        assert_eq!(count_dichotomies(&data, n, m, Limits::default()).unwrap(), oracle.len());
    }
}

#[test]
fn chamber_paths_cross_one_separating_wall_at_a_time() {
    let data = Dataset::from_ints(&[&[0, 0], &[2, 1], &[1, 3], &[-1, 2]]).unwrap();
    let chambers: Vec<Covector> = covectors_linear(&data).unwrap().into_iter().filter(Covector::is_maximal).collect();
    for start in &chambers {
        for goal in &chambers {
            let target = Dichotomy::new(goal.signs().to_vec()).unwrap();
            let path = chamber_path(start, &target, &data).unwrap();
            assert_eq!(path.first(), Some(start));
            assert_eq!(path.last(), Some(goal));
            assert_eq!(path.len(), start.separation(&target).len() + 1);
            for step in path.windows(2) {
                let (adjacent, _) = wall_adjacent(&step[0].to_pattern(), &step[1].to_pattern(), &data).unwrap();
                assert!(adjacent);
                assert_eq!(step[0].separation(&target).len(), step[1].separation(&target).len() + 1);
            }
        }
    }
}

#[test]
fn minimax_path_bound_is_tight() {
    let data = Dataset::from_ints(&[&[1], &[2], &[3], &[4]]).unwrap();
    let target = Dichotomy::parse("+,-,-,+").unwrap();
    let level1 = level_set(&data, 1, 1, &target, 1, Limits::default()).unwrap();
    let all = enumerate_maximal_cones(&data, 2, None).unwrap();
    let (a, b) = (&level1.patterns[0], &level1.patterns[1]);
    let (path, worst) = minimax_path(&data, 1, 1, &target, a, b, Limits::default()).unwrap().unwrap();
    assert_eq!(path.first(), Some(a));
    assert_eq!(path.last(), Some(b));
    assert_eq!(worst, path.iter().map(|g| loss(g, &target, 1, 1).unwrap()).max().unwrap());
    // no path stays within a smaller bound: the cones of loss < worst do not connect the endpoints
    let below: Vec<ActivationPattern> =
        all.into_iter().filter(|g| loss(g, &target, 1, 1).unwrap() < worst).collect();
    let comps = connected_components(&below, &data).unwrap();
    let ia = below.iter().position(|g| g == a).unwrap();
    let ib = below.iter().position(|g| g == b).unwrap();
    assert!(comps.iter().all(|c| !(c.contains(&ia) && c.contains(&ib))));
}

fn points_1d() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::btree_set(-6i64..=6, 2..=6).prop_map(|s| s.into_iter().collect())
}

fn signs(len: usize) -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn balanced_splits_have_mirrored_level_sizes(
        (xs, t) in points_1d().prop_flat_map(|xs| { let n = xs.len(); (Just(xs), signs(n)) }),
        terms in 1usize..=2,
    ) {
        let rows: Vec<Vec<i64>> = xs.iter().map(|&x| vec![x]).collect();
        let refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
        let data = Dataset::from_ints(&refs).unwrap();
        let target = Dichotomy::new(t.iter().map(|&b| if b { Sign::Positive } else { Sign::Negative }).collect()).unwrap();
        let sizes = level_sizes(&data, terms, terms, &target, Limits::default()).unwrap();
        let mut mirrored = sizes.clone();
        mirrored.reverse();
        prop_assert_eq!(&sizes, &mirrored);
        let negated = level_sizes(&data, terms, terms, &target.negated(), Limits::default()).unwrap();
        prop_assert_eq!(negated, mirrored);
        let total = enumerate_maximal_cones(&data, 2 * terms, None).unwrap().len();
        prop_assert_eq!(sizes.iter().sum::<usize>(), total);
    }
}
