//! Engine results against brute-force recomputation written independently here.

use std::sync::Arc;

use coarse_core::coarse_space::{
    are_close, entourage_section, is_bounded, quotient, validate_coarse_map, Entourage, Geometry, PointMap, PointSet,
    Structure, TruncatedCoarseSpace,
};
use coarse_core::coarsening::{maximal_sparse_net, CoarseningFamily, Schedule};
use coarse_core::homology::{homology, ChainComplex, HomologyMode};
use coarse_core::nerve::{nerve_of_sets, SimplicialComplex};
use coarse_core::F2;
use proptest::prelude::*;

fn interval(values: &[i64], frontier: &[usize], cap: f64) -> Arc<TruncatedCoarseSpace> {
    Arc::new(
        TruncatedCoarseSpace::new(
            values.iter().map(|v| v.to_string()).collect(),
            Geometry::Euclidean { coords: values.iter().map(|&v| vec![v as f64]).collect() },
            Structure::Bounded,
            frontier.iter().copied().collect(),
            cap,
        )
        .unwrap(),
    )
}

fn range(lo: i64, hi: i64, cap: f64) -> Arc<TruncatedCoarseSpace> {
    let values: Vec<i64> = (lo..=hi).collect();
    interval(&values, &[values.len() - 1], cap)
}

fn combinations(items: &[u32], k: usize) -> Vec<Vec<u32>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        for mut rest in combinations(&items[i + 1..], k - 1) {
            rest.insert(0, x);
            out.push(rest);
        }
    }
    out
}

/// All faces of the generators up to dimension `cap`, sorted per dimension.
fn closure(gens: &[Vec<u32>], cap: usize) -> Vec<Vec<Vec<u32>>> {
    let mut by_dim = vec![Vec::new(); cap + 1];
    for g in gens {
        for k in 1..=g.len().min(cap + 1) {
            by_dim[k - 1].extend(combinations(g, k));
        }
    }
    for d in &mut by_dim {
        d.sort();
        d.dedup();
    }
    by_dim
}

/// Rank over the two-element field of rows given as bit masks.
fn rank_mod2(mut rows: Vec<u128>) -> usize {
    let mut rank = 0;
    for bit in 0..128 {
        let Some(p) = (rank..rows.len()).find(|&i| rows[i] >> bit & 1 == 1) else { continue };
        rows.swap(rank, p);
        let pivot = rows[rank];
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank && *row >> bit & 1 == 1 {
                *row ^= pivot;
            }
        }
        rank += 1;
    }
    rank
}

/// Betti numbers mod 2 of `K` relative to the simplices satisfying `in_lower`.
fn betti_mod2(faces: &[Vec<Vec<u32>>], in_lower: impl Fn(&[u32]) -> bool, p: usize) -> usize {
    let cells: Vec<Vec<&Vec<u32>>> = faces.iter().map(|d| d.iter().filter(|s| !in_lower(s)).collect()).collect();
    let boundary_rank = |d: usize| -> usize {
        if d == 0 || d >= cells.len() {
            return 0;
        }
        let rows = cells[d]
            .iter()
            .map(|s| {
                (0..s.len()).fold(0u128, |mask, skip| {
                    let face: Vec<u32> = s.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
                    match cells[d - 1].iter().position(|f| **f == face) {
                        Some(j) => mask | 1 << j,
                        None => mask,
                    }
                })
            })
            .collect();
        rank_mod2(rows)
    };
    cells[p].len() - boundary_rank(p) - boundary_rank(p + 1)
}

fn generators() -> impl Strategy<Value = (usize, Vec<Vec<u32>>)> {
    (3usize..=6).prop_flat_map(|n| {
        let simplex = proptest::collection::btree_set(0..n as u32, 1..=4).prop_map(|s| s.into_iter().collect::<Vec<_>>());
        (Just(n), proptest::collection::vec(simplex, 1..=6))
    })
}

#[test]
fn greedy_net_on_a_short_interval() {
    let s = range(0, 8, 4.0);
    assert_eq!(maximal_sparse_net(&s, 3.0).unwrap().as_slice(), &[0, 4, 8]);
}

#[test]
fn halving_map_expands_scales_by_half_rounded_up() {
    let src = range(0, 100, 50.0);
    let tgt = range(0, 50, 25.0);
    let f = PointMap::from_fn(src, tgt, |x| x / 2).unwrap();
    let report = validate_coarse_map(&f, 10.0);
    assert!(report.coarse);
    for w in &report.witnesses {
        let r = w.scale as usize;
        let brute = (0..=100usize)
            .flat_map(|a| (a..=(a + r).min(100)).map(move |b| (b / 2 - a / 2) as f64))
            .fold(0.0, f64::max);
        assert_eq!(w.image_scale, Some(brute));
        assert_eq!(brute, r.div_ceil(2) as f64);
    }
}

#[test]
fn bounded_set_centre_and_scale() {
    let s = range(0, 20, 10.0);
    let b: PointSet = [2, 3, 4, 5, 8].into_iter().collect();
    let report = is_bounded(&s, &b).unwrap();
    assert!(report.bounded);
    assert_eq!(report.scale, 3.0);
    assert_eq!(report.center, Some(5));
}

#[test]
fn identity_and_doubling_are_far_apart() {
    let src = range(0, 100, 50.0);
    let tgt = range(0, 200, 50.0);
    let id = PointMap::from_fn(src.clone(), tgt.clone(), |x| x).unwrap();
    let double = PointMap::from_fn(src, tgt, |x| 2 * x).unwrap();
    let report = are_close(&id, &double).unwrap();
    assert_eq!(report.witness, 100.0);
    assert!(!report.close);
}

#[test]
fn nerve_of_a_path_and_of_a_circle() {
    let n = 12;
    let arcs = |k: usize, wrap: bool| -> Vec<PointSet> {
        (0..k)
            .map(|i| {
                let end = if wrap { i * 3 + 4 } else { (i * 3 + 4).min(n) };
                (i * 3..end).map(|x| x % n).collect()
            })
            .collect()
    };
    let path = Arc::new(nerve_of_sets(&arcs(3, false), n, 2));
    let circle = Arc::new(nerve_of_sets(&arcs(4, true), n, 2));
    let betti = |c: &Arc<SimplicialComplex>, p| homology(&ChainComplex::<F2>::absolute(c.clone()), p).unwrap().rank;
    assert_eq!((path.count(0), path.count(1), path.count(2)), (3, 2, 0));
    assert_eq!((betti(&path, 0), betti(&path, 1)), (1, 0));
    assert_eq!((circle.count(0), circle.count(1), circle.count(2)), (4, 4, 0));
    assert_eq!((betti(&circle, 0), betti(&circle, 1)), (1, 1));
}

#[test]
fn quotient_control_is_least_over_representatives() {
    let s = range(-6, 6, 6.0);
    let classes: Vec<Vec<usize>> = std::iter::once((0..=6).collect()).chain((7..13).map(|x| vec![x])).collect();
    let q = quotient(s.clone(), classes, 2.0).unwrap();
    for a in 0..q.space.len() {
        for b in 0..q.space.len() {
            let brute = if a == b {
                0.0
            } else {
                q.classes[a]
                    .iter()
                    .flat_map(|x| q.classes[b].iter().map(move |y| (x, y)))
                    .map(|(x, y)| s.control(x, y))
                    .fold(f64::INFINITY, f64::min)
            };
            assert_eq!(q.space.control(a, b), brute);
        }
    }
    assert!(q.projection_report.coarse);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn homology_matches_mod2_elimination((n, gens) in generators()) {
        let c = Arc::new(SimplicialComplex::from_simplices(n, 3, gens.clone()).unwrap());
        let faces = closure(&gens, 3);
        for (d, list) in faces.iter().enumerate() {
            prop_assert_eq!(c.simplices(d), list.as_slice());
        }
        let cc = ChainComplex::<F2>::absolute(c);
        prop_assert!(cc.boundary_squared_vanishes());
        for p in 0..3 {
            prop_assert_eq!(homology(&cc, p).unwrap().rank, betti_mod2(&faces, |_| false, p));
        }
    }

    #[test]
    fn relative_homology_matches_mod2_elimination((n, gens) in generators(), cut in 0u32..6) {
        let c = Arc::new(SimplicialComplex::from_simplices(n, 3, gens.clone()).unwrap());
        let lower = c.full_subcomplex(|v| v < cut);
        let cc = ChainComplex::<F2>::relative(c.clone(), c.full(), lower, HomologyMode::RelativeToFrontier).unwrap();
        prop_assert!(cc.boundary_squared_vanishes());
        let faces = closure(&gens, 3);
        for p in 0..3 {
            let brute = betti_mod2(&faces, |s| s.iter().all(|&v| v < cut), p);
            prop_assert_eq!(homology(&cc, p).unwrap().rank, brute);
        }
    }

    #[test]
    fn nerve_matches_common_point_search(
        sets in proptest::collection::vec(proptest::collection::btree_set(0usize..10, 1..5), 1..7)
    ) {
        let sets: Vec<PointSet> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let nerve = nerve_of_sets(&sets, 10, 2);
        let indices: Vec<u32> = (0..sets.len() as u32).collect();
        for d in 0..=2 {
            let brute: Vec<Vec<u32>> = combinations(&indices, d + 1)
                .into_iter()
                .filter(|s| (0..10).any(|x| s.iter().all(|&i| sets[i as usize].contains(x))))
                .collect();
            prop_assert_eq!(nerve.simplices(d), brute.as_slice());
        }
    }

    #[test]
    fn greedy_net_is_sparse_and_maximal(
        values in proptest::collection::btree_set(-40i64..40, 2..30), r in 1u32..6
    ) {
        let values: Vec<i64> = values.into_iter().collect();
        let s = interval(&values, &[values.len() - 1], 10.0);
        let r = r as f64;
        let net = maximal_sparse_net(&s, r).unwrap();
        for a in net.iter() {
            for b in net.iter().filter(|&b| b != a) {
                prop_assert!(s.control(a, b) > r);
            }
        }
        for x in 0..s.len() {
            prop_assert!(net.iter().any(|a| s.control(x, a) <= r));
        }
    }

    #[test]
    fn scale_section_is_the_closed_neighbourhood(
        values in proptest::collection::btree_set(-30i64..30, 2..25),
        picks in proptest::collection::vec(any::<prop::sample::Index>(), 1..4),
        r in 0u32..8
    ) {
        let values: Vec<i64> = values.into_iter().collect();
        let s = interval(&values, &[values.len() - 1], 10.0);
        let a: PointSet = picks.iter().map(|i| i.index(values.len())).collect();
        let section = entourage_section(&s, &Entourage::scale(r as f64), &a).unwrap();
        let brute: PointSet = (0..values.len())
            .filter(|&x| a.iter().any(|y| (values[x] - values[y]).abs() <= r as i64))
            .collect();
        prop_assert_eq!(section, brute);
    }

    #[test]
    fn expansion_witnesses_match_pair_scan(
        images in proptest::collection::vec(0usize..21, 21), budget in 0u32..6
    ) {
        let src = range(0, 20, 10.0);
        let tgt = range(0, 20, 10.0);
        let f = PointMap::new(src, tgt, images.clone()).unwrap();
        let report = validate_coarse_map(&f, budget as f64);
        for w in &report.witnesses {
            let r = w.scale as usize;
            let brute = (0..21usize)
                .flat_map(|a| (a..=(a + r).min(20)).map(move |b| (a, b)))
                .map(|(a, b)| (images[a] as f64 - images[b] as f64).abs())
                .fold(0.0, f64::max);
            prop_assert_eq!(w.image_scale, Some(brute));
        }
        prop_assert_eq!(report.proper, (20.0 - images[20] as f64) <= budget as f64);
    }

    #[test]
    fn coarsening_composites_compose(lo in -30i64..-10, hi in 10i64..30, increments in any::<bool>()) {
        let s = range(lo, hi, ((hi - lo) / 2) as f64);
        let schedule = if increments { Schedule::Increments } else { Schedule::Doubling };
        let family = CoarseningFamily::build(s.clone(), &schedule).unwrap();
        let k = family.stages();
        for i in 0..k {
            prop_assert!(family.covers[i].covers(s.len()));
            for j in i..k {
                for l in j..k {
                    prop_assert_eq!(family.composite(i, l), family.composite(i, j).then(&family.composite(j, l)));
                }
            }
        }
    }
}
