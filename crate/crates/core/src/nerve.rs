//! Nerves of covers, subcomplexes, and simplicial maps between nerves.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::coarse_space::{Decomposition, PointMap, PointSet, TruncatedCoarseSpace};
use crate::coarsening::{CoarseningFamily, CoarseningMap, GoodCover};
use crate::error::{CoarseError, Result};

/// A simplex as its sorted vertex list.
pub type Simplex = Vec<u32>;

/// Finite simplicial complex truncated at `dim_cap`.
///
/// Simplices of each dimension are stored in lexicographic order; that order
/// fixes the chain bases used by the homology module.
#[derive(Clone, Debug)]
pub struct SimplicialComplex {
    n_vertices: usize,
    dim_cap: usize,
    simplices: Vec<Vec<Simplex>>,
    index: Vec<HashMap<Simplex, usize>>,
}

impl PartialEq for SimplicialComplex {
    fn eq(&self, other: &Self) -> bool {
        self.n_vertices == other.n_vertices && self.dim_cap == other.dim_cap && self.simplices == other.simplices
    }
}

impl SimplicialComplex {
    /// Downward closure of the given simplices, truncated at `dim_cap`.
    pub fn from_simplices(n_vertices: usize, dim_cap: usize, generators: impl IntoIterator<Item = Simplex>) -> Result<Self> {
        let mut by_dim: Vec<HashSet<Simplex>> = vec![HashSet::new(); dim_cap + 1];
        for mut s in generators {
            s.sort_unstable();
            s.dedup();
            if s.is_empty() {
                continue;
            }
            if let Some(&v) = s.iter().find(|&&v| v as usize >= n_vertices) {
                return Err(CoarseError::PointOutOfRange { index: v as usize, len: n_vertices });
            }
            insert_faces(&s, dim_cap, &mut by_dim);
        }
        Ok(Self::from_sets(n_vertices, dim_cap, by_dim))
    }

    fn from_sets(n_vertices: usize, dim_cap: usize, by_dim: Vec<HashSet<Simplex>>) -> Self {
        let simplices: Vec<Vec<Simplex>> = by_dim
            .into_par_iter()
            .map(|set| {
                let mut v: Vec<Simplex> = set.into_iter().collect();
                v.sort_unstable();
                v
            })
            .collect();
        let index = simplices
            .par_iter()
            .map(|list| list.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect())
            .collect();
        SimplicialComplex { n_vertices, dim_cap, simplices, index }
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn dim_cap(&self) -> usize {
        self.dim_cap
    }

    /// Simplices of dimension `d` (empty above the cap).
    pub fn simplices(&self, d: usize) -> &[Simplex] {
        self.simplices.get(d).map_or(&[], Vec::as_slice)
    }

    pub fn count(&self, d: usize) -> usize {
        self.simplices(d).len()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.simplices.iter().map(Vec::len).collect()
    }

    pub fn total(&self) -> usize {
        self.simplices.iter().map(Vec::len).sum()
    }

    pub fn index_of(&self, s: &[u32]) -> Option<usize> {
        if s.is_empty() {
            return None;
        }
        self.index.get(s.len() - 1)?.get(s).copied()
    }

    pub fn contains(&self, s: &[u32]) -> bool {
        self.index_of(s).is_some()
    }

    /// Every codimension-one face of every simplex is present.
    pub fn is_downward_closed(&self) -> bool {
        (1..self.simplices.len()).all(|d| {
            self.simplices[d].iter().all(|s| (0..s.len()).all(|i| self.contains(&drop_vertex(s, i))))
        })
    }

    /// Flat `(dim, vertices...)` list.
    pub fn simplex_list(&self) -> Vec<(usize, Simplex)> {
        self.simplices
            .iter()
            .enumerate()
            .flat_map(|(d, list)| list.iter().map(move |s| (d, s.clone())))
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "vertices": self.n_vertices,
            "dim_cap": self.dim_cap,
            "simplices": self.simplex_list().into_iter().map(|(d, s)| {
                let mut row = vec![d as u64];
                row.extend(s.iter().map(|&v| v as u64));
                row
            }).collect::<Vec<_>>(),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("dim,vertices\n");
        for (d, s) in self.simplex_list() {
            let verts: Vec<String> = s.iter().map(u32::to_string).collect();
            out.push_str(&format!("{d},{}\n", verts.join(" ")));
        }
        out
    }

    pub fn empty_subcomplex(&self) -> Subcomplex {
        Subcomplex { mask: self.simplices.iter().map(|l| vec![false; l.len()]).collect() }
    }

    pub fn full(&self) -> Subcomplex {
        Subcomplex { mask: self.simplices.iter().map(|l| vec![true; l.len()]).collect() }
    }

    /// Full subcomplex on the vertices satisfying `keep`.
    pub fn full_subcomplex(&self, keep: impl Fn(u32) -> bool + Sync) -> Subcomplex {
        Subcomplex {
            mask: self
                .simplices
                .par_iter()
                .map(|list| list.iter().map(|s| s.iter().all(|&v| keep(v))).collect())
                .collect(),
        }
    }

    /// Smallest subcomplex containing the given simplices.
    pub fn generated_subcomplex<'a>(&self, generators: impl IntoIterator<Item = &'a [u32]>) -> Result<Subcomplex> {
        let mut sub = self.empty_subcomplex();
        for g in generators {
            if !self.contains(g) {
                return Err(CoarseError::SubcomplexViolation(format!("simplex {g:?} is not in the complex")));
            }
            let mut faces = vec![HashSet::new(); self.dim_cap + 1];
            insert_faces(g, self.dim_cap, &mut faces);
            for (d, set) in faces.into_iter().enumerate() {
                for f in set {
                    sub.mask[d][self.index[d][&f]] = true;
                }
            }
        }
        Ok(sub)
    }
}

fn drop_vertex(s: &[u32], i: usize) -> Simplex {
    s.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect()
}

/// Adds every non-empty face of `s` with at most `dim_cap + 1` vertices.
fn insert_faces(s: &[u32], dim_cap: usize, by_dim: &mut [HashSet<Simplex>]) {
    let k = s.len().min(dim_cap + 1);
    for size in 1..=k {
        for_each_subset(s, size, |sub| {
            by_dim[size - 1].insert(sub.to_vec());
        });
    }
}

/// Calls `f` on every `size`-subset of `items`, in lexicographic order.
pub(crate) fn for_each_subset(items: &[u32], size: usize, mut f: impl FnMut(&[u32])) {
    let n = items.len();
    if size > n || size == 0 {
        return;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    let mut buf: Vec<u32> = idx.iter().map(|&i| items[i]).collect();
    loop {
        f(&buf);
        let mut i = size;
        while i > 0 && idx[i - 1] == n - size + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..size {
            idx[j] = idx[j - 1] + 1;
        }
        for j in (i - 1)..size {
            buf[j] = items[idx[j]];
        }
    }
}

/// A subcomplex as per-dimension membership masks over a fixed complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subcomplex {
    mask: Vec<Vec<bool>>,
}

impl Subcomplex {
    pub fn contains(&self, d: usize, i: usize) -> bool {
        self.mask.get(d).is_some_and(|m| m[i])
    }

    pub fn count(&self, d: usize) -> usize {
        self.mask.get(d).map_or(0, |m| m.iter().filter(|&&b| b).count())
    }

    pub fn is_empty(&self) -> bool {
        self.mask.iter().all(|m| m.iter().all(|&b| !b))
    }

    pub fn union(&self, other: &Subcomplex) -> Subcomplex {
        self.zip(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &Subcomplex) -> Subcomplex {
        self.zip(other, |a, b| a && b)
    }

    pub fn is_subset(&self, other: &Subcomplex) -> bool {
        self.mask.iter().zip(&other.mask).all(|(a, b)| a.iter().zip(b).all(|(&x, &y)| !x || y))
    }

    fn zip(&self, other: &Subcomplex, op: impl Fn(bool, bool) -> bool) -> Subcomplex {
        Subcomplex {
            mask: self
                .mask
                .iter()
                .zip(&other.mask)
                .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| op(x, y)).collect())
                .collect(),
        }
    }

    /// Downward closure holds inside `complex`.
    pub fn is_valid_in(&self, complex: &SimplicialComplex) -> bool {
        (1..self.mask.len()).all(|d| {
            complex.simplices(d).iter().enumerate().all(|(i, s)| {
                !self.mask[d][i]
                    || (0..s.len()).all(|j| {
                        complex.index_of(&drop_vertex(s, j)).is_some_and(|f| self.mask[d - 1][f])
                    })
            })
        })
    }

    /// First simplex (dimension, vertices) of `complex` outside this subcomplex.
    pub fn first_missing(&self, complex: &SimplicialComplex) -> Option<(usize, Simplex)> {
        (0..self.mask.len()).find_map(|d| {
            self.mask[d].iter().position(|&b| !b).map(|i| (d, complex.simplices(d)[i].clone()))
        })
    }
}

/// A complex with a subcomplex.
#[derive(Clone, Debug)]
pub struct ComplexPair {
    pub complex: Arc<SimplicialComplex>,
    pub sub: Subcomplex,
}

impl ComplexPair {
    pub fn new(complex: Arc<SimplicialComplex>, sub: Subcomplex) -> Result<Self> {
        if !sub.is_valid_in(&complex) {
            return Err(CoarseError::SubcomplexViolation("subcomplex is not downward closed".into()));
        }
        Ok(ComplexPair { complex, sub })
    }
}

/// Simplices witnessed by single points: every set of at most `dim_cap + 1`
/// cover sets sharing a point. This is exactly the nerve truncated at `dim_cap`.
fn witnessed(memberships: &[Vec<usize>], points: impl Iterator<Item = usize>, dim_cap: usize) -> Vec<HashSet<Simplex>> {
    let lists: Vec<Vec<u32>> = points
        .map(|p| memberships[p].iter().map(|&v| v as u32).collect::<Vec<u32>>())
        .collect::<HashSet<_>>()
        .into_iter()
        .collect();
    lists
        .par_chunks(64)
        .map(|chunk| {
            let mut acc = vec![HashSet::new(); dim_cap + 1];
            for l in chunk {
                let mut l = l.clone();
                l.sort_unstable();
                insert_faces(&l, dim_cap, &mut acc);
            }
            acc
        })
        .reduce(
            || vec![HashSet::new(); dim_cap + 1],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    x.extend(y);
                }
                a
            },
        )
}

/// Nerve of a cover: a simplex for every family of sets with a common point.
pub fn nerve(cover: &GoodCover, n_points: usize, dim_cap: usize) -> SimplicialComplex {
    let memberships = cover.memberships(n_points);
    SimplicialComplex::from_sets(cover.len(), dim_cap, witnessed(&memberships, 0..n_points, dim_cap))
}

/// Nerve of an arbitrary list of sets over `n_points` points.
pub fn nerve_of_sets(sets: &[PointSet], n_points: usize, dim_cap: usize) -> SimplicialComplex {
    let mut memberships = vec![Vec::new(); n_points];
    for (i, s) in sets.iter().enumerate() {
        for x in s.iter() {
            memberships[x].push(i);
        }
    }
    SimplicialComplex::from_sets(sets.len(), dim_cap, witnessed(&memberships, 0..n_points, dim_cap))
}

/// Simplices of the nerve whose sets share a point of `a`: the nerve of the
/// restricted cover `{U ∩ A}`, as a subcomplex of the full nerve.
pub fn restricted_subcomplex(complex: &SimplicialComplex, cover: &GoodCover, n_points: usize, a: &PointSet) -> Subcomplex {
    let memberships = cover.memberships(n_points);
    let sets = witnessed(&memberships, a.iter(), complex.dim_cap());
    let mut sub = complex.empty_subcomplex();
    for (d, set) in sets.into_iter().enumerate() {
        for s in set {
            if let Some(i) = complex.index.get(d).and_then(|m| m.get(&s)) {
                sub.mask[d][*i] = true;
            }
        }
    }
    sub
}

/// Full subcomplex on the vertices whose sets meet the frontier.
pub fn frontier_subcomplex(complex: &SimplicialComplex, cover: &GoodCover, space: &TruncatedCoarseSpace) -> Subcomplex {
    let touching: Vec<bool> = cover.sets.iter().map(|s| space.touches_frontier(&s.points)).collect();
    complex.full_subcomplex(|v| touching[v as usize])
}

/// `(K_A, K_B)` for a decomposition, after checking `K_A ∪ K_B = K`.
pub fn union_intersection_subcomplexes(
    complex: &SimplicialComplex,
    cover: &GoodCover,
    dec: &Decomposition,
) -> Result<(Subcomplex, Subcomplex)> {
    let n = dec.space.len();
    let ka = restricted_subcomplex(complex, cover, n, &dec.a);
    let kb = restricted_subcomplex(complex, cover, n, &dec.b);
    if let Some((d, s)) = ka.union(&kb).first_missing(complex) {
        return Err(CoarseError::UnionHypothesis(format!(
            "stage {}: {d}-simplex {s:?} lies in neither K_A nor K_B",
            cover.stage
        )));
    }
    Ok((ka, kb))
}

/// Vertex map between complexes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimplicialMap {
    pub vertex_map: Vec<usize>,
}

impl SimplicialMap {
    pub fn identity(n: usize) -> Self {
        SimplicialMap { vertex_map: (0..n).collect() }
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &SimplicialMap) -> SimplicialMap {
        SimplicialMap { vertex_map: self.vertex_map.iter().map(|&v| other.vertex_map[v]).collect() }
    }

    /// Sorted, deduplicated image of a simplex.
    pub fn image(&self, s: &[u32]) -> Simplex {
        let mut img: Simplex = s.iter().map(|&v| self.vertex_map[v as usize] as u32).collect();
        img.sort_unstable();
        img.dedup();
        img
    }

    /// Checks that every simplex lands on a simplex.
    pub fn check(&self, source: &SimplicialComplex, target: &SimplicialComplex) -> Result<()> {
        if self.vertex_map.len() != source.n_vertices() {
            return Err(CoarseError::NotSimplicial(format!(
                "{} vertex images for {} vertices",
                self.vertex_map.len(),
                source.n_vertices()
            )));
        }
        for d in 0..=source.dim_cap() {
            for s in source.simplices(d) {
                let img = self.image(s);
                if img.len() - 1 <= target.dim_cap() && !target.contains(&img) {
                    return Err(CoarseError::NotSimplicial(format!("{s:?} maps to {img:?}, not a simplex")));
                }
            }
        }
        Ok(())
    }

    /// Checks that the subcomplex `from` lands inside `to`.
    pub fn respects(&self, source: &SimplicialComplex, from: &Subcomplex, target: &SimplicialComplex, to: &Subcomplex) -> Result<()> {
        for d in 0..=source.dim_cap() {
            for (i, s) in source.simplices(d).iter().enumerate() {
                if !from.contains(d, i) {
                    continue;
                }
                let img = self.image(s);
                match target.index_of(&img) {
                    Some(j) if to.contains(img.len() - 1, j) => {}
                    _ => {
                        return Err(CoarseError::SubcomplexViolation(format!(
                            "{s:?} maps to {img:?}, outside the target subcomplex"
                        )))
                    }
                }
            }
        }
        Ok(())
    }
}

/// The vertex map of a coarsening map.
pub fn induced_by_coarsening(phi: &CoarseningMap) -> SimplicialMap {
    SimplicialMap { vertex_map: phi.assignment.clone() }
}

/// Stage choice for pushing a cover forward along a point map.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PushForward {
    /// Target stage index (0-based).
    pub target_stage: usize,
    pub map: SimplicialMap,
}

/// Assigns each source set `U` the first target set `V ⊇ f[U]` at the
/// smallest target stage (at least `min_stage`) where every source set finds
/// one. Sets meeting the source frontier must go to sets meeting the target
/// frontier, so that frontier subcomplexes are respected.
pub fn induced_by_point_map(
    f: &PointMap,
    source_cover: &GoodCover,
    target: &CoarseningFamily,
    min_stage: usize,
) -> Result<PushForward> {
    let (src, tgt) = (f.source(), f.target());
    let images: Vec<(PointSet, bool)> = source_cover
        .sets
        .iter()
        .map(|u| (f.image_of(&u.points), src.touches_frontier(&u.points)))
        .collect();
    let mut obstruction = String::new();
    for (j, cover) in target.covers.iter().enumerate().skip(min_stage) {
        let touching: Vec<bool> = cover.sets.iter().map(|v| tgt.touches_frontier(&v.points)).collect();
        let choice: Vec<Option<usize>> = images
            .par_iter()
            .map(|(img, frontier)| {
                cover
                    .sets
                    .iter()
                    .enumerate()
                    .find(|(k, v)| (!frontier || touching[*k]) && img.is_subset(&v.points))
                    .map(|(k, _)| k)
            })
            .collect();
        match choice.iter().position(Option::is_none) {
            None => {
                return Ok(PushForward {
                    target_stage: j,
                    map: SimplicialMap { vertex_map: choice.into_iter().map(Option::unwrap).collect() },
                })
            }
            Some(u) => {
                obstruction = format!(
                    "source set centred at {} ({} points) fits in no stage-{} set",
                    src.label(source_cover.sets[u].center),
                    source_cover.sets[u].points.len(),
                    j + 1
                );
            }
        }
    }
    Err(CoarseError::NoAdmissibleStage(if obstruction.is_empty() {
        format!("no target stage at or after {}", min_stage + 1)
    } else {
        obstruction
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_in_order() {
        let mut seen = Vec::new();
        for_each_subset(&[1, 2, 3, 4], 2, |s| seen.push(s.to_vec()));
        assert_eq!(seen, vec![vec![1, 2], vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4], vec![3, 4]]);
    }

    #[test]
    fn closure_and_truncation() {
        let k = SimplicialComplex::from_simplices(4, 1, vec![vec![0, 1, 2], vec![3]]).unwrap();
        assert_eq!(k.counts(), vec![4, 3]);
        assert!(k.is_downward_closed());
        assert_eq!(k.index_of(&[0, 2]), Some(1));
    }

    #[test]
    fn generated_and_full_subcomplexes() {
        let k = SimplicialComplex::from_simplices(3, 2, vec![vec![0, 1, 2]]).unwrap();
        let g = k.generated_subcomplex([&[0u32, 1][..]]).unwrap();
        assert_eq!((g.count(0), g.count(1), g.count(2)), (2, 1, 0));
        let f = k.full_subcomplex(|v| v != 2);
        assert_eq!(f, g);
        assert!(g.is_valid_in(&k));
    }
}
