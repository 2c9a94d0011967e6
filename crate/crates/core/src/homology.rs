//! Field-coefficient homology of simplicial pairs by sparse column reduction.
//!
//! A chain complex is always taken relative: chains on the simplices of an
//! upper subcomplex `U` modulo those of a lower subcomplex `L ⊆ U`, over a
//! fixed ambient complex. Absolute homology is the case `U = K`, `L = ∅`.
//!
//! Reduction is the standard left-to-right column algorithm with lowest-one
//! pivots. Boundary matrices are reduced from the top degree down so that
//! columns already known to be paired can be cleared without work.

use std::ops::RangeInclusive;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CoarseError, Result};
use crate::field::Field;
use crate::linalg::Matrix;
use crate::nerve::{SimplicialComplex, SimplicialMap, Subcomplex};

/// Sparse chain: `(local index, coefficient)` sorted by index, no zero entries.
pub type Chain<F> = Vec<(u32, F)>;

/// Column-sparse matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<F> {
    pub rows: usize,
    pub columns: Vec<Chain<F>>,
}

impl<F: Field> SparseMatrix<F> {
    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    /// `(row, col, value)` triples.
    pub fn triplets(&self) -> Vec<(usize, usize, F)> {
        self.columns
            .iter()
            .enumerate()
            .flat_map(|(j, c)| c.iter().map(move |(i, v)| (*i as usize, j, v.clone())))
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "rows": self.rows,
            "cols": self.cols(),
            "triplets": self.triplets().into_iter()
                .map(|(i, j, v)| serde_json::json!([i, j, v.to_json()]))
                .collect::<Vec<_>>(),
        })
    }

    pub fn to_dense(&self) -> Matrix<F> {
        let mut m = Matrix::zeros(self.rows, self.cols());
        for (i, j, v) in self.triplets() {
            m.set(i, j, v);
        }
        m
    }

    /// Product with a column-sparse right factor.
    pub fn mul(&self, rhs: &SparseMatrix<F>) -> SparseMatrix<F> {
        let columns = rhs
            .columns
            .iter()
            .map(|col| {
                let mut acc: Chain<F> = Vec::new();
                for (k, v) in col {
                    acc = axpy(&acc, v, &self.columns[*k as usize]);
                }
                acc
            })
            .collect();
        SparseMatrix { rows: self.rows, columns }
    }
}

/// `z + c·w` for sorted sparse chains.
pub fn axpy<F: Field>(z: &Chain<F>, c: &F, w: &Chain<F>) -> Chain<F> {
    let mut out = Vec::with_capacity(z.len() + w.len());
    let (mut i, mut j) = (0, 0);
    while i < z.len() || j < w.len() {
        if j == w.len() || (i < z.len() && z[i].0 < w[j].0) {
            out.push(z[i].clone());
            i += 1;
        } else if i == z.len() || w[j].0 < z[i].0 {
            let v = c.clone() * w[j].1.clone();
            if !v.is_zero() {
                out.push((w[j].0, v));
            }
            j += 1;
        } else {
            let v = z[i].1.clone() + c.clone() * w[j].1.clone();
            if !v.is_zero() {
                out.push((z[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

fn chain_from_unsorted<F: Field>(mut entries: Vec<(u32, F)>) -> Chain<F> {
    entries.sort_by_key(|e| e.0);
    let mut out: Chain<F> = Vec::with_capacity(entries.len());
    for (i, v) in entries {
        match out.last_mut() {
            Some(last) if last.0 == i => last.1 = last.1.clone() + v,
            _ => out.push((i, v)),
        }
    }
    out.retain(|(_, v)| !v.is_zero());
    out
}

/// What a homology group is relative to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HomologyMode {
    Absolute,
    RelativeToFrontier,
    RelativeToSubcomplex,
}

/// Relative chain complex `C(U) / C(L)` over an ambient complex.
#[derive(Clone, Debug)]
pub struct ChainComplex<F> {
    complex: Arc<SimplicialComplex>,
    upper: Subcomplex,
    lower: Subcomplex,
    mode: HomologyMode,
    cells: Vec<Vec<usize>>,
    local: Vec<Vec<u32>>,
    boundary: Vec<SparseMatrix<F>>,
}

const ABSENT: u32 = u32::MAX;

impl<F: Field> ChainComplex<F> {
    pub fn absolute(complex: Arc<SimplicialComplex>) -> Self {
        let upper = complex.full();
        let lower = complex.empty_subcomplex();
        Self::build(complex, upper, lower, HomologyMode::Absolute)
    }

    /// `C(U) / C(L)`; both masks must be subcomplexes with `L ⊆ U`.
    pub fn relative(complex: Arc<SimplicialComplex>, upper: Subcomplex, lower: Subcomplex, mode: HomologyMode) -> Result<Self> {
        if !upper.is_valid_in(&complex) || !lower.is_valid_in(&complex) {
            return Err(CoarseError::SubcomplexViolation("mask is not downward closed".into()));
        }
        if !lower.is_subset(&upper) {
            return Err(CoarseError::SubcomplexViolation("lower subcomplex is not inside the upper one".into()));
        }
        Ok(Self::build(complex, upper, lower, mode))
    }

    fn build(complex: Arc<SimplicialComplex>, upper: Subcomplex, lower: Subcomplex, mode: HomologyMode) -> Self {
        let dims = complex.dim_cap() + 1;
        let mut cells = Vec::with_capacity(dims);
        let mut local = Vec::with_capacity(dims);
        for d in 0..dims {
            let mut map = vec![ABSENT; complex.count(d)];
            let list: Vec<usize> = (0..complex.count(d))
                .filter(|&i| upper.contains(d, i) && !lower.contains(d, i))
                .collect();
            for (k, &i) in list.iter().enumerate() {
                map[i] = k as u32;
            }
            cells.push(list);
            local.push(map);
        }
        let boundary = (0..dims)
            .map(|d| {
                if d == 0 {
                    return SparseMatrix { rows: 0, columns: vec![Vec::new(); cells[0].len()] };
                }
                let columns = cells[d]
                    .par_iter()
                    .map(|&g| {
                        let s = &complex.simplices(d)[g];
                        let entries = (0..s.len())
                            .filter_map(|i| {
                                let face: Vec<u32> = s.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
                                let fi = complex.index_of(&face).expect("complex is downward closed");
                                let l = local[d - 1][fi];
                                (l != ABSENT).then(|| (l, F::sign(i)))
                            })
                            .collect();
                        chain_from_unsorted(entries)
                    })
                    .collect();
                SparseMatrix { rows: cells[d - 1].len(), columns }
            })
            .collect();
        ChainComplex { complex, upper, lower, mode, cells, local, boundary }
    }

    pub fn complex(&self) -> &Arc<SimplicialComplex> {
        &self.complex
    }

    pub fn upper(&self) -> &Subcomplex {
        &self.upper
    }

    pub fn lower(&self) -> &Subcomplex {
        &self.lower
    }

    pub fn mode(&self) -> HomologyMode {
        self.mode
    }

    pub fn top_dim(&self) -> usize {
        self.complex.dim_cap()
    }

    /// Rank of the chain group in degree `d`.
    pub fn rank(&self, d: usize) -> usize {
        self.cells.get(d).map_or(0, Vec::len)
    }

    /// `∂_d : C_d → C_{d-1}`.
    pub fn boundary(&self, d: usize) -> &SparseMatrix<F> {
        &self.boundary[d]
    }

    /// Global simplex index of local cell `k` in degree `d`.
    pub fn global(&self, d: usize, k: usize) -> usize {
        self.cells[d][k]
    }

    /// Local index of a global simplex, if it is a cell of this complex.
    pub fn local(&self, d: usize, g: usize) -> Option<u32> {
        self.local.get(d).map(|m| m[g]).filter(|&l| l != ABSENT)
    }

    /// `∂∂ = 0` in every degree.
    pub fn boundary_squared_vanishes(&self) -> bool {
        (2..self.boundary.len()).all(|d| {
            self.boundary[d - 1].mul(&self.boundary[d]).columns.iter().all(Vec::is_empty)
        })
    }
}

struct Reduction<F> {
    reduced: Vec<Chain<F>>,
    v: Option<Vec<Chain<F>>>,
    pivot_of_row: Vec<u32>,
    cleared: Vec<bool>,
}

fn reduce<F: Field>(m: &SparseMatrix<F>, clear: Option<&[bool]>, track_v: bool) -> Reduction<F> {
    let n = m.cols();
    let mut reduced: Vec<Chain<F>> = Vec::with_capacity(n);
    let mut v: Vec<Chain<F>> = Vec::with_capacity(if track_v { n } else { 0 });
    let mut pivot_of_row = vec![ABSENT; m.rows];
    let mut cleared = vec![false; n];
    for j in 0..n {
        if clear.is_some_and(|c| c[j]) {
            cleared[j] = true;
            reduced.push(Vec::new());
            if track_v {
                v.push(Vec::new());
            }
            continue;
        }
        let mut col = m.columns[j].clone();
        let mut vj: Chain<F> = if track_v { vec![(j as u32, F::one())] } else { Vec::new() };
        while let Some((low, val)) = col.last().cloned() {
            let k = pivot_of_row[low as usize];
            if k == ABSENT {
                break;
            }
            let k = k as usize;
            let pivot_val = reduced[k].last().expect("pivot column is non-zero").1.clone();
            let c = -(val / pivot_val);
            col = axpy(&col, &c, &reduced[k]);
            if track_v {
                vj = axpy(&vj, &c, &v[k]);
            }
        }
        if let Some((low, _)) = col.last() {
            pivot_of_row[*low as usize] = j as u32;
        }
        reduced.push(col);
        if track_v {
            v.push(vj);
        }
    }
    Reduction { reduced, v: track_v.then_some(v), pivot_of_row, cleared }
}

/// Pivot table for expressing cycles in a homology basis modulo boundaries.
#[derive(Clone, Debug)]
struct CycleSolver<F> {
    /// Per local row: index into `columns`.
    by_low: Vec<u32>,
    columns: Vec<(Chain<F>, Option<usize>)>,
}

impl<F: Field> CycleSolver<F> {
    fn coordinates(&self, z: &Chain<F>, rank: usize) -> Result<Vec<F>> {
        let mut z = z.clone();
        let mut coords = vec![F::zero(); rank];
        while let Some((low, val)) = z.last().cloned() {
            let k = self.by_low.get(low as usize).copied().unwrap_or(ABSENT);
            if k == ABSENT {
                return Err(CoarseError::Construction(format!("chain is not a cycle (cell {low} is unmatched)")));
            }
            let (col, basis) = &self.columns[k as usize];
            let c = val / col.last().expect("solver column is non-zero").1.clone();
            z = axpy(&z, &(-c.clone()), col);
            if let Some(b) = basis {
                coords[*b] = coords[*b].clone() + c;
            }
        }
        Ok(coords)
    }
}

/// Homology in one degree with a chosen basis of cycle representatives.
#[derive(Clone, Debug)]
pub struct HomologyGroup<F> {
    pub degree: usize,
    pub rank: usize,
    pub mode: HomologyMode,
    /// Cycle representatives as chains in local indices of the chain complex.
    pub basis: Vec<Chain<F>>,
    /// `dim ker ∂_p`.
    pub cycle_rank: usize,
    /// `rank ∂_{p+1}`.
    pub boundary_rank: usize,
    solver: CycleSolver<F>,
}

impl<F: Field> HomologyGroup<F> {
    /// Coordinates of a cycle (local indices) in the chosen basis.
    pub fn coordinates(&self, z: &Chain<F>) -> Result<Vec<F>> {
        self.solver.coordinates(z, self.rank)
    }

    pub fn to_json(&self, cc: &ChainComplex<F>) -> serde_json::Value {
        let complex = cc.complex();
        serde_json::json!({
            "degree": self.degree,
            "rank": self.rank,
            "mode": self.mode,
            "basis": self.basis.iter().map(|z| {
                z.iter().map(|(k, v)| {
                    let s = &complex.simplices(self.degree)[cc.global(self.degree, *k as usize)];
                    serde_json::json!({"simplex": s, "coefficient": v.to_json()})
                }).collect::<Vec<_>>()
            }).collect::<Vec<_>>(),
        })
    }
}

/// Homology in each degree of the range. Needs simplices up to one above the top degree.
pub fn homology_range<F: Field>(cc: &ChainComplex<F>, degrees: RangeInclusive<usize>) -> Result<Vec<HomologyGroup<F>>> {
    let (lo, hi) = (*degrees.start(), *degrees.end());
    if hi + 1 > cc.top_dim() {
        return Err(CoarseError::DegreeOutOfRange { degree: hi, dim_cap: cc.top_dim() });
    }
    let mut upper_reduction = reduce(&cc.boundary[hi + 1], None, false);
    let mut groups = Vec::with_capacity(hi - lo + 1);
    for p in (lo..=hi).rev() {
        let paired: Vec<bool> = upper_reduction.pivot_of_row.iter().map(|&k| k != ABSENT).collect();
        let this = reduce(&cc.boundary[p], Some(&paired), true);
        groups.push(assemble(cc, p, &this, &upper_reduction, &paired));
        upper_reduction = this;
    }
    groups.reverse();
    Ok(groups)
}

pub fn homology<F: Field>(cc: &ChainComplex<F>, p: usize) -> Result<HomologyGroup<F>> {
    Ok(homology_range(cc, p..=p)?.remove(0))
}

fn assemble<F: Field>(
    cc: &ChainComplex<F>,
    p: usize,
    this: &Reduction<F>,
    upper: &Reduction<F>,
    paired: &[bool],
) -> HomologyGroup<F> {
    let v = this.v.as_ref().expect("tracked");
    let n = cc.rank(p);
    let mut columns: Vec<(Chain<F>, Option<usize>)> = Vec::new();
    let mut by_low = vec![ABSENT; n];
    for col in upper.reduced.iter().filter(|c| !c.is_empty()) {
        by_low[col.last().unwrap().0 as usize] = columns.len() as u32;
        columns.push((col.clone(), None));
    }
    let mut basis = Vec::new();
    let mut cycle_rank = 0;
    for j in 0..n {
        if !this.reduced[j].is_empty() {
            continue;
        }
        cycle_rank += 1;
        if this.cleared[j] || paired[j] {
            continue;
        }
        by_low[j] = columns.len() as u32;
        columns.push((v[j].clone(), Some(basis.len())));
        basis.push(v[j].clone());
    }
    let boundary_rank = upper.reduced.iter().filter(|c| !c.is_empty()).count();
    HomologyGroup {
        degree: p,
        rank: basis.len(),
        mode: cc.mode(),
        basis,
        cycle_rank,
        boundary_rank,
        solver: CycleSolver { by_low, columns },
    }
}

/// A linear map between homology groups in the chosen bases.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InducedMap<F: Field> {
    pub degree: usize,
    pub matrix: Matrix<F>,
}

impl<F: Field> InducedMap<F> {
    pub fn rank(&self) -> usize {
        self.matrix.rank()
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &InducedMap<F>) -> InducedMap<F> {
        InducedMap { degree: self.degree, matrix: other.matrix.mul(&self.matrix) }
    }

    pub fn is_isomorphism(&self) -> bool {
        self.matrix.rows() == self.matrix.cols() && self.matrix.rank() == self.matrix.rows()
    }
}

/// Pushes a chain of `source` forward along a vertex map. Degenerate images
/// vanish, as do images in the target's lower subcomplex.
pub fn push_chain<F: Field>(
    f: &SimplicialMap,
    source: &ChainComplex<F>,
    target: &ChainComplex<F>,
    p: usize,
    chain: &Chain<F>,
) -> Result<Chain<F>> {
    let mut entries = Vec::with_capacity(chain.len());
    for (k, c) in chain {
        let s = &source.complex.simplices(p)[source.global(p, *k as usize)];
        let raw: Vec<u32> = s.iter().map(|&v| f.vertex_map[v as usize] as u32).collect();
        let (sorted, sign) = sort_with_sign(raw);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        let g = target
            .complex
            .index_of(&sorted)
            .ok_or_else(|| CoarseError::NotSimplicial(format!("{s:?} maps to {sorted:?}, not a simplex")))?;
        if !target.upper.contains(p, g) {
            return Err(CoarseError::SubcomplexViolation(format!("{s:?} maps to {sorted:?}, outside the target")));
        }
        if let Some(l) = target.local(p, g) {
            let v = if sign { -c.clone() } else { c.clone() };
            entries.push((l, v));
        }
    }
    Ok(chain_from_unsorted(entries))
}

/// Sorts vertices, reporting whether the permutation was odd.
fn sort_with_sign(mut v: Vec<u32>) -> (Vec<u32>, bool) {
    let mut odd = false;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            odd = !odd;
            j -= 1;
        }
    }
    (v, odd)
}

/// Checks that non-degenerate images of lower simplices stay in the target lower subcomplex.
pub fn check_pair_map<F: Field>(f: &SimplicialMap, source: &ChainComplex<F>, target: &ChainComplex<F>) -> Result<()> {
    for d in 0..=source.top_dim() {
        for (i, s) in source.complex.simplices(d).iter().enumerate() {
            if !source.lower.contains(d, i) {
                continue;
            }
            let img = f.image(s);
            if img.len() < s.len() {
                continue;
            }
            match target.complex.index_of(&img) {
                Some(g) if target.lower.contains(d, g) => {}
                _ => {
                    return Err(CoarseError::SubcomplexViolation(format!(
                        "{s:?} lies in the source subcomplex but maps to {img:?} outside the target's"
                    )))
                }
            }
        }
    }
    Ok(())
}

/// Matrix of `f_*` on `H_p` in the chosen bases.
pub fn induced_on_homology<F: Field>(
    f: &SimplicialMap,
    source: &ChainComplex<F>,
    source_h: &HomologyGroup<F>,
    target: &ChainComplex<F>,
    target_h: &HomologyGroup<F>,
) -> Result<InducedMap<F>> {
    if source_h.degree != target_h.degree {
        return Err(CoarseError::DimensionMismatch("homology degrees differ".into()));
    }
    let p = source_h.degree;
    check_pair_map(f, source, target)?;
    let columns = source_h
        .basis
        .iter()
        .map(|z| target_h.coordinates(&push_chain(f, source, target, p, z)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(InducedMap { degree: p, matrix: Matrix::from_columns(target_h.rank, &columns) })
}

/// Connecting homomorphism `H_p(source) → H_{p-1}(target)` on one ambient complex.
///
/// Each basis cycle `z` is lifted to `a`, its part on the `split`
/// subcomplex (all of `z` when `split` is `None`). Faces of `∂a` in `drop`
/// are discarded; the rest must be cells of the target, and their class is
/// the image. The lifts are returned for audit.
pub fn connecting_map<F: Field>(
    source: &ChainComplex<F>,
    source_h: &HomologyGroup<F>,
    split: Option<&Subcomplex>,
    drop: &Subcomplex,
    target: &ChainComplex<F>,
    target_h: &HomologyGroup<F>,
) -> Result<(InducedMap<F>, Vec<Chain<F>>)> {
    let p = source_h.degree;
    if p == 0 || target_h.degree + 1 != p {
        return Err(CoarseError::DimensionMismatch("connecting map lowers degree by one".into()));
    }
    if !Arc::ptr_eq(&source.complex, &target.complex) && *source.complex != *target.complex {
        return Err(CoarseError::MismatchedSpaces("connecting map needs one ambient complex".into()));
    }
    let complex = &source.complex;
    let mut columns = Vec::with_capacity(source_h.rank);
    let mut lifts = Vec::with_capacity(source_h.rank);
    for z in &source_h.basis {
        let a: Chain<F> = z
            .iter()
            .filter(|(k, _)| split.is_none_or(|m| m.contains(p, source.global(p, *k as usize))))
            .cloned()
            .collect();
        let mut faces = Vec::new();
        for (k, c) in &a {
            let s = &complex.simplices(p)[source.global(p, *k as usize)];
            for i in 0..s.len() {
                let face: Vec<u32> = s.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
                let g = complex.index_of(&face).expect("complex is downward closed");
                faces.push((g as u32, F::sign(i) * c.clone()));
            }
        }
        let mut image = Vec::new();
        for (g, c) in chain_from_unsorted(faces) {
            let g = g as usize;
            if drop.contains(p - 1, g) {
                continue;
            }
            if !target.upper.contains(p - 1, g) {
                return Err(CoarseError::UnionHypothesis(format!(
                    "boundary of the lift leaves the target at {:?}",
                    complex.simplices(p - 1)[g]
                )));
            }
            if let Some(l) = target.local(p - 1, g) {
                image.push((l, c));
            }
        }
        columns.push(target_h.coordinates(&chain_from_unsorted(image))?);
        lifts.push(a);
    }
    Ok((InducedMap { degree: p - 1, matrix: Matrix::from_columns(target_h.rank, &columns) }, lifts))
}

/// Exactness at one interior node of a sequence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeReport {
    pub position: usize,
    pub label: String,
    pub dim: usize,
    pub rank_in: usize,
    pub rank_out: usize,
    pub composite_zero: bool,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactnessReport {
    pub nodes: Vec<NodeReport>,
    pub exact: bool,
}

/// Checks `im(in) = ker(out)` at every interior node of `maps[0], maps[1], ...`
/// via `out ∘ in = 0` and `rank(in) = dim − rank(out)`.
pub fn verify_exact<F: Field>(maps: &[Matrix<F>], labels: Option<&[String]>) -> Result<ExactnessReport> {
    let mut nodes = Vec::new();
    for i in 0..maps.len().saturating_sub(1) {
        let (a, b) = (&maps[i], &maps[i + 1]);
        if a.rows() != b.cols() {
            return Err(CoarseError::DimensionMismatch(format!(
                "map {i} lands in dimension {} but map {} starts in dimension {}",
                a.rows(),
                i + 1,
                b.cols()
            )));
        }
        let dim = a.rows();
        let rank_in = a.rank();
        let rank_out = b.rank();
        let composite_zero = b.mul(a).is_zero();
        nodes.push(NodeReport {
            position: i + 1,
            label: labels.and_then(|l| l.get(i + 1)).cloned().unwrap_or_default(),
            dim,
            rank_in,
            rank_out,
            composite_zero,
            exact: composite_zero && rank_in + rank_out == dim,
        });
    }
    let exact = nodes.iter().all(|n| n.exact);
    Ok(ExactnessReport { nodes, exact })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Rational, F2};

    fn complex(n: usize, cap: usize, gens: Vec<Vec<u32>>) -> Arc<SimplicialComplex> {
        Arc::new(SimplicialComplex::from_simplices(n, cap, gens).unwrap())
    }

    fn ranks<F: Field>(k: &Arc<SimplicialComplex>, hi: usize) -> Vec<usize> {
        let cc = ChainComplex::<F>::absolute(k.clone());
        homology_range(&cc, 0..=hi).unwrap().iter().map(|h| h.rank).collect()
    }

    #[test]
    fn circle_and_disk() {
        let hollow = complex(3, 2, vec![vec![0, 1], vec![1, 2], vec![0, 2]]);
        assert_eq!(ranks::<F2>(&hollow, 1), vec![1, 1]);
        assert_eq!(ranks::<Rational>(&hollow, 1), vec![1, 1]);
        let filled = complex(3, 3, vec![vec![0, 1, 2]]);
        assert_eq!(ranks::<F2>(&filled, 2), vec![1, 0, 0]);
    }

    #[test]
    fn boundary_squared() {
        let k = complex(5, 4, vec![vec![0, 1, 2, 3, 4]]);
        assert!(ChainComplex::<Rational>::absolute(k.clone()).boundary_squared_vanishes());
        assert!(ChainComplex::<F2>::absolute(k).boundary_squared_vanishes());
    }

    #[test]
    fn sort_sign() {
        assert_eq!(sort_with_sign(vec![2, 0, 1]), (vec![0, 1, 2], false));
        assert_eq!(sort_with_sign(vec![1, 0, 2]), (vec![0, 1, 2], true));
    }

    #[test]
    fn exactness_of_identity_and_zero() {
        let id = Matrix::<F2>::identity(1);
        let into = Matrix::<F2>::zeros(1, 0);
        let out = Matrix::<F2>::zeros(0, 1);
        assert!(verify_exact(&[into.clone(), id, out.clone()], None).unwrap().exact);
        let zero = Matrix::<F2>::zeros(1, 1);
        let r = verify_exact(&[into, zero, out], None).unwrap();
        assert!(!r.nodes[0].exact && !r.nodes[1].exact);
    }
}
