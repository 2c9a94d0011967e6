//! Mayer-Vietoris and pair sequences, stage by stage and at the limit.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::{restrict_to_limits, ProfileConfig, Tower};
use crate::coarse_space::{is_coarsely_excisive, Decomposition, ExcisionReport, PointSet, TruncatedCoarseSpace};
use crate::coarsening::{CoarseningFamily, GoodCover};
use crate::error::{CoarseError, Result};
use crate::field::Field;
use crate::homology::{
    connecting_map, homology_range, induced_on_homology, verify_exact, ChainComplex, ExactnessReport, HomologyGroup,
    HomologyMode,
};
use crate::linalg::Matrix;
use crate::nerve::{
    frontier_subcomplex, induced_by_coarsening, nerve, restricted_subcomplex, union_intersection_subcomplexes,
    SimplicialComplex, SimplicialMap, Subcomplex,
};

#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct LabeledMatrix<F: Field> {
    pub label: String,
    pub matrix: Matrix<F>,
}

/// One homology theory on a stage: a relative chain complex and its groups in degrees `0..=hi`.
struct Piece<F: Field> {
    chain: ChainComplex<F>,
    groups: Vec<HomologyGroup<F>>,
}

impl<F: Field> Piece<F> {
    fn new(complex: &Arc<SimplicialComplex>, upper: Subcomplex, lower: Subcomplex, mode: HomologyMode, hi: usize) -> Result<Self> {
        let chain = ChainComplex::relative(complex.clone(), upper, lower, mode)?;
        let groups = homology_range(&chain, 0..=hi)?;
        Ok(Piece { chain, groups })
    }

    fn ranks(&self) -> Vec<usize> {
        self.groups.iter().map(|h| h.rank).collect()
    }

    fn inclusion_into(&self, other: &Piece<F>, p: usize) -> Result<Matrix<F>> {
        let id = SimplicialMap::identity(self.chain.complex().n_vertices());
        Ok(induced_on_homology(&id, &self.chain, &self.groups[p], &other.chain, &other.groups[p])?.matrix)
    }
}

/// A map of a sequence with the positions of its source and target spaces.
struct SeqMap<F: Field> {
    label: String,
    matrix: Matrix<F>,
    from: usize,
    to: usize,
    degree: usize,
    connecting: bool,
}

impl<F: Field> SeqMap<F> {
    fn new(label: String, matrix: Matrix<F>, from: usize, to: usize, degree: usize) -> Self {
        SeqMap { label, matrix, from, to, degree, connecting: false }
    }

    fn connecting(label: String, matrix: Matrix<F>, from: usize, to: usize, degree: usize) -> Self {
        SeqMap { label, matrix, from, to, degree, connecting: true }
    }

    fn zero(rank: usize, at: usize) -> Self {
        SeqMap::new("zero".into(), Matrix::zeros(0, rank), at, at, 0)
    }
}

fn block_diagonal<F: Field>(a: &Matrix<F>, b: &Matrix<F>) -> Matrix<F> {
    let top = a.hstack(&Matrix::zeros(a.rows(), b.cols()));
    let bottom = Matrix::zeros(b.rows(), a.cols()).hstack(b);
    top.vstack(&bottom)
}

fn towers<F: Field>(pieces: &[&Piece<F>], links: &[SimplicialMap], hi: usize) -> Result<Vec<Tower<F>>> {
    (0..=hi)
        .map(|p| {
            let levels: Vec<_> = pieces.iter().map(|x| (&x.chain, &x.groups[p])).collect();
            Tower::from_levels(&levels, links)
        })
        .collect()
}

fn family_for(space: &Arc<TruncatedCoarseSpace>, config: &ProfileConfig) -> Result<CoarseningFamily> {
    config.validate()?;
    if space.is_empty() {
        return Err(CoarseError::InvalidSpace("the space has no points".into()));
    }
    CoarseningFamily::build(space.clone(), &config.schedule)
}

/// A long sequence at the limit, built from last-stage maps restricted to limit subspaces.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct LimitSequence<F: Field> {
    /// Limit ranks per space, indexed by degree.
    pub ranks: Vec<(String, Vec<usize>)>,
    pub maps: Vec<LabeledMatrix<F>>,
    pub exactness: ExactnessReport,
    /// Degrees `p` whose connecting map out of degree `p` is an isomorphism at the limit.
    pub connecting_isomorphisms: Vec<usize>,
    /// Every tower stabilized within the window.
    pub stable: bool,
    /// Stages (1-based) the limit was read from.
    pub stages: Vec<usize>,
}

/// Limits of each tower and the last-stage maps restricted to them, in
/// sequence order. The final map must be the zero map out of degree 0.
fn limit_sequence<F: Field>(
    names: &[&str],
    towers: &[Vec<Tower<F>>],
    window: usize,
    final_maps: &[SeqMap<F>],
    labels: &[String],
    first_stage: usize,
) -> Result<LimitSequence<F>> {
    let limits: Vec<Vec<_>> = towers.iter().map(|ts| ts.iter().map(|t| t.limit(window)).collect()).collect();
    let stable = limits.iter().flatten().all(|l| l.stabilization.is_stable());
    let basis = |space: usize, p: usize| -> Matrix<F> { limits[space][p].basis.clone() };
    let (zero, rest) = final_maps.split_last().expect("sequence ends in a zero map");
    let mut maps = Vec::new();
    for m in rest {
        let source = source_basis(&basis, m.from, m.degree);
        let target = source_basis(&basis, m.to, m.degree - usize::from(m.connecting));
        let r = restrict_to_limits(&m.matrix, &source, &target).ok_or_else(|| {
            CoarseError::Construction(format!("{} does not preserve the limit subspaces", m.label))
        })?;
        maps.push(SeqMap { matrix: r, label: m.label.clone(), ..*m });
    }
    maps.push(SeqMap::zero(limits[zero.from][0].rank, zero.from));
    let mats: Vec<Matrix<F>> = maps.iter().map(|m| m.matrix.clone()).collect();
    let exactness = verify_exact(&mats, Some(labels))?;
    let connecting_isomorphisms = maps
        .iter()
        .filter(|m| m.connecting && m.matrix.rows() == m.matrix.cols() && m.matrix.rank() == m.matrix.rows())
        .map(|m| m.degree)
        .collect();
    Ok(LimitSequence {
        ranks: names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.to_string(), limits[i].iter().map(|l| l.rank).collect()))
            .collect(),
        maps: labeled(maps),
        exactness,
        connecting_isomorphisms,
        stable,
        stages: (first_stage + 1..=first_stage + towers[0][0].stages()).collect(),
    })
}

fn labeled<F: Field>(maps: Vec<SeqMap<F>>) -> Vec<LabeledMatrix<F>> {
    maps.into_iter().map(|m| LabeledMatrix { label: m.label, matrix: m.matrix }).collect()
}

fn exactness_of<F: Field>(maps: &[SeqMap<F>], labels: &[String]) -> Result<ExactnessReport> {
    let mats: Vec<Matrix<F>> = maps.iter().map(|m| m.matrix.clone()).collect();
    verify_exact(&mats, Some(labels))
}

/// Index `SUM` stands for the direct sum of the spaces at indices 1 and 2.
const SUM: usize = usize::MAX;

fn source_basis<F: Field>(basis: &impl Fn(usize, usize) -> Matrix<F>, space: usize, p: usize) -> Matrix<F> {
    if space == SUM {
        block_diagonal(&basis(1, p), &basis(2, p))
    } else {
        basis(space, p)
    }
}

/// Mayer-Vietoris data of one stage.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct MvStage<F: Field> {
    pub stage: usize,
    pub scale: f64,
    /// Why the stage was skipped, if it was.
    pub skipped: Option<String>,
    pub ranks_intersection: Vec<usize>,
    pub ranks_a: Vec<usize>,
    pub ranks_b: Vec<usize>,
    pub ranks_whole: Vec<usize>,
    pub maps: Vec<LabeledMatrix<F>>,
    pub exactness: Option<ExactnessReport>,
    /// Per degree: the nerve of the restricted cover of `A ∩ B` has the homology of `K_A ∩ K_B`.
    pub intersection_nerve_iso: Vec<bool>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct MvReport<F: Field> {
    pub excision: ExcisionReport,
    /// Set when the decomposition is not excisive within the budget.
    pub refusal: Option<String>,
    pub hi: usize,
    pub stages: Vec<MvStage<F>>,
    pub limit: Option<LimitSequence<F>>,
    /// Every computed stage and the limit are exact.
    pub exact: bool,
}

struct MvPieces<F: Field> {
    ab: Piece<F>,
    a: Piece<F>,
    b: Piece<F>,
    x: Piece<F>,
    complex: Arc<SimplicialComplex>,
    ka: Subcomplex,
    frontier: Subcomplex,
}

fn mv_labels(hi: usize) -> Vec<String> {
    let mut nodes = Vec::new();
    for p in (0..=hi).rev() {
        nodes.push(format!("H{p}(A∩B)"));
        nodes.push(format!("H{p}(A)⊕H{p}(B)"));
        nodes.push(format!("H{p}(X)"));
    }
    nodes.push("0".into());
    nodes
}

/// Spaces are numbered `A∩B = 0`, `A = 1`, `B = 2`, `X = 3`.
fn mv_maps<F: Field>(pc: &MvPieces<F>, hi: usize) -> Result<Vec<SeqMap<F>>> {
    let mut out = Vec::new();
    for p in (0..=hi).rev() {
        let i = pc.ab.inclusion_into(&pc.a, p)?;
        let j = pc.ab.inclusion_into(&pc.b, p)?;
        let k = pc.a.inclusion_into(&pc.x, p)?;
        let l = pc.b.inclusion_into(&pc.x, p)?;
        out.push(SeqMap::new(format!("alpha_{p}"), i.vstack(&j.scale(&-F::one())), 0, SUM, p));
        out.push(SeqMap::new(format!("beta_{p}"), k.hstack(&l), SUM, 3, p));
        if p > 0 {
            let (d, _) = connecting_map(
                &pc.x.chain,
                &pc.x.groups[p],
                Some(&pc.ka),
                &pc.frontier,
                &pc.ab.chain,
                &pc.ab.groups[p - 1],
            )?;
            out.push(SeqMap::connecting(format!("d_{p}"), d.matrix, 3, 0, p));
        }
    }
    out.push(SeqMap::zero(pc.x.groups[0].rank, 3));
    Ok(out)
}

/// Checks the Mayer-Vietoris sequence of `X = A ∪ B` on every stage and at the limit.
///
/// Over the rationals `α = (i_*, -j_*)`; over the field of two elements the
/// sign is invisible. Sequences run from degree `hi` down to degree 0. A
/// decomposition that is not excisive within `budget` is refused.
pub fn mayer_vietoris_check<F: Field>(dec: &Decomposition, config: &ProfileConfig, budget: f64) -> Result<MvReport<F>> {
    if !dec.covers_space() {
        return Err(CoarseError::Decomposition("Mayer-Vietoris needs A ∪ B = X".into()));
    }
    let hi = config.hi;
    let excision = is_coarsely_excisive(dec, budget)?;
    if !excision.excisive {
        let at = excision.first_failure.map(|r| format!(" at scale {r}")).unwrap_or_default();
        return Ok(MvReport {
            refusal: Some(format!("decomposition is not coarsely excisive{at}")),
            excision,
            hi,
            stages: Vec::new(),
            limit: None,
            exact: false,
        });
    }
    let space = &dec.space;
    let family = family_for(space, config)?;
    let ab_points = dec.intersection();
    let built = family
        .covers
        .par_iter()
        .map(|cover| -> Result<std::result::Result<MvPieces<F>, String>> {
            let complex = Arc::new(nerve(cover, space.len(), config.dim_cap()));
            let frontier = frontier_subcomplex(&complex, cover, space);
            let (ka, kb) = match union_intersection_subcomplexes(&complex, cover, dec) {
                Ok(x) => x,
                Err(e) => return Ok(Err(e.to_string())),
            };
            let kab = ka.intersection(&kb);
            let rel = HomologyMode::RelativeToFrontier;
            let x = Piece::new(&complex, complex.full(), frontier.clone(), rel, hi)?;
            let a = Piece::new(&complex, ka.clone(), ka.intersection(&frontier), rel, hi)?;
            let b = Piece::new(&complex, kb.clone(), kb.intersection(&frontier), rel, hi)?;
            let ab = Piece::new(&complex, kab.clone(), kab.intersection(&frontier), rel, hi)?;
            Ok(Ok(MvPieces { ab, a, b, x, complex, ka, frontier }))
        })
        .collect::<Result<Vec<_>>>()?;
    let labels = mv_labels(hi);
    let mut stages = Vec::new();
    for (k, (cover, piece)) in family.covers.iter().zip(&built).enumerate() {
        let mut st = MvStage {
            stage: k + 1,
            scale: cover.scale,
            skipped: None,
            ranks_intersection: Vec::new(),
            ranks_a: Vec::new(),
            ranks_b: Vec::new(),
            ranks_whole: Vec::new(),
            maps: Vec::new(),
            exactness: None,
            intersection_nerve_iso: Vec::new(),
        };
        match piece {
            Err(why) => st.skipped = Some(why.clone()),
            Ok(pc) => {
                let maps = mv_maps(pc, hi)?;
                st.exactness = Some(exactness_of(&maps, &labels)?);
                st.maps = labeled(maps);
                st.ranks_intersection = pc.ab.ranks();
                st.ranks_a = pc.a.ranks();
                st.ranks_b = pc.b.ranks();
                st.ranks_whole = pc.x.ranks();
                st.intersection_nerve_iso = intersection_nerve_iso(pc, cover, space.len(), &ab_points, hi)?;
            }
        }
        stages.push(st);
    }
    let tail = built.iter().rev().take_while(|p| p.is_ok()).count();
    let limit = if tail == 0 {
        None
    } else {
        let first = built.len() - tail;
        let run: Vec<&MvPieces<F>> = built[first..].iter().map(|p| p.as_ref().expect("ok tail")).collect();
        let links: Vec<SimplicialMap> = family.maps[first..].iter().map(induced_by_coarsening).collect();
        let pieces = |sel: fn(&MvPieces<F>) -> &Piece<F>| run.iter().map(|pc| sel(pc)).collect::<Vec<_>>();
        let tw = [
            towers(&pieces(|p| &p.ab), &links, hi)?,
            towers(&pieces(|p| &p.a), &links, hi)?,
            towers(&pieces(|p| &p.b), &links, hi)?,
            towers(&pieces(|p| &p.x), &links, hi)?,
        ];
        let final_maps = mv_maps(run.last().expect("non-empty"), hi)?;
        Some(limit_sequence(&["A∩B", "A", "B", "X"], &tw, config.window, &final_maps, &labels, first)?)
    };
    let exact = stages.iter().filter_map(|s| s.exactness.as_ref()).all(|e| e.exact)
        && limit.as_ref().is_some_and(|l| l.exactness.exact);
    Ok(MvReport { excision, refusal: None, hi, stages, limit, exact })
}

fn intersection_nerve_iso<F: Field>(
    pc: &MvPieces<F>,
    cover: &GoodCover,
    n_points: usize,
    ab_points: &PointSet,
    hi: usize,
) -> Result<Vec<bool>> {
    let k_ab = restricted_subcomplex(&pc.complex, cover, n_points, ab_points);
    let lower = k_ab.intersection(&pc.frontier);
    let small = Piece::<F>::new(&pc.complex, k_ab, lower, HomologyMode::RelativeToFrontier, hi)?;
    (0..=hi)
        .map(|p| {
            let m = small.inclusion_into(&pc.ab, p)?;
            Ok(m.rows() == m.cols() && m.rank() == m.rows())
        })
        .collect()
}

/// Pair-sequence data of one stage.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct LesStage<F: Field> {
    pub stage: usize,
    pub scale: f64,
    pub ranks_sub: Vec<usize>,
    pub ranks_whole: Vec<usize>,
    pub ranks_pair: Vec<usize>,
    pub maps: Vec<LabeledMatrix<F>>,
    pub exactness: ExactnessReport,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct LesReport<F: Field> {
    pub hi: usize,
    pub stages: Vec<LesStage<F>>,
    pub limit: LimitSequence<F>,
    pub exact: bool,
}

struct LesPieces<F: Field> {
    a: Piece<F>,
    x: Piece<F>,
    pair: Piece<F>,
    frontier: Subcomplex,
}

fn les_labels(hi: usize) -> Vec<String> {
    let mut nodes = Vec::new();
    for p in (0..=hi).rev() {
        nodes.push(format!("H{p}(A)"));
        nodes.push(format!("H{p}(X)"));
        nodes.push(format!("H{p}(X,A)"));
    }
    nodes.push("0".into());
    nodes
}

/// Spaces are numbered `A = 0`, `X = 1`, `(X, A) = 2`.
fn les_maps<F: Field>(pc: &LesPieces<F>, hi: usize) -> Result<Vec<SeqMap<F>>> {
    let mut out = Vec::new();
    for p in (0..=hi).rev() {
        out.push(SeqMap::new(format!("i_{p}"), pc.a.inclusion_into(&pc.x, p)?, 0, 1, p));
        out.push(SeqMap::new(format!("j_{p}"), pc.x.inclusion_into(&pc.pair, p)?, 1, 2, p));
        if p > 0 {
            let (d, _) = connecting_map(&pc.pair.chain, &pc.pair.groups[p], None, &pc.frontier, &pc.a.chain, &pc.a.groups[p - 1])?;
            out.push(SeqMap::connecting(format!("∂_{p}"), d.matrix, 2, 0, p));
        }
    }
    out.push(SeqMap::zero(pc.pair.groups[0].rank, 2));
    Ok(out)
}

/// Checks the long exact sequence of the pair `(X, A)` on every stage and at the limit.
///
/// `A` is taken rel the part of its nerve meeting the frontier of `X`, and
/// the pair homology is that of the nerve rel `K_A` together with the frontier.
pub fn les_of_pair_check<F: Field>(space: &Arc<TruncatedCoarseSpace>, a: &PointSet, config: &ProfileConfig) -> Result<LesReport<F>> {
    space.check_set(a)?;
    let hi = config.hi;
    let family = family_for(space, config)?;
    let built = family
        .covers
        .par_iter()
        .map(|cover| {
            let complex = Arc::new(nerve(cover, space.len(), config.dim_cap()));
            let frontier = frontier_subcomplex(&complex, cover, space);
            let ka = restricted_subcomplex(&complex, cover, space.len(), a);
            let rel = HomologyMode::RelativeToFrontier;
            Ok(LesPieces {
                a: Piece::new(&complex, ka.clone(), ka.intersection(&frontier), rel, hi)?,
                x: Piece::new(&complex, complex.full(), frontier.clone(), rel, hi)?,
                pair: Piece::new(&complex, complex.full(), ka.union(&frontier), HomologyMode::RelativeToSubcomplex, hi)?,
                frontier,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let labels = les_labels(hi);
    let mut stages = Vec::new();
    for (k, (cover, pc)) in family.covers.iter().zip(&built).enumerate() {
        let maps = les_maps(pc, hi)?;
        stages.push(LesStage {
            stage: k + 1,
            scale: cover.scale,
            ranks_sub: pc.a.ranks(),
            ranks_whole: pc.x.ranks(),
            ranks_pair: pc.pair.ranks(),
            exactness: exactness_of(&maps, &labels)?,
            maps: labeled(maps),
        });
    }
    let links: Vec<SimplicialMap> = family.maps.iter().map(induced_by_coarsening).collect();
    let tw = [
        towers(&built.iter().map(|p| &p.a).collect::<Vec<_>>(), &links, hi)?,
        towers(&built.iter().map(|p| &p.x).collect::<Vec<_>>(), &links, hi)?,
        towers(&built.iter().map(|p| &p.pair).collect::<Vec<_>>(), &links, hi)?,
    ];
    let final_maps = les_maps(built.last().expect("a family has stages"), hi)?;
    let limit = limit_sequence(&["A", "X", "X,A"], &tw, config.window, &final_maps, &labels, 0)?;
    let exact = stages.iter().all(|s| s.exactness.exact) && limit.exactness.exact;
    Ok(LesReport { hi, stages, limit, exact })
}
