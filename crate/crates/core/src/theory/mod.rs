//! Direct-limit profiles and the structural checks built on them.
//!
//! A profile runs every stage of a coarsening family through the nerve and
//! homology rel frontier, then composes the structure maps into the final
//! stage. The limit group in degree `p` is the image of that composite from
//! the first stage of the stable tail; it is only called stable when the
//! composite ranks agree over the whole window.

mod homotopy;
mod sequences;

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::coarse_space::{are_close, CloseReport, PointMap, TruncatedCoarseSpace};
use crate::coarsening::{CoarseningFamily, GoodCover, Schedule};
use crate::error::{CoarseError, Result};
use crate::field::Field;
use crate::homology::{homology_range, induced_on_homology, ChainComplex, HomologyGroup, HomologyMode};
use crate::linalg::Matrix;
use crate::nerve::{
    frontier_subcomplex, induced_by_coarsening, induced_by_point_map, nerve, PushForward, SimplicialComplex,
    SimplicialMap, Subcomplex,
};

pub use homotopy::{validate_homotopy, GraphCheck, HomotopyData, HomotopyReport, LimitCheck, Threshold};
pub use sequences::{
    les_of_pair_check, mayer_vietoris_check, LabeledMatrix, LesReport, LesStage, LimitSequence, MvReport, MvStage,
};

/// Settings shared by profiles and sequence checks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileConfig {
    pub schedule: Schedule,
    pub lo: usize,
    pub hi: usize,
    /// Nerve dimension cap; defaults to `hi + 1`.
    pub dim_cap: Option<usize>,
    /// Number of trailing stages over which composite ranks must agree.
    pub window: usize,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig { schedule: Schedule::Doubling, lo: 0, hi: 2, dim_cap: None, window: 3 }
    }
}

impl ProfileConfig {
    pub fn new(schedule: Schedule, lo: usize, hi: usize) -> Self {
        ProfileConfig { schedule, lo, hi, ..Default::default() }
    }

    pub fn dim_cap(&self) -> usize {
        self.dim_cap.unwrap_or(self.hi + 1)
    }

    pub fn degrees(&self) -> std::ops::RangeInclusive<usize> {
        self.lo..=self.hi
    }

    pub fn validate(&self) -> Result<()> {
        if self.lo > self.hi {
            return Err(CoarseError::Precondition(format!("empty degree range {}..{}", self.lo, self.hi)));
        }
        if self.dim_cap() < self.hi + 1 {
            return Err(CoarseError::DegreeOutOfRange { degree: self.hi, dim_cap: self.dim_cap() });
        }
        if self.window == 0 {
            return Err(CoarseError::Precondition("stabilization window must be positive".into()));
        }
        Ok(())
    }
}

/// Nerve, frontier and homology rel frontier of one stage.
#[derive(Clone, Debug)]
pub struct Stage<F: Field> {
    pub complex: Arc<SimplicialComplex>,
    pub frontier: Subcomplex,
    pub chain: ChainComplex<F>,
    pub lo: usize,
    pub groups: Vec<HomologyGroup<F>>,
}

impl<F: Field> Stage<F> {
    pub fn build(space: &TruncatedCoarseSpace, cover: &GoodCover, config: &ProfileConfig) -> Result<Self> {
        let complex = Arc::new(nerve(cover, space.len(), config.dim_cap()));
        let frontier = frontier_subcomplex(&complex, cover, space);
        let chain = ChainComplex::relative(complex.clone(), complex.full(), frontier.clone(), HomologyMode::RelativeToFrontier)?;
        let groups = homology_range(&chain, config.degrees())?;
        Ok(Stage { complex, frontier, chain, lo: config.lo, groups })
    }

    pub fn group(&self, p: usize) -> &HomologyGroup<F> {
        &self.groups[p - self.lo]
    }
}

/// Structure maps of one degree along a run of stages, and their composites into the last stage.
#[derive(Clone, Debug)]
pub struct Tower<F: Field> {
    pub ranks: Vec<usize>,
    /// Stage `k` to stage `k + 1`.
    pub maps: Vec<Matrix<F>>,
    /// Stage `k` to the last stage.
    pub composites: Vec<Matrix<F>>,
}

impl<F: Field> Tower<F> {
    pub fn new(ranks: Vec<usize>, maps: Vec<Matrix<F>>) -> Self {
        let n = ranks.len();
        let mut composites = vec![Matrix::identity(ranks[n - 1])];
        for k in (0..n - 1).rev() {
            let next = composites.last().expect("non-empty").mul(&maps[k]);
            composites.push(next);
        }
        composites.reverse();
        Tower { ranks, maps, composites }
    }

    /// Builds the tower of `H_p` from chain complexes linked by vertex maps.
    pub fn from_levels(levels: &[(&ChainComplex<F>, &HomologyGroup<F>)], links: &[SimplicialMap]) -> Result<Self> {
        let maps = links
            .par_iter()
            .enumerate()
            .map(|(k, phi)| {
                let (sc, sh) = levels[k];
                let (tc, th) = levels[k + 1];
                Ok(induced_on_homology(phi, sc, sh, tc, th)?.matrix)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Tower::new(levels.iter().map(|(_, h)| h.rank).collect(), maps))
    }

    pub fn stages(&self) -> usize {
        self.ranks.len()
    }

    pub fn composite_ranks(&self) -> Vec<usize> {
        self.composites.iter().map(Matrix::rank).collect()
    }

    /// Composite from stage `i` to stage `j >= i`.
    pub fn between(&self, i: usize, j: usize) -> Matrix<F> {
        self.maps[i..j].iter().fold(Matrix::identity(self.ranks[i]), |acc, m| m.mul(&acc))
    }

    pub fn limit(&self, window: usize) -> Limit<F> {
        let ranks = self.composite_ranks();
        let n = ranks.len();
        let last = ranks[n - 1];
        let tail_start = (0..n).rev().take_while(|&k| ranks[k] == last).last().unwrap_or(n - 1);
        let (basis_stage, stabilization) = if n - tail_start >= window {
            (tail_start, Stabilization::Stable { from_stage: tail_start + 1 })
        } else {
            let s = n.saturating_sub(window);
            let reason = if n < window {
                format!("only {n} stages for a window of {window}")
            } else {
                format!("composite ranks {:?} vary inside the last {window} stages", &ranks[s..])
            };
            (s, Stabilization::Inconclusive { reason })
        };
        let comp = &self.composites[basis_stage];
        let pivots = comp.column_basis();
        Limit { rank: pivots.len(), basis_stage, basis: comp.select_columns(&pivots), stabilization }
    }
}

/// Whether the composite ranks settle within the window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Stabilization {
    Stable { from_stage: usize },
    Inconclusive { reason: String },
}

impl Stabilization {
    pub fn is_stable(&self) -> bool {
        matches!(self, Stabilization::Stable { .. })
    }
}

/// The limit group as a subspace of the last stage's homology.
#[derive(Clone, Debug)]
pub struct Limit<F: Field> {
    pub rank: usize,
    /// Stage (0-based) whose composite image spans the limit.
    pub basis_stage: usize,
    /// Columns: a basis of the limit, in last-stage coordinates.
    pub basis: Matrix<F>,
    pub stabilization: Stabilization,
}

impl<F: Field> Limit<F> {
    /// Preimages of the limit basis at `stage`, which must be at or after the basis stage.
    pub fn lifts(&self, tower: &Tower<F>, stage: usize) -> Result<Matrix<F>> {
        let comp = &tower.composites[stage];
        let cols = (0..self.rank)
            .map(|c| {
                comp.solve(&self.basis.column(c)).ok_or_else(|| {
                    CoarseError::Construction(format!("limit class {c} does not come from stage {}", stage + 1))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Matrix::from_columns(tower.ranks[stage], &cols))
    }

    /// Coordinates of last-stage vectors (columns of `m`) in the limit basis.
    pub fn coordinates(&self, m: &Matrix<F>) -> Option<Matrix<F>> {
        let cols = (0..m.cols()).map(|c| self.basis.solve(&m.column(c))).collect::<Option<Vec<_>>>()?;
        Some(Matrix::from_columns(self.rank, &cols))
    }
}

/// Restriction of a last-stage map to limit subspaces, if it preserves them.
pub fn restrict_to_limits<F: Field>(m: &Matrix<F>, source: &Matrix<F>, target: &Matrix<F>) -> Option<Matrix<F>> {
    let image = m.mul(source);
    let cols = (0..image.cols()).map(|c| target.solve(&image.column(c))).collect::<Option<Vec<_>>>()?;
    Some(Matrix::from_columns(target.cols(), &cols))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeSummary {
    pub degree: usize,
    pub ranks: Vec<usize>,
    /// Rank of the structure map from each stage to the next.
    pub map_ranks: Vec<usize>,
    /// Rank of the composite from each stage into the last.
    pub composite_ranks: Vec<usize>,
    pub limit_rank: usize,
    pub stabilization: Stabilization,
}

/// Per-degree ranks, structure maps and limits of one space.
#[derive(Clone, Debug)]
pub struct CoarseHomologyProfile<F: Field> {
    pub space: Arc<TruncatedCoarseSpace>,
    pub family: CoarseningFamily,
    pub config: ProfileConfig,
    pub stages: Vec<Stage<F>>,
    pub towers: Vec<Tower<F>>,
    pub limits: Vec<Limit<F>>,
    pub summaries: Vec<DegreeSummary>,
}

pub fn coarse_homology_profile<F: Field>(
    space: Arc<TruncatedCoarseSpace>,
    config: &ProfileConfig,
) -> Result<CoarseHomologyProfile<F>> {
    config.validate()?;
    if space.is_empty() {
        return Err(CoarseError::InvalidSpace("the space has no points".into()));
    }
    let family = CoarseningFamily::build(space.clone(), &config.schedule)?;
    profile_of_family(family, config)
}

/// Profile along an already built family.
pub fn profile_of_family<F: Field>(family: CoarseningFamily, config: &ProfileConfig) -> Result<CoarseHomologyProfile<F>> {
    config.validate()?;
    let space = family.space.clone();
    let stages = family
        .covers
        .par_iter()
        .map(|c| Stage::build(&space, c, config))
        .collect::<Result<Vec<_>>>()?;
    let links: Vec<SimplicialMap> = family.maps.iter().map(induced_by_coarsening).collect();
    let towers = config
        .degrees()
        .map(|p| {
            let levels: Vec<_> = stages.iter().map(|s| (&s.chain, s.group(p))).collect();
            Tower::from_levels(&levels, &links)
        })
        .collect::<Result<Vec<_>>>()?;
    let limits: Vec<Limit<F>> = towers.iter().map(|t| t.limit(config.window)).collect();
    let summaries = config
        .degrees()
        .zip(towers.iter().zip(&limits))
        .map(|(p, (t, l))| DegreeSummary {
            degree: p,
            ranks: t.ranks.clone(),
            map_ranks: t.maps.iter().map(Matrix::rank).collect(),
            composite_ranks: t.composite_ranks(),
            limit_rank: l.rank,
            stabilization: l.stabilization.clone(),
        })
        .collect();
    Ok(CoarseHomologyProfile { space, family, config: config.clone(), stages, towers, limits, summaries })
}

impl<F: Field> CoarseHomologyProfile<F> {
    fn index(&self, p: usize) -> Result<usize> {
        if p < self.config.lo || p > self.config.hi {
            return Err(CoarseError::DegreeOutOfRange { degree: p, dim_cap: self.config.dim_cap() });
        }
        Ok(p - self.config.lo)
    }

    pub fn summary(&self, p: usize) -> Result<&DegreeSummary> {
        Ok(&self.summaries[self.index(p)?])
    }

    pub fn limit_rank(&self, p: usize) -> Result<usize> {
        Ok(self.limits[self.index(p)?].rank)
    }

    pub fn limit(&self, p: usize) -> Result<&Limit<F>> {
        Ok(&self.limits[self.index(p)?])
    }

    pub fn tower(&self, p: usize) -> Result<&Tower<F>> {
        Ok(&self.towers[self.index(p)?])
    }

    pub fn limit_ranks(&self) -> Vec<usize> {
        self.limits.iter().map(|l| l.rank).collect()
    }

    pub fn is_stable(&self) -> bool {
        self.limits.iter().all(|l| l.stabilization.is_stable())
    }

    pub fn scales(&self) -> Vec<f64> {
        self.family.scales()
    }

    /// Simplex counts per dimension at each stage.
    pub fn complex_sizes(&self) -> Vec<Vec<usize>> {
        self.stages.iter().map(|s| s.complex.counts()).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "points": self.space.len(),
            "scale_cap": self.space.scale_cap(),
            "radii": self.family.radii,
            "scales": self.scales(),
            "complex_sizes": self.complex_sizes(),
            "field_characteristic": F::CHARACTERISTIC,
            "mode": HomologyMode::RelativeToFrontier,
            "degrees": self.summaries,
            "limit_ranks": self.limit_ranks(),
            "stable": self.is_stable(),
        })
    }
}

/// A point map on one degree of the limit.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct LimitMap<F: Field> {
    pub degree: usize,
    /// Source stage (1-based) whose classes were pushed forward.
    pub source_stage: usize,
    /// Target stage (1-based) receiving them.
    pub target_stage: usize,
    pub matrix: Matrix<F>,
    /// Classes dying in the source also die in the target.
    pub well_defined: bool,
    pub isomorphism: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct InducedProfileMap<F: Field> {
    pub degrees: Vec<LimitMap<F>>,
    pub isomorphism: bool,
}

impl<F: Field> InducedProfileMap<F> {
    pub fn degree(&self, p: usize) -> Option<&LimitMap<F>> {
        self.degrees.iter().find(|m| m.degree == p)
    }
}

fn check_profiles<F: Field>(f: &PointMap, px: &CoarseHomologyProfile<F>, py: &CoarseHomologyProfile<F>) -> Result<()> {
    if **f.source() != *px.space || **f.target() != *py.space {
        return Err(CoarseError::MismatchedSpaces("map and profiles live on different spaces".into()));
    }
    if px.config.degrees() != py.config.degrees() || px.config.dim_cap() != py.config.dim_cap() {
        return Err(CoarseError::MismatchedSpaces("profiles use different degree ranges".into()));
    }
    Ok(())
}

/// First source stage at or after `from` whose cover pushes into the target family.
fn push_from<F: Field>(
    maps: &[&PointMap],
    px: &CoarseHomologyProfile<F>,
    py: &CoarseHomologyProfile<F>,
    from: usize,
) -> Result<(usize, Vec<PushForward>)> {
    let mut last = None;
    for s in from..px.stages.len() {
        match maps
            .iter()
            .map(|f| induced_by_point_map(f, &px.family.covers[s], &py.family, 0))
            .collect::<Result<Vec<_>>>()
        {
            Ok(pushes) => return Ok((s, pushes)),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| CoarseError::NoAdmissibleStage("the source family has no stages".into())))
}

/// `H_p(X_s) → H_p(Y_last)` for one pushed-forward stage.
fn to_last_stage<F: Field>(
    push: &PushForward,
    s: usize,
    p: usize,
    px: &CoarseHomologyProfile<F>,
    py: &CoarseHomologyProfile<F>,
) -> Result<Matrix<F>> {
    let (src, tgt) = (&px.stages[s], &py.stages[push.target_stage]);
    let stage_map = induced_on_homology(&push.map, &src.chain, src.group(p), &tgt.chain, tgt.group(p))?;
    Ok(py.tower(p)?.composites[push.target_stage].mul(&stage_map.matrix))
}

fn limit_matrix<F: Field>(
    g: &Matrix<F>,
    s: usize,
    p: usize,
    px: &CoarseHomologyProfile<F>,
    py: &CoarseHomologyProfile<F>,
) -> Result<(Matrix<F>, bool)> {
    let (lx, ly) = (px.limit(p)?, py.limit(p)?);
    let tx = px.tower(p)?;
    let lifts = lx.lifts(tx, s)?;
    let matrix = ly
        .coordinates(&g.mul(&lifts))
        .ok_or_else(|| CoarseError::Construction(format!("degree {p}: image leaves the target limit")))?;
    let well_defined = tx.composites[s].kernel().iter().all(|k| g.apply(k).iter().all(|v| v.is_zero()));
    Ok((matrix, well_defined))
}

fn source_start<F: Field>(px: &CoarseHomologyProfile<F>) -> usize {
    px.limits.iter().map(|l| l.basis_stage).max().unwrap_or(0)
}

/// Limit-level matrices of `f_*` in every profiled degree.
pub fn induced_profile_map<F: Field>(
    f: &PointMap,
    px: &CoarseHomologyProfile<F>,
    py: &CoarseHomologyProfile<F>,
) -> Result<InducedProfileMap<F>> {
    check_profiles(f, px, py)?;
    let (s, pushes) = push_from(&[f], px, py, source_start(px))?;
    let push = &pushes[0];
    let degrees = px
        .config
        .degrees()
        .map(|p| {
            let g = to_last_stage(push, s, p, px, py)?;
            let (matrix, well_defined) = limit_matrix(&g, s, p, px, py)?;
            let isomorphism = matrix.rows() == matrix.cols() && matrix.rank() == matrix.rows();
            Ok(LimitMap { degree: p, source_stage: s + 1, target_stage: push.target_stage + 1, matrix, well_defined, isomorphism })
        })
        .collect::<Result<Vec<_>>>()?;
    let isomorphism = degrees.iter().all(|m| m.isomorphism && m.well_defined);
    Ok(InducedProfileMap { degrees, isomorphism })
}

#[derive(Clone, Debug, Serialize)]
pub struct CloseDegree {
    pub degree: usize,
    pub source_stage: usize,
    /// Stages beyond the later of the two target stages after which the maps agree.
    pub shift: Option<usize>,
    pub limit_equal: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CloseAgreement {
    pub closeness: CloseReport,
    pub budget: f64,
    pub degrees: Vec<CloseDegree>,
    pub agree: bool,
    /// `agree`, or `inconclusive` when some degree never coincides within the family.
    pub verdict: &'static str,
}

/// Checks that close maps induce the same maps on limits.
///
/// Both maps push the same source stage forward. Their images are then
/// carried along the target family until the matrices coincide; the number
/// of extra stages needed is the reported shift.
pub fn close_maps_agree<F: Field>(
    f: &PointMap,
    g: &PointMap,
    px: &CoarseHomologyProfile<F>,
    py: &CoarseHomologyProfile<F>,
    budget: f64,
) -> Result<CloseAgreement> {
    check_profiles(f, px, py)?;
    check_profiles(g, px, py)?;
    let closeness = are_close(f, g)?;
    if !(closeness.close && closeness.witness <= budget) {
        return Err(CoarseError::Precondition(format!(
            "maps are not close within budget {budget}: witness {} (cap {})",
            closeness.witness, closeness.cap
        )));
    }
    let (s, pushes) = push_from(&[f, g], px, py, source_start(px))?;
    let (pf, pg) = (&pushes[0], &pushes[1]);
    let last = py.stages.len() - 1;
    let mut degrees = Vec::new();
    for p in px.config.degrees() {
        let (src, ty) = (&px.stages[s], py.tower(p)?);
        let lifts = px.limit(p)?.lifts(px.tower(p)?, s)?;
        let stage_image = |push: &PushForward| -> Result<Matrix<F>> {
            let tgt = &py.stages[push.target_stage];
            Ok(induced_on_homology(&push.map, &src.chain, src.group(p), &tgt.chain, tgt.group(p))?.matrix.mul(&lifts))
        };
        let (mf, mg) = (stage_image(pf)?, stage_image(pg)?);
        let j0 = pf.target_stage.max(pg.target_stage);
        let shift = (0..=last - j0).find(|&t| {
            ty.between(pf.target_stage, j0 + t).mul(&mf) == ty.between(pg.target_stage, j0 + t).mul(&mg)
        });
        let lf = limit_matrix(&to_last_stage(pf, s, p, px, py)?, s, p, px, py)?.0;
        let lg = limit_matrix(&to_last_stage(pg, s, p, px, py)?, s, p, px, py)?.0;
        degrees.push(CloseDegree { degree: p, source_stage: s + 1, shift, limit_equal: lf == lg });
    }
    let agree = degrees.iter().all(|d| d.limit_equal);
    let conclusive = degrees.iter().all(|d| d.shift.is_some());
    Ok(CloseAgreement {
        closeness,
        budget,
        degrees,
        agree,
        verdict: if agree && conclusive { "agree" } else if !conclusive { "inconclusive" } else { "disagree" },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coarse_space::{Geometry, PointSet, Structure};
    use crate::field::F2;

    fn line(lo: i64, hi: i64, cap: f64) -> Arc<TruncatedCoarseSpace> {
        let n = (hi - lo) as usize;
        let frontier = if lo == 0 { vec![n] } else { vec![0, n] };
        Arc::new(
            TruncatedCoarseSpace::new(
                (lo..=hi).map(|v| v.to_string()).collect(),
                Geometry::Euclidean { coords: (lo..=hi).map(|v| vec![v as f64]).collect() },
                Structure::Bounded,
                PointSet::from_sorted(frontier),
                cap,
            )
            .unwrap(),
        )
    }

    #[test]
    fn line_and_ray_limits() {
        let cfg = ProfileConfig::default();
        let l = coarse_homology_profile::<F2>(line(-40, 40, 20.0), &cfg).unwrap();
        assert_eq!(l.limit_ranks(), vec![0, 1, 0]);
        assert!(l.is_stable());
        let r = coarse_homology_profile::<F2>(line(0, 40, 20.0), &cfg).unwrap();
        assert_eq!(r.limit_ranks(), vec![0, 0, 0]);
    }

    #[test]
    fn tower_composites() {
        let one = F2(true);
        let t = Tower::new(vec![1, 1, 1], vec![Matrix::from_rows(&[vec![one]]), Matrix::from_rows(&[vec![one]])]);
        assert_eq!(t.composite_ranks(), vec![1, 1, 1]);
        assert!(t.limit(3).stabilization.is_stable());
        assert!(!t.limit(4).stabilization.is_stable());
    }
}
