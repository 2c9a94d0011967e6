use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::space::{PointSet, TruncatedCoarseSpace};
use super::FRONTIER_CONVENTION;
use crate::error::{CoarseError, Result};

/// A total map between the point sets of two spaces.
#[derive(Clone, Debug)]
pub struct PointMap {
    source: Arc<TruncatedCoarseSpace>,
    target: Arc<TruncatedCoarseSpace>,
    images: Vec<usize>,
}

impl PointMap {
    pub fn new(
        source: Arc<TruncatedCoarseSpace>,
        target: Arc<TruncatedCoarseSpace>,
        images: Vec<usize>,
    ) -> Result<Self> {
        if images.len() != source.len() {
            return Err(CoarseError::MismatchedSpaces(format!(
                "assignment has {} entries for {} source points",
                images.len(),
                source.len()
            )));
        }
        if let Some(&bad) = images.iter().find(|&&y| y >= target.len()) {
            return Err(CoarseError::PointOutOfRange { index: bad, len: target.len() });
        }
        Ok(PointMap { source, target, images })
    }

    pub fn from_fn(
        source: Arc<TruncatedCoarseSpace>,
        target: Arc<TruncatedCoarseSpace>,
        f: impl Fn(usize) -> usize,
    ) -> Result<Self> {
        let images = (0..source.len()).map(f).collect();
        Self::new(source, target, images)
    }

    pub fn identity(space: Arc<TruncatedCoarseSpace>) -> Self {
        let images = (0..space.len()).collect();
        PointMap { source: space.clone(), target: space, images }
    }

    pub fn source(&self) -> &Arc<TruncatedCoarseSpace> {
        &self.source
    }

    pub fn target(&self) -> &Arc<TruncatedCoarseSpace> {
        &self.target
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn image_of(&self, set: &PointSet) -> PointSet {
        set.iter().map(|x| self.images[x]).collect()
    }

    pub fn preimage(&self, set: &PointSet) -> PointSet {
        PointSet::from_sorted((0..self.images.len()).filter(|&x| set.contains(self.images[x])).collect())
    }

    /// `after ∘ self`.
    pub fn then(&self, after: &PointMap) -> Result<PointMap> {
        if !same_space(&self.target, &after.source) {
            return Err(CoarseError::MismatchedSpaces("composition: target and source differ".into()));
        }
        Ok(PointMap {
            source: self.source.clone(),
            target: after.target.clone(),
            images: self.images.iter().map(|&y| after.images[y]).collect(),
        })
    }
}

pub(crate) fn same_space(a: &Arc<TruncatedCoarseSpace>, b: &Arc<TruncatedCoarseSpace>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Integer scales `0, 1, ..., ⌊budget⌋`, plus `budget` itself when fractional.
pub fn scale_ladder(budget: f64) -> Vec<f64> {
    if !(budget >= 0.0) {
        return Vec::new();
    }
    let mut out: Vec<f64> = (0..=budget.floor() as u64).map(|r| r as f64).collect();
    if budget.fract() > 0.0 {
        out.push(budget);
    }
    out
}

/// Closeness verdict for two maps.
#[derive(Clone, Debug, Serialize)]
pub struct CloseReport {
    pub close: bool,
    /// Minimal scale `R` with `(f(s), g(s)) ∈ M_R` for every `s`.
    pub witness: f64,
    pub cap: f64,
}

/// Are `f` and `g` close? The witness is exact; the verdict also requires it to be within the target cap.
pub fn are_close(f: &PointMap, g: &PointMap) -> Result<CloseReport> {
    if !same_space(&f.source, &g.source) || !same_space(&f.target, &g.target) {
        return Err(CoarseError::MismatchedSpaces("closeness needs a common source and target".into()));
    }
    let target = &f.target;
    let witness = (0..f.images.len())
        .map(|s| target.control(f.images[s], g.images[s]))
        .fold(0.0, f64::max);
    Ok(CloseReport { close: witness <= target.scale_cap(), witness, cap: target.scale_cap() })
}

/// `S(R)` for one source scale.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaleWitness {
    pub scale: f64,
    /// Minimal target scale; `None` if some pair is infinitely far apart in the target.
    pub image_scale: Option<f64>,
}

/// A source frontier point sent too far from the target frontier.
#[derive(Clone, Debug, Serialize)]
pub struct ProperFailure {
    pub point: usize,
    pub image: usize,
    pub distance_to_frontier: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoarseMapReport {
    pub budget: f64,
    pub witnesses: Vec<ScaleWitness>,
    /// Every `S(R)` exists and lies within the target cap.
    pub uniformly_expansive: bool,
    pub proper: bool,
    pub proper_failures: Vec<ProperFailure>,
    pub coarse: bool,
    pub convention: &'static str,
}

const MAX_LISTED_FAILURES: usize = 16;

/// Checks a map for uniform expansiveness and properness up to `budget`.
///
/// The frontier stands in for infinity, so properness asks that points at
/// infinity stay near infinity: every source frontier point must land within
/// `budget` of the target frontier. Otherwise a target ball well inside the
/// model would have a preimage reaching the source frontier.
pub fn validate_coarse_map(f: &PointMap, budget: f64) -> CoarseMapReport {
    let ladder = scale_ladder(budget);
    let witnesses = expansion_witnesses(f, &ladder);
    let cap = f.target.scale_cap();
    let uniformly_expansive = witnesses.iter().all(|w| matches!(w.image_scale, Some(s) if s <= cap));
    let proper_failures = properness_failures(f, budget);
    let proper = proper_failures.is_empty();
    CoarseMapReport {
        budget,
        witnesses,
        uniformly_expansive,
        proper,
        proper_failures,
        coarse: uniformly_expansive && proper,
        convention: FRONTIER_CONVENTION,
    }
}

fn expansion_witnesses(f: &PointMap, ladder: &[f64]) -> Vec<ScaleWitness> {
    let Some(&top) = ladder.last() else {
        return Vec::new();
    };
    let (src, tgt) = (&f.source, &f.target);
    let n = src.len();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|x| {
            ((x + 1)..n).filter_map(move |y| {
                let c = src.control(x, y);
                (c <= top).then(|| (c, tgt.control(f.images[x], f.images[y])))
            })
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Vec::with_capacity(ladder.len());
    let mut running = 0.0_f64;
    let mut i = 0;
    for &r in ladder {
        while i < pairs.len() && pairs[i].0 <= r {
            running = running.max(pairs[i].1);
            i += 1;
        }
        let image_scale = running.is_finite().then_some(running);
        out.push(ScaleWitness { scale: r, image_scale });
    }
    out
}

fn properness_failures(f: &PointMap, budget: f64) -> Vec<ProperFailure> {
    let tgt = &f.target;
    let mut failures: Vec<ProperFailure> = f
        .source
        .frontier()
        .iter()
        .filter_map(|x| {
            let y = f.images[x];
            let d = tgt.control_to_set(y, tgt.frontier());
            (d > budget).then_some(ProperFailure { point: x, image: y, distance_to_frontier: d })
        })
        .collect();
    failures.truncate(MAX_LISTED_FAILURES);
    failures
}

/// Boundedness verdict with its witness.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundedReport {
    pub bounded: bool,
    /// Minimal generator scale `R` with `B ⊆ M_R(center)`.
    pub scale: f64,
    pub center: Option<usize>,
    pub touches_frontier: bool,
    pub convention: &'static str,
}

/// Minimal scale and centre with `B ⊆ M_R(x)`; ties go to the smallest index.
///
/// The empty set is bounded at scale 0 with no centre. A set touching the
/// frontier, or one needing a scale above the cap, is unbounded at cap; the
/// minimal scale found is still reported.
pub fn is_bounded(space: &TruncatedCoarseSpace, b: &PointSet) -> Result<BoundedReport> {
    space.check_set(b)?;
    if b.is_empty() {
        return Ok(BoundedReport {
            bounded: true,
            scale: 0.0,
            center: None,
            touches_frontier: false,
            convention: FRONTIER_CONVENTION,
        });
    }
    let (center, scale) = (0..space.len())
        .map(|x| (x, b.iter().map(|y| space.control(x, y)).fold(0.0, f64::max)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    let touches_frontier = space.touches_frontier(b);
    Ok(BoundedReport {
        bounded: !touches_frontier && scale <= space.scale_cap(),
        scale,
        center: Some(center),
        touches_frontier,
        convention: FRONTIER_CONVENTION,
    })
}
