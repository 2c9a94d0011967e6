//! Good covers and coarsening families.
//!
//! Stage `k` of a family uses radii `R_1, ..., R_k`. Its cover sets are the
//! stage sections `M_k(x)` centred at a net `A_k`, a maximal `R_k`-sparse subset of `A_{k-1}`.
//! On metric spaces `M_k(x)` is the ball of radius `S_k = R_1 + ... + R_k`;
//! otherwise it is the composite section `M_{R_1}(M_{R_2}(... M_{R_k}(x)))`.
//! In both cases `x ∈ M_{R_j}(y)` gives `M_i(x) ⊆ M_j(y)` for `i < j`, which
//! is what makes the coarsening maps exist.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::coarse_space::{scale_ladder, PointSet, TruncatedCoarseSpace};
use crate::error::{CoarseError, Result};

/// One cover set: the stage section around a net point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverSet {
    pub center: usize,
    pub points: PointSet,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoodCover {
    /// Stage number, starting at 1.
    pub stage: usize,
    /// Radius `R_k` of the net.
    pub radius: f64,
    /// Cumulative scale `S_k`.
    pub scale: f64,
    pub net: PointSet,
    pub sets: Vec<CoverSet>,
    /// Largest number of sets containing one point.
    pub max_multiplicity: usize,
}

impl GoodCover {
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// For every point, the indices of the sets containing it.
    pub fn memberships(&self, n_points: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); n_points];
        for (i, set) in self.sets.iter().enumerate() {
            for x in set.points.iter() {
                out[x].push(i);
            }
        }
        out
    }

    /// The restricted cover `{U ∩ A}`, keeping the index of each set that meets `A`.
    pub fn restrict(&self, a: &PointSet) -> Vec<(usize, PointSet)> {
        self.sets
            .iter()
            .enumerate()
            .filter_map(|(i, s)| {
                let meet = s.points.intersection(a);
                (!meet.is_empty()).then_some((i, meet))
            })
            .collect()
    }

    pub fn covers(&self, n_points: usize) -> bool {
        self.memberships(n_points).iter().all(|m| !m.is_empty())
    }
}

/// Set-to-set assignment between consecutive stages.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoarseningMap {
    pub source_stage: usize,
    pub target_stage: usize,
    pub assignment: Vec<usize>,
}

impl CoarseningMap {
    /// `other ∘ self`.
    pub fn then(&self, other: &CoarseningMap) -> CoarseningMap {
        CoarseningMap {
            source_stage: self.source_stage,
            target_stage: other.target_stage,
            assignment: self.assignment.iter().map(|&v| other.assignment[v]).collect(),
        }
    }
}

/// How the radii `R_k` are chosen.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Schedule {
    /// `R_k = R_1 · 2^(k-1)` with `R_1` the smallest positive control value.
    Doubling,
    /// `R_k = k · R_1`.
    Increments,
    /// Explicit radii.
    Radii(Vec<f64>),
}

impl Schedule {
    /// Radii for a space, keeping every cumulative scale within the cap.
    ///
    /// The generated schedules close with one extra stage at exactly the cap.
    pub fn radii(&self, space: &TruncatedCoarseSpace) -> Result<Vec<f64>> {
        let cap = space.scale_cap();
        match self {
            Schedule::Radii(r) => {
                if r.is_empty() || r.iter().any(|&x| !(x > 0.0)) {
                    return Err(CoarseError::Precondition("radii must be positive and non-empty".into()));
                }
                let total: f64 = r.iter().sum();
                if total > cap {
                    return Err(CoarseError::ScaleExceedsCap { scale: total, cap });
                }
                Ok(r.clone())
            }
            Schedule::Doubling | Schedule::Increments => {
                let r1 = space.min_positive_control();
                if !r1.is_finite() {
                    // A single point: one stage is all there is.
                    return Ok(vec![cap.min(1.0)]);
                }
                let mut out = Vec::new();
                let mut total = 0.0;
                let mut k = 1u32;
                loop {
                    let r = match self {
                        Schedule::Doubling => r1 * 2f64.powi(k as i32 - 1),
                        _ => r1 * k as f64,
                    };
                    if total + r > cap {
                        break;
                    }
                    total += r;
                    out.push(r);
                    k += 1;
                }
                if out.is_empty() {
                    return Err(CoarseError::ScaleExceedsCap { scale: r1, cap });
                }
                // Final stage lands on the cap; it may be shorter than its predecessor.
                let rest = cap - total;
                if rest >= r1 {
                    out.push(rest);
                }
                Ok(out)
            }
        }
    }
}

/// Greedy net in point order: keep `x` when its control to every kept point exceeds `r`.
pub fn maximal_sparse_net(space: &TruncatedCoarseSpace, r: f64) -> Result<PointSet> {
    sparse_subnet(space, &PointSet::range(space.len()), r)
}

/// Greedy `r`-sparse subset of `candidates`, maximal among them.
pub fn sparse_subnet(space: &TruncatedCoarseSpace, candidates: &PointSet, r: f64) -> Result<PointSet> {
    if r > space.scale_cap() {
        return Err(CoarseError::ScaleExceedsCap { scale: r, cap: space.scale_cap() });
    }
    let mut net: Vec<usize> = Vec::new();
    for x in candidates.iter() {
        if net.iter().all(|&s| space.control(x, s) > r) {
            net.push(x);
        }
    }
    Ok(PointSet::from_sorted(net))
}

/// Nested nets `A_1 ⊇ A_2 ⊇ ...`: `A_k` is a maximal `R_k`-sparse subset of `A_{k-1}`.
///
/// Every point of `A_{k-1}` lies within `R_k` of `A_k`, which is all the
/// cover property and the coarsening maps need.
pub fn stage_nets(space: &TruncatedCoarseSpace, radii: &[f64]) -> Result<Vec<PointSet>> {
    let mut nets: Vec<PointSet> = Vec::with_capacity(radii.len());
    for &r in radii {
        let prev = nets.last().cloned().unwrap_or_else(|| PointSet::range(space.len()));
        nets.push(sparse_subnet(space, &prev, r)?);
    }
    Ok(nets)
}

/// The stage section `M_k(x)` for radii `R_1..R_k`.
pub fn stage_section(space: &TruncatedCoarseSpace, x: usize, radii: &[f64]) -> PointSet {
    if space.is_metric() {
        space.ball(x, radii.iter().sum())
    } else {
        radii
            .iter()
            .rev()
            .fold(PointSet::singleton(x), |set, &r| space.neighbourhood(&set, r))
    }
}

/// Cover at stage `k` from the first `k` radii.
pub fn cover_at_stage(space: &TruncatedCoarseSpace, k: usize, radii: &[f64]) -> Result<GoodCover> {
    if k == 0 || k > radii.len() {
        return Err(CoarseError::Precondition(format!("stage {k} needs radii R_1..R_{k}")));
    }
    let radii = &radii[..k];
    let scale: f64 = radii.iter().sum();
    if scale > space.scale_cap() {
        return Err(CoarseError::ScaleExceedsCap { scale, cap: space.scale_cap() });
    }
    let net = stage_nets(space, radii)?.pop().expect("k >= 1");
    let sets: Vec<CoverSet> = net
        .as_slice()
        .par_iter()
        .map(|&c| CoverSet { center: c, points: stage_section(space, c, radii) })
        .collect();
    let mut multiplicity = vec![0usize; space.len()];
    for s in &sets {
        for x in s.points.iter() {
            multiplicity[x] += 1;
        }
    }
    if let Some(x) = multiplicity.iter().position(|&m| m == 0) {
        return Err(CoarseError::Construction(format!("stage {k} cover misses point {x}")));
    }
    Ok(GoodCover {
        stage: k,
        radius: radii[k - 1],
        scale,
        net,
        sets,
        max_multiplicity: multiplicity.into_iter().max().unwrap_or(0),
    })
}

/// Sends each stage-`k` set to the stage-`k+1` set whose centre is nearest to
/// its own centre (ties to the smallest index), then checks containment.
pub fn coarsening_map(space: &TruncatedCoarseSpace, from: &GoodCover, to: &GoodCover) -> Result<CoarseningMap> {
    let assignment = from
        .sets
        .par_iter()
        .map(|u| {
            let (best, _) = to
                .sets
                .iter()
                .enumerate()
                .map(|(j, v)| (j, space.control(u.center, v.center)))
                .filter(|&(_, c)| c <= to.radius)
                .fold((usize::MAX, f64::INFINITY), |b, cur| if cur.1 < b.1 { cur } else { b });
            if best == usize::MAX {
                return Err(CoarseError::Construction(format!(
                    "no stage-{} centre within {} of point {}",
                    to.stage, to.radius, u.center
                )));
            }
            if !u.points.is_subset(&to.sets[best].points) {
                return Err(CoarseError::Construction(format!(
                    "set centred at {} is not contained in its image centred at {}",
                    u.center, to.sets[best].center
                )));
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CoarseningMap { source_stage: from.stage, target_stage: to.stage, assignment })
}

/// A directed family of good covers with coarsening maps between consecutive stages.
#[derive(Clone, Debug, Serialize)]
pub struct CoarseningFamily {
    #[serde(skip)]
    pub space: Arc<TruncatedCoarseSpace>,
    pub radii: Vec<f64>,
    pub covers: Vec<GoodCover>,
    pub maps: Vec<CoarseningMap>,
}

impl CoarseningFamily {
    pub fn build(space: Arc<TruncatedCoarseSpace>, schedule: &Schedule) -> Result<Self> {
        let radii = schedule.radii(&space)?;
        Self::from_radii(space, radii)
    }

    pub fn from_radii(space: Arc<TruncatedCoarseSpace>, radii: Vec<f64>) -> Result<Self> {
        let covers = (1..=radii.len())
            .into_par_iter()
            .map(|k| cover_at_stage(&space, k, &radii))
            .collect::<Result<Vec<_>>>()?;
        let maps = covers
            .par_windows(2)
            .map(|w| coarsening_map(&space, &w[0], &w[1]))
            .collect::<Result<Vec<_>>>()?;
        Ok(CoarseningFamily { space, radii, covers, maps })
    }

    pub fn stages(&self) -> usize {
        self.covers.len()
    }

    /// Cumulative scales `S_1, S_2, ...`.
    pub fn scales(&self) -> Vec<f64> {
        self.covers.iter().map(|c| c.scale).collect()
    }

    /// Composite coarsening map from stage index `i` to stage index `j >= i` (0-based).
    pub fn composite(&self, i: usize, j: usize) -> CoarseningMap {
        let identity = CoarseningMap {
            source_stage: i + 1,
            target_stage: i + 1,
            assignment: (0..self.covers[i].len()).collect(),
        };
        self.maps[i..j].iter().fold(identity, |acc, m| acc.then(m))
    }

    pub fn stage_section(&self, x: usize, stage: usize) -> PointSet {
        stage_section(&self.space, x, &self.radii[..stage])
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyReport {
    pub budget: f64,
    /// Every cover set lies in a stage section.
    pub sets_bounded: bool,
    /// For `i < j`, every stage-`i` section lies in some stage-`j` set.
    pub nested: bool,
    /// Every generator scale up to the budget is dominated by the last stage.
    pub dominating: bool,
    pub violations: Vec<String>,
}

impl FamilyReport {
    pub fn passed(&self) -> bool {
        self.sets_bounded && self.nested && self.dominating
    }
}

const MAX_VIOLATIONS: usize = 20;

pub fn validate_family(family: &CoarseningFamily, budget: f64) -> FamilyReport {
    let space = &family.space;
    let n = space.len();
    let mut violations = Vec::new();

    let mut sets_bounded = true;
    for cover in &family.covers {
        for set in &cover.sets {
            if !set.points.is_subset(&family.stage_section(set.center, cover.stage)) {
                sets_bounded = false;
                violations.push(format!(
                    "(a) stage {} set at {} leaves its stage section",
                    cover.stage, set.center
                ));
            }
        }
    }

    let sections: Vec<Vec<PointSet>> = (1..=family.stages())
        .map(|k| (0..n).into_par_iter().map(|x| family.stage_section(x, k)).collect())
        .collect();
    let mut nested = true;
    for i in 0..family.stages() {
        for j in (i + 1)..family.stages() {
            let target = &family.covers[j];
            let misses: Vec<usize> = (0..n)
                .into_par_iter()
                .filter(|&x| {
                    let section = &sections[i][x];
                    let mut order: Vec<usize> = (0..target.len()).collect();
                    order.sort_by(|&a, &b| {
                        space
                            .control(x, target.sets[a].center)
                            .total_cmp(&space.control(x, target.sets[b].center))
                    });
                    !order.iter().any(|&v| section.is_subset(&target.sets[v].points))
                })
                .collect();
            if let Some(&x) = misses.first() {
                nested = false;
                violations.push(format!(
                    "(b) stage-{} section at point {x} fits in no stage-{} set ({} points fail)",
                    i + 1,
                    j + 1,
                    misses.len()
                ));
            }
        }
    }

    let mut dominating = true;
    if let Some(last) = sections.last() {
        for r in scale_ladder(budget) {
            if r > space.scale_cap() {
                dominating = false;
                violations.push(format!("(c) scale {r} exceeds the cap"));
                break;
            }
            if let Some(x) = (0..n).find(|&x| !space.ball(x, r).is_subset(&last[x])) {
                dominating = false;
                violations.push(format!("(c) scale {r} is not dominated by any stage (first at point {x})"));
                break;
            }
        }
    }
    violations.truncate(MAX_VIOLATIONS);
    FamilyReport { budget, sets_bounded, nested, dominating, violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coarse_space::{Geometry, Structure};

    fn interval(lo: i64, hi: i64, cap: f64) -> TruncatedCoarseSpace {
        TruncatedCoarseSpace::new(
            (lo..=hi).map(|v| v.to_string()).collect(),
            Geometry::Euclidean { coords: (lo..=hi).map(|v| vec![v as f64]).collect() },
            Structure::Bounded,
            PointSet::new(),
            cap,
        )
        .unwrap()
    }

    #[test]
    fn doubling_schedule_stays_under_cap() {
        let s = interval(0, 200, 100.0);
        let r = Schedule::Doubling.radii(&s).unwrap();
        assert_eq!(r, vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 37.0]);
        let inc = Schedule::Increments.radii(&s).unwrap();
        assert_eq!(inc.len(), 14);
        assert_eq!(inc.iter().sum::<f64>(), 100.0);
    }

    #[test]
    fn composite_of_maps() {
        let s = Arc::new(interval(0, 40, 20.0));
        let fam = CoarseningFamily::build(s, &Schedule::Doubling).unwrap();
        let c = fam.composite(0, 2);
        let direct = fam.maps[0].then(&fam.maps[1]);
        assert_eq!(c, direct);
        assert_eq!(fam.composite(1, 1).assignment, (0..fam.covers[1].len()).collect::<Vec<_>>());
    }
}
