use std::sync::Arc;

use serde::Serialize;

use super::maps::{scale_ladder, validate_coarse_map, CoarseMapReport, PointMap, ScaleWitness};
use super::space::{Geometry, PointSet, Structure, TruncatedCoarseSpace};
use crate::error::{CoarseError, Result};

/// Offset added to every cross-component control value, so that distinct
/// points never sit at control zero.
pub const CROSS_GAP: f64 = 1.0;

/// Disjoint union with its component bookkeeping.
#[derive(Clone, Debug)]
pub struct DisjointUnion {
    pub space: Arc<TruncatedCoarseSpace>,
    /// Global index of the first point of each component.
    pub offsets: Vec<usize>,
    /// Global index of each component's base point.
    pub bases: Vec<usize>,
}

impl DisjointUnion {
    pub fn component_of(&self, x: usize) -> usize {
        self.offsets.partition_point(|&o| o <= x) - 1
    }

    /// Inclusion of component `i`, given the component space itself.
    pub fn inclusion(&self, i: usize, component: Arc<TruncatedCoarseSpace>) -> Result<PointMap> {
        let off = self.offsets[i];
        PointMap::from_fn(component, self.space.clone(), |x| off + x)
    }

    /// Global indices of component `i`.
    pub fn component(&self, i: usize) -> PointSet {
        let end = self.offsets.get(i + 1).copied().unwrap_or(self.space.len());
        PointSet::from_sorted((self.offsets[i]..end).collect())
    }
}

/// Coproduct of spaces.
///
/// Each component keeps its own generators; across components the scale-`R`
/// generator adds the block `M_R(b_i) × M_R(b_j)` around the base points
/// (each component's first point). Any product of bounded sets sits in such a
/// block, so these generate the coproduct structure. A single space is returned unchanged.
pub fn disjoint_union(spaces: &[&TruncatedCoarseSpace]) -> Result<DisjointUnion> {
    match spaces {
        [] => Err(CoarseError::InvalidSpace("disjoint union of no spaces".into())),
        [only] => Ok(DisjointUnion {
            space: Arc::new((*only).clone()),
            offsets: vec![0],
            bases: vec![0],
        }),
        _ => {
            let mut offsets = Vec::with_capacity(spaces.len());
            let mut total = 0;
            for s in spaces {
                offsets.push(total);
                total += s.len();
            }
            let mut labels = Vec::with_capacity(total);
            let mut frontier = Vec::new();
            for (i, s) in spaces.iter().enumerate() {
                labels.extend(s.labels().iter().map(|l| format!("{i}:{l}")));
                frontier.extend(s.frontier().iter().map(|x| offsets[i] + x));
            }
            let mut distances = vec![0.0; total * total];
            for (i, si) in spaces.iter().enumerate() {
                for (j, sj) in spaces.iter().enumerate() {
                    for x in 0..si.len() {
                        let row = (offsets[i] + x) * total + offsets[j];
                        for y in 0..sj.len() {
                            distances[row + y] = if i == j {
                                si.control(x, y)
                            } else {
                                si.control(x, 0).max(sj.control(y, 0)) + CROSS_GAP
                            };
                        }
                    }
                }
            }
            let cap = spaces.iter().map(|s| s.scale_cap()).fold(f64::INFINITY, f64::min);
            let space = TruncatedCoarseSpace::new(
                labels,
                Geometry::Matrix { distances },
                Structure::Bounded,
                frontier.into_iter().collect(),
                cap,
            )?;
            Ok(DisjointUnion { space: Arc::new(space), bases: offsets.clone(), offsets })
        }
    }
}

/// Quotient space with its projection.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub space: Arc<TruncatedCoarseSpace>,
    pub projection: PointMap,
    pub classes: Vec<PointSet>,
    /// Whether the projection passed `validate_coarse_map` within the given budget.
    pub projection_report: CoarseMapReport,
}

/// Quotient by a partition. The scale-`R` generator is `π[D_R]`, so the
/// control of two classes is the least control between representatives.
/// Classes are ordered by their smallest member; a class touching the
/// frontier is a frontier point of the quotient.
pub fn quotient(space: Arc<TruncatedCoarseSpace>, classes: Vec<Vec<usize>>, budget: f64) -> Result<Quotient> {
    let n = space.len();
    let mut class_of = vec![usize::MAX; n];
    let mut sets: Vec<PointSet> = classes.into_iter().map(|c| c.into_iter().collect()).collect();
    if let Some(i) = sets.iter().position(PointSet::is_empty) {
        return Err(CoarseError::NotAPartition(format!("class {i} is empty")));
    }
    sets.sort_by_key(|c| c.first());
    for (k, class) in sets.iter().enumerate() {
        for x in class.iter() {
            space.check_point(x)?;
            if class_of[x] != usize::MAX {
                return Err(CoarseError::NotAPartition(format!("point {x} lies in two classes")));
            }
            class_of[x] = k;
        }
    }
    if let Some(x) = class_of.iter().position(|&c| c == usize::MAX) {
        return Err(CoarseError::NotAPartition(format!("point {x} lies in no class")));
    }
    let m = sets.len();
    let mut distances = vec![f64::INFINITY; m * m];
    for x in 0..n {
        for y in 0..n {
            let (a, b) = (class_of[x], class_of[y]);
            if a == b {
                continue;
            }
            let c = space.control(x, y);
            if c < distances[a * m + b] {
                distances[a * m + b] = c;
            }
        }
    }
    for k in 0..m {
        distances[k * m + k] = 0.0;
    }
    let labels = sets
        .iter()
        .map(|c| c.iter().map(|x| space.label(x).to_string()).collect::<Vec<_>>().join("~"))
        .collect();
    let frontier: PointSet = space.frontier().iter().map(|x| class_of[x]).collect();
    let qspace = Arc::new(TruncatedCoarseSpace::new(
        labels,
        Geometry::Matrix { distances },
        Structure::Bounded,
        frontier,
        space.scale_cap(),
    )?);
    let projection = PointMap::new(space, qspace.clone(), class_of)?;
    let projection_report = validate_coarse_map(&projection, budget);
    Ok(Quotient { space: qspace, projection, classes: sets, projection_report })
}

/// Cartesian product with `ℓ∞` control: `((x, y), (x', y')) ↦ max(c(x, x'), c(y, y'))`.
#[derive(Clone, Debug)]
pub struct Product {
    pub space: Arc<TruncatedCoarseSpace>,
    pub left: Arc<TruncatedCoarseSpace>,
    pub right: Arc<TruncatedCoarseSpace>,
}

/// Largest product the dense control matrix is built for.
pub const PRODUCT_POINT_LIMIT: usize = 3000;

impl Product {
    pub fn index(&self, x: usize, y: usize) -> usize {
        x * self.right.len() + y
    }

    pub fn factors(&self, p: usize) -> (usize, usize) {
        (p / self.right.len(), p % self.right.len())
    }

    /// Membership of `(p, q)` in the block generator `D_R × D_S`.
    pub fn in_block(&self, p: usize, q: usize, r: f64, s: f64) -> bool {
        let ((x, y), (x2, y2)) = (self.factors(p), self.factors(q));
        self.left.control(x, x2) <= r && self.right.control(y, y2) <= s
    }

    /// Projection to the left factor. It need not be proper.
    pub fn projection_left(&self) -> Result<PointMap> {
        PointMap::from_fn(self.space.clone(), self.left.clone(), |p| self.factors(p).0)
    }

    pub fn projection_right(&self) -> Result<PointMap> {
        PointMap::from_fn(self.space.clone(), self.right.clone(), |p| self.factors(p).1)
    }
}

pub fn product(left: Arc<TruncatedCoarseSpace>, right: Arc<TruncatedCoarseSpace>) -> Result<Product> {
    let (nx, ny) = (left.len(), right.len());
    let n = nx * ny;
    if n > PRODUCT_POINT_LIMIT {
        return Err(CoarseError::Resource(format!(
            "product would have {n} points (limit {PRODUCT_POINT_LIMIT})"
        )));
    }
    let mut labels = Vec::with_capacity(n);
    let mut frontier = Vec::new();
    for x in 0..nx {
        for y in 0..ny {
            labels.push(format!("({},{})", left.label(x), right.label(y)));
            if left.is_frontier(x) || right.is_frontier(y) {
                frontier.push(x * ny + y);
            }
        }
    }
    let mut distances = vec![0.0; n * n];
    for p in 0..n {
        let (x, y) = (p / ny, p % ny);
        for q in 0..n {
            let (x2, y2) = (q / ny, q % ny);
            distances[p * n + q] = left.control(x, x2).max(right.control(y, y2));
        }
    }
    let space = TruncatedCoarseSpace::new(
        labels,
        Geometry::Matrix { distances },
        Structure::Bounded,
        PointSet::from_sorted(frontier),
        left.scale_cap().min(right.scale_cap()),
    )?;
    Ok(Product { space: Arc::new(space), left, right })
}

/// A decomposition `X = A ∪ B`.
///
/// Built with [`Decomposition::new`] the two pieces cover the space. The
/// [`Decomposition::within`] form lets `A ∪ B` be a proper subset: the
/// pieces then decompose `A ∪ B`, while neighbourhoods are still measured in
/// the containing space.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub space: Arc<TruncatedCoarseSpace>,
    pub a: PointSet,
    pub b: PointSet,
    covers: bool,
}

impl Decomposition {
    pub fn new(space: Arc<TruncatedCoarseSpace>, a: PointSet, b: PointSet) -> Result<Self> {
        space.check_set(&a)?;
        space.check_set(&b)?;
        let union = a.union(&b);
        if union.len() != space.len() {
            let missing = (0..space.len()).find(|&x| !union.contains(x)).unwrap_or(0);
            return Err(CoarseError::Decomposition(format!(
                "A ∪ B misses point {missing} ({})",
                space.label(missing)
            )));
        }
        Ok(Decomposition { space, a, b, covers: true })
    }

    pub fn within(space: Arc<TruncatedCoarseSpace>, a: PointSet, b: PointSet) -> Result<Self> {
        space.check_set(&a)?;
        space.check_set(&b)?;
        Ok(Decomposition { space, a, b, covers: false })
    }

    pub fn covers_space(&self) -> bool {
        self.covers
    }

    pub fn intersection(&self) -> PointSet {
        self.a.intersection(&self.b)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExcisionReport {
    pub budget: f64,
    /// Minimal `S(R)` with `D_R(A) ∩ D_R(B) ⊆ D_S(A ∩ B)`; `None` where no such `S` exists within the cap.
    pub witnesses: Vec<ScaleWitness>,
    pub excisive: bool,
    /// Smallest scale at which excision fails.
    pub first_failure: Option<f64>,
}

/// Scans `R = 0, 1, ..., budget` for the excision witness `S(R)`.
pub fn is_coarsely_excisive(dec: &Decomposition, budget: f64) -> Result<ExcisionReport> {
    let space = &dec.space;
    if budget > space.scale_cap() {
        return Err(CoarseError::ScaleExceedsCap { scale: budget, cap: space.scale_cap() });
    }
    let ab = dec.intersection();
    let mut witnesses = Vec::new();
    let mut first_failure = None;
    for r in scale_ladder(budget) {
        let meet = space.neighbourhood(&dec.a, r).intersection(&space.neighbourhood(&dec.b, r));
        let image_scale = if meet.is_empty() {
            Some(0.0)
        } else if ab.is_empty() {
            None
        } else {
            let s = meet.iter().map(|x| space.control_to_set(x, &ab)).fold(0.0, f64::max);
            (s <= space.scale_cap()).then_some(s)
        };
        if image_scale.is_none() && first_failure.is_none() {
            first_failure = Some(r);
        }
        witnesses.push(ScaleWitness { scale: r, image_scale });
    }
    Ok(ExcisionReport { budget, excisive: first_failure.is_none(), witnesses, first_failure })
}
