//! Generators for the model spaces: rays, lines, lattice balls, cells,
//! open cones, attachments along boundaries and coarse CW complexes.
//!
//! Every generator returns a truncation with its frontier on the outer shell.
//! Models whose frontier has opposite sides get the cap `r/2 - 1`: balls
//! touching the frontier on opposite sides first meet at scale `(r-1)/2`,
//! and from there on the frontier nerve fills in the hole it should surround.
//! One-ended rays keep `length/2`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::coarse_space::{
    disjoint_union, is_coarsely_excisive, quotient, validate_coarse_map, CoarseMapReport, Decomposition,
    ExcisionReport, Gauge, Geometry, PointMap, PointSet, ScaleWitness, Structure, TruncatedCoarseSpace,
};
use crate::error::{CoarseError, Result};
use crate::theory::HomotopyData;

/// Scale cap for gauge models with the unit gauge. Doubling from the
/// smallest control `1/L` always takes a unit step below this scale, so the
/// base point joins its neighbour.
pub const GAUGE_CAP: f64 = 4.0;

/// Largest point count a generator will build.
pub const POINT_LIMIT: usize = 200_000;

#[derive(Clone, Debug, PartialEq)]
pub enum RayKind {
    Bounded,
    Gauge(Vec<Gauge>),
}

fn label(key: &[i64]) -> String {
    let parts: Vec<String> = key.iter().map(|v| v.to_string()).collect();
    parts.join(",")
}

fn lattice_space(
    keys: &[Vec<i64>],
    step: f64,
    structure: Structure,
    frontier: impl Fn(&[i64]) -> bool,
    cap: f64,
) -> Result<TruncatedCoarseSpace> {
    let labels = keys.iter().map(|k| label(k)).collect();
    let coords = keys.iter().map(|k| k.iter().map(|&v| v as f64 * step).collect()).collect();
    let front: PointSet = (0..keys.len()).filter(|&i| frontier(&keys[i])).collect();
    TruncatedCoarseSpace::new(labels, Geometry::Euclidean { coords }, structure, front, cap)
}

/// `{0, 1, ..., length}` with frontier `{length}`.
///
/// The bounded ray has cap `length / 2`; a gauge ray uses [`GAUGE_CAP`].
pub fn make_ray(length: usize, kind: &RayKind) -> Result<TruncatedCoarseSpace> {
    if length == 0 {
        return Err(CoarseError::InvalidSpace("a ray needs positive length".into()));
    }
    let keys: Vec<Vec<i64>> = (0..=length as i64).map(|v| vec![v]).collect();
    let top = length as i64;
    match kind {
        RayKind::Bounded => lattice_space(&keys, 1.0, Structure::Bounded, |k| k[0] == top, length as f64 / 2.0),
        RayKind::Gauge(gauges) => {
            lattice_space(&keys, 1.0, Structure::Gauge { gauges: gauges.clone() }, |k| k[0] == top, GAUGE_CAP)
        }
    }
}

/// `{-half, ..., half}` with frontier at both ends.
pub fn make_line(half: usize) -> Result<TruncatedCoarseSpace> {
    if half == 0 {
        return Err(CoarseError::InvalidSpace("a line needs positive half-length".into()));
    }
    let h = half as i64;
    let keys: Vec<Vec<i64>> = (-h..=h).map(|v| vec![v]).collect();
    lattice_space(&keys, 1.0, Structure::Bounded, |k| k[0].abs() == h, two_sided_cap(half as f64))
}

fn norm(key: &[i64]) -> f64 {
    key.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt()
}

/// Lattice points of `Z²` with norm at most `radius`; the frontier is the shell `norm > radius - 1`.
pub fn make_grid_ball(radius: usize) -> Result<TruncatedCoarseSpace> {
    if radius < 2 {
        return Err(CoarseError::InvalidSpace("a lattice ball needs radius at least 2".into()));
    }
    let r = radius as i64;
    let rf = radius as f64;
    let mut keys = Vec::new();
    for x in -r..=r {
        for y in -r..=r {
            if norm(&[x, y]) <= rf {
                keys.push(vec![x, y]);
            }
        }
    }
    lattice_space(&keys, 1.0, Structure::Bounded, |k| norm(k) > rf - 1.0, two_sided_cap(rf))
}

pub fn two_sided_cap(radius: f64) -> f64 {
    radius / 2.0 - 1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CellKind {
    /// Lattice half-ball in `Z^n × Z≥0` with the bounded structure.
    Bounded,
    /// Box `[-r, r]^n × [0, r]` with the unit gauge in every coordinate.
    Gauge,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellSpec {
    /// `n`: the cell models `R^n × R≥0`, its boundary `R^n`.
    pub dim: usize,
    pub kind: CellKind,
    pub radius: usize,
    /// Lattice points per unit length.
    pub density: usize,
}

impl CellSpec {
    pub fn bounded(dim: usize, radius: usize) -> Self {
        CellSpec { dim, kind: CellKind::Bounded, radius, density: 1 }
    }
}

/// A coarse `(n+1)`-cell and its boundary slice `s = 0`.
#[derive(Clone, Debug)]
pub struct Cell {
    pub space: Arc<TruncatedCoarseSpace>,
    pub boundary: PointSet,
    pub dim: usize,
}

impl Cell {
    /// The boundary as a space of its own, indexed in boundary order.
    pub fn boundary_space(&self) -> Result<TruncatedCoarseSpace> {
        self.space.subspace(&self.boundary)
    }
}

fn lattice_keys(dims: usize, lo: &[i64], hi: &[i64], keep: impl Fn(&[i64]) -> bool) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = lo.to_vec();
    if dims == 0 {
        return out;
    }
    loop {
        if keep(&cur) {
            out.push(cur.clone());
        }
        let mut i = dims;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < hi[i] {
                cur[i] += 1;
                for j in i + 1..dims {
                    cur[j] = lo[j];
                }
                break;
            }
        }
    }
}

pub fn make_cell(spec: &CellSpec) -> Result<Cell> {
    if spec.radius < 2 || spec.density == 0 {
        return Err(CoarseError::InvalidSpace("a cell needs radius at least 2 and positive density".into()));
    }
    let n = spec.dim;
    let span = (spec.radius * spec.density) as i64;
    let estimate = (2.0 * span as f64 + 1.0).powi(n as i32) * (span as f64 + 1.0);
    if estimate > POINT_LIMIT as f64 {
        return Err(CoarseError::Resource(format!(
            "a {}-cell of radius {} at density {} needs about {estimate:.0} points (limit {POINT_LIMIT})",
            n + 1,
            spec.radius,
            spec.density
        )));
    }
    let step = 1.0 / spec.density as f64;
    let rf = spec.radius as f64;
    let mut lo = vec![-span; n + 1];
    lo[n] = 0;
    let hi = vec![span; n + 1];
    let scaled = |k: &[i64]| norm(k) * step;
    let space = match spec.kind {
        CellKind::Bounded => {
            let keys = lattice_keys(n + 1, &lo, &hi, |k| scaled(k) <= rf);
            lattice_space(&keys, step, Structure::Bounded, |k| scaled(k) > rf - 1.0, two_sided_cap(rf))?
        }
        CellKind::Gauge => {
            let keys = lattice_keys(n + 1, &lo, &hi, |_| true);
            let structure = Structure::Gauge { gauges: vec![Gauge::unit()] };
            lattice_space(&keys, step, structure, |k| k.iter().any(|v| v.abs() == span), GAUGE_CAP)?
        }
    };
    let boundary: PointSet = (0..space.len())
        .filter(|&i| space.coords().map(|c| c[i][n] == 0.0).unwrap_or(false))
        .collect();
    Ok(Cell { space: Arc::new(space), boundary, dim: n })
}

/// A finite simplicial complex on unit vectors together with cone parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeSpec {
    pub vertices: Vec<Vec<f64>>,
    /// Generating simplices; faces are implied.
    pub simplices: Vec<Vec<usize>>,
    /// Number of radial shells `N`.
    pub radius: usize,
    /// Lattice step `h`.
    pub step: f64,
    /// Subdivisions per simplex edge; the minimal workable value when absent.
    pub density: Option<usize>,
}

impl ConeSpec {
    pub fn new(vertices: Vec<Vec<f64>>, simplices: Vec<Vec<usize>>, radius: usize) -> Self {
        ConeSpec { vertices, simplices, radius, step: 1.0, density: None }
    }

    /// The two points of `S⁰ ⊂ R`.
    pub fn sphere0(radius: usize) -> Self {
        Self::new(vec![vec![1.0], vec![-1.0]], vec![vec![0], vec![1]], radius)
    }

    /// `k` equally spaced points on the unit circle, without edges.
    pub fn points_on_circle(k: usize, radius: usize) -> Self {
        let vertices = circle_points(k);
        Self::new(vertices, (0..k).map(|i| vec![i]).collect(), radius)
    }

    /// The boundary of a regular `k`-gon, inscribed in the unit circle.
    pub fn polygon(k: usize, radius: usize) -> Self {
        let vertices = circle_points(k);
        Self::new(vertices, (0..k).map(|i| vec![i, (i + 1) % k]).collect(), radius)
    }

    fn validate(&self) -> Result<usize> {
        let d = self.vertices.first().map(Vec::len).unwrap_or(0);
        if d == 0 {
            return Err(CoarseError::InvalidSpace("a cone needs at least one vertex".into()));
        }
        for v in &self.vertices {
            if v.len() != d || (v.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() > 1e-9 {
                return Err(CoarseError::InvalidSpace("cone vertices must be unit vectors of one dimension".into()));
            }
        }
        for s in &self.simplices {
            if s.is_empty() || s.iter().any(|&i| i >= self.vertices.len()) {
                return Err(CoarseError::InvalidSpace("simplex refers to a missing vertex".into()));
            }
        }
        if self.radius < 2 || !(self.step > 0.0) {
            return Err(CoarseError::InvalidSpace("a cone needs at least two shells and a positive step".into()));
        }
        Ok(d)
    }
}

fn circle_points(k: usize) -> Vec<Vec<f64>> {
    (0..k)
        .map(|i| {
            let a = PI / 2.0 + 2.0 * PI * i as f64 / k as f64;
            vec![a.cos(), a.sin()]
        })
        .collect()
}

/// Open cone `{ t·θ : θ ∈ K, 1 ≤ t ≤ N }` sampled on the lattice `hZ^d`.
#[derive(Clone, Debug)]
pub struct Cone {
    pub space: Arc<TruncatedCoarseSpace>,
    pub directions: Vec<Vec<f64>>,
    /// First sample `(shell, direction)` that produced each point.
    pub samples: Vec<(usize, usize)>,
    pub density: usize,
    pub radius: usize,
    pub step: f64,
    lookup: HashMap<Vec<i64>, usize>,
}

impl Cone {
    fn key(&self, t: usize, dir: usize) -> Vec<i64> {
        sample_key(&self.directions[dir], t, self.step)
    }

    /// Point closest to `t·θ` for the direction of `x`.
    pub fn along(&self, x: usize, t: usize) -> usize {
        let (_, dir) = self.samples[x];
        self.lookup[&self.key(t.clamp(1, self.radius), dir)]
    }

    /// `ρ_r(tθ) = r(t)θ` for a radial reparametrisation indexed by shell.
    pub fn radial(&self, r: &[usize]) -> Result<PointMap> {
        if r.len() != self.radius + 1 {
            return Err(CoarseError::Precondition(format!("radial table needs {} entries", self.radius + 1)));
        }
        let s = self.space.clone();
        PointMap::from_fn(s.clone(), s, |x| self.along(x, r[self.samples[x].0]))
    }
}

fn sample_key(dir: &[f64], t: usize, step: f64) -> Vec<i64> {
    dir.iter().map(|&c| (t as f64 * c / step).round() as i64).collect()
}

fn normalize(v: &[f64]) -> Option<Vec<f64>> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (n > 1e-9).then(|| v.iter().map(|x| x / n).collect())
}

/// Barycentric grid of denominator `m` on one simplex, with the grid-neighbour pairs.
fn simplex_grid(spec: &ConeSpec, simplex: &[usize], m: usize) -> Result<(Vec<Vec<f64>>, Vec<(usize, usize)>)> {
    let k = simplex.len();
    let mut weights: Vec<Vec<usize>> = Vec::new();
    let mut cur = vec![0usize; k];
    fn rec(i: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for w in 0..=left {
            cur[i] = w;
            rec(i + 1, left - w, cur, out);
        }
    }
    rec(0, m, &mut cur, &mut weights);
    let index: HashMap<Vec<usize>, usize> = weights.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
    let d = spec.vertices[0].len();
    let mut points = Vec::with_capacity(weights.len());
    for w in &weights {
        let mut p = vec![0.0; d];
        for (j, &v) in simplex.iter().enumerate() {
            for (c, x) in p.iter_mut().zip(&spec.vertices[v]) {
                *c += w[j] as f64 * x;
            }
        }
        let u = normalize(&p).ok_or_else(|| {
            CoarseError::InvalidSpace(format!("simplex {simplex:?} spans the origin and has no cone"))
        })?;
        points.push(u);
    }
    let mut pairs = Vec::new();
    for (i, w) in weights.iter().enumerate() {
        for a in 0..k {
            for b in 0..k {
                if a == b || w[a] == 0 {
                    continue;
                }
                let mut v = w.clone();
                v[a] -= 1;
                v[b] += 1;
                pairs.push((i, index[&v]));
            }
        }
    }
    Ok((points, pairs))
}

/// Largest gap on the outer shell between neighbouring samples, in lattice steps.
fn outer_gap(spec: &ConeSpec, m: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for s in &spec.simplices {
        let (points, pairs) = simplex_grid(spec, s, m)?;
        for (i, j) in pairs {
            let gap: f64 = points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            worst = worst.max(gap * spec.radius as f64);
        }
    }
    Ok(worst)
}

/// Neighbouring outer samples must be at most this many steps apart.
pub const CONE_GAP: f64 = 2.0;

/// Smallest subdivision count keeping outer-shell neighbours within [`CONE_GAP`] steps.
pub fn minimal_cone_density(spec: &ConeSpec) -> Result<usize> {
    spec.validate()?;
    let target = CONE_GAP * spec.step;
    for m in 1..=4096 {
        if outer_gap(spec, m)? <= target {
            return Ok(m);
        }
    }
    Err(CoarseError::Resource("cone would need more than 4096 subdivisions per edge".into()))
}

pub fn open_cone(spec: &ConeSpec) -> Result<Cone> {
    let d = spec.validate()?;
    let needed = minimal_cone_density(spec)?;
    let m = match spec.density {
        Some(m) if m < needed => {
            return Err(CoarseError::Precondition(format!(
                "density {m} leaves gaps wider than {CONE_GAP} steps on the outer shell; at least {needed} is needed"
            )))
        }
        Some(m) => m,
        None => needed,
    };
    let mut directions: Vec<Vec<f64>> = Vec::new();
    let mut seen: HashMap<Vec<i64>, usize> = HashMap::new();
    for s in &spec.simplices {
        let (points, _) = simplex_grid(spec, s, if s.len() == 1 { 1 } else { m })?;
        for u in points {
            let tag: Vec<i64> = u.iter().map(|x| (x * 1e9).round() as i64).collect();
            if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(tag) {
                e.insert(directions.len());
                directions.push(u);
            }
        }
    }
    let n = spec.radius;
    let estimate = directions.len() * n;
    if estimate > POINT_LIMIT {
        return Err(CoarseError::Resource(format!("cone would sample {estimate} points (limit {POINT_LIMIT})")));
    }
    let mut keys: Vec<Vec<i64>> = Vec::new();
    let mut samples = Vec::new();
    let mut lookup: HashMap<Vec<i64>, usize> = HashMap::new();
    for t in 1..=n {
        for (j, u) in directions.iter().enumerate() {
            let key = sample_key(u, t, spec.step);
            if key.iter().all(|&v| v == 0) {
                continue;
            }
            lookup.entry(key.clone()).or_insert_with(|| {
                keys.push(key);
                samples.push((t, j));
                keys.len() - 1
            });
        }
    }
    let outer = (n as f64 - 1.0) * spec.step;
    let step = spec.step;
    let space =
        lattice_space(&keys, step, Structure::Bounded, |k| norm(k) * step > outer, two_sided_cap(n as f64 * step))?;
    debug_assert_eq!(space.coords().map(|c| c[0].len()), Some(d));
    Ok(Cone { space: Arc::new(space), directions, samples, density: m, radius: n, step: spec.step, lookup })
}

/// Checks that an inclusion `C → Q` is a coarse equivalence onto its image.
#[derive(Clone, Debug, Serialize)]
pub struct Equivalence {
    pub inclusion: CoarseMapReport,
    /// Retraction of the image back onto `C`.
    pub retraction: CoarseMapReport,
    /// Largest control between `c` and its round trip.
    pub round_trip: f64,
    pub equivalent: bool,
}

fn equivalence(
    component: &Arc<TruncatedCoarseSpace>,
    q: &Arc<TruncatedCoarseSpace>,
    classes: &[PointSet],
    into_q: &[usize],
    offset: usize,
    budget: f64,
) -> Result<(Equivalence, PointSet)> {
    let inclusion = PointMap::new(component.clone(), q.clone(), into_q.to_vec())?;
    let image: PointSet = into_q.iter().copied().collect();
    let sub = Arc::new(q.subspace(&image)?);
    let end = offset + component.len();
    let back: Vec<usize> = image
        .iter()
        .map(|k| classes[k].iter().find(|&x| x >= offset && x < end).map(|x| x - offset).unwrap_or(0))
        .collect();
    let retraction = PointMap::new(sub, component.clone(), back.clone())?;
    let round_trip = (0..component.len())
        .map(|c| {
            let k = image.as_slice().binary_search(&into_q[c]).unwrap_or(0);
            component.control(c, back[k])
        })
        .fold(0.0, f64::max);
    let inclusion = validate_coarse_map(&inclusion, budget);
    let retraction = validate_coarse_map(&retraction, budget);
    let equivalent = inclusion.coarse && retraction.coarse && round_trip <= component.scale_cap();
    Ok((Equivalence { inclusion, retraction, round_trip, equivalent }, image))
}

/// `X ∪_f Y`: the quotient of `Y ⊔ X` identifying `a` with `f(a)` for `a ∈ A`.
///
/// `Y` comes first, so its points keep their indices in the result.
#[derive(Clone, Debug)]
pub struct Attachment {
    pub space: Arc<TruncatedCoarseSpace>,
    pub image_x: PointSet,
    pub image_y: PointSet,
    pub from_x: PointMap,
    pub from_y: PointMap,
    pub x_equivalence: Equivalence,
    pub y_equivalence: Equivalence,
    pub excision: ExcisionReport,
    pub budget: f64,
}

impl Attachment {
    pub fn ok(&self) -> bool {
        self.x_equivalence.equivalent && self.y_equivalence.equivalent && self.excision.excisive
    }
}

/// Glues `X` to `Y = f.target()` along `A ⊆ X`; `f` is defined on `X.subspace(A)`.
pub fn attach(x: &Arc<TruncatedCoarseSpace>, a: &PointSet, f: &PointMap, budget: f64) -> Result<Attachment> {
    x.check_set(a)?;
    if f.source().len() != a.len() {
        return Err(CoarseError::MismatchedSpaces(format!(
            "attaching map is defined on {} points, the subspace has {}",
            f.source().len(),
            a.len()
        )));
    }
    let y = f.target().clone();
    let union = disjoint_union(&[&y, x])?;
    let off = union.offsets[1];
    let total = union.space.len();
    let mut parent: Vec<usize> = (0..total).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for (i, ax) in a.iter().enumerate() {
        let (u, v) = (root(&mut parent, off + ax), root(&mut parent, f.apply(i)));
        if u != v {
            parent[u.max(v)] = u.min(v);
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..total {
        let r = root(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let classes: Vec<Vec<usize>> = groups.into_values().collect();
    let budget = budget.min(union.space.scale_cap());
    let q = quotient(union.space.clone(), classes, budget)?;
    let proj = q.projection.images();
    let into_y: Vec<usize> = (0..y.len()).map(|i| proj[i]).collect();
    let into_x: Vec<usize> = (0..x.len()).map(|i| proj[off + i]).collect();
    let (y_equivalence, image_y) = equivalence(&y, &q.space, &q.classes, &into_y, 0, budget)?;
    let (x_equivalence, image_x) = equivalence(x, &q.space, &q.classes, &into_x, off, budget)?;
    let dec = Decomposition::new(q.space.clone(), image_x.clone(), image_y.clone())?;
    let excision = is_coarsely_excisive(&dec, budget)?;
    let from_x = PointMap::new(x.clone(), q.space.clone(), into_x)?;
    let from_y = PointMap::new(y, q.space.clone(), into_y)?;
    Ok(Attachment {
        space: q.space,
        image_x,
        image_y,
        from_x,
        from_y,
        x_equivalence,
        y_equivalence,
        excision,
        budget,
    })
}

/// A cell glued along its boundary; `attach[i]` is the skeleton point hit by boundary point `i`.
#[derive(Clone, Debug)]
pub struct CwCell {
    pub cell: Cell,
    pub attach: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct CwSpec {
    /// Rays forming the base; they are joined by disjoint union.
    pub base: Vec<TruncatedCoarseSpace>,
    /// Cells in order of non-decreasing dimension.
    pub cells: Vec<CwCell>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AttachSummary {
    pub cell_dim: usize,
    pub excisive: bool,
    pub cell_equivalent: bool,
    pub skeleton_equivalent: bool,
}

#[derive(Clone, Debug)]
pub struct CwComplex {
    pub space: Arc<TruncatedCoarseSpace>,
    /// `(k, points of the k-skeleton)`; skeleton points keep their indices as cells are added.
    pub skeleta: Vec<(usize, PointSet)>,
    pub attachments: Vec<AttachSummary>,
}

impl CwComplex {
    pub fn valid(&self) -> bool {
        self.attachments.iter().all(|a| a.excisive && a.cell_equivalent && a.skeleton_equivalent)
    }
}

pub fn build_cw(spec: &CwSpec, budget: f64) -> Result<CwComplex> {
    let base: Vec<&TruncatedCoarseSpace> = spec.base.iter().collect();
    let mut space = disjoint_union(&base)?.space;
    if spec.cells.windows(2).any(|w| w[0].cell.dim > w[1].cell.dim) {
        return Err(CoarseError::Precondition("cells must be attached in order of dimension".into()));
    }
    // A cell of boundary dimension n is an (n+1)-cell.
    let mut skeleta = Vec::new();
    let mut attachments = Vec::new();
    let mut current_dim = 0;
    for c in &spec.cells {
        let d = c.cell.dim + 1;
        if d > current_dim {
            skeleta.push((current_dim, PointSet::range(space.len())));
            current_dim = d;
        }
        let boundary = Arc::new(c.cell.boundary_space()?);
        let f = PointMap::new(boundary, space.clone(), c.attach.clone())?;
        let at = attach(&c.cell.space, &c.cell.boundary, &f, budget)?;
        attachments.push(AttachSummary {
            cell_dim: d,
            excisive: at.excision.excisive,
            cell_equivalent: at.x_equivalence.equivalent,
            skeleton_equivalent: at.y_equivalence.equivalent,
        });
        space = at.space;
    }
    skeleta.push((current_dim, PointSet::range(space.len())));
    Ok(CwComplex { space, skeleta, attachments })
}

/// Outcome of the greedy search for a diverging radial reparametrisation.
#[derive(Clone, Debug, Serialize)]
pub struct ContractionReport {
    /// `r(t)` for shells `t = 0..=N`.
    pub r: Vec<usize>,
    pub found: bool,
    /// `r` never grows by more than one per shell.
    pub lipschitz: bool,
    /// Largest `‖fρ(p)‖ − ‖p‖` over the cone.
    pub displacement: f64,
    pub witnesses: Vec<ScaleWitness>,
    pub coarse: bool,
}

/// Greedy search for `r` with `‖f(ρ_r(p))‖ ≤ ‖p‖ + budget` on every shell.
///
/// `r` grows by one whenever the next shell admits it and stalls otherwise;
/// the search succeeds when `r` still grows in the outer half.
pub fn radial_contraction_search(cone: &Cone, f: &PointMap, budget: f64) -> Result<ContractionReport> {
    if !(budget > 0.0) {
        return Err(CoarseError::Precondition("the search needs a positive budget".into()));
    }
    if f.source().len() != cone.space.len() || **f.source() != *cone.space {
        return Err(CoarseError::MismatchedSpaces("map must be defined on the cone".into()));
    }
    let Some(target_coords) = f.target().coords() else {
        return Err(CoarseError::Precondition("target needs coordinates to measure norms".into()));
    };
    let src = cone.space.coords().expect("cones are sampled in coordinates");
    let length = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let n = cone.radius;
    let mut shells: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for (x, &(t, _)) in cone.samples.iter().enumerate() {
        shells[t].push(x);
    }
    let excess = |x: usize, r: usize| length(&target_coords[f.apply(cone.along(x, r))]) - length(&src[x]);
    let mut r = vec![0usize; n + 1];
    r[1] = 1;
    for t in 2..=n {
        let cand = r[t - 1] + 1;
        let ok = shells[t].iter().all(|&x| excess(x, cand) <= budget);
        r[t] = if ok { cand } else { r[t - 1] };
    }
    let displacement = (0..cone.space.len()).map(|x| excess(x, r[cone.samples[x].0])).fold(f64::NEG_INFINITY, f64::max);
    let lipschitz = r.windows(2).skip(1).all(|w| w[1] <= w[0] + 1);
    let composite = cone.radial(&r)?.then(f)?;
    let report = validate_coarse_map(&composite, budget.min(cone.space.scale_cap()));
    let found = r[n] > r[n.div_ceil(2)];
    Ok(ContractionReport {
        r,
        found,
        lipschitz,
        displacement,
        witnesses: report.witnesses,
        coarse: report.uniformly_expansive,
    })
}

/// Homotopy folding the lattice half-disk onto its vertical axis.
///
/// `F((x, s), t)` rotates `(x, 0)` about the origin at unit speed until it
/// reaches the axis, then stays at `(0, s + |x|)`; values are rounded to the
/// lattice. The target is the half-disk of radius `2N` whose frontier starts at
/// the same shell as the source.
pub fn homray_homotopy(radius: usize) -> Result<HomotopyData> {
    let x = make_cell(&CellSpec::bounded(1, radius))?.space;
    let rf = radius as f64;
    let big = make_cell(&CellSpec::bounded(1, 2 * radius))?.space;
    let cap = big.scale_cap();
    let big = Arc::new(
        (*big)
            .clone()
            .with_frontier((0..big.len()).filter(|&i| big.coords().unwrap()[i].iter().map(|v| v * v).sum::<f64>().sqrt() > rf - 1.0).collect())?
            .with_scale_cap(cap)?,
    );
    let index: HashMap<(i64, i64), usize> = big
        .coords()
        .unwrap()
        .iter()
        .enumerate()
        .map(|(i, c)| ((c[0] as i64, c[1] as i64), i))
        .collect();
    let xc = x.coords().unwrap().to_vec();
    let point = |p: usize, t: usize| -> (i64, i64) {
        let (u, s) = (xc[p][0], xc[p][1]);
        let m = u.abs();
        if m == 0.0 {
            return (0, s as i64);
        }
        let t = t as f64;
        if t <= PI * m / 2.0 {
            let a = t / m;
            ((u.signum() * m * a.cos()).round() as i64, (s + m * a.sin()).round() as i64)
        } else {
            (0, (s + m) as i64)
        }
    };
    let t_max = 2 * ((PI * rf / 2.0).ceil() as usize + 2);
    for p in 0..x.len() {
        for t in [0, t_max] {
            if !index.contains_key(&point(p, t)) {
                return Err(CoarseError::Construction(format!("image of {} leaves the target", x.label(p))));
            }
        }
    }
    let base = x.point_index("0,0").ok_or_else(|| CoarseError::Construction("missing origin".into()))?;
    HomotopyData::from_fn(x, big.clone(), t_max, |p, t| index[&point(p, t)], |p| index[&point(p, t_max)], base)
}

/// Time by which the fold has settled on the ball of radius `rho`.
pub fn homray_bound(rho: f64) -> usize {
    (PI * rho / 2.0).ceil() as usize + 2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ray_and_line_shapes() {
        let r = make_ray(10, &RayKind::Bounded).unwrap();
        assert_eq!(r.len(), 11);
        assert_eq!(r.frontier().as_slice(), &[10]);
        assert_eq!(r.scale_cap(), 5.0);
        let l = make_line(6).unwrap();
        assert_eq!(l.frontier().as_slice(), &[0, 12]);
    }

    #[test]
    fn grid_ball_counts() {
        let b = make_grid_ball(3).unwrap();
        let brute = (-3..=3i64).flat_map(|x| (-3..=3i64).map(move |y| (x, y))).filter(|&(x, y)| x * x + y * y <= 9).count();
        assert_eq!(b.len(), brute);
    }

    #[test]
    fn zero_cell_is_a_ray() {
        let c = make_cell(&CellSpec::bounded(0, 8)).unwrap();
        assert_eq!(c.space.len(), 9);
        assert_eq!(c.boundary.len(), 1);
        assert_eq!(c.space.frontier().as_slice(), &[8]);
    }

    #[test]
    fn cell_boundary_is_a_line() {
        let c = make_cell(&CellSpec::bounded(1, 6)).unwrap();
        assert_eq!(c.boundary.len(), 13);
        let b = c.boundary_space().unwrap();
        assert_eq!(b.frontier().len(), 2);
    }

    #[test]
    fn oversized_cell_refused() {
        let err = make_cell(&CellSpec { dim: 3, kind: CellKind::Bounded, radius: 100, density: 1 }).unwrap_err();
        assert!(matches!(err, CoarseError::Resource(_)));
    }

    #[test]
    fn cone_on_two_points_is_a_punctured_line() {
        let c = open_cone(&ConeSpec::sphere0(8)).unwrap();
        assert_eq!(c.space.len(), 16);
        assert_eq!(c.space.frontier().len(), 2);
    }

    #[test]
    fn sparse_cone_refused() {
        let mut spec = ConeSpec::polygon(4, 20);
        let needed = minimal_cone_density(&spec).unwrap();
        spec.density = Some(needed - 1);
        assert!(matches!(open_cone(&spec), Err(CoarseError::Precondition(_))));
    }

    #[test]
    fn identity_contraction_search_is_identity() {
        let c = open_cone(&ConeSpec::sphere0(10)).unwrap();
        let id = PointMap::identity(c.space.clone());
        let rep = radial_contraction_search(&c, &id, 1.0).unwrap();
        assert_eq!(rep.r, (0..=10).collect::<Vec<_>>());
        assert!(rep.found);
    }

    #[test]
    fn squaring_contraction_tracks_square_root() {
        let c = open_cone(&ConeSpec::sphere0(30)).unwrap();
        let target = Arc::new(make_line(900).unwrap());
        let coords = c.space.coords().unwrap().to_vec();
        let f = PointMap::from_fn(c.space.clone(), target, |x| {
            let v = coords[x][0];
            (v * v.abs() + 900.0) as usize
        })
        .unwrap();
        let rep = radial_contraction_search(&c, &f, 1.0).unwrap();
        for t in 1..=30 {
            let s = (t as f64).sqrt().floor() as i64;
            assert!((rep.r[t] as i64 - s).abs() <= 1, "r({t}) = {}", rep.r[t]);
        }
        assert!(rep.found);
    }

    #[test]
    fn attaching_a_two_cell_to_a_line() {
        let line = Arc::new(make_line(6).unwrap());
        let cell = make_cell(&CellSpec::bounded(1, 6)).unwrap();
        let boundary = Arc::new(cell.boundary_space().unwrap());
        let f = PointMap::from_fn(boundary, line.clone(), |i| i).unwrap();
        let at = attach(&cell.space, &cell.boundary, &f, 1.0).unwrap();
        assert_eq!(at.space.len(), cell.space.len());
        assert_eq!(at.image_y.as_slice(), (0..13).collect::<Vec<_>>().as_slice());
        assert!(at.y_equivalence.equivalent);
        assert!(at.x_equivalence.equivalent);
    }
}
