use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{CoarseError, Result};

/// Sorted, duplicate-free set of point indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointSet(Vec<usize>);

impl PointSet {
    pub fn new() -> Self {
        PointSet(Vec::new())
    }

    pub fn singleton(x: usize) -> Self {
        PointSet(vec![x])
    }

    /// Builds from an already sorted, duplicate-free vector.
    pub fn from_sorted(v: Vec<usize>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        PointSet(v)
    }

    pub fn range(n: usize) -> Self {
        PointSet((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn first(&self) -> Option<usize> {
        self.0.first().copied()
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        let mut j = 0;
        for &x in &self.0 {
            while j < other.0.len() && other.0[j] < x {
                j += 1;
            }
            if j == other.0.len() || other.0[j] != x {
                return false;
            }
        }
        true
    }

    pub fn intersects(&self, other: &PointSet) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    pub fn intersection(&self, other: &PointSet) -> PointSet {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(self.0[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        PointSet(out)
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        self.iter().chain(other.iter()).collect()
    }

    pub fn difference(&self, other: &PointSet) -> PointSet {
        PointSet(self.0.iter().copied().filter(|&x| !other.contains(x)).collect())
    }
}

impl FromIterator<usize> for PointSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut v: Vec<usize> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        PointSet(v)
    }
}

/// Monotone gauge function used by continuously controlled rays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Gauge {
    /// `g(m) = offset + slope * m`.
    Affine { offset: f64, slope: f64 },
    /// Values at `m = 0, 1, 2, ...`, linearly interpolated and constant past the end.
    Table { values: Vec<f64> },
}

impl Gauge {
    /// The default cc-ray gauge `g(m) = 1 + m`.
    pub fn unit() -> Self {
        Gauge::Affine { offset: 1.0, slope: 1.0 }
    }

    pub fn eval(&self, m: f64) -> f64 {
        match self {
            Gauge::Affine { offset, slope } => offset + slope * m,
            Gauge::Table { values } => {
                if m <= 0.0 {
                    return values[0];
                }
                let lo = m.floor() as usize;
                if lo + 1 >= values.len() {
                    return *values.last().unwrap();
                }
                let frac = m - lo as f64;
                values[lo] * (1.0 - frac) + values[lo + 1] * frac
            }
        }
    }

    /// Rejects gauges that are not positive and non-decreasing.
    pub fn validate(&self) -> Result<()> {
        match self {
            Gauge::Affine { offset, slope } => {
                if !(*offset > 0.0) || !(*slope >= 0.0) || !offset.is_finite() || !slope.is_finite() {
                    return Err(CoarseError::InvalidSpace(format!(
                        "gauge must be positive and non-decreasing (offset {offset}, slope {slope})"
                    )));
                }
            }
            Gauge::Table { values } => {
                if values.is_empty() || !(values[0] > 0.0) {
                    return Err(CoarseError::InvalidSpace("gauge table must start positive".into()));
                }
                if let Some(w) = values.windows(2).find(|w| !(w[1] >= w[0])) {
                    return Err(CoarseError::InvalidSpace(format!(
                        "non-monotone gauge: {} followed by {}",
                        w[0], w[1]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// How distances between points are given.
#[derive(Clone, Debug, PartialEq)]
pub enum Geometry {
    /// Coordinates per point; euclidean distance.
    Euclidean { coords: Vec<Vec<f64>> },
    /// Explicit symmetric distance matrix (row-major, `n * n`).
    Matrix { distances: Vec<f64> },
    /// Weighted undirected edges; shortest-path distances are cached row-major.
    Graph { edges: Vec<(usize, usize, f64)>, distances: Vec<f64> },
}

/// Which entourages the structure generates from the geometry.
#[derive(Clone, Debug, PartialEq)]
pub enum Structure {
    /// Metric scales `D_R = {(x, y) : d(x, y) <= R}`.
    Bounded,
    /// Gauge scales `{(s, t) : |s - t| <= R * g(min(s, t))}`, coordinate by coordinate.
    Gauge { gauges: Vec<Gauge> },
}

/// A finite truncation of a coarse space.
///
/// Every generator entourage is a scale `R >= 0` and consists of the pairs
/// whose control value is at most `R`; see [`TruncatedCoarseSpace::control`].
/// The frontier marks where the truncation cut the original space, and
/// `scale_cap` is the largest scale the model represents faithfully.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedCoarseSpace {
    labels: Vec<String>,
    geometry: Geometry,
    structure: Structure,
    frontier: PointSet,
    frontier_mask: Vec<bool>,
    scale_cap: f64,
}

impl TruncatedCoarseSpace {
    pub fn new(
        labels: Vec<String>,
        geometry: Geometry,
        structure: Structure,
        frontier: PointSet,
        scale_cap: f64,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(CoarseError::InvalidSpace("a space needs at least one point".into()));
        }
        if !(scale_cap > 0.0) || !scale_cap.is_finite() {
            return Err(CoarseError::InvalidSpace(format!("scale cap must be positive, got {scale_cap}")));
        }
        if let Some(bad) = frontier.iter().find(|&x| x >= n) {
            return Err(CoarseError::PointOutOfRange { index: bad, len: n });
        }
        match &geometry {
            Geometry::Euclidean { coords } => {
                if coords.len() != n {
                    return Err(CoarseError::InvalidSpace(format!(
                        "{} coordinate rows for {n} points",
                        coords.len()
                    )));
                }
                let dim = coords[0].len();
                if coords.iter().any(|c| c.len() != dim || c.iter().any(|v| !v.is_finite())) {
                    return Err(CoarseError::InvalidSpace("coordinates must be finite with a common dimension".into()));
                }
                let mut seen = HashSet::new();
                for (i, c) in coords.iter().enumerate() {
                    let key: Vec<u64> = c.iter().map(|v| (v + 0.0).to_bits()).collect();
                    if !seen.insert(key) {
                        return Err(CoarseError::InvalidSpace(format!(
                            "point {i} repeats earlier coordinates; distance must vanish only on the diagonal"
                        )));
                    }
                }
            }
            Geometry::Matrix { distances } | Geometry::Graph { distances, .. } => {
                if distances.len() != n * n {
                    return Err(CoarseError::InvalidSpace(format!("distance matrix is not {n}x{n}")));
                }
                for i in 0..n {
                    if distances[i * n + i] != 0.0 {
                        return Err(CoarseError::InvalidSpace(format!("d({i},{i}) must be zero")));
                    }
                    for j in (i + 1)..n {
                        let (a, b) = (distances[i * n + j], distances[j * n + i]);
                        if a != b {
                            return Err(CoarseError::InvalidSpace(format!("d({i},{j}) != d({j},{i})")));
                        }
                        if !(a > 0.0) {
                            return Err(CoarseError::InvalidSpace(format!(
                                "d({i},{j}) = {a}; distances must be positive off the diagonal"
                            )));
                        }
                    }
                }
            }
        }
        if let Structure::Gauge { gauges } = &structure {
            if gauges.is_empty() {
                return Err(CoarseError::InvalidSpace("gauge structure needs at least one gauge".into()));
            }
            for g in gauges {
                g.validate()?;
            }
            if !matches!(geometry, Geometry::Euclidean { .. }) {
                return Err(CoarseError::InvalidSpace("gauge structures need euclidean coordinates".into()));
            }
        }
        let mut frontier_mask = vec![false; n];
        for x in frontier.iter() {
            frontier_mask[x] = true;
        }
        Ok(TruncatedCoarseSpace { labels, geometry, structure, frontier, frontier_mask, scale_cap })
    }

    /// Builds a graph-metric space from weighted edges (shortest paths; unreachable pairs are infinitely far).
    pub fn from_graph(
        labels: Vec<String>,
        edges: Vec<(usize, usize, f64)>,
        frontier: PointSet,
        scale_cap: f64,
    ) -> Result<Self> {
        let n = labels.len();
        for &(a, b, w) in &edges {
            if a >= n || b >= n {
                return Err(CoarseError::PointOutOfRange { index: a.max(b), len: n });
            }
            if !(w > 0.0) {
                return Err(CoarseError::InvalidSpace(format!("edge ({a},{b}) has non-positive weight {w}")));
            }
        }
        let distances = all_pairs_shortest_paths(n, &edges);
        Self::new(labels, Geometry::Graph { edges, distances }, Structure::Bounded, frontier, scale_cap)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn frontier(&self) -> &PointSet {
        &self.frontier
    }

    pub fn is_frontier(&self, x: usize) -> bool {
        self.frontier_mask[x]
    }

    pub fn touches_frontier(&self, set: &PointSet) -> bool {
        set.iter().any(|x| self.frontier_mask[x])
    }

    pub fn scale_cap(&self) -> f64 {
        self.scale_cap
    }

    pub fn with_scale_cap(mut self, cap: f64) -> Result<Self> {
        if !(cap > 0.0) {
            return Err(CoarseError::InvalidSpace(format!("scale cap must be positive, got {cap}")));
        }
        self.scale_cap = cap;
        Ok(self)
    }

    pub fn with_frontier(self, frontier: PointSet) -> Result<Self> {
        Self::new(self.labels, self.geometry, self.structure, frontier, self.scale_cap)
    }

    /// Euclidean coordinates, when the geometry carries them.
    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        match &self.geometry {
            Geometry::Euclidean { coords } => Some(coords),
            _ => None,
        }
    }

    /// Whether the control function satisfies the triangle inequality by construction.
    pub fn is_metric(&self) -> bool {
        matches!(self.structure, Structure::Bounded)
            && matches!(self.geometry, Geometry::Euclidean { .. } | Geometry::Graph { .. })
    }

    pub fn point_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn check_point(&self, x: usize) -> Result<()> {
        if x < self.len() {
            Ok(())
        } else {
            Err(CoarseError::PointOutOfRange { index: x, len: self.len() })
        }
    }

    pub fn check_set(&self, set: &PointSet) -> Result<()> {
        match set.as_slice().last() {
            Some(&x) => self.check_point(x),
            None => Ok(()),
        }
    }

    /// Control value of a pair: the least scale whose generator entourage contains it.
    pub fn control(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        match (&self.structure, &self.geometry) {
            (Structure::Bounded, Geometry::Euclidean { coords }) => euclidean(&coords[i], &coords[j]),
            (Structure::Bounded, Geometry::Matrix { distances })
            | (Structure::Bounded, Geometry::Graph { distances, .. }) => distances[i * self.len() + j],
            (Structure::Gauge { gauges }, Geometry::Euclidean { coords }) => {
                gauge_control(gauges, &coords[i], &coords[j])
            }
            (Structure::Gauge { .. }, _) => unreachable!("validated at construction"),
        }
    }

    /// The generator section `M_R(x)`.
    pub fn ball(&self, x: usize, radius: f64) -> PointSet {
        PointSet((0..self.len()).filter(|&y| self.control(x, y) <= radius).collect())
    }

    /// `M_R[A]` without the scale-cap check.
    pub fn neighbourhood(&self, set: &PointSet, radius: f64) -> PointSet {
        if set.is_empty() {
            return PointSet::new();
        }
        PointSet(
            (0..self.len())
                .filter(|&y| set.contains(y) || set.iter().any(|a| self.control(y, a) <= radius))
                .collect(),
        )
    }

    /// Distance-like control from `x` to a set (infinite for the empty set).
    pub fn control_to_set(&self, x: usize, set: &PointSet) -> f64 {
        set.iter().map(|a| self.control(x, a)).fold(f64::INFINITY, f64::min)
    }

    /// Smallest positive control value between two points.
    pub fn min_positive_control(&self) -> f64 {
        let n = self.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                let c = self.control(i, j);
                if c > 0.0 && c < best {
                    best = c;
                }
            }
        }
        best
    }

    /// Dense control matrix, row-major.
    pub fn control_matrix(&self) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let c = self.control(i, j);
                out[i * n + j] = c;
                out[j * n + i] = c;
            }
        }
        out
    }

    /// Subspace on `points` with the inherited structure; the frontier is restricted.
    ///
    /// Returned indices follow the order of `points`.
    pub fn subspace(&self, points: &PointSet) -> Result<TruncatedCoarseSpace> {
        self.check_set(points)?;
        if points.is_empty() {
            return Err(CoarseError::InvalidSpace("empty subspace".into()));
        }
        let idx = points.as_slice();
        let labels = idx.iter().map(|&i| self.labels[i].clone()).collect();
        let position = |x: usize| idx.binary_search(&x).ok();
        let frontier: PointSet = self.frontier.iter().filter_map(position).collect();
        let geometry = match &self.geometry {
            Geometry::Euclidean { coords } => {
                Geometry::Euclidean { coords: idx.iter().map(|&i| coords[i].clone()).collect() }
            }
            Geometry::Matrix { distances } | Geometry::Graph { distances, .. } => {
                let n = self.len();
                let mut sub = Vec::with_capacity(idx.len() * idx.len());
                for &i in idx {
                    for &j in idx {
                        sub.push(distances[i * n + j]);
                    }
                }
                Geometry::Matrix { distances: sub }
            }
        };
        TruncatedCoarseSpace::new(labels, geometry, self.structure.clone(), frontier, self.scale_cap)
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn gauge_max(gauges: &[Gauge], m: f64) -> f64 {
    gauges.iter().map(|g| g.eval(m)).fold(f64::NEG_INFINITY, f64::max)
}

/// Per-coordinate gauge control, maximised over coordinates. Coordinates on
/// opposite sides of zero belong to different rays of `R ⊔ R`; they are only
/// related through bounded blocks around the shared base point.
fn gauge_control(gauges: &[Gauge], a: &[f64], b: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for (&s, &t) in a.iter().zip(b) {
        let c = if s * t >= 0.0 {
            (s - t).abs() / gauge_max(gauges, s.abs().min(t.abs()))
        } else {
            s.abs().max(t.abs()) / gauge_max(gauges, 0.0)
        };
        worst = worst.max(c);
    }
    worst
}

fn all_pairs_shortest_paths(n: usize, edges: &[(usize, usize, f64)]) -> Vec<f64> {
    use std::cmp::Ordering;
    use std::collections::BinaryHeap;

    #[derive(PartialEq)]
    struct Item(f64, usize);
    impl Eq for Item {}
    impl PartialOrd for Item {
        fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Item {
        fn cmp(&self, other: &Self) -> Ordering {
            other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
        }
    }

    let mut adjacency = vec![Vec::new(); n];
    for &(a, b, w) in edges {
        adjacency[a].push((b, w));
        adjacency[b].push((a, w));
    }
    let mut out = vec![f64::INFINITY; n * n];
    for source in 0..n {
        let row = &mut out[source * n..(source + 1) * n];
        row[source] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(Item(0.0, source));
        while let Some(Item(d, v)) = heap.pop() {
            if d > row[v] {
                continue;
            }
            for &(u, w) in &adjacency[v] {
                let nd = d + w;
                if nd < row[u] {
                    row[u] = nd;
                    heap.push(Item(nd, u));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval(lo: i64, hi: i64) -> TruncatedCoarseSpace {
        let labels = (lo..=hi).map(|v| v.to_string()).collect();
        let coords = (lo..=hi).map(|v| vec![v as f64]).collect();
        TruncatedCoarseSpace::new(
            labels,
            Geometry::Euclidean { coords },
            Structure::Bounded,
            PointSet::new(),
            100.0,
        )
        .unwrap()
    }

    #[test]
    fn pointset_algebra() {
        let a: PointSet = [5, 1, 3, 3].into_iter().collect();
        let b: PointSet = [3, 4, 5].into_iter().collect();
        assert_eq!(a.as_slice(), &[1, 3, 5]);
        assert_eq!(a.intersection(&b).as_slice(), &[3, 5]);
        assert_eq!(a.union(&b).as_slice(), &[1, 3, 4, 5]);
        assert!(a.intersects(&b));
        assert!(PointSet::singleton(3).is_subset(&a));
        assert!(!b.is_subset(&a));
    }

    #[test]
    fn rejects_repeated_coordinates() {
        let err = TruncatedCoarseSpace::new(
            vec!["a".into(), "b".into()],
            Geometry::Euclidean { coords: vec![vec![0.0], vec![0.0]] },
            Structure::Bounded,
            PointSet::new(),
            1.0,
        );
        assert!(err.is_err());
    }

    #[test]
    fn rejects_asymmetric_matrix_and_bad_frontier() {
        let asym = TruncatedCoarseSpace::new(
            vec!["a".into(), "b".into()],
            Geometry::Matrix { distances: vec![0.0, 1.0, 2.0, 0.0] },
            Structure::Bounded,
            PointSet::new(),
            1.0,
        );
        assert!(asym.is_err());
        let bad_frontier = TruncatedCoarseSpace::new(
            vec!["a".into()],
            Geometry::Matrix { distances: vec![0.0] },
            Structure::Bounded,
            PointSet::singleton(4),
            1.0,
        );
        assert!(matches!(bad_frontier, Err(CoarseError::PointOutOfRange { .. })));
    }

    #[test]
    fn non_monotone_gauge_rejected() {
        let g = Gauge::Table { values: vec![1.0, 3.0, 2.0] };
        assert!(g.validate().is_err());
        assert!(Gauge::unit().validate().is_ok());
        assert_eq!(Gauge::Table { values: vec![1.0, 3.0] }.eval(0.5), 2.0);
    }

    #[test]
    fn graph_distances_are_shortest_paths() {
        let labels = (0..4).map(|i| i.to_string()).collect();
        let edges = vec![(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)];
        let s = TruncatedCoarseSpace::from_graph(labels, edges, PointSet::new(), 2.0).unwrap();
        assert_eq!(s.control(0, 2), 2.0);
        assert_eq!(s.control(1, 3), 2.0);
        assert_eq!(s.control(0, 3), 1.0);
    }

    #[test]
    fn subspace_restricts_frontier() {
        let s = interval(0, 10).with_frontier(PointSet::singleton(10)).unwrap();
        let sub = s.subspace(&[8, 9, 10].into_iter().collect()).unwrap();
        assert_eq!(sub.frontier().as_slice(), &[2]);
        assert_eq!(sub.control(0, 2), 2.0);
    }
}
