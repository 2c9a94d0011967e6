use std::collections::BTreeSet;

use serde::Serialize;

use super::space::{PointSet, TruncatedCoarseSpace};
use crate::error::{CoarseError, Result};

/// A controlled set of pairs on one space.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Entourage {
    /// Generator at scale `R`: all pairs of control value at most `R`.
    Scale { scale: f64 },
    /// Explicit pairs. The diagonal is always included.
    Pairs { pairs: BTreeSet<(usize, usize)> },
}

impl Entourage {
    pub fn scale(r: f64) -> Self {
        Entourage::Scale { scale: r }
    }

    /// Explicit pair set; the diagonal of the space is added.
    pub fn pairs(space: &TruncatedCoarseSpace, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set: BTreeSet<(usize, usize)> = (0..space.len()).map(|x| (x, x)).collect();
        for (x, y) in pairs {
            space.check_point(x)?;
            space.check_point(y)?;
            set.insert((x, y));
        }
        Ok(Entourage::Pairs { pairs: set })
    }

    pub fn contains(&self, space: &TruncatedCoarseSpace, x: usize, y: usize) -> bool {
        match self {
            Entourage::Scale { scale } => space.control(x, y) <= *scale,
            Entourage::Pairs { pairs } => x == y || pairs.contains(&(x, y)),
        }
    }

    /// Explicit pair set of the entourage on this space.
    pub fn materialize(&self, space: &TruncatedCoarseSpace) -> BTreeSet<(usize, usize)> {
        match self {
            Entourage::Pairs { pairs } => pairs.clone(),
            Entourage::Scale { scale } => {
                let n = space.len();
                let mut out = BTreeSet::new();
                for x in 0..n {
                    for y in 0..n {
                        if space.control(x, y) <= *scale {
                            out.insert((x, y));
                        }
                    }
                }
                out
            }
        }
    }

    fn check_cap(&self, space: &TruncatedCoarseSpace) -> Result<()> {
        if let Entourage::Scale { scale } = self {
            if *scale > space.scale_cap() {
                return Err(CoarseError::ScaleExceedsCap { scale: *scale, cap: space.scale_cap() });
            }
        }
        Ok(())
    }
}

/// `M[A] = {x : (x, a) ∈ M for some a ∈ A}`.
///
/// Refuses generator scales above the space's cap, where the truncation no
/// longer sees complete neighbourhoods.
pub fn entourage_section(space: &TruncatedCoarseSpace, m: &Entourage, a: &PointSet) -> Result<PointSet> {
    space.check_set(a)?;
    m.check_cap(space)?;
    Ok(match m {
        Entourage::Scale { scale } => space.neighbourhood(a, *scale),
        Entourage::Pairs { pairs } => pairs
            .iter()
            .filter(|(_, y)| a.contains(*y))
            .map(|&(x, _)| x)
            .chain(a.iter())
            .collect(),
    })
}

/// `M⁻¹ = {(y, x) : (x, y) ∈ M}`. Generator scales are symmetric.
pub fn invert_entourage(m: &Entourage) -> Entourage {
    match m {
        Entourage::Scale { .. } => m.clone(),
        Entourage::Pairs { pairs } => Entourage::Pairs { pairs: pairs.iter().map(|&(x, y)| (y, x)).collect() },
    }
}

/// `M₁M₂ = {(x, z) : ∃y, (x, y) ∈ M₁, (y, z) ∈ M₂}`.
///
/// Two generator scales on a metric space compose symbolically to `R + S`,
/// which contains the exact composite by the triangle inequality.
pub fn compose_entourages(space: &TruncatedCoarseSpace, m1: &Entourage, m2: &Entourage) -> Entourage {
    if let (Entourage::Scale { scale: r }, Entourage::Scale { scale: s }) = (m1, m2) {
        if space.is_metric() {
            return Entourage::scale(r + s);
        }
    }
    Entourage::Pairs { pairs: compose_exact(space, m1, m2) }
}

/// The composite enumerated through mediating points.
pub fn compose_exact(space: &TruncatedCoarseSpace, m1: &Entourage, m2: &Entourage) -> BTreeSet<(usize, usize)> {
    let n = space.len();
    let first = m1.materialize(space);
    let mut second: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (y, z) in m2.materialize(space) {
        second[y].push(z);
    }
    let mut out = BTreeSet::new();
    for (x, y) in first {
        for &z in &second[y] {
            out.insert((x, z));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coarse_space::space::{Geometry, Structure};

    fn interval(lo: i64, hi: i64) -> TruncatedCoarseSpace {
        TruncatedCoarseSpace::new(
            (lo..=hi).map(|v| v.to_string()).collect(),
            Geometry::Euclidean { coords: (lo..=hi).map(|v| vec![v as f64]).collect() },
            Structure::Bounded,
            PointSet::new(),
            10.0,
        )
        .unwrap()
    }

    #[test]
    fn diagonal_section() {
        let s = interval(0, 10);
        let a: PointSet = [3, 7].into_iter().collect();
        assert_eq!(entourage_section(&s, &Entourage::scale(0.0), &a).unwrap(), a);
    }

    #[test]
    fn section_over_cap_refused() {
        let s = interval(0, 10);
        let r = entourage_section(&s, &Entourage::scale(11.0), &PointSet::singleton(0));
        assert!(matches!(r, Err(CoarseError::ScaleExceedsCap { .. })));
    }

    #[test]
    fn explicit_inverse_swaps() {
        let s = interval(0, 2);
        let m = Entourage::pairs(&s, [(0, 1)]).unwrap();
        let inv = invert_entourage(&m);
        assert!(inv.contains(&s, 1, 0));
        assert!(!inv.contains(&s, 0, 1));
        assert!(inv.contains(&s, 2, 2));
    }

    #[test]
    fn symbolic_composition_on_metric_space() {
        let s = interval(-10, 10);
        assert_eq!(
            compose_entourages(&s, &Entourage::scale(2.0), &Entourage::scale(3.0)),
            Entourage::scale(5.0)
        );
    }
}
