//! Validation of coarse homotopy data on a truncated time grid.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::coarse_space::{scale_ladder, validate_coarse_map, CoarseMapReport, PointMap, ScaleWitness, TruncatedCoarseSpace};
use crate::error::{CoarseError, Result};

/// Values `F(x, t)` for `t = 0..=t_max`, a declared limit map and a base point for balls.
///
/// The time parameter is the bounded ray `0..=t_max` with frontier `{t_max}`.
#[derive(Clone, Debug)]
pub struct HomotopyData {
    pub source: Arc<TruncatedCoarseSpace>,
    pub target: Arc<TruncatedCoarseSpace>,
    pub t_max: usize,
    values: Vec<usize>,
    pub limit: PointMap,
    pub base: usize,
    /// Final grid steps over which constancy must be observed.
    pub settle: usize,
}

impl HomotopyData {
    pub fn new(
        source: Arc<TruncatedCoarseSpace>,
        target: Arc<TruncatedCoarseSpace>,
        t_max: usize,
        values: Vec<usize>,
        limit: Vec<usize>,
        base: usize,
    ) -> Result<Self> {
        if values.len() != source.len() * (t_max + 1) {
            return Err(CoarseError::Precondition(format!(
                "{} values for a grid of {} points by {} times",
                values.len(),
                source.len(),
                t_max + 1
            )));
        }
        if let Some(&bad) = values.iter().find(|&&y| y >= target.len()) {
            return Err(CoarseError::PointOutOfRange { index: bad, len: target.len() });
        }
        source.check_point(base)?;
        let limit = PointMap::new(source.clone(), target.clone(), limit)?;
        Ok(HomotopyData { source, target, t_max, values, limit, base, settle: t_max.div_ceil(2) })
    }

    pub fn from_fn(
        source: Arc<TruncatedCoarseSpace>,
        target: Arc<TruncatedCoarseSpace>,
        t_max: usize,
        f: impl Fn(usize, usize) -> usize + Sync,
        limit: impl Fn(usize) -> usize,
        base: usize,
    ) -> Result<Self> {
        let values = (0..source.len() * (t_max + 1))
            .into_par_iter()
            .map(|i| f(i / (t_max + 1), i % (t_max + 1)))
            .collect();
        let limit = (0..source.len()).map(limit).collect();
        Self::new(source, target, t_max, values, limit, base)
    }

    /// `F(x, t) = f(x)` for every `t`.
    pub fn constant(f: &PointMap, t_max: usize, base: usize) -> Result<Self> {
        let images = f.images().to_vec();
        Self::from_fn(f.source().clone(), f.target().clone(), t_max, |x, _| images[x], |x| images[x], base)
    }

    pub fn with_settle(mut self, settle: usize) -> Self {
        self.settle = settle.min(self.t_max);
        self
    }

    pub fn at(&self, x: usize, t: usize) -> usize {
        self.values[x * (self.t_max + 1) + t]
    }

    /// First time after which `F(x, -)` never changes.
    fn settling_time(&self, x: usize) -> usize {
        let last = self.at(x, self.t_max);
        (0..=self.t_max).rev().take_while(|&t| self.at(x, t) == last).last().unwrap_or(self.t_max)
    }
}

/// Graph map `(x, t) ↦ (F(x, t), t)` checked without materializing the products.
#[derive(Clone, Debug, Serialize)]
pub struct GraphCheck {
    pub witnesses: Vec<ScaleWitness>,
    pub uniformly_expansive: bool,
    pub proper: bool,
    /// Source frontier points `(x, t)` landing farther than the budget from the target frontier.
    pub proper_failures: Vec<(String, usize)>,
    pub coarse: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Threshold {
    pub radius: f64,
    pub points: usize,
    /// `T(B)`: from this time on `F` is constant on the ball.
    pub settles_at: usize,
    /// Constancy was observed over at least `settle` final steps.
    pub eventually_constant: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitCheck {
    pub report: CoarseMapReport,
    /// The declared limit equals `F(-, t_max)`.
    pub agrees: bool,
    pub disagreements: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct HomotopyReport {
    pub budget: f64,
    pub t_max: usize,
    pub settle: usize,
    pub graph: GraphCheck,
    pub thresholds: Vec<Threshold>,
    pub eventually_constant: bool,
    pub limit: LimitCheck,
    pub valid: bool,
}

impl HomotopyReport {
    pub fn threshold(&self, radius: f64) -> Option<&Threshold> {
        self.thresholds.iter().find(|t| t.radius == radius)
    }
}

/// Checks the three conditions of a coarse homotopy up to `budget`:
/// the graph map is coarse, `F` settles on every ball around the base point
/// that avoids the frontier, and the declared limit is coarse and matches the
/// final values.
pub fn validate_homotopy(h: &HomotopyData, budget: f64) -> Result<HomotopyReport> {
    if budget > h.source.scale_cap() {
        return Err(CoarseError::ScaleExceedsCap { scale: budget, cap: h.source.scale_cap() });
    }
    let graph = graph_check(h, budget);
    let thresholds = thresholds(h);
    let eventually_constant = thresholds.iter().all(|t| t.eventually_constant);
    let report = validate_coarse_map(&h.limit, budget);
    let disagreements = (0..h.source.len()).filter(|&x| h.limit.apply(x) != h.at(x, h.t_max)).count();
    let limit = LimitCheck { agrees: disagreements == 0, disagreements, report };
    let valid = graph.coarse && eventually_constant && limit.report.coarse && limit.agrees;
    Ok(HomotopyReport { budget, t_max: h.t_max, settle: h.settle, graph, thresholds, eventually_constant, limit, valid })
}

fn graph_check(h: &HomotopyData, budget: f64) -> GraphCheck {
    let ladder = scale_ladder(budget);
    let (src, tgt) = (&h.source, &h.target);
    let top = ladder.last().copied().unwrap_or(0.0);
    let span = top.floor() as usize;
    // Largest image scale per rung, from pairs first admitted at that rung.
    let per_rung = (0..src.len())
        .into_par_iter()
        .map(|x| {
            let mut best = vec![0.0_f64; ladder.len()];
            for y in 0..src.len() {
                let c = src.control(x, y);
                if c > top {
                    continue;
                }
                for t in 0..=h.t_max {
                    for dt in 0..=span.min(h.t_max - t) {
                        let c = c.max(dt as f64);
                        let Some(rung) = ladder.iter().position(|&r| c <= r) else { continue };
                        let image = tgt.control(h.at(x, t), h.at(y, t + dt)).max(dt as f64);
                        best[rung] = best[rung].max(image);
                    }
                }
            }
            best
        })
        .reduce(
            || vec![0.0; ladder.len()],
            |a, b| a.iter().zip(&b).map(|(u, v)| u.max(*v)).collect(),
        );
    let mut running = 0.0_f64;
    let witnesses: Vec<ScaleWitness> = ladder
        .iter()
        .zip(&per_rung)
        .map(|(&r, &s)| {
            running = running.max(s);
            ScaleWitness { scale: r, image_scale: running.is_finite().then_some(running) }
        })
        .collect();
    let cap = tgt.scale_cap();
    let uniformly_expansive = witnesses.iter().all(|w| matches!(w.image_scale, Some(s) if s <= cap));
    let mut proper_failures = Vec::new();
    for x in src.frontier().iter() {
        for t in 0..h.t_max {
            let y = h.at(x, t);
            let d = tgt.control_to_set(y, tgt.frontier()).min((h.t_max - t) as f64);
            if d > budget {
                proper_failures.push((src.label(x).to_string(), t));
            }
        }
    }
    let proper = proper_failures.is_empty();
    proper_failures.truncate(16);
    GraphCheck { witnesses, uniformly_expansive, proper, proper_failures, coarse: uniformly_expansive && proper }
}

fn thresholds(h: &HomotopyData) -> Vec<Threshold> {
    let src = &h.source;
    let settle: Vec<usize> = (0..src.len()).into_par_iter().map(|x| h.settling_time(x)).collect();
    let mut dist: Vec<(f64, usize)> = (0..src.len()).map(|x| (src.control(h.base, x), x)).collect();
    dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut out = Vec::new();
    let mut worst = 0;
    let mut i = 0;
    for rho in 0.. {
        let r = rho as f64;
        let mut touches = false;
        while i < dist.len() && dist[i].0 <= r {
            let x = dist[i].1;
            touches |= src.is_frontier(x);
            worst = worst.max(settle[x]);
            i += 1;
        }
        if touches || !dist.iter().any(|d| d.0.is_finite()) {
            break;
        }
        out.push(Threshold {
            radius: r,
            points: i,
            settles_at: worst,
            eventually_constant: worst + h.settle <= h.t_max,
        });
        if i == dist.len() || !dist[i].0.is_finite() {
            break;
        }
    }
    out
}
