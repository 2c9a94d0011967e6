//! Tabular and graphical exports of profiles.
//!
//! The SVG barcode is drawn from the CSV rows alone, so a saved table
//! reproduces the picture without recomputing anything.

use serde::{Deserialize, Serialize};

use crate::error::{CoarseError, Result};
use crate::field::Field;
use crate::theory::CoarseHomologyProfile;

/// One `(degree, stage)` row of a profile table. Stages are numbered from 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub degree: usize,
    pub stage: usize,
    pub scale: f64,
    pub rank: usize,
    /// Empty on the last stage.
    pub map_rank_to_next: Option<usize>,
    pub composite_rank_to_final: usize,
}

pub fn profile_rows<F: Field>(profile: &CoarseHomologyProfile<F>) -> Vec<ProfileRow> {
    let scales = profile.scales();
    let mut rows = Vec::new();
    for s in &profile.summaries {
        for (i, &rank) in s.ranks.iter().enumerate() {
            rows.push(ProfileRow {
                degree: s.degree,
                stage: i + 1,
                scale: scales[i],
                rank,
                map_rank_to_next: s.map_ranks.get(i).copied(),
                composite_rank_to_final: s.composite_ranks[i],
            });
        }
    }
    rows
}

pub fn rows_to_csv(rows: &[ProfileRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| CoarseError::Precondition(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CoarseError::Precondition(e.to_string()))
}

pub fn profile_csv<F: Field>(profile: &CoarseHomologyProfile<F>) -> Result<String> {
    rows_to_csv(&profile_rows(profile))
}

pub fn parse_profile_csv(text: &str) -> Result<Vec<ProfileRow>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<std::result::Result<Vec<ProfileRow>, _>>()
        .map_err(csv_error)
}

fn csv_error(e: csv::Error) -> CoarseError {
    CoarseError::Precondition(format!("profile table: {e}"))
}

const STAGE_WIDTH: f64 = 60.0;
const BAR_HEIGHT: f64 = 10.0;
const MARGIN: f64 = 40.0;

/// Barcode per degree: classes surviving to the last stage run to the right
/// edge from the stage where they first appear; the others are one stage long.
pub fn barcode_svg(rows: &[ProfileRow]) -> String {
    let mut degrees: Vec<usize> = rows.iter().map(|r| r.degree).collect();
    degrees.dedup();
    let stages = rows.iter().map(|r| r.stage).max().unwrap_or(0);
    let mut body = String::new();
    let mut y = MARGIN;
    for &p in &degrees {
        let mut own: Vec<&ProfileRow> = rows.iter().filter(|r| r.degree == p).collect();
        own.sort_by_key(|r| r.stage);
        body.push_str(&format!("<text x=\"4\" y=\"{:.1}\" font-size=\"12\">H{p}</text>\n", y + BAR_HEIGHT));
        y += 4.0;
        let mut prev = 0;
        for r in &own {
            let x0 = MARGIN + (r.stage - 1) as f64 * STAGE_WIDTH;
            let born = r.composite_rank_to_final.saturating_sub(prev);
            for _ in 0..born {
                let w = (stages + 1 - r.stage) as f64 * STAGE_WIDTH;
                body.push_str(&bar(x0, y, w, "#1f5fa8"));
                y += BAR_HEIGHT + 2.0;
            }
            for _ in 0..r.rank.saturating_sub(r.composite_rank_to_final) {
                body.push_str(&bar(x0, y, STAGE_WIDTH - 4.0, "#b0b0b0"));
                y += BAR_HEIGHT + 2.0;
            }
            prev = prev.max(r.composite_rank_to_final);
        }
        y += 2.0 * BAR_HEIGHT;
    }
    let mut ticks = String::new();
    for s in 1..=stages {
        let x = MARGIN + (s - 1) as f64 * STAGE_WIDTH;
        let scale = rows.iter().find(|r| r.stage == s).map(|r| r.scale).unwrap_or(0.0);
        ticks.push_str(&format!("<text x=\"{x:.1}\" y=\"16\" font-size=\"10\">{scale}</text>\n"));
    }
    let width = MARGIN * 2.0 + stages as f64 * STAGE_WIDTH;
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{:.0}\">\n{ticks}{body}</svg>\n",
        y + MARGIN
    )
}

fn bar(x: f64, y: f64, w: f64, fill: &str) -> String {
    format!("<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{w:.1}\" height=\"{BAR_HEIGHT:.1}\" fill=\"{fill}\"/>\n")
}

/// JSON envelope shared by every command output.
#[derive(Clone, Debug, Serialize)]
pub struct Report<T: Serialize> {
    pub command: String,
    pub version: &'static str,
    pub config: serde_json::Value,
    pub result: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(command: &str, config: serde_json::Value, result: T) -> Self {
        Report { command: command.to_string(), version: crate::VERSION, config, result }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows() -> Vec<ProfileRow> {
        vec![
            ProfileRow { degree: 1, stage: 1, scale: 1.0, rank: 2, map_rank_to_next: Some(1), composite_rank_to_final: 1 },
            ProfileRow { degree: 1, stage: 2, scale: 3.0, rank: 1, map_rank_to_next: None, composite_rank_to_final: 1 },
        ]
    }

    #[test]
    fn csv_round_trip() {
        let text = rows_to_csv(&rows()).unwrap();
        assert!(text.starts_with("degree,stage,scale,rank,map_rank_to_next,composite_rank_to_final"));
        assert_eq!(parse_profile_csv(&text).unwrap(), rows());
    }

    #[test]
    fn barcode_counts_bars() {
        let svg = barcode_svg(&rows());
        assert_eq!(svg.matches("<rect").count(), 2);
        assert_eq!(svg, barcode_svg(&rows()));
    }
}
