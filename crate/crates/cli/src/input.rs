//! Input formats: point selectors, schedules, degree ranges and map files.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use coarse_core::coarse_space::{PointMap, PointSet, SpaceDescription, TruncatedCoarseSpace};
use coarse_core::coarsening::Schedule;
use serde::Deserialize;

pub fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

pub fn load_space(path: &Path) -> Result<Arc<TruncatedCoarseSpace>, String> {
    let text = read(path)?;
    let space = TruncatedCoarseSpace::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(Arc::new(space))
}

/// `doubling`, `increments`, or explicit radii `r1,r2,...` (strictly increasing).
pub fn parse_schedule(s: &str) -> Result<Schedule, String> {
    match s {
        "doubling" => Ok(Schedule::Doubling),
        "increments" => Ok(Schedule::Increments),
        _ => {
            let radii = s
                .split(',')
                .map(|r| r.trim().parse::<f64>().map_err(|_| format!("bad radius {r:?} in schedule")))
                .collect::<Result<Vec<_>, _>>()?;
            if radii.windows(2).any(|w| w[0] >= w[1]) || radii.iter().any(|&r| !(r > 0.0)) {
                return Err("explicit radii must be positive and strictly increasing".into());
            }
            Ok(Schedule::Radii(radii))
        }
    }
}

/// `a..b`, inclusive.
pub fn parse_degrees(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("degree range {s:?} is not of the form a..b"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|_| format!("bad degree {v:?}"));
    let (a, b) = (parse(a)?, parse(b)?);
    if a > b {
        return Err(format!("empty degree range {s}"));
    }
    Ok((a, b))
}

/// Selects points of a space.
///
/// * `x0<=0`, `x1>=2`, `x1==0`, `x0<5`, `x0>5`: a coordinate comparison;
/// * `frontier`: the frontier;
/// * `1,4,7`: explicit indices;
/// * any other string is read as a JSON file holding an index array.
pub fn select(space: &TruncatedCoarseSpace, spec: &str) -> Result<PointSet, String> {
    if spec == "frontier" {
        return Ok(space.frontier().clone());
    }
    if let Some(rest) = spec.strip_prefix('x') {
        return select_by_coordinate(space, rest).map_err(|e| format!("selector {spec:?}: {e}"));
    }
    let indices: Vec<usize> = if spec.chars().all(|c| c.is_ascii_digit() || c == ',' || c == ' ') {
        spec.split(',').filter(|t| !t.trim().is_empty()).map(|t| t.trim().parse().unwrap()).collect()
    } else {
        serde_json::from_str(&read(Path::new(spec))?).map_err(|e| format!("{spec}: {e}"))?
    };
    let set: PointSet = indices.into_iter().collect();
    space.check_set(&set).map_err(|e| e.to_string())?;
    Ok(set)
}

fn select_by_coordinate(space: &TruncatedCoarseSpace, rest: &str) -> Result<PointSet, String> {
    let coords = space.coords().ok_or("the space has no coordinates")?;
    let split = rest.find(|c: char| !c.is_ascii_digit()).ok_or("missing comparison")?;
    let axis: usize = rest[..split].parse().map_err(|_| "missing axis")?;
    let cmp = &rest[split..];
    let (op, value) = ["<=", ">=", "==", "<", ">"]
        .iter()
        .find_map(|op| cmp.strip_prefix(op).map(|v| (*op, v)))
        .ok_or("unknown comparison")?;
    let value: f64 = value.trim().parse().map_err(|_| "bad value")?;
    if coords.first().is_some_and(|c| axis >= c.len()) {
        return Err(format!("axis {axis} out of range"));
    }
    Ok((0..space.len())
        .filter(|&i| {
            let v = coords[i][axis];
            match op {
                "<=" => v <= value,
                ">=" => v >= value,
                "==" => v == value,
                "<" => v < value,
                _ => v > value,
            }
        })
        .collect())
}

/// A map between two spaces: `{ "source": <space>, "target": <space>, "images": [...] }`.
#[derive(Deserialize)]
struct MapFile {
    source: SpaceDescription,
    target: SpaceDescription,
    images: Vec<usize>,
}

pub fn load_map(path: &Path) -> Result<PointMap, String> {
    let file: MapFile = serde_json::from_str(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))?;
    let source = Arc::new(file.source.build().map_err(|e| e.to_string())?);
    let target = Arc::new(file.target.build().map_err(|e| e.to_string())?);
    PointMap::new(source, target, file.images).map_err(|e| e.to_string())
}

/// `{ "source", "target", "t_max", "values": [[F(x, 0), ..., F(x, t_max)], ...], "limit", "base" }`.
#[derive(Deserialize)]
pub struct HomotopyFile {
    pub source: SpaceDescription,
    pub target: SpaceDescription,
    pub t_max: usize,
    pub values: Vec<Vec<usize>>,
    pub limit: Vec<usize>,
    pub base: usize,
    pub settle: Option<usize>,
}

/// A finite complex on unit vectors: `{ "vertices": [[...]], "simplices": [[...]] }`.
#[derive(Deserialize)]
pub struct ComplexFile {
    pub vertices: Vec<Vec<f64>>,
    pub simplices: Vec<Vec<usize>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules_and_degrees() {
        assert_eq!(parse_schedule("1,2,4").unwrap(), Schedule::Radii(vec![1.0, 2.0, 4.0]));
        assert!(parse_schedule("2,1").is_err());
        assert_eq!(parse_degrees("0..2").unwrap(), (0, 2));
        assert!(parse_degrees("3..1").is_err());
    }

    #[test]
    fn coordinate_selectors() {
        let line = coarse_core::spaces::make_line(4).unwrap();
        assert_eq!(select(&line, "x0<=0").unwrap().as_slice(), &[0, 1, 2, 3, 4]);
        assert_eq!(select(&line, "x0>2").unwrap().as_slice(), &[7, 8]);
        assert_eq!(select(&line, "3,1").unwrap().as_slice(), &[1, 3]);
        assert!(select(&line, "x1<=0").is_err());
    }
}
