use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::space::{Gauge, Geometry, PointSet, Structure, TruncatedCoarseSpace};
use crate::error::{CoarseError, Result};

/// JSON form of a space:
///
/// ```json
/// { "points": ["a", "b"],
///   "geometry": {"kind": "euclidean", "coords": [[0], [1]]},
///   "structure": {"kind": "bounded"},
///   "frontier": [1],
///   "scale_cap": 4 }
/// ```
///
/// Matrix geometry carries `"distances"` as rows; graph geometry carries
/// `"edges"` as `[a, b, weight]` triples. Point identifiers may be strings or numbers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceDescription {
    pub points: Vec<Value>,
    pub geometry: GeometryDescription,
    #[serde(default = "bounded")]
    pub structure: StructureDescription,
    #[serde(default)]
    pub frontier: Vec<usize>,
    pub scale_cap: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GeometryDescription {
    Euclidean { coords: Vec<Vec<f64>> },
    Matrix { distances: Vec<Vec<f64>> },
    Graph { edges: Vec<(usize, usize, f64)> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StructureDescription {
    Bounded,
    Gauge { gauges: Vec<Gauge> },
}

fn bounded() -> StructureDescription {
    StructureDescription::Bounded
}

fn label_of(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl SpaceDescription {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn build(&self) -> Result<TruncatedCoarseSpace> {
        let labels: Vec<String> = self.points.iter().map(label_of).collect();
        let frontier: PointSet = self.frontier.iter().copied().collect();
        let structure = match &self.structure {
            StructureDescription::Bounded => Structure::Bounded,
            StructureDescription::Gauge { gauges } => Structure::Gauge { gauges: gauges.clone() },
        };
        match &self.geometry {
            GeometryDescription::Euclidean { coords } => TruncatedCoarseSpace::new(
                labels,
                Geometry::Euclidean { coords: coords.clone() },
                structure,
                frontier,
                self.scale_cap,
            ),
            GeometryDescription::Matrix { distances } => {
                let n = labels.len();
                if distances.len() != n || distances.iter().any(|r| r.len() != n) {
                    return Err(CoarseError::InvalidSpace(format!("distance matrix is not {n}x{n}")));
                }
                TruncatedCoarseSpace::new(
                    labels,
                    Geometry::Matrix { distances: distances.concat() },
                    structure,
                    frontier,
                    self.scale_cap,
                )
            }
            GeometryDescription::Graph { edges } => {
                if !matches!(structure, Structure::Bounded) {
                    return Err(CoarseError::InvalidSpace("gauge structures need euclidean coordinates".into()));
                }
                TruncatedCoarseSpace::from_graph(labels, edges.clone(), frontier, self.scale_cap)
            }
        }
    }

    pub fn describe(space: &TruncatedCoarseSpace) -> Self {
        let n = space.len();
        let geometry = match space.geometry() {
            Geometry::Euclidean { coords } => GeometryDescription::Euclidean { coords: coords.clone() },
            Geometry::Matrix { distances } => {
                GeometryDescription::Matrix { distances: distances.chunks(n.max(1)).map(<[f64]>::to_vec).collect() }
            }
            Geometry::Graph { edges, .. } => GeometryDescription::Graph { edges: edges.clone() },
        };
        let structure = match space.structure() {
            Structure::Bounded => StructureDescription::Bounded,
            Structure::Gauge { gauges } => StructureDescription::Gauge { gauges: gauges.clone() },
        };
        SpaceDescription {
            points: space.labels().iter().map(|l| Value::String(l.clone())).collect(),
            geometry,
            structure,
            frontier: space.frontier().as_slice().to_vec(),
            scale_cap: space.scale_cap(),
        }
    }
}

impl TruncatedCoarseSpace {
    pub fn from_json(text: &str) -> Result<Self> {
        SpaceDescription::from_json(text)?.build()
    }

    pub fn to_json(&self) -> Result<String> {
        SpaceDescription::describe(self).to_json()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_graph_and_gauge() {
        let text = r#"{
            "points": [0, 1, 2],
            "geometry": {"kind": "graph", "edges": [[0, 1, 1.0], [1, 2, 2.0]]},
            "frontier": [2],
            "scale_cap": 5
        }"#;
        let s = TruncatedCoarseSpace::from_json(text).unwrap();
        assert_eq!(s.control(0, 2), 3.0);
        assert_eq!(s.label(1), "1");
        let again = TruncatedCoarseSpace::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(again, s);

        let gauge = r#"{
            "points": ["a", "b"],
            "geometry": {"kind": "euclidean", "coords": [[0], [3]]},
            "structure": {"kind": "gauge", "gauges": [{"kind": "affine", "offset": 1, "slope": 1}]},
            "scale_cap": 10
        }"#;
        let g = TruncatedCoarseSpace::from_json(gauge).unwrap();
        assert_eq!(g.control(0, 1), 3.0);
    }

    #[test]
    fn malformed_input_is_an_error() {
        assert!(TruncatedCoarseSpace::from_json("{\"points\": []}").is_err());
        let empty = r#"{"points": [], "geometry": {"kind": "euclidean", "coords": []}, "scale_cap": 1}"#;
        assert!(TruncatedCoarseSpace::from_json(empty).is_err());
    }
}
