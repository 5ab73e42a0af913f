//! JSON formats for spaces and functions.
//!
//! Space: `{"atoms":[{"id":0,"mass":1.0,"coords":[0.5]}],"metric":"euclidean"}`
//! or `{"atoms":[{"id":0,"mass":1.0}],"metric":{"matrix":[[0.0]]}}`.
//! Function: `{"values":{"0":1.5}}`.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric_measure::{build_space, Atom, MetricMeasureSpace, MetricSpec};
use crate::rearrangement::SampleFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomRecord {
    pub id: u64,
    pub mass: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricRecord {
    Named(String),
    Matrix { matrix: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceRecord {
    pub atoms: Vec<AtomRecord>,
    pub metric: MetricRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionRecord {
    pub values: BTreeMap<u64, f64>,
}

impl SpaceRecord {
    pub fn from_space(space: &MetricMeasureSpace) -> SpaceRecord {
        let spec = space.metric_spec();
        let atoms: Vec<AtomRecord> = space
            .atoms()
            .into_iter()
            .enumerate()
            .map(|(i, a)| AtomRecord {
                id: a.id,
                mass: a.mass,
                coords: match &spec {
                    MetricSpec::Euclidean(c) => Some(c[i].clone()),
                    MetricSpec::Matrix(_) => None,
                },
            })
            .collect();
        let metric = match spec {
            MetricSpec::Euclidean(_) => MetricRecord::Named("euclidean".into()),
            MetricSpec::Matrix(matrix) => MetricRecord::Matrix { matrix },
        };
        SpaceRecord { atoms, metric }
    }

    pub fn build(self) -> Result<MetricMeasureSpace> {
        let atoms = self.atoms.iter().map(|a| Atom { id: a.id, mass: a.mass }).collect();
        let spec = match self.metric {
            MetricRecord::Named(name) if name == "euclidean" => {
                let coords = self
                    .atoms
                    .into_iter()
                    .map(|a| a.coords.ok_or_else(|| Error::Parse(format!("atom {} has no coords", a.id))))
                    .collect::<Result<Vec<_>>>()?;
                MetricSpec::Euclidean(coords)
            }
            MetricRecord::Named(name) => return Err(Error::Parse(format!("unknown metric {name:?}"))),
            MetricRecord::Matrix { matrix } => MetricSpec::Matrix(matrix),
        };
        build_space(atoms, spec)
    }
}

impl FunctionRecord {
    pub fn from_function(f: &SampleFunction) -> FunctionRecord {
        let ids = f.space().ids();
        FunctionRecord { values: ids.iter().copied().zip(f.values().iter().copied()).collect() }
    }

    pub fn build<'s>(&self, space: &'s MetricMeasureSpace) -> Result<SampleFunction<'s>> {
        let map: HashMap<u64, f64> = self.values.iter().map(|(&k, &v)| (k, v)).collect();
        SampleFunction::from_id_map(space, &map)
    }
}

fn parse<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn parse_space(text: &str) -> Result<MetricMeasureSpace> {
    parse::<SpaceRecord>(text)?.build()
}

pub fn parse_function<'s>(space: &'s MetricMeasureSpace, text: &str) -> Result<SampleFunction<'s>> {
    parse::<FunctionRecord>(text)?.build(space)
}

pub fn parse_id_list(text: &str) -> Result<Vec<u64>> {
    parse(text)
}

pub fn space_to_json(space: &MetricMeasureSpace) -> String {
    serde_json::to_string_pretty(&SpaceRecord::from_space(space)).expect("space serializes")
}

pub fn function_to_json(f: &SampleFunction) -> String {
    serde_json::to_string_pretty(&FunctionRecord::from_function(f)).expect("function serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_round_trip() {
        let text = r#"{"atoms":[{"id":3,"mass":0.5,"coords":[0.0,1.0]},{"id":7,"mass":2.0,"coords":[1.0,1.0]}],"metric":"euclidean"}"#;
        let s = parse_space(text).unwrap();
        assert_eq!(s.distance(0, 1), 1.0);
        assert_eq!(parse_space(&space_to_json(&s)).unwrap(), s);
        let f = parse_function(&s, r#"{"values":{"3":1.5,"7":-2.0}}"#).unwrap();
        assert_eq!(f.values(), &[1.5, -2.0]);
        assert_eq!(parse_function(&s, &function_to_json(&f)).unwrap().values(), f.values());
    }

    #[test]
    fn matrix_round_trip() {
        let text = r#"{"atoms":[{"id":0,"mass":1.0},{"id":1,"mass":1.0}],"metric":{"matrix":[[0,2],[2,0]]}}"#;
        let s = parse_space(text).unwrap();
        assert_eq!(s.distance(0, 1), 2.0);
        assert_eq!(parse_space(&space_to_json(&s)).unwrap(), s);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse_space("{"), Err(Error::Parse(_))));
        assert!(matches!(parse_space(r#"{"atoms":[{"id":0,"mass":NaN,"coords":[0]}],"metric":"euclidean"}"#), Err(Error::Parse(_))));
        assert!(parse_space(r#"{"atoms":[{"id":0,"mass":1e999,"coords":[0]}],"metric":"euclidean"}"#).is_err());
        assert!(matches!(parse_space(r#"{"atoms":[{"id":0,"mass":1}],"metric":"taxicab"}"#), Err(Error::Parse(_))));
        assert!(matches!(parse_space(r#"{"atoms":[{"id":0,"mass":1}],"metric":"euclidean"}"#), Err(Error::Parse(_))));
        assert!(matches!(
            parse_space(r#"{"atoms":[{"id":0,"mass":-1,"coords":[0]}],"metric":"euclidean"}"#),
            Err(Error::NonPositiveMass { .. })
        ));
        assert_eq!(parse_id_list("[1, 2]").unwrap(), vec![1, 2]);
    }
}
