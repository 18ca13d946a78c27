//! The five evaluated object classes and the dataset-name mapping table.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Object classes handled by the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassId {
    Person,
    RoadVehicle,
    BufferStop,
    CatenaryPole,
    SignalPole,
}

impl ClassId {
    pub const ALL: [ClassId; 5] = [
        ClassId::Person,
        ClassId::RoadVehicle,
        ClassId::BufferStop,
        ClassId::CatenaryPole,
        ClassId::SignalPole,
    ];

    /// Position in the one-hot class prior vector.
    pub fn index(self) -> usize {
        match self {
            ClassId::Person => 0,
            ClassId::RoadVehicle => 1,
            ClassId::BufferStop => 2,
            ClassId::CatenaryPole => 3,
            ClassId::SignalPole => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassId::Person => "person",
            ClassId::RoadVehicle => "road_vehicle",
            ClassId::BufferStop => "buffer_stop",
            ClassId::CatenaryPole => "catenary_pole",
            ClassId::SignalPole => "signal_pole",
        }
    }

    pub fn one_hot(self) -> [f32; 5] {
        let mut v = [0.0; 5];
        v[self.index()] = 1.0;
        v
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown class name `{0}`")]
pub struct UnknownClass(pub String);

impl FromStr for ClassId {
    type Err = UnknownClass;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ClassId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| UnknownClass(s.to_string()))
    }
}

/// Class of an annotated object: one of the five classes, or a dataset class
/// that is carried through ingest but never evaluated.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelClass {
    Known(ClassId),
    Other(String),
}

impl LabelClass {
    pub fn known(&self) -> Option<ClassId> {
        match self {
            LabelClass::Known(c) => Some(*c),
            LabelClass::Other(_) => None,
        }
    }
}

/// Dataset class name to [`ClassId`] table.
///
/// Shipped as `config/classes.json`; other datasets can supply their own file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassMap {
    names: BTreeMap<String, ClassId>,
}

const DEFAULT_CLASS_MAP: &str = include_str!("../config/classes.json");

impl Default for ClassMap {
    fn default() -> Self {
        ClassMap::from_json(DEFAULT_CLASS_MAP).expect("shipped class map is valid")
    }
}

impl ClassMap {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        let names: BTreeMap<String, ClassId> = serde_json::from_str(text)?;
        Ok(ClassMap { names })
    }

    pub fn classify(&self, dataset_name: &str) -> LabelClass {
        match self.names.get(dataset_name) {
            Some(c) => LabelClass::Known(*c),
            None => LabelClass::Other(dataset_name.to_string()),
        }
    }

    /// Dataset name written back for a label class. The first dataset name
    /// mapping onto a class wins, in lexical order.
    pub fn dataset_name(&self, class: &LabelClass) -> String {
        match class {
            LabelClass::Known(c) => self
                .names
                .iter()
                .find(|(_, v)| *v == c)
                .map(|(k, _)| k.clone())
                .unwrap_or_else(|| c.name().to_string()),
            LabelClass::Other(name) => name.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for c in ClassId::ALL {
            assert_eq!(c.name().parse::<ClassId>().unwrap(), c);
            assert_eq!(c.one_hot()[c.index()], 1.0);
        }
        assert!("tram".parse::<ClassId>().is_err());
    }

    #[test]
    fn default_map_covers_all_classes() {
        let map = ClassMap::default();
        for c in ClassId::ALL {
            assert_eq!(map.classify(c.name()), LabelClass::Known(c));
        }
        assert_eq!(map.classify("animal"), LabelClass::Other("animal".into()));
    }

    #[test]
    fn remapped_names() {
        let map = ClassMap::from_json(r#"{"Pedestrian": "person", "Car": "road_vehicle"}"#).unwrap();
        assert_eq!(map.classify("Car"), LabelClass::Known(ClassId::RoadVehicle));
        assert_eq!(map.dataset_name(&LabelClass::Known(ClassId::Person)), "Pedestrian");
        assert_eq!(map.dataset_name(&LabelClass::Known(ClassId::SignalPole)), "signal_pole");
    }
}
