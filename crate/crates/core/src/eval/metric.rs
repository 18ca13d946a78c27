use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A reported number, or why there is none.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    Value(f64),
    /// No ground truth in scope.
    NotApplicable,
    /// Ground truth present but nothing detected.
    NoDetections,
}

impl Metric {
    pub fn value(self) -> Option<f64> {
        match self {
            Metric::Value(v) => Some(v),
            _ => None,
        }
    }

    /// Mean of the values present; N/A when none.
    pub fn mean(items: impl IntoIterator<Item = Metric>) -> Metric {
        let vals: Vec<f64> = items.into_iter().filter_map(Metric::value).collect();
        if vals.is_empty() {
            Metric::NotApplicable
        } else {
            Metric::Value(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Value(v) => write!(f, "{v:.4}"),
            Metric::NotApplicable => f.write_str("N/A"),
            Metric::NoDetections => f.write_str("N/D"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Repr {
    Number(f64),
    Marker(String),
}

impl Serialize for Metric {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Metric::Value(v) => Repr::Number(*v),
            Metric::NotApplicable => Repr::Marker("N/A".into()),
            Metric::NoDetections => Repr::Marker("N/D".into()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Metric {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(v) => Ok(Metric::Value(v)),
            Repr::Marker(m) if m == "N/A" => Ok(Metric::NotApplicable),
            Repr::Marker(m) if m == "N/D" => Ok(Metric::NoDetections),
            Repr::Marker(m) => Err(serde::de::Error::custom(format!("unknown metric marker `{m}`"))),
        }
    }
}
