use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::FrustumError;
use crate::class::ClassId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CentroidStatistic {
    Mean,
    Median,
}

/// Distance fusion and routing parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionConfig {
    /// Weight of the frustum centroid distance; `1 - w` goes to the detector.
    pub w: f64,
    /// Long-range threshold per class, metres.
    pub thresholds: BTreeMap<ClassId, f64>,
    pub centroid_statistic: CentroidStatistic,
    /// Fraction of points trimmed from each depth tail before the statistic.
    pub trim_fraction: f64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            w: 0.5,
            thresholds: ClassId::ALL.iter().map(|c| (*c, 100.0)).collect(),
            centroid_statistic: CentroidStatistic::Median,
            trim_fraction: 0.0,
        }
    }
}

impl FusionConfig {
    /// Thresholds for KITTI-style road scenes: 60 m for people, 75 m for
    /// vehicles, 100 m otherwise.
    pub fn kitti_profile() -> Self {
        let mut cfg = FusionConfig::default();
        cfg.thresholds.insert(ClassId::Person, 60.0);
        cfg.thresholds.insert(ClassId::RoadVehicle, 75.0);
        cfg
    }

    pub fn validate(&self) -> Result<(), FrustumError> {
        if !(0.0..=1.0).contains(&self.w) {
            return Err(FrustumError::Config(format!("w must lie in [0, 1], got {}", self.w)));
        }
        if !(0.0..0.25).contains(&self.trim_fraction) {
            return Err(FrustumError::Config(format!(
                "trim_fraction must lie in [0, 0.25), got {}",
                self.trim_fraction
            )));
        }
        for class in ClassId::ALL {
            match self.thresholds.get(&class) {
                Some(t) if t.is_finite() && *t >= 0.0 => {}
                Some(t) => return Err(FrustumError::Config(format!("threshold for {class} is {t}"))),
                None => return Err(FrustumError::Config(format!("no route threshold for {class}"))),
            }
        }
        Ok(())
    }

    pub fn fuse(&self, centroid_distance: f64, detector_distance: f64) -> f64 {
        self.w * centroid_distance + (1.0 - self.w) * detector_distance
    }

    pub fn threshold(&self, class: ClassId) -> Result<f64, FrustumError> {
        self.thresholds
            .get(&class)
            .copied()
            .ok_or_else(|| FrustumError::Config(format!("no route threshold for {class}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Short,
    Long,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoutingDecision {
    pub route: Route,
    pub fused_distance: f64,
    pub threshold_used: f64,
}
