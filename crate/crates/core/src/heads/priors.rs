use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::class::ClassId;
use crate::openlabel::{filter_paired, DatasetManifest};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassPrior {
    /// Mean (l, w, h), metres.
    pub dims: [f64; 3],
    /// Mean sensor-frame z of box centers, metres.
    pub z_center: f64,
    /// No training labels; `dims` and `z_center` are placeholders.
    pub fallback: bool,
    pub samples: usize,
}

/// Per-class dimension priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassPriorTable {
    pub classes: BTreeMap<ClassId, ClassPrior>,
}

impl ClassPrior {
    fn fallback(class: ClassId) -> Self {
        let dims = match class {
            ClassId::Person => [0.6, 0.6, 1.75],
            ClassId::RoadVehicle => [4.5, 1.8, 1.6],
            ClassId::BufferStop => [2.0, 3.0, 1.5],
            ClassId::CatenaryPole => [0.5, 0.5, 7.0],
            ClassId::SignalPole => [0.3, 0.3, 4.0],
        };
        ClassPrior { dims, z_center: dims[2] / 2.0, fallback: true, samples: 0 }
    }
}

impl Default for ClassPriorTable {
    /// Placeholder dims for every class.
    fn default() -> Self {
        ClassPriorTable { classes: ClassId::ALL.iter().map(|c| (*c, ClassPrior::fallback(*c))).collect() }
    }
}

impl ClassPriorTable {
    pub fn get(&self, class: ClassId) -> ClassPrior {
        self.classes.get(&class).copied().unwrap_or_else(|| ClassPrior::fallback(class))
    }
}

/// Mean dims and center height per class over the paired labels of a
/// (training) manifest; absent classes keep the placeholder prior.
pub fn compute_class_priors(manifest: &DatasetManifest) -> ClassPriorTable {
    let mut sums: BTreeMap<ClassId, ([f64; 4], usize)> = BTreeMap::new();
    for frame in &manifest.frames {
        for label in filter_paired(&frame.labels) {
            let (Some(class), Some(b)) = (label.class.known(), label.box3d) else {
                continue;
            };
            let (acc, n) = sums.entry(class).or_default();
            for (a, v) in acc.iter_mut().zip([b.dims[0], b.dims[1], b.dims[2], b.center[2]]) {
                *a += v;
            }
            *n += 1;
        }
    }
    let mut table = ClassPriorTable::default();
    for (class, (acc, n)) in sums {
        let k = n as f64;
        table.classes.insert(
            class,
            ClassPrior {
                dims: [acc[0] / k, acc[1] / k, acc[2] / k],
                z_center: acc[3] / k,
                fallback: false,
                samples: n,
            },
        );
    }
    table
}
