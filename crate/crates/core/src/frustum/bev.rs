use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FrameTag, Frustum, FrustumError};
use crate::io::{write_bytes, write_dmap};
use crate::raster::Raster;

/// BEV window size and cell resolution, metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BevConfig {
    pub resolution: f64,
    pub length: f64,
    pub width: f64,
}

impl Default for BevConfig {
    fn default() -> Self {
        BevConfig { resolution: 0.25, length: 48.0, width: 48.0 }
    }
}

impl BevConfig {
    pub fn validate(&self) -> Result<(), FrustumError> {
        for (name, v) in [("resolution", self.resolution), ("length", self.length), ("width", self.width)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(FrustumError::Config(format!("BEV {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Cells along x and along y.
    pub fn shape(&self) -> (usize, usize) {
        let cells = |extent: f64| ((extent / self.resolution) - 1e-9).ceil().max(1.0) as usize;
        (cells(self.length), cells(self.width))
    }
}

/// Frustum-frame extents covered by a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BevWindow {
    pub x0: f64,
    pub x1: f64,
    /// Lateral half-width; the window spans `[-y_half, y_half]`.
    pub y_half: f64,
}

/// Three-channel BEV raster of a frustum. Row index runs along +x, column
/// index along +y. Empty cells hold zero in every channel.
#[derive(Debug, Clone, PartialEq)]
pub struct BevGrid {
    pub rows: usize,
    pub cols: usize,
    pub occupancy: Vec<f32>,
    pub density: Vec<f32>,
    pub max_height: Vec<f32>,
    pub class_prior: [f32; 5],
    pub resolution: f64,
    pub window: BevWindow,
    /// Points outside the window.
    pub dropped: usize,
}

impl BevGrid {
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    pub fn total_density(&self) -> f64 {
        self.density.iter().map(|&d| d as f64).sum()
    }
}

fn cell(coord: f64, min: f64, resolution: f64, n: usize) -> Option<usize> {
    let max = min + n as f64 * resolution;
    if !(coord >= min && coord <= max) {
        return None;
    }
    Some((((coord - min) / resolution).floor() as usize).min(n - 1))
}

/// Splat a frustum-frame cloud into a window centered on the fused distance.
pub fn rasterize_bev(f: &Frustum, cfg: &BevConfig) -> Result<BevGrid, FrustumError> {
    if f.frame_tag != FrameTag::Frustum {
        return Err(FrustumError::State("sensor"));
    }
    cfg.validate()?;
    let (rows, cols) = cfg.shape();
    let x0 = f.fused_distance - cfg.length / 2.0;
    let y_half = cfg.width / 2.0;
    let mut grid = BevGrid {
        rows,
        cols,
        occupancy: vec![0.0; rows * cols],
        density: vec![0.0; rows * cols],
        max_height: vec![0.0; rows * cols],
        class_prior: f.detection.class.one_hot(),
        resolution: cfg.resolution,
        window: BevWindow { x0, x1: x0 + cfg.length, y_half },
        dropped: 0,
    };
    for p in f.points.points() {
        match (cell(p.x, x0, cfg.resolution, rows), cell(p.y, -y_half, cfg.resolution, cols)) {
            (Some(r), Some(c)) => {
                let i = grid.index(r, c);
                let z = p.z as f32;
                grid.max_height[i] = if grid.density[i] == 0.0 { z } else { grid.max_height[i].max(z) };
                grid.density[i] += 1.0;
                grid.occupancy[i] = 1.0;
            }
            _ => grid.dropped += 1,
        }
    }
    Ok(grid)
}

#[derive(Serialize)]
struct BevSidecar<'a> {
    resolution: f64,
    window: &'a BevWindow,
    class_prior: &'a [f32; 5],
    rows: usize,
    cols: usize,
    dropped: usize,
    channels: [&'static str; 3],
}

/// Write `<stem>_occupancy.dmap`, `<stem>_density.dmap`,
/// `<stem>_max_height.dmap` and a `<stem>.json` sidecar into `dir`.
pub fn write_bev(dir: &Path, stem: &str, grid: &BevGrid) -> Result<(), FrustumError> {
    let channels = [
        ("occupancy", &grid.occupancy),
        ("density", &grid.density),
        ("max_height", &grid.max_height),
    ];
    for (name, values) in channels {
        let raster = Raster::new(grid.cols as u32, grid.rows as u32, values.clone())
            .expect("grid channels match the grid shape");
        write_dmap(&dir.join(format!("{stem}_{name}.dmap")), &raster)?;
    }
    let sidecar = BevSidecar {
        resolution: grid.resolution,
        window: &grid.window,
        class_prior: &grid.class_prior,
        rows: grid.rows,
        cols: grid.cols,
        dropped: grid.dropped,
        channels: ["occupancy", "density", "max_height"],
    };
    let text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    write_bytes(&dir.join(format!("{stem}.json")), text.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::class::ClassId;
    use crate::frustum::Detection25D;
    use crate::geometry::{Box2D, PointCloud, Vec3};
    use crate::io::read_dmap;
    use proptest::prelude::*;

    fn frustum(points: Vec<Vec3>, fused: f64) -> Frustum {
        Frustum {
            detection: Detection25D::new("f", ClassId::CatenaryPole, Box2D::new(0.0, 0.0, 1.0, 1.0).unwrap(), 1.0, fused).unwrap(),
            points: PointCloud::from_points(points).unwrap(),
            centroid: Vec3::new(fused, 0.0, 0.0),
            centroid_distance: fused,
            fused_distance: fused,
            azimuth: 0.0,
            frame_tag: FrameTag::Frustum,
            synthetic: false,
        }
    }

    #[test]
    fn default_shape_and_center_cell() {
        assert_eq!(BevConfig::default().shape(), (192, 192));
        let g = rasterize_bev(&frustum(vec![Vec3::new(130.0, 0.0, 1.7)], 130.0), &BevConfig::default()).unwrap();
        let i = g.index(96, 96);
        assert_eq!(g.density[i], 1.0);
        assert_eq!(g.occupancy[i], 1.0);
        assert!((g.max_height[i] - 1.7).abs() < 1e-6);
        assert_eq!(g.class_prior, ClassId::CatenaryPole.one_hot());
        assert_eq!(g.total_density(), 1.0);
    }

    #[test]
    fn max_edge_goes_to_last_cell() {
        let pts = vec![Vec3::new(124.0, 24.0, 0.0), Vec3::new(76.0, -24.0, 0.0), Vec3::new(124.01, 0.0, 0.0)];
        let g = rasterize_bev(&frustum(pts, 100.0), &BevConfig::default()).unwrap();
        assert_eq!(g.density[g.index(191, 191)], 1.0);
        assert_eq!(g.density[g.index(0, 0)], 1.0);
        assert_eq!(g.dropped, 1);
    }

    #[test]
    fn sensor_frame_rejected() {
        let mut f = frustum(vec![], 50.0);
        f.frame_tag = FrameTag::Sensor;
        assert!(matches!(rasterize_bev(&f, &BevConfig::default()), Err(FrustumError::State(_))));
    }

    #[test]
    fn export_channels() {
        let g = rasterize_bev(
            &frustum(vec![Vec3::new(100.0, 1.0, 2.0), Vec3::new(100.1, 1.1, 3.0)], 100.0),
            &BevConfig { resolution: 1.0, length: 8.0, width: 4.0 },
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_bev(dir.path(), "f0_3", &g).unwrap();
        let density = read_dmap(&dir.path().join("f0_3_density.dmap")).unwrap();
        assert_eq!((density.width(), density.height()), (4, 8));
        assert_eq!(density.get(3, 4), 2.0);
        let heights = read_dmap(&dir.path().join("f0_3_max_height.dmap")).unwrap();
        assert_eq!(heights.get(3, 4), 3.0);
        let side: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("f0_3.json")).unwrap()).unwrap();
        assert_eq!(side["resolution"], 1.0);
        assert_eq!(side["window"]["x0"], 96.0);
    }

    proptest! {
        #[test]
        fn points_are_conserved(
            pts in prop::collection::vec((40.0f64..160.0, -40.0f64..40.0, -2.0f64..6.0), 0..300),
            fused in 60.0f64..140.0,
            res in 0.1f64..2.0,
        ) {
            let points: Vec<Vec3> = pts.iter().map(|p| Vec3::new(p.0, p.1, p.2)).collect();
            let n = points.len();
            let g = rasterize_bev(&frustum(points, fused), &BevConfig { resolution: res, length: 48.0, width: 48.0 }).unwrap();
            prop_assert_eq!(g.dropped + g.total_density() as usize, n);
            for i in 0..g.density.len() {
                prop_assert_eq!(g.occupancy[i] == 1.0, g.density[i] > 0.0);
            }
        }
    }
}
