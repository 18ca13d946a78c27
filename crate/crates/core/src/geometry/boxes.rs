use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::{GeometryError, PointCloud, Vec3};

/// Containment slack for points on a box face after the inverse-yaw rotation.
const INSIDE_EPS: f64 = 1e-9;

/// Wraps an angle into `(-π, π]`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Axis-aligned image box in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct Box2D {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl TryFrom<[f64; 4]> for Box2D {
    type Error = GeometryError;

    fn try_from(v: [f64; 4]) -> Result<Self, Self::Error> {
        Box2D::new(v[0], v[1], v[2], v[3])
    }
}

impl From<Box2D> for [f64; 4] {
    fn from(b: Box2D) -> Self {
        [b.x1, b.y1, b.x2, b.y2]
    }
}

impl Box2D {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self, GeometryError> {
        if !(x1 < x2 && y1 < y2) || ![x1, y1, x2, y2].iter().all(|v| v.is_finite()) {
            return Err(GeometryError::InvalidBox(format!(
                "2D box needs x1 < x2 and y1 < y2, got ({x1}, {y1}, {x2}, {y2})"
            )));
        }
        Ok(Box2D { x1, y1, x2, y2 })
    }

    /// Builds a box and clips it to the image rectangle `[0, width] × [0, height]`.
    pub fn new_clipped(x1: f64, y1: f64, x2: f64, y2: f64, width: u32, height: u32) -> Result<Self, GeometryError> {
        let (w, h) = (f64::from(width), f64::from(height));
        Box2D::new(x1.clamp(0.0, w), y1.clamp(0.0, h), x2.clamp(0.0, w), y2.clamp(0.0, h))
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x1 + self.x2), 0.5 * (self.y1 + self.y2))
    }
}

/// Yaw-only oriented cuboid in the sensor frame.
///
/// `center` is the geometric center; `dims` are (length along heading, width,
/// height); `yaw` rotates about +z and is kept in `(-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBox3D")]
pub struct Box3D {
    pub center: [f64; 3],
    pub dims: [f64; 3],
    pub yaw: f64,
}

#[derive(Deserialize)]
struct RawBox3D {
    center: [f64; 3],
    dims: [f64; 3],
    yaw: f64,
}

impl TryFrom<RawBox3D> for Box3D {
    type Error = GeometryError;

    fn try_from(r: RawBox3D) -> Result<Self, Self::Error> {
        Box3D::new(Vec3::from(r.center), r.dims, r.yaw)
    }
}

impl Box3D {
    pub fn new(center: Vec3, dims: [f64; 3], yaw: f64) -> Result<Self, GeometryError> {
        if !center.iter().all(|c| c.is_finite()) || !yaw.is_finite() {
            return Err(GeometryError::InvalidBox("non-finite center or yaw".into()));
        }
        if !dims.iter().all(|d| *d > 0.0 && d.is_finite()) {
            return Err(GeometryError::InvalidBox(format!("dimensions must be positive, got {dims:?}")));
        }
        Ok(Box3D { center: center.into(), dims, yaw: normalize_angle(yaw) })
    }

    pub fn center(&self) -> Vec3 {
        Vec3::from(self.center)
    }

    pub fn length(&self) -> f64 {
        self.dims[0]
    }

    pub fn width(&self) -> f64 {
        self.dims[1]
    }

    pub fn height(&self) -> f64 {
        self.dims[2]
    }

    pub fn volume(&self) -> f64 {
        self.dims.iter().product()
    }

    pub fn bottom(&self) -> f64 {
        self.center[2] - 0.5 * self.height()
    }

    pub fn top(&self) -> f64 {
        self.center[2] + 0.5 * self.height()
    }

    /// Ground-plane footprint, counter-clockwise seen from +z, starting at
    /// the front-right corner (+l/2, -w/2).
    pub fn footprint(&self) -> [[f64; 2]; 4] {
        let (s, c) = self.yaw.sin_cos();
        let (hl, hw) = (0.5 * self.length(), 0.5 * self.width());
        let local = [[hl, -hw], [hl, hw], [-hl, hw], [-hl, -hw]];
        local.map(|[x, y]| [self.center[0] + c * x - s * y, self.center[1] + s * x + c * y])
    }

    /// The eight corners: the bottom face in [`Box3D::footprint`] order, then
    /// the top face in the same order.
    pub fn corners(&self) -> [Vec3; 8] {
        let fp = self.footprint();
        let (b, t) = (self.bottom(), self.top());
        std::array::from_fn(|i| {
            let [x, y] = fp[i % 4];
            Vec3::new(x, y, if i < 4 { b } else { t })
        })
    }

    /// Expresses a sensor-frame point in box coordinates (origin at the
    /// center, x along the heading).
    pub fn to_local(&self, p: &Vec3) -> Vec3 {
        let d = p - self.center();
        let (s, c) = self.yaw.sin_cos();
        Vec3::new(c * d.x + s * d.y, -s * d.x + c * d.y, d.z)
    }

    /// Boundary points count as inside.
    pub fn contains(&self, p: &Vec3) -> bool {
        let q = self.to_local(p);
        q.x.abs() <= 0.5 * self.length() + INSIDE_EPS
            && q.y.abs() <= 0.5 * self.width() + INSIDE_EPS
            && q.z.abs() <= 0.5 * self.height() + INSIDE_EPS
    }
}

/// Number of points inside `b` or on its boundary.
pub fn points_in_box(b: &Box3D, cloud: &PointCloud) -> usize {
    cloud.points().iter().filter(|p| b.contains(p)).count()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use super::*;

    fn unit_cube() -> Box3D {
        Box3D::new(Vec3::zeros(), [1.0, 1.0, 1.0], 0.0).unwrap()
    }

    #[test]
    fn angle_normalization() {
        assert_eq!(normalize_angle(PI), PI);
        assert_eq!(normalize_angle(-PI), PI);
        assert!((normalize_angle(3.0 * PI / 2.0) + FRAC_PI_2).abs() < 1e-12);
        assert!((normalize_angle(-7.0) - (-7.0 + TAU)).abs() < 1e-12);
    }

    #[test]
    fn box2d_validation_and_clipping() {
        assert!(Box2D::new(5.0, 0.0, 5.0, 1.0).is_err());
        let b = Box2D::new_clipped(-10.0, 5.0, 30.0, 50.0, 20, 40).unwrap();
        assert_eq!((b.x1, b.y1, b.x2, b.y2), (0.0, 5.0, 20.0, 40.0));
        assert!(Box2D::new_clipped(25.0, 0.0, 30.0, 10.0, 20, 40).is_err());
    }

    #[test]
    fn box3d_rejects_bad_dims() {
        assert!(Box3D::new(Vec3::zeros(), [1.0, 0.0, 1.0], 0.0).is_err());
        assert!(Box3D::new(Vec3::zeros(), [1.0, 1.0, -1.0], 0.0).is_err());
    }

    #[test]
    fn unit_cube_corners() {
        for c in unit_cube().corners() {
            for v in c.iter() {
                assert_eq!(v.abs(), 0.5);
            }
        }
        let c = unit_cube().corners();
        assert_eq!(c[0], Vec3::new(0.5, -0.5, -0.5));
        assert_eq!(c[1], Vec3::new(0.5, 0.5, -0.5));
        assert_eq!(c[4], Vec3::new(0.5, -0.5, 0.5));
    }

    #[test]
    fn yaw_pi_gives_same_corner_set() {
        let b0 = Box3D::new(Vec3::new(1.0, 2.0, 3.0), [2.0, 1.0, 0.5], 0.0).unwrap();
        let b1 = Box3D::new(Vec3::new(1.0, 2.0, 3.0), [2.0, 1.0, 0.5], PI).unwrap();
        for c in b1.corners() {
            assert!(b0.corners().iter().any(|d| (c - d).norm() < 1e-12));
        }
    }

    #[test]
    fn rotated_extent() {
        let b = Box3D::new(Vec3::new(1.0, 0.0, 0.0), [2.0, 1.0, 1.0], FRAC_PI_2).unwrap();
        let cs = b.corners();
        let xs = cs.iter().map(|c| c.x);
        let ys = cs.iter().map(|c| c.y);
        let (xmin, xmax) = (xs.clone().fold(f64::MAX, f64::min), xs.fold(f64::MIN, f64::max));
        let (ymin, ymax) = (ys.clone().fold(f64::MAX, f64::min), ys.fold(f64::MIN, f64::max));
        assert!((xmin - 0.5).abs() < 1e-12 && (xmax - 1.5).abs() < 1e-12);
        assert!((ymin + 1.0).abs() < 1e-12 && (ymax - 1.0).abs() < 1e-12);
    }

    #[test]
    fn centroid_of_corners_is_center() {
        let b = Box3D::new(Vec3::new(-4.0, 7.5, 1.25), [3.0, 1.5, 2.0], 0.7).unwrap();
        let mean = b.corners().iter().fold(Vec3::zeros(), |a, c| a + c) / 8.0;
        assert!((mean - b.center()).norm() < 1e-12);
    }

    #[test]
    fn containment_examples() {
        let cube = unit_cube();
        let one = |p: Vec3| points_in_box(&cube, &PointCloud::from_points(vec![p]).unwrap());
        assert_eq!(one(Vec3::new(0.5, 0.5, 0.5)), 1);
        assert_eq!(one(Vec3::new(1.5, 0.0, 0.0)), 0);
    }

    #[test]
    fn grid_inside_box_counts_exhaustively() {
        let b = Box3D::new(Vec3::zeros(), [2.0, 2.0, 2.0], 0.0).unwrap();
        let mut pts = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                for k in 0..10 {
                    let f = |n: i32| -0.9 + 0.2 * f64::from(n);
                    pts.push(Vec3::new(f(i), f(j), f(k)));
                }
            }
        }
        // independent containment oracle: axis-aligned bounds check
        let expected = pts.iter().filter(|p| p.iter().all(|c| c.abs() <= 1.0)).count();
        assert_eq!(expected, 1000);
        assert_eq!(points_in_box(&b, &PointCloud::from_points(pts).unwrap()), expected);
    }
}
