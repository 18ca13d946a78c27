use serde::{Deserialize, Serialize};

use super::{GeometryError, Vec3};

/// Pinhole intrinsics without distortion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawIntrinsics")]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

#[derive(Deserialize)]
struct RawIntrinsics {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    width: u32,
    height: u32,
}

impl TryFrom<RawIntrinsics> for CameraIntrinsics {
    type Error = GeometryError;

    fn try_from(r: RawIntrinsics) -> Result<Self, Self::Error> {
        CameraIntrinsics::new(r.fx, r.fy, r.cx, r.cy, r.width, r.height)
    }
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: u32, height: u32) -> Result<Self, GeometryError> {
        let bad = |m: String| Err(GeometryError::InvalidIntrinsics(m));
        if !(fx > 0.0 && fx.is_finite() && fy > 0.0 && fy.is_finite()) {
            return bad(format!("focal lengths must be positive, got fx={fx} fy={fy}"));
        }
        if !(cx >= 0.0 && cx < f64::from(width)) {
            return bad(format!("cx={cx} outside [0, {width})"));
        }
        if !(cy >= 0.0 && cy < f64::from(height)) {
            return bad(format!("cy={cy} outside [0, {height})"));
        }
        Ok(CameraIntrinsics { fx, fy, cx, cy, width, height })
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }
}

/// Result of projecting a camera-frame point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub u: f64,
    pub v: f64,
    pub depth: f64,
}

/// Projects a camera-frame point. No bounds clipping is done.
pub fn project_point(p: &Vec3, k: &CameraIntrinsics) -> Result<Projection, GeometryError> {
    if !(p.z > 0.0) {
        return Err(GeometryError::NonPositiveDepth(p.z));
    }
    Ok(Projection {
        u: k.cx + k.fx * p.x / p.z,
        v: k.cy + k.fy * p.y / p.z,
        depth: p.z,
    })
}

/// Lifts a pixel with known z-depth into the camera frame.
pub fn backproject_pixel(u: f64, v: f64, depth: f64, k: &CameraIntrinsics) -> Result<Vec3, GeometryError> {
    if !(depth > 0.0 && depth.is_finite()) {
        return Err(GeometryError::NonPositiveDepth(depth));
    }
    Ok(Vec3::new((u - k.cx) * depth / k.fx, (v - k.cy) * depth / k.fy, depth))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k() -> CameraIntrinsics {
        CameraIntrinsics::new(1000.0, 1000.0, 960.0, 540.0, 1920, 1080).unwrap()
    }

    #[test]
    fn principal_axis_projects_to_principal_point() {
        let p = project_point(&Vec3::new(0.0, 0.0, 10.0), &k()).unwrap();
        assert_eq!((p.u, p.v, p.depth), (960.0, 540.0, 10.0));
    }

    #[test]
    fn off_axis_projection() {
        let p = project_point(&Vec3::new(2.0, -1.0, 20.0), &k()).unwrap();
        assert!((p.u - 1060.0).abs() < 1e-12);
        assert!((p.v - 490.0).abs() < 1e-12);
        assert_eq!(p.depth, 20.0);
    }

    #[test]
    fn behind_camera_rejected() {
        assert!(matches!(
            project_point(&Vec3::new(0.0, 0.0, -1.0), &k()),
            Err(GeometryError::NonPositiveDepth(_))
        ));
        assert!(project_point(&Vec3::new(1.0, 0.0, 0.0), &k()).is_err());
    }

    #[test]
    fn backprojection_examples() {
        assert_eq!(backproject_pixel(960.0, 540.0, 10.0, &k()).unwrap(), Vec3::new(0.0, 0.0, 10.0));
        let p = backproject_pixel(1060.0, 490.0, 20.0, &k()).unwrap();
        assert!((p - Vec3::new(2.0, -1.0, 20.0)).norm() < 1e-12);
        assert!(backproject_pixel(0.0, 0.0, 0.0, &k()).is_err());
        assert!(backproject_pixel(0.0, 0.0, f64::NAN, &k()).is_err());
        assert!(backproject_pixel(0.0, 0.0, f64::INFINITY, &k()).is_err());
    }

    #[test]
    fn intrinsics_validation() {
        assert!(CameraIntrinsics::new(0.0, 1.0, 1.0, 1.0, 4, 4).is_err());
        assert!(CameraIntrinsics::new(1.0, 1.0, 4.0, 1.0, 4, 4).is_err());
        assert!(CameraIntrinsics::new(1.0, 1.0, 1.0, -0.5, 4, 4).is_err());
        let json = r#"{"fx":1.0,"fy":1.0,"cx":9.0,"cy":1.0,"width":4,"height":4}"#;
        assert!(serde_json::from_str::<CameraIntrinsics>(json).is_err());
    }
}
