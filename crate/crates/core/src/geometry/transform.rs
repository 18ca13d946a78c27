use nalgebra::{Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use super::{GeometryError, Mat3, PointCloud, Vec3};

const ORTHONORMAL_TOL: f64 = 1e-9;

/// Proper rigid motion `p -> R p + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTransform", into = "RawTransform")]
pub struct RigidTransform {
    rotation: Mat3,
    translation: Vec3,
}

#[derive(Serialize, Deserialize)]
struct RawTransform {
    /// Row-major.
    rotation: [[f64; 3]; 3],
    translation: [f64; 3],
}

impl TryFrom<RawTransform> for RigidTransform {
    type Error = GeometryError;

    fn try_from(r: RawTransform) -> Result<Self, Self::Error> {
        let m = Mat3::from_fn(|i, j| r.rotation[i][j]);
        RigidTransform::new(m, Vec3::from(r.translation))
    }
}

impl From<RigidTransform> for RawTransform {
    fn from(t: RigidTransform) -> Self {
        let r = &t.rotation;
        RawTransform {
            rotation: [
                [r[(0, 0)], r[(0, 1)], r[(0, 2)]],
                [r[(1, 0)], r[(1, 1)], r[(1, 2)]],
                [r[(2, 0)], r[(2, 1)], r[(2, 2)]],
            ],
            translation: [t.translation.x, t.translation.y, t.translation.z],
        }
    }
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidTransform {
    /// Checks `RᵀR = I` and `det R = +1` within 1e-9.
    pub fn new(rotation: Mat3, translation: Vec3) -> Result<Self, GeometryError> {
        if rotation.iter().chain(translation.iter()).any(|v| !v.is_finite()) {
            return Err(GeometryError::InvalidTransform("non-finite entry".into()));
        }
        let err = (rotation.transpose() * rotation - Mat3::identity()).abs().max();
        if err > ORTHONORMAL_TOL {
            return Err(GeometryError::InvalidTransform(format!(
                "rotation not orthonormal (max |RᵀR - I| = {err:e})"
            )));
        }
        let det = rotation.determinant();
        if (det - 1.0).abs() > ORTHONORMAL_TOL {
            return Err(GeometryError::InvalidTransform(format!("det(R) = {det}, expected +1")));
        }
        Ok(RigidTransform { rotation, translation })
    }

    pub fn identity() -> Self {
        RigidTransform { rotation: Mat3::identity(), translation: Vec3::zeros() }
    }

    pub fn from_translation(t: Vec3) -> Self {
        RigidTransform { rotation: Mat3::identity(), translation: t }
    }

    /// Rotation by `angle` radians about the up (+z) axis.
    pub fn from_yaw(angle: f64) -> Self {
        let r = Rotation3::from_axis_angle(&Vector3::z_axis(), angle);
        RigidTransform { rotation: *r.matrix(), translation: Vec3::zeros() }
    }

    /// Camera optical axes (z forward, x right, y down) expressed in the
    /// sensor axes (x forward, y left, z up), with coincident origins.
    pub fn camera_to_sensor_axes() -> Self {
        #[rustfmt::skip]
        let r = Mat3::new(
            0.0,  0.0, 1.0,
            -1.0, 0.0, 0.0,
            0.0, -1.0, 0.0,
        );
        RigidTransform { rotation: r, translation: Vec3::zeros() }
    }

    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }

    pub fn translation(&self) -> &Vec3 {
        &self.translation
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    pub fn apply_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform { rotation: rt, translation: -(rt * self.translation) }
    }

    /// Row-major homogeneous 4×4 matrix.
    #[rustfmt::skip]
    pub fn to_matrix4_row_major(&self) -> [f64; 16] {
        let r = &self.rotation;
        let t = &self.translation;
        [
            r[(0, 0)], r[(0, 1)], r[(0, 2)], t.x,
            r[(1, 0)], r[(1, 1)], r[(1, 2)], t.y,
            r[(2, 0)], r[(2, 1)], r[(2, 2)], t.z,
            0.0, 0.0, 0.0, 1.0,
        ]
    }

    pub fn from_matrix4_row_major(m: &[f64]) -> Result<Self, GeometryError> {
        if m.len() != 16 {
            return Err(GeometryError::InvalidTransform(format!("expected 16 values, got {}", m.len())));
        }
        let bottom = [m[12], m[13], m[14], m[15]];
        if bottom != [0.0, 0.0, 0.0, 1.0] {
            return Err(GeometryError::InvalidTransform(format!("bottom row {bottom:?} is not [0, 0, 0, 1]")));
        }
        let r = Mat3::new(m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10]);
        RigidTransform::new(r, Vec3::new(m[3], m[7], m[11]))
    }
}

/// Applies `t` to every point; intensities are carried over unchanged.
pub fn transform_points(t: &RigidTransform, cloud: &PointCloud) -> PointCloud {
    cloud.map_points(|p| t.apply(p))
}

/// Frame whose +x axis is the horizontal ray at `azimuth` (measured from
/// +x towards +y). Pure rotation by `-azimuth` about z.
pub fn frustum_frame_for(azimuth: f64) -> RigidTransform {
    RigidTransform::from_yaw(-azimuth)
}
