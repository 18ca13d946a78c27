use super::{GeometryError, Vec3};

/// A set of 3D points with optional per-point intensity in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    points: Vec<Vec3>,
    intensity: Option<Vec<f64>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>, intensity: Option<Vec<f64>>) -> Result<Self, GeometryError> {
        if let Some(i) = points.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(GeometryError::InvalidCloud(format!("point {i} has a non-finite coordinate")));
        }
        if let Some(int) = &intensity {
            if int.len() != points.len() {
                return Err(GeometryError::InvalidCloud(format!(
                    "{} intensities for {} points",
                    int.len(),
                    points.len()
                )));
            }
        }
        Ok(PointCloud { points, intensity })
    }

    pub fn from_points(points: Vec<Vec3>) -> Result<Self, GeometryError> {
        Self::new(points, None)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn intensity(&self) -> Option<&[f64]> {
        self.intensity.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Maps every point, keeping intensities. The mapping must keep points finite.
    pub fn map_points(&self, f: impl Fn(&Vec3) -> Vec3) -> PointCloud {
        PointCloud {
            points: self.points.iter().map(f).collect(),
            intensity: self.intensity.clone(),
        }
    }

    /// Keeps the points at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        PointCloud {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            intensity: self.intensity.as_ref().map(|v| indices.iter().map(|&i| v[i]).collect()),
        }
    }

    pub fn into_parts(self) -> (Vec<Vec3>, Option<Vec<f64>>) {
        (self.points, self.intensity)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_and_mismatched_intensity() {
        assert!(PointCloud::from_points(vec![Vec3::new(f64::NAN, 0.0, 0.0)]).is_err());
        assert!(PointCloud::new(vec![Vec3::zeros()], Some(vec![])).is_err());
    }

    #[test]
    fn select_keeps_intensity() {
        let c = PointCloud::new(vec![Vec3::x(), Vec3::y(), Vec3::z()], Some(vec![0.1, 0.2, 0.3])).unwrap();
        let s = c.select(&[2, 0]);
        assert_eq!(s.points(), &[Vec3::z(), Vec3::x()]);
        assert_eq!(s.intensity().unwrap(), &[0.3, 0.1]);
    }
}
