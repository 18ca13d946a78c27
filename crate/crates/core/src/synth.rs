//! Synthetic rail scenes: analytic cuboids on a flat ground plane seen by a
//! forward pinhole camera, with exact depth maps, LiDAR-like clouds, OpenLABEL
//! annotations and perfect 2.5D detections.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::class::{ClassId, ClassMap, LabelClass};
use crate::depth::DepthMap;
use crate::eval::iou_2d;
use crate::frustum::{write_detections, Detection25D, MAX_DISTANCE_M};
use crate::geometry::{project_point, Box2D, Box3D, CameraIntrinsics, PointCloud, RigidTransform, Vec3};
use crate::heads::ClassPriorTable;
use crate::io::{read_bytes, write_bytes, write_dmap, write_point_cloud};
use crate::openlabel::{
    build_manifests, write_openlabel, CameraCalibration, FrameAnnotation, ObjectLabel, ParseOptions, Split, SplitSpec,
};
use crate::Error;

pub const CAMERA_STREAM: &str = "rgb_center";
pub const LIDAR_STREAM: &str = "lidar";
/// Distance simulated LiDAR returns are pushed past the hit surface, metres.
pub const LIDAR_PENETRATION: f64 = 0.01;
const DOC_STEM: &str = "synth";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneCamera {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    /// Height of the optical center above the ground plane, metres.
    pub mount_height: f64,
}

impl Default for SceneCamera {
    fn default() -> Self {
        SceneCamera { fx: 1000.0, fy: 1000.0, cx: 960.0, cy: 540.0, width: 1920, height: 1080, mount_height: 2.5 }
    }
}

impl SceneCamera {
    pub fn intrinsics(&self) -> Result<CameraIntrinsics, Error> {
        Ok(CameraIntrinsics::new(self.fx, self.fy, self.cx, self.cy, self.width, self.height)?)
    }

    /// Camera optical frame into the sensor frame, whose origin is on the ground.
    pub fn camera_to_sensor(&self) -> RigidTransform {
        RigidTransform::from_translation(Vec3::new(0.0, 0.0, self.mount_height))
            .compose(&RigidTransform::camera_to_sensor_axes())
    }
}

/// An object standing on the ground plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneObject {
    pub class: ClassId,
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub yaw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFrame {
    pub split: Split,
    pub objects: Vec<SceneObject>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    #[serde(default)]
    pub camera: SceneCamera,
    /// Object dims per class; the placeholder prior table when omitted.
    #[serde(default = "default_dims")]
    pub dims: BTreeMap<ClassId, [f64; 3]>,
    pub frames: Vec<SceneFrame>,
    /// Pixel stride of the simulated LiDAR sampling.
    #[serde(default = "default_lidar_stride")]
    pub lidar_stride: u32,
    /// Ground beyond this range is left without depth, metres.
    #[serde(default = "default_max_range")]
    pub max_range: f64,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
}

fn default_dims() -> BTreeMap<ClassId, [f64; 3]> {
    let t = ClassPriorTable::default();
    ClassId::ALL.iter().map(|c| (*c, t.get(*c).dims)).collect()
}

fn default_lidar_stride() -> u32 {
    4
}

fn default_max_range() -> f64 {
    500.0
}

fn default_confidence() -> f64 {
    0.9
}

impl Default for SceneSpec {
    /// One training frame with every class, and four test frames of five
    /// objects each between 12 and 240 m, none within 10 m of the 100 m
    /// route boundary.
    fn default() -> Self {
        use ClassId::*;
        let o = |class, x, y| SceneObject { class, x, y, yaw: 0.0 };
        let frame = |split, objects| SceneFrame { split, objects };
        SceneSpec {
            camera: SceneCamera::default(),
            dims: default_dims(),
            frames: vec![
                frame(
                    Split::Train,
                    vec![o(Person, 40.0, 1.0), o(RoadVehicle, 90.0, -3.0), o(BufferStop, 160.0, 0.0), o(CatenaryPole, 60.0, 4.0), o(SignalPole, 120.0, 5.0)],
                ),
                frame(
                    Split::Test,
                    vec![o(Person, 12.0, 0.4), o(RoadVehicle, 65.0, -3.0), o(BufferStop, 140.0, 0.0), o(CatenaryPole, 30.0, 4.0), o(SignalPole, 210.0, -4.5)],
                ),
                frame(
                    Split::Test,
                    vec![o(Person, 160.0, 1.5), o(RoadVehicle, 28.0, -1.0), o(BufferStop, 75.0, 2.5), o(CatenaryPole, 120.0, -4.0), o(SignalPole, 45.0, 3.5)],
                ),
                frame(
                    Split::Test,
                    vec![o(Person, 230.0, -1.0), o(RoadVehicle, 180.0, 2.5), o(BufferStop, 22.0, 0.0), o(CatenaryPole, 85.0, 4.5), o(SignalPole, 130.0, -3.0)],
                ),
                frame(
                    Split::Test,
                    vec![o(Person, 55.0, -1.5), o(RoadVehicle, 240.0, -4.0), o(BufferStop, 195.0, 0.0), o(CatenaryPole, 235.0, 3.5), o(SignalPole, 15.0, -3.0)],
                ),
            ],
            lidar_stride: default_lidar_stride(),
            max_range: default_max_range(),
            confidence: default_confidence(),
        }
    }
}

/// Gaussian error added to detector distances.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DistanceNoise {
    pub sigma: f64,
    pub seed: u64,
}

/// One rendered frame.
#[derive(Debug, Clone)]
pub struct RenderedFrame {
    pub key: usize,
    pub split: Split,
    pub boxes: Vec<(ClassId, Box3D)>,
    pub boxes2d: Vec<Box2D>,
    pub depth: DepthMap,
    pub cloud: PointCloud,
}

impl SceneSpec {
    pub fn read(path: &Path) -> Result<Self, Error> {
        let bytes = read_bytes(path)?;
        let text = String::from_utf8(bytes).map_err(|_| Error::Config(format!("{} is not UTF-8", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn frame_id(key: usize) -> String {
        format!("{DOC_STEM}-{key}")
    }

    fn object_box(&self, o: &SceneObject) -> Result<Box3D, Error> {
        let dims = self
            .dims
            .get(&o.class)
            .copied()
            .ok_or_else(|| Error::Config(format!("scene has no dims for {}", o.class)))?;
        Ok(Box3D::new(Vec3::new(o.x, o.y, dims[2] / 2.0), dims, o.yaw)?)
    }

    /// Render every frame: exact z-depth per pixel center and a tight 2D box
    /// per object. Errors when an object leaves the image or two boxes of a
    /// frame overlap.
    pub fn render(&self) -> Result<Vec<RenderedFrame>, Error> {
        let k = self.camera.intrinsics()?;
        let cam = self.camera.camera_to_sensor();
        let sensor_to_camera = cam.inverse();
        let mut out = Vec::with_capacity(self.frames.len());
        for (key, frame) in self.frames.iter().enumerate() {
            let mut boxes = Vec::new();
            let mut boxes2d = Vec::new();
            for o in &frame.objects {
                let b = self.object_box(o)?;
                let b2 = project_box(&b, &sensor_to_camera, &k).ok_or_else(|| {
                    Error::Config(format!("frame {key}: {} at x = {} is not fully in view", o.class, o.x))
                })?;
                if let Some(prev) = boxes2d.iter().position(|p| iou_2d(p, &b2) > 0.0) {
                    return Err(Error::Config(format!(
                        "frame {key}: 2D boxes of objects {prev} and {} overlap",
                        boxes2d.len()
                    )));
                }
                boxes.push((o.class, b));
                boxes2d.push(b2);
            }
            let exact = render_depth(&boxes, &boxes2d, &k, &cam, self.max_range);
            let cloud = simulate_lidar(&exact, &k, &cam, self.lidar_stride);
            let values = exact.iter().map(|t| if t.is_finite() { *t as f32 } else { f32::NAN }).collect();
            let depth = DepthMap::from_values(k.width, k.height, values).expect("rendered depths are positive");
            out.push(RenderedFrame { key, split: frame.split, boxes, boxes2d, depth, cloud });
        }
        Ok(out)
    }
}

/// Tight image box of a cuboid; `None` unless all corners project inside.
pub fn project_box(b: &Box3D, sensor_to_camera: &RigidTransform, k: &CameraIntrinsics) -> Option<Box2D> {
    let (mut x1, mut y1, mut x2, mut y2) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for c in b.corners() {
        let p = project_point(&sensor_to_camera.apply(&c), k).ok()?;
        x1 = x1.min(p.u);
        y1 = y1.min(p.v);
        x2 = x2.max(p.u);
        y2 = y2.max(p.v);
    }
    let inside = x1 >= 0.0 && y1 >= 0.0 && x2 <= k.width as f64 && y2 <= k.height as f64;
    inside.then(|| Box2D::new(x1, y1, x2, y2).ok()).flatten()
}

/// Entry distance of a ray into a box, by the slab method in box coordinates.
fn ray_box(origin: &Vec3, dir: &Vec3, b: &Box3D) -> Option<f64> {
    let (s, c) = b.yaw.sin_cos();
    let rel = origin - b.center();
    let o = Vec3::new(c * rel.x + s * rel.y, -s * rel.x + c * rel.y, rel.z);
    let d = Vec3::new(c * dir.x + s * dir.y, -s * dir.x + c * dir.y, dir.z);
    let half = [b.dims[0] / 2.0, b.dims[1] / 2.0, b.dims[2] / 2.0];
    let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..3 {
        if d[i].abs() < 1e-15 {
            if o[i].abs() > half[i] {
                return None;
            }
            continue;
        }
        let (a, b) = ((-half[i] - o[i]) / d[i], (half[i] - o[i]) / d[i]);
        t0 = t0.max(a.min(b));
        t1 = t1.min(a.max(b));
    }
    (t0 <= t1 && t0 > 0.0).then_some(t0)
}

/// Camera ray of a pixel center in the sensor frame, scaled to unit camera z.
fn pixel_ray(col: u32, row: u32, k: &CameraIntrinsics, cam: &RigidTransform) -> Vec3 {
    cam.apply_vector(&Vec3::new((col as f64 - k.cx) / k.fx, (row as f64 - k.cy) / k.fy, 1.0))
}

/// Exact z-depth per pixel center, row-major; infinite where nothing is hit.
fn render_depth(
    boxes: &[(ClassId, Box3D)],
    boxes2d: &[Box2D],
    k: &CameraIntrinsics,
    cam: &RigidTransform,
    max_range: f64,
) -> Vec<f64> {
    let origin = *cam.translation();
    let (w, h) = (k.width, k.height);
    (0..h)
        .into_par_iter()
        .flat_map_iter(|row| {
            (0..w).map(move |col| {
                let (u, v) = (col as f64, row as f64);
                let dir = pixel_ray(col, row, k, cam);
                let mut best = if dir.z < 0.0 { -origin.z / dir.z } else { f64::INFINITY };
                if best > max_range {
                    best = f64::INFINITY;
                }
                for ((_, b), b2) in boxes.iter().zip(boxes2d) {
                    if u < b2.x1 - 1.0 || u > b2.x2 + 1.0 || v < b2.y1 - 1.0 || v > b2.y2 + 1.0 {
                        continue;
                    }
                    if let Some(t) = ray_box(&origin, &dir, b) {
                        best = best.min(t);
                    }
                }
                best
            })
        })
        .collect()
}

/// Simulated LiDAR returns on every `stride`-th pixel, each placed
/// [`LIDAR_PENETRATION`] past the surface so that float32 storage keeps it
/// inside the box it hit.
fn simulate_lidar(depth: &[f64], k: &CameraIntrinsics, cam: &RigidTransform, stride: u32) -> PointCloud {
    let origin = *cam.translation();
    let stride = stride.max(1);
    let mut points = Vec::new();
    for row in (0..k.height).step_by(stride as usize) {
        for col in (0..k.width).step_by(stride as usize) {
            let t = depth[(row * k.width + col) as usize];
            if t.is_finite() {
                let dir = pixel_ray(col, row, k, cam);
                points.push(origin + dir * t + dir.normalize() * LIDAR_PENETRATION);
            }
        }
    }
    PointCloud::from_points(points).expect("finite returns")
}

/// Files written by [`write_scene`].
#[derive(Debug, Clone)]
pub struct SceneFiles {
    pub root: PathBuf,
    /// Detections of every frame.
    pub detections: PathBuf,
    /// `detections_<split>.jsonl`, one per split.
    pub split_detections: BTreeMap<Split, PathBuf>,
    pub depth_dir: PathBuf,
    pub manifest_dir: PathBuf,
    /// Frame id → ground-truth boxes.
    pub truth: BTreeMap<String, Vec<(ClassId, Box3D)>>,
}

/// Perfect detections of rendered frames, with optional distance noise.
/// Noise draws are taken in frame/object order from one seeded stream, so
/// runs with different sigmas perturb objects proportionally.
pub fn perfect_detections(spec: &SceneSpec, frames: &[RenderedFrame], noise: DistanceNoise) -> Vec<Detection25D> {
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let mut out = Vec::new();
    for f in frames {
        for ((class, b), b2) in f.boxes.iter().zip(&f.boxes2d) {
            let z: f64 = StandardNormal.sample(&mut rng);
            let d = (b.center[0] + noise.sigma * z).clamp(0.0, MAX_DISTANCE_M);
            out.push(
                Detection25D::new(SceneSpec::frame_id(f.key), *class, *b2, spec.confidence, d)
                    .expect("scene detections are in range"),
            );
        }
    }
    out
}

/// Render `spec` and write a complete dataset under `root`:
/// `annotations/synth.json`, `splits.json`, `clouds/`, `depth/<frame>.dmap`,
/// `detections.jsonl`, `detections_<split>.jsonl` and
/// `manifests/{train,val,test}.json`.
pub fn write_scene(spec: &SceneSpec, root: &Path, noise: DistanceNoise) -> Result<SceneFiles, Error> {
    if !(noise.sigma >= 0.0 && noise.sigma.is_finite()) {
        return Err(Error::Config(format!("noise sigma must be finite and >= 0, got {}", noise.sigma)));
    }
    let frames = spec.render()?;
    let k = spec.camera.intrinsics()?;
    let calibration = CameraCalibration { intrinsics: k, sensor_to_camera: spec.camera.camera_to_sensor().inverse() };
    let depth_dir = root.join("depth");
    let mut annotations = Vec::new();
    let mut splits = SplitSpec::default();
    let mut truth = BTreeMap::new();
    for f in &frames {
        let cloud_rel = format!("clouds/{:04}.pclb", f.key);
        write_point_cloud(&root.join(&cloud_rel), &f.cloud)?;
        let id = SceneSpec::frame_id(f.key);
        write_dmap(&depth_dir.join(format!("{id}.dmap")), f.depth.raster())?;
        let labels = f
            .boxes
            .iter()
            .zip(&f.boxes2d)
            .enumerate()
            .map(|(i, ((class, b), b2))| ObjectLabel {
                object_id: format!("{}_{i}", f.key),
                class: LabelClass::Known(*class),
                box2d: Some(*b2),
                box3d: Some(*b),
                source_sensor: CAMERA_STREAM.into(),
            })
            .collect();
        annotations.push(FrameAnnotation {
            frame_id: f.key.to_string(),
            labels,
            calibration: [(CAMERA_STREAM.to_string(), calibration)].into(),
            cloud_path: Some(cloud_rel),
            image_path: None,
            warnings: Default::default(),
        });
        match f.split {
            Split::Train => splits.train.push(id.clone()),
            Split::Val => splits.val.push(id.clone()),
            Split::Test => splits.test.push(id.clone()),
        }
        truth.insert(id, f.boxes.clone());
    }
    let doc = write_openlabel(&annotations, &ClassMap::default())?;
    write_bytes(&root.join("annotations").join(format!("{DOC_STEM}.json")), doc.as_bytes())?;
    let split_text = serde_json::to_string_pretty(&splits).expect("splits serialize");
    write_bytes(&root.join("splits.json"), split_text.as_bytes())?;
    let detections = root.join("detections.jsonl");
    let all = perfect_detections(spec, &frames, noise);
    write_detections(&detections, &all)?;
    let mut split_detections = BTreeMap::new();
    for split in Split::ALL {
        let ids: Vec<String> = splits.ids(split).to_vec();
        let subset: Vec<Detection25D> = all.iter().filter(|d| ids.contains(&d.frame_id)).cloned().collect();
        let path = root.join(format!("detections_{}.jsonl", split.name()));
        write_detections(&path, &subset)?;
        split_detections.insert(split, path);
    }

    let opts = ParseOptions { camera: Some(CAMERA_STREAM.into()), lidar: Some(LIDAR_STREAM.into()), ..Default::default() };
    let manifests = build_manifests(root, &splits, &opts)?;
    let manifest_dir = root.join("manifests");
    for split in Split::ALL {
        let m = manifests.get(split);
        write_bytes(&manifest_dir.join(format!("{}.json", split.name())), m.to_json().as_bytes())?;
    }
    Ok(SceneFiles { root: root.to_path_buf(), detections, split_detections, depth_dir, manifest_dir, truth })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ray_box_hits_front_face() {
        let b = Box3D::new(Vec3::new(10.0, 0.0, 0.0), [2.0, 2.0, 2.0], 0.0).unwrap();
        let t = ray_box(&Vec3::zeros(), &Vec3::new(1.0, 0.0, 0.0), &b).unwrap();
        assert!((t - 9.0).abs() < 1e-12);
        assert!(ray_box(&Vec3::zeros(), &Vec3::new(1.0, 1.0, 0.0), &b).is_none());
        let r = Box3D::new(Vec3::new(10.0, 0.0, 0.0), [2.0, 2.0, 2.0], std::f64::consts::FRAC_PI_4).unwrap();
        let t = ray_box(&Vec3::zeros(), &Vec3::new(1.0, 0.0, 0.0), &r).unwrap();
        assert!((t - (10.0 - 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn small_scene_renders_ground_and_object() {
        let spec = SceneSpec {
            camera: SceneCamera { fx: 100.0, fy: 100.0, cx: 32.0, cy: 24.0, width: 64, height: 48, mount_height: 2.0 },
            frames: vec![SceneFrame {
                split: Split::Test,
                objects: vec![SceneObject { class: ClassId::BufferStop, x: 20.0, y: 0.0, yaw: 0.0 }],
            }],
            ..SceneSpec::default()
        };
        let frames = spec.render().unwrap();
        let f = &frames[0];
        // Bottom row looks at the ground 2 m below: depth = 2 * fy / (v - cy).
        let v = 47.0;
        assert!((f.depth.depth(0, 47).unwrap() as f64 - 2.0 * 100.0 / (v - 24.0)).abs() < 1e-4);
        // Ten rows below the horizon the ray meets the buffer stop's front face at z = 0.1.
        assert!((f.depth.depth(32, 34).unwrap() - 19.0).abs() < 1e-5);
        // Top row sees sky.
        assert!(f.depth.depth(0, 0).is_none());
        assert!(!f.cloud.is_empty());
    }
}
