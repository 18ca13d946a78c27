//! Dense depth targets from LiDAR: render a small scene, project its cloud,
//! inpaint, and compare against the exact depth.

use mff_core::depth::{depth_errors, DepthMap};
use mff_core::io::read_dmap;
use mff_core::openlabel::DatasetManifest;
use mff_core::pipeline::{cmd_depth_gt, cmd_stats, cmd_synth, thread_pool, PipelineConfig};
use mff_core::synth::{DistanceNoise, SceneCamera, SceneSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let spec = SceneSpec {
        camera: SceneCamera { fx: 200.0, fy: 200.0, cx: 160.0, cy: 120.0, width: 320, height: 240, mount_height: 2.5 },
        ..SceneSpec::default()
    };
    let files = cmd_synth(&spec, dir.path(), DistanceNoise::default())?;
    let manifest = DatasetManifest::read(&files.manifest_dir.join("test.json"))?;
    let cfg = PipelineConfig::default();
    let out = dir.path().join("depth_gt");
    for f in cmd_depth_gt(&manifest, &out, &cfg, &thread_pool(0)?)? {
        let dense = DepthMap::new(read_dmap(&out.join(format!("{}.dmap", f.frame_id)))?)?;
        let exact = DepthMap::new(read_dmap(&files.depth_dir.join(format!("{}.dmap", f.frame_id)))?)?;
        let err = depth_errors(&dense, &exact)?;
        println!(
            "{}: {:.2}% known, {} iterations, abs_rel {:.4}, MAE {:.2} m",
            f.frame_id,
            100.0 * f.known_fraction,
            f.iterations,
            err.abs_rel,
            err.mae
        );
    }
    let (stats, _) = cmd_stats(&manifest, &dir.path().join("points.csv"), None, &cfg)?;
    for row in &stats.rows {
        println!("{:?} at {:.0} m: {} LiDAR points", row.class, row.gt_x, row.points);
    }
    Ok(())
}
