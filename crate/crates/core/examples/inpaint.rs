//! Densify a sparse depth map, with and without an intensity guide.

use mff_core::depth::{depth_errors, inpaint_depth_detailed, DepthMap, InpaintConfig, SparseDepth};
use mff_core::raster::Raster;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (w, h) = (64u32, 48u32);
    // a slanted ground plane with a near box on the left half
    let truth = |c: u32, r: u32| if c < 32 && r > 16 { 12.0 } else { 20.0 + 0.25 * r as f32 };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut sparse = Raster::filled(w, h, f32::NAN);
    let mut guide = Raster::filled(w, h, 0.8);
    let mut dense = Raster::filled(w, h, 0.0);
    for r in 0..h {
        for c in 0..w {
            dense.set(c, r, truth(c, r));
            if c < 32 && r > 16 {
                guide.set(c, r, 0.2);
            }
            if rng.random_bool(0.06) {
                sparse.set(c, r, truth(c, r));
            }
        }
    }
    let sparse = SparseDepth::new(DepthMap::new(sparse)?);
    let gt = DepthMap::new(dense)?;
    println!("{:.1}% of pixels known", 100.0 * sparse.known_fraction());

    let cfg = InpaintConfig::default();
    for (name, g) in [("uniform", None), ("guided", Some(&guide))] {
        let out = inpaint_depth_detailed(&sparse, g, &cfg)?;
        let err = depth_errors(&out.depth, &gt)?;
        println!(
            "{name:>8}: {} CG iterations, residual {:.1e}, MAE {:.3} m, abs_rel {:.4}",
            out.iterations, out.relative_residual, err.mae, err.abs_rel
        );
    }
    Ok(())
}
