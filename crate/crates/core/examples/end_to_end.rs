//! Synthetic dataset to evaluation report: render, run the baseline
//! pipeline, score it, then repeat with noisy detector distances.
//!
//! `cargo run --release --example end_to_end -- [sigma ...]`

use mff_core::openlabel::{DatasetManifest, Split};
use mff_core::pipeline::{cmd_eval, cmd_run, cmd_synth, thread_pool, PipelineConfig, RouteOutcome, RunInputs};
use mff_core::synth::{DistanceNoise, SceneSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sigmas: Vec<f64> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let sigmas = if sigmas.is_empty() { vec![0.0, 5.0, 15.0] } else { sigmas };
    let cfg = PipelineConfig::default();
    let pool = thread_pool(0)?;
    for sigma in sigmas {
        let dir = tempfile::tempdir()?;
        let files = cmd_synth(&SceneSpec::default(), dir.path(), DistanceNoise { sigma, seed: cfg.seed })?;
        let manifest = DatasetManifest::read(&files.manifest_dir.join("test.json"))?;
        let inputs = RunInputs {
            detections: files.split_detections[&Split::Test].clone(),
            depth_dir: files.depth_dir.clone(),
            train_manifest: Some(files.manifest_dir.join("train.json")),
            ..Default::default()
        };
        let preds = dir.path().join("predictions.jsonl");
        let run = cmd_run(&manifest, &inputs, &preds, None, &cfg, &pool)?;
        let report = cmd_eval(&manifest, Some(&preds), Some(&inputs.detections), None, &cfg)?;
        println!(
            "== sigma {sigma} m: {} short, {} long",
            run.routing.count(RouteOutcome::Short),
            run.routing.count(RouteOutcome::Long)
        );
        print!("{}", report.to_text());
    }
    Ok(())
}
