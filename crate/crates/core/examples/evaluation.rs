//! Greedy matching, all-point AP and the distance-binned report on a toy
//! two-frame benchmark.

use std::collections::BTreeMap;

use mff_core::class::{ClassId, LabelClass};
use mff_core::eval::{average_precision, build_eval_report, iou_bev, match_detections, EvalConfig, EvalInputs, ScoredOutcome};
use mff_core::frustum::Route;
use mff_core::geometry::{Box3D, Vec3};
use mff_core::heads::HeadPrediction;
use mff_core::openlabel::{DatasetManifest, FrameAnnotation, ObjectLabel, Split};

fn vehicle(x: f64, y: f64) -> Box3D {
    Box3D::new(Vec3::new(x, y, 0.75), [4.5, 1.8, 1.5], 0.0).unwrap()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // AP of TP, FP, TP against two GTs: (1 + 2/3) / 2
    let ranked = [(0.9, true), (0.8, false), (0.7, true)].map(|(score, true_positive)| ScoredOutcome { score, true_positive });
    println!("hand case AP = {:?}", average_precision(&ranked, 2).value());

    let gts = [vehicle(40.0, 0.0), vehicle(160.0, 3.0)];
    let preds = [(vehicle(41.0, 0.2), 0.9), (vehicle(158.0, 3.0), 0.8), (vehicle(40.5, 0.0), 0.7)];
    let scores: Vec<f64> = preds.iter().map(|p| p.1).collect();
    for t in [0.1, 0.5] {
        let m = match_detections(&scores, gts.len(), |p, g| iou_bev(&preds[p].0, &gts[g]), t);
        println!("BEV matches at IoU {t}: {:?}", m.pairs.iter().map(|p| (p.prediction, p.gt)).collect::<Vec<_>>());
    }

    let labels = gts
        .iter()
        .enumerate()
        .map(|(i, b)| ObjectLabel {
            object_id: i.to_string(),
            class: LabelClass::Known(ClassId::RoadVehicle),
            box2d: None,
            box3d: Some(*b),
            source_sensor: String::new(),
        })
        .collect();
    let frame = FrameAnnotation {
        frame_id: "toy-0".into(),
        labels,
        calibration: BTreeMap::new(),
        cloud_path: None,
        image_path: None,
        warnings: Default::default(),
    };
    let manifest = DatasetManifest::new(Split::Test, vec![frame]);
    let predictions: Vec<HeadPrediction> = preds
        .iter()
        .enumerate()
        .map(|(i, (b, s))| HeadPrediction {
            frame_id: "toy-0".into(),
            class: ClassId::RoadVehicle,
            box3d: *b,
            score: *s,
            route: if b.center[0] > 100.0 { Route::Long } else { Route::Short },
            frustum_ref: i,
        })
        .collect();
    let inputs = EvalInputs { detections: None, predictions: Some(&predictions) };
    let report = build_eval_report(inputs, &manifest, &EvalConfig::default())?;
    print!("{}", report.to_text());
    Ok(())
}
