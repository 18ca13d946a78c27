use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{
    average_precision, iou_2d, iou_3d, iou_bev, mae_by_range, match_detections, EvalError, MaeTable, Metric,
    RangeBins, ScoredOutcome,
};
use crate::class::ClassId;
use crate::frustum::Detection25D;
use crate::geometry::{Box2D, Box3D};
use crate::heads::HeadPrediction;
use crate::openlabel::DatasetManifest;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    /// 2D IoU for 2.5D detections, for AP and for MAE matching.
    pub iou_2d: f64,
    /// BEV/3D IoU used for the short-range tables.
    pub short_range_iou: f64,
    /// BEV/3D IoU used for the long-range tables.
    pub long_range_iou: f64,
    pub range_bins: RangeBins,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { iou_2d: 0.5, short_range_iou: 0.5, long_range_iou: 0.1, range_bins: RangeBins::default() }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        for (name, v) in [
            ("iou_2d", self.iou_2d),
            ("short_range_iou", self.short_range_iou),
            ("long_range_iou", self.long_range_iou),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(EvalError::Config(format!("{name} must lie in (0, 1], got {v}")));
            }
        }
        Ok(())
    }

    /// BEV/3D thresholds reported, ascending and deduplicated.
    pub fn thresholds_3d(&self) -> Vec<f64> {
        let mut t = vec![self.long_range_iou, self.short_range_iou];
        t.sort_by(f64::total_cmp);
        t.dedup();
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport2D {
    pub gts: usize,
    pub detections: usize,
    pub ap: Metric,
    /// |distance_m − GT x| over 2D matches.
    pub mae: MaeTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdAp {
    pub iou: f64,
    pub ap_bev: Metric,
    pub ap_3d: Metric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport3D {
    pub gts: usize,
    pub predictions: usize,
    pub ap: Vec<ThresholdAp>,
    /// |center x − GT x| over 3D matches at the lowest threshold.
    pub mae: MaeTable,
    /// Euclidean center error over the same matches.
    pub mean_center_error: Metric,
    pub max_center_error: Metric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section2D {
    pub classes: BTreeMap<ClassId, ClassReport2D>,
    pub map: Metric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanAp {
    pub iou: f64,
    pub map_bev: Metric,
    pub map_3d: Metric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section3D {
    pub classes: BTreeMap<ClassId, ClassReport3D>,
    pub map: Vec<MeanAp>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub config: EvalConfig,
    pub frames: usize,
    pub detections_2d: Option<Section2D>,
    pub boxes_3d: Option<Section3D>,
}

/// What to score; either part may be absent.
#[derive(Debug, Clone, Copy, Default)]
pub struct EvalInputs<'a> {
    pub detections: Option<&'a [Detection25D]>,
    pub predictions: Option<&'a [HeadPrediction]>,
}

struct Gt2 {
    frame: usize,
    box2d: Box2D,
    x: Option<f64>,
}

struct Gt3 {
    frame: usize,
    box3d: Box3D,
}

/// Per-class (frame-major, input order) candidate lists.
fn by_class<T>(items: impl Iterator<Item = (ClassId, usize, T)>) -> BTreeMap<ClassId, Vec<(usize, T)>> {
    let mut m: BTreeMap<ClassId, Vec<(usize, T)>> = BTreeMap::new();
    for (c, f, t) in items {
        m.entry(c).or_default().push((f, t));
    }
    for v in m.values_mut() {
        v.sort_by_key(|(f, _)| *f);
    }
    m
}

/// Score detections and/or 3D predictions against a manifest.
///
/// Matching is per frame and per class. Labels of unmapped dataset classes
/// are ignored.
pub fn build_eval_report(
    inputs: EvalInputs<'_>,
    gt: &DatasetManifest,
    cfg: &EvalConfig,
) -> Result<EvalReport, EvalError> {
    cfg.validate()?;
    let frame_index: BTreeMap<&str, usize> =
        gt.frames.iter().enumerate().map(|(i, f)| (f.frame_id.as_str(), i)).collect();
    let mut unknown = BTreeSet::new();
    for id in inputs
        .detections
        .unwrap_or_default()
        .iter()
        .map(|d| &d.frame_id)
        .chain(inputs.predictions.unwrap_or_default().iter().map(|p| &p.frame_id))
    {
        if !frame_index.contains_key(id.as_str()) {
            unknown.insert(id.clone());
        }
    }
    if !unknown.is_empty() {
        return Err(EvalError::UnknownFrames(unknown.into_iter().collect()));
    }

    let gt2 = by_class(gt.frames.iter().enumerate().flat_map(|(fi, f)| {
        f.labels.iter().filter_map(move |l| {
            Some((l.class.known()?, fi, Gt2 { frame: fi, box2d: l.box2d?, x: l.box3d.map(|b| b.center[0]) }))
        })
    }));
    let gt3 = by_class(gt.frames.iter().enumerate().flat_map(|(fi, f)| {
        f.labels
            .iter()
            .filter_map(move |l| Some((l.class.known()?, fi, Gt3 { frame: fi, box3d: l.box3d? })))
    }));

    let detections_2d = inputs.detections.map(|dets| {
        let per_class = by_class(dets.iter().map(|d| (d.class, frame_index[d.frame_id.as_str()], d)));
        let mut classes = BTreeMap::new();
        for class in ClassId::ALL {
            let gts: Vec<&Gt2> = gt2.get(&class).map(|v| v.iter().map(|(_, g)| g).collect()).unwrap_or_default();
            let preds: Vec<&Detection25D> =
                per_class.get(&class).map(|v| v.iter().map(|(_, d)| *d).collect()).unwrap_or_default();
            let mut outcomes = Vec::new();
            let mut pairs = Vec::new();
            for (fi, _) in gt.frames.iter().enumerate() {
                let fg: Vec<&Gt2> = gts.iter().copied().filter(|g| g.frame == fi).collect();
                let fp: Vec<&Detection25D> =
                    preds.iter().copied().filter(|d| frame_index[d.frame_id.as_str()] == fi).collect();
                if fp.is_empty() {
                    continue;
                }
                let scores: Vec<f64> = fp.iter().map(|d| d.confidence).collect();
                let m = match_detections(&scores, fg.len(), |p, g| iou_2d(&fp[p].box2d, &fg[g].box2d), cfg.iou_2d);
                for (i, d) in fp.iter().enumerate() {
                    outcomes.push(ScoredOutcome { score: d.confidence, true_positive: m.is_matched(i) });
                }
                for pair in &m.pairs {
                    if let Some(x) = fg[pair.gt].x {
                        pairs.push((x, fp[pair.prediction].distance_m));
                    }
                }
            }
            let gt_x: Vec<f64> = gts.iter().filter_map(|g| g.x).collect();
            classes.insert(
                class,
                ClassReport2D {
                    gts: gts.len(),
                    detections: preds.len(),
                    ap: average_precision(&outcomes, gts.len()),
                    mae: mae_by_range(&pairs, &gt_x, &cfg.range_bins),
                },
            );
        }
        let map = Metric::mean(classes.values().map(|c| c.ap));
        Section2D { classes, map }
    });

    let boxes_3d = inputs.predictions.map(|preds| {
        let thresholds = cfg.thresholds_3d();
        let per_class = by_class(preds.iter().map(|p| (p.class, frame_index[p.frame_id.as_str()], p)));
        let mut classes = BTreeMap::new();
        for class in ClassId::ALL {
            let gts: Vec<&Gt3> = gt3.get(&class).map(|v| v.iter().map(|(_, g)| g).collect()).unwrap_or_default();
            let cp: Vec<&HeadPrediction> =
                per_class.get(&class).map(|v| v.iter().map(|(_, p)| *p).collect()).unwrap_or_default();
            let mut outcomes_bev = vec![Vec::new(); thresholds.len()];
            let mut outcomes_3d = vec![Vec::new(); thresholds.len()];
            let mut pairs = Vec::new();
            let mut center_errors = Vec::new();
            for (fi, _) in gt.frames.iter().enumerate() {
                let fg: Vec<&Gt3> = gts.iter().copied().filter(|g| g.frame == fi).collect();
                let fp: Vec<&HeadPrediction> =
                    cp.iter().copied().filter(|p| frame_index[p.frame_id.as_str()] == fi).collect();
                if fp.is_empty() {
                    continue;
                }
                let scores: Vec<f64> = fp.iter().map(|p| p.score).collect();
                for (ti, &t) in thresholds.iter().enumerate() {
                    let mb = match_detections(&scores, fg.len(), |p, g| iou_bev(&fp[p].box3d, &fg[g].box3d), t);
                    let m3 = match_detections(&scores, fg.len(), |p, g| iou_3d(&fp[p].box3d, &fg[g].box3d), t);
                    for (i, p) in fp.iter().enumerate() {
                        outcomes_bev[ti].push(ScoredOutcome { score: p.score, true_positive: mb.is_matched(i) });
                        outcomes_3d[ti].push(ScoredOutcome { score: p.score, true_positive: m3.is_matched(i) });
                    }
                    if ti == 0 {
                        for pair in &m3.pairs {
                            let (pc, gc) = (fp[pair.prediction].box3d.center(), fg[pair.gt].box3d.center());
                            pairs.push((gc.x, pc.x));
                            center_errors.push((pc - gc).norm());
                        }
                    }
                }
            }
            let gt_x: Vec<f64> = gts.iter().map(|g| g.box3d.center[0]).collect();
            let (mean_ce, max_ce) = if gts.is_empty() {
                (Metric::NotApplicable, Metric::NotApplicable)
            } else if center_errors.is_empty() {
                (Metric::NoDetections, Metric::NoDetections)
            } else {
                (
                    Metric::Value(center_errors.iter().sum::<f64>() / center_errors.len() as f64),
                    Metric::Value(center_errors.iter().copied().fold(0.0, f64::max)),
                )
            };
            classes.insert(
                class,
                ClassReport3D {
                    gts: gts.len(),
                    predictions: cp.len(),
                    ap: thresholds
                        .iter()
                        .enumerate()
                        .map(|(ti, &iou)| ThresholdAp {
                            iou,
                            ap_bev: average_precision(&outcomes_bev[ti], gts.len()),
                            ap_3d: average_precision(&outcomes_3d[ti], gts.len()),
                        })
                        .collect(),
                    mae: mae_by_range(&pairs, &gt_x, &cfg.range_bins),
                    mean_center_error: mean_ce,
                    max_center_error: max_ce,
                },
            );
        }
        let map = thresholds
            .iter()
            .enumerate()
            .map(|(ti, &iou)| MeanAp {
                iou,
                map_bev: Metric::mean(classes.values().map(|c| c.ap[ti].ap_bev)),
                map_3d: Metric::mean(classes.values().map(|c| c.ap[ti].ap_3d)),
            })
            .collect();
        Section3D { classes, map }
    });

    Ok(EvalReport {
        schema_version: REPORT_SCHEMA_VERSION,
        config: cfg.clone(),
        frames: gt.frames.len(),
        detections_2d,
        boxes_3d,
    })
}

fn table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> =
        (0..cols).map(|c| rows.iter().filter_map(|r| r.get(c)).map(String::len).max().unwrap_or(0)).collect();
    let mut s = String::new();
    for r in rows {
        let line: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(c, cell)| if c == 0 { format!("{cell:<w$}", w = widths[c]) } else { format!("{cell:>w$}", w = widths[c]) })
            .collect();
        writeln!(s, "{}", line.join("  ").trim_end()).unwrap();
    }
    s
}

fn mae_cells(m: &MaeTable) -> Vec<String> {
    m.bins.iter().chain([&m.full_range]).map(|b| b.mae.to_string()).collect()
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Aligned plain-text tables.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let bins = &self.config.range_bins;
        let mae_header: Vec<String> = (0..bins.len()).map(|i| bins.label(i)).chain(["FR".to_string()]).collect();
        if let Some(s) = &self.detections_2d {
            writeln!(out, "2.5D detections ({} frames)", self.frames).unwrap();
            let mut rows = vec![[
                vec!["class".into(), "GT".into(), "det".into(), format!("AP2D@{}", self.config.iou_2d)],
                mae_header.iter().map(|h| format!("MAE {h}")).collect(),
            ]
            .concat()];
            for (c, r) in &s.classes {
                rows.push(
                    [vec![c.to_string(), r.gts.to_string(), r.detections.to_string(), r.ap.to_string()], mae_cells(&r.mae)]
                        .concat(),
                );
            }
            rows.push(vec!["mAP".into(), String::new(), String::new(), s.map.to_string()]);
            out.push_str(&table(&rows));
            out.push('\n');
        }
        if let Some(s) = &self.boxes_3d {
            writeln!(out, "3D boxes ({} frames)", self.frames).unwrap();
            let thresholds = self.config.thresholds_3d();
            let mut header = vec!["class".to_string(), "GT".into(), "pred".into()];
            for t in &thresholds {
                header.push(format!("BEV@{t}"));
                header.push(format!("3D@{t}"));
            }
            header.extend(mae_header.iter().map(|h| format!("MAE {h}")));
            header.push("max ctr err".into());
            let mut rows = vec![header];
            for (c, r) in &s.classes {
                let mut row = vec![c.to_string(), r.gts.to_string(), r.predictions.to_string()];
                for a in &r.ap {
                    row.push(a.ap_bev.to_string());
                    row.push(a.ap_3d.to_string());
                }
                row.extend(mae_cells(&r.mae));
                row.push(r.max_center_error.to_string());
                rows.push(row);
            }
            let mut mean = vec!["mAP".to_string(), String::new(), String::new()];
            for m in &s.map {
                mean.push(m.map_bev.to_string());
                mean.push(m.map_3d.to_string());
            }
            rows.push(mean);
            out.push_str(&table(&rows));
        }
        out
    }
}
