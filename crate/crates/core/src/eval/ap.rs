use serde::{Deserialize, Serialize};

use super::Metric;

/// A scored prediction and whether it matched a GT.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredOutcome {
    pub score: f64,
    pub true_positive: bool,
}

/// All-point interpolated AP: area under the monotone precision envelope of
/// the precision/recall curve taken in descending score order (ties keep
/// input order). N/A without GTs.
pub fn average_precision(outcomes: &[ScoredOutcome], num_gts: usize) -> Metric {
    if num_gts == 0 {
        return Metric::NotApplicable;
    }
    let mut sorted = outcomes.to_vec();
    sorted.sort_by(|a, b| b.score.total_cmp(&a.score));
    let mut precision = Vec::with_capacity(sorted.len());
    let mut recall = Vec::with_capacity(sorted.len());
    let (mut tp, mut fp) = (0usize, 0usize);
    for o in &sorted {
        if o.true_positive {
            tp += 1;
        } else {
            fp += 1;
        }
        precision.push(tp as f64 / (tp + fp) as f64);
        recall.push(tp as f64 / num_gts as f64);
    }
    for i in (0..precision.len().saturating_sub(1)).rev() {
        precision[i] = precision[i].max(precision[i + 1]);
    }
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for (p, r) in precision.iter().zip(&recall) {
        if *r > prev_recall {
            ap += (r - prev_recall) * p;
            prev_recall = *r;
        }
    }
    Metric::Value(ap)
}
