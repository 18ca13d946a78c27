use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchPair {
    pub prediction: usize,
    pub gt: usize,
    pub iou: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub pairs: Vec<MatchPair>,
    pub unmatched_predictions: Vec<usize>,
    pub unmatched_gts: Vec<usize>,
}

impl MatchResult {
    pub fn is_matched(&self, prediction: usize) -> bool {
        self.pairs.iter().any(|p| p.prediction == prediction)
    }
}

/// Prediction indices by descending score; equal scores keep input order.
pub fn score_order(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    idx
}

/// Greedy matching: predictions in descending score order each take the
/// unclaimed GT of highest IoU, if that IoU reaches `threshold`. Equal IoUs
/// go to the lower GT index.
pub fn match_detections(
    scores: &[f64],
    num_gts: usize,
    iou: impl Fn(usize, usize) -> f64,
    threshold: f64,
) -> MatchResult {
    let mut claimed = vec![false; num_gts];
    let mut result = MatchResult::default();
    for p in score_order(scores) {
        let mut best: Option<(usize, f64)> = None;
        for g in (0..num_gts).filter(|&g| !claimed[g]) {
            let v = iou(p, g);
            if v >= threshold && best.is_none_or(|(_, b)| v > b) {
                best = Some((g, v));
            }
        }
        match best {
            Some((g, v)) => {
                claimed[g] = true;
                result.pairs.push(MatchPair { prediction: p, gt: g, iou: v });
            }
            None => result.unmatched_predictions.push(p),
        }
    }
    result.unmatched_predictions.sort_unstable();
    result.unmatched_gts = (0..num_gts).filter(|&g| !claimed[g]).collect();
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn greedy_examples() {
        let one = match_detections(&[0.9], 1, |_, _| 1.0, 0.5);
        assert_eq!(one.pairs, [MatchPair { prediction: 0, gt: 0, iou: 1.0 }]);
        let two = match_detections(&[0.6, 0.9], 1, |_, _| 0.8, 0.5);
        assert_eq!(two.pairs[0].prediction, 1);
        assert_eq!(two.unmatched_predictions, [0]);
        let none = match_detections(&[0.9], 2, |_, _| 0.4, 0.5);
        assert!(none.pairs.is_empty());
        assert_eq!(none.unmatched_gts, [0, 1]);
    }

    #[test]
    fn threshold_is_inclusive() {
        assert_eq!(match_detections(&[1.0], 1, |_, _| 0.5, 0.5).pairs.len(), 1);
    }
}
