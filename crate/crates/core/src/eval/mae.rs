use serde::{Deserialize, Serialize};

use super::{EvalError, Metric};

/// Distance bin edges in metres. Bins are `[a, b)` except the last, which
/// is closed; distances outside fall in a separate overflow bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RangeBins {
    edges: Vec<f64>,
}

impl Default for RangeBins {
    fn default() -> Self {
        RangeBins { edges: vec![0.0, 50.0, 100.0, 150.0, 200.0, 250.0] }
    }
}

impl TryFrom<Vec<f64>> for RangeBins {
    type Error = EvalError;

    fn try_from(edges: Vec<f64>) -> Result<Self, EvalError> {
        RangeBins::new(edges)
    }
}

impl From<RangeBins> for Vec<f64> {
    fn from(b: RangeBins) -> Self {
        b.edges
    }
}

impl RangeBins {
    pub fn new(edges: Vec<f64>) -> Result<Self, EvalError> {
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) || edges.iter().any(|e| !e.is_finite()) {
            return Err(EvalError::Config(format!("range bin edges must be finite and strictly increasing: {edges:?}")));
        }
        Ok(RangeBins { edges })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Bin index, or `None` for the overflow bin.
    pub fn bin(&self, x: f64) -> Option<usize> {
        let last = self.edges.len() - 1;
        if !(x >= self.edges[0] && x <= self.edges[last]) {
            return None;
        }
        Some(self.edges[1..].iter().position(|&e| x < e).unwrap_or(last - 1))
    }

    pub fn label(&self, i: usize) -> String {
        format!("{}-{}", self.edges[i], self.edges[i + 1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaeBin {
    pub label: String,
    pub gts: usize,
    pub pairs: usize,
    pub mae: Metric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaeTable {
    pub bins: Vec<MaeBin>,
    pub overflow: MaeBin,
    pub full_range: MaeBin,
}

fn summarize(label: String, gts: usize, errors: &[f64]) -> MaeBin {
    let mae = if gts == 0 && errors.is_empty() {
        Metric::NotApplicable
    } else if errors.is_empty() {
        Metric::NoDetections
    } else {
        Metric::Value(errors.iter().sum::<f64>() / errors.len() as f64)
    };
    MaeBin { label, gts, pairs: errors.len(), mae }
}

/// Mean |predicted − GT| distance per bin of GT distance. `pairs` holds
/// `(gt_distance, predicted_distance)` of matched objects, `gt_distances`
/// every GT of the class (matched or not).
pub fn mae_by_range(pairs: &[(f64, f64)], gt_distances: &[f64], bins: &RangeBins) -> MaeTable {
    let n = bins.len();
    let mut gts = vec![0usize; n + 1];
    for &x in gt_distances {
        gts[bins.bin(x).unwrap_or(n)] += 1;
    }
    let mut errors: Vec<Vec<f64>> = vec![Vec::new(); n + 1];
    for &(gt, pred) in pairs {
        errors[bins.bin(gt).unwrap_or(n)].push((pred - gt).abs());
    }
    let all: Vec<f64> = errors.iter().flatten().copied().collect();
    MaeTable {
        bins: (0..n).map(|i| summarize(bins.label(i), gts[i], &errors[i])).collect(),
        overflow: summarize("overflow".into(), gts[n], &errors[n]),
        full_range: summarize("FR".into(), gt_distances.len(), &all),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bin_edges() {
        let b = RangeBins::default();
        assert_eq!(b.bin(0.0), Some(0));
        assert_eq!(b.bin(49.999), Some(0));
        assert_eq!(b.bin(50.0), Some(1));
        assert_eq!(b.bin(250.0), Some(4));
        assert_eq!(b.bin(250.1), None);
        assert_eq!(b.bin(-1.0), None);
        assert_eq!(b.label(2), "100-150");
        assert!(RangeBins::new(vec![0.0, 50.0, 50.0]).is_err());
    }

    #[test]
    fn examples() {
        let t = mae_by_range(&[(30.0, 32.0), (120.0, 114.0)], &[30.0, 120.0, 160.0], &RangeBins::default());
        assert_eq!(t.bins[0].mae, Metric::Value(2.0));
        assert_eq!(t.bins[2].mae, Metric::Value(6.0));
        assert_eq!(t.full_range.mae, Metric::Value(4.0));
        assert_eq!(t.bins[3].mae, Metric::NoDetections);
        assert_eq!(t.bins[1].mae, Metric::NotApplicable);
        assert_eq!(t.overflow.mae, Metric::NotApplicable);
        let empty = mae_by_range(&[], &[], &RangeBins::default());
        assert_eq!(empty.full_range.mae, Metric::NotApplicable);
    }

    #[test]
    fn serde_as_edge_list() {
        let text = serde_json::to_string(&RangeBins::default()).unwrap();
        assert_eq!(text, "[0.0,50.0,100.0,150.0,200.0,250.0]");
        assert!(serde_json::from_str::<RangeBins>("[5.0,1.0]").is_err());
    }
}
