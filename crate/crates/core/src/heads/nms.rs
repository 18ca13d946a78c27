use std::cmp::Ordering;
use std::collections::BTreeMap;

use super::HeadPrediction;
use crate::eval::iou_bev;

pub const DEFAULT_NMS_IOU: f64 = 0.25;

fn order(a: &HeadPrediction, b: &HeadPrediction) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.frustum_ref.cmp(&b.frustum_ref))
        .then(a.class.cmp(&b.class))
        .then((a.route as u8).cmp(&(b.route as u8)))
        .then_with(|| {
            let (ca, cb) = (a.box3d.center, b.box3d.center);
            ca.iter().zip(cb.iter()).fold(Ordering::Equal, |o, (x, y)| o.then(x.total_cmp(y)))
        })
}

/// Greedy class-agnostic BEV NMS per frame over both routes. A prediction is
/// dropped when its BEV IoU with a kept one exceeds `iou_threshold`.
/// Output is grouped by frame id, each group in score order.
pub fn merge_and_nms(
    short: Vec<HeadPrediction>,
    long: Vec<HeadPrediction>,
    iou_threshold: f64,
) -> Vec<HeadPrediction> {
    let mut frames: BTreeMap<String, Vec<HeadPrediction>> = BTreeMap::new();
    for p in short.into_iter().chain(long) {
        frames.entry(p.frame_id.clone()).or_default().push(p);
    }
    let mut out = Vec::new();
    for (_, mut preds) in frames {
        preds.sort_by(order);
        let mut kept: Vec<HeadPrediction> = Vec::new();
        for p in preds {
            if kept.iter().all(|k| iou_bev(&k.box3d, &p.box3d) <= iou_threshold) {
                kept.push(p);
            }
        }
        out.extend(kept);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::class::ClassId;
    use crate::frustum::Route;
    use crate::geometry::{Box3D, Vec3};
    use proptest::prelude::*;

    fn p(x: f64, score: f64, r: usize, route: Route) -> HeadPrediction {
        HeadPrediction {
            frame_id: "f".into(),
            class: ClassId::RoadVehicle,
            box3d: Box3D::new(Vec3::new(x, 0.0, 0.0), [2.0, 2.0, 2.0], 0.0).unwrap(),
            score,
            route,
            frustum_ref: r,
        }
    }

    #[test]
    fn examples() {
        let kept = merge_and_nms(vec![p(0.0, 0.5, 0, Route::Short)], vec![p(10.0, 0.6, 1, Route::Long)], 0.25);
        assert_eq!(kept.len(), 2);
        let kept = merge_and_nms(vec![p(0.0, 0.8, 1, Route::Short)], vec![p(0.0, 0.9, 0, Route::Long)], 0.25);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].score, 0.9);
        // A overlaps B, B overlaps C, A and C disjoint.
        let kept = merge_and_nms(
            vec![p(0.0, 0.9, 0, Route::Short), p(1.0, 0.8, 1, Route::Short)],
            vec![p(2.0, 0.7, 2, Route::Long)],
            0.25,
        );
        let refs: Vec<_> = kept.iter().map(|k| k.frustum_ref).collect();
        assert_eq!(refs, [0, 2]);
    }

    #[test]
    fn frames_do_not_suppress_each_other() {
        let mut a = p(0.0, 0.9, 0, Route::Short);
        a.frame_id = "g".into();
        assert_eq!(merge_and_nms(vec![a, p(0.0, 0.8, 0, Route::Short)], vec![], 0.25).len(), 2);
    }

    proptest! {
        #[test]
        fn order_independent(xs in prop::collection::vec((0.0f64..10.0, 0.0f64..1.0), 0..12), split in 0usize..12, seed in 0u64..1000) {
            let preds: Vec<_> = xs.iter().enumerate().map(|(i, (x, s))| p(*x, (s * 4.0).round() / 4.0, i, Route::Short)).collect();
            let k = split.min(preds.len());
            let a = merge_and_nms(preds[..k].to_vec(), preds[k..].to_vec(), 0.25);
            let mut shuffled = preds.clone();
            let n = shuffled.len();
            if n > 1 {
                shuffled.rotate_left((seed as usize) % n);
                shuffled.swap(0, n - 1);
            }
            let b = merge_and_nms(shuffled, vec![], 0.25);
            prop_assert_eq!(a.clone(), b);
            for kept in &a {
                prop_assert!(preds.iter().any(|q| q.frustum_ref == kept.frustum_ref));
            }
        }
    }
}
