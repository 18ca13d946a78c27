use crate::geometry::{Box2D, Box3D};

/// Intersection areas below this are treated as zero.
const DEGENERATE_AREA: f64 = 1e-12;

pub fn iou_2d(a: &Box2D, b: &Box2D) -> f64 {
    let iw = (a.x2.min(b.x2) - a.x1.max(b.x1)).max(0.0);
    let ih = (a.y2.min(b.y2) - a.y1.max(b.y1)).max(0.0);
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).clamp(0.0, 1.0)
    }
}

/// Signed shoelace area; positive for counter-clockwise polygons.
pub(crate) fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for i in 0..n {
        let [x0, y0] = poly[i];
        let [x1, y1] = poly[(i + 1) % n];
        twice += x0 * y1 - x1 * y0;
    }
    0.5 * twice
}

/// Sutherland–Hodgman clip of `subject` by a convex counter-clockwise `clip`.
pub(crate) fn clip_polygon(subject: &[[f64; 2]], clip: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut output = subject.to_vec();
    for i in 0..clip.len() {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % clip.len()];
        let side = |p: [f64; 2]| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
        let input = std::mem::take(&mut output);
        for j in 0..input.len() {
            let cur = input[j];
            let prev = input[(j + input.len() - 1) % input.len()];
            let (sc, sp) = (side(cur), side(prev));
            if sc >= 0.0 {
                if sp < 0.0 {
                    output.push(intersect(prev, cur, sp, sc));
                }
                output.push(cur);
            } else if sp >= 0.0 {
                output.push(intersect(prev, cur, sp, sc));
            }
        }
    }
    output
}

fn intersect(p: [f64; 2], q: [f64; 2], sp: f64, sq: f64) -> [f64; 2] {
    let t = sp / (sp - sq);
    [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
}

/// Footprint intersection area of two yaw-only boxes.
pub fn bev_intersection(a: &Box3D, b: &Box3D) -> f64 {
    let inter = polygon_area(&clip_polygon(&a.footprint(), &b.footprint())).abs();
    if inter < DEGENERATE_AREA {
        0.0
    } else {
        inter
    }
}

pub fn iou_bev(a: &Box3D, b: &Box3D) -> f64 {
    let inter = bev_intersection(a, b);
    let union = a.length() * a.width() + b.length() * b.width() - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).clamp(0.0, 1.0)
    }
}

pub fn iou_3d(a: &Box3D, b: &Box3D) -> f64 {
    let dz = (a.top().min(b.top()) - a.bottom().max(b.bottom())).max(0.0);
    let inter = bev_intersection(a, b) * dz;
    let union = a.volume() + b.volume() - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).clamp(0.0, 1.0)
    }
}
