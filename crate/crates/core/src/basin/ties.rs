use robust::{orient2d, Coord};
use serde::Serialize;

/// A transversal crossing of segments `i` and `j` (`i + 1 < j`), segment
/// `k` joining points `k` and `k + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub i: usize,
    pub j: usize,
    pub point: [f64; 2],
}

/// Self-intersections of a polyline.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct TieReport {
    /// Proper crossings ordered by `(i, j)`.
    pub crossings: Vec<Crossing>,
    /// Non-adjacent segment pairs that touch without crossing (shared
    /// points, an endpoint on the other segment, collinear overlap).
    pub degenerate: usize,
}

impl TieReport {
    pub fn has_tie(&self) -> bool {
        !self.crossings.is_empty()
    }
}

/// How two closed segments meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentRelation {
    Disjoint,
    /// Interiors cross at a single point.
    Proper,
    /// They share at least one point but do not cross properly.
    Degenerate,
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    let p = |v: [f64; 2]| Coord { x: v[0], y: v[1] };
    orient2d(p(a), p(b), p(c))
}

/// `c` is known to be collinear with `a b`; is it inside their bounding box?
fn within(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> bool {
    a[0].min(b[0]) <= c[0]
        && c[0] <= a[0].max(b[0])
        && a[1].min(b[1]) <= c[1]
        && c[1] <= a[1].max(b[1])
}

/// Classifies segments `a b` and `c d` with exact orientation predicates.
pub fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> SegmentRelation {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return SegmentRelation::Proper;
    }
    let touches = (o1 == 0.0 && within(a, b, c))
        || (o2 == 0.0 && within(a, b, d))
        || (o3 == 0.0 && within(c, d, a))
        || (o4 == 0.0 && within(c, d, b));
    if touches {
        SegmentRelation::Degenerate
    } else {
        SegmentRelation::Disjoint
    }
}

fn crossing_point(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> [f64; 2] {
    let r = [b[0] - a[0], b[1] - a[1]];
    let s = [d[0] - c[0], d[1] - c[1]];
    let t = ((c[0] - a[0]) * s[1] - (c[1] - a[1]) * s[0]) / (r[0] * s[1] - r[1] * s[0]);
    [a[0] + t * r[0], a[1] + t * r[1]]
}

/// Finds every proper crossing between non-adjacent segments of `points`.
///
/// Segments are swept in order of their smallest `x`; only pairs whose `x`
/// and `y` extents overlap reach the exact predicate.
pub fn detect_self_intersection(points: &[[f64; 2]]) -> TieReport {
    let mut report = TieReport::default();
    if points.len() < 4 {
        return report;
    }
    let n = points.len() - 1;
    let bbox = |k: usize| {
        let (p, q) = (points[k], points[k + 1]);
        [
            p[0].min(q[0]),
            p[0].max(q[0]),
            p[1].min(q[1]),
            p[1].max(q[1]),
        ]
    };
    let boxes: Vec<[f64; 4]> = (0..n).map(bbox).collect();
    let mut order: Vec<usize> = (0..n)
        .filter(|&k| boxes[k].iter().all(|v| v.is_finite()))
        .collect();
    order.sort_by(|&p, &q| boxes[p][0].total_cmp(&boxes[q][0]).then(p.cmp(&q)));

    let mut active: Vec<usize> = Vec::new();
    for &s in &order {
        let bs = boxes[s];
        active.retain(|&t| boxes[t][1] >= bs[0]);
        for &t in &active {
            if s.abs_diff(t) < 2 {
                continue;
            }
            let bt = boxes[t];
            if bt[3] < bs[2] || bs[3] < bt[2] {
                continue;
            }
            let (i, j) = (s.min(t), s.max(t));
            let (a, b, c, d) = (points[i], points[i + 1], points[j], points[j + 1]);
            match segments_cross(a, b, c, d) {
                SegmentRelation::Proper => report.crossings.push(Crossing {
                    i,
                    j,
                    point: crossing_point(a, b, c, d),
                }),
                SegmentRelation::Degenerate => report.degenerate += 1,
                SegmentRelation::Disjoint => {}
            }
        }
        active.push(s);
    }
    report.crossings.sort_by_key(|c| (c.i, c.j));
    report
}
