use serde::Serialize;

use super::BasinMap;

/// Ordered boundary of one basin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Boundary {
    pub target: usize,
    pub points: Vec<[f64; 2]>,
    /// Set when the map has no boundary for `target`.
    pub note: Option<String>,
}

/// Midpoints of lattice edges whose two nodes disagree on membership in
/// `ConvergedTo(target)`.
///
/// The points are chained greedily: the chain starts at the lowest point
/// (smallest `y2`, then smallest `y1`) and repeatedly moves to the nearest
/// unvisited point, ties going to the earlier edge.
pub fn boundary_extract(map: &BasinMap, target: usize) -> Boundary {
    let g = &map.grid;
    let member = map.membership(target);
    let inside = member.iter().filter(|&&m| m).count();
    if inside == 0 || inside == member.len() {
        let what = if inside == 0 { "no node" } else { "every node" };
        return Boundary {
            target,
            points: Vec::new(),
            note: Some(format!("{what} converges to equilibrium {target}")),
        };
    }
    let mut mids = Vec::new();
    for j in 0..g.n2 {
        for i in 0..g.n1 {
            let here = member[g.index(i, j)];
            let p = g.node(i, j);
            if i + 1 < g.n1 && member[g.index(i + 1, j)] != here {
                let q = g.node(i + 1, j);
                mids.push([0.5 * (p[0] + q[0]), p[1]]);
            }
            if j + 1 < g.n2 && member[g.index(i, j + 1)] != here {
                let q = g.node(i, j + 1);
                mids.push([p[0], 0.5 * (p[1] + q[1])]);
            }
        }
    }
    Boundary {
        target,
        points: nearest_neighbour_chain(mids),
        note: None,
    }
}

fn nearest_neighbour_chain(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    if pts.is_empty() {
        return pts;
    }
    let start = (0..pts.len())
        .min_by(|&a, &b| {
            (pts[a][1], pts[a][0])
                .partial_cmp(&(pts[b][1], pts[b][0]))
                .expect("grid coordinates are finite")
        })
        .expect("non-empty");
    pts.swap(0, start);
    for k in 1..pts.len() {
        let last = pts[k - 1];
        let mut best = k;
        let mut best_d = f64::INFINITY;
        for (m, p) in pts.iter().enumerate().skip(k) {
            let d = (p[0] - last[0]).powi(2) + (p[1] - last[1]).powi(2);
            if d < best_d {
                best_d = d;
                best = m;
            }
        }
        // rotate instead of swap so equal-distance ties keep edge order
        pts[k..=best].rotate_right(1);
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::super::{BasinMetadata, GridSpec, OutcomeLabel, ScanConfig};
    use super::*;

    fn map_from(grid: GridSpec, f: impl Fn([f64; 2]) -> OutcomeLabel) -> BasinMap {
        let labels = (0..grid.len())
            .map(|k| {
                let (i, j) = grid.position(k);
                f(grid.node(i, j))
            })
            .collect();
        let meta = BasinMetadata {
            params: None,
            orders: vec![],
            equilibria: vec![],
            config: ScanConfig::default(),
        };
        BasinMap::new(grid, labels, meta).unwrap()
    }

    #[test]
    fn half_plane_gives_a_vertical_line() {
        let g = GridSpec::new([0.0, 4.0], [0.0, 3.0], 5, 4).unwrap();
        let map = map_from(g, |p| {
            if p[0] > 1.5 {
                OutcomeLabel::ConvergedTo(0)
            } else {
                OutcomeLabel::Escaped
            }
        });
        let b = boundary_extract(&map, 0);
        assert_eq!(b.note, None);
        assert_eq!(
            b.points,
            vec![[1.5, 0.0], [1.5, 1.0], [1.5, 2.0], [1.5, 3.0]]
        );
    }

    #[test]
    fn uniform_maps_have_no_boundary() {
        let g = GridSpec::new([0.0, 1.0], [0.0, 1.0], 3, 3).unwrap();
        let b = boundary_extract(&map_from(g, |_| OutcomeLabel::Escaped), 0);
        assert!(b.points.is_empty());
        assert!(b.note.is_some());
        let b = boundary_extract(&map_from(g, |_| OutcomeLabel::ConvergedTo(0)), 0);
        assert!(b.points.is_empty());
    }

    #[test]
    fn chain_follows_a_circle() {
        let g = GridSpec::new([-2.0, 2.0], [-2.0, 2.0], 41, 41).unwrap();
        let map = map_from(g, |p| {
            if p[0].hypot(p[1]) < 1.0 {
                OutcomeLabel::ConvergedTo(1)
            } else {
                OutcomeLabel::Undetermined
            }
        });
        let b = boundary_extract(&map, 1);
        assert!(b.points.len() > 40);
        // consecutive points stay close except possibly for one closing jump
        let long_hops = b
            .points
            .windows(2)
            .filter(|w| (w[0][0] - w[1][0]).hypot(w[0][1] - w[1][1]) > 0.15)
            .count();
        assert!(long_hops <= 1, "{long_hops}");
        for p in &b.points {
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 0.1);
        }
    }
}
