//! Fixtures shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use fraclv::lotka::{LotkaParams, LotkaSystem};
use fraclv::rational::RationalOrder;

pub fn r(s: &str) -> RationalOrder {
    s.parse().unwrap()
}

pub fn system(a: f64, b: f64, c: f64, alpha: RationalOrder, beta: RationalOrder) -> LotkaSystem {
    LotkaSystem::new(LotkaParams::new(a, b, c).unwrap(), alpha, beta).unwrap()
}

/// Cell numbers 1 to 9 for `a = b = -c = -1`.
///
/// Cells are read like text: top row (largest `y2`) first, left to right,
/// so `(i, j) -> (2 - j) * 3 + i + 1`. With this numbering the top-left cell
/// escapes, cells 2 and 4 hold the separatrix, and cells 1, 5, 6, 8, 9 are
/// bounded by invariant axes or inward-pointing nullclines.
pub fn region_number(cell: (usize, usize)) -> u8 {
    let (i, j) = cell;
    ((2 - j) * 3 + i + 1) as u8
}

/// Proper crossings and degenerate contacts between non-adjacent segments,
/// all pairs, in exact integer arithmetic.
pub fn brute_force_crossings(points: &[[i64; 2]]) -> (BTreeSet<(usize, usize)>, usize) {
    fn orient(a: [i64; 2], b: [i64; 2], c: [i64; 2]) -> i128 {
        let (a, b, c) = (a.map(i128::from), b.map(i128::from), c.map(i128::from));
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    }
    fn on(a: [i64; 2], b: [i64; 2], c: [i64; 2]) -> bool {
        a[0].min(b[0]) <= c[0]
            && c[0] <= a[0].max(b[0])
            && a[1].min(b[1]) <= c[1]
            && c[1] <= a[1].max(b[1])
    }
    let mut proper = BTreeSet::new();
    let mut degenerate = 0;
    let n = points.len().saturating_sub(1);
    for i in 0..n {
        for j in i + 2..n {
            let (a, b, c, d) = (points[i], points[i + 1], points[j], points[j + 1]);
            let (o1, o2, o3, o4) = (
                orient(a, b, c),
                orient(a, b, d),
                orient(c, d, a),
                orient(c, d, b),
            );
            if o1.signum() * o2.signum() < 0 && o3.signum() * o4.signum() < 0 {
                proper.insert((i, j));
            } else if (o1 == 0 && on(a, b, c))
                || (o2 == 0 && on(a, b, d))
                || (o3 == 0 && on(c, d, a))
                || (o4 == 0 && on(c, d, b))
            {
                degenerate += 1;
            }
        }
    }
    (proper, degenerate)
}

/// Rounds points onto the lattice `2^-bits` so the integer oracle is exact.
pub fn quantize(points: &[[f64; 2]], bits: i32) -> (Vec<[i64; 2]>, Vec<[f64; 2]>) {
    let scale = 2f64.powi(bits);
    let ints: Vec<[i64; 2]> = points
        .iter()
        .map(|p| [(p[0] * scale).round() as i64, (p[1] * scale).round() as i64])
        .collect();
    let back = ints
        .iter()
        .map(|p| [p[0] as f64 / scale, p[1] as f64 / scale])
        .collect();
    (ints, back)
}
