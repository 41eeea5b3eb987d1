//! Grid estimates of domains of attraction, their boundaries, and
//! self-intersections ("ties") of phase-plane trajectories.

mod boundary;
mod scan;
mod ties;

pub use boundary::{boundary_extract, Boundary};
pub use scan::{scan_basin, scan_grid, BasinMap, BasinMetadata, Parallelism, ScanConfig};
pub use ties::{detect_self_intersection, segments_cross, Crossing, SegmentRelation, TieReport};

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::solver::Trajectory;

/// Rectangle of initial conditions sampled on an `n1 x n2` lattice of nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub y1: [f64; 2],
    pub y2: [f64; 2],
    pub n1: usize,
    pub n2: usize,
}

impl GridSpec {
    /// Nodes include both ends of each range. A single node along an axis
    /// sits at the midpoint of that range.
    pub fn new(y1: [f64; 2], y2: [f64; 2], n1: usize, n2: usize) -> Result<Self> {
        for (name, [lo, hi]) in [("y1", y1), ("y2", y2)] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Input(format!(
                    "{name} range [{lo}, {hi}] must be finite with lo < hi"
                )));
            }
        }
        if n1 == 0 || n2 == 0 {
            return Err(Error::Input(format!("grid {n1} x {n2} has no nodes")));
        }
        Ok(Self { y1, y2, n1, n2 })
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn coord([lo, hi]: [f64; 2], n: usize, k: usize) -> f64 {
        if n == 1 {
            0.5 * (lo + hi)
        } else if k == n - 1 {
            hi
        } else {
            lo + (hi - lo) * k as f64 / (n - 1) as f64
        }
    }

    /// Node `(i, j)`, `i` along `y1` and `j` along `y2`.
    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        [
            Self::coord(self.y1, self.n1, i),
            Self::coord(self.y2, self.n2, j),
        ]
    }

    /// Flat index of node `(i, j)`; `i` varies fastest.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n1 + i
    }

    /// Inverse of [`GridSpec::index`].
    pub fn position(&self, k: usize) -> (usize, usize) {
        (k % self.n1, k / self.n1)
    }

    /// Node spacing along each axis (the full range for a single node).
    pub fn spacing(&self) -> [f64; 2] {
        let d = |[lo, hi]: [f64; 2], n: usize| (hi - lo) / n.saturating_sub(1).max(1) as f64;
        [d(self.y1, self.n1), d(self.y2, self.n2)]
    }
}

/// Fate of one trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutcomeLabel {
    /// Settled within tolerance of equilibrium `k`.
    ConvergedTo(usize),
    /// The integrator stopped at the escape radius.
    Escaped,
    /// Neither of the above within the horizon.
    Undetermined,
}

impl fmt::Display for OutcomeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutcomeLabel::ConvergedTo(k) => write!(f, "converged:{k}"),
            OutcomeLabel::Escaped => f.write_str("escaped"),
            OutcomeLabel::Undetermined => f.write_str("undetermined"),
        }
    }
}

impl std::str::FromStr for OutcomeLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "escaped" => Ok(Self::Escaped),
            "undetermined" => Ok(Self::Undetermined),
            _ => s
                .strip_prefix("converged:")
                .and_then(|k| k.parse().ok())
                .map(Self::ConvergedTo)
                .ok_or_else(|| Error::Input(format!("unknown outcome label '{s}'"))),
        }
    }
}

impl Serialize for OutcomeLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Thresholds for [`classify_trajectory`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassifyOptions {
    /// Distance to an equilibrium, relative to `max(1, |Y*|)`.
    pub epsilon: f64,
    /// Trailing part of the time horizon that must stay within `epsilon`.
    pub window_fraction: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            window_fraction: 0.1,
        }
    }
}

/// Labels a trajectory by where its trailing window sits.
///
/// Each equilibrium is compared against the leading components of the
/// state, so two-component equilibria work for lifted trajectories too.
/// When several equilibria qualify the lowest index wins.
pub fn classify_trajectory(
    traj: &Trajectory,
    equilibria: &[Vec<f64>],
    options: &ClassifyOptions,
) -> Result<OutcomeLabel> {
    let ClassifyOptions {
        epsilon,
        window_fraction,
    } = *options;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Input(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if !(window_fraction > 0.0 && window_fraction < 1.0) {
        return Err(Error::Input(format!(
            "window fraction must lie in (0, 1), got {window_fraction}"
        )));
    }
    if traj.is_empty() {
        return Err(Error::Input("cannot classify an empty trajectory".into()));
    }
    if let Some(e) = equilibria.iter().find(|e| e.len() > traj.dim()) {
        return Err(Error::Input(format!(
            "equilibrium with {} components for a {}-dimensional trajectory",
            e.len(),
            traj.dim()
        )));
    }
    if traj.escaped() {
        return Ok(OutcomeLabel::Escaped);
    }
    let times = traj.times();
    let (t0, t1) = (times[0], traj.last_time());
    let start = t1 - window_fraction * (t1 - t0);
    let first = times.partition_point(|&t| t < start);
    for (k, e) in equilibria.iter().enumerate() {
        let scale = e.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
        let tol = epsilon * scale;
        let inside = (first..traj.len()).all(|n| {
            let s = traj.state(n);
            let d2: f64 = e.iter().zip(s).map(|(a, b)| (a - b) * (a - b)).sum();
            d2.sqrt() <= tol
        });
        if inside {
            return Ok(OutcomeLabel::ConvergedTo(k));
        }
    }
    Ok(OutcomeLabel::Undetermined)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(states: &[[f64; 2]], escaped: bool) -> Trajectory {
        let times = (0..states.len()).map(|k| k as f64).collect();
        let rows: Vec<Vec<f64>> = states.iter().map(|s| s.to_vec()).collect();
        Trajectory::from_states(times, &rows, escaped).unwrap()
    }

    #[test]
    fn grid_nodes_and_indices() {
        let g = GridSpec::new([-4.0, 4.0], [0.0, 1.0], 5, 3).unwrap();
        assert_eq!(g.len(), 15);
        assert_eq!(g.node(0, 0), [-4.0, 0.0]);
        assert_eq!(g.node(4, 2), [4.0, 1.0]);
        assert_eq!(g.node(2, 1), [0.0, 0.5]);
        assert_eq!(g.spacing(), [2.0, 0.5]);
        for k in 0..g.len() {
            let (i, j) = g.position(k);
            assert_eq!(g.index(i, j), k);
        }
        let single = GridSpec::new([0.0, 2.0], [-1.0, 1.0], 1, 2).unwrap();
        assert_eq!(single.node(0, 1), [1.0, 1.0]);
        assert!(GridSpec::new([1.0, 1.0], [0.0, 1.0], 2, 2).is_err());
        assert!(GridSpec::new([0.0, 1.0], [0.0, f64::NAN], 2, 2).is_err());
        assert!(GridSpec::new([0.0, 1.0], [0.0, 1.0], 0, 2).is_err());
    }

    #[test]
    fn labels_round_trip_through_text() {
        for l in [
            OutcomeLabel::ConvergedTo(0),
            OutcomeLabel::ConvergedTo(1),
            OutcomeLabel::Escaped,
            OutcomeLabel::Undetermined,
        ] {
            assert_eq!(l.to_string().parse::<OutcomeLabel>().unwrap(), l);
        }
        assert!("converged:x".parse::<OutcomeLabel>().is_err());
    }

    #[test]
    fn constant_trajectory_at_an_equilibrium() {
        let eq = vec![vec![0.0, 0.0], vec![-1.0, -1.0]];
        let t = traj(&[[-1.0, -1.0]; 20], false);
        assert_eq!(
            classify_trajectory(&t, &eq, &ClassifyOptions::default()).unwrap(),
            OutcomeLabel::ConvergedTo(1)
        );
    }

    #[test]
    fn only_the_trailing_window_matters() {
        let eq = vec![vec![0.0, 0.0]];
        let mut states = vec![[5.0, 5.0]; 18];
        states.extend([[1e-4, 0.0], [0.0, 0.0], [0.0, 0.0]]);
        let t = traj(&states, false);
        // horizon 20, window 0.1 -> t >= 18
        assert_eq!(
            classify_trajectory(&t, &eq, &ClassifyOptions::default()).unwrap(),
            OutcomeLabel::ConvergedTo(0)
        );
        let wide = ClassifyOptions {
            window_fraction: 0.2,
            ..Default::default()
        };
        assert_eq!(
            classify_trajectory(&t, &eq, &wide).unwrap(),
            OutcomeLabel::Undetermined
        );
    }

    #[test]
    fn tolerance_scales_with_equilibrium_size() {
        let eq = vec![vec![30.0, 40.0]];
        let t = traj(&[[30.04, 40.0]; 10], false);
        assert_eq!(
            classify_trajectory(&t, &eq, &ClassifyOptions::default()).unwrap(),
            OutcomeLabel::ConvergedTo(0)
        );
    }

    #[test]
    fn escape_flag_wins() {
        let t = traj(&[[0.0, 0.0]; 4], true);
        assert_eq!(
            classify_trajectory(&t, &[vec![0.0, 0.0]], &ClassifyOptions::default()).unwrap(),
            OutcomeLabel::Escaped
        );
    }

    #[test]
    fn invalid_classifier_inputs() {
        let t = traj(&[[0.0, 0.0]; 4], false);
        let eq = [vec![0.0, 0.0]];
        for (epsilon, window_fraction) in [(0.0, 0.1), (1e-3, 0.0), (1e-3, 1.0), (f64::NAN, 0.5)] {
            let o = ClassifyOptions {
                epsilon,
                window_fraction,
            };
            assert!(classify_trajectory(&t, &eq, &o).is_err());
        }
        assert!(classify_trajectory(&t, &[vec![0.0; 3]], &ClassifyOptions::default()).is_err());
    }
}
