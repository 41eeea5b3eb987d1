use serde::Serialize;

use super::{classify_trajectory, ClassifyOptions, GridSpec, OutcomeLabel};
use crate::error::{Error, Result};
use crate::lotka::{LotkaParams, LotkaSystem};
use crate::solver::{AbmScheme, SolverOptions, DEFAULT_ESCAPE_MAGNITUDE};

/// How grid nodes are distributed over threads. The labels do not depend on
/// the choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    Sequential,
    /// `Threads(0)` uses every available core. Without the `parallel`
    /// feature this runs sequentially.
    Threads(usize),
    #[default]
    Auto,
}

impl Parallelism {
    /// `None` or `Some(0)` is [`Parallelism::Auto`], `Some(1)` is sequential.
    pub fn from_workers(workers: Option<usize>) -> Self {
        match workers {
            None | Some(0) => Parallelism::Auto,
            Some(1) => Parallelism::Sequential,
            Some(n) => Parallelism::Threads(n),
        }
    }
}

/// Integration and classification settings for a scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanConfig {
    pub t_end: f64,
    pub h: f64,
    pub classify: ClassifyOptions,
    pub escape_magnitude: f64,
    /// Shift applied to both coordinates of nodes lying on an axis or a
    /// nullcline, which are invariant lines of the Lotka-Volterra field.
    pub perturbation: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            t_end: 40.0,
            h: 0.05,
            classify: ClassifyOptions::default(),
            escape_magnitude: DEFAULT_ESCAPE_MAGNITUDE,
            perturbation: 1e-9,
        }
    }
}

/// Everything needed to reproduce a [`BasinMap`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasinMetadata {
    pub params: Option<LotkaParams>,
    pub orders: Vec<String>,
    pub equilibria: Vec<Vec<f64>>,
    pub config: ScanConfig,
}

/// One label per grid node, stored with `y1` varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasinMap {
    pub grid: GridSpec,
    pub labels: Vec<OutcomeLabel>,
    pub metadata: BasinMetadata,
}

impl BasinMap {
    pub fn new(grid: GridSpec, labels: Vec<OutcomeLabel>, metadata: BasinMetadata) -> Result<Self> {
        if labels.len() != grid.len() {
            return Err(Error::Input(format!(
                "{} labels for a {} x {} grid",
                labels.len(),
                grid.n1,
                grid.n2
            )));
        }
        Ok(Self {
            grid,
            labels,
            metadata,
        })
    }

    pub fn label(&self, i: usize, j: usize) -> OutcomeLabel {
        self.labels[self.grid.index(i, j)]
    }

    pub fn count(&self, label: OutcomeLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// `true` for nodes labelled `ConvergedTo(target)`.
    pub fn membership(&self, target: usize) -> Vec<bool> {
        self.labels
            .iter()
            .map(|&l| l == OutcomeLabel::ConvergedTo(target))
            .collect()
    }
}

fn map_nodes<T, F>(n: usize, parallelism: Parallelism, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let threads = match parallelism {
            Parallelism::Sequential => return Ok((0..n).map(f).collect()),
            Parallelism::Auto => 0,
            Parallelism::Threads(k) => k,
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Input(format!("cannot start worker pool: {e}")))?;
        Ok(pool.install(|| (0..n).into_par_iter().map(f).collect()))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = parallelism;
        Ok((0..n).map(f).collect())
    }
}

/// Integrates from every grid node and classifies the result.
///
/// `initial` turns a node into a full initial state, so systems whose
/// state carries more than `(y1, y2)` can be scanned over their first two
/// components. All nodes share one set of quadrature weights.
pub fn scan_grid<F, G>(
    rhs: &F,
    orders: &[f64],
    initial: G,
    equilibria: &[Vec<f64>],
    grid: &GridSpec,
    config: &ScanConfig,
    parallelism: Parallelism,
) -> Result<Vec<OutcomeLabel>>
where
    F: Fn(f64, &[f64], &mut [f64]) + Sync,
    G: Fn([f64; 2]) -> Vec<f64> + Sync,
{
    let scheme = AbmScheme::new(orders, config.h, config.t_end)?;
    let options = SolverOptions {
        escape_magnitude: config.escape_magnitude,
    };
    let results = map_nodes(grid.len(), parallelism, |k| {
        let (i, j) = grid.position(k);
        let y0 = initial(grid.node(i, j));
        let traj = scheme.solve(rhs, &y0, &options)?;
        classify_trajectory(&traj, equilibria, &config.classify)
    })?;
    results.into_iter().collect()
}

/// Basin map of a Lotka-Volterra system.
///
/// Equilibrium 0 is the origin and 1 the coexistence point. Orders above one
/// are integrated in lifted form with zero initial derivatives.
pub fn scan_basin(
    system: &LotkaSystem,
    grid: &GridSpec,
    config: &ScanConfig,
    parallelism: Parallelism,
) -> Result<BasinMap> {
    let layout = system.simulation_layout();
    let params = system.params;
    let pad = layout.dim() - 2;
    let equilibria: Vec<Vec<f64>> = params
        .equilibria()
        .iter()
        .map(|e| {
            let mut v = e.to_vec();
            v.extend(std::iter::repeat_n(0.0, pad));
            v
        })
        .collect();
    let delta = config.perturbation;
    let initial = |node: [f64; 2]| {
        let start = if params.on_nullcline(node) {
            [node[0] + delta, node[1] + delta]
        } else {
            node
        };
        layout.initial_state(start, [0.0, 0.0])
    };
    let labels = scan_grid(
        &layout.rhs(),
        layout.orders(),
        initial,
        &equilibria,
        grid,
        config,
        parallelism,
    )?;
    BasinMap::new(
        *grid,
        labels,
        BasinMetadata {
            params: Some(params),
            orders: vec![system.alpha.to_string(), system.beta.to_string()],
            equilibria,
            config: *config,
        },
    )
}
