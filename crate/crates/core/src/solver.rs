//! Fractional Adams-Bashforth-Moulton predictor-corrector (PECE) for Caputo
//! initial value problems with component-wise orders in (0, 1].
//!
//! Every step uses the full history of right-hand side evaluations, so the
//! total work for `N` steps is `O(N^2)` per component. Weights depend only on
//! the order, the step size and the step index, which is why they are kept in
//! an [`AbmScheme`] that can be shared by many integrations on the same grid
//! (basin scans reuse a single scheme for every grid node).

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::gamma_unchecked;

/// Default magnitude beyond which a trajectory is considered to have escaped.
pub const DEFAULT_ESCAPE_MAGNITUDE: f64 = 1e4;

/// A Caputo initial value problem `D^{alpha_i} y_i = f_i(t, y)`, `y(0) = y0`,
/// integrated on the uniform grid `t_k = k h` up to `t_end`.
///
/// The right-hand side writes the derivative vector into its output slice,
/// whose length always equals the state dimension.
pub struct FractionalIvp<F> {
    orders: Vec<f64>,
    rhs: F,
    y0: Vec<f64>,
    t_end: f64,
    h: f64,
}

impl<F> FractionalIvp<F>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    pub fn new(orders: Vec<f64>, rhs: F, y0: Vec<f64>, t_end: f64, h: f64) -> Result<Self> {
        validate_orders(&orders)?;
        if y0.len() != orders.len() {
            return Err(Error::Input(format!(
                "initial state has {} components but {} orders were given",
                y0.len(),
                orders.len()
            )));
        }
        if y0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("initial state must be finite".into()));
        }
        step_count(t_end, h)?;
        Ok(Self {
            orders,
            rhs,
            y0,
            t_end,
            h,
        })
    }

    pub fn orders(&self) -> &[f64] {
        &self.orders
    }

    pub fn y0(&self) -> &[f64] {
        &self.y0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn dim(&self) -> usize {
        self.y0.len()
    }

    pub fn rhs(&self) -> &F {
        &self.rhs
    }

    /// Number of steps on the grid (the trajectory has one more point).
    pub fn steps(&self) -> usize {
        step_count(self.t_end, self.h).expect("validated at construction")
    }
}

fn validate_orders(orders: &[f64]) -> Result<()> {
    if orders.is_empty() {
        return Err(Error::Input(
            "at least one state component is required".into(),
        ));
    }
    for &a in orders {
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::Domain(format!(
                "solver orders must lie in (0, 1], got {a}"
            )));
        }
    }
    Ok(())
}

/// Number of uniform steps of size `h` needed to reach `t_end`.
///
/// Ratios within 1e-9 of an integer are rounded, anything else is truncated.
pub fn step_count(t_end: f64, h: f64) -> Result<usize> {
    if !(h > 0.0 && h.is_finite()) || !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Input(format!(
            "step size and horizon must be positive and finite (h = {h}, t_end = {t_end})"
        )));
    }
    let ratio = t_end / h;
    let rounded = ratio.round();
    let n = if (ratio - rounded).abs() <= 1e-9 * rounded.max(1.0) {
        rounded
    } else {
        ratio.floor()
    };
    if n < 1.0 {
        return Err(Error::Input(format!(
            "horizon {t_end} is shorter than one step of size {h}"
        )));
    }
    if n > u32::MAX as f64 {
        return Err(Error::Input(format!("{n} steps is too many")));
    }
    Ok(n as usize)
}

/// Settings that do not change the discretisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Integration stops once any component exceeds this magnitude.
    pub escape_magnitude: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            escape_magnitude: DEFAULT_ESCAPE_MAGNITUDE,
        }
    }
}

/// Time-stamped states on a uniform grid.
///
/// States are stored contiguously; [`Trajectory::state`] returns one of them
/// as a slice. When `escaped` is set the trajectory was cut short because a
/// component left the escape ball (or became non-finite).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    data: Vec<f64>,
    dim: usize,
    escaped: bool,
}

impl Trajectory {
    /// Builds a trajectory from explicit states. Mostly useful in tests and
    /// for loading data written by the CLI.
    pub fn from_states(times: Vec<f64>, states: &[Vec<f64>], escaped: bool) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::Input(format!(
                "{} time stamps for {} states",
                times.len(),
                states.len()
            )));
        }
        let dim = states.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(Error::Input(
                "trajectory needs at least one non-empty state".into(),
            ));
        }
        let mut data = Vec::with_capacity(dim * states.len());
        for s in states {
            if s.len() != dim {
                return Err(Error::Input("states have inconsistent dimensions".into()));
            }
            data.extend_from_slice(s);
        }
        Ok(Self {
            times,
            data,
            dim,
            escaped,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn escaped(&self) -> bool {
        self.escaped
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn states(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn last_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    /// Projection onto two components, e.g. the `(y1, y2)` phase plane.
    pub fn project(&self, i: usize, j: usize) -> Vec<[f64; 2]> {
        self.states().map(|s| [s[i], s[j]]).collect()
    }
}

/// Predictor and corrector weights for one order on one grid.
#[derive(Debug, Clone)]
struct OrderWeights {
    /// `h^alpha / Gamma(alpha + 1)`
    pred_scale: f64,
    /// `h^alpha / Gamma(alpha + 2)`
    corr_scale: f64,
    /// `(k+1)^alpha - k^alpha`
    pred: Vec<f64>,
    /// `(k+2)^(alpha+1) + k^(alpha+1) - 2 (k+1)^(alpha+1)`
    corr: Vec<f64>,
    /// `n^(alpha+1) - (n - alpha)(n+1)^alpha`
    first: Vec<f64>,
}

/// `(k+1)^p - k^p` without the cancellation of the naive form.
fn forward_difference(k: usize, p: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let k = k as f64;
    k.powf(p) * (p * (1.0 / k).ln_1p()).exp_m1()
}

impl OrderWeights {
    fn new(alpha: f64, h: f64, steps: usize) -> Self {
        let h_alpha = h.powf(alpha);
        let pred: Vec<f64> = (0..steps).map(|k| forward_difference(k, alpha)).collect();
        let diff: Vec<f64> = (0..=steps)
            .map(|k| forward_difference(k, alpha + 1.0))
            .collect();
        let corr: Vec<f64> = diff.windows(2).map(|w| w[1] - w[0]).collect();
        let first = (0..steps)
            .map(|n| {
                let nf = n as f64;
                alpha * (nf + 1.0).powf(alpha) - nf * forward_difference(n, alpha)
            })
            .collect();
        Self {
            pred_scale: h_alpha / gamma_unchecked(alpha + 1.0),
            corr_scale: h_alpha / gamma_unchecked(alpha + 2.0),
            pred,
            corr,
            first,
        }
    }
}

struct Scratch {
    predicted: Vec<f64>,
    f_pred: Vec<f64>,
    corr_acc: Vec<f64>,
}

impl Scratch {
    fn new(dim: usize) -> Self {
        Self {
            predicted: vec![0.0; dim],
            f_pred: vec![0.0; dim],
            corr_acc: vec![0.0; dim],
        }
    }
}

/// Precomputed PECE weights for a fixed set of orders, step size and number
/// of steps.
#[derive(Debug, Clone)]
pub struct AbmScheme {
    h: f64,
    steps: usize,
    orders: Vec<f64>,
    weights: Vec<OrderWeights>,
    /// index into `weights` for each component
    component: Vec<usize>,
}

impl AbmScheme {
    pub fn new(orders: &[f64], h: f64, t_end: f64) -> Result<Self> {
        validate_orders(orders)?;
        let steps = step_count(t_end, h)?;
        let mut unique: HashMap<u64, usize> = HashMap::new();
        let mut weights = Vec::new();
        let component = orders
            .iter()
            .map(|&a| {
                *unique.entry(a.to_bits()).or_insert_with(|| {
                    weights.push(OrderWeights::new(a, h, steps));
                    weights.len() - 1
                })
            })
            .collect();
        Ok(Self {
            h,
            steps,
            orders: orders.to_vec(),
            weights,
            component,
        })
    }

    pub fn for_ivp<F: Fn(f64, &[f64], &mut [f64])>(ivp: &FractionalIvp<F>) -> Self {
        Self::new(&ivp.orders, ivp.h, ivp.t_end).expect("validated at construction")
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn dim(&self) -> usize {
        self.orders.len()
    }

    fn time(&self, k: usize) -> f64 {
        k as f64 * self.h
    }

    /// Computes `y_{n+1}` from the history `f_0 .. f_n` stored component-major
    /// in `history` (`history[i][j] = f_i(t_j, y_j)`).
    fn advance<F: Fn(f64, &[f64], &mut [f64])>(
        &self,
        rhs: &F,
        y0: &[f64],
        history: &[Vec<f64>],
        n: usize,
        scratch: &mut Scratch,
        out: &mut [f64],
    ) {
        let Scratch {
            predicted,
            f_pred,
            corr_acc,
        } = scratch;
        for (i, f_hist) in history.iter().enumerate() {
            let w = &self.weights[self.component[i]];
            let f_hist = &f_hist[..=n];
            let mut sp = 0.0;
            for (b, f) in w.pred[..=n].iter().rev().zip(f_hist) {
                sp += b * f;
            }
            let mut sc = w.first[n] * f_hist[0];
            for (a, f) in w.corr[..n].iter().rev().zip(&f_hist[1..]) {
                sc += a * f;
            }
            predicted[i] = y0[i] + w.pred_scale * sp;
            corr_acc[i] = sc;
        }
        rhs(self.time(n + 1), predicted, f_pred);
        for i in 0..self.dim() {
            let w = &self.weights[self.component[i]];
            out[i] = y0[i] + w.corr_scale * (f_pred[i] + corr_acc[i]);
        }
    }

    /// Integrates from `y0` over the scheme's grid.
    pub fn solve<F: Fn(f64, &[f64], &mut [f64])>(
        &self,
        rhs: &F,
        y0: &[f64],
        options: &SolverOptions,
    ) -> Result<Trajectory> {
        let dim = self.dim();
        if y0.len() != dim {
            return Err(Error::Input(format!(
                "initial state has {} components, scheme expects {dim}",
                y0.len()
            )));
        }
        if y0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("initial state must be finite".into()));
        }
        let mut f0 = vec![0.0; dim];
        rhs(0.0, y0, &mut f0);
        if f0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input(format!(
                "right-hand side is not finite at the initial state: {f0:?}"
            )));
        }

        let mut history: Vec<Vec<f64>> = f0
            .iter()
            .map(|&v| {
                let mut col = Vec::with_capacity(self.steps + 1);
                col.push(v);
                col
            })
            .collect();
        let mut times = Vec::with_capacity(self.steps + 1);
        let mut data = Vec::with_capacity(dim * (self.steps + 1));
        times.push(0.0);
        data.extend_from_slice(y0);

        let mut scratch = Scratch::new(dim);
        let mut next = vec![0.0; dim];
        let mut f_next = vec![0.0; dim];
        let mut escaped = false;
        for n in 0..self.steps {
            self.advance(rhs, y0, &history, n, &mut scratch, &mut next);
            if next.iter().any(|v| !v.is_finite()) {
                escaped = true;
                break;
            }
            times.push(self.time(n + 1));
            data.extend_from_slice(&next);
            if next.iter().any(|v| v.abs() > options.escape_magnitude) {
                escaped = true;
                break;
            }
            rhs(self.time(n + 1), &next, &mut f_next);
            if f_next.iter().any(|v| !v.is_finite()) {
                escaped = true;
                break;
            }
            for (col, &v) in history.iter_mut().zip(&f_next) {
                col.push(v);
            }
        }
        Ok(Trajectory {
            times,
            data,
            dim,
            escaped,
        })
    }

    /// Recomputes `y_n` (n >= 1) from the stored prefix `y_0 .. y_{n-1}` of a
    /// trajectory produced by this scheme.
    pub fn recompute_step<F: Fn(f64, &[f64], &mut [f64])>(
        &self,
        rhs: &F,
        trajectory: &Trajectory,
        n: usize,
    ) -> Result<Vec<f64>> {
        if n == 0 || n >= trajectory.len() || n > self.steps {
            return Err(Error::Input(format!(
                "step {n} outside 1..{}",
                trajectory.len().min(self.steps + 1)
            )));
        }
        if trajectory.dim() != self.dim() {
            return Err(Error::Input(
                "trajectory dimension does not match scheme".into(),
            ));
        }
        let dim = self.dim();
        let mut history = vec![Vec::with_capacity(n); dim];
        let mut f = vec![0.0; dim];
        for j in 0..n {
            rhs(self.time(j), trajectory.state(j), &mut f);
            for (col, &v) in history.iter_mut().zip(&f) {
                col.push(v);
            }
        }
        let mut out = vec![0.0; dim];
        self.advance(
            rhs,
            trajectory.state(0),
            &history,
            n - 1,
            &mut Scratch::new(dim),
            &mut out,
        );
        Ok(out)
    }

    /// Predictor weight `b_{j,n+1}` including its `h^alpha/alpha` factor.
    pub fn predictor_weight(&self, component: usize, j: usize, n: usize) -> f64 {
        let w = &self.weights[self.component[component]];
        let alpha = self.orders[component];
        self.h.powf(alpha) / alpha * w.pred[n - j]
    }

    /// Corrector weight `a_{j,n+1}` (without the `h^alpha/Gamma(alpha+2)` factor).
    pub fn corrector_weight(&self, component: usize, j: usize, n: usize) -> f64 {
        let w = &self.weights[self.component[component]];
        if j == 0 {
            w.first[n]
        } else if j == n + 1 {
            1.0
        } else {
            w.corr[n - j]
        }
    }
}

/// Integrates `ivp` with the default escape magnitude.
pub fn abm_solve<F: Fn(f64, &[f64], &mut [f64])>(ivp: &FractionalIvp<F>) -> Result<Trajectory> {
    abm_solve_with(ivp, &SolverOptions::default())
}

pub fn abm_solve_with<F: Fn(f64, &[f64], &mut [f64])>(
    ivp: &FractionalIvp<F>,
    options: &SolverOptions,
) -> Result<Trajectory> {
    AbmScheme::for_ivp(ivp).solve(&ivp.rhs, &ivp.y0, options)
}
