//! The two-dimensional fractional Lotka-Volterra system
//!
//! ```text
//! D^alpha y1 = y1 (a - b y2)
//! D^beta  y2 = y2 (-c + b y1)
//! ```
//!
//! with its equilibria `(0, 0)` and `(c/b, a/b)`, Jacobians, closed-form
//! stability map, order lifting for orders in (1, 2), the integer-order
//! separatrix, and the nullcline partition of the phase plane.

mod lift;
mod separatrix;

pub use lift::LiftedSystem;
pub use separatrix::{
    decimate, separatrix_residual, separatrix_trace, separatrix_trace_with, SeparatrixTrace,
    TraceOptions,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::RationalOrder;
use crate::stability::{
    analyze_equilibrium_with, EquilibriumReport, Matrix, VectorField, Verdict, DEFAULT_TOL_BAND,
};

/// Coefficients `a` (prey growth), `b` (interaction) and `c` (predator decay).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LotkaParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl LotkaParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::Input(format!(
                "parameters must be finite (a = {a}, b = {b}, c = {c})"
            )));
        }
        if b == 0.0 {
            return Err(Error::Degenerate(
                "b = 0 leaves the coexistence equilibrium undefined".into(),
            ));
        }
        Ok(Self { a, b, c })
    }

    /// `(f1, f2)` at `state`.
    pub fn rhs(&self, state: [f64; 2]) -> [f64; 2] {
        let [y1, y2] = state;
        [y1 * (self.a - self.b * y2), y2 * (-self.c + self.b * y1)]
    }

    /// `[(0, 0), (c/b, a/b)]`.
    pub fn equilibria(&self) -> [[f64; 2]; 2] {
        [[0.0, 0.0], [self.c / self.b, self.a / self.b]]
    }

    /// `[[a - b y2, -b y1], [b y2, -c + b y1]]`.
    pub fn jacobian(&self, point: [f64; 2]) -> Matrix {
        let [y1, y2] = point;
        let mut j = Matrix::zeros(2);
        j.set(0, 0, self.a - self.b * y2);
        j.set(0, 1, -self.b * y1);
        j.set(1, 0, self.b * y2);
        j.set(1, 1, -self.c + self.b * y1);
        j
    }

    /// Nullcline cell `(i, j)` containing `point`, each index in `0..=2`.
    ///
    /// `i` places `y1` against the lines `y1 = 0` and `y1 = c/b`, `j` places
    /// `y2` against `y2 = 0` and `y2 = a/b`. A point on a line takes the lower
    /// index.
    pub fn isocline_region(&self, point: [f64; 2]) -> (usize, usize) {
        let index = |x: f64, line: f64| {
            let (lo, hi) = if line < 0.0 { (line, 0.0) } else { (0.0, line) };
            if x <= lo {
                0
            } else if x <= hi {
                1
            } else {
                2
            }
        };
        (
            index(point[0], self.c / self.b),
            index(point[1], self.a / self.b),
        )
    }

    /// Whether `point` lies exactly on a coordinate axis or a nullcline.
    pub fn on_nullcline(&self, point: [f64; 2]) -> bool {
        let [y1, y2] = point;
        y1 == 0.0 || y2 == 0.0 || y1 == self.c / self.b || y2 == self.a / self.b
    }
}

impl VectorField for LotkaParams {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        let f = self.rhs([x[0], x[1]]);
        out.copy_from_slice(&f);
    }

    fn jacobian(&self, x: &[f64]) -> Option<Matrix> {
        Some(LotkaParams::jacobian(self, [x[0], x[1]]))
    }
}

/// Which of the analysed order ranges a system falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderCase {
    /// Both orders in (0, 1].
    Fractional,
    /// Both orders in (1, 2); analysed through [`LiftedSystem`].
    Lifted,
}

/// Parameters together with the two differentiation orders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LotkaSystem {
    pub params: LotkaParams,
    pub alpha: RationalOrder,
    pub beta: RationalOrder,
}

/// Predicted verdicts at the origin and at the coexistence equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClosedFormVerdicts {
    pub case: OrderCase,
    pub origin: Verdict,
    pub coexistence: Verdict,
}

/// Numeric counterpart of [`ClosedFormVerdicts`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericVerdicts {
    pub case: OrderCase,
    pub origin: EquilibriumReport,
    pub coexistence: EquilibriumReport,
}

impl LotkaSystem {
    pub fn new(params: LotkaParams, alpha: RationalOrder, beta: RationalOrder) -> Result<Self> {
        for (name, o) in [("alpha", alpha), ("beta", beta)] {
            if o.v() >= 2 * o.u() {
                return Err(Error::Domain(format!("{name} = {o} must lie in (0, 2)")));
            }
        }
        Ok(Self {
            params,
            alpha,
            beta,
        })
    }

    pub fn order_case(&self) -> Result<OrderCase> {
        let above = |o: RationalOrder| o.v() > o.u();
        match (above(self.alpha), above(self.beta)) {
            (false, false) => Ok(OrderCase::Fractional),
            (true, true) => Ok(OrderCase::Lifted),
            _ => Err(Error::Unsupported(format!(
                "mixed orders alpha = {}, beta = {}: one in (0, 1], the other in (1, 2)",
                self.alpha, self.beta
            ))),
        }
    }

    /// Stability of both equilibria from sign conditions alone.
    ///
    /// Both cases share the origin rule: stable iff `a < 0` and `c > 0`.
    /// The coexistence point needs `ac > 0` and `alpha + beta < 2`, which
    /// can only hold in the fractional case. Boundary parameter values
    /// (`a = 0`, `c = 0`, `alpha = beta = 1`) are reported as Marginal when
    /// the strict inequality is the only thing that fails. The value of `b`
    /// never matters.
    pub fn closed_form_stability(&self) -> Result<ClosedFormVerdicts> {
        let case = self.order_case()?;
        let LotkaParams { a, c, .. } = self.params;
        let origin = if a > 0.0 || c < 0.0 {
            Verdict::Unstable
        } else if a < 0.0 && c > 0.0 {
            Verdict::Stable
        } else {
            Verdict::Marginal
        };
        let ac = a * c;
        let coexistence = if ac < 0.0 {
            Verdict::Unstable
        } else if ac == 0.0 {
            Verdict::Marginal
        } else {
            // v1/u1 + v2/u2 against 2, in integers
            let lhs = self.alpha.v() * self.beta.u() + self.beta.v() * self.alpha.u();
            let rhs = 2 * self.alpha.u() * self.beta.u();
            match lhs.cmp(&rhs) {
                std::cmp::Ordering::Less => Verdict::Stable,
                std::cmp::Ordering::Equal => Verdict::Marginal,
                std::cmp::Ordering::Greater => Verdict::Unstable,
            }
        };
        Ok(ClosedFormVerdicts {
            case,
            origin,
            coexistence,
        })
    }

    /// Sector test at both equilibria through the Jacobian, lifting first
    /// when both orders exceed one.
    pub fn numeric_stability(&self) -> Result<NumericVerdicts> {
        self.numeric_stability_with(DEFAULT_TOL_BAND)
    }

    /// [`Self::numeric_stability`] with an explicit Marginal band.
    pub fn numeric_stability_with(&self, tol_band: f64) -> Result<NumericVerdicts> {
        match self.order_case()? {
            OrderCase::Fractional => {
                let orders = [self.alpha, self.beta];
                let [e1, e2] = self.params.equilibria();
                Ok(NumericVerdicts {
                    case: OrderCase::Fractional,
                    origin: analyze_equilibrium_with(&self.params, &e1, &orders, tol_band)?,
                    coexistence: analyze_equilibrium_with(&self.params, &e2, &orders, tol_band)?,
                })
            }
            OrderCase::Lifted => {
                let lifted = self.lift()?;
                let orders = lifted.orders();
                let [e1, e2] = lifted.equilibria();
                Ok(NumericVerdicts {
                    case: OrderCase::Lifted,
                    origin: analyze_equilibrium_with(&lifted, &e1, &orders, tol_band)?,
                    coexistence: analyze_equilibrium_with(&lifted, &e2, &orders, tol_band)?,
                })
            }
        }
    }

    /// Rewrites orders in (1, 2) as a four-state system with orders in (0, 1].
    pub fn lift(&self) -> Result<LiftedSystem> {
        LiftedSystem::new(self.params, self.alpha, self.beta)
    }

    /// Layout of the state vector used for time integration.
    pub fn simulation_layout(&self) -> SimulationLayout {
        SimulationLayout::new(self)
    }
}

/// How a [`LotkaSystem`] is laid out for the integrator.
///
/// The first two states are always `y1, y2`. An order above one adds its
/// derivative state (`y3 = y1'` or `y4 = y2'`) after them, carrying the
/// fractional part of the order while the original component becomes first
/// order.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationLayout {
    params: LotkaParams,
    orders: Vec<f64>,
    names: Vec<&'static str>,
    d1: Option<usize>,
    d2: Option<usize>,
}

impl SimulationLayout {
    fn new(system: &LotkaSystem) -> Self {
        let mut orders = vec![system.alpha.value(), system.beta.value()];
        let mut names = vec!["y1", "y2"];
        let mut push = |o: RationalOrder, name, orders: &mut Vec<f64>, slot: usize| {
            if o.v() > o.u() {
                orders[slot] = 1.0;
                orders.push(o.value() - 1.0);
                names.push(name);
                Some(orders.len() - 1)
            } else {
                None
            }
        };
        let d1 = push(system.alpha, "y3", &mut orders, 0);
        let d2 = push(system.beta, "y4", &mut orders, 1);
        Self {
            params: system.params,
            orders,
            names,
            d1,
            d2,
        }
    }

    pub fn orders(&self) -> &[f64] {
        &self.orders
    }

    pub fn dim(&self) -> usize {
        self.orders.len()
    }

    /// Column names of the state components, `y1, y2[, y3][, y4]`.
    pub fn names(&self) -> &[&'static str] {
        &self.names
    }

    pub fn is_lifted(&self) -> bool {
        self.d1.is_some() || self.d2.is_some()
    }

    /// Full initial state; derivative states start at `dy0`.
    pub fn initial_state(&self, y0: [f64; 2], dy0: [f64; 2]) -> Vec<f64> {
        let mut s = vec![y0[0], y0[1]];
        if self.d1.is_some() {
            s.push(dy0[0]);
        }
        if self.d2.is_some() {
            s.push(dy0[1]);
        }
        s
    }

    /// Right-hand side in the integrator's calling convention.
    pub fn rhs(&self) -> impl Fn(f64, &[f64], &mut [f64]) + Clone + Send + Sync + 'static {
        let p = self.params;
        let (d1, d2) = (self.d1, self.d2);
        move |_, y: &[f64], out: &mut [f64]| {
            let [f1, f2] = p.rhs([y[0], y[1]]);
            match d1 {
                Some(k) => {
                    out[0] = y[k];
                    out[k] = f1;
                }
                None => out[0] = f1,
            }
            match d2 {
                Some(k) => {
                    out[1] = y[k];
                    out[k] = f2;
                }
                None => out[1] = f2,
            }
        }
    }
}
