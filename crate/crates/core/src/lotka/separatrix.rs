use serde::Serialize;

use super::LotkaParams;
use crate::error::{Error, Result};

/// Real power that refuses complex branches: negative bases are only
/// accepted with integer exponents.
fn real_pow(base: f64, exponent: f64) -> Result<f64> {
    if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
        return Ok(base.powi(exponent as i32));
    }
    if base < 0.0 {
        return Err(Error::Domain(format!(
            "{base}^{exponent} has no real value"
        )));
    }
    Ok(base.powf(exponent))
}

/// `F(y1, y2) = y2^a y1^c - (a/b)^a (c/b)^c exp(b (y1 + y2) - (a + c))`.
///
/// `F` vanishes on the level set of the integer-order first integral that
/// passes through the coexistence point, which holds the separatrix.
pub fn separatrix_residual(params: &LotkaParams, point: [f64; 2]) -> Result<f64> {
    let LotkaParams { a, b, c } = *params;
    let [y1, y2] = point;
    let lhs = real_pow(y2, a)? * real_pow(y1, c)?;
    let scale = real_pow(a / b, a)? * real_pow(c / b, c)?;
    let value = lhs - scale * (b * (y1 + y2) - (a + c)).exp();
    if !value.is_finite() {
        return Err(Error::Domain(format!(
            "residual is not finite at ({y1}, {y2})"
        )));
    }
    Ok(value)
}

/// `F` and its gradient, or `None` where `F` has no real value.
fn residual_and_gradient(params: &LotkaParams, point: [f64; 2]) -> Option<(f64, [f64; 2])> {
    let LotkaParams { a, b, c } = *params;
    let [y1, y2] = point;
    let p2 = real_pow(y2, a).ok()?;
    let p1 = real_pow(y1, c).ok()?;
    let tail =
        real_pow(a / b, a).ok()? * real_pow(c / b, c).ok()? * (b * (y1 + y2) - (a + c)).exp();
    let d1 = c * p2 * real_pow(y1, c - 1.0).ok()? - b * tail;
    let d2 = a * p1 * real_pow(y2, a - 1.0).ok()? - b * tail;
    let f = p2 * p1 - tail;
    (f.is_finite() && d1.is_finite() && d2.is_finite()).then_some((f, [d1, d2]))
}

/// Newton steps along the gradient of `F` that pull a point back onto the
/// level set the integrator is following. Points where `F` is undefined are
/// returned unchanged.
fn project(params: &LotkaParams, mut point: [f64; 2]) -> [f64; 2] {
    for _ in 0..3 {
        let Some((f, [g1, g2])) = residual_and_gradient(params, point) else {
            break;
        };
        let g = g1 * g1 + g2 * g2;
        if f == 0.0 || !(g > 0.0) {
            break;
        }
        let next = [point[0] - f * g1 / g, point[1] - f * g2 / g];
        if !(next[0].is_finite() && next[1].is_finite()) {
            break;
        }
        point = next;
    }
    point
}

/// Tracing controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceOptions {
    /// Offset from the saddle along the stable direction.
    pub offset: f64,
    /// Arclength RK4 step.
    pub step: f64,
    /// Arclength budget per branch.
    pub budget: f64,
    /// Stop a branch on leaving `[x_min, x_max] x [y_min, y_max]`.
    pub window: Option<[f64; 4]>,
    /// Pull each step back onto the zero set of [`separatrix_residual`].
    pub project: bool,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            offset: 1e-6,
            step: 1e-3,
            budget: 20.0,
            window: None,
            project: true,
        }
    }
}

/// Both branches of the stable manifold of the coexistence saddle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparatrixTrace {
    pub saddle: [f64; 2],
    /// Unit stable eigenvector used for the offset.
    pub direction: [f64; 2],
    /// Points moving away from the saddle, first point at `saddle ± offset · direction`.
    pub branches: [Vec<[f64; 2]>; 2],
    /// Set when a branch stopped early at a stagnation point, within one step
    /// of the origin, or on a non-finite value.
    pub truncated: bool,
}

impl SeparatrixTrace {
    /// Single curve: the first branch reversed, the saddle, then the second.
    pub fn polyline(&self) -> Vec<[f64; 2]> {
        let mut out: Vec<[f64; 2]> = self.branches[0].iter().rev().copied().collect();
        out.push(self.saddle);
        out.extend_from_slice(&self.branches[1]);
        out
    }
}

/// Traces with the default offset and step.
pub fn separatrix_trace(params: &LotkaParams, budget: f64, step: f64) -> Result<SeparatrixTrace> {
    separatrix_trace_with(
        params,
        &TraceOptions {
            budget,
            step,
            ..TraceOptions::default()
        },
    )
}

/// Integrates the backward flow, normalised to unit speed so that vertical
/// tangencies pose no problem, from both sides of the saddle.
///
/// Far along the branch approaching `y2 = 0` the residual becomes very
/// sensitive to position, so plain RK4 drifts off the level set; with
/// `project` set every accepted step is corrected back onto it.
pub fn separatrix_trace_with(
    params: &LotkaParams,
    options: &TraceOptions,
) -> Result<SeparatrixTrace> {
    let TraceOptions {
        offset,
        step,
        budget,
        window,
        project: projecting,
    } = *options;
    if !(step > 0.0 && step.is_finite()) || !(offset > 0.0 && offset.is_finite()) {
        return Err(Error::Input(format!(
            "step ({step}) and offset ({offset}) must be positive"
        )));
    }
    if !(budget >= 0.0 && budget.is_finite()) {
        return Err(Error::Input(format!(
            "budget must be finite and >= 0, got {budget}"
        )));
    }
    let LotkaParams { a, c, .. } = *params;
    if !(a * c < 0.0) {
        return Err(Error::Unsupported(format!(
            "coexistence point is not a saddle (a c = {})",
            a * c
        )));
    }
    let saddle = params.equilibria()[1];
    // the Jacobian there is [[0, -c], [a, 0]]; (c, mu) spans the -mu eigenspace
    let mu = (-a * c).sqrt();
    let norm = c.hypot(mu);
    let direction = [c / norm, mu / norm];

    // the axes are invariant, so the manifold never leaves the saddle's open quadrant
    let same_quadrant = |p: [f64; 2]| p[0] * saddle[0] > 0.0 && p[1] * saddle[1] > 0.0;
    let inside = |p: [f64; 2]| match window {
        Some([x0, x1, y0, y1]) => p[0] >= x0 && p[0] <= x1 && p[1] >= y0 && p[1] <= y1,
        None => true,
    };
    let field = |p: [f64; 2]| -> Option<[f64; 2]> {
        let f = params.rhs(p);
        let n = f[0].hypot(f[1]);
        let scale = 1.0 + p[0].abs() + p[1].abs();
        if !n.is_finite() || n <= 1e-14 * scale * scale {
            return None;
        }
        Some([-f[0] / n, -f[1] / n])
    };

    let mut truncated = false;
    let mut branches: [Vec<[f64; 2]>; 2] = [Vec::new(), Vec::new()];
    if budget > 0.0 {
        for (branch, sign) in branches.iter_mut().zip([-1.0, 1.0]) {
            let mut p = [
                saddle[0] + sign * offset * direction[0],
                saddle[1] + sign * offset * direction[1],
            ];
            if !inside(p) {
                continue;
            }
            branch.push(p);
            let mut travelled = 0.0;
            while travelled < budget {
                let ds = step.min(budget - travelled);
                match rk4(&field, p, ds) {
                    Some(next) if same_quadrant(next) => {
                        let next = if projecting {
                            project(params, next)
                        } else {
                            next
                        };
                        // a branch running into the origin node ends there
                        if !same_quadrant(next) || next[0].hypot(next[1]) < step {
                            truncated = true;
                            break;
                        }
                        if !inside(next) {
                            break;
                        }
                        p = next;
                        branch.push(p);
                        travelled += ds;
                    }
                    _ => {
                        truncated = true;
                        break;
                    }
                }
            }
        }
    }
    Ok(SeparatrixTrace {
        saddle,
        direction,
        branches,
        truncated,
    })
}

fn rk4(field: &impl Fn([f64; 2]) -> Option<[f64; 2]>, p: [f64; 2], h: f64) -> Option<[f64; 2]> {
    let at = |k: [f64; 2], s: f64| [p[0] + s * k[0], p[1] + s * k[1]];
    let k1 = field(p)?;
    let k2 = field(at(k1, h / 2.0))?;
    let k3 = field(at(k2, h / 2.0))?;
    let k4 = field(at(k3, h))?;
    Some([
        p[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        p[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ])
}

/// `n` points spread evenly by index over `points`, endpoints included.
pub fn decimate(points: &[[f64; 2]], n: usize) -> Vec<[f64; 2]> {
    if points.len() <= n || n == 0 {
        return points.to_vec();
    }
    if n == 1 {
        return vec![points[0]];
    }
    let last = points.len() - 1;
    (0..n)
        .map(|k| points[(k * last + (n - 1) / 2) / (n - 1)])
        .collect()
}
