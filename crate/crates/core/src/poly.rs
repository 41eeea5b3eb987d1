//! Real polynomials and a simultaneous (Aberth-Ehrlich) root finder.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Roots must satisfy `|p(z)| / (1 + |z|^d) <= ROOT_RESIDUAL_BOUND`.
pub const ROOT_RESIDUAL_BOUND: f64 = 1e-8;

const MAX_ITERATIONS: usize = 1000;

/// A real polynomial stored by ascending powers: `coeffs[k]` multiplies `x^k`.
///
/// Trailing zero coefficients are trimmed, so the last entry is the leading
/// coefficient (except for the zero polynomial, stored as `[0.0]`).
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `x^k`
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = 1.0;
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        if self.degree() == 0 {
            return Self::constant(0.0);
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    /// `|p(z)| / (1 + |z|^d)`, the scale-free residual used to accept roots.
    pub fn normalized_residual(&self, z: Complex64) -> f64 {
        self.eval_complex(z).norm() / (1.0 + z.norm().powi(self.degree() as i32))
    }

    /// All complex roots, repeated according to multiplicity.
    ///
    /// Exact zero roots are split off first; the rest are found with the
    /// Aberth-Ehrlich iteration and checked against
    /// [`ROOT_RESIDUAL_BOUND`].
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        if self.degree() == 0 {
            return Err(Error::Input("a constant polynomial has no roots".into()));
        }
        if self.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Input(
                "polynomial coefficients must be finite".into(),
            ));
        }
        let zeros = self.coeffs.iter().take_while(|&&c| c == 0.0).count();
        let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
        let reduced = Polynomial::new(self.coeffs[zeros..].to_vec());
        if reduced.degree() > 0 {
            roots.extend(aberth(&reduced)?);
        }
        for z in &roots {
            let r = self.normalized_residual(*z);
            if !(r <= ROOT_RESIDUAL_BOUND) {
                return Err(Error::Numeric(format!(
                    "root {z} has residual {r:e} above {ROOT_RESIDUAL_BOUND:e}"
                )));
            }
        }
        Ok(roots)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0.0 && self.degree() > 0 {
                continue;
            }
            let sign = if c < 0.0 { "-" } else { "+" };
            if first {
                if c < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let m = c.abs();
            match k {
                0 => write!(f, "{m}")?,
                _ if m != 1.0 => write!(f, "{m}")?,
                _ => {}
            }
            match k {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{k}")?,
            }
        }
        Ok(())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs().len().max(rhs.coeffs().len());
        Polynomial::new(
            (0..n)
                .map(|k| {
                    self.coeffs().get(k).copied().unwrap_or(0.0)
                        + rhs.coeffs().get(k).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let out = (0..n)
            .map(|k| {
                self.coeffs.get(k).copied().unwrap_or(0.0)
                    - rhs.coeffs.get(k).copied().unwrap_or(0.0)
            })
            .collect();
        Polynomial::new(out)
    }
}

/// Newton correction `p(z) / p'(z)`, evaluated on the reversed polynomial when
/// `|z| > 1` so that high degrees do not overflow.
fn newton_ratio(p: &[f64], z: Complex64) -> Complex64 {
    let d = p.len() - 1;
    if z.norm() <= 1.0 {
        let mut val = Complex64::new(0.0, 0.0);
        let mut der = Complex64::new(0.0, 0.0);
        for &c in p.iter().rev() {
            der = der * z + val;
            val = val * z + c;
        }
        val / der
    } else {
        // p(z) = z^d q(w), w = 1/z, q(w) = sum c_k w^(d-k)
        let w = z.inv();
        let mut val = Complex64::new(0.0, 0.0);
        let mut der = Complex64::new(0.0, 0.0);
        for &c in p.iter() {
            der = der * w + val;
            val = val * w + c;
        }
        // p/p' = z q / (d q - w q')
        z * val / (val * d as f64 - w * der)
    }
}

fn aberth(poly: &Polynomial) -> Result<Vec<Complex64>> {
    let lead = poly.leading();
    let p: Vec<f64> = poly.coeffs().iter().map(|c| c / lead).collect();
    let d = p.len() - 1;
    if d == 1 {
        return Ok(vec![Complex64::new(-p[0], 0.0)]);
    }

    // start on a circle whose radius is the geometric mean of root moduli,
    // rotated off the real axis to break conjugate symmetry
    let radius = p[0].abs().powf(1.0 / d as f64).max(1e-3);
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / d as f64 + 0.4))
        .collect();
    let mut done = vec![false; d];

    for _ in 0..MAX_ITERATIONS {
        let mut all_done = true;
        for i in 0..d {
            if done[i] {
                continue;
            }
            let ratio = newton_ratio(&p, z[i]);
            if !ratio.is_finite() {
                // landed on a critical point; nudge and retry next sweep
                z[i] *= Complex64::from_polar(1.0 + 1e-7, 1e-3);
                all_done = false;
                continue;
            }
            let repulsion: Complex64 = (0..d)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            let step = if step.is_finite() { step } else { ratio };
            z[i] -= step;
            if step.norm() <= 4.0 * f64::EPSILON * z[i].norm().max(f64::MIN_POSITIVE) {
                done[i] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            break;
        }
    }

    // roots of a real polynomial: snap near-real roots onto the axis
    for zi in z.iter_mut() {
        if zi.im.abs() <= 1e-14 * zi.norm() {
            zi.im = 0.0;
        }
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("root iteration diverged".into()));
    }
    Ok(z)
}
