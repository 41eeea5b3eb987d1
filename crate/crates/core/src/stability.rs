//! Sector-of-stability test for incommensurate fractional linear systems and
//! its application to equilibria of nonlinear systems.
//!
//! For orders `alpha_i = v_i/u_i` with common denominator `M`, the linear
//! system `D^{alpha_i} x_i = sum_j J_ij x_j` is asymptotically stable exactly
//! when every root of
//!
//! ```text
//! det(diag(λ^{M alpha_1}, ..., λ^{M alpha_n}) - J) = 0
//! ```
//!
//! satisfies `|arg λ| > π/(2M)`. An equilibrium of a nonlinear system is
//! classified by applying the same test to its Jacobian.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::rational::{common_multiple, RationalOrder};

/// Default half-width of the band around the sector boundary reported as
/// [`Verdict::Marginal`].
pub const DEFAULT_TOL_BAND: f64 = 1e-8;
/// Largest system handled by the cofactor expansion.
pub const MAX_DIMENSION: usize = 8;
/// Maximum `max_i |f_i(x*)|` for a point to count as an equilibrium.
pub const EQUILIBRIUM_TOLERANCE: f64 = 1e-8;
/// Step of the central-difference Jacobian fallback.
pub const FD_STEP: f64 = 1e-6;

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "Vec<Vec<f64>>")]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Input("matrix must be square and non-empty".into()));
        }
        Ok(Self {
            n,
            data: rows.concat(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl From<Matrix> for Vec<Vec<f64>> {
    fn from(m: Matrix) -> Self {
        m.rows()
    }
}

/// An autonomous vector field `x -> f(x)`.
pub trait VectorField {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64], out: &mut [f64]);

    /// Analytic Jacobian, if the model has one.
    fn jacobian(&self, _x: &[f64]) -> Option<Matrix> {
        None
    }
}

/// Adapts a closure into a [`VectorField`] without an analytic Jacobian.
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64], &mut [f64])> FnField<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64], &mut [f64])> VectorField for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        (self.f)(x, out)
    }
}

/// Central-difference Jacobian with step `step * max(1, |x_j|)`.
pub fn finite_difference_jacobian<V: VectorField + ?Sized>(
    field: &V,
    x: &[f64],
    step: f64,
) -> Matrix {
    let n = field.dim();
    let mut jac = Matrix::zeros(n);
    let mut xp = x.to_vec();
    let mut fp = vec![0.0; n];
    let mut fm = vec![0.0; n];
    for j in 0..n {
        let hj = step * x[j].abs().max(1.0);
        xp[j] = x[j] + hj;
        field.eval(&xp, &mut fp);
        xp[j] = x[j] - hj;
        field.eval(&xp, &mut fm);
        xp[j] = x[j];
        for i in 0..n {
            jac.set(i, j, (fp[i] - fm[i]) / (2.0 * hj));
        }
    }
    jac
}

/// Linear system data for the sector test: the Jacobian, the diagonal
/// exponents `e_i = M v_i / u_i`, and `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorProblem {
    jacobian: Matrix,
    exponents: Vec<u64>,
    m: u64,
}

impl SectorProblem {
    pub fn new(jacobian: Matrix, orders: &[RationalOrder]) -> Result<Self> {
        if jacobian.dim() != orders.len() {
            return Err(Error::Input(format!(
                "{}x{} Jacobian with {} orders",
                jacobian.dim(),
                jacobian.dim(),
                orders.len()
            )));
        }
        if jacobian.dim() > MAX_DIMENSION {
            return Err(Error::Input(format!(
                "dimension {} exceeds the supported maximum of {MAX_DIMENSION}",
                jacobian.dim()
            )));
        }
        let m = common_multiple(orders)?;
        let exponents = orders.iter().map(|o| m / o.u() * o.v()).collect();
        Ok(Self {
            jacobian,
            exponents,
            m,
        })
    }

    /// Same problem with every fraction written as `(k v_i)/(k u_i)`: the
    /// common multiple and all exponents are multiplied by `k`.
    pub fn scaled(&self, k: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::Input("scale factor must be positive".into()));
        }
        Ok(Self {
            jacobian: self.jacobian.clone(),
            exponents: self.exponents.iter().map(|e| e * k).collect(),
            m: self.m * k,
        })
    }

    pub fn jacobian(&self) -> &Matrix {
        &self.jacobian
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn sector_half_angle(&self) -> f64 {
        PI / (2.0 * self.m as f64)
    }
}

/// `det(diag(λ^{e_i}) - J)`, monic of degree `sum e_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicPolynomial(Polynomial);

impl CharacteristicPolynomial {
    pub fn polynomial(&self) -> &Polynomial {
        &self.0
    }

    /// Ascending coefficients.
    pub fn coeffs(&self) -> &[f64] {
        self.0.coeffs()
    }

    pub fn degree(&self) -> usize {
        self.0.degree()
    }
}

/// Expands the determinant by cofactors, memoising minors over column
/// subsets (rows are consumed top to bottom).
pub fn characteristic_polynomial(problem: &SectorProblem) -> CharacteristicPolynomial {
    let n = problem.jacobian.dim();
    let entry = |i: usize, j: usize| -> Polynomial {
        let c = Polynomial::constant(-problem.jacobian.get(i, j));
        if i == j {
            &Polynomial::monomial(problem.exponents[i] as usize) + &c
        } else {
            c
        }
    };
    let entries: Vec<Vec<Polynomial>> = (0..n)
        .map(|i| (0..n).map(|j| entry(i, j)).collect())
        .collect();

    // minors[mask] = det of rows 0..popcount(mask) restricted to columns in mask
    let mut minors: Vec<Option<Polynomial>> = vec![None; 1 << n];
    minors[0] = Some(Polynomial::constant(1.0));
    let mut masks: Vec<usize> = (1..1usize << n).collect();
    masks.sort_by_key(|m| m.count_ones());
    for mask in masks {
        let row = mask.count_ones() as usize - 1;
        let mut acc = Polynomial::constant(0.0);
        for (pos, col) in (0..n).filter(|c| mask & (1 << c) != 0).enumerate() {
            let e = &entries[row][col];
            if e.is_zero() {
                continue;
            }
            let minor = minors[mask & !(1 << col)]
                .as_ref()
                .expect("smaller minors first");
            let term = e * minor;
            acc = if (row + pos).is_multiple_of(2) {
                &acc + &term
            } else {
                &acc - &term
            };
        }
        minors[mask] = Some(acc);
    }
    let det = minors[(1 << n) - 1].take().expect("full minor computed");
    CharacteristicPolynomial(det)
}

/// All roots of the characteristic polynomial with multiplicity.
pub fn polynomial_roots(poly: &CharacteristicPolynomial) -> Result<Vec<Complex64>> {
    poly.0.roots()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Stable,
    Unstable,
    /// Within the tolerance band of the sector boundary, or a zero root.
    Marginal,
}

/// A root with its principal argument magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootInfo {
    pub re: f64,
    pub im: f64,
    /// `|arg λ|` in `[0, π]`; zero roots report 0.
    pub abs_arg: f64,
}

impl RootInfo {
    fn new(z: Complex64) -> Self {
        Self {
            re: z.re,
            im: z.im,
            abs_arg: if z.norm() == 0.0 {
                0.0
            } else {
                z.im.atan2(z.re).abs()
            },
        }
    }

    pub fn complex(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Outcome of the sector test on a set of roots.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub m: u64,
    pub sector_half_angle: f64,
    pub roots: Vec<RootInfo>,
    /// Number of roots at λ = 0 (singular Jacobian); they leave the test
    /// inconclusive and are not considered when picking the witness.
    pub zero_roots: usize,
    /// Non-zero root with the smallest `|arg λ|`.
    pub witness: RootInfo,
    pub verdict: Verdict,
}

impl StabilityReport {
    /// `witness.abs_arg - π/(2M)`: positive inside the sector of stability.
    pub fn margin(&self) -> f64 {
        self.witness.abs_arg - self.sector_half_angle
    }
}

/// Applies `|arg λ| > π/(2M)` to every root.
///
/// Stable when the smallest non-zero `|arg λ|` clears the boundary by more
/// than `tol_band`, Unstable when it falls short by more than `tol_band`,
/// Marginal otherwise. Zero roots downgrade Stable to Marginal.
pub fn classify_sector(roots: &[Complex64], m: u64, tol_band: f64) -> Result<StabilityReport> {
    if roots.is_empty() {
        return Err(Error::Input("no roots to classify".into()));
    }
    if m == 0 {
        return Err(Error::Input("common multiple must be positive".into()));
    }
    let tol_band = tol_band.max(0.0);
    let infos: Vec<RootInfo> = roots.iter().map(|&z| RootInfo::new(z)).collect();
    let zero_roots = roots.iter().filter(|z| z.norm() == 0.0).count();
    let half_angle = PI / (2.0 * m as f64);
    let witness = infos
        .iter()
        .zip(roots)
        .filter(|(_, z)| z.norm() != 0.0 || zero_roots == roots.len())
        .map(|(i, _)| *i)
        .min_by(|a, b| a.abs_arg.total_cmp(&b.abs_arg))
        .expect("non-empty");
    let mut verdict = if zero_roots == roots.len() {
        Verdict::Marginal
    } else if witness.abs_arg > half_angle + tol_band {
        Verdict::Stable
    } else if witness.abs_arg < half_angle - tol_band {
        Verdict::Unstable
    } else {
        Verdict::Marginal
    };
    if zero_roots > 0 && verdict == Verdict::Stable {
        verdict = Verdict::Marginal;
    }
    Ok(StabilityReport {
        m,
        sector_half_angle: half_angle,
        roots: infos,
        zero_roots,
        witness,
        verdict,
    })
}

/// Full sector test of a linear problem.
pub fn analyze_sector(problem: &SectorProblem, tol_band: f64) -> Result<StabilityReport> {
    let poly = characteristic_polynomial(problem);
    let roots = polynomial_roots(&poly)?;
    classify_sector(&roots, problem.m, tol_band)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianSource {
    Analytic,
    FiniteDifference,
}

/// Linearisation and sector test at one equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub point: Vec<f64>,
    pub jacobian: Matrix,
    pub jacobian_source: JacobianSource,
    pub orders: Vec<RationalOrder>,
    pub exponents: Vec<u64>,
    /// Ascending coefficients of the characteristic polynomial.
    pub polynomial: Vec<f64>,
    pub stability: StabilityReport,
}

impl EquilibriumReport {
    pub fn verdict(&self) -> Verdict {
        self.stability.verdict
    }
}

/// Classifies `point` as an equilibrium of `field` with the given orders.
///
/// The Jacobian is analytic when the field provides one and a central
/// difference (step [`FD_STEP`]) otherwise.
pub fn analyze_equilibrium<V: VectorField + ?Sized>(
    field: &V,
    point: &[f64],
    orders: &[RationalOrder],
) -> Result<EquilibriumReport> {
    analyze_equilibrium_with(field, point, orders, DEFAULT_TOL_BAND)
}

pub fn analyze_equilibrium_with<V: VectorField + ?Sized>(
    field: &V,
    point: &[f64],
    orders: &[RationalOrder],
    tol_band: f64,
) -> Result<EquilibriumReport> {
    let n = field.dim();
    if point.len() != n || orders.len() != n {
        return Err(Error::Input(format!(
            "field of dimension {n} with a {}-point and {} orders",
            point.len(),
            orders.len()
        )));
    }
    if let Some(o) = orders.iter().find(|o| o.v() > o.u()) {
        return Err(Error::Domain(format!(
            "order {o} exceeds 1; lift the system first"
        )));
    }
    let mut f = vec![0.0; n];
    field.eval(point, &mut f);
    let residual = f.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if !(residual <= EQUILIBRIUM_TOLERANCE) {
        return Err(Error::NotEquilibrium {
            residual,
            tolerance: EQUILIBRIUM_TOLERANCE,
        });
    }
    let (jacobian, jacobian_source) = match field.jacobian(point) {
        Some(j) => (j, JacobianSource::Analytic),
        None => (
            finite_difference_jacobian(field, point, FD_STEP),
            JacobianSource::FiniteDifference,
        ),
    };
    let problem = SectorProblem::new(jacobian, orders)?;
    let poly = characteristic_polynomial(&problem);
    let roots = polynomial_roots(&poly)?;
    let stability = classify_sector(&roots, problem.m, tol_band)?;
    Ok(EquilibriumReport {
        point: point.to_vec(),
        jacobian: problem.jacobian,
        jacobian_source,
        orders: orders.to_vec(),
        exponents: problem.exponents,
        polynomial: poly.coeffs().to_vec(),
        stability,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: u64, u: u64) -> RationalOrder {
        RationalOrder::new(v, u).unwrap()
    }

    fn m(rows: &[[f64; 2]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn diagonal_minus_one() {
        let p = SectorProblem::new(m(&[[-1.0, 0.0], [0.0, -1.0]]), &[r(1, 1), r(1, 1)]).unwrap();
        assert_eq!(characteristic_polynomial(&p).coeffs(), &[1.0, 2.0, 1.0]);
    }

    #[test]
    fn diagonal_jacobian_factorises() {
        // orders 9/10 and 4/5 give exponents (9, 8) with M = 10
        let p = SectorProblem::new(m(&[[-1.0, 0.0], [0.0, -1.0]]), &[r(9, 10), r(4, 5)]).unwrap();
        assert_eq!(p.exponents(), &[9, 8]);
        assert_eq!(p.m(), 10);
        let c = characteristic_polynomial(&p);
        // (x^9 + 1)(x^8 + 1) = x^17 + x^9 + x^8 + 1
        let mut want = vec![0.0; 18];
        for k in [0, 8, 9, 17] {
            want[k] = 1.0;
        }
        assert_eq!(c.coeffs(), want.as_slice());
        assert_eq!(c.degree(), 17);
    }

    #[test]
    fn anti_diagonal_jacobian() {
        let p = SectorProblem::new(m(&[[0.0, -1.0], [1.0, 0.0]]), &[r(9, 10), r(4, 5)]).unwrap();
        let c = characteristic_polynomial(&p);
        let mut want = vec![0.0; 18];
        want[0] = 1.0;
        want[17] = 1.0;
        assert_eq!(c.coeffs(), want.as_slice());
    }

    #[test]
    fn dimension_mismatch() {
        let e = SectorProblem::new(m(&[[0.0, 1.0], [1.0, 0.0]]), &[r(1, 2)]);
        assert!(matches!(e, Err(Error::Input(_))));
    }

    #[test]
    fn determinant_matches_leibniz_on_3x3() {
        // at λ = 2 with exponents (1, 2, 1): diag(2, 4, 2) - J
        let rows = vec![
            vec![0.5, -1.0, 2.0],
            vec![3.0, -0.25, 1.0],
            vec![-2.0, 0.75, 1.5],
        ];
        let j = Matrix::from_rows(&rows).unwrap();
        let p = SectorProblem::new(j, &[r(1, 2), r(1, 1), r(1, 2)]).unwrap();
        assert_eq!(p.exponents(), &[1, 2, 1]);
        let c = characteristic_polynomial(&p);
        let x = 2.0;
        let a = [
            [x - 0.5, 1.0, -2.0],
            [-3.0, x * x + 0.25, -1.0],
            [2.0, -0.75, x - 1.5],
        ];
        let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
        assert!((c.polynomial().eval(x) - det).abs() < 1e-12);
        assert_eq!(c.degree(), 4);
        assert_eq!(*c.coeffs().last().unwrap(), 1.0);
    }

    #[test]
    fn classify_examples() {
        let neg = [Complex64::new(-1.0, 0.0); 2];
        assert_eq!(
            classify_sector(&neg, 1, DEFAULT_TOL_BAND).unwrap().verdict,
            Verdict::Stable
        );

        let mut c = vec![0.0; 18];
        c[0] = 1.0;
        c[17] = 1.0;
        let roots = Polynomial::new(c).roots().unwrap();
        let rep = classify_sector(&roots, 10, DEFAULT_TOL_BAND).unwrap();
        assert_eq!(rep.verdict, Verdict::Stable);
        assert!((rep.witness.abs_arg - PI / 17.0).abs() < 1e-12);
        assert!((rep.sector_half_angle - PI / 20.0).abs() < 1e-15);

        let with_one = [Complex64::new(-2.0, 1.0), Complex64::new(1.0, 0.0)];
        for m in [1, 4, 100] {
            let rep = classify_sector(&with_one, m, DEFAULT_TOL_BAND).unwrap();
            assert_eq!(rep.verdict, Verdict::Unstable);
            assert_eq!(rep.witness.complex(), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn boundary_roots_are_marginal() {
        // ±i with M = 1 sits exactly on the boundary π/2
        let roots = [Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)];
        assert_eq!(
            classify_sector(&roots, 1, DEFAULT_TOL_BAND)
                .unwrap()
                .verdict,
            Verdict::Marginal
        );
        let zero = [Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0)];
        let rep = classify_sector(&zero, 1, DEFAULT_TOL_BAND).unwrap();
        assert_eq!(rep.verdict, Verdict::Marginal);
        assert_eq!(rep.zero_roots, 1);
        assert_eq!(rep.witness.re, -1.0);
        assert!(classify_sector(&[], 1, 0.0).is_err());
    }

    #[test]
    fn finite_difference_jacobian_of_quadratic_field() {
        let field = FnField::new(2, |x: &[f64], o: &mut [f64]| {
            o[0] = x[0] * x[1] + 3.0 * x[0];
            o[1] = x[0] * x[0] - x[1];
        });
        let j = finite_difference_jacobian(&field, &[2.0, -1.0], FD_STEP);
        let want = m(&[[2.0, 2.0], [4.0, -1.0]]);
        assert!(j.max_abs_diff(&want) < 1e-8);
    }

    #[test]
    fn non_equilibrium_is_rejected_with_residual() {
        let field = FnField::new(1, |x: &[f64], o: &mut [f64]| o[0] = x[0] - 1.0);
        match analyze_equilibrium(&field, &[0.5], &[r(1, 2)]) {
            Err(Error::NotEquilibrium { residual, .. }) => assert_eq!(residual, 0.5),
            other => panic!("unexpected {other:?}"),
        }
        let rep = analyze_equilibrium(&field, &[1.0], &[r(1, 2)]).unwrap();
        assert_eq!(rep.verdict(), Verdict::Unstable);
        assert_eq!(rep.jacobian_source, JacobianSource::FiniteDifference);
        assert!(matches!(
            analyze_equilibrium(&field, &[1.0], &[r(3, 2)]),
            Err(Error::Domain(_))
        ));
    }
}
