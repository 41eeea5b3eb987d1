use serde::Serialize;

use super::LotkaParams;
use crate::error::{Error, Result};
use crate::rational::RationalOrder;
use crate::stability::{Matrix, VectorField};

/// Four-state rewrite of a system with both orders in (1, 2).
///
/// With `y3 = y1'` and `y4 = y2'` the state is ordered `(y3, y4, y1, y2)`:
///
/// ```text
/// D^(alpha-1) y3 = y1 (a - b y2)
/// D^(beta-1)  y4 = y2 (-c + b y1)
/// y1' = y3
/// y2' = y4
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LiftedSystem {
    pub params: LotkaParams,
    alpha1: RationalOrder,
    beta1: RationalOrder,
}

impl LiftedSystem {
    pub fn new(params: LotkaParams, alpha: RationalOrder, beta: RationalOrder) -> Result<Self> {
        for (name, o) in [("alpha", alpha), ("beta", beta)] {
            if !(o.v() > o.u() && o.v() < 2 * o.u()) {
                return Err(Error::Domain(format!(
                    "{name} = {o} must lie in (1, 2) to lift"
                )));
            }
        }
        Ok(Self {
            params,
            alpha1: alpha.minus_one()?,
            beta1: beta.minus_one()?,
        })
    }

    /// `(alpha - 1, beta - 1, 1, 1)`.
    pub fn orders(&self) -> [RationalOrder; 4] {
        let one = RationalOrder::new(1, 1).expect("1/1 is a valid order");
        [self.alpha1, self.beta1, one, one]
    }

    /// `(0, 0, 0, 0)` and `(0, 0, c/b, a/b)`.
    pub fn equilibria(&self) -> [[f64; 4]; 2] {
        let [_, [e1, e2]] = self.params.equilibria();
        [[0.0; 4], [0.0, 0.0, e1, e2]]
    }
}

impl VectorField for LiftedSystem {
    fn dim(&self) -> usize {
        4
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        let [f1, f2] = self.params.rhs([x[2], x[3]]);
        out[0] = f1;
        out[1] = f2;
        out[2] = x[0];
        out[3] = x[1];
    }

    fn jacobian(&self, x: &[f64]) -> Option<Matrix> {
        let inner = self.params.jacobian([x[2], x[3]]);
        let mut j = Matrix::zeros(4);
        for r in 0..2 {
            for c in 0..2 {
                j.set(r, c + 2, inner.get(r, c));
            }
        }
        j.set(2, 0, 1.0);
        j.set(3, 1, 1.0);
        Some(j)
    }
}
