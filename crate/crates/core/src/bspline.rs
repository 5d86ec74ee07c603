//! The B-spline M_m(u | x_0, ..., x_m) = [x_0, ..., x_m] (. - u)_+^{m-1} / (m-1)!,
//! normalized so that its integral is 1/m!.

use thiserror::Error;

use crate::divdiff::{divided_difference, DivDiffError, KnotVector, SmoothFn};
use crate::special::factorial;
use crate::torus::TorusPoint;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum BsplineError {
    #[error("B-spline order must be at least 1, got {0}")]
    InvalidOrder(usize),

    #[error("order {order} needs {expected} knots, got {got}")]
    KnotCount { order: usize, expected: usize, got: usize },

    #[error("all knots coincide at {0}; the B-spline is a point mass, not a function")]
    Degenerate(f64),

    #[error("coincident knots {0} give the order-1 spline a pole")]
    Pole(f64),

    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(usize),

    #[error(transparent)]
    DivDiff(#[from] DivDiffError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BsplineSpec {
    order: usize,
    knots: KnotVector,
}

impl BsplineSpec {
    pub fn new(order: usize, knots: KnotVector) -> Result<Self, BsplineError> {
        if order == 0 {
            return Err(BsplineError::InvalidOrder(order));
        }
        if knots.knots().len() != order + 1 {
            return Err(BsplineError::KnotCount {
                order,
                expected: order + 1,
                got: knots.knots().len(),
            });
        }
        if knots.span() == 0.0 {
            return Err(BsplineError::Degenerate(knots.knots()[0]));
        }
        Ok(Self { order, knots })
    }

    /// Order inferred from the number of knots.
    pub fn from_knots(raw: &[f64]) -> Result<Self, BsplineError> {
        let knots = KnotVector::new(raw)?;
        Self::new(knots.order(), knots)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn knots(&self) -> &KnotVector {
        &self.knots
    }

    /// Support [x_0, x_m].
    pub fn support(&self) -> (f64, f64) {
        let k = self.knots.knots();
        (k[0], k[k.len() - 1])
    }
}

/// M_m(u | knots) by the two-term recurrence on the sorted knots.
pub fn bspline_eval(spec: &BsplineSpec, u: f64) -> f64 {
    let x = spec.knots.knots();
    let m = spec.order;
    let (lo, hi) = spec.support();
    if u < lo || u >= hi {
        return 0.0;
    }
    // order 1, right-continuous indicators
    let mut level: Vec<f64> = x
        .windows(2)
        .map(|w| {
            if w[0] <= u && u < w[1] {
                1.0 / (w[1] - w[0])
            } else {
                0.0
            }
        })
        .collect();
    for k in 2..=m {
        let scale = 1.0 / (k - 1) as f64;
        level = (0..=(m - k))
            .map(|i| {
                let width = x[i + k] - x[i];
                if width == 0.0 {
                    return 0.0;
                }
                scale * ((u - x[i]) * level[i] + (x[i + k] - u) * level[i + 1]) / width
            })
            .collect();
    }
    level[0]
}

/// (x - u)_+^{p} / p! as a function of x, with derivatives down to the step function.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedPower {
    pub u: f64,
    pub power: usize,
}

impl SmoothFn for TruncatedPower {
    fn eval(&self, x: f64, order: usize) -> f64 {
        if order > self.power || x <= self.u {
            return 0.0;
        }
        let p = (self.power - order) as i32;
        (x - self.u).powi(p) / factorial(p as usize)
    }

    fn max_order(&self) -> usize {
        self.power
    }
}

/// M_m(u | knots) straight from the divided-difference definition.
/// Loses accuracy quickly as knots cluster; kept as a cross-check.
pub fn bspline_divdiff(spec: &BsplineSpec, u: f64) -> Result<f64, BsplineError> {
    let f = TruncatedPower {
        u,
        power: spec.order - 1,
    };
    Ok(divided_difference(&f, &spec.knots)?)
}

/// M_{d-1}(u | cos theta_1, ..., cos theta_d), zero for |u| >= 1.
pub fn bspline_knot_field(d: usize, u: f64, theta: &TorusPoint) -> Result<f64, BsplineError> {
    if d < 2 {
        return Err(BsplineError::InvalidDimension(d));
    }
    if theta.dim() != d {
        return Err(BsplineError::KnotCount {
            order: d - 1,
            expected: d,
            got: theta.dim(),
        });
    }
    if u.abs() >= 1.0 {
        return Ok(0.0);
    }
    let knots = KnotVector::new(&theta.cosines())?;
    if knots.span() == 0.0 {
        let at = knots.knots()[0];
        return Err(if d == 2 {
            BsplineError::Pole(at)
        } else {
            BsplineError::Degenerate(at)
        });
    }
    Ok(bspline_eval(&BsplineSpec::new(d - 1, knots)?, u))
}
