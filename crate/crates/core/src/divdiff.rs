//! Divided differences [x_0, ..., x_m] f over real knots, with coalescent
//! knots handled by the confluent (Hermite) Newton table.

use thiserror::Error;

use crate::polys::ChebSeries;
use crate::torus::TorusPoint;

/// Knots closer than this are merged into a single knot of higher multiplicity.
pub const COALESCENCE_TOL: f64 = 1e-9;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum DivDiffError {
    #[error("knot vector is empty")]
    EmptyKnots,

    #[error("knot {0} is not finite")]
    NonFiniteKnot(f64),

    #[error("knot {knot} has multiplicity {multiplicity} but the function only provides derivatives up to order {available}")]
    InsufficientSmoothness {
        knot: f64,
        multiplicity: usize,
        available: usize,
    },
}

/// Ascending knots with repeats; near-equal knots are snapped together.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    knots: Vec<f64>,
}

impl KnotVector {
    pub fn new(raw: &[f64]) -> Result<Self, DivDiffError> {
        Self::with_tolerance(raw, COALESCENCE_TOL)
    }

    /// Knots within `tol` of the first knot of their cluster are set equal to it.
    /// `tol = 0` keeps only exact repeats.
    pub fn with_tolerance(raw: &[f64], tol: f64) -> Result<Self, DivDiffError> {
        if raw.is_empty() {
            return Err(DivDiffError::EmptyKnots);
        }
        if let Some(&bad) = raw.iter().find(|x| !x.is_finite()) {
            return Err(DivDiffError::NonFiniteKnot(bad));
        }
        let mut knots = raw.to_vec();
        knots.sort_by(f64::total_cmp);
        let mut anchor = knots[0];
        for k in knots.iter_mut().skip(1) {
            if *k - anchor <= tol {
                *k = anchor;
            } else {
                anchor = *k;
            }
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// m for knots x_0, ..., x_m.
    pub fn order(&self) -> usize {
        self.knots.len() - 1
    }

    /// Distinct knots with multiplicities.
    pub fn groups(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &k in &self.knots {
            match out.last_mut() {
                Some((v, mult)) if *v == k => *mult += 1,
                _ => out.push((k, 1)),
            }
        }
        out
    }

    pub fn max_multiplicity(&self) -> usize {
        self.groups().iter().map(|g| g.1).max().unwrap_or(0)
    }

    pub fn is_simple(&self) -> bool {
        self.max_multiplicity() <= 1
    }

    pub fn span(&self) -> f64 {
        self.knots[self.knots.len() - 1] - self.knots[0]
    }
}

/// A function together with derivative oracles up to `max_order()`.
pub trait SmoothFn {
    /// f^(order)(u); only called with `order <= max_order()`.
    fn eval(&self, u: f64, order: usize) -> f64;

    fn max_order(&self) -> usize;

    fn value(&self, u: f64) -> f64 {
        self.eval(u, 0)
    }
}

impl SmoothFn for ChebSeries {
    fn eval(&self, u: f64, order: usize) -> f64 {
        if order == 0 {
            self.eval(u)
        } else if order > self.degree() {
            0.0
        } else {
            self.nth_derivative(order).eval(u)
        }
    }

    fn max_order(&self) -> usize {
        usize::MAX
    }
}

impl<T: SmoothFn + ?Sized> SmoothFn for &T {
    fn eval(&self, u: f64, order: usize) -> f64 {
        (**self).eval(u, order)
    }

    fn max_order(&self) -> usize {
        (**self).max_order()
    }
}

/// Closure-backed oracle: `f(u, j)` returns the j-th derivative.
pub struct DerivativeOracle<F> {
    f: F,
    max_order: usize,
}

impl<F: Fn(f64, usize) -> f64> DerivativeOracle<F> {
    pub fn new(max_order: usize, f: F) -> Self {
        Self { f, max_order }
    }
}

impl<F: Fn(f64, usize) -> f64> SmoothFn for DerivativeOracle<F> {
    fn eval(&self, u: f64, order: usize) -> f64 {
        (self.f)(u, order)
    }

    fn max_order(&self) -> usize {
        self.max_order
    }
}

/// A function known by its values only.
pub struct ValueOnly<F>(pub F);

impl<F: Fn(f64) -> f64> SmoothFn for ValueOnly<F> {
    fn eval(&self, u: f64, _order: usize) -> f64 {
        (self.0)(u)
    }

    fn max_order(&self) -> usize {
        0
    }
}

/// [x_0, ..., x_m] f by the confluent Newton table. Repeated knots of
/// multiplicity mu use f^(j)(x)/j! for j < mu.
pub fn divided_difference<F: SmoothFn + ?Sized>(f: &F, knots: &KnotVector) -> Result<f64, DivDiffError> {
    for (knot, multiplicity) in knots.groups() {
        if multiplicity - 1 > f.max_order() {
            return Err(DivDiffError::InsufficientSmoothness {
                knot,
                multiplicity,
                available: f.max_order(),
            });
        }
    }
    let z = knots.knots();
    let m = z.len() - 1;
    let mut col: Vec<f64> = z.iter().map(|&x| f.eval(x, 0)).collect();
    let mut factorial = 1.0;
    for j in 1..=m {
        factorial *= j as f64;
        for i in 0..=(m - j) {
            col[i] = if z[i + j] == z[i] {
                f.eval(z[i], j) / factorial
            } else {
                (col[i + 1] - col[i]) / (z[i + j] - z[i])
            };
        }
    }
    Ok(col[0])
}

/// [cos theta_1, ..., cos theta_d] f.
pub fn divided_difference_cos<F: SmoothFn + ?Sized>(f: &F, theta: &TorusPoint) -> Result<f64, DivDiffError> {
    divided_difference(f, &KnotVector::new(&theta.cosines())?)
}
