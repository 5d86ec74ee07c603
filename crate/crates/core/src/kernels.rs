//! The l1-ball kernels on T^d: shells E_n, Dirichlet kernels D_{n,d}, the
//! one-variable functions G_{n,d}, H_{n,d} whose divided differences at
//! cos theta_1, ..., cos theta_d produce them, and the Poisson product.

use num_complex::Complex64;
use thiserror::Error;

use crate::divdiff::{divided_difference_cos, DivDiffError, SmoothFn};
use crate::numerics::{shell_cached, DualRoute, NumericsError};
use crate::polys::{ChebSeries, GegenbauerFamily};
use crate::special::{binomial, factorial};
use crate::torus::TorusPoint;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum KernelError {
    #[error("dimension {d} is not supported here (need d >= {min})")]
    Dimension { d: usize, min: usize },

    #[error("degree {n} is not supported here (need n >= {min})")]
    Degree { n: usize, min: usize },

    #[error("radius must satisfy 0 <= r < 1, got {0}")]
    Radius(f64),

    #[error("point has {got} coordinates, expected {expected}")]
    PointDimension { expected: usize, got: usize },

    #[error("lattice sum left an imaginary residual {0:e}")]
    ImaginaryResidual(f64),

    #[error(transparent)]
    Numerics(#[from] NumericsError),

    #[error(transparent)]
    DivDiff(#[from] DivDiffError),
}

/// Indices (d, n) of a kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelParams {
    pub d: usize,
    pub n: usize,
}

impl KernelParams {
    pub fn new(d: usize, n: usize) -> Result<Self, KernelError> {
        if d == 0 {
            return Err(KernelError::Dimension { d, min: 1 });
        }
        Ok(Self { d, n })
    }

    fn require_dim(&self, min: usize) -> Result<(), KernelError> {
        if self.d < min {
            return Err(KernelError::Dimension { d: self.d, min });
        }
        Ok(())
    }

    fn check_point(&self, theta: &TorusPoint) -> Result<(), KernelError> {
        if theta.dim() != self.d {
            return Err(KernelError::PointDimension {
                expected: self.d,
                got: theta.dim(),
            });
        }
        Ok(())
    }
}

/// (-1)^floor((d-1)/2)
fn parity_sign(d: usize) -> f64 {
    if ((d - 1) / 2).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn check_radius(r: f64) -> Result<(), KernelError> {
    if !(0.0..1.0).contains(&r) {
        return Err(KernelError::Radius(r));
    }
    Ok(())
}

/// G_{n,d}(cos theta) from its trigonometric form, theta in [0, pi].
pub fn g_fn(d: usize, n: usize, theta: f64) -> Result<f64, KernelError> {
    KernelParams::new(d, n)?.require_dim(2)?;
    let half = (n as f64 + 0.5) * theta;
    let osc = if d.is_multiple_of(2) { half.cos() } else { half.sin() };
    Ok(parity_sign(d) * 2.0 * (0.5 * theta).cos() * theta.sin().powi(d as i32 - 2) * osc)
}

/// H_{n,d}(cos theta) from its trigonometric form, theta in [0, pi].
pub fn h_fn(d: usize, n: usize, theta: f64) -> Result<f64, KernelError> {
    KernelParams::new(d, n)?.require_dim(2)?;
    let osc = if d.is_multiple_of(2) {
        -(n as f64 * theta).sin()
    } else {
        (n as f64 * theta).cos()
    };
    Ok(2.0 * parity_sign(d) * theta.sin().powi(d as i32 - 1) * osc)
}

/// sin(theta) sin(k theta) = (T_{|k-1|} - T_{k+1}) / 2 in u = cos theta.
fn sin_times_sin(k: i64) -> ChebSeries {
    (&ChebSeries::t(k - 1) - &ChebSeries::t(k + 1)).scale(0.5)
}

/// G_{n,d} as a polynomial in u = cos theta (n may be -1).
pub fn g_series(d: usize, n: i64) -> Result<ChebSeries, KernelError> {
    KernelParams::new(d, 0)?.require_dim(2)?;
    let s = parity_sign(d);
    let out = if d.is_multiple_of(2) {
        // 2 cos(theta/2) cos((n+1/2) theta) = cos((n+1) theta) + cos(n theta)
        let trig = &ChebSeries::t(n + 1) + &ChebSeries::t(n);
        &ChebSeries::one_minus_square_pow((d - 2) / 2) * &trig
    } else {
        // 2 cos(theta/2) sin((n+1/2) theta) = sin((n+1) theta) + sin(n theta),
        // one sin(theta) borrowed from (sin theta)^{d-2}; sin(-k theta) = -sin(k theta)
        let sgn = |k: i64| if k < 0 { -1.0 } else { 1.0 };
        let trig = &sin_times_sin((n + 1).abs()).scale(sgn(n + 1)) + &sin_times_sin(n.abs()).scale(sgn(n));
        &ChebSeries::one_minus_square_pow((d - 3) / 2) * &trig
    };
    Ok(out.scale(s))
}

/// H_{n,d} as a polynomial in u = cos theta.
pub fn h_series(d: usize, n: usize) -> Result<ChebSeries, KernelError> {
    KernelParams::new(d, n)?.require_dim(2)?;
    let s = parity_sign(d);
    let n = n as i64;
    let out = if d.is_multiple_of(2) {
        (&ChebSeries::one_minus_square_pow((d - 2) / 2) * &sin_times_sin(n)).scale(-2.0 * s)
    } else {
        (&ChebSeries::one_minus_square_pow((d - 1) / 2) * &ChebSeries::t(n)).scale(2.0 * s)
    };
    Ok(out)
}

/// h_{n,d}(u) = (d-1)! sum_j (-1)^j C(d, j) C^d_{n-2j}(u).
pub fn h_poly(d: usize, n: usize, u: f64) -> Result<f64, KernelError> {
    KernelParams::new(d, n)?.require_dim(2)?;
    let family = GegenbauerFamily::new(d as f64).expect("lambda = d is admissible");
    let table = family.table(n, u);
    let mut total = 0.0;
    for j in 0..=d.min(n / 2) {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * binomial(d, j) * table[n - 2 * j];
    }
    Ok(factorial(d - 1) * total)
}

/// h_{n,d}(u) = (d-1)! sum_j (-1)^j C(d-1, j) Z^{d-1}_{n-2j}(u).
pub fn h_poly_z(d: usize, n: usize, u: f64) -> Result<f64, KernelError> {
    KernelParams::new(d, n)?.require_dim(2)?;
    let family = GegenbauerFamily::new((d - 1) as f64).expect("lambda = d - 1 >= 1");
    let mut total = 0.0;
    for j in 0..d.min(n / 2 + 1) {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * binomial(d - 1, j) * family.z((n - 2 * j) as i64, u).expect("lambda > 0");
    }
    Ok(factorial(d - 1) * total)
}

/// [h_{0,d}(u), ..., h_{nmax,d}(u)] from one Gegenbauer table.
pub fn h_poly_table(d: usize, nmax: usize, u: f64) -> Result<Vec<f64>, KernelError> {
    KernelParams::new(d, nmax)?.require_dim(2)?;
    let family = GegenbauerFamily::new(d as f64).expect("lambda = d is admissible");
    let table = family.table(nmax, u);
    let weights: Vec<f64> = (0..=d)
        .map(|j| if j % 2 == 0 { 1.0 } else { -1.0 } * binomial(d, j) * factorial(d - 1))
        .collect();
    Ok((0..=nmax)
        .map(|n| (0..=d.min(n / 2)).map(|j| weights[j] * table[n - 2 * j]).sum())
        .collect())
}

/// Upper bound for sum_{n > k} |h_{n,d}(u)| r^n over |u| <= 1, using
/// |Z^{d-1}_m(u)| <= Z^{d-1}_m(1) termwise in the second form of h.
pub fn h_generating_tail_bound(d: usize, r: f64, k: usize) -> Result<f64, KernelError> {
    KernelParams::new(d, k)?.require_dim(2)?;
    check_radius(r)?;
    let family = GegenbauerFamily::new((d - 1) as f64).expect("lambda = d - 1 >= 1");
    let bound_n = |n: usize| -> f64 {
        let s: f64 = (0..d.min(n / 2 + 1))
            .map(|j| binomial(d - 1, j) * family.z((n - 2 * j) as i64, 1.0).expect("lambda > 0"))
            .sum();
        factorial(d - 1) * s
    };
    let mut total = 0.0;
    let mut n = k + 1;
    loop {
        let term = bound_n(n) * r.powi(n as i32);
        total += term;
        // the bound grows polynomially in n, so terms eventually decrease geometrically
        if term <= 1e-18 * total.max(1e-300) || n > k + 100_000 {
            break;
        }
        n += 1;
    }
    Ok(total)
}

/// E_n(theta) = sum over |alpha|_1 = n of exp(i alpha . theta), by the lattice sum.
pub fn e_fn(d: usize, n: usize, theta: &TorusPoint) -> Result<f64, KernelError> {
    let p = KernelParams::new(d, n)?;
    p.check_point(theta)?;
    let shell = shell_cached(d, n)?;
    let angles = theta.angles();
    let total: Complex64 = shell
        .points()
        .iter()
        .map(|alpha| {
            let phase: f64 = alpha.iter().zip(angles).map(|(&a, t)| a as f64 * t).sum();
            Complex64::from_polar(1.0, phase)
        })
        .sum();
    if total.im.abs() > 1e-12 * (shell.len().max(1) as f64) {
        return Err(KernelError::ImaginaryResidual(total.im));
    }
    Ok(total.re)
}

/// [E_0(theta), ..., E_nmax(theta)] as the coefficients of
/// prod_j (1 + 2 sum_k r^k cos(k theta_j)) truncated at r^nmax.
pub fn e_fn_upto(d: usize, nmax: usize, theta: &TorusPoint) -> Result<Vec<f64>, KernelError> {
    let p = KernelParams::new(d, nmax)?;
    p.check_point(theta)?;
    let mut acc = vec![0.0; nmax + 1];
    acc[0] = 1.0;
    let mut factor = vec![0.0; nmax + 1];
    for &t in theta.angles() {
        factor[0] = 1.0;
        for (k, f) in factor.iter_mut().enumerate().skip(1) {
            *f = 2.0 * (k as f64 * t).cos();
        }
        for n in (0..=nmax).rev() {
            acc[n] = (0..=n).map(|k| acc[n - k] * factor[k]).sum();
        }
    }
    Ok(acc)
}

/// D_{n,d}(theta) = sum_{k <= n} E_k(theta).
pub fn dirichlet(d: usize, n: usize, theta: &TorusPoint) -> Result<f64, KernelError> {
    (0..=n).map(|k| e_fn(d, k, theta)).sum()
}

/// D_{n,d}(theta) from the truncated product, O(d n^2).
pub fn dirichlet_fast(d: usize, n: usize, theta: &TorusPoint) -> Result<f64, KernelError> {
    Ok(e_fn_upto(d, n, theta)?.iter().sum())
}

/// E_n(theta) = [cos theta_1, ..., cos theta_d] H_{n,d}, valid for n >= 1.
pub fn e_fn_divdiff(d: usize, n: usize, theta: &TorusPoint) -> Result<f64, KernelError> {
    let p = KernelParams::new(d, n)?;
    p.require_dim(2)?;
    p.check_point(theta)?;
    if n == 0 {
        return Err(KernelError::Degree { n, min: 1 });
    }
    Ok(divided_difference_cos(&h_series(d, n)?, theta)?)
}

/// D_{n,d}(theta) = [cos theta_1, ..., cos theta_d] G_{n,d}.
pub fn dirichlet_divdiff(d: usize, n: usize, theta: &TorusPoint) -> Result<f64, KernelError> {
    let p = KernelParams::new(d, n)?;
    p.require_dim(2)?;
    p.check_point(theta)?;
    Ok(divided_difference_cos(&g_series(d, n as i64)?, theta)?)
}

/// (1 - r^2)^d / prod_i (1 - 2 r cos theta_i + r^2)
pub fn poisson_product(d: usize, r: f64, theta: &TorusPoint) -> Result<f64, KernelError> {
    KernelParams::new(d, 0)?.check_point(theta)?;
    check_radius(r)?;
    let denom: f64 = theta.cosines().iter().map(|c| 1.0 - 2.0 * r * c + r * r).product();
    Ok((1.0 - r * r).powi(d as i32) / denom)
}

/// P_r(t) = 1 / (1 - 2 r t + r^2) with P_r^(j)(t) = j! (2r)^j / (1 - 2 r t + r^2)^(j+1).
#[derive(Debug, Clone, Copy)]
pub struct PoissonFn {
    pub r: f64,
}

impl SmoothFn for PoissonFn {
    fn eval(&self, t: f64, order: usize) -> f64 {
        let q = 1.0 - 2.0 * self.r * t + self.r * self.r;
        factorial(order) * (2.0 * self.r).powi(order as i32) / q.powi(order as i32 + 1)
    }

    fn max_order(&self) -> usize {
        usize::MAX
    }
}

/// `lhs` = [cos theta_1, ..., cos theta_d] P_r, `rhs` = (2r)^{d-1} / prod_i (1 - 2 r cos theta_i + r^2).
pub fn poisson_divdiff_routes(d: usize, r: f64, theta: &TorusPoint) -> Result<DualRoute, KernelError> {
    KernelParams::new(d, 0)?.check_point(theta)?;
    check_radius(r)?;
    let lhs = divided_difference_cos(&PoissonFn { r }, theta)?;
    let denom: f64 = theta.cosines().iter().map(|c| 1.0 - 2.0 * r * c + r * r).product();
    let rhs = (2.0 * r).powi(d as i32 - 1) / denom;
    Ok(DualRoute::new(lhs, rhs))
}

/// The closed product form of [cos theta_1, ..., cos theta_d] P_r.
pub fn poisson_divdiff(d: usize, r: f64, theta: &TorusPoint) -> Result<f64, KernelError> {
    Ok(poisson_divdiff_routes(d, r, theta)?.rhs)
}
