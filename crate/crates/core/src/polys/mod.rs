//! Gegenbauer polynomials C_n^lambda with the normalization
//! C_n^lambda(1) = (2 lambda)_n / n!, weight w_lambda(t) = (1 - t^2)^(lambda - 1/2).

mod chebyshev;

pub use chebyshev::ChebSeries;

use thiserror::Error;

use crate::numerics::DualRoute;
use crate::special::{gamma, pochhammer};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum PolyError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// The Gegenbauer family for a fixed lambda > -1/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GegenbauerFamily {
    lambda: f64,
}

impl GegenbauerFamily {
    pub fn new(lambda: f64) -> Result<Self, PolyError> {
        if !(lambda > -0.5) || !lambda.is_finite() {
            return Err(PolyError::InvalidArgument(format!(
                "Gegenbauer parameter must exceed -1/2, got {lambda}"
            )));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// C_n^lambda(t) by forward recurrence; zero for n < 0.
    pub fn eval(&self, n: i64, t: f64) -> f64 {
        if n < 0 {
            return 0.0;
        }
        *self.table(n as usize, t).last().expect("table is nonempty")
    }

    /// [C_0(t), ..., C_nmax(t)]
    pub fn table(&self, nmax: usize, t: f64) -> Vec<f64> {
        let lam = self.lambda;
        let mut out = Vec::with_capacity(nmax + 1);
        out.push(1.0);
        if nmax >= 1 {
            out.push(2.0 * lam * t);
        }
        for n in 2..=nmax {
            let nf = n as f64;
            let next = (2.0 * (nf + lam - 1.0) * t * out[n - 1] - (nf + 2.0 * lam - 2.0) * out[n - 2]) / nf;
            out.push(next);
        }
        out
    }

    /// C_n^lambda(1) = (2 lambda)_n / n!
    pub fn at_one(&self, n: usize) -> f64 {
        (0..n).fold(1.0, |acc, j| acc * (2.0 * self.lambda + j as f64) / (j as f64 + 1.0))
    }

    /// Z_n^lambda(t) = (n + lambda) / lambda * C_n^lambda(t); needs lambda > 0.
    pub fn z(&self, n: i64, t: f64) -> Result<f64, PolyError> {
        if !(self.lambda > 0.0) {
            return Err(PolyError::InvalidArgument(format!(
                "Z_n^lambda needs lambda > 0, got {}",
                self.lambda
            )));
        }
        if n < 0 {
            return Ok(0.0);
        }
        Ok((n as f64 + self.lambda) / self.lambda * self.eval(n, t))
    }

    /// c_lambda with c_lambda * int_{-1}^{1} w_lambda = 1.
    pub fn norm_c(&self) -> f64 {
        let lam = self.lambda;
        gamma(lam + 1.0) / (gamma(0.5) * gamma(lam + 0.5))
    }

    pub fn weight(&self, t: f64) -> f64 {
        (1.0 - t * t).max(0.0).powf(self.lambda - 0.5)
    }

    /// Squared norm relative to c_lambda w_lambda: lambda / (n + lambda) C_n(1).
    pub fn norm_sq(&self, n: usize) -> f64 {
        self.lambda / (n as f64 + self.lambda) * self.at_one(n)
    }
}

pub fn gegenbauer(lambda: f64, n: i64, t: f64) -> Result<f64, PolyError> {
    Ok(GegenbauerFamily::new(lambda)?.eval(n, t))
}

pub fn z_poly(lambda: f64, n: i64, t: f64) -> Result<f64, PolyError> {
    GegenbauerFamily::new(lambda)?.z(n, t)
}

pub fn geg_norm_c(lambda: f64) -> Result<f64, PolyError> {
    Ok(GegenbauerFamily::new(lambda)?.norm_c())
}

/// `lhs` is the partial sum sum_{n <= k} C_n^lambda(t) r^n, `rhs` the closed
/// form (1 - 2 r t + r^2)^(-lambda).
pub fn geg_generating(lambda: f64, r: f64, t: f64, k: usize) -> Result<DualRoute, PolyError> {
    if !(0.0..1.0).contains(&r) {
        return Err(PolyError::InvalidArgument(format!(
            "generating function needs 0 <= r < 1, got {r}"
        )));
    }
    let family = GegenbauerFamily::new(lambda)?;
    let table = family.table(k, t);
    let mut power = 1.0;
    let mut partial = 0.0;
    for c in table {
        partial += c * power;
        power *= r;
    }
    let closed = (1.0 - 2.0 * r * t + r * r).powf(-lambda);
    Ok(DualRoute::new(partial, closed))
}

/// Bound on the tail sum_{n > k} |C_n^lambda(t)| r^n for lambda > 0 and
/// |t| <= 1, using |C_n^lambda(t)| <= C_n^lambda(1).
pub fn geg_generating_tail_bound(lambda: f64, r: f64, k: usize) -> Result<f64, PolyError> {
    let family = GegenbauerFamily::new(lambda)?;
    if !(lambda > 0.0) || !(0.0..1.0).contains(&r) {
        return Err(PolyError::InvalidArgument(
            "tail bound needs lambda > 0 and 0 <= r < 1".into(),
        ));
    }
    let mut term = family.at_one(k + 1) * r.powi(k as i32 + 1);
    let mut total = 0.0;
    let mut n = k + 1;
    while term > 1e-300 && term > 1e-18 * total {
        total += term;
        let nf = n as f64;
        term *= (2.0 * lambda + nf) / (nf + 1.0) * r;
        n += 1;
        if n > k + 100_000 {
            break;
        }
    }
    Ok(total)
}

/// Right-hand side of the connection expansion of C_{2n}^{d-1} in
/// Z^{(d-1)/2}:
/// sum_k (d-1)_{2n-k} ((d-1)/2)_k / (((d-1)/2 + 1)_{2n-k} k!) Z_{2n-2k}^{(d-1)/2}(t).
pub fn geg_connection_even(d: usize, n: usize, t: f64) -> Result<f64, PolyError> {
    if d < 2 {
        return Err(PolyError::InvalidArgument(format!(
            "connection expansion needs d >= 2, got {d}"
        )));
    }
    let lam = (d - 1) as f64;
    let mu = 0.5 * lam;
    let family = GegenbauerFamily::new(mu)?;
    let mut total = 0.0;
    for k in 0..=n {
        let coeff =
            pochhammer(lam, 2 * n - k) * pochhammer(mu, k) / (pochhammer(mu + 1.0, 2 * n - k) * pochhammer(1.0, k));
        total += coeff * family.z((2 * n - 2 * k) as i64, t)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::gauss_legendre;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    /// int_{-1}^{1} f(t) (1 - t^2)^(lambda - 1/2) dt through t = cos(phi),
    /// which turns the endpoint behaviour into the smooth factor sin^(2 lambda).
    fn weighted_integral(lambda: f64, f: impl Fn(f64) -> f64) -> f64 {
        let rule = gauss_legendre(80).unwrap();
        rule.integrate_interval(0.0, PI, |phi| f(phi.cos()) * phi.sin().powf(2.0 * lambda))
    }

    #[test]
    fn evaluation_examples() {
        assert_abs_diff_eq!(gegenbauer(2.0, 1, 0.5).unwrap(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(gegenbauer(1.0, 3, 1.0).unwrap(), 4.0, epsilon = 1e-14);
        assert_eq!(gegenbauer(3.0, -2, 0.4).unwrap(), 0.0);
        assert!(matches!(gegenbauer(-0.5, 1, 0.0), Err(PolyError::InvalidArgument(_))));
        assert!(gegenbauer(-0.7, 1, 0.0).is_err());
    }

    #[test]
    fn z_examples() {
        assert_abs_diff_eq!(z_poly(1.0, 2, 1.0).unwrap(), 9.0, epsilon = 1e-14);
        assert_abs_diff_eq!(z_poly(2.0, 0, 0.3).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(z_poly(2.0, 1, 1.0).unwrap(), 6.0, epsilon = 1e-14);
        assert_eq!(z_poly(2.0, -1, 0.3).unwrap(), 0.0);
        assert!(z_poly(0.0, 1, 0.3).is_err());
    }

    #[test]
    fn value_at_one_matches_pochhammer_ratio() {
        for lam in [0.5, 1.0, 1.5, 2.0, 3.0, 4.5] {
            let family = GegenbauerFamily::new(lam).unwrap();
            for n in 0..=60 {
                let direct = family.eval(n as i64, 1.0);
                assert_relative_eq!(direct, family.at_one(n), max_relative = 1e-12);
            }
        }
        // chebyshev U: C_n^1(1) = n + 1
        let u = GegenbauerFamily::new(1.0).unwrap();
        assert_eq!(u.at_one(7), 8.0);
    }

    #[test]
    fn normalization_constant() {
        assert_abs_diff_eq!(geg_norm_c(0.5).unwrap(), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(geg_norm_c(1.0).unwrap(), 2.0 / PI, epsilon = 1e-14);
        // weight (1 - t^2) has mass 4/3; (1 - t^2)^{3/2} has mass 3 pi / 8
        assert_abs_diff_eq!(geg_norm_c(1.5).unwrap(), 0.75, epsilon = 1e-14);
        assert_abs_diff_eq!(geg_norm_c(2.0).unwrap(), 8.0 / (3.0 * PI), epsilon = 1e-14);
        for lam in [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0] {
            let mass = weighted_integral(lam, |_| 1.0);
            assert_abs_diff_eq!(geg_norm_c(lam).unwrap() * mass, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn orthogonality() {
        for lam in [1.0, 2.0, 3.0] {
            let family = GegenbauerFamily::new(lam).unwrap();
            let c = family.norm_c();
            for n in 0..=12 {
                for m in 0..=12 {
                    let v = c * weighted_integral(lam, |t| family.eval(n, t) * family.eval(m, t));
                    let expected = if n == m { family.norm_sq(n as usize) } else { 0.0 };
                    let scale = expected.abs().max(1.0);
                    assert!(
                        (v - expected).abs() <= 1e-10 * scale,
                        "lambda={lam}, n={n}, m={m}: {v} vs {expected}"
                    );
                }
            }
        }
    }

    #[test]
    fn raising_relation() {
        // (n + lambda) C_n^lambda = lambda [C_n^{lambda+1} - C_{n-2}^{lambda+1}]
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for lam in [1.0, 2.0, 3.0] {
            let lo = GegenbauerFamily::new(lam).unwrap();
            let hi = GegenbauerFamily::new(lam + 1.0).unwrap();
            for _ in 0..50 {
                let t: f64 = rng.random_range(-1.0..=1.0);
                for n in 0..=20i64 {
                    let lhs = (n as f64 + lam) * lo.eval(n, t);
                    let rhs = lam * (hi.eval(n, t) - hi.eval(n - 2, t));
                    let scale = hi.at_one(n as usize).max(1.0);
                    assert!((lhs - rhs).abs() <= 1e-11 * scale, "lambda={lam}, n={n}, t={t}");
                }
            }
        }
    }

    #[test]
    fn generating_function() {
        let g = geg_generating(1.7, 0.0, 0.3, 5).unwrap();
        assert_eq!((g.lhs, g.rhs), (1.0, 1.0));
        let g = geg_generating(1.0, 0.5, 1.0, 200).unwrap();
        assert_abs_diff_eq!(g.rhs, 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.lhs, 4.0, epsilon = 1e-12);
        let g = geg_generating(2.0, 0.3, 0.0, 60).unwrap();
        assert!(g.gap() <= 1e-12);
        assert!(geg_generating(1.0, 1.0, 0.0, 3).is_err());
        assert!(geg_generating(1.0, -0.1, 0.0, 3).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for lam in [0.5, 1.0, 2.5] {
            for r in [0.2, 0.6, 0.9] {
                let k = 40;
                let bound = geg_generating_tail_bound(lam, r, k).unwrap();
                for _ in 0..10 {
                    let t: f64 = rng.random_range(-1.0..=1.0);
                    let g = geg_generating(lam, r, t, k).unwrap();
                    assert!(g.gap() <= bound + 1e-13 * g.rhs.abs(), "{lam} {r} {t}");
                }
            }
        }
    }

    #[test]
    fn connection_coefficients() {
        for d in 2..=6 {
            assert_abs_diff_eq!(geg_connection_even(d, 0, 0.37).unwrap(), 1.0, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(geg_connection_even(3, 1, 1.0).unwrap(), 10.0, epsilon = 1e-12);
        let direct = gegenbauer(3.0, 4, 0.7).unwrap();
        assert_relative_eq!(geg_connection_even(4, 2, 0.7).unwrap(), direct, max_relative = 1e-12);
        for d in 2..=5 {
            let family = GegenbauerFamily::new((d - 1) as f64).unwrap();
            for n in 0..=8 {
                for &t in &[-1.0, -0.61, 0.0, 0.33, 0.9, 1.0] {
                    let direct = family.eval(2 * n as i64, t);
                    let via = geg_connection_even(d, n, t).unwrap();
                    let scale = direct.abs().max(1.0);
                    assert!((direct - via).abs() <= 1e-10 * scale, "d={d} n={n} t={t}");
                }
            }
        }
        assert!(geg_connection_even(1, 1, 0.0).is_err());
    }
}
