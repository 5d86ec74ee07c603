use std::f64::consts::PI;

use num_complex::Complex64;

use super::{tridiagonal_eigen, NumericsError};
use crate::special::gamma;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RuleKind {
    GaussLegendre,
    /// Weight (1 - t^2)^(lambda - 1/2) on [-1, 1].
    GaussGegenbauer {
        lambda: f64,
    },
    /// Normalized tensor trapezoid on the torus [-pi, pi)^dim.
    TorusTrapezoid {
        dim: usize,
        per_axis: usize,
    },
}

/// A positive quadrature rule. Nodes are stored flat, `dim` coordinates per node.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    kind: RuleKind,
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    exact_degree: usize,
}

impl QuadRule {
    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Polynomial degree (interval rules) or largest per-axis frequency
    /// (torus rules) integrated exactly.
    pub fn exact_degree(&self) -> usize {
        self.exact_degree
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.nodes.chunks(self.dim).zip(self.weights.iter().copied())
    }

    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }

    pub fn integrate_complex<F: FnMut(&[f64]) -> Complex64>(&self, mut f: F) -> Complex64 {
        self.iter().map(|(x, w)| f(x) * w).sum()
    }

    /// Integrate over `[a, b]` by the affine image of a 1-D rule on `[-1, 1]`.
    /// Only meaningful for Gauss-Legendre (the weight is not transformed).
    pub fn integrate_interval<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        debug_assert_eq!(self.dim, 1);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
    }
}

/// Gauss-Legendre rule with `n` nodes, by Newton iteration on the Legendre
/// three-term recurrence.
pub fn gauss_legendre(n: usize) -> Result<QuadRule, NumericsError> {
    if n == 0 {
        return Err(NumericsError::InvalidArgument(
            "Gauss-Legendre rule needs at least one node".into(),
        ));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, p_prev) = legendre_pair(n, z);
            dp = nf * (z * p - p_prev) / (z * z - 1.0);
            let step = p / dp;
            z -= step;
            if step.abs() <= 1e-15 {
                let (p, p_prev) = legendre_pair(n, z);
                dp = nf * (z * p - p_prev) / (z * z - 1.0);
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(QuadRule {
        kind: RuleKind::GaussLegendre,
        dim: 1,
        nodes,
        weights,
        exact_degree: 2 * n - 1,
    })
}

/// (P_n(z), P_{n-1}(z))
fn legendre_pair(n: usize, z: f64) -> (f64, f64) {
    let mut p = 1.0;
    let mut p_prev = 0.0;
    for j in 1..=n {
        let jf = j as f64;
        let next = ((2.0 * jf - 1.0) * z * p - (jf - 1.0) * p_prev) / jf;
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}

/// Gauss rule for the weight (1 - t^2)^(lambda - 1/2), lambda > 0, via the
/// Golub-Welsch eigenproblem of the Jacobi matrix.
pub fn gauss_gegenbauer(lambda: f64, n: usize) -> Result<QuadRule, NumericsError> {
    if n == 0 {
        return Err(NumericsError::InvalidArgument(
            "Gauss-Gegenbauer rule needs at least one node".into(),
        ));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(NumericsError::InvalidArgument(format!(
            "Gauss-Gegenbauer rule needs lambda > 0, got {lambda}"
        )));
    }
    let diag = vec![0.0; n];
    let offdiag: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            (k * (k + 2.0 * lambda - 1.0) / (4.0 * (k + lambda) * (k + lambda - 1.0))).sqrt()
        })
        .collect();
    let eig = tridiagonal_eigen(&diag, &offdiag, true)?;
    let vectors = eig.vectors.expect("eigenvectors requested");
    // total mass of the weight
    let mu0 = gamma(0.5) * gamma(lambda + 0.5) / gamma(lambda + 1.0);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|j| (eig.values[j], mu0 * vectors[(0, j)] * vectors[(0, j)]))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // the rule is symmetric; enforce it exactly
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[j].1 + pairs[i].1);
        pairs[i] = (-x, w);
        pairs[j] = (x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    Ok(QuadRule {
        kind: RuleKind::GaussGegenbauer { lambda },
        dim: 1,
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
        exact_degree: 2 * n - 1,
    })
}

/// Tensor trapezoid rule on T^d with `l` points per axis at
/// theta = -pi + 2 pi k / l and uniform weight l^(-d). It computes the
/// normalized integral (2 pi)^(-d) \int_{T^d}.
pub fn torus_trapezoid(d: usize, l: usize) -> Result<QuadRule, NumericsError> {
    if d == 0 || l == 0 {
        return Err(NumericsError::InvalidArgument(format!(
            "torus trapezoid needs d >= 1 and l >= 1, got d = {d}, l = {l}"
        )));
    }
    let total = l
        .checked_pow(d as u32)
        .ok_or_else(|| NumericsError::Overflow(format!("{l}^{d} grid points")))?;
    let axis: Vec<f64> = (0..l).map(|k| -PI + 2.0 * PI * k as f64 / l as f64).collect();
    let mut nodes = Vec::with_capacity(total * d);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        nodes.extend(idx.iter().map(|&k| axis[k]));
        for slot in idx.iter_mut().rev() {
            *slot += 1;
            if *slot < l {
                break;
            }
            *slot = 0;
        }
    }
    Ok(QuadRule {
        kind: RuleKind::TorusTrapezoid { dim: d, per_axis: l },
        dim: d,
        nodes,
        weights: vec![1.0 / total as f64; total],
        exact_degree: l - 1,
    })
}

/// Sum of Gauss-Legendre integrals of `f` over consecutive breakpoints.
/// Empty pieces are skipped.
pub fn integrate_piecewise<F: FnMut(f64) -> f64>(breaks: &[f64], rule: &QuadRule, mut f: F) -> f64 {
    breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| rule.integrate_interval(w[0], w[1], &mut f))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn legendre_small_rules() {
        let r1 = gauss_legendre(1).unwrap();
        assert_eq!(r1.nodes(), &[0.0]);
        assert_abs_diff_eq!(r1.weights()[0], 2.0, epsilon = 1e-15);

        // two-point conditions: w1 + w2 = 2, w1 x1 + w2 x2 = 0, w1 x1^2 + w2 x2^2 = 2/3
        let r2 = gauss_legendre(2).unwrap();
        let x = 1.0 / 3f64.sqrt();
        assert_abs_diff_eq!(r2.nodes()[0], -x, epsilon = 1e-15);
        assert_abs_diff_eq!(r2.nodes()[1], x, epsilon = 1e-15);
        assert_abs_diff_eq!(r2.weights()[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r2.weights()[1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r2.integrate(|u| u[0] * u[0]), 2.0 / 3.0, epsilon = 1e-15);
        assert_eq!(r2.exact_degree(), 3);
    }

    #[test]
    fn legendre_rejects_zero_nodes() {
        assert!(matches!(gauss_legendre(0), Err(NumericsError::InvalidArgument(_))));
    }

    #[test]
    fn legendre_monomials_exact() {
        for n in [1usize, 2, 3, 5, 8, 13, 21, 34, 64] {
            let rule = gauss_legendre(n).unwrap();
            assert!(rule.weights().iter().all(|&w| w > 0.0));
            assert!(rule.nodes().iter().all(|&x| x.abs() < 1.0));
            for k in 0..=(2 * n - 1) {
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                let got = rule.integrate(|u| u[0].powi(k as i32));
                assert!((got - exact).abs() <= 1e-13, "n = {n}, k = {k}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn gegenbauer_rule_moments() {
        // lambda = 1: weight sqrt(1 - t^2), mass pi/2, second moment pi/8
        let rule = gauss_gegenbauer(1.0, 6).unwrap();
        assert_abs_diff_eq!(rule.weights().iter().sum::<f64>(), PI / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(rule.integrate(|t| t[0] * t[0]), PI / 8.0, epsilon = 1e-14);
        // lambda = 1/2 reproduces Gauss-Legendre
        let a = gauss_gegenbauer(0.5, 7).unwrap();
        let b = gauss_legendre(7).unwrap();
        for (x, y) in a.nodes().iter().zip(b.nodes()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-14);
        }
        for (x, y) in a.weights().iter().zip(b.weights()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-14);
        }
        // lambda = 2: int t^{2k} (1 - t^2)^{3/2} = B(k + 1/2, 5/2)
        let rule = gauss_gegenbauer(2.0, 5).unwrap();
        let beta = |p: f64, q: f64| gamma(p) * gamma(q) / gamma(p + q);
        for k in 0..5 {
            let exact = beta(k as f64 + 0.5, 2.5);
            assert_abs_diff_eq!(rule.integrate(|t| t[0].powi(2 * k)), exact, epsilon = 1e-13);
        }
        assert!(gauss_gegenbauer(0.0, 3).is_err());
    }

    #[test]
    fn torus_rule_examples() {
        let r = torus_trapezoid(1, 4).unwrap();
        assert_abs_diff_eq!(r.integrate(|_| 1.0), 1.0, epsilon = 1e-15);
        let z = r.integrate_complex(|t| Complex64::from_polar(1.0, t[0]));
        assert!(z.norm() < 1e-15);

        let r = torus_trapezoid(2, 8).unwrap();
        assert_eq!(r.len(), 64);
        let z = r.integrate_complex(|t| Complex64::from_polar(1.0, 3.0 * t[0] - 2.0 * t[1]));
        assert!(z.norm() < 1e-15);
        assert!(torus_trapezoid(0, 3).is_err());
    }

    #[test]
    fn torus_rule_characters() {
        for (d, l) in [(1usize, 5usize), (2, 6), (3, 4)] {
            let rule = torus_trapezoid(d, l).unwrap();
            let span = (l as i64 - 1).min(3);
            let mut alpha = vec![-span; d];
            loop {
                let z = rule.integrate_complex(|t| {
                    let phase: f64 = alpha.iter().zip(t).map(|(&a, &x)| a as f64 * x).sum();
                    Complex64::from_polar(1.0, phase)
                });
                let expected = if alpha.iter().all(|&a| a == 0) { 1.0 } else { 0.0 };
                assert!((z - expected).norm() <= 1e-14, "{alpha:?}: {z}");
                let mut k = 0;
                while k < d {
                    alpha[k] += 1;
                    if alpha[k] <= span {
                        break;
                    }
                    alpha[k] = -span;
                    k += 1;
                }
                if k == d {
                    break;
                }
            }
        }
    }

    #[test]
    fn piecewise_integration_skips_empty_pieces() {
        let rule = gauss_legendre(4).unwrap();
        let v = integrate_piecewise(&[-1.0, -1.0, 0.0, 0.5, 1.0], &rule, |u| u.abs());
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-14);
    }
}
