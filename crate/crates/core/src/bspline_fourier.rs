//! Fourier means of the B-spline theta -> M_{d-1}(u | cos theta_1, ..., cos theta_d)
//! over the l1 shells:
//! m_{n,d}(u) = (2 pi)^{-d} \int_{T^d} M_{d-1}(u | cos theta) E_n(theta) / N_d(n) d theta.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bspline::{bspline_eval, BsplineSpec};
use crate::divdiff::KnotVector;
use crate::kernels::{h_poly_table, KernelError};
use crate::numerics::{gauss_gegenbauer, shell_count, DenseMatrix, DualRoute, NumericsError};
use crate::polys::GegenbauerFamily;
use crate::special::{binomial, factorial, gamma};

pub const DEFAULT_TERMS: usize = 2000;
pub const DEFAULT_DELTA: f64 = 1e-3;
pub const DEFAULT_SEED: u64 = 0x5eed_0f11;
/// Samples closer than this to the singular set are redrawn.
pub const SINGULAR_REJECT: f64 = 1e-12;

const CHUNK: usize = 1 << 15;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum FourierError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "|u| = {u} exceeds 1 - delta with delta = {delta}; the series is not evaluated this close to the endpoints"
    )]
    Domain { u: f64, delta: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Kernel(#[from] KernelError),

    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

fn require_d(d: usize) -> Result<(), FourierError> {
    if d < 2 {
        return Err(FourierError::InvalidArgument(format!(
            "dimension must be at least 2, got {d}"
        )));
    }
    Ok(())
}

/// A truncated series with its (C,1) mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesEval {
    /// Cesaro mean of the partial sums S_0, ..., S_{K-1}.
    pub value: f64,
    /// Plain partial sum S_{K-1}.
    pub partial: f64,
    /// |Cesaro mean at K - Cesaro mean at K/2|, a rough accuracy indicator.
    pub residual: f64,
    pub terms: usize,
}

impl SeriesEval {
    fn from_terms(terms: &[f64]) -> Self {
        let k = terms.len();
        let cesaro = |len: usize| -> f64 {
            terms[..len]
                .iter()
                .enumerate()
                .map(|(i, t)| t * (len - i) as f64)
                .sum::<f64>()
                / len.max(1) as f64
        };
        let value = cesaro(k);
        let half = cesaro((k / 2).max(1));
        Self {
            value,
            partial: terms.iter().sum(),
            residual: (value - half).abs(),
            terms: k,
        }
    }

    fn zero(terms: usize) -> Self {
        Self {
            value: 0.0,
            partial: 0.0,
            residual: 0.0,
            terms,
        }
    }
}

/// Estimate with a standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    pub rejected: usize,
}

/// m_{n,2}(cos alpha) in finite form, 0 < alpha < pi.
pub fn m_d2_closed(n: usize, alpha: f64) -> Result<f64, FourierError> {
    if !(alpha > 0.0 && alpha < PI) {
        return Err(FourierError::InvalidArgument(format!(
            "need 0 < alpha < pi, got {alpha}"
        )));
    }
    let half = n / 2;
    let sum: f64 = if n.is_multiple_of(2) {
        (0..half)
            .map(|k| {
                let m = (2 * k + 1) as f64;
                (m * alpha).sin() / m
            })
            .sum::<f64>()
    } else {
        alpha / 2.0
            + (1..=half)
                .map(|k| {
                    let m = (2 * k) as f64;
                    (m * alpha).sin() / m
                })
                .sum::<f64>()
    };
    Ok(0.5 - 2.0 / PI * sum)
}

/// m_{n,2}(u) for any real u, zero for |u| >= 1.
pub fn m_d2_closed_u(n: usize, u: f64) -> Result<f64, FourierError> {
    if u.abs() >= 1.0 {
        return Ok(0.0);
    }
    m_d2_closed(n, u.acos())
}

/// (2/pi) sum_{k<K} sin((n+2k+1) alpha)/(n+2k+1).
pub fn m_d2_series(n: usize, alpha: f64, terms: usize) -> Result<SeriesEval, FourierError> {
    if !(alpha > 0.0 && alpha < PI) {
        return Err(FourierError::InvalidArgument(format!(
            "need 0 < alpha < pi, got {alpha}"
        )));
    }
    if terms == 0 {
        return Err(FourierError::InvalidArgument("series needs at least one term".into()));
    }
    let t: Vec<f64> = (0..terms)
        .map(|k| {
            let m = (n + 2 * k + 1) as f64;
            2.0 / PI * (m * alpha).sin() / m
        })
        .collect();
    Ok(SeriesEval::from_terms(&t))
}

/// C_m^lambda(t) / C_m^lambda(1) for m = 0..=mmax, via
/// (m + 2 lambda - 1) R_m = 2 (m + lambda - 1) t R_{m-1} - (m - 1) R_{m-2}.
fn normalized_gegenbauer(lambda: f64, mmax: usize, t: f64) -> Vec<f64> {
    let mut r = Vec::with_capacity(mmax + 1);
    r.push(1.0);
    if mmax >= 1 {
        r.push(t);
    }
    for m in 2..=mmax {
        let mf = m as f64;
        let next = (2.0 * (mf + lambda - 1.0) * t * r[m - 1] - (mf - 1.0) * r[m - 2]) / (mf + 2.0 * lambda - 1.0);
        r.push(next);
    }
    r
}

/// c_{d-1} = 1 / \int (1-u^2)^{d-3/2} du.
pub fn weight_constant(d: usize) -> f64 {
    GegenbauerFamily::new((d - 1) as f64).expect("d >= 2").norm_c()
}

/// The k-th term of the Gegenbauer series of m_{n,d}(u) without the common
/// prefactor, for k < count.
fn series_terms(d: usize, n: usize, u: f64, count: usize) -> Vec<f64> {
    let lambda = (d - 1) as f64;
    let ratios = normalized_gegenbauer(lambda, n + 2 * count, u);
    let mut weight = 1.0;
    (0..count)
        .map(|k| {
            if k > 0 {
                // (d-1)_k / k!
                weight *= (lambda + k as f64 - 1.0) / k as f64;
            }
            weight * ratios[n + 2 * k]
        })
        .collect()
}

fn series_prefactor(d: usize, u: f64) -> f64 {
    weight_constant(d) / factorial(d - 1) * (1.0 - u * u).powf(d as f64 - 1.5)
}

/// m_{n,d}(u) from its Gegenbauer series with `terms` terms and Cesaro summation.
pub fn m_series(d: usize, n: usize, u: f64, terms: usize) -> Result<SeriesEval, FourierError> {
    m_series_with_delta(d, n, u, terms, DEFAULT_DELTA)
}

pub fn m_series_with_delta(d: usize, n: usize, u: f64, terms: usize, delta: f64) -> Result<SeriesEval, FourierError> {
    require_d(d)?;
    if terms == 0 {
        return Err(FourierError::InvalidArgument("series needs at least one term".into()));
    }
    if !(1e-3..1.0).contains(&delta) {
        return Err(FourierError::InvalidArgument(format!(
            "delta must lie in [1e-3, 1), got {delta}"
        )));
    }
    if u.abs() >= 1.0 {
        return Ok(SeriesEval::zero(terms));
    }
    if u.abs() > 1.0 - delta {
        return Err(FourierError::Domain { u, delta });
    }
    let pre = series_prefactor(d, u);
    let t: Vec<f64> = series_terms(d, n, u, terms).into_iter().map(|x| pre * x).collect();
    Ok(SeriesEval::from_terms(&t))
}

/// m_{0,d}(u) = Gamma((d+1)/2) / (sqrt(pi) Gamma(d/2) (d-1)!) (1-u^2)_+^{(d-2)/2}.
pub fn m0_closed(d: usize, u: f64) -> Result<f64, FourierError> {
    require_d(d)?;
    if u.abs() >= 1.0 {
        return Ok(0.0);
    }
    let df = d as f64;
    let c = gamma(0.5 * (df + 1.0)) / (PI.sqrt() * gamma(0.5 * df) * factorial(d - 1));
    Ok(c * (1.0 - u * u).powf(0.5 * (df - 2.0)))
}

/// `lhs` = (d-1)! sum_j (-1)^j C(d-1, j) m_{n+2j,d}(u) from the series,
/// `rhs` = c_{d-1} (1-u^2)^{d-3/2} C_n^{d-1}(u) / C_n^{d-1}(1).
pub fn m_recursion_check(d: usize, n: usize, u: f64, terms: usize) -> Result<DualRoute, FourierError> {
    require_d(d)?;
    let mut lhs = 0.0;
    for j in 0..d {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        lhs += sign * binomial(d - 1, j) * m_series(d, n + 2 * j, u, terms)?.value;
    }
    lhs *= factorial(d - 1);
    let rhs = if u.abs() >= 1.0 {
        0.0
    } else {
        let r = normalized_gegenbauer((d - 1) as f64, n, u)[n];
        weight_constant(d) * (1.0 - u * u).powf(d as f64 - 1.5) * r
    };
    Ok(DualRoute::new(lhs, rhs))
}

/// Per-chunk sums: (sum, sum of squares, accepted, rejected).
type Moments = (f64, f64, usize, usize);

fn mc_chunk(d: usize, n: usize, u: f64, seed: u64, chunk: u64, pairs: usize) -> Moments {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let norm = 1.0 / shell_count(d, n).expect("d >= 1") as f64;
    let mut theta = vec![0.0; d];
    let mut cosines = vec![0.0; d];
    let mut acc = vec![0.0; n + 1];
    let mut factor = vec![0.0; n + 1];
    let (mut s, mut s2, mut accepted, mut rejected) = (0.0, 0.0, 0usize, 0usize);
    while accepted < pairs {
        for t in theta.iter_mut() {
            *t = rng.random_range(0.0..PI);
        }
        for (c, t) in cosines.iter_mut().zip(&theta) {
            *c = t.cos();
        }
        let (lo, hi) = cosines
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &c| (a.min(c), b.max(c)));
        if hi - lo < SINGULAR_REJECT {
            rejected += 1;
            continue;
        }
        let knots = KnotVector::with_tolerance(&cosines, 0.0).expect("finite knots");
        let spec = BsplineSpec::new(d - 1, knots).expect("knots are not all equal");
        // theta -> pi - theta maps cos to -cos and E_n to (-1)^n E_n
        let e = shell_value(&theta, n, &mut acc, &mut factor);
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        let forward = bspline_eval(&spec, u);
        let mirrored = bspline_eval(&spec, -u);
        let value = 0.5 * (forward + sign * mirrored) * e * norm;
        s += value;
        s2 += value * value;
        accepted += 1;
    }
    (s, s2, accepted, rejected)
}

/// E_n(theta) via the truncated product, reusing buffers.
fn shell_value(theta: &[f64], n: usize, acc: &mut [f64], factor: &mut [f64]) -> f64 {
    acc.fill(0.0);
    acc[0] = 1.0;
    for &t in theta {
        factor[0] = 1.0;
        for (k, f) in factor.iter_mut().enumerate().skip(1) {
            *f = 2.0 * (k as f64 * t).cos();
        }
        for m in (0..=n).rev() {
            acc[m] = (0..=m).map(|k| acc[m - k] * factor[k]).sum();
        }
    }
    acc[n]
}

/// Monte Carlo estimate of m_{n,d}(u) for d in {2, 3}. `budget` counts
/// integrand evaluations; samples are taken in antithetic pairs.
pub fn m_torus_quadrature(d: usize, n: usize, u: f64, budget: usize, seed: u64) -> Result<McEstimate, FourierError> {
    require_d(d)?;
    if d > 3 {
        return Err(FourierError::Unsupported(format!(
            "Monte Carlo means are limited to d <= 3, got d = {d}"
        )));
    }
    if budget < 4 {
        return Err(FourierError::InvalidArgument(format!("budget {budget} is too small")));
    }
    if !(u.abs() < 1.0) {
        return Err(FourierError::InvalidArgument(format!("need |u| < 1, got {u}")));
    }
    let pairs = budget / 2;
    let chunks: Vec<(u64, usize)> = (0..pairs.div_ceil(CHUNK))
        .map(|c| (c as u64, CHUNK.min(pairs - c * CHUNK)))
        .collect();
    let run = |&(c, p): &(u64, usize)| mc_chunk(d, n, u, seed, c, p);
    #[cfg(feature = "parallel")]
    let parts: Vec<Moments> = {
        use rayon::prelude::*;
        chunks.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Moments> = chunks.iter().map(run).collect();

    let (s, s2, count, rejected) = parts
        .into_iter()
        .fold((0.0, 0.0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3));
    let nf = count as f64;
    let mean = s / nf;
    let var = ((s2 / nf - mean * mean) * nf / (nf - 1.0)).max(0.0);
    Ok(McEstimate {
        mean,
        std_error: (var / nf).sqrt(),
        samples: 2 * count,
        rejected,
    })
}

/// B[n][n'] = \int m_{n,d} h_{n',d} du for n, n' <= N, with the series of
/// m_{n,d} truncated at k_max = ceil((N - n)/2) + 1 and Gauss-Gegenbauer
/// quadrature for the weight (1-u^2)^{d-3/2}.
pub fn biorthogonality_matrix(d: usize, big_n: usize) -> Result<DenseMatrix, FourierError> {
    require_d(d)?;
    if big_n == 0 {
        return Err(FourierError::InvalidArgument("N must be at least 1".into()));
    }
    let lambda = (d - 1) as f64;
    let rule = gauss_gegenbauer(lambda, big_n + 5)?;
    let pre = weight_constant(d) / factorial(d - 1);
    let nodes: Vec<f64> = rule.nodes().to_vec();
    let h: Vec<Vec<f64>> = nodes
        .iter()
        .map(|&u| h_poly_table(d, big_n, u))
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::with_capacity(big_n + 1);
    for n in 0..=big_n {
        let k_max = (big_n - n).div_ceil(2) + 1;
        let series: Vec<f64> = nodes
            .iter()
            .map(|&u| pre * series_terms(d, n, u, k_max + 1).iter().sum::<f64>())
            .collect();
        let row: Vec<f64> = (0..=big_n)
            .map(|np| {
                rule.weights()
                    .iter()
                    .zip(&series)
                    .zip(&h)
                    .map(|((w, s), hv)| w * s * hv[np])
                    .sum()
            })
            .collect();
        rows.push(row);
    }
    Ok(DenseMatrix::from_rows(&rows)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MndMethod {
    ClosedFormD2,
    GegenbauerSeries,
    TorusQuadrature,
}

/// A value of m_{n,d}(u) with an accuracy indicator (Cesaro residual or
/// standard error; zero for closed forms).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MndValue {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MndEvaluator {
    pub d: usize,
    pub n: usize,
    pub method: MndMethod,
    pub terms: usize,
    pub delta: f64,
    pub budget: usize,
    pub seed: u64,
}

impl MndEvaluator {
    pub fn new(d: usize, n: usize, method: MndMethod) -> Result<Self, FourierError> {
        require_d(d)?;
        if method == MndMethod::ClosedFormD2 && d != 2 {
            return Err(FourierError::Unsupported(format!(
                "the closed form exists only for d = 2, got d = {d}"
            )));
        }
        if method == MndMethod::TorusQuadrature && d > 3 {
            return Err(FourierError::Unsupported(format!(
                "Monte Carlo means are limited to d <= 3, got d = {d}"
            )));
        }
        Ok(Self {
            d,
            n,
            method,
            terms: DEFAULT_TERMS,
            delta: DEFAULT_DELTA,
            budget: if d == 2 { 2_000_000 } else { 10_000_000 },
            seed: DEFAULT_SEED,
        })
    }

    pub fn with_terms(mut self, terms: usize) -> Self {
        self.terms = terms;
        self
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn eval(&self, u: f64) -> Result<MndValue, FourierError> {
        match self.method {
            MndMethod::ClosedFormD2 => Ok(MndValue {
                value: m_d2_closed_u(self.n, u)?,
                error: 0.0,
            }),
            MndMethod::GegenbauerSeries => {
                let s = m_series_with_delta(self.d, self.n, u, self.terms, self.delta)?;
                Ok(MndValue {
                    value: s.value,
                    error: s.residual,
                })
            }
            MndMethod::TorusQuadrature => {
                if u.abs() >= 1.0 {
                    return Ok(MndValue { value: 0.0, error: 0.0 });
                }
                let e = m_torus_quadrature(self.d, self.n, u, self.budget, self.seed)?;
                Ok(MndValue {
                    value: e.mean,
                    error: e.std_error,
                })
            }
        }
    }
}
