use std::ops::{Add, Mul, Sub};

/// A polynomial on [-1, 1] stored in the Chebyshev basis,
/// p(u) = sum_k c_k T_k(u).
///
/// Kernels of the form (sin theta)^j times a trigonometric polynomial in
/// theta are polynomials in u = cos theta; this representation gives their
/// u-derivatives of every order without numerical differentiation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChebSeries {
    coeffs: Vec<f64>,
}

impl ChebSeries {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![] }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// T_n; negative indices use T_{-n} = T_n.
    pub fn t(n: i64) -> Self {
        let n = n.unsigned_abs() as usize;
        let mut coeffs = vec![0.0; n + 1];
        coeffs[n] = 1.0;
        Self { coeffs }
    }

    /// (1 - u^2)^k
    pub fn one_minus_square_pow(k: usize) -> Self {
        let base = Self::new(vec![0.5, 0.0, -0.5]);
        (0..k).fold(Self::constant(1.0), |acc, _| &acc * &base)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, u: f64) -> f64 {
        let n = self.coeffs.len();
        if n == 0 {
            return 0.0;
        }
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs[1..].iter().rev() {
            let b0 = c + 2.0 * u * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + u * b1 - b2
    }

    pub fn derivative(&self) -> Self {
        let n = self.coeffs.len();
        if n <= 1 {
            return Self::zero();
        }
        let mut d = vec![0.0; n + 1];
        for k in (1..n).rev() {
            d[k - 1] = d[k + 1] + 2.0 * k as f64 * self.coeffs[k];
        }
        d[0] *= 0.5;
        d.truncate(n - 1);
        Self::new(d)
    }

    pub fn nth_derivative(&self, order: usize) -> Self {
        (0..order).fold(self.clone(), |p, _| p.derivative())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }
}

impl Add for &ChebSeries {
    type Output = ChebSeries;
    fn add(self, rhs: &ChebSeries) -> ChebSeries {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ChebSeries::new(
            (0..n)
                .map(|k| self.coeffs.get(k).unwrap_or(&0.0) + rhs.coeffs.get(k).unwrap_or(&0.0))
                .collect(),
        )
    }
}

impl Sub for &ChebSeries {
    type Output = ChebSeries;
    fn sub(self, rhs: &ChebSeries) -> ChebSeries {
        self + &rhs.scale(-1.0)
    }
}

impl Mul for &ChebSeries {
    type Output = ChebSeries;
    /// T_i T_j = (T_{i+j} + T_{|i-j|}) / 2
    fn mul(self, rhs: &ChebSeries) -> ChebSeries {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return ChebSeries::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                let half = 0.5 * a * b;
                out[i + j] += half;
                out[i.abs_diff(j)] += half;
            }
        }
        ChebSeries::new(out)
    }
}
