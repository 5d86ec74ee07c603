//! l1-invariant functions f = sum_n f_n E_n on T^d, given by coefficient
//! sequences, together with partial sums over l1 balls and the representation
//! f = [cos theta_1, ..., cos theta_d] F_d + f_0.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::divdiff::{divided_difference_cos, DivDiffError, SmoothFn};
use crate::kernels::{dirichlet_fast, e_fn_upto, h_series, KernelError};
use crate::numerics::{shell_cached, torus_trapezoid, NumericsError};
use crate::polys::ChebSeries;
use crate::torus::TorusPoint;

pub const DEFAULT_TAIL_DECAY: f64 = 0.5;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum SummabilityError {
    #[error("invalid coefficient sequence: {0}")]
    InvalidCoefficients(String),

    #[error("grid with {points} points per axis cannot resolve degree {degree}; need more than {needed}")]
    Resolution {
        points: usize,
        degree: usize,
        needed: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Kernel(#[from] KernelError),

    #[error(transparent)]
    DivDiff(#[from] DivDiffError),

    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Which indices beyond the explicit head carry positive coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Tail {
    Zero,
    AllPositiveFrom { n0: u64 },
    ResiduesPositive { n0: u64, modulus: u64, residues: Vec<u64> },
}

/// Coefficients f_0, f_1, ... of an l1-invariant function: explicit values
/// for n < head.len(), then the tail rule. Positive tail entries are set to
/// tail_decay^n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffSeq {
    pub head: Vec<f64>,
    #[serde(default = "default_tail")]
    pub tail: Tail,
    #[serde(default = "default_decay")]
    pub tail_decay: f64,
}

fn default_tail() -> Tail {
    Tail::Zero
}

fn default_decay() -> f64 {
    DEFAULT_TAIL_DECAY
}

impl CoeffSeq {
    pub fn new(head: Vec<f64>, tail: Tail) -> Result<Self, SummabilityError> {
        let c = Self {
            head,
            tail,
            tail_decay: DEFAULT_TAIL_DECAY,
        };
        c.validate()?;
        Ok(c)
    }

    /// Finite sequence with zero tail.
    pub fn finite(head: Vec<f64>) -> Result<Self, SummabilityError> {
        Self::new(head, Tail::Zero)
    }

    /// f_n = 1 at a single index.
    pub fn delta(n: usize) -> Self {
        let mut head = vec![0.0; n + 1];
        head[n] = 1.0;
        Self::finite(head).expect("finite head")
    }

    pub fn with_decay(mut self, decay: f64) -> Result<Self, SummabilityError> {
        self.tail_decay = decay;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), SummabilityError> {
        let bad = |msg: String| Err(SummabilityError::InvalidCoefficients(msg));
        if let Some((i, v)) = self.head.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return bad(format!("head entry {i} is {v}"));
        }
        if !(self.tail_decay > 0.0 && self.tail_decay < 1.0) {
            return bad(format!("tail decay must lie in (0, 1), got {}", self.tail_decay));
        }
        if let Tail::ResiduesPositive { modulus, residues, .. } = &self.tail {
            if *modulus == 0 {
                return bad("residue modulus must be positive".into());
            }
            if residues.is_empty() {
                return bad("residue set must be nonempty".into());
            }
            if let Some(r) = residues.iter().find(|&&r| r >= *modulus) {
                return bad(format!("residue {r} is not below the modulus {modulus}"));
            }
        }
        Ok(())
    }

    /// Whether the tail rule marks index n (n >= head.len()) positive.
    pub fn tail_positive(&self, n: u64) -> bool {
        match &self.tail {
            Tail::Zero => false,
            Tail::AllPositiveFrom { n0 } => n >= *n0,
            Tail::ResiduesPositive { n0, modulus, residues } => n >= *n0 && residues.contains(&(n % modulus)),
        }
    }

    pub fn coefficient(&self, n: usize) -> f64 {
        if let Some(v) = self.head.get(n) {
            return *v;
        }
        if self.tail_positive(n as u64) {
            self.tail_decay.powi(n as i32)
        } else {
            0.0
        }
    }

    pub fn is_positive(&self, n: u64) -> bool {
        match self.head.get(n as usize) {
            Some(v) => *v > 0.0,
            None => self.tail_positive(n),
        }
    }

    /// (modulus, residues) describing the positive indices far out.
    pub fn tail_pattern(&self) -> (u64, Vec<u64>) {
        match &self.tail {
            Tail::Zero => (1, vec![]),
            Tail::AllPositiveFrom { .. } => (1, vec![0]),
            Tail::ResiduesPositive { modulus, residues, .. } => {
                let mut r = residues.clone();
                r.sort_unstable();
                r.dedup();
                (*modulus, r)
            }
        }
    }

    /// First index from which positivity is purely periodic.
    pub fn periodic_from(&self) -> u64 {
        let head = self.head.len() as u64;
        match &self.tail {
            Tail::Zero => head,
            Tail::AllPositiveFrom { n0 } | Tail::ResiduesPositive { n0, .. } => head.max(*n0),
        }
    }

    /// [f_0, ..., f_n]
    pub fn truncated(&self, n: usize) -> Vec<f64> {
        (0..=n).map(|k| self.coefficient(k)).collect()
    }
}

/// sum_{n <= N} f_n E_n(theta)
pub fn synth(d: usize, c: &CoeffSeq, truncation: usize, theta: &TorusPoint) -> Result<f64, SummabilityError> {
    let e = e_fn_upto(d, truncation, theta)?;
    Ok(e.iter().enumerate().map(|(n, v)| c.coefficient(n) * v).sum())
}

/// Values of a function on the tensor grid theta_k = -pi + 2 pi k / L.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTorusFn {
    d: usize,
    per_axis: usize,
    values: Vec<Complex64>,
}

impl SampledTorusFn {
    pub fn from_fn<F: FnMut(&[f64]) -> Complex64>(
        d: usize,
        per_axis: usize,
        mut f: F,
    ) -> Result<Self, SummabilityError> {
        let rule = torus_trapezoid(d, per_axis)?;
        let values: Vec<Complex64> = (0..rule.len()).map(|i| f(rule.node(i))).collect();
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(SummabilityError::InvalidArgument(
                "sampled values must be finite".into(),
            ));
        }
        Ok(Self { d, per_axis, values })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn per_axis(&self) -> usize {
        self.per_axis
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    fn nodes(&self) -> Result<crate::numerics::QuadRule, SummabilityError> {
        Ok(torus_trapezoid(self.d, self.per_axis)?)
    }

    /// (2 pi)^{-d} \int f(y) e^{-i alpha . y} dy by the grid rule.
    pub fn coefficient(&self, alpha: &[i64]) -> Result<Complex64, SummabilityError> {
        if alpha.len() != self.d {
            return Err(SummabilityError::InvalidArgument(format!(
                "multi-index has {} entries, expected {}",
                alpha.len(),
                self.d
            )));
        }
        let rule = self.nodes()?;
        let mut total = Complex64::new(0.0, 0.0);
        for (i, v) in self.values.iter().enumerate() {
            let phase: f64 = alpha.iter().zip(rule.node(i)).map(|(&a, y)| a as f64 * y).sum();
            total += v * Complex64::from_polar(rule.weights()[i], -phase);
        }
        Ok(total)
    }

    fn check_resolution(&self, n: usize) -> Result<(), SummabilityError> {
        if self.per_axis <= 2 * n {
            return Err(SummabilityError::Resolution {
                points: self.per_axis,
                degree: n,
                needed: 2 * n,
            });
        }
        Ok(())
    }
}

/// S_n f(theta) = sum_{|alpha|_1 <= n} f_alpha e^{i alpha . theta}, with the
/// coefficients taken from the grid.
pub fn partial_sum(f: &SampledTorusFn, n: usize, theta: &TorusPoint) -> Result<Complex64, SummabilityError> {
    f.check_resolution(n)?;
    check_dim(f.d, theta)?;
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..=n {
        for alpha in shell_cached(f.d, k)?.points() {
            let phase: f64 = alpha.iter().zip(theta.angles()).map(|(&a, t)| a as f64 * t).sum();
            total += f.coefficient(alpha)? * Complex64::from_polar(1.0, phase);
        }
    }
    Ok(total)
}

/// S_n f(theta) = (2 pi)^{-d} \int f(y) D_{n,d}(theta - y) dy by the grid rule.
pub fn partial_sum_convolution(
    f: &SampledTorusFn,
    n: usize,
    theta: &TorusPoint,
) -> Result<Complex64, SummabilityError> {
    f.check_resolution(n)?;
    check_dim(f.d, theta)?;
    let rule = f.nodes()?;
    let mut total = Complex64::new(0.0, 0.0);
    for (i, v) in f.values.iter().enumerate() {
        let y = TorusPoint::new(rule.node(i).to_vec()).expect("grid nodes are finite");
        let diff = theta.sub(&y).expect("dimensions checked");
        total += v * rule.weights()[i] * dirichlet_fast(f.d, n, &diff)?;
    }
    Ok(total)
}

fn check_dim(d: usize, theta: &TorusPoint) -> Result<(), SummabilityError> {
    if theta.dim() != d {
        return Err(SummabilityError::InvalidArgument(format!(
            "point has {} coordinates, expected {d}",
            theta.dim()
        )));
    }
    Ok(())
}

/// F_d = sum_{1 <= n <= N} f_n H_{n,d}, with f_0 kept aside, so that
/// f(theta) = [cos theta_1, ..., cos theta_d] F_d + f_0.
#[derive(Debug, Clone, PartialEq)]
pub struct FdFunction {
    d: usize,
    series: ChebSeries,
    constant: f64,
}

impl FdFunction {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn series(&self) -> &ChebSeries {
        &self.series
    }

    /// The coefficient f_0, added outside the divided difference.
    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// [cos theta_1, ..., cos theta_d] F_d + f_0
    pub fn represent(&self, theta: &TorusPoint) -> Result<f64, SummabilityError> {
        check_dim(self.d, theta)?;
        Ok(divided_difference_cos(&self.series, theta)? + self.constant)
    }
}

impl SmoothFn for FdFunction {
    fn eval(&self, u: f64, order: usize) -> f64 {
        SmoothFn::eval(&self.series, u, order)
    }

    fn max_order(&self) -> usize {
        usize::MAX
    }
}

pub fn build_fd(d: usize, c: &CoeffSeq, truncation: usize) -> Result<FdFunction, SummabilityError> {
    if d < 2 {
        return Err(SummabilityError::InvalidArgument(format!("F_d needs d >= 2, got {d}")));
    }
    let mut series = ChebSeries::zero();
    for n in 1..=truncation {
        let a = c.coefficient(n);
        if a != 0.0 {
            series = &series + &h_series(d, n)?.scale(a);
        }
    }
    Ok(FdFunction {
        d,
        series,
        constant: c.coefficient(0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{dirichlet, e_fn, h_fn};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn pt(v: &[f64]) -> TorusPoint {
        TorusPoint::new(v.to_vec()).unwrap()
    }

    fn plane_wave(alpha: Vec<i64>) -> impl Fn(&[f64]) -> Complex64 {
        move |y: &[f64]| {
            let phase: f64 = alpha.iter().zip(y).map(|(&a, t)| a as f64 * t).sum();
            Complex64::from_polar(1.0, phase)
        }
    }

    fn separated(rng: &mut ChaCha8Rng, d: usize) -> TorusPoint {
        loop {
            let t: Vec<f64> = (0..d).map(|_| rng.random_range(-PI..PI)).collect();
            let mut c: Vec<f64> = t.iter().map(|x| x.cos()).collect();
            c.sort_by(f64::total_cmp);
            if c.windows(2).all(|w| w[1] - w[0] >= 1e-2) {
                return pt(&t);
            }
        }
    }

    #[test]
    fn synth_examples() {
        let theta = pt(&[0.4, -1.7]);
        assert_abs_diff_eq!(synth(2, &CoeffSeq::delta(0), 5, &theta).unwrap(), 1.0);
        assert_abs_diff_eq!(
            synth(2, &CoeffSeq::delta(1), 5, &TorusPoint::origin(2)).unwrap(),
            4.0,
            epsilon = 1e-14
        );
        let c = CoeffSeq::finite(vec![1.0, 0.5]).unwrap();
        assert_abs_diff_eq!(synth(2, &c, 1, &pt(&[PI, PI])).unwrap(), -1.0, epsilon = 1e-14);
    }

    #[test]
    fn coefficient_rules() {
        let c = CoeffSeq::new(
            vec![1.0, -2.0],
            Tail::ResiduesPositive {
                n0: 4,
                modulus: 3,
                residues: vec![1],
            },
        )
        .unwrap();
        assert_eq!(c.coefficient(1), -2.0);
        assert_eq!(c.coefficient(3), 0.0);
        assert_eq!(c.coefficient(4), 0.5f64.powi(4));
        assert_eq!(c.coefficient(5), 0.0);
        assert_eq!(c.coefficient(7), 0.5f64.powi(7));
        assert_eq!(c.periodic_from(), 4);
        assert!(CoeffSeq::new(
            vec![],
            Tail::ResiduesPositive {
                n0: 0,
                modulus: 2,
                residues: vec![2]
            }
        )
        .is_err());
        assert!(CoeffSeq::finite(vec![f64::NAN]).is_err());
        assert!(CoeffSeq::finite(vec![1.0]).unwrap().with_decay(1.0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"head":[1,0.5],"tail":{"kind":"all-positive-from","n0":2}}"#;
        let c: CoeffSeq = serde_json::from_str(text).unwrap();
        assert_eq!(c.tail, Tail::AllPositiveFrom { n0: 2 });
        assert_eq!(c.tail_decay, DEFAULT_TAIL_DECAY);
        let back: CoeffSeq = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        let r: CoeffSeq = serde_json::from_str(
            r#"{"head":[],"tail":{"kind":"residues-positive","n0":0,"modulus":2,"residues":[1]}}"#,
        )
        .unwrap();
        assert!(r.validate().is_ok());
        let z: CoeffSeq = serde_json::from_str(r#"{"head":[1]}"#).unwrap();
        assert_eq!(z.tail, Tail::Zero);
    }

    #[test]
    fn partial_sum_examples() {
        let f = SampledTorusFn::from_fn(2, 12, plane_wave(vec![2, 1])).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..5 {
            let theta = pt(&[rng.random_range(-PI..PI), rng.random_range(-PI..PI)]);
            assert!(partial_sum(&f, 2, &theta).unwrap().norm() < 1e-12);
            let full = partial_sum(&f, 3, &theta).unwrap();
            let exact = plane_wave(vec![2, 1])(theta.angles());
            assert!((full - exact).norm() < 1e-12);
        }
        let d22 = SampledTorusFn::from_fn(2, 12, |y: &[f64]| {
            Complex64::new(dirichlet(2, 2, &TorusPoint::new(y.to_vec()).unwrap()).unwrap(), 0.0)
        })
        .unwrap();
        let v = partial_sum(&d22, 2, &TorusPoint::origin(2)).unwrap();
        assert_abs_diff_eq!(v.re, 13.0, epsilon = 1e-11);
        assert!(matches!(
            partial_sum(&d22, 6, &TorusPoint::origin(2)),
            Err(SummabilityError::Resolution { .. })
        ));
    }

    #[test]
    fn convolution_route_matches_direct_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for d in 2..=3usize {
            let l = if d == 2 { 16 } else { 12 };
            // a random trigonometric polynomial of per-axis degree <= 2
            let terms: Vec<(Vec<i64>, Complex64)> = (0..6)
                .map(|_| {
                    let alpha: Vec<i64> = (0..d).map(|_| rng.random_range(-2..=2)).collect();
                    (
                        alpha,
                        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                    )
                })
                .collect();
            let f = SampledTorusFn::from_fn(d, l, |y: &[f64]| {
                terms.iter().map(|(a, c)| c * plane_wave(a.clone())(y)).sum()
            })
            .unwrap();
            for n in 0..=5usize {
                if l <= 2 * n {
                    continue;
                }
                let theta = pt(&(0..d).map(|_| rng.random_range(-PI..PI)).collect::<Vec<_>>());
                let a = partial_sum(&f, n, &theta).unwrap();
                let b = partial_sum_convolution(&f, n, &theta).unwrap();
                assert!((a - b).norm() <= 1e-10, "d={d} n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn extraction_inverts_synthesis() {
        let c = CoeffSeq::finite(vec![0.7, -0.3, 0.25, 0.1, -0.05]).unwrap();
        for d in 2..=3usize {
            let f = SampledTorusFn::from_fn(d, 12, |y: &[f64]| {
                Complex64::new(synth(d, &c, 4, &TorusPoint::new(y.to_vec()).unwrap()).unwrap(), 0.0)
            })
            .unwrap();
            for n in 0..=5usize {
                for alpha in shell_cached(d, n).unwrap().points() {
                    let coeff = f.coefficient(alpha).unwrap();
                    assert!((coeff.re - c.coefficient(n)).abs() <= 1e-10, "d={d} alpha={alpha:?}");
                    assert!(coeff.im.abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn fd_examples() {
        let f = build_fd(2, &CoeffSeq::finite(vec![0.0, 1.0]).unwrap(), 1).unwrap();
        assert_abs_diff_eq!(
            f.represent(&pt(&[0.3, 1.2])).unwrap(),
            2.0 * 0.3f64.cos() + 2.0 * 1.2f64.cos(),
            epsilon = 1e-13
        );
        let f0 = build_fd(3, &CoeffSeq::delta(0), 4).unwrap();
        assert_eq!(f0.constant(), 1.0);
        assert_eq!(f0.series(), &ChebSeries::zero());
        assert!(build_fd(1, &CoeffSeq::delta(0), 1).is_err());
    }

    #[test]
    fn fd_single_shell_reproduces_e() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for d in 2..=4usize {
            for n in 1..=6usize {
                let f = build_fd(d, &CoeffSeq::delta(n), n).unwrap();
                for _ in 0..5 {
                    let theta = separated(&mut rng, d);
                    assert_abs_diff_eq!(
                        f.represent(&theta).unwrap(),
                        e_fn(d, n, &theta).unwrap(),
                        epsilon = 1e-8
                    );
                }
            }
        }
    }

    #[test]
    fn displayed_prefactor_is_opposite_sign() {
        // the (d+1)/2 sign convention yields -F_d for every d
        let sign = |d: usize| if d.div_ceil(2).is_multiple_of(2) { 1.0 } else { -1.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for d in 2..=7usize {
            for n in 1..=4usize {
                let t: f64 = rng.random_range(0.0..PI);
                let osc = if d % 2 == 0 {
                    -(n as f64 * t).sin()
                } else {
                    (n as f64 * t).cos()
                };
                let displayed = 2.0 * sign(d) * t.sin().powi(d as i32 - 1) * osc;
                assert_abs_diff_eq!(displayed, -h_fn(d, n, t).unwrap(), epsilon = 1e-13);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn divided_difference_characterization(
            d in 2usize..5,
            seed in 0u64..100_000,
            f0 in -1.0f64..1.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut head = vec![f0];
            head.extend((1..=6).map(|_| rng.random_range(-1.0..1.0)));
            let c = CoeffSeq::finite(head).unwrap();
            let f = build_fd(d, &c, 6).unwrap();
            let theta = separated(&mut rng, d);
            let direct = synth(d, &c, 6, &theta).unwrap();
            prop_assert!((f.represent(&theta).unwrap() - direct).abs() <= 1e-7);
        }
    }
}
