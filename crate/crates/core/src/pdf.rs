//! Positive definiteness of l1-invariant functions on T^d.
//!
//! f is positive definite iff every f_n >= 0. It is strictly positive definite
//! iff in addition, for every pair 0 <= n < l, some m >= 0 has f_{n+ml} > 0 or
//! f_{(l-n)+ml} > 0. For eventually periodic positivity patterns (residue
//! classes mod q) the pair condition reduces to a finite check: for every
//! divisor g of q the classes (R mod g) and (-R mod g) must cover Z_g.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{symmetric_eigen, DenseMatrix, NumericsError};
use crate::summability::{synth, CoeffSeq, SummabilityError};
use crate::torus::TorusPoint;

/// Points closer than this (max per-axis geodesic distance) count as equal.
pub const MIN_POINT_SEPARATION: f64 = 1e-9;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum PdfError {
    #[error("strict positive definiteness needs a positive definite input; coefficient {0} is negative")]
    NotPositiveDefinite(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Summability(#[from] SummabilityError),

    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PdfVerdict {
    pub pdf: bool,
    /// First index with a negative coefficient.
    pub witness: Option<usize>,
}

/// A residue class c mod g reached by neither R nor -R.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverGap {
    pub divisor: u64,
    pub residue: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpdfVerdict {
    pub spdf: bool,
    /// Smallest failing pair (n, l), ordered by l then n.
    pub witness: Option<(u64, u64)>,
    pub gap: Option<CoverGap>,
}

pub fn pdf_check(c: &CoeffSeq) -> Result<PdfVerdict, PdfError> {
    c.validate()?;
    // tail entries are positive by construction
    let witness = c.head.iter().position(|&v| v < 0.0);
    Ok(PdfVerdict {
        pdf: witness.is_none(),
        witness,
    })
}

fn divisors(q: u64) -> Vec<u64> {
    (1..=q).filter(|g| q.is_multiple_of(*g)).collect()
}

/// First residue class not covered by R and -R modulo some divisor of q.
pub fn divisor_cover_gap(modulus: u64, residues: &[u64]) -> Option<CoverGap> {
    for g in divisors(modulus) {
        let mut hit = vec![false; g as usize];
        for &r in residues {
            hit[(r % g) as usize] = true;
            hit[((g - r % g) % g) as usize] = true;
        }
        if let Some(c) = hit.iter().position(|h| !h) {
            return Some(CoverGap {
                divisor: g,
                residue: c as u64,
            });
        }
    }
    None
}

/// Whether some m >= 0 makes n + m l or (l - n) + m l a positive index.
/// Exact: beyond `periodic_from` positivity repeats with period q, so q
/// further steps past that point decide the question.
pub fn pair_satisfied(c: &CoeffSeq, n: u64, l: u64) -> bool {
    assert!(n < l, "pairs need n < l");
    let (q, _) = c.tail_pattern();
    let start = c.periodic_from();
    let reach = start.div_ceil(l) + q;
    (0..=reach).any(|m| c.is_positive(n + m * l) || c.is_positive(l - n + m * l))
}

/// Decide strict positive definiteness. Requires a positive definite input.
pub fn spdf_check(c: &CoeffSeq) -> Result<SpdfVerdict, PdfError> {
    let pdf = pdf_check(c)?;
    if let Some(i) = pdf.witness {
        return Err(PdfError::NotPositiveDefinite(i));
    }
    let (q, residues) = c.tail_pattern();
    let Some(gap) = divisor_cover_gap(q, &residues) else {
        return Ok(SpdfVerdict {
            spdf: true,
            witness: None,
            gap: None,
        });
    };
    // A failing pair exists with l <= 2 T + 2 g: take l a multiple of g with
    // n, l - n >= T and n in the uncovered class.
    let t = c.periodic_from();
    let l_max = 2 * t + 2 * gap.divisor;
    for l in 1..=l_max {
        for n in 0..l {
            if !pair_satisfied(c, n, l) {
                return Ok(SpdfVerdict {
                    spdf: false,
                    witness: Some((n, l)),
                    gap: Some(gap),
                });
            }
        }
    }
    unreachable!("a failing pair with l <= {l_max} always exists when the cover has a gap")
}

/// Direct search for the first failing pair with l <= l_max, trying m <= m_max.
pub fn spdf_brute_force(c: &CoeffSeq, l_max: u64, m_max: u64) -> Option<(u64, u64)> {
    for l in 1..=l_max {
        for n in 0..l {
            let ok = (0..=m_max).any(|m| c.is_positive(n + m * l) || c.is_positive(l - n + m * l));
            if !ok {
                return Some((n, l));
            }
        }
    }
    None
}

/// Points on T^d and an l1-invariant kernel truncated at `truncation`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramSpec {
    d: usize,
    points: Vec<TorusPoint>,
    kernel: CoeffSeq,
    truncation: usize,
}

impl GramSpec {
    pub fn new(d: usize, points: Vec<TorusPoint>, kernel: CoeffSeq, truncation: usize) -> Result<Self, PdfError> {
        kernel.validate()?;
        if let Some(p) = points.iter().find(|p| p.dim() != d) {
            return Err(PdfError::InvalidArgument(format!(
                "point has {} coordinates, expected {d}",
                p.dim()
            )));
        }
        for i in 0..points.len() {
            for j in 0..i {
                let dist = points[i].distance(&points[j]).expect("dimensions checked");
                if dist <= MIN_POINT_SEPARATION {
                    return Err(PdfError::InvalidArgument(format!("points {j} and {i} coincide")));
                }
            }
        }
        Ok(Self {
            d,
            points,
            kernel,
            truncation,
        })
    }

    pub fn points(&self) -> &[TorusPoint] {
        &self.points
    }
}

/// [f(Theta_i - Theta_j)]
#[allow(clippy::needless_range_loop)]
pub fn gram_matrix(spec: &GramSpec) -> Result<DenseMatrix, PdfError> {
    let n = spec.points.len();
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let diff = spec.points[i].sub(&spec.points[j]).expect("dimensions checked");
            let v = synth(spec.d, &spec.kernel, spec.truncation, &diff)?;
            rows[i][j] = v;
            rows[j][i] = v;
        }
    }
    Ok(DenseMatrix::from_rows(&rows)?)
}

pub fn min_eigenvalue(a: &DenseMatrix) -> Result<f64, PdfError> {
    if a.rows() != a.cols() || a.rows() == 0 {
        return Err(PdfError::InvalidArgument("need a nonempty square matrix".into()));
    }
    let eig = symmetric_eigen(a, false).map_err(|e| PdfError::InvalidArgument(e.to_string()))?;
    Ok(eig.values[0])
}

/// Points and weights with sum_ij w_i w_j f(Theta_i - Theta_j) < 0.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativeForm {
    pub points: Vec<TorusPoint>,
    pub weights: Vec<f64>,
    pub value: f64,
    /// f_n L^{2d} / 2 (n >= 1) or f_0 L^{2d} (n = 0): the value the
    /// construction should produce.
    pub predicted: f64,
}

/// For a kernel with f_n < 0: on the tensor grid with L > 2N + 1 points per
/// axis, weights cos(alpha . Theta_j) with |alpha|_1 = n isolate the single
/// Fourier mode alpha, so the form equals f_n L^{2d} / 2.
pub fn negative_form_witness(d: usize, c: &CoeffSeq, truncation: usize) -> Result<Option<NegativeForm>, PdfError> {
    if d == 0 {
        return Err(PdfError::InvalidArgument("dimension must be positive".into()));
    }
    let verdict = pdf_check(c)?;
    let Some(n) = verdict.witness else {
        return Ok(None);
    };
    if n > truncation {
        return Err(PdfError::InvalidArgument(format!(
            "negative coefficient {n} lies beyond the truncation {truncation}"
        )));
    }
    let l = 2 * truncation + 2;
    let total = l.pow(d as u32);
    let step = 2.0 * std::f64::consts::PI / l as f64;
    let mut points = Vec::with_capacity(total);
    for idx in 0..total {
        let mut rest = idx;
        let angles: Vec<f64> = (0..d)
            .map(|_| {
                let k = rest % l;
                rest /= l;
                k as f64 * step
            })
            .collect();
        points.push(TorusPoint::new(angles).expect("finite"));
    }
    // alpha = (n, 0, ..., 0)
    let weights: Vec<f64> = points.iter().map(|p| (n as f64 * p.angles()[0]).cos()).collect();
    let mut value = 0.0;
    for (i, pi) in points.iter().enumerate() {
        for (j, pj) in points.iter().enumerate() {
            if weights[i] == 0.0 || weights[j] == 0.0 {
                continue;
            }
            let diff = pi.sub(pj).expect("same dimension");
            value += weights[i] * weights[j] * synth(d, c, truncation, &diff)?;
        }
    }
    let lf = total as f64;
    let predicted = if n == 0 {
        c.coefficient(0) * lf * lf
    } else {
        c.coefficient(n) * lf * lf / 2.0
    };
    Ok(Some(NegativeForm {
        points,
        weights,
        value,
        predicted,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::summability::Tail;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn residues(n0: u64, modulus: u64, r: Vec<u64>) -> Tail {
        Tail::ResiduesPositive {
            n0,
            modulus,
            residues: r,
        }
    }

    fn random_points(rng: &mut ChaCha8Rng, d: usize, count: usize) -> Vec<TorusPoint> {
        (0..count)
            .map(|_| TorusPoint::new((0..d).map(|_| rng.random_range(-PI..PI)).collect()).unwrap())
            .collect()
    }

    fn fejer(n: usize) -> CoeffSeq {
        CoeffSeq::finite((0..n).map(|k| 1.0 - k as f64 / n as f64).collect()).unwrap()
    }

    #[test]
    fn pdf_examples() {
        let v = pdf_check(&CoeffSeq::finite(vec![1.0, 0.5, 0.25]).unwrap()).unwrap();
        assert_eq!(
            v,
            PdfVerdict {
                pdf: true,
                witness: None
            }
        );
        let v = pdf_check(&CoeffSeq::finite(vec![1.0, -0.1]).unwrap()).unwrap();
        assert_eq!(
            v,
            PdfVerdict {
                pdf: false,
                witness: Some(1)
            }
        );
        assert!(pdf_check(&fejer(8)).unwrap().pdf);
    }

    #[test]
    fn spdf_examples() {
        let all = CoeffSeq::new(vec![], Tail::AllPositiveFrom { n0: 0 }).unwrap();
        assert!(spdf_check(&all).unwrap().spdf);
        for n0 in [0, 3, 10] {
            let c = CoeffSeq::new(vec![], Tail::AllPositiveFrom { n0 }).unwrap();
            assert!(spdf_check(&c).unwrap().spdf, "n0={n0}");
        }

        let odd = CoeffSeq::new(vec![], residues(0, 2, vec![1])).unwrap();
        let v = spdf_check(&odd).unwrap();
        assert!(!v.spdf);
        assert_eq!(v.witness, Some((0, 2)));
        assert_eq!(v.gap, Some(CoverGap { divisor: 2, residue: 0 }));
        let odd_head = CoeffSeq::new(vec![0.0], residues(0, 2, vec![1])).unwrap();
        assert_eq!(spdf_check(&odd_head).unwrap().witness, Some((0, 2)));

        let finite = CoeffSeq::finite(vec![1.0, 1.0]).unwrap();
        let v = spdf_check(&finite).unwrap();
        assert!(!v.spdf);
        let (n, l) = v.witness.unwrap();
        assert!(!pair_satisfied(&finite, n, l));
        assert_eq!((n, l), (2, 4));

        let head = CoeffSeq::new(vec![1.0, 0.5], Tail::AllPositiveFrom { n0: 2 }).unwrap();
        assert!(spdf_check(&head).unwrap().spdf);

        let bad = CoeffSeq::finite(vec![1.0, -1.0]).unwrap();
        assert_eq!(spdf_check(&bad).unwrap_err(), PdfError::NotPositiveDefinite(1));
    }

    #[test]
    fn cover_certificate() {
        assert_eq!(divisor_cover_gap(1, &[0]), None);
        assert!(divisor_cover_gap(1, &[]).is_some());
        // 1 and -1 cover Z_3 only together with 0
        assert_eq!(divisor_cover_gap(3, &[1]), Some(CoverGap { divisor: 3, residue: 0 }));
        assert_eq!(divisor_cover_gap(3, &[0, 1]), None);
        assert_eq!(divisor_cover_gap(4, &[0, 1]), Some(CoverGap { divisor: 4, residue: 2 }));
        assert_eq!(divisor_cover_gap(4, &[1, 2]), Some(CoverGap { divisor: 4, residue: 0 }));
        assert_eq!(divisor_cover_gap(4, &[0, 1, 2]), None);
        assert_eq!(divisor_cover_gap(6, &[1, 2]), Some(CoverGap { divisor: 3, residue: 0 }));
    }

    #[test]
    fn gram_examples() {
        let one = GramSpec::new(2, vec![TorusPoint::new(vec![0.3, 0.2]).unwrap()], fejer(4), 3).unwrap();
        let g = gram_matrix(&one).unwrap();
        assert_eq!((g.rows(), g.cols()), (1, 1));
        assert_abs_diff_eq!(
            g[(0, 0)],
            synth(2, &fejer(4), 3, &TorusPoint::origin(2)).unwrap(),
            epsilon = 1e-14
        );

        let pts = vec![
            TorusPoint::new(vec![0.1, 0.2]).unwrap(),
            TorusPoint::new(vec![-1.0, 2.5]).unwrap(),
        ];
        let g = gram_matrix(&GramSpec::new(2, pts, CoeffSeq::delta(1), 1).unwrap()).unwrap();
        assert_abs_diff_eq!(g[(0, 0)], 4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g[(1, 1)], 4.0, epsilon = 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let g = gram_matrix(&GramSpec::new(2, random_points(&mut rng, 2, 12), fejer(6), 5).unwrap()).unwrap();
        assert!(g.asymmetry() <= 1e-14);

        let dup = vec![
            TorusPoint::new(vec![0.1]).unwrap(),
            TorusPoint::new(vec![0.1 + 2.0 * PI]).unwrap(),
        ];
        assert!(GramSpec::new(1, dup, fejer(2), 1).is_err());
    }

    #[test]
    fn min_eigenvalue_examples() {
        assert_abs_diff_eq!(min_eigenvalue(&DenseMatrix::identity(3)).unwrap(), 1.0, epsilon = 1e-14);
        let m = DenseMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, -1.0]]).unwrap();
        assert_abs_diff_eq!(min_eigenvalue(&m).unwrap(), -1.0, epsilon = 1e-14);
        let skew = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(min_eigenvalue(&skew).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let g = gram_matrix(&GramSpec::new(3, random_points(&mut rng, 3, 15), fejer(7), 6).unwrap()).unwrap();
        assert!(min_eigenvalue(&g).unwrap() >= -1e-8 * g.frobenius_norm());
    }

    #[test]
    fn soundness_of_pdf_direction() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..20 {
            let d = rng.random_range(2..=3);
            let trunc = rng.random_range(0..=10);
            let head: Vec<f64> = (0..=trunc).map(|_| rng.random_range(0.0..1.0)).collect();
            let c = CoeffSeq::finite(head).unwrap();
            let count = rng.random_range(1..=15);
            let g = gram_matrix(&GramSpec::new(d, random_points(&mut rng, d, count), c, trunc).unwrap()).unwrap();
            assert!(min_eigenvalue(&g).unwrap() >= -1e-8 * g.frobenius_norm().max(1e-300));
        }
    }

    #[test]
    fn negative_form_from_witness() {
        let c = CoeffSeq::finite(vec![1.0, 0.4, -0.2, 0.3]).unwrap();
        for d in 1..=2 {
            let w = negative_form_witness(d, &c, 3).unwrap().unwrap();
            assert!(w.value < 0.0);
            assert!(
                (w.value - w.predicted).abs() <= 1e-8 * w.predicted.abs(),
                "{} vs {}",
                w.value,
                w.predicted
            );
        }
        let c0 = CoeffSeq::finite(vec![-0.5, 1.0]).unwrap();
        let w = negative_form_witness(1, &c0, 1).unwrap().unwrap();
        assert!(w.value < 0.0);
        assert!(negative_form_witness(1, &fejer(3), 2).unwrap().is_none());
    }

    #[test]
    fn certificate_agrees_with_brute_force_on_examples() {
        let cases = vec![
            CoeffSeq::new(vec![], residues(0, 2, vec![1])).unwrap(),
            CoeffSeq::new(vec![0.0, 0.0, 1.0], residues(5, 4, vec![1, 2])).unwrap(),
            CoeffSeq::new(vec![1.0], residues(0, 6, vec![1, 2, 3])).unwrap(),
            CoeffSeq::finite(vec![0.0, 1.0, 0.0, 2.0]).unwrap(),
        ];
        for c in cases {
            let v = spdf_check(&c).unwrap();
            assert_eq!(v.witness, spdf_brute_force(&c, 40, 200), "{c:?}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]
        #[test]
        fn certificate_agrees_with_brute_force(
            head in prop::collection::vec(prop_oneof![Just(0.0), 0.1f64..1.0], 0..6),
            n0 in 0u64..8,
            modulus in 1u64..=12,
            mask in 1u64..4096,
        ) {
            let r: Vec<u64> = (0..modulus).filter(|i| mask >> i & 1 == 1).collect();
            prop_assume!(!r.is_empty());
            let c = CoeffSeq::new(head, residues(n0, modulus, r)).unwrap();
            // bounds chosen so every failing pair has l <= 40
            prop_assume!(2 * c.periodic_from() + 2 * modulus <= 40);
            let v = spdf_check(&c).unwrap();
            let brute = spdf_brute_force(&c, 40, 200);
            prop_assert_eq!(v.spdf, brute.is_none());
            prop_assert_eq!(v.witness, brute);
        }
    }
}
