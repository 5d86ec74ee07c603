//! Browser bindings: an m_{n,d} curve, a Dirichlet kernel field on T^2 and a
//! positive definiteness verdict. The `*_impl` functions are plain Rust so
//! they can be tested natively.

use l1torus::bspline_fourier::{m0_closed, m_d2_closed_u, m_series};
use l1torus::kernels::dirichlet_fast;
use l1torus::pdf::{pdf_check, spdf_check};
use l1torus::summability::{CoeffSeq, Tail};
use l1torus::torus::TorusPoint;
use wasm_bindgen::prelude::*;

const MAX_GRID: usize = 512;
const MAX_DEGREE: usize = 60;

/// Interior grid u_i = -1 + 2 i / (points + 1).
pub fn u_grid(points: usize) -> Vec<f64> {
    (1..=points)
        .map(|i| -1.0 + 2.0 * i as f64 / (points + 1) as f64)
        .collect()
}

pub fn mnd_curve_impl(d: usize, n: usize, points: usize, terms: usize) -> Result<Vec<f64>, String> {
    if !(2..=6).contains(&d) || n > MAX_DEGREE || points == 0 || points > MAX_GRID {
        return Err(format!(
            "need 2 <= d <= 6, n <= {MAX_DEGREE}, 1 <= points <= {MAX_GRID}"
        ));
    }
    u_grid(points)
        .into_iter()
        .map(|u| {
            let v = if d == 2 {
                m_d2_closed_u(n, u)
            } else if n == 0 {
                m0_closed(d, u)
            } else {
                m_series(d, n, u, terms).map(|s| s.value)
            };
            v.map_err(|e| e.to_string())
        })
        .collect()
}

/// D_{n,2} on a res x res grid over [-pi, pi)^2, row-major with theta_2 fastest.
pub fn dirichlet_field_impl(n: usize, res: usize) -> Result<Vec<f64>, String> {
    if n > MAX_DEGREE || res == 0 || res > MAX_GRID {
        return Err(format!("need n <= {MAX_DEGREE} and 1 <= res <= {MAX_GRID}"));
    }
    let step = 2.0 * std::f64::consts::PI / res as f64;
    let mut out = Vec::with_capacity(res * res);
    for i in 0..res {
        for j in 0..res {
            let p = TorusPoint::new(vec![
                -std::f64::consts::PI + i as f64 * step,
                -std::f64::consts::PI + j as f64 * step,
            ])
            .map_err(|e| e.to_string())?;
            out.push(dirichlet_fast(2, n, &p).map_err(|e| e.to_string())?);
        }
    }
    Ok(out)
}

/// Verdict for a head of coefficients followed by a tail that is positive
/// exactly on the given residues mod `modulus` from `n0` on (empty residues:
/// zero tail).
pub fn pdf_verdict_impl(head: &[f64], n0: u64, modulus: u64, residues: &[u64]) -> Result<String, String> {
    let tail = if residues.is_empty() {
        Tail::Zero
    } else {
        Tail::ResiduesPositive {
            n0,
            modulus,
            residues: residues.to_vec(),
        }
    };
    let c = CoeffSeq::new(head.to_vec(), tail).map_err(|e| e.to_string())?;
    let pdf = pdf_check(&c).map_err(|e| e.to_string())?;
    if let Some(i) = pdf.witness {
        return Ok(format!("not positive definite: coefficient {i} is negative"));
    }
    let s = spdf_check(&c).map_err(|e| e.to_string())?;
    Ok(match (s.witness, s.gap) {
        (None, _) => "strictly positive definite".to_string(),
        (Some((n, l)), Some(g)) => format!(
            "positive definite, not strictly: no positive coefficient at n + m*l or (l - n) + m*l for (n, l) = ({n}, {l}); residue {} mod {} is missed by R and -R",
            g.residue, g.divisor
        ),
        (Some((n, l)), None) => format!("positive definite, not strictly: failing pair (n, l) = ({n}, {l})"),
    })
}

#[wasm_bindgen]
pub fn mnd_curve(d: usize, n: usize, points: usize, terms: usize) -> Result<Vec<f64>, JsError> {
    mnd_curve_impl(d, n, points, terms).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn mnd_grid(points: usize) -> Vec<f64> {
    u_grid(points)
}

#[wasm_bindgen]
pub fn dirichlet_field(n: usize, res: usize) -> Result<Vec<f64>, JsError> {
    dirichlet_field_impl(n, res).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn pdf_verdict(head: Vec<f64>, n0: u64, modulus: u64, residues: Vec<u64>) -> Result<String, JsError> {
    pdf_verdict_impl(&head, n0, modulus, &residues).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_values() {
        let v = mnd_curve_impl(2, 0, 9, 200).unwrap();
        assert!(v.iter().all(|x| (x - 0.5).abs() < 1e-14));
        let v = mnd_curve_impl(3, 0, 1, 200).unwrap();
        assert!((v[0] - std::f64::consts::FRAC_1_PI).abs() < 1e-14);
        assert_eq!(mnd_curve_impl(3, 2, 5, 500).unwrap().len(), 5);
        assert!(mnd_curve_impl(1, 0, 5, 10).is_err());
        assert!(mnd_curve_impl(2, 0, 0, 10).is_err());
    }

    #[test]
    fn field_values() {
        let f = dirichlet_field_impl(1, 4).unwrap();
        assert_eq!(f.len(), 16);
        // theta = (-pi, -pi): 1 + 2 cos(pi) + 2 cos(pi)
        assert!((f[0] + 3.0).abs() < 1e-12);
        // theta = (0, 0) at index (2, 2)
        assert!((f[2 * 4 + 2] - 5.0).abs() < 1e-12);
        assert!(dirichlet_field_impl(1, 0).is_err());
    }

    #[test]
    fn verdicts() {
        assert_eq!(
            pdf_verdict_impl(&[1.0, 0.5], 2, 1, &[0]).unwrap(),
            "strictly positive definite"
        );
        assert!(pdf_verdict_impl(&[1.0, -0.1], 0, 1, &[])
            .unwrap()
            .contains("coefficient 1"));
        assert!(pdf_verdict_impl(&[], 0, 2, &[1]).unwrap().contains("(0, 2)"));
        assert!(pdf_verdict_impl(&[1.0], 0, 0, &[1]).is_err());
    }
}
