use std::ops::{Index, IndexMut};

use super::NumericsError;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, NumericsError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(NumericsError::InvalidArgument("ragged matrix rows".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn from_fn<F: FnMut(usize, usize) -> f64>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Largest |a_ij - a_ji|, or infinity for non-square input.
    pub fn asymmetry(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column j is the unit eigenvector of `values[j]`.
    pub vectors: Option<DenseMatrix>,
}

const MAX_SWEEPS: usize = 60;

/// Eigen-decomposition of a real symmetric matrix by Householder
/// tridiagonalization followed by implicit QL iteration.
pub fn symmetric_eigen(a: &DenseMatrix, want_vectors: bool) -> Result<SymmetricEigen, NumericsError> {
    let n = a.rows();
    if n != a.cols() {
        return Err(NumericsError::InvalidArgument(format!(
            "eigen-solver needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let scale = a.max_abs();
    if a.asymmetry() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(NumericsError::InvalidArgument(
            "eigen-solver needs a symmetric matrix".into(),
        ));
    }
    if n == 0 {
        return Ok(SymmetricEigen {
            values: vec![],
            vectors: want_vectors.then(|| DenseMatrix::zeros(0, 0)),
        });
    }
    let mut z = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    householder_tridiagonalize(&mut z, &mut d, &mut e);
    // e[i] couples i-1 and i; the QL sweep wants it shifted down by one
    e.rotate_left(1);
    e[n - 1] = 0.0;
    ql_implicit(&mut d, &mut e, &mut z)?;
    Ok(sorted(d, want_vectors.then_some(z)))
}

/// Eigen-decomposition of the symmetric tridiagonal matrix with the given
/// diagonal and off-diagonal (length n - 1).
pub fn tridiagonal_eigen(diag: &[f64], offdiag: &[f64], want_vectors: bool) -> Result<SymmetricEigen, NumericsError> {
    let n = diag.len();
    if n == 0 || offdiag.len() + 1 != n {
        return Err(NumericsError::InvalidArgument(format!(
            "tridiagonal matrix needs n >= 1 diagonal and n - 1 off-diagonal entries, got {} and {}",
            n,
            offdiag.len()
        )));
    }
    let mut d = diag.to_vec();
    let mut e = offdiag.to_vec();
    e.push(0.0);
    let mut z = DenseMatrix::identity(n);
    ql_implicit(&mut d, &mut e, &mut z)?;
    Ok(sorted(d, want_vectors.then_some(z)))
}

fn sorted(values: Vec<f64>, vectors: Option<DenseMatrix>) -> SymmetricEigen {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let vectors = vectors.map(|z| DenseMatrix::from_fn(n, n, |i, j| z[(i, order[j])]));
    SymmetricEigen {
        values: order.iter().map(|&i| values[i]).collect(),
        vectors,
    }
}

/// Householder reduction to tridiagonal form. On return `a` holds the
/// accumulated orthogonal transform, `d` the diagonal and `e[i]` the
/// sub-diagonal entry between rows i-1 and i (e[0] = 0).
fn householder_tridiagonalize(a: &mut DenseMatrix, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[(i, k)].abs()).sum();
            if scale == 0.0 {
                e[i] = a[(i, l)];
            } else {
                for k in 0..=l {
                    a[(i, k)] /= scale;
                    h += a[(i, k)] * a[(i, k)];
                }
                let f = a[(i, l)];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[(i, l)] = f - g;
                let mut f = 0.0;
                for j in 0..=l {
                    a[(j, i)] = a[(i, j)] / h;
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[(j, k)] * a[(i, k)];
                    }
                    for k in (j + 1)..=l {
                        g += a[(k, j)] * a[(i, k)];
                    }
                    e[j] = g / h;
                    f += e[j] * a[(i, j)];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[(j, k)] -= f * e[k] + g * a[(i, k)];
                    }
                }
            }
        } else {
            e[i] = a[(i, l)];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for i in 0..n {
        if d[i] != 0.0 {
            for j in 0..i {
                let g: f64 = (0..i).map(|k| a[(i, k)] * a[(k, j)]).sum();
                for k in 0..i {
                    a[(k, j)] -= g * a[(k, i)];
                }
            }
        }
        d[i] = a[(i, i)];
        a[(i, i)] = 1.0;
        for j in 0..i {
            a[(j, i)] = 0.0;
            a[(i, j)] = 0.0;
        }
    }
}

/// Implicit-shift QL on a symmetric tridiagonal matrix; `e[i]` couples
/// i and i+1. Rotations are accumulated into the columns of `z`.
fn ql_implicit(d: &mut [f64], e: &mut [f64], z: &mut DenseMatrix) -> Result<(), NumericsError> {
    let n = d.len();
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(NumericsError::NoConvergence { iterations: MAX_SWEEPS });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let f = z[(k, i + 1)];
                    z[(k, i + 1)] = s * z[(k, i)] + c * f;
                    z[(k, i)] = c * z[(k, i)] - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v: f64 = rng.random_range(-1.0..1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    #[test]
    fn trivial_spectra() {
        let eig = symmetric_eigen(&DenseMatrix::identity(3), false).unwrap();
        assert_eq!(eig.values, vec![1.0, 1.0, 1.0]);
        let m = DenseMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, -1.0]]).unwrap();
        let eig = symmetric_eigen(&m, false).unwrap();
        assert_eq!(eig.values, vec![-1.0, 2.0]);
        let m = DenseMatrix::from_rows(&[vec![5.0]]).unwrap();
        assert_eq!(symmetric_eigen(&m, false).unwrap().values, vec![5.0]);
    }

    #[test]
    fn rejects_nonsymmetric_and_nonsquare() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            symmetric_eigen(&m, false),
            Err(NumericsError::InvalidArgument(_))
        ));
        let m = DenseMatrix::zeros(2, 3);
        assert!(symmetric_eigen(&m, false).is_err());
    }

    #[test]
    fn matches_nalgebra_and_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2usize, 3, 5, 9, 16, 30] {
            let a = random_symmetric(n, &mut rng);
            let eig = symmetric_eigen(&a, true).unwrap();
            let na = nalgebra::DMatrix::from_fn(n, n, |i, j| a[(i, j)]);
            let mut reference: Vec<f64> = na.symmetric_eigenvalues().iter().copied().collect();
            reference.sort_by(f64::total_cmp);
            for (x, y) in eig.values.iter().zip(&reference) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-12);
            }
            let v = eig.vectors.unwrap();
            for i in 0..n {
                for j in 0..n {
                    let rebuilt: f64 = (0..n).map(|k| v[(i, k)] * eig.values[k] * v[(j, k)]).sum();
                    assert_abs_diff_eq!(rebuilt, a[(i, j)], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn tridiagonal_second_difference_spectrum() {
        // tridiag(-1, 2, -1) has eigenvalues 2 - 2 cos(k pi / (n + 1))
        let n = 12;
        let eig = tridiagonal_eigen(&vec![2.0; n], &vec![-1.0; n - 1], false).unwrap();
        for (k, value) in eig.values.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert_abs_diff_eq!(*value, exact, epsilon = 1e-13);
        }
        assert!(tridiagonal_eigen(&[1.0, 2.0], &[], false).is_err());
    }
}
