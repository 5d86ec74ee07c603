use std::f64::consts::PI;

use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum TorusError {
    #[error("a torus point needs at least one coordinate")]
    Empty,
    #[error("torus coordinate {0} is not finite")]
    NotFinite(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// A point of T^d, each angle reduced to [-pi, pi).
#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint(Vec<f64>);

/// Reduce an angle to [-pi, pi).
pub fn wrap_angle(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    // rem_euclid can round up to exactly 2 pi
    if y >= PI {
        y - 2.0 * PI
    } else {
        y
    }
}

impl TorusPoint {
    pub fn new(angles: Vec<f64>) -> Result<Self, TorusError> {
        if angles.is_empty() {
            return Err(TorusError::Empty);
        }
        if let Some(&bad) = angles.iter().find(|a| !a.is_finite()) {
            return Err(TorusError::NotFinite(bad));
        }
        Ok(Self(angles.into_iter().map(wrap_angle).collect()))
    }

    pub fn origin(d: usize) -> Self {
        Self(vec![0.0; d.max(1)])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn angles(&self) -> &[f64] {
        &self.0
    }

    pub fn cosines(&self) -> Vec<f64> {
        self.0.iter().map(|t| t.cos()).collect()
    }

    /// self - other on the torus.
    pub fn sub(&self, other: &TorusPoint) -> Result<TorusPoint, TorusError> {
        if self.dim() != other.dim() {
            return Err(TorusError::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(TorusPoint(
            self.0.iter().zip(&other.0).map(|(a, b)| wrap_angle(a - b)).collect(),
        ))
    }

    /// Largest per-axis geodesic distance.
    pub fn distance(&self, other: &TorusPoint) -> Result<f64, TorusError> {
        Ok(self.sub(other)?.0.iter().fold(0.0, |m, x| m.max(x.abs())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn wrapping() {
        assert_abs_diff_eq!(wrap_angle(PI), -PI, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_angle(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_angle(-7.0), -7.0 + 2.0 * PI, epsilon = 1e-15);
        for k in -50..50 {
            let w = wrap_angle(k as f64 * 0.37);
            assert!((-PI..PI).contains(&w));
        }
    }

    #[test]
    fn construction_and_differences() {
        assert_eq!(TorusPoint::new(vec![]), Err(TorusError::Empty));
        assert!(TorusPoint::new(vec![f64::NAN]).is_err());
        let a = TorusPoint::new(vec![3.0, 0.0]).unwrap();
        let b = TorusPoint::new(vec![-3.0, 0.5]).unwrap();
        let diff = a.sub(&b).unwrap();
        assert_abs_diff_eq!(diff.angles()[0], 6.0 - 2.0 * PI, epsilon = 1e-15);
        assert_abs_diff_eq!(a.distance(&b).unwrap(), 0.5, epsilon = 1e-15);
        let c = TorusPoint::new(vec![-3.0, 0.2]).unwrap();
        assert_abs_diff_eq!(a.distance(&c).unwrap(), 2.0 * PI - 6.0, epsilon = 1e-15);
        assert!(a.sub(&TorusPoint::origin(3)).is_err());
    }
}
