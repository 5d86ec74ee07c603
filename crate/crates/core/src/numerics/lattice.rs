use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use super::NumericsError;
use crate::special::binomial_u128;

/// All alpha in Z^d with |alpha_1| + ... + |alpha_d| = n, in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeShell {
    d: usize,
    n: usize,
    points: Vec<Vec<i64>>,
}

impl LatticeShell {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn radius(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn shell_enumerate(d: usize, n: usize) -> Result<LatticeShell, NumericsError> {
    if d == 0 {
        return Err(NumericsError::InvalidArgument(
            "lattice dimension must be at least 1".into(),
        ));
    }
    let mut points = Vec::new();
    let mut current = Vec::with_capacity(d);
    fill(d, n as i64, &mut current, &mut points);
    Ok(LatticeShell { d, n, points })
}

fn fill(remaining_dims: usize, budget: i64, current: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    if remaining_dims == 1 {
        if budget == 0 {
            current.push(0);
            out.push(current.clone());
            current.pop();
        } else {
            for v in [-budget, budget] {
                current.push(v);
                out.push(current.clone());
                current.pop();
            }
        }
        return;
    }
    for v in -budget..=budget {
        current.push(v);
        fill(remaining_dims - 1, budget - v.abs(), current, out);
        current.pop();
    }
}

type ShellCache = RwLock<HashMap<(usize, usize), Arc<LatticeShell>>>;

/// Memoized `shell_enumerate`; entries are immutable once inserted.
pub fn shell_cached(d: usize, n: usize) -> Result<Arc<LatticeShell>, NumericsError> {
    static CACHE: OnceLock<ShellCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(shell) = cache.read().expect("shell cache poisoned").get(&(d, n)) {
        return Ok(Arc::clone(shell));
    }
    let shell = Arc::new(shell_enumerate(d, n)?);
    let mut guard = cache.write().expect("shell cache poisoned");
    Ok(Arc::clone(guard.entry((d, n)).or_insert(shell)))
}

/// |{alpha in Z^d : |alpha|_1 = n}|, the coefficient of r^n in
/// ((1 + r) / (1 - r))^d, i.e. sum_j C(d, j) C(n - j + d - 1, d - 1).
pub fn shell_count(d: usize, n: usize) -> Result<u64, NumericsError> {
    if d == 0 {
        return Err(NumericsError::InvalidArgument(
            "lattice dimension must be at least 1".into(),
        ));
    }
    let (d64, n64) = (d as u64, n as u64);
    let mut total: u128 = 0;
    for j in 0..=d64.min(n64) {
        let term = binomial_u128(d64, j)
            .checked_mul(binomial_u128(n64 - j + d64 - 1, d64 - 1))
            .ok_or_else(|| NumericsError::Overflow(format!("shell count ({d}, {n})")))?;
        total = total
            .checked_add(term)
            .ok_or_else(|| NumericsError::Overflow(format!("shell count ({d}, {n})")))?;
    }
    u64::try_from(total).map_err(|_| NumericsError::Overflow(format!("shell count ({d}, {n})")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn brute_force(d: usize, n: usize) -> HashSet<Vec<i64>> {
        let n = n as i64;
        let mut out = HashSet::new();
        let side = (2 * n + 1) as usize;
        let total = side.pow(d as u32);
        for mut code in 0..total {
            let mut alpha = Vec::with_capacity(d);
            for _ in 0..d {
                alpha.push((code % side) as i64 - n);
                code /= side;
            }
            if alpha.iter().map(|a| a.abs()).sum::<i64>() == n {
                out.insert(alpha);
            }
        }
        out
    }

    #[test]
    fn small_shells() {
        assert_eq!(shell_enumerate(2, 0).unwrap().points(), &[vec![0, 0]]);
        let s = shell_enumerate(2, 1).unwrap();
        let got: HashSet<_> = s.points().iter().cloned().collect();
        let want: HashSet<_> = [vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1]].into_iter().collect();
        assert_eq!(got, want);
        assert_eq!(shell_enumerate(3, 1).unwrap().len(), 6);
    }

    #[test]
    fn counts_match_enumeration_and_brute_force() {
        for d in 1..=5 {
            for n in 0..=12 {
                let shell = shell_enumerate(d, n).unwrap();
                let set: HashSet<_> = shell.points().iter().cloned().collect();
                assert_eq!(set.len(), shell.len(), "duplicates at d={d}, n={n}");
                assert_eq!(shell.len() as u64, shell_count(d, n).unwrap());
                assert!(shell
                    .points()
                    .iter()
                    .all(|a| a.iter().map(|x| x.abs()).sum::<i64>() == n as i64));
                if d <= 3 && n <= 6 {
                    assert_eq!(set, brute_force(d, n));
                }
            }
        }
    }

    #[test]
    fn count_examples() {
        assert_eq!(shell_count(2, 3).unwrap(), 12);
        assert_eq!(shell_count(3, 1).unwrap(), 6);
        for d in 1..=8 {
            assert_eq!(shell_count(d, 0).unwrap(), 1);
        }
        // d = 2 is 4n, d = 3 is 4n^2 + 2 for n >= 1
        for n in 1..=30 {
            assert_eq!(shell_count(2, n).unwrap(), 4 * n as u64);
            assert_eq!(shell_count(3, n).unwrap(), 4 * (n * n) as u64 + 2);
        }
        assert!(shell_count(0, 1).is_err());
    }

    #[test]
    fn cache_returns_same_shell() {
        let a = shell_cached(3, 4).unwrap();
        let b = shell_cached(3, 4).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(*a, shell_enumerate(3, 4).unwrap());
    }
}
