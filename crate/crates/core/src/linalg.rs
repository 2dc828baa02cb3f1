//! Dense linear solves.

use nalgebra::{DMatrix, DVector};

/// Solves `a x = b` for a square row-major `a` by LU with partial pivoting.
///
/// Returns `None` when some pivot falls below `1e-13` relative to the largest entry of `a`.
pub fn solve_dense(a: Vec<Vec<f64>>, b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    if n == 0 {
        return Some(Vec::new());
    }
    let m = DMatrix::from_fn(n, n, |i, j| a[i][j]);
    let scale = m.amax().max(1.0);
    let lu = m.lu();
    if lu.u().diagonal().iter().any(|d| d.abs() < 1e-13 * scale) {
        return None;
    }
    lu.solve(&DVector::from_vec(b)).map(|x| x.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let a = vec![vec![0.0, 2.0], vec![3.0, 1.0]];
        let x = solve_dense(a, vec![4.0, 5.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14);
        assert!((x[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn singular_is_none() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(solve_dense(a, vec![1.0, 2.0]).is_none());
    }

    #[test]
    fn empty_system() {
        assert_eq!(solve_dense(vec![], vec![]), Some(vec![]));
    }
}
