//! Tridiagonal linear solves via the Thomas algorithm (forward elimination,
//! back substitution).

use crate::{EngineError, Result, Scalar};

/// Solves the tridiagonal system with sub-diagonal `sub` (length n−1), main
/// diagonal `diag` (length n), super-diagonal `sup` (length n−1) and
/// right-hand side `rhs` (length n).
pub fn solve<T: Scalar>(sub: &[T], diag: &[T], sup: &[T], rhs: &[T]) -> Result<Vec<T>> {
    let n = diag.len();
    if n == 0 || sub.len() != n - 1 || sup.len() != n - 1 || rhs.len() != n {
        return Err(EngineError::Parameter(format!(
            "tridiagonal dimensions mismatch: sub={}, diag={}, sup={}, rhs={}",
            sub.len(),
            n,
            sup.len(),
            rhs.len()
        )));
    }
    let mut scratch = vec![T::zero(); n];
    let mut out = vec![T::zero(); n];

    let mut pivot = diag[0];
    if pivot == T::zero() || !pivot.is_finite() {
        return Err(EngineError::SingularSystem { row: 0 });
    }
    out[0] = rhs[0] / pivot;
    for i in 1..n {
        scratch[i] = sup[i - 1] / pivot;
        pivot = diag[i] - sub[i - 1] * scratch[i];
        if pivot == T::zero() || !pivot.is_finite() {
            return Err(EngineError::SingularSystem { row: i });
        }
        out[i] = (rhs[i] - sub[i - 1] * out[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        let next = out[i + 1];
        out[i] = out[i] - scratch[i + 1] * next;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Dense Gaussian elimination with partial pivoting, used as the oracle.
    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
                .unwrap();
            a.swap(col, piv);
            b.swap(col, piv);
            for row in col + 1..n {
                let factor = a[row][col] / a[col][col];
                for k in col..n {
                    a[row][k] -= factor * a[col][k];
                }
                b[row] -= factor * b[col];
            }
        }
        let mut x = vec![0.0; n];
        for row in (0..n).rev() {
            let mut acc = b[row];
            for k in row + 1..n {
                acc -= a[row][k] * x[k];
            }
            x[row] = acc / a[row][row];
        }
        x
    }

    #[test]
    fn identity_returns_rhs() {
        let rhs = vec![3.0, -1.0, 7.0, 0.25];
        let sol = solve(&[0.0; 3], &[1.0; 4], &[0.0; 3], &rhs).unwrap();
        assert_eq!(sol, rhs);
    }

    #[test]
    fn matches_dense_oracle_on_3x3() {
        let sub = [1.0, -2.0];
        let diag = [4.0, 5.0, 6.0];
        let sup = [0.5, 1.5];
        let rhs = [1.0, 2.0, 3.0];
        let got = solve(&sub, &diag, &sup, &rhs).unwrap();
        let dense = vec![
            vec![4.0, 0.5, 0.0],
            vec![1.0, 5.0, 1.5],
            vec![0.0, -2.0, 6.0],
        ];
        let want = dense_solve(dense, rhs.to_vec());
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12, "{g} vs {w}");
        }
    }

    #[test]
    fn laplacian_matches_analytic_inverse() {
        // For tridiag(−1, 2, −1) of size n, the inverse has entries
        // (A⁻¹)ᵢⱼ = i (n+1−j) / (n+1) for i ≤ j (1-based indices).
        let n = 25usize;
        let sub = vec![-1.0; n - 1];
        let diag = vec![2.0; n];
        let sup = vec![-1.0; n - 1];
        for k in [0usize, 7, n - 1] {
            let mut rhs = vec![0.0; n];
            rhs[k] = 1.0;
            let got = solve(&sub, &diag, &sup, &rhs).unwrap();
            for i in 0..n {
                let (lo, hi) = (i.min(k) as f64 + 1.0, i.max(k) as f64 + 1.0);
                let want = lo * (n as f64 + 1.0 - hi) / (n as f64 + 1.0);
                assert!((got[i] - want).abs() < 1e-10, "i={i} k={k}: {} vs {want}", got[i]);
            }
        }
    }

    #[test]
    fn zero_pivot_reported() {
        let err = solve(&[1.0], &[0.0, 1.0], &[1.0], &[1.0, 1.0]).unwrap_err();
        assert!(matches!(err, EngineError::SingularSystem { row: 0 }));
    }
}
