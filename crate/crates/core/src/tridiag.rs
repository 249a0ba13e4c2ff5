//! Symmetric tridiagonal solves by LDL^T elimination.

/// Solves `A x = b` for the symmetric tridiagonal `A` with diagonal `diag` and
/// off-diagonal `off` (`off[i]` couples `i` and `i+1`). Returns `None` when a
/// pivot is not strictly positive, i.e. `A` is not positive definite.
pub fn solve_spd(diag: &[f64], off: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Some(Vec::new());
    }
    let mut d = vec![0.0; n];
    let mut l = vec![0.0; n.saturating_sub(1)];
    let scale = diag.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    d[0] = diag[0];
    if d[0] <= 1e-14 * scale {
        return None;
    }
    for i in 1..n {
        l[i - 1] = off[i - 1] / d[i - 1];
        d[i] = diag[i] - l[i - 1] * off[i - 1];
        if d[i] <= 1e-14 * scale {
            return None;
        }
    }
    let mut y = b.to_vec();
    for i in 1..n {
        y[i] -= l[i - 1] * y[i - 1];
    }
    for i in 0..n {
        y[i] /= d[i];
    }
    for i in (0..n - 1).rev() {
        y[i] -= l[i] * y[i + 1];
    }
    Some(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_discrete_laplacian() {
        let n = 6;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut b = vec![0.0; n];
        for i in 0..n {
            b[i] = 2.0 * x[i] - if i > 0 { x[i - 1] } else { 0.0 } - if i + 1 < n { x[i + 1] } else { 0.0 };
        }
        let got = solve_spd(&diag, &off, &b).unwrap();
        for (g, w) in got.iter().zip(&x) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_indefinite() {
        assert!(solve_spd(&[1.0, -1.0], &[0.0], &[1.0, 1.0]).is_none());
    }
}
