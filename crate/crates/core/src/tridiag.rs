//! Thomas algorithm for tridiagonal systems.

/// Solves `a_i x_{i−1} + b_i x_i + c_i x_{i+1} = d_i` in place of `d`.
/// `a[0]` and `c[n−1]` are ignored. `scratch` must have length `n`.
pub fn solve_tridiagonal(a: &[f64], b: &[f64], c: &[f64], d: &mut [f64], scratch: &mut [f64]) {
    let n = d.len();
    debug_assert!(a.len() == n && b.len() == n && c.len() == n && scratch.len() == n);
    let mut beta = b[0];
    d[0] /= beta;
    for i in 1..n {
        scratch[i] = c[i - 1] / beta;
        beta = b[i] - a[i] * scratch[i];
        d[i] = (d[i] - a[i] * d[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        let next = d[i + 1];
        d[i] -= scratch[i + 1] * next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    #[test]
    fn tridiagonal_matches_dense_product() {
        let n = 9;
        let a: Vec<f64> = (0..n).map(|i| -0.3 - 0.01 * i as f64).collect();
        let c: Vec<f64> = (0..n).map(|i| -0.2 + 0.02 * i as f64).collect();
        let b: Vec<f64> = (0..n).map(|i| 2.0 + 0.1 * i as f64).collect();
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let mut d: Vec<f64> = (0..n)
            .map(|i| {
                let mut v = b[i] * x[i];
                if i > 0 {
                    v += a[i] * x[i - 1];
                }
                if i + 1 < n {
                    v += c[i] * x[i + 1];
                }
                v
            })
            .collect();
        let mut s = vec![0.0; n];
        solve_tridiagonal(&a, &b, &c, &mut d, &mut s);
        for i in 0..n {
            assert!((d[i] - x[i]).abs() < 1e-13);
        }
    }
}
