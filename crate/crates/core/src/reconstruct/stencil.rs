//! Finite-difference weights on nonuniform grids.

/// Weights `w_k` with `Σ w_k f(x_k) = p'(x0)` for the Lagrange interpolant `p`.
pub fn derivative_weights(nodes: &[f64], x0: f64) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![0.0; n];
    for k in 0..n {
        let mut sum = 0.0;
        for l in 0..n {
            if l == k {
                continue;
            }
            let mut prod = 1.0 / (nodes[k] - nodes[l]);
            for (mi, &xm) in nodes.iter().enumerate() {
                if mi != k && mi != l {
                    prod *= (x0 - xm) / (nodes[k] - xm);
                }
            }
            sum += prod;
        }
        w[k] = sum;
    }
    w
}

/// Weights for the interpolated value at `x0`.
pub fn value_weights(nodes: &[f64], x0: f64) -> Vec<f64> {
    nodes
        .iter()
        .enumerate()
        .map(|(k, &xk)| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(l, _)| l != k)
                .map(|(_, &xl)| (x0 - xl) / (xk - xl))
                .product()
        })
        .collect()
}

/// Window of `len` consecutive indices in `0..n` centered on `j` as far as possible.
pub fn window(j: usize, len: usize, n: usize) -> std::ops::Range<usize> {
    let len = len.min(n);
    let start = j.saturating_sub(len / 2).min(n - len);
    start..start + len
}

/// Second divided difference times two (≈ f'') at interior node `k`.
pub fn second_difference(x: &[f64], f: &[f64], k: usize) -> f64 {
    let (h0, h1) = (x[k] - x[k - 1], x[k + 1] - x[k]);
    2.0 * ((f[k + 1] - f[k]) / h1 - (f[k] - f[k - 1]) / h0) / (h0 + h1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_polynomials() {
        let x = [0.0, 0.13, 0.3, 0.41, 0.7];
        let f = |t: f64| 1.0 - 2.0 * t + 3.0 * t.powi(3) + t.powi(4);
        let df = |t: f64| -2.0 + 9.0 * t * t + 4.0 * t.powi(3);
        let vals: Vec<f64> = x.iter().map(|&t| f(t)).collect();
        for x0 in [0.13, 0.25, 0.7] {
            let d: f64 = derivative_weights(&x, x0).iter().zip(&vals).map(|(w, v)| w * v).sum();
            assert!((d - df(x0)).abs() < 1e-10);
            let v: f64 = value_weights(&x, x0).iter().zip(&vals).map(|(w, v)| w * v).sum();
            assert!((v - f(x0)).abs() < 1e-12);
        }
        assert!((second_difference(&[0.0, 0.1, 0.3], &[0.0, 0.01, 0.09], 1) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn windows_clip_at_ends() {
        assert_eq!(window(0, 5, 10), 0..5);
        assert_eq!(window(5, 5, 10), 3..8);
        assert_eq!(window(9, 5, 10), 5..10);
        assert_eq!(window(1, 7, 4), 0..4);
    }
}
