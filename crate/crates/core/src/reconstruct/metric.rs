//! Metric recovery: covectors `H_p(z) = D_p d(p, z)` in chart coordinates and
//! the least-squares unit co-sphere through them.

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen, Vector2};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosphereFit {
    /// Metric `g = Q⁻¹` in chart coordinates.
    pub g: Matrix2<f64>,
    pub q: Matrix2<f64>,
    /// RMS of `ξᵀQξ − 1`.
    pub residual: f64,
    pub condition: f64,
}

pub const MIN_SPREAD_DEG: f64 = 5.0;

/// Least squares `ξᵀ Q ξ = 1` over symmetric `Q`, projected to SPD, `g = Q⁻¹`.
pub fn fit_cosphere(covectors: &[Vector2<f64>]) -> Result<CosphereFit> {
    if covectors.len() < 3 {
        return Err(Error::RankDeficient { condition: f64::INFINITY });
    }
    let angles: Vec<f64> = covectors.iter().map(|c| c.y.atan2(c.x)).collect();
    // spread of directions modulo π (ξ and −ξ constrain Q identically)
    let spread = angular_spread_mod_pi(&angles).to_degrees();
    let a = DMatrix::from_fn(covectors.len(), 3, |r, c| {
        let x = covectors[r];
        match c {
            0 => x.x * x.x,
            1 => 2.0 * x.x * x.y,
            _ => x.y * x.y,
        }
    });
    let sv = a.clone().svd(true, true);
    let smax = sv.singular_values.max();
    let smin = sv.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if spread < MIN_SPREAD_DEG || !condition.is_finite() || condition > 1e10 {
        return Err(Error::RankDeficient { condition });
    }
    let b = DVector::from_element(covectors.len(), 1.0);
    let x = sv.solve(&b, 1e-14).map_err(|_| Error::RankDeficient { condition })?;
    let q = Matrix2::new(x[0], x[1], x[1], x[2]);
    let eig = SymmetricEigen::new(q);
    let floored = eig.eigenvalues.map(|l| l.max(1e-8));
    let q = eig.eigenvectors * Matrix2::from_diagonal(&floored) * eig.eigenvectors.transpose();
    let g = q.try_inverse().ok_or(Error::RankDeficient { condition })?;
    let residual = (covectors.iter().map(|c| (c.dot(&(q * c)) - 1.0).powi(2)).sum::<f64>()
        / covectors.len() as f64)
        .sqrt();
    Ok(CosphereFit { g, q, residual, condition })
}

fn angular_spread_mod_pi(angles: &[f64]) -> f64 {
    use std::f64::consts::PI;
    let mut a: Vec<f64> = angles.iter().map(|x| x.rem_euclid(PI)).collect();
    a.sort_by(|x, y| x.total_cmp(y));
    let mut gap = a[0] + PI - a[a.len() - 1];
    for w in a.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    PI - gap
}

/// Weighted polynomial least squares of `f` over chart offsets (quadratic, or
/// cubic when there are at least twice as many points as cubic terms);
/// returns the gradient at the origin and the weighted RMS residual.
pub fn local_gradient(offsets: &[Vector2<f64>], values: &[f64], weights: &[f64]) -> Option<(Vector2<f64>, f64)> {
    let n = offsets.len();
    if n < 6 {
        return None;
    }
    let degree = if n >= 20 { 3 } else { 2 };
    let terms: Vec<(i32, i32)> =
        (0..=degree).flat_map(|d| (0..=d).map(move |k| (d - k, k))).collect();
    let sx = (offsets.iter().map(|o| o.x * o.x).sum::<f64>() / n as f64).sqrt().max(1e-12);
    let sy = (offsets.iter().map(|o| o.y * o.y).sum::<f64>() / n as f64).sqrt().max(1e-12);
    let a = DMatrix::from_fn(n, terms.len(), |r, c| {
        let (x, y) = (offsets[r].x / sx, offsets[r].y / sy);
        weights[r].sqrt() * x.powi(terms[c].0) * y.powi(terms[c].1)
    });
    let b = DVector::from_fn(n, |r, _| weights[r].sqrt() * values[r]);
    let sv = a.clone().svd(true, true);
    if sv.singular_values.min() <= 1e-10 * sv.singular_values.max() {
        return None;
    }
    let c = sv.solve(&b, 1e-14).ok()?;
    let res = (&a * &c - &b).norm() / (n as f64).sqrt();
    // terms 1 and 2 are x and y
    Some((Vector2::new(c[1] / sx, c[2] / sy), res))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn unit_circle_covectors() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let f = fit_cosphere(&[Vector2::new(1.0, 0.0), Vector2::new(0.0, 1.0), Vector2::new(s, s)]).unwrap();
        assert!((f.g - Matrix2::identity()).norm() < 1e-12);
        let f = fit_cosphere(&[Vector2::new(2.0, 0.0), Vector2::new(0.0, 1.0), Vector2::new(2f64.sqrt(), s)]).unwrap();
        assert!((f.q - Matrix2::new(0.25, 0.0, 0.0, 1.0)).norm() < 1e-12);
        assert!((f.g - Matrix2::new(4.0, 0.0, 0.0, 1.0)).norm() < 1e-10);
    }

    #[test]
    fn noisy_random_spd() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..10 {
            let l = Matrix2::new(rng.gen_range(0.5..2.0), 0.0, rng.gen_range(-0.5..0.5), rng.gen_range(0.5..2.0));
            let q = l * l.transpose();
            let cov: Vec<Vector2<f64>> = (0..20)
                .map(|k| {
                    let th = k as f64 * std::f64::consts::PI / 20.0;
                    let d = Vector2::new(th.cos(), th.sin());
                    let xi = d / d.dot(&(q * d)).sqrt();
                    xi + Vector2::new(rng.gen_range(-1e-3..1e-3), rng.gen_range(-1e-3..1e-3))
                })
                .collect();
            let f = fit_cosphere(&cov).unwrap();
            let truth = q.try_inverse().unwrap();
            assert!((f.g - truth).norm() / truth.norm() < 0.01);
        }
    }

    #[test]
    fn degenerate_spread_is_rejected() {
        let c = [Vector2::new(1.0, 0.0), Vector2::new(1.0, 0.01), Vector2::new(0.99, 0.02)];
        assert!(matches!(fit_cosphere(&c), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn quadratic_gradient_is_exact_on_quadratics() {
        let f = |p: &Vector2<f64>| 1.0 + 2.0 * p.x - 3.0 * p.y + 0.5 * p.x * p.y + p.y * p.y;
        let offs: Vec<Vector2<f64>> =
            (0..12).map(|k| Vector2::new((k as f64 * 1.3).cos() * 0.1, (k as f64 * 0.7).sin() * 0.05)).collect();
        let vals: Vec<f64> = offs.iter().map(f).collect();
        let (g, res) = local_gradient(&offs, &vals, &[1.0; 12]).unwrap();
        assert!((g - Vector2::new(2.0, -3.0)).norm() < 1e-9);
        assert!(res < 1e-12);
    }
}
