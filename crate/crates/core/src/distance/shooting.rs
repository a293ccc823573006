//! Two-point boundary value solver: multistart shooting with Newton polish.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::geodesic::{GeodesicSolver, UnitVectorAt};
use crate::manifold::Point;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOptions {
    /// Number of uniformly spaced seed angles.
    pub seeds: usize,
    /// Minimizers with length within this of the minimum are all reported.
    pub tol_cluster: f64,
    /// Directions closer than this (radians) with lengths within `length_merge` are one minimizer.
    pub angle_merge: f64,
    pub length_merge: f64,
    /// Chart-distance residual accepted as a connection.
    pub residual_tol: f64,
    pub max_newton: usize,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            seeds: 64,
            tol_cluster: 1e-6,
            angle_merge: 2.0_f64.to_radians(),
            length_merge: 1e-5,
            residual_tol: 1e-9,
            max_newton: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimizer {
    pub direction: UnitVectorAt,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    pub distance: f64,
    /// Minimizing initial directions, sorted by angle.
    pub minimizers: Vec<Minimizer>,
    /// Every distinct geodesic connection found, minimizing or not.
    pub candidates: Vec<Minimizer>,
}

impl Connection {
    pub fn multiplicity(&self) -> usize {
        self.minimizers.len()
    }
}

pub fn distance_shooting(solver: &GeodesicSolver<'_>, p: &Point, q: &Point) -> Result<Connection> {
    distance_shooting_with(solver, p, q, &ShootingOptions::default())
}

/// Horizon used for seed shots: long enough to cross the domain many times.
fn horizon(solver: &GeodesicSolver<'_>) -> f64 {
    let c = solver.spec.chart;
    let diag = ((c.x_max - c.x_min).powi(2) + (c.y_max - c.y_min).powi(2)).sqrt();
    let mut fmax: f64 = 1.0;
    for i in 0..=8 {
        for j in 0..=8 {
            let x = Point::new(
                c.x_min + (c.x_max - c.x_min) * i as f64 / 8.0,
                c.y_min + (c.y_max - c.y_min) * j as f64 / 8.0,
            );
            fmax = fmax.max(solver.spec.metric_unchecked(&x).symmetric_eigenvalues().max().sqrt());
        }
    }
    4.0 * diag * fmax
}

pub fn distance_shooting_with(
    solver: &GeodesicSolver<'_>,
    p: &Point,
    q: &Point,
    opts: &ShootingOptions,
) -> Result<Connection> {
    let spec = solver.spec;
    spec.chart.check(p)?;
    spec.chart.check(q)?;
    if (p - q).norm() == 0.0 {
        return Ok(Connection { distance: 0.0, minimizers: Vec::new(), candidates: Vec::new() });
    }
    let t_max = horizon(solver);
    let n = opts.seeds.max(8);
    let mut miss = Vec::with_capacity(n);
    for k in 0..n {
        let th = 2.0 * PI * k as f64 / n as f64;
        let init = UnitVectorAt::from_angle(spec, *p, th)?;
        let rec = solver.shoot(&init, t_max)?;
        let mut best = (f64::INFINITY, 0.0);
        for w in rec.samples.windows(2) {
            let (a, b) = (w[0].point, w[1].point);
            let ab = b - a;
            let l2 = ab.norm_squared();
            let s = if l2 > 0.0 { ((q - a).dot(&ab) / l2).clamp(0.0, 1.0) } else { 0.0 };
            let d = (a + ab * s - q).norm();
            if d < best.0 {
                best = (d, w[0].t + s * (w[1].t - w[0].t));
            }
        }
        miss.push((th, best.0, best.1));
    }
    let mut starts: Vec<(f64, f64)> = Vec::new();
    for k in 0..n {
        let (prev, cur, next) = (miss[(k + n - 1) % n].1, miss[k].1, miss[(k + 1) % n].1);
        if cur.is_finite() && cur <= prev && cur <= next && miss[k].2 > 0.0 {
            starts.push((miss[k].0, miss[k].2));
        }
    }
    let mut found: Vec<Minimizer> = Vec::new();
    let mut worst_residual = f64::INFINITY;
    for (th0, t0) in starts {
        match newton(solver, p, q, th0, t0, opts) {
            Ok((th, t, _)) => {
                let init = UnitVectorAt::from_angle(spec, *p, th)?;
                // the connecting geodesic must stay inside M
                let exit = solver.exit_time(&init, t + 1.0)?;
                if exit < t - 1e-7 {
                    continue;
                }
                found.push(Minimizer { direction: init, length: t });
            }
            Err(r) => worst_residual = worst_residual.min(r),
        }
    }
    if found.is_empty() {
        return Err(Error::NoConnection { residual: worst_residual });
    }
    found.sort_by(|a, b| a.length.total_cmp(&b.length));
    let mut distinct: Vec<Minimizer> = Vec::new();
    for m in found {
        let dup = distinct.iter().any(|d| {
            angle_gap(d.direction.angle(), m.direction.angle()) < opts.angle_merge
                && (d.length - m.length).abs() < opts.length_merge
        });
        if !dup {
            distinct.push(m);
        }
    }
    let distance = distinct[0].length;
    let mut minimizers: Vec<Minimizer> =
        distinct.iter().copied().filter(|m| m.length <= distance + opts.tol_cluster).collect();
    minimizers.sort_by(|a, b| a.direction.angle().total_cmp(&b.direction.angle()));
    Ok(Connection { distance, minimizers, candidates: distinct })
}

pub(crate) fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Newton on `F(θ, t) = γ_θ(t) − q`; `Err` carries the best residual.
fn newton(
    solver: &GeodesicSolver<'_>,
    p: &Point,
    q: &Point,
    mut th: f64,
    mut t: f64,
    opts: &ShootingOptions,
) -> std::result::Result<(f64, f64, f64), f64> {
    let spec = solver.spec;
    let eval = |th: f64, t: f64| -> Option<(Point, Vector2<f64>)> {
        let init = UnitVectorAt::from_angle(spec, *p, th).ok()?;
        solver.flow_free(&init, t).ok()
    };
    let Some((mut x, mut v)) = eval(th, t) else { return Err(f64::INFINITY) };
    let mut r = (x - q).norm();
    let dth = 1e-6;
    for _ in 0..opts.max_newton {
        if r <= opts.residual_tol {
            return Ok((th, t, r));
        }
        let (Some((xp, _)), Some((xm, _))) = (eval(th + dth, t), eval(th - dth, t)) else {
            return Err(r);
        };
        let dxdth = (xp - xm) / (2.0 * dth);
        let j = Matrix2::from_columns(&[dxdth, v]);
        let Some(jinv) = j.try_inverse() else { return Err(r) };
        let step = jinv * (x - q);
        let mut lam = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let (th_n, t_n) = (th - lam * step.x, t - lam * step.y);
            if t_n > 0.0 {
                if let Some((xn, vn)) = eval(th_n, t_n) {
                    let rn = (xn - q).norm();
                    if rn < r {
                        th = th_n;
                        t = t_n;
                        x = xn;
                        v = vn;
                        r = rn;
                        accepted = true;
                        break;
                    }
                }
            }
            lam *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if r <= opts.residual_tol {
        Ok((th, t, r))
    } else {
        Err(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::catalog::Preset;

    #[test]
    fn euclidean_straight_connection() {
        let (m, d) = Preset::Disk.build().unwrap();
        let s = GeodesicSolver::new(&m, &d);
        let c = distance_shooting(&s, &Point::zeros(), &Point::new(0.3, 0.4)).unwrap();
        assert!((c.distance - 0.5).abs() < 1e-9);
        assert_eq!(c.multiplicity(), 1);
        assert!((c.minimizers[0].direction.direction - Vector2::new(0.6, 0.8)).norm() < 1e-8);
        let c = distance_shooting(&s, &Point::new(0.2, 0.1), &Point::new(0.2, 0.1)).unwrap();
        assert_eq!(c.distance, 0.0);
        assert!(c.minimizers.is_empty());
    }

    #[test]
    fn boundary_endpoints() {
        let (m, d) = Preset::Disk.build().unwrap();
        let s = GeodesicSolver::new(&m, &d);
        let (a, b) = (Point::new(1.0, 0.0), Point::new(0.0, 1.0));
        let c = distance_shooting(&s, &a, &b).unwrap();
        assert!((c.distance - 2f64.sqrt()).abs() < 1e-9);
        let c = distance_shooting(&s, &Point::new(0.1, -0.3), &a).unwrap();
        assert!((c.distance - (a - Point::new(0.1, -0.3)).norm()).abs() < 1e-9);
    }

    #[test]
    fn cap_symmetric_and_spherical() {
        let (m, d) = Preset::Cap.build().unwrap();
        let s = GeodesicSolver::new(&m, &d);
        let (a, b) = (Point::new(0.1, -0.2), Point::new(-0.3, 0.25));
        let c2 = 4.0 * (a - b).norm_squared() / ((1.0 + a.norm_squared()) * (1.0 + b.norm_squared()));
        let exact = 2.0 * (c2.sqrt() / 2.0).asin();
        let ab = distance_shooting(&s, &a, &b).unwrap().distance;
        let ba = distance_shooting(&s, &b, &a).unwrap().distance;
        assert!((ab - exact).abs() < 1e-8);
        assert!((ab - ba).abs() < 1e-8);
    }

    #[test]
    fn lens_symmetric_pair_has_two_minimizers() {
        let (m, d) = Preset::Lens.build().unwrap();
        let s = GeodesicSolver::new(&m, &d);
        let c = distance_shooting(&s, &Point::new(-0.6, 0.0), &Point::new(0.6, 0.0)).unwrap();
        assert_eq!(c.multiplicity(), 2, "{:?}", c.candidates);
        assert!((c.minimizers[0].length - c.minimizers[1].length).abs() < 1e-6);
        let direct = super::super::eikonal::segment_length(&m, &Point::new(-0.6, 0.0), &Point::new(0.6, 0.0));
        assert!(c.distance < direct);
    }
}
