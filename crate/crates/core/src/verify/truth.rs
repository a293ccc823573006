//! Ground-truth quantities in recovered coordinates, for comparison only.

use nalgebra::{Matrix2, Vector3};

use crate::distance::distance_shooting;
use crate::error::Result;
use crate::geodesic::{from_h_coordinate, GeodesicSolver};
use crate::manifold::{boundary_frame, DomainSpec, MetricKind, MetricSpec, Point};

/// Inverse of the α chart at the sensor with curve parameter `s0`:
/// `(v, r) ↦ exp_{z_0}(r·w(v))` with `w(v)` the inward unit vector of tangential coordinate `v`.
pub fn alpha_inverse(solver: &GeodesicSolver<'_>, s0: f64, v: f64, r: f64) -> Result<Point> {
    let frame = boundary_frame(solver.domain, solver.spec, s0)?;
    solver.exp_map(frame.point, from_h_coordinate(&frame, v)? * r)
}

/// True metric pulled back through the α chart at `(v, r)`, by central differences.
pub fn alpha_metric(solver: &GeodesicSolver<'_>, s0: f64, v: f64, r: f64) -> Result<Matrix2<f64>> {
    const D: f64 = 1e-5;
    let p = alpha_inverse(solver, s0, v, r)?;
    let dv = (alpha_inverse(solver, s0, v + D, r)? - alpha_inverse(solver, s0, v - D, r)?) / (2.0 * D);
    let dr = (alpha_inverse(solver, s0, v, r + D)? - alpha_inverse(solver, s0, v, r - D)?) / (2.0 * D);
    let j = Matrix2::from_columns(&[dv, dr]);
    Ok(j.transpose() * solver.spec.metric_at(&p)? * j)
}

pub fn relative_frobenius(a: &Matrix2<f64>, truth: &Matrix2<f64>) -> f64 {
    (a - truth).norm() / truth.norm()
}

/// Metric length of ∂M from curve parameter `s0` forward to `s1` (wrapping), composite Simpson.
pub fn boundary_arc(spec: &MetricSpec, domain: &DomainSpec, s0: f64, s1: f64) -> Result<f64> {
    let l = domain.length();
    let mut span = s1 - s0;
    if span < 0.0 {
        span += l;
    }
    let n = 2 * ((span / l * 4096.0).ceil() as usize).max(8);
    let h = span / n as f64;
    let mut total = 0.0;
    for k in 0..=n {
        let a = domain.arc_jet(domain.wrap_s(s0 + h * k as f64));
        let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
        total += w * (a.t.transpose() * spec.metric_at(&a.p)? * a.t)[(0, 0)].sqrt();
    }
    Ok(total * h / 3.0)
}

pub fn euclidean_distance(p: &Point, q: &Point) -> Option<f64> {
    Some((p - q).norm())
}

/// Closed-form distance of the constant curvature `k > 0` chart
/// `g = 4/(1 + k|x|²)² · I`, through the stereographic sphere.
pub fn spherical_distance(k: f64, p: &Point, q: &Point) -> f64 {
    let lift = |x: &Point| {
        let y = x * k.sqrt();
        let s = 1.0 + y.norm_squared();
        Vector3::new(2.0 * y.x / s, 2.0 * y.y / s, (1.0 - y.norm_squared()) / s)
    };
    let (a, b) = (lift(p), lift(q));
    a.cross(&b).norm().atan2(a.dot(&b)) / k.sqrt()
}

/// Interior distance by geodesic shooting; `None` where no connection converges.
pub fn shooting_distance(solver: &GeodesicSolver<'_>, p: &Point, q: &Point) -> Option<f64> {
    distance_shooting(solver, p, q).ok().map(|c| c.distance)
}

/// Exact distance for the presets that have one.
pub fn closed_form_distance(spec: &MetricSpec) -> Option<fn(f64, &Point, &Point) -> f64> {
    match spec.kind {
        MetricKind::Euclidean => Some(|_, p, q| (p - q).norm()),
        MetricKind::ConstantCurvature { curvature } if curvature > 0.0 => Some(spherical_distance),
        _ => None,
    }
}

/// Distance oracle for `spec`: closed form when available, shooting otherwise.
pub fn truth_distance<'a>(solver: &'a GeodesicSolver<'a>) -> impl Fn(&Point, &Point) -> Option<f64> + Sync + 'a {
    let k = match solver.spec.kind {
        MetricKind::ConstantCurvature { curvature } => curvature,
        _ => 0.0,
    };
    let exact = closed_form_distance(solver.spec);
    move |p: &Point, q: &Point| match exact {
        Some(f) => Some(f(k, p, q)),
        None => shooting_distance(solver, p, q),
    }
}
