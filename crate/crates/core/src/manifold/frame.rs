//! Boundary frames, the strict-convexity test and the ε-collar extension.
//!
//! Sign convention: the second fundamental form is taken against the OUTWARD
//! unit normal, so a strictly convex boundary has `Π < 0` everywhere. The
//! geodesic curvature `κ_g = -Π` is reported alongside.

use nalgebra::Vector2;

use super::domain::DomainSpec;
use super::metric::{christoffel_from_jet, MetricSpec, Point};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFrame {
    pub s: f64,
    pub point: Point,
    /// g-unit tangent along increasing arc length.
    pub tangent: Vector2<f64>,
    /// g-unit normal pointing into the domain.
    pub inward_normal: Vector2<f64>,
    pub second_fundamental_form: f64,
}

impl BoundaryFrame {
    pub fn outward_normal(&self) -> Vector2<f64> {
        -self.inward_normal
    }

    pub fn geodesic_curvature(&self) -> f64 {
        -self.second_fundamental_form
    }
}

pub fn boundary_frame(domain: &DomainSpec, spec: &MetricSpec, s: f64) -> Result<BoundaryFrame> {
    let arc = domain.arc_jet(s);
    let jet = spec.jet(&arc.p)?;
    let g = jet.g;
    let ip = |a: &Vector2<f64>, b: &Vector2<f64>| a.dot(&(g * b));
    let sigma = ip(&arc.t, &arc.t).sqrt();
    let tangent = arc.t / sigma;
    let n0 = Vector2::new(-arc.t.y, arc.t.x);
    let n1 = n0 - tangent * ip(&n0, &tangent);
    let inward_normal = n1 / ip(&n1, &n1).sqrt();
    let c = christoffel_from_jet(&jet);
    let mut accel = arc.tt;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                accel[i] += c[i][j][k] * arc.t[j] * arc.t[k];
            }
        }
    }
    let second_fundamental_form = -ip(&accel, &inward_normal) / (sigma * sigma);
    Ok(BoundaryFrame { s: domain.wrap_s(s), point: arc.p, tangent, inward_normal, second_fundamental_form })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityReport {
    pub pass: bool,
    /// Largest sampled `Π`; strictly convex needs this below `-margin_floor`.
    pub max_second_fundamental_form: f64,
    pub at_s: f64,
}

impl ConvexityReport {
    /// Distance of the worst sample from the convexity threshold `Π = 0`.
    pub fn margin(&self) -> f64 {
        -self.max_second_fundamental_form
    }
}

pub const DEFAULT_MARGIN_FLOOR: f64 = 1e-6;

pub fn check_strict_convexity(
    domain: &DomainSpec,
    spec: &MetricSpec,
    n_samples: usize,
    margin_floor: f64,
) -> Result<ConvexityReport> {
    if n_samples < 16 {
        return Err(Error::InvalidArgument(format!("n_samples must be >= 16, got {n_samples}")));
    }
    let l = domain.length();
    let mut worst = (f64::NEG_INFINITY, 0.0);
    for i in 0..n_samples {
        let s = l * i as f64 / n_samples as f64;
        let pi = boundary_frame(domain, spec, s)?.second_fundamental_form;
        if pi > worst.0 {
            worst = (pi, s);
        }
    }
    Ok(ConvexityReport {
        pass: worst.0 < -margin_floor,
        max_second_fundamental_form: worst.0,
        at_s: worst.1,
    })
}

/// Outward Euclidean normal offset of the boundary by `eps`, with Γ carried
/// along the curve parameter. Fails when the offset leaves the chart, stops
/// being a simple curve, or loses strict convexity; the error carries the
/// largest admissible offset found by bisection.
pub fn extend_domain(domain: &DomainSpec, spec: &MetricSpec, eps: f64) -> Result<DomainSpec> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("extension offset must be positive, got {eps}")));
    }
    match try_offset(domain, spec, eps) {
        Some(d) => Ok(d),
        None => {
            let (mut lo, mut hi) = (0.0, eps);
            for _ in 0..30 {
                let mid = 0.5 * (lo + hi);
                if try_offset(domain, spec, mid).is_some() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Err(Error::ConvexityLost { requested: eps, max_admissible: lo })
        }
    }
}

fn try_offset(domain: &DomainSpec, spec: &MetricSpec, eps: f64) -> Option<DomainSpec> {
    let modes = (2 * domain.curve.modes()).max(64);
    let curve = domain.curve.offset(eps, 8 * modes, modes);
    let th_a = domain.theta_of_s(domain.gamma.0);
    let th_b = domain.theta_of_s(domain.gamma.1);
    let ext = DomainSpec::new(curve, (0.0, 1.0)).ok()?;
    let (mut a, mut b) = (ext.s_of_theta(th_a), ext.s_of_theta(th_b));
    if b <= a {
        if domain.gamma.1 >= domain.length() - 1e-12 {
            b = ext.length();
        } else {
            a = 0.0;
        }
    }
    let ext = ext.with_gamma((a, b)).ok()?;
    if !ext.polyline().iter().all(|p| spec.chart.contains(p)) {
        return None;
    }
    let rep = check_strict_convexity(&ext, spec, 256, DEFAULT_MARGIN_FLOOR).ok()?;
    rep.pass.then_some(ext)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::domain::FourierCurve;
    use crate::manifold::metric::ChartRect;
    use std::f64::consts::PI;

    fn unit_disk() -> DomainSpec {
        DomainSpec::new(FourierCurve::circle(Point::zeros(), 1.0), (0.0, PI / 2.0)).unwrap()
    }

    #[test]
    fn unit_circle_frame() {
        let d = unit_disk();
        let m = MetricSpec::euclidean(ChartRect::square(1.5));
        let f = boundary_frame(&d, &m, 0.0).unwrap();
        assert!((f.point - Point::new(1.0, 0.0)).norm() < 1e-12);
        assert!((f.inward_normal - Vector2::new(-1.0, 0.0)).norm() < 1e-12);
        assert!((f.second_fundamental_form + 1.0).abs() < 1e-10);
        for s in [0.3, 2.0, 4.4] {
            let f = boundary_frame(&d, &m, s).unwrap();
            assert!((f.second_fundamental_form + 1.0).abs() < 1e-10);
            assert!(f.tangent.dot(&f.inward_normal).abs() < 1e-10);
        }
    }

    #[test]
    fn ellipse_vertex_curvature() {
        // parametric curvature at (a, 0) of an (a, b) ellipse is a / b²
        let d = DomainSpec::new(FourierCurve::ellipse(Point::zeros(), 2.0, 1.0), (0.0, 1.0)).unwrap();
        let m = MetricSpec::euclidean(ChartRect::square(3.0));
        let f = boundary_frame(&d, &m, 0.0).unwrap();
        assert!((f.point - Point::new(2.0, 0.0)).norm() < 1e-12);
        assert!((f.second_fundamental_form + 2.0).abs() < 1e-9);
        assert!((f.geodesic_curvature() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn frame_is_orthonormal_in_g() {
        let d = DomainSpec::new(FourierCurve::ellipse(Point::new(0.1, 0.0), 0.8, 0.6), (0.0, 1.0)).unwrap();
        let m = MetricSpec::conformal_bump(Point::new(0.2, 0.1), 0.6, 0.4, ChartRect::square(2.0));
        for i in 0..20 {
            let s = d.length() * i as f64 / 20.0;
            let f = boundary_frame(&d, &m, s).unwrap();
            assert!(m.inner(&f.point, &f.tangent, &f.inward_normal).abs() < 1e-10);
            assert!((m.norm(&f.point, &f.tangent) - 1.0).abs() < 1e-10);
            assert!((m.norm(&f.point, &f.inward_normal) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn conformal_circle_geodesic_curvature() {
        // For g = e^{2φ}Id: κ_g = e^{-φ}(κ_e + ∂_n φ) with n the Euclidean outward normal.
        let d = unit_disk();
        let (c, a, w) = (Point::new(0.3, 0.0), 0.5, 0.6);
        let m = MetricSpec::conformal_bump(c, a, w, ChartRect::square(2.0));
        for s in [0.0, 1.0, 2.5] {
            let f = boundary_frame(&d, &m, s).unwrap();
            let p = f.point;
            let cj = m.conformal_jet(&p).unwrap();
            let expect = (-cj.phi).exp() * (1.0 + cj.grad.dot(&p));
            assert!((f.geodesic_curvature() - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn convexity_checks() {
        let m = MetricSpec::euclidean(ChartRect::square(3.0));
        let r = check_strict_convexity(&unit_disk(), &m, 64, DEFAULT_MARGIN_FLOOR).unwrap();
        assert!(r.pass);
        assert!((r.max_second_fundamental_form + 1.0).abs() < 1e-10);
        let e = DomainSpec::new(FourierCurve::ellipse(Point::zeros(), 2.0, 1.0), (0.0, 1.0)).unwrap();
        let r = check_strict_convexity(&e, &m, 64, DEFAULT_MARGIN_FLOOR).unwrap();
        // minimum curvature b / a² = 0.25 at the co-vertices
        assert!(r.pass && (r.max_second_fundamental_form + 0.25).abs() < 1e-9);
        assert!(check_strict_convexity(&e, &m, 8, DEFAULT_MARGIN_FLOOR).is_err());
    }

    #[test]
    fn extend_circle() {
        let m = MetricSpec::euclidean(ChartRect::square(1.5));
        let ext = extend_domain(&unit_disk(), &m, 0.1).unwrap();
        assert!((ext.length() - 2.0 * PI * 1.1).abs() < 1e-9);
        let r = check_strict_convexity(&ext, &m, 64, DEFAULT_MARGIN_FLOOR).unwrap();
        assert!((r.max_second_fundamental_form + 1.0 / 1.1).abs() < 1e-8);
        assert!((ext.gamma.1 - 1.1 * PI / 2.0).abs() < 1e-8);
    }

    #[test]
    fn extend_ellipse_curvature_law() {
        let m = MetricSpec::euclidean(ChartRect::square(3.0));
        let e = DomainSpec::new(FourierCurve::ellipse(Point::zeros(), 2.0, 1.0), (0.0, 1.0)).unwrap();
        let ext = extend_domain(&e, &m, 0.05).unwrap();
        // vertex (2,0): κ = 2 → offset κ/(1+εκ)
        let f = boundary_frame(&ext, &m, 0.0).unwrap();
        assert!((f.point - Point::new(2.05, 0.0)).norm() < 1e-6);
        assert!((f.geodesic_curvature() - 2.0 / 1.1).abs() < 1e-5);
    }

    #[test]
    fn extend_too_far_reports_admissible() {
        let m = MetricSpec::euclidean(ChartRect::square(1.5));
        match extend_domain(&unit_disk(), &m, 2.0) {
            Err(Error::ConvexityLost { requested, max_admissible }) => {
                assert_eq!(requested, 2.0);
                assert!(max_admissible > 0.45 && max_admissible < 0.5, "{max_admissible}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
