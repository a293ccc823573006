//! Metric tensor fields on a planar chart.
//!
//! Every catalog entry evaluates `g(x)` together with its first and second
//! partial derivatives, so Christoffel symbols and Gauss curvature come from
//! the same closed form. Conformal entries (`g = e^{2φ} Id`) additionally
//! expose the log-factor `φ`, which the eikonal solver and the fast geodesic
//! right-hand side use directly.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};

pub type Point = Vector2<f64>;

/// `christoffel[i][j][k]` is Γ^i_{jk}.
pub type Christoffel = [[[f64; 2]; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartRect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl ChartRect {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self { x_min, x_max, y_min, y_max }
    }

    pub fn square(half: f64) -> Self {
        Self::new(-half, half, -half, half)
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.x >= self.x_min && x.x <= self.x_max && x.y >= self.y_min && x.y <= self.y_max
    }

    pub fn check(&self, x: &Point) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutsideChart { x: x.x, y: x.y })
        }
    }
}

/// Bivariate polynomial `Σ c·x^a·y^b`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly2 {
    pub terms: Vec<(u32, u32, f64)>,
}

impl Poly2 {
    pub fn constant(c: f64) -> Self {
        Self { terms: vec![(0, 0, c)] }
    }

    /// Value, gradient and Hessian `[f, fx, fy, fxx, fxy, fyy]`.
    pub fn jet(&self, p: &Point) -> [f64; 6] {
        let pw = |base: f64, e: i64| if e < 0 { 0.0 } else { base.powi(e as i32) };
        let mut out = [0.0; 6];
        for &(a, b, c) in &self.terms {
            let (a, b) = (a as i64, b as i64);
            let (af, bf) = (a as f64, b as f64);
            out[0] += c * pw(p.x, a) * pw(p.y, b);
            out[1] += c * af * pw(p.x, a - 1) * pw(p.y, b);
            out[2] += c * bf * pw(p.x, a) * pw(p.y, b - 1);
            out[3] += c * af * (af - 1.0) * pw(p.x, a - 2) * pw(p.y, b);
            out[4] += c * af * bf * pw(p.x, a - 1) * pw(p.y, b - 1);
            out[5] += c * bf * (bf - 1.0) * pw(p.x, a) * pw(p.y, b - 2);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricKind {
    Euclidean,
    /// `g = e^{2φ} Id` with `φ(x) = amplitude · exp(-|x - center|² / width²)`.
    ConformalBump { center: Point, amplitude: f64, width: f64 },
    /// Stereographic model `g = 4 / (1 + K|x|²)² · Id` of constant curvature `K`.
    ConstantCurvature { curvature: f64 },
    /// Polynomial coefficient tables for `g11`, `g12`, `g22`.
    CustomSpd { g11: Poly2, g12: Poly2, g22: Poly2 },
}

impl MetricKind {
    pub fn catalog_id(&self) -> &'static str {
        match self {
            MetricKind::Euclidean => "euclidean",
            MetricKind::ConformalBump { .. } => "conformal_bump",
            MetricKind::ConstantCurvature { .. } => "constant_curvature",
            MetricKind::CustomSpd { .. } => "custom_spd",
        }
    }
}

/// Metric value with first and second partials: `dg[k] = ∂_k g`, `d2g[k][l] = ∂_k ∂_l g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricJet {
    pub g: Matrix2<f64>,
    pub dg: [Matrix2<f64>; 2],
    pub d2g: [[Matrix2<f64>; 2]; 2],
}

/// Log conformal factor with gradient and Hessian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalJet {
    pub phi: f64,
    pub grad: Vector2<f64>,
    pub hess: Matrix2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec {
    pub kind: MetricKind,
    pub chart: ChartRect,
}

impl MetricSpec {
    pub fn new(kind: MetricKind, chart: ChartRect) -> Self {
        Self { kind, chart }
    }

    pub fn euclidean(chart: ChartRect) -> Self {
        Self::new(MetricKind::Euclidean, chart)
    }

    pub fn constant_curvature(curvature: f64, chart: ChartRect) -> Self {
        Self::new(MetricKind::ConstantCurvature { curvature }, chart)
    }

    pub fn conformal_bump(center: Point, amplitude: f64, width: f64, chart: ChartRect) -> Self {
        Self::new(MetricKind::ConformalBump { center, amplitude, width }, chart)
    }

    pub fn is_conformal(&self) -> bool {
        !matches!(self.kind, MetricKind::CustomSpd { .. })
    }

    /// Closed-form `φ` jet for conformal entries, `None` for `custom_spd`.
    /// Does not check the chart rectangle.
    pub fn conformal_jet(&self, x: &Point) -> Option<ConformalJet> {
        match &self.kind {
            MetricKind::Euclidean => Some(ConformalJet {
                phi: 0.0,
                grad: Vector2::zeros(),
                hess: Matrix2::zeros(),
            }),
            MetricKind::ConformalBump { center, amplitude, width } => {
                let d = x - center;
                let w2 = width * width;
                let e = amplitude * (-d.norm_squared() / w2).exp();
                Some(ConformalJet {
                    phi: e,
                    grad: d * (-2.0 * e / w2),
                    hess: (d * d.transpose()) * (4.0 * e / (w2 * w2))
                        - Matrix2::identity() * (2.0 * e / w2),
                })
            }
            MetricKind::ConstantCurvature { curvature: k } => {
                let s = 1.0 + k * x.norm_squared();
                Some(ConformalJet {
                    phi: std::f64::consts::LN_2 - s.ln(),
                    grad: x * (-2.0 * k / s),
                    hess: Matrix2::identity() * (-2.0 * k / s)
                        + (x * x.transpose()) * (4.0 * k * k / (s * s)),
                })
            }
            MetricKind::CustomSpd { .. } => None,
        }
    }

    /// Full jet without the chart check.
    pub fn jet_unchecked(&self, x: &Point) -> MetricJet {
        match &self.kind {
            MetricKind::CustomSpd { g11, g12, g22 } => {
                let a = g11.jet(x);
                let b = g12.jet(x);
                let c = g22.jet(x);
                let m = |i: usize| Matrix2::new(a[i], b[i], b[i], c[i]);
                MetricJet {
                    g: m(0),
                    dg: [m(1), m(2)],
                    d2g: [[m(3), m(4)], [m(4), m(5)]],
                }
            }
            _ => {
                let cj = self.conformal_jet(x).expect("conformal entry");
                let e2 = (2.0 * cj.phi).exp();
                let id = Matrix2::identity();
                let dg = [id * (2.0 * cj.grad.x * e2), id * (2.0 * cj.grad.y * e2)];
                let second = |k: usize, l: usize| {
                    id * ((4.0 * cj.grad[k] * cj.grad[l] + 2.0 * cj.hess[(k, l)]) * e2)
                };
                MetricJet {
                    g: id * e2,
                    dg,
                    d2g: [[second(0, 0), second(0, 1)], [second(1, 0), second(1, 1)]],
                }
            }
        }
    }

    pub fn jet(&self, x: &Point) -> Result<MetricJet> {
        self.chart.check(x)?;
        let jet = self.jet_unchecked(x);
        check_spd(&jet.g, x)?;
        Ok(jet)
    }

    pub fn metric_at(&self, x: &Point) -> Result<Matrix2<f64>> {
        Ok(self.jet(x)?.g)
    }

    /// Metric matrix without validation; the hot path of the integrators.
    #[inline]
    pub fn metric_unchecked(&self, x: &Point) -> Matrix2<f64> {
        match self.conformal_jet_value(x) {
            Some(phi) => Matrix2::identity() * (2.0 * phi).exp(),
            None => self.jet_unchecked(x).g,
        }
    }

    fn conformal_jet_value(&self, x: &Point) -> Option<f64> {
        match &self.kind {
            MetricKind::Euclidean => Some(0.0),
            MetricKind::ConformalBump { center, amplitude, width } => {
                Some(amplitude * (-(x - center).norm_squared() / (width * width)).exp())
            }
            MetricKind::ConstantCurvature { curvature } => {
                Some(std::f64::consts::LN_2 - (1.0 + curvature * x.norm_squared()).ln())
            }
            MetricKind::CustomSpd { .. } => None,
        }
    }

    /// Conformal log-factor `φ(x)`; `None` for `custom_spd`.
    pub fn log_factor(&self, x: &Point) -> Option<f64> {
        self.conformal_jet_value(x)
    }

    pub fn christoffel(&self, x: &Point) -> Result<Christoffel> {
        Ok(christoffel_from_jet(&self.jet(x)?))
    }

    /// Geodesic acceleration `-Γ^i_{jk} v^j v^k` without the chart check.
    #[inline]
    pub fn geodesic_accel(&self, x: &Point, v: &Vector2<f64>) -> Vector2<f64> {
        if let Some(cj) = self.conformal_jet(x) {
            let gv = cj.grad.dot(v);
            return -(v * (2.0 * gv) - cj.grad * v.norm_squared());
        }
        let c = christoffel_from_jet(&self.jet_unchecked(x));
        let mut a = Vector2::zeros();
        for i in 0..2 {
            let mut s = 0.0;
            for j in 0..2 {
                for k in 0..2 {
                    s += c[i][j][k] * v[j] * v[k];
                }
            }
            a[i] = -s;
        }
        a
    }

    /// Gauss curvature: `-e^{-2φ} Δφ` for conformal entries, Brioschi otherwise.
    pub fn gauss_curvature(&self, x: &Point) -> Result<f64> {
        self.chart.check(x)?;
        Ok(self.gauss_curvature_unchecked(x))
    }

    #[inline]
    pub fn gauss_curvature_unchecked(&self, x: &Point) -> f64 {
        match self.conformal_jet(x) {
            Some(cj) => -(-2.0 * cj.phi).exp() * (cj.hess[(0, 0)] + cj.hess[(1, 1)]),
            None => brioschi(&self.jet_unchecked(x)),
        }
    }

    pub fn norm(&self, x: &Point, v: &Vector2<f64>) -> f64 {
        self.inner(x, v, v).sqrt()
    }

    pub fn inner(&self, x: &Point, a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
        a.dot(&(self.metric_unchecked(x) * b))
    }
}

fn check_spd(g: &Matrix2<f64>, x: &Point) -> Result<()> {
    let tr = g[(0, 0)] + g[(1, 1)];
    let det = g.determinant();
    let disc = ((tr * tr) / 4.0 - det).max(0.0).sqrt();
    let min_eig = tr / 2.0 - disc;
    let symmetric = (g[(0, 1)] - g[(1, 0)]).abs() <= 1e-14 * tr.abs().max(1.0);
    if min_eig > 0.0 && symmetric {
        Ok(())
    } else {
        Err(Error::NotPositiveDefinite { x: x.x, y: x.y, min_eig })
    }
}

/// Γ^i_{jk} = ½ g^{il} (∂_j g_{lk} + ∂_k g_{lj} − ∂_l g_{jk}).
pub fn christoffel_from_jet(jet: &MetricJet) -> Christoffel {
    let ginv = jet.g.try_inverse().expect("metric is invertible");
    let mut out = [[[0.0; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let mut s = 0.0;
                for l in 0..2 {
                    s += ginv[(i, l)]
                        * (jet.dg[j][(l, k)] + jet.dg[k][(l, j)] - jet.dg[l][(j, k)]);
                }
                out[i][j][k] = 0.5 * s;
            }
        }
    }
    out
}

/// Brioschi formula for the Gauss curvature in terms of `E, F, G` and their partials.
pub fn brioschi(jet: &MetricJet) -> f64 {
    let (e, f, g) = (jet.g[(0, 0)], jet.g[(0, 1)], jet.g[(1, 1)]);
    let (e_u, f_u, g_u) = (jet.dg[0][(0, 0)], jet.dg[0][(0, 1)], jet.dg[0][(1, 1)]);
    let (e_v, f_v, g_v) = (jet.dg[1][(0, 0)], jet.dg[1][(0, 1)], jet.dg[1][(1, 1)]);
    let e_vv = jet.d2g[1][1][(0, 0)];
    let f_uv = jet.d2g[0][1][(0, 1)];
    let g_uu = jet.d2g[0][0][(1, 1)];
    let det3 = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let a = det3([
        [-0.5 * e_vv + f_uv - 0.5 * g_uu, 0.5 * e_u, f_u - 0.5 * e_v],
        [f_v - 0.5 * g_u, e, f],
        [0.5 * g_v, f, g],
    ]);
    let b = det3([[0.0, 0.5 * e_v, 0.5 * g_u], [0.5 * e_v, e, f], [0.5 * g_u, f, g]]);
    let w = e * g - f * f;
    (a - b) / (w * w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart() -> ChartRect {
        ChartRect::square(2.0)
    }

    #[test]
    fn euclidean_identity() {
        let m = MetricSpec::euclidean(chart());
        assert_eq!(m.metric_at(&Point::new(0.3, -0.2)).unwrap(), Matrix2::identity());
        let c = m.christoffel(&Point::new(0.1, 0.7)).unwrap();
        assert!(c.iter().flatten().flatten().all(|&v| v == 0.0));
        assert_eq!(m.gauss_curvature(&Point::new(0.5, 0.5)).unwrap(), 0.0);
    }

    #[test]
    fn sphere_model_at_origin() {
        let m = MetricSpec::constant_curvature(1.0, chart());
        let g = m.metric_at(&Point::zeros()).unwrap();
        assert!((g - Matrix2::identity() * 4.0).norm() < 1e-15);
        let c = m.christoffel(&Point::zeros()).unwrap();
        assert!(c.iter().flatten().flatten().all(|&v| v.abs() < 1e-15));
    }

    #[test]
    fn bump_value_matches_profile() {
        let m = MetricSpec::conformal_bump(Point::zeros(), 0.5, 0.3, chart());
        let g = m.metric_at(&Point::new(1.0, 0.0)).unwrap();
        // φ(1,0) = 0.5 exp(-1/0.09)
        let phi = 0.5 * (-1.0f64 / 0.09).exp();
        assert!((g[(0, 0)] - (2.0 * phi).exp()).abs() < 1e-15);
        assert_eq!(g[(0, 1)], 0.0);
    }

    #[test]
    fn conformal_christoffel_pattern() {
        let m = MetricSpec::conformal_bump(Point::new(0.1, -0.2), 0.7, 0.4, chart());
        let x = Point::new(0.25, 0.05);
        let c = m.christoffel(&x).unwrap();
        // symbolic: Γ^i_jk = δ_ij φ_k + δ_ik φ_j − δ_jk φ_i, φ differentiated by hand
        let d = x - Point::new(0.1, -0.2);
        let e = 0.7 * (-d.norm_squared() / 0.16).exp();
        let (px, py) = (-2.0 * e * d.x / 0.16, -2.0 * e * d.y / 0.16);
        let expect = [[[px, py], [py, -px]], [[-py, px], [px, py]]];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    assert!((c[i][j][k] - expect[i][j][k]).abs() < 1e-12, "{i}{j}{k}");
                    assert_eq!(c[i][j][k], c[i][k][j]);
                }
            }
        }
    }

    #[test]
    fn sphere_curvature_brioschi_cross_check() {
        let m = MetricSpec::constant_curvature(1.0, chart());
        for p in [Point::new(0.3, -0.4), Point::new(-1.1, 0.2), Point::new(0.9, 1.3)] {
            let k = m.gauss_curvature(&p).unwrap();
            let kb = brioschi(&m.jet(&p).unwrap());
            assert!((k - 1.0).abs() < 1e-8);
            assert!((kb - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn bump_curvature_at_center_matches_fd_laplacian() {
        let c = Point::new(0.1, 0.2);
        let m = MetricSpec::conformal_bump(c, 0.5, 0.3, chart());
        let phi = |p: Point| 0.5 * (-(p - c).norm_squared() / 0.09).exp();
        let h = 1e-4;
        let lap = (phi(c + Point::new(h, 0.0)) + phi(c - Point::new(h, 0.0))
            + phi(c + Point::new(0.0, h))
            + phi(c - Point::new(0.0, h))
            - 4.0 * phi(c))
            / (h * h);
        let expect = -(-2.0 * phi(c)).exp() * lap;
        let k = m.gauss_curvature(&c).unwrap();
        assert!((k - expect).abs() < 1e-5 * expect.abs(), "{k} vs {expect}");
    }

    #[test]
    fn custom_spd_matches_conformal_equivalent() {
        // g = (1 + x²) Id written as a polynomial table
        let p = Poly2 { terms: vec![(0, 0, 1.0), (2, 0, 1.0)] };
        let m = MetricSpec::new(
            MetricKind::CustomSpd { g11: p.clone(), g12: Poly2::default(), g22: p },
            chart(),
        );
        let x = Point::new(0.4, 0.3);
        // conformal: φ = ½ ln(1+x²), Δφ = (1 - x²)/(1 + x²)², K = -Δφ/(1+x²)
        let s = 1.0 + 0.16;
        let expect = -((1.0 - 0.16) / (s * s)) / s;
        assert!((m.gauss_curvature(&x).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn outside_chart_is_domain_error() {
        let m = MetricSpec::euclidean(ChartRect::square(1.0));
        assert!(matches!(m.metric_at(&Point::new(1.5, 0.0)), Err(Error::OutsideChart { .. })));
    }

    #[test]
    fn indefinite_custom_metric_rejected() {
        let m = MetricSpec::new(
            MetricKind::CustomSpd {
                g11: Poly2::constant(1.0),
                g12: Poly2::constant(2.0),
                g22: Poly2::constant(1.0),
            },
            chart(),
        );
        assert!(matches!(m.metric_at(&Point::zeros()), Err(Error::NotPositiveDefinite { .. })));
    }
}
