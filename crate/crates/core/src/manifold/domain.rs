//! Closed boundary curves stored as Fourier coefficient tables.
//!
//! The chart curve is `θ ↦ (x(θ), y(θ))`, `θ ∈ [0, 2π)`, counterclockwise.
//! Euclidean arc length `s` is tabulated with Gauss–Legendre quadrature and
//! inverted with Newton, so every query in `s` is exact to round-off.

use std::f64::consts::PI;

use nalgebra::Vector2;

use super::metric::Point;
use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

/// 8-point Gauss–Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

#[derive(Debug, Clone, PartialEq)]
pub struct FourierCurve {
    pub x_cos: Vec<f64>,
    pub x_sin: Vec<f64>,
    pub y_cos: Vec<f64>,
    pub y_sin: Vec<f64>,
}

/// Curve value and first three θ-derivatives.
#[derive(Debug, Clone, Copy)]
pub struct CurveJet {
    pub p: Point,
    pub d1: Vector2<f64>,
    pub d2: Vector2<f64>,
    pub d3: Vector2<f64>,
}

impl FourierCurve {
    pub fn modes(&self) -> usize {
        self.x_cos.len().max(self.x_sin.len()).max(self.y_cos.len()).max(self.y_sin.len())
    }

    pub fn circle(center: Point, radius: f64) -> Self {
        Self::ellipse(center, radius, radius)
    }

    pub fn ellipse(center: Point, a: f64, b: f64) -> Self {
        Self {
            x_cos: vec![center.x, a],
            x_sin: vec![0.0, 0.0],
            y_cos: vec![center.y, 0.0],
            y_sin: vec![0.0, b],
        }
    }

    /// Least-squares trigonometric fit (a plain DFT) of samples taken at
    /// `θ_k = 2πk/n`, truncated to `modes` harmonics.
    pub fn from_samples(samples: &[Point], modes: usize) -> Self {
        let n = samples.len();
        let modes = modes.min(n / 2 - 1);
        let mut c = Self {
            x_cos: vec![0.0; modes + 1],
            x_sin: vec![0.0; modes + 1],
            y_cos: vec![0.0; modes + 1],
            y_sin: vec![0.0; modes + 1],
        };
        for (i, p) in samples.iter().enumerate() {
            let th = TWO_PI * i as f64 / n as f64;
            for k in 0..=modes {
                let (s, co) = (k as f64 * th).sin_cos();
                let w = if k == 0 { 1.0 } else { 2.0 } / n as f64;
                c.x_cos[k] += w * p.x * co;
                c.x_sin[k] += w * p.x * s;
                c.y_cos[k] += w * p.y * co;
                c.y_sin[k] += w * p.y * s;
            }
        }
        c.x_sin[0] = 0.0;
        c.y_sin[0] = 0.0;
        c
    }

    pub fn eval(&self, theta: f64) -> CurveJet {
        let mut out = CurveJet {
            p: Point::zeros(),
            d1: Vector2::zeros(),
            d2: Vector2::zeros(),
            d3: Vector2::zeros(),
        };
        let get = |v: &Vec<f64>, k: usize| v.get(k).copied().unwrap_or(0.0);
        for k in 0..self.modes() {
            let kf = k as f64;
            let (s, c) = (kf * theta).sin_cos();
            let (ax, bx, ay, by) =
                (get(&self.x_cos, k), get(&self.x_sin, k), get(&self.y_cos, k), get(&self.y_sin, k));
            out.p += Vector2::new(ax * c + bx * s, ay * c + by * s);
            out.d1 += Vector2::new(-ax * s + bx * c, -ay * s + by * c) * kf;
            out.d2 += Vector2::new(-ax * c - bx * s, -ay * c - by * s) * (kf * kf);
            out.d3 += Vector2::new(ax * s - bx * c, ay * s - by * c) * (kf * kf * kf);
        }
        out
    }

    /// Euclidean outward offset `c(θ) + ε N(θ)` resampled and refitted.
    pub fn offset(&self, eps: f64, samples: usize, modes: usize) -> Self {
        let pts: Vec<Point> = (0..samples)
            .map(|i| {
                let j = self.eval(TWO_PI * i as f64 / samples as f64);
                let t = j.d1.normalize();
                j.p + Vector2::new(t.y, -t.x) * eps
            })
            .collect();
        Self::from_samples(&pts, modes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Containment {
    Interior,
    Boundary,
    Exterior,
}

/// Boundary point with Euclidean arc-length derivatives.
#[derive(Debug, Clone, Copy)]
pub struct ArcJet {
    pub p: Point,
    /// Unit Euclidean tangent `dc/ds`.
    pub t: Vector2<f64>,
    /// `d²c/ds²`.
    pub tt: Vector2<f64>,
}

#[derive(Debug, Clone)]
pub struct DomainSpec {
    pub curve: FourierCurve,
    /// Measurement arc `[s_a, s_b]` in Euclidean arc length.
    pub gamma: (f64, f64),
    length: f64,
    nodes: usize,
    cum_arc: Vec<f64>,
    polyline: Vec<Point>,
}

impl DomainSpec {
    pub fn new(curve: FourierCurve, gamma: (f64, f64)) -> Result<Self> {
        let mut d = Self::build(curve);
        d.gamma = gamma;
        d.validate()?;
        Ok(d)
    }

    /// Builds the domain with Γ given as perimeter fractions.
    pub fn with_gamma_fraction(curve: FourierCurve, frac: (f64, f64)) -> Result<Self> {
        let mut d = Self::build(curve);
        d.gamma = (frac.0 * d.length, frac.1 * d.length);
        d.validate()?;
        Ok(d)
    }

    fn build(curve: FourierCurve) -> Self {
        let nodes = (16 * curve.modes()).max(1024);
        let polyline: Vec<Point> =
            (0..nodes).map(|i| curve.eval(TWO_PI * i as f64 / nodes as f64).p).collect();
        let mut cum_arc = Vec::with_capacity(nodes + 1);
        cum_arc.push(0.0);
        for i in 0..nodes {
            let a = TWO_PI * i as f64 / nodes as f64;
            let b = TWO_PI * (i + 1) as f64 / nodes as f64;
            let last = *cum_arc.last().unwrap();
            cum_arc.push(last + gl_speed(&curve, a, b));
        }
        let length = cum_arc[nodes];
        Self { curve, gamma: (0.0, 0.0), length, nodes, cum_arc, polyline }
    }

    /// Replaces the measurement arc (Euclidean arc length).
    pub fn with_gamma(mut self, gamma: (f64, f64)) -> Result<Self> {
        self.gamma = gamma;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let area = self.signed_area();
        if area <= 0.0 {
            return Err(Error::InvalidDomain("boundary curve must be counterclockwise".into()));
        }
        if let Some((i, j)) = self.self_intersection() {
            return Err(Error::InvalidDomain(format!(
                "boundary curve self-intersects (segments {i} and {j})"
            )));
        }
        let (a, b) = self.gamma;
        if !(a < b) || a < 0.0 || b > self.length + 1e-12 {
            return Err(Error::InvalidDomain(format!(
                "measurement arc [{a}, {b}] must satisfy 0 <= s_a < s_b <= L = {}",
                self.length
            )));
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn polyline(&self) -> &[Point] {
        &self.polyline
    }

    pub fn signed_area(&self) -> f64 {
        let n = self.polyline.len();
        (0..n)
            .map(|i| {
                let (a, b) = (self.polyline[i], self.polyline[(i + 1) % n]);
                a.x * b.y - b.x * a.y
            })
            .sum::<f64>()
            / 2.0
    }

    fn self_intersection(&self) -> Option<(usize, usize)> {
        let n = self.polyline.len();
        // coarse pass on a subsampled polygon keeps this O((n/4)^2)
        let stride = (n / 512).max(1);
        let pts: Vec<Point> = self.polyline.iter().step_by(stride).copied().collect();
        let m = pts.len();
        for i in 0..m {
            let (a, b) = (pts[i], pts[(i + 1) % m]);
            for j in (i + 2)..m {
                if i == 0 && j == m - 1 {
                    continue;
                }
                let (c, d) = (pts[j], pts[(j + 1) % m]);
                if segments_cross(a, b, c, d) {
                    return Some((i * stride, j * stride));
                }
            }
        }
        None
    }

    pub fn wrap_s(&self, s: f64) -> f64 {
        s.rem_euclid(self.length)
    }

    pub fn s_of_theta(&self, theta: f64) -> f64 {
        let th = theta.rem_euclid(TWO_PI);
        let step = TWO_PI / self.nodes as f64;
        let i = ((th / step).floor() as usize).min(self.nodes - 1);
        self.cum_arc[i] + gl_speed(&self.curve, i as f64 * step, th)
    }

    pub fn theta_of_s(&self, s: f64) -> f64 {
        let s = self.wrap_s(s);
        let i = match self.cum_arc.binary_search_by(|v| v.partial_cmp(&s).unwrap()) {
            Ok(i) => i.min(self.nodes - 1),
            Err(i) => i.saturating_sub(1).min(self.nodes - 1),
        };
        let step = TWO_PI / self.nodes as f64;
        let a = i as f64 * step;
        let (s0, s1) = (self.cum_arc[i], self.cum_arc[i + 1]);
        let mut th = a + step * (s - s0) / (s1 - s0).max(1e-300);
        for _ in 0..8 {
            let f = self.cum_arc[i] + gl_speed(&self.curve, a, th) - s;
            let sp = self.curve.eval(th).d1.norm();
            let dth = f / sp;
            th -= dth;
            if dth.abs() < 1e-15 {
                break;
            }
        }
        th
    }

    pub fn arc_jet(&self, s: f64) -> ArcJet {
        let j = self.curve.eval(self.theta_of_s(s));
        let sp = j.d1.norm();
        let t = j.d1 / sp;
        let tt = (j.d2 - t * j.d2.dot(&t)) / (sp * sp);
        ArcJet { p: j.p, t, tt }
    }

    pub fn point(&self, s: f64) -> Point {
        self.curve.eval(self.theta_of_s(s)).p
    }

    /// Signed Euclidean distance to the boundary (negative inside) and the
    /// curve parameter of the foot point. `hint` warm-starts the projection.
    pub fn signed_distance(&self, p: &Point, hint: Option<f64>) -> (f64, f64) {
        let mut th = match hint {
            Some(h) => h,
            None => self.nearest_vertex_theta(p),
        };
        let mut converged = false;
        for _ in 0..40 {
            let j = self.curve.eval(th);
            let r = j.p - p;
            let f = r.dot(&j.d1);
            let fp = j.d1.norm_squared() + r.dot(&j.d2);
            if fp <= 0.0 {
                break;
            }
            let step = (f / fp).clamp(-0.2, 0.2);
            th -= step;
            if step.abs() < 1e-14 {
                converged = true;
                break;
            }
        }
        if !converged && hint.is_some() {
            return self.signed_distance(p, None);
        }
        let j = self.curve.eval(th);
        let t = j.d1.normalize();
        let n_out = Vector2::new(t.y, -t.x);
        ((p - j.p).dot(&n_out), th.rem_euclid(TWO_PI))
    }

    fn nearest_vertex_theta(&self, p: &Point) -> f64 {
        let (i, _) = self
            .polyline
            .iter()
            .enumerate()
            .map(|(i, q)| (i, (q - p).norm_squared()))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        TWO_PI * i as f64 / self.nodes as f64
    }

    /// Winding-number containment against the dense polyline.
    pub fn contains(&self, p: &Point) -> bool {
        let n = self.polyline.len();
        let mut wn = 0i32;
        for i in 0..n {
            let (a, b) = (self.polyline[i], self.polyline[(i + 1) % n]);
            let cross = (b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y);
            if a.y <= p.y {
                if b.y > p.y && cross > 0.0 {
                    wn += 1;
                }
            } else if b.y <= p.y && cross < 0.0 {
                wn -= 1;
            }
        }
        wn != 0
    }

    pub fn classify(&self, p: &Point, tol: f64) -> Containment {
        let (sd, _) = self.signed_distance(p, None);
        if sd.abs() <= tol {
            Containment::Boundary
        } else if self.contains(p) {
            Containment::Interior
        } else {
            Containment::Exterior
        }
    }

    pub fn in_gamma(&self, s: f64) -> bool {
        let s = self.wrap_s(s);
        s >= self.gamma.0 && s <= self.gamma.1
    }

    /// Scanline interior mask over the node lattice `x_min + i·h`, `y_min + j·h`;
    /// row-major with `nx` columns.
    pub fn interior_mask(&self, x_min: f64, y_min: f64, h: f64, nx: usize, ny: usize) -> Vec<bool> {
        let mut mask = vec![false; nx * ny];
        let n = self.polyline.len();
        let mut xs = Vec::new();
        for j in 0..ny {
            let y = y_min + j as f64 * h;
            xs.clear();
            for i in 0..n {
                let (a, b) = (self.polyline[i], self.polyline[(i + 1) % n]);
                if (a.y <= y) != (b.y <= y) {
                    xs.push(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
                }
            }
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for pair in xs.chunks(2) {
                if pair.len() < 2 {
                    break;
                }
                let i0 = ((pair[0] - x_min) / h).ceil().max(0.0) as usize;
                let i1 = ((pair[1] - x_min) / h).floor();
                if i1 < 0.0 {
                    continue;
                }
                let i1 = (i1 as usize).min(nx.saturating_sub(1));
                for i in i0..=i1.max(i0) {
                    if i <= i1 && i < nx {
                        mask[j * nx + i] = true;
                    }
                }
            }
        }
        mask
    }
}

fn gl_speed(curve: &FourierCurve, a: f64, b: f64) -> f64 {
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    GL_NODES
        .iter()
        .zip(GL_WEIGHTS.iter())
        .map(|(x, w)| w * curve.eval(mid + half * x).d1.norm())
        .sum::<f64>()
        * half
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let orient = |p: Point, q: Point, r: Point| (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk() -> DomainSpec {
        DomainSpec::new(FourierCurve::circle(Point::zeros(), 1.0), (0.0, PI / 2.0)).unwrap()
    }

    #[test]
    fn circle_arc_length() {
        let d = disk();
        assert!((d.length() - TWO_PI).abs() < 1e-12);
        let p = d.point(PI / 2.0);
        assert!((p - Point::new(0.0, 1.0)).norm() < 1e-12);
        assert!((d.theta_of_s(1.234) - 1.234).abs() < 1e-12);
    }

    #[test]
    fn ellipse_arc_length_inverse() {
        let d = DomainSpec::new(FourierCurve::ellipse(Point::zeros(), 2.0, 1.0), (0.0, 1.0)).unwrap();
        // complete elliptic integral value: perimeter of (2,1) ellipse
        assert!((d.length() - 9.688_448_220_547_675).abs() < 1e-9);
        for s in [0.1, 2.0, 5.5, 9.0] {
            assert!((d.s_of_theta(d.theta_of_s(s)) - s).abs() < 1e-12);
        }
    }

    #[test]
    fn signed_distance_circle() {
        let d = disk();
        let (sd, th) = d.signed_distance(&Point::new(0.5, 0.0), None);
        assert!((sd + 0.5).abs() < 1e-12);
        assert!(th.abs() < 1e-9 || (th - TWO_PI).abs() < 1e-9);
        let (sd, _) = d.signed_distance(&Point::new(0.0, 1.3), Some(1.0));
        assert!((sd - 0.3).abs() < 1e-12);
        assert_eq!(d.classify(&Point::new(1.0, 0.0), 1e-9), Containment::Boundary);
        assert_eq!(d.classify(&Point::new(0.2, 0.1), 1e-9), Containment::Interior);
        assert_eq!(d.classify(&Point::new(1.2, 0.1), 1e-9), Containment::Exterior);
    }

    #[test]
    fn clockwise_and_empty_gamma_rejected() {
        let mut c = FourierCurve::circle(Point::zeros(), 1.0);
        c.y_sin[1] = -1.0;
        assert!(DomainSpec::new(c, (0.0, 1.0)).is_err());
        assert!(DomainSpec::new(FourierCurve::circle(Point::zeros(), 1.0), (1.0, 1.0)).is_err());
    }

    #[test]
    fn figure_eight_rejected() {
        let c = FourierCurve {
            x_cos: vec![0.0, 0.0],
            x_sin: vec![0.0, 1.0],
            y_cos: vec![0.0, 0.0, 0.0],
            y_sin: vec![0.0, 0.0, 0.5],
        };
        assert!(DomainSpec::new(c, (0.0, 0.1)).is_err());
    }

    #[test]
    fn mask_matches_winding() {
        let d = disk();
        let h = 0.05;
        let n = 45;
        let mask = d.interior_mask(-1.1, -1.1, h, n, n);
        for j in 0..n {
            for i in 0..n {
                let p = Point::new(-1.1 + i as f64 * h, -1.1 + j as f64 * h);
                if (p.norm() - 1.0).abs() > 1e-9 {
                    assert_eq!(mask[j * n + i], d.contains(&p), "{p:?}");
                }
            }
        }
    }
}
