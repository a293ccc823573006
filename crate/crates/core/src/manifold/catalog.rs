//! Built-in fixtures: metric + domain pairs used by the CLI configs and tests.

use std::f64::consts::PI;

use nalgebra::Vector2;

use super::domain::{DomainSpec, FourierCurve};
use super::metric::{ChartRect, MetricSpec, Point};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Euclidean unit disk.
    Disk,
    /// Euclidean (2, 1) ellipse.
    Ellipse,
    /// Constant curvature K = 1, disk of chart radius 0.5 (a cap smaller than a hemisphere).
    Cap,
    /// Strong positive bump at the center of the unit disk; produces cut and conjugate points.
    Lens,
    /// Amplitude 0.2 bump in the unit disk.
    MildBump,
    /// Mild bump placed on the far side of the disk from Γ.
    FarBump,
    /// Non-convex horseshoe with Γ on one arm.
    Horseshoe,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::Disk,
        Preset::Ellipse,
        Preset::Cap,
        Preset::Lens,
        Preset::MildBump,
        Preset::FarBump,
        Preset::Horseshoe,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Disk => "disk",
            Preset::Ellipse => "ellipse",
            Preset::Cap => "cap",
            Preset::Lens => "lens",
            Preset::MildBump => "mild_bump",
            Preset::FarBump => "far_bump",
            Preset::Horseshoe => "horseshoe",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown preset '{name}'")))
    }

    /// Γ as perimeter fractions for the disk-like presets.
    pub fn default_gamma(&self) -> (f64, f64) {
        match self {
            Preset::Horseshoe => (0.0, 0.0),
            _ => (0.0, 1.0 / 3.0),
        }
    }

    pub fn build(&self) -> Result<(MetricSpec, DomainSpec)> {
        self.build_with_gamma(self.default_gamma())
    }

    pub fn build_with_gamma(&self, gamma: (f64, f64)) -> Result<(MetricSpec, DomainSpec)> {
        let unit = || FourierCurve::circle(Point::zeros(), 1.0);
        let chart = ChartRect::square(1.6);
        Ok(match self {
            Preset::Disk => (MetricSpec::euclidean(chart), DomainSpec::with_gamma_fraction(unit(), gamma)?),
            Preset::Ellipse => (
                MetricSpec::euclidean(ChartRect::square(2.6)),
                DomainSpec::with_gamma_fraction(FourierCurve::ellipse(Point::zeros(), 2.0, 1.0), gamma)?,
            ),
            Preset::Cap => (
                MetricSpec::constant_curvature(1.0, ChartRect::square(0.9)),
                DomainSpec::with_gamma_fraction(FourierCurve::circle(Point::zeros(), 0.5), gamma)?,
            ),
            Preset::Lens => (lens_metric(), DomainSpec::with_gamma_fraction(unit(), gamma)?),
            Preset::MildBump => (
                MetricSpec::conformal_bump(Point::new(-0.1, -0.15), 0.2, 0.45, chart),
                DomainSpec::with_gamma_fraction(unit(), gamma)?,
            ),
            Preset::FarBump => {
                let mid = 2.0 * PI * 0.5 * (gamma.0 + gamma.1) + PI;
                let c = Point::new(mid.cos(), mid.sin()) * 0.45;
                (
                    MetricSpec::conformal_bump(c, 0.2, 0.3, chart),
                    DomainSpec::with_gamma_fraction(unit(), gamma)?,
                )
            }
            Preset::Horseshoe => {
                let h = Horseshoe::default();
                (MetricSpec::euclidean(h.chart()), h.domain()?)
            }
        })
    }
}

pub fn lens_metric() -> MetricSpec {
    MetricSpec::conformal_bump(Point::zeros(), 0.8, 0.3, ChartRect::square(1.6))
}

/// U-shaped domain opening upward: an annular bottom (radii `inner`, `outer`)
/// with straight arms of height `arm` capped by half circles. Γ sits on the
/// left cap; the involute source set lives in the right arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Horseshoe {
    pub inner: f64,
    pub outer: f64,
    pub arm: f64,
    /// Γ on the left cap, as cap angles (radians, measured from +x at the cap center).
    pub gamma_cap_angles: (f64, f64),
    pub modes: usize,
}

impl Default for Horseshoe {
    fn default() -> Self {
        Self {
            inner: 1.0,
            outer: 2.0,
            arm: 3.0,
            gamma_cap_angles: (40f64.to_radians(), 140f64.to_radians()),
            modes: 600,
        }
    }
}

enum Piece {
    Arc { center: Point, radius: f64, from: f64, sweep: f64 },
    Line { from: Point, to: Point },
}

impl Piece {
    fn length(&self) -> f64 {
        match self {
            Piece::Arc { radius, sweep, .. } => radius * sweep.abs(),
            Piece::Line { from, to } => (to - from).norm(),
        }
    }

    fn at(&self, u: f64) -> Point {
        match self {
            Piece::Arc { center, radius, from, sweep } => {
                let a = from + sweep * u;
                center + Vector2::new(a.cos(), a.sin()) * *radius
            }
            Piece::Line { from, to } => from + (to - from) * u,
        }
    }
}

impl Horseshoe {
    pub fn chart(&self) -> ChartRect {
        let m = 0.3;
        ChartRect::new(-self.outer - m, self.outer + m, -self.outer - m, self.arm + self.cap_radius() + m)
    }

    pub fn cap_radius(&self) -> f64 {
        0.5 * (self.outer - self.inner)
    }

    fn pieces(&self) -> Vec<Piece> {
        let (ri, ro, h) = (self.inner, self.outer, self.arm);
        let rc = self.cap_radius();
        let mc = 0.5 * (ri + ro);
        vec![
            Piece::Arc { center: Point::zeros(), radius: ro, from: -PI / 2.0, sweep: PI / 2.0 },
            Piece::Line { from: Point::new(ro, 0.0), to: Point::new(ro, h) },
            Piece::Arc { center: Point::new(mc, h), radius: rc, from: 0.0, sweep: PI },
            Piece::Line { from: Point::new(ri, h), to: Point::new(ri, 0.0) },
            Piece::Arc { center: Point::zeros(), radius: ri, from: 0.0, sweep: -PI },
            Piece::Line { from: Point::new(-ri, 0.0), to: Point::new(-ri, h) },
            Piece::Arc { center: Point::new(-mc, h), radius: rc, from: 0.0, sweep: PI },
            Piece::Line { from: Point::new(-ro, h), to: Point::new(-ro, 0.0) },
            Piece::Arc { center: Point::zeros(), radius: ro, from: PI, sweep: PI / 2.0 },
        ]
    }

    /// Exact piecewise boundary at arc length `s` from the bottom point `(0, -outer)`.
    pub fn exact_point(&self, s: f64) -> Point {
        let pieces = self.pieces();
        let total: f64 = pieces.iter().map(Piece::length).sum();
        let mut s = s.rem_euclid(total);
        for p in &pieces {
            let l = p.length();
            if s <= l {
                return p.at(s / l);
            }
            s -= l;
        }
        pieces.last().unwrap().at(1.0)
    }

    pub fn exact_length(&self) -> f64 {
        self.pieces().iter().map(Piece::length).sum()
    }

    /// Arc-length offset of the left cap start.
    fn left_cap_start(&self) -> f64 {
        self.pieces().iter().take(6).map(Piece::length).sum()
    }

    pub fn domain(&self) -> Result<DomainSpec> {
        let total = self.exact_length();
        let n = 8 * self.modes;
        let samples: Vec<Point> =
            (0..n).map(|i| self.exact_point(total * i as f64 / n as f64)).collect();
        let curve = FourierCurve::from_samples(&samples, self.modes);
        let d = DomainSpec::new(curve, (0.0, 1.0))?;
        let rc = self.cap_radius();
        let start = self.left_cap_start();
        let (a, b) = self.gamma_cap_angles;
        // samples are uniform in exact arc length, which the fit carries to θ uniformly
        let to_theta = |s: f64| 2.0 * PI * s / total;
        let ga = d.s_of_theta(to_theta(start + rc * a));
        let gb = d.s_of_theta(to_theta(start + rc * b));
        d.with_gamma((ga, gb))
    }

    /// Boundary point where every Γ-to-right-arm minimizer wraps: bottom of the inner circle.
    pub fn pinch_point(&self) -> Point {
        Point::new(0.0, -self.inner)
    }

    /// Involute of the inner circle, parametrized by the tangent-departure
    /// angle `phi`. A minimizer from Γ wraps the inner circle counterclockwise
    /// and leaves it tangentially at `phi`; the free segment `offset − r·phi`
    /// shrinks exactly as the wrapped arc grows, so travel times from Γ agree.
    pub fn involute_point(&self, phi: f64, offset: f64) -> Point {
        let r = self.inner;
        let foot = Point::new(phi.cos(), phi.sin()) * r;
        let dir = Vector2::new(-phi.sin(), phi.cos());
        foot + dir * (offset - r * phi)
    }

    /// `count` involute points with departure angles in `[-0.9, -0.2]`.
    pub fn involute_set(&self, count: usize) -> Vec<Point> {
        let (a, b) = (-0.9, -0.2);
        let count = count.max(2);
        (0..count)
            .map(|i| self.involute_point(a + (b - a) * i as f64 / (count - 1) as f64, 0.5 * self.inner))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::frame::{check_strict_convexity, DEFAULT_MARGIN_FLOOR};

    #[test]
    fn presets_build() {
        for p in Preset::ALL {
            let (m, d) = p.build().unwrap();
            assert!(d.polyline().iter().all(|q| m.chart.contains(q)), "{}", p.name());
            assert_eq!(Preset::from_name(p.name()).unwrap(), p);
        }
    }

    #[test]
    fn convex_presets_pass_and_horseshoe_fails() {
        for p in Preset::ALL {
            let (m, d) = p.build().unwrap();
            let r = check_strict_convexity(&d, &m, 256, DEFAULT_MARGIN_FLOOR).unwrap();
            assert_eq!(r.pass, p != Preset::Horseshoe, "{}: {:?}", p.name(), r);
        }
    }

    #[test]
    fn horseshoe_fit_tracks_exact_curve() {
        let h = Horseshoe::default();
        let d = h.domain().unwrap();
        assert!((d.length() - h.exact_length()).abs() < 1e-2 * h.exact_length());
        for p in [Point::new(0.0, -1.5), Point::new(1.5, 2.0), Point::new(-1.5, 1.0)] {
            assert!(d.contains(&p));
        }
        for p in [Point::new(0.0, 0.0), Point::new(0.0, 2.0), Point::new(0.0, -2.5)] {
            assert!(!d.contains(&p));
        }
        let g0 = d.point(d.gamma.0);
        let g1 = d.point(d.gamma.1);
        assert!(g0.y > 3.2 && g1.y > 3.2 && g0.x < -1.0 && g1.x < -1.0, "{g0:?} {g1:?}");
        for q in h.involute_set(9) {
            assert!(d.contains(&q) && q.x > 0.0, "{q:?}");
        }
    }
}
