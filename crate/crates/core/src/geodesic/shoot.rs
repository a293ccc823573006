//! Geodesic shooting, exit times, the exponential map and conjugate times.
//!
//! The state vector is `(x, y, ẋ, ẏ, j, j̇)`: the geodesic together with the
//! scalar Jacobi field `j̈ + K(γ) j = 0`, `j(0) = 0`, `j̇(0) = 1`, which in two
//! dimensions vanishes exactly at conjugate points.

use nalgebra::Vector2;

use super::integrator::{integrate, Stop, Tolerances, Trajectory};
use crate::error::{Error, Result};
use crate::manifold::{extend_domain, DomainSpec, MetricSpec, Point};

/// Unit (w.r.t. g) tangent vector at a chart point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVectorAt {
    pub base: Point,
    pub direction: Vector2<f64>,
}

impl UnitVectorAt {
    /// Normalizes `direction` in the metric at `base`.
    pub fn new(spec: &MetricSpec, base: Point, direction: Vector2<f64>) -> Result<Self> {
        spec.chart.check(&base)?;
        let n = spec.norm(&base, &direction);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidArgument("zero tangent vector".into()));
        }
        Ok(Self { base, direction: direction / n })
    }

    /// Direction at Euclidean angle `theta`, normalized in g.
    pub fn from_angle(spec: &MetricSpec, base: Point, theta: f64) -> Result<Self> {
        Self::new(spec, base, Vector2::new(theta.cos(), theta.sin()))
    }

    pub fn angle(&self) -> f64 {
        self.direction.y.atan2(self.direction.x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeodesicStatus {
    Exited,
    TrappedHorizonReached,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicSample {
    pub t: f64,
    pub point: Point,
    pub velocity: Vector2<f64>,
}

#[derive(Debug, Clone)]
pub struct GeodesicRecord {
    pub initial: UnitVectorAt,
    pub samples: Vec<GeodesicSample>,
    /// `f64::INFINITY` when the horizon was reached first.
    pub exit_time: f64,
    /// First Jacobi zero before the end of the record, or `f64::INFINITY`.
    pub conjugate_time: f64,
    pub status: GeodesicStatus,
}

impl GeodesicRecord {
    pub fn end(&self) -> &GeodesicSample {
        self.samples.last().unwrap()
    }

    /// Rows `t,x,y,vx,vy`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,x,y,vx,vy\n");
        for p in &self.samples {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                p.t, p.point.x, p.point.y, p.velocity.x, p.velocity.y
            ));
        }
        s
    }
}

/// Where integration is allowed to run.
#[derive(Debug, Clone, Copy)]
enum Region<'a> {
    Domain(&'a DomainSpec),
    Chart,
}

pub struct GeodesicSolver<'a> {
    pub spec: &'a MetricSpec,
    pub domain: &'a DomainSpec,
    pub tol: Tolerances,
    extended: Option<DomainSpec>,
}

pub const DEFAULT_EXTENSION: f64 = 0.05;

impl<'a> GeodesicSolver<'a> {
    pub fn new(spec: &'a MetricSpec, domain: &'a DomainSpec) -> Self {
        Self { spec, domain, tol: Tolerances::default(), extended: None }
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    /// Attaches the ε-offset extension used for conjugate-time horizons and
    /// the extended-domain cut test. Falls back to the largest admissible offset.
    pub fn with_extension(mut self, eps: f64) -> Result<Self> {
        let ext = match extend_domain(self.domain, self.spec, eps) {
            Ok(d) => d,
            Err(Error::ConvexityLost { max_admissible, .. }) if max_admissible > 0.0 => {
                extend_domain(self.domain, self.spec, 0.9 * max_admissible)?
            }
            Err(e) => return Err(e),
        };
        self.extended = Some(ext);
        Ok(self)
    }

    pub fn extended(&self) -> Option<&DomainSpec> {
        self.extended.as_ref()
    }

    fn rhs(&self) -> impl Fn(&[f64; 6]) -> [f64; 6] + '_ {
        move |y: &[f64; 6]| {
            let x = Point::new(y[0], y[1]);
            let v = Vector2::new(y[2], y[3]);
            let a = self.spec.geodesic_accel(&x, &v);
            let k = self.spec.gauss_curvature_unchecked(&x);
            [y[2], y[3], a.x, a.y, y[5], -k * y[4]]
        }
    }

    fn run(
        &self,
        init: &UnitVectorAt,
        t_max: f64,
        region: Region<'_>,
        stop_at_conjugate: bool,
        record: bool,
    ) -> Result<Trajectory<6>> {
        let y0 = [init.base.x, init.base.y, init.direction.x, init.direction.y, 0.0, 1.0];
        let chart = self.spec.chart;
        let chart_sd = move |x: f64, y: f64| {
            (chart.x_min - x).max(x - chart.x_max).max(chart.y_min - y).max(y - chart.y_max)
        };
        let mut hint: Option<f64> = None;
        let mut region_sd = move |y: &[f64; 6]| -> f64 {
            match region {
                Region::Domain(d) => {
                    let (sd, th) = d.signed_distance(&Point::new(y[0], y[1]), hint);
                    hint = Some(th);
                    sd.max(chart_sd(y[0], y[1]))
                }
                Region::Chart => chart_sd(y[0], y[1]),
            }
        };
        let event = move |y: &[f64; 6]| {
            let r = region_sd(y);
            if stop_at_conjugate {
                r.max(-y[4])
            } else {
                r
            }
        };
        integrate(self.rhs(), y0, t_max, &self.tol, event, record)
    }

    /// Integrates until the geodesic leaves the domain or `t_max` is reached.
    pub fn shoot(&self, init: &UnitVectorAt, t_max: f64) -> Result<GeodesicRecord> {
        if !(t_max > 0.0) {
            return Err(Error::InvalidArgument(format!("t_max must be positive, got {t_max}")));
        }
        let tr = self.run(init, t_max, Region::Domain(self.domain), false, true)?;
        let samples: Vec<GeodesicSample> = tr
            .ts
            .iter()
            .zip(&tr.ys)
            .map(|(&t, y)| GeodesicSample {
                t,
                point: Point::new(y[0], y[1]),
                velocity: Vector2::new(y[2], y[3]),
            })
            .collect();
        let conjugate_time = first_jacobi_zero(&tr);
        let (exit_time, status) = match tr.stop {
            Stop::Event => (tr.t_end(), GeodesicStatus::Exited),
            Stop::Horizon => (f64::INFINITY, GeodesicStatus::TrappedHorizonReached),
        };
        Ok(GeodesicRecord { initial: *init, samples, exit_time, conjugate_time, status })
    }

    /// Exit time `τ_exit` (infinite if trapped past `t_max`).
    pub fn exit_time(&self, init: &UnitVectorAt, t_max: f64) -> Result<f64> {
        Ok(self.exit_state(init, t_max)?.0)
    }

    /// Exit time with the exit point and velocity.
    pub fn exit_state(&self, init: &UnitVectorAt, t_max: f64) -> Result<(f64, Point, Vector2<f64>)> {
        let tr = self.run(init, t_max, Region::Domain(self.domain), false, false)?;
        let y = tr.y_end();
        let t = if tr.stop == Stop::Event { tr.t_end() } else { f64::INFINITY };
        Ok((t, Point::new(y[0], y[1]), Vector2::new(y[2], y[3])))
    }

    /// Exit time from the extended domain.
    pub fn extended_exit_time(&self, init: &UnitVectorAt, t_max: f64) -> Result<f64> {
        let ext = self.extended.as_ref().unwrap_or(self.domain);
        let tr = self.run(init, t_max, Region::Domain(ext), false, false)?;
        Ok(if tr.stop == Stop::Event { tr.t_end() } else { f64::INFINITY })
    }

    /// Point and velocity at time `t`, ignoring the domain (chart only).
    pub fn flow_free(&self, init: &UnitVectorAt, t: f64) -> Result<(Point, Vector2<f64>)> {
        if t == 0.0 {
            return Ok((init.base, init.direction));
        }
        let tr = self.run(init, t, Region::Chart, false, false)?;
        let y = tr.y_end();
        if tr.stop == Stop::Event {
            return Err(Error::OutsideChart { x: y[0], y: y[1] });
        }
        Ok((Point::new(y[0], y[1]), Vector2::new(y[2], y[3])))
    }

    /// Chart-only trajectory samples up to `t` (used for path validation).
    pub fn trace_free(&self, init: &UnitVectorAt, t: f64) -> Result<Vec<Point>> {
        let tr = self.run(init, t, Region::Chart, false, true)?;
        if tr.stop == Stop::Event {
            let y = tr.y_end();
            return Err(Error::OutsideChart { x: y[0], y: y[1] });
        }
        Ok(tr.ys.iter().map(|y| Point::new(y[0], y[1])).collect())
    }

    /// `exp_p(w)`, defined while `‖w‖_g` does not exceed the exit time.
    pub fn exp_map(&self, p: Point, w: Vector2<f64>) -> Result<Point> {
        self.spec.chart.check(&p)?;
        let len = self.spec.norm(&p, &w);
        if len == 0.0 {
            return Ok(p);
        }
        let init = UnitVectorAt { base: p, direction: w / len };
        let tr = self.run(&init, len, Region::Domain(self.domain), false, false)?;
        if tr.stop == Stop::Event && tr.t_end() < len - self.tol.event {
            return Err(Error::BeyondExit { requested: len, exit_time: tr.t_end() });
        }
        let y = tr.y_end();
        Ok(Point::new(y[0], y[1]))
    }

    /// First zero of the Jacobi field before `t_max` and before the geodesic
    /// leaves the extended domain; `f64::INFINITY` if none.
    pub fn conjugate_time(&self, init: &UnitVectorAt, t_max: f64) -> Result<f64> {
        let ext = self.extended.as_ref().unwrap_or(self.domain);
        let tr = self.run(init, t_max, Region::Domain(ext), true, false)?;
        if tr.stop == Stop::Event && tr.y_end()[4] <= 1e-6 {
            Ok(tr.t_end())
        } else {
            Ok(f64::INFINITY)
        }
    }
}

fn first_jacobi_zero(tr: &Trajectory<6>) -> f64 {
    for w in tr.ys.windows(2).zip(tr.ts.windows(2)) {
        let (ys, ts) = w;
        if ts[0] > 0.0 && ys[0][4] > 0.0 && ys[1][4] <= 0.0 {
            // linear interpolation inside the step; exact values come from conjugate_time
            let (a, b) = (ys[0][4], ys[1][4]);
            return ts[0] + (ts[1] - ts[0]) * a / (a - b);
        }
    }
    f64::INFINITY
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::catalog::Preset;
    use crate::manifold::{ChartRect, FourierCurve};
    use std::f64::consts::PI;

    fn disk() -> (MetricSpec, DomainSpec) {
        Preset::Disk.build().unwrap()
    }

    #[test]
    fn straight_lines_in_unit_disk() {
        let (m, d) = disk();
        let s = GeodesicSolver::new(&m, &d);
        let r = s.shoot(&UnitVectorAt::from_angle(&m, Point::zeros(), 0.0).unwrap(), 10.0).unwrap();
        assert_eq!(r.status, GeodesicStatus::Exited);
        assert!((r.exit_time - 1.0).abs() < 1e-10);
        assert!((r.end().point - Point::new(1.0, 0.0)).norm() < 1e-9);
        assert_eq!(r.conjugate_time, f64::INFINITY);
        let t = s.exit_time(&UnitVectorAt::from_angle(&m, Point::new(0.5, 0.0), 0.0).unwrap(), 10.0).unwrap();
        assert!((t - 0.5).abs() < 1e-10);
    }

    #[test]
    fn exit_from_boundary_inward() {
        let (m, d) = disk();
        let s = GeodesicSolver::new(&m, &d);
        // chord from (1,0) at 45° off the inward normal has length 2 cos(π/4)
        let dir = Vector2::new(-(PI / 4.0).cos(), (PI / 4.0).sin());
        let t = s.exit_time(&UnitVectorAt::new(&m, Point::new(1.0, 0.0), dir).unwrap(), 10.0).unwrap();
        assert!((t - 2.0 * (PI / 4.0).cos()).abs() < 1e-9);
        // nearly grazing
        let a = 1e-4f64;
        let dir = Vector2::new(-a.sin(), a.cos());
        let t = s.exit_time(&UnitVectorAt::new(&m, Point::new(1.0, 0.0), dir).unwrap(), 10.0).unwrap();
        assert!((t - 2.0 * a.sin()).abs() < 1e-9, "{t}");
    }

    #[test]
    fn cap_exit_time_matches_sphere() {
        let (m, d) = Preset::Cap.build().unwrap();
        let s = GeodesicSolver::new(&m, &d);
        for th in [0.0, 1.0, 2.5, 4.0] {
            let t = s.exit_time(&UnitVectorAt::from_angle(&m, Point::zeros(), th).unwrap(), 10.0).unwrap();
            assert!((t - 2.0 * 0.5f64.atan()).abs() < 1e-9);
        }
    }

    #[test]
    fn exp_map_cases() {
        let (m, d) = disk();
        let s = GeodesicSolver::new(&m, &d);
        let p = s.exp_map(Point::new(0.1, 0.2), Vector2::new(0.3, 0.0)).unwrap();
        assert!((p - Point::new(0.4, 0.2)).norm() < 1e-12);
        assert_eq!(s.exp_map(Point::new(0.1, 0.2), Vector2::zeros()).unwrap(), Point::new(0.1, 0.2));
        match s.exp_map(Point::zeros(), Vector2::new(1.5, 0.0)) {
            Err(Error::BeyondExit { exit_time, .. }) => assert!((exit_time - 1.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
        let (m, d) = Preset::Cap.build().unwrap();
        let s = GeodesicSolver::new(&m, &d);
        for t in [0.2, 0.6, 0.9] {
            let dir = Vector2::new(0.6, 0.8);
            let w = dir * (t / m.norm(&Point::zeros(), &dir));
            let p = s.exp_map(Point::zeros(), w).unwrap();
            assert!((p - dir * (t / 2.0f64).tan()).norm() < 1e-9);
        }
    }

    #[test]
    fn unit_speed_is_preserved() {
        let (m, d) = Preset::Lens.build().unwrap();
        let s = GeodesicSolver::new(&m, &d);
        for th in [0.1, 0.7, 2.0] {
            let r = s.shoot(&UnitVectorAt::from_angle(&m, Point::new(-0.6, 0.05), th).unwrap(), 10.0).unwrap();
            for smp in &r.samples {
                assert!((m.norm(&smp.point, &smp.velocity) - 1.0).abs() < 1e-7);
            }
            assert!(r.samples.windows(2).all(|w| w[1].t > w[0].t));
            let (sd, _) = d.signed_distance(&r.end().point, None);
            assert!(sd.abs() < 1e-8);
        }
    }

    fn big_sphere(k: f64) -> (MetricSpec, DomainSpec) {
        let m = MetricSpec::constant_curvature(k, ChartRect::square(60.0));
        let d = DomainSpec::new(FourierCurve::circle(Point::zeros(), 50.0), (0.0, 1.0)).unwrap();
        (m, d)
    }

    #[test]
    fn conjugate_time_on_sphere() {
        let (m, d) = big_sphere(1.0);
        let s = GeodesicSolver::new(&m, &d);
        let p = Point::new(1.0, 0.0);
        for i in 0..8 {
            let th = 2.0 * PI * (i as f64 + 0.5) / 8.0;
            let t = s.conjugate_time(&UnitVectorAt::from_angle(&m, p, th).unwrap(), 4.0).unwrap();
            assert!((t - PI).abs() < 1e-6, "{th}: {t}");
        }
        let (m4, d4) = big_sphere(4.0);
        let s4 = GeodesicSolver::new(&m4, &d4);
        let t4 = s4
            .conjugate_time(&UnitVectorAt::from_angle(&m4, Point::new(0.5, 0.0), 2.0).unwrap(), 4.0)
            .unwrap();
        assert!((t4 - PI / 2.0).abs() < 1e-6);
    }

    #[test]
    fn euclidean_has_no_conjugate_points() {
        let (m, d) = disk();
        let s = GeodesicSolver::new(&m, &d).with_extension(0.05).unwrap();
        let t = s.conjugate_time(&UnitVectorAt::from_angle(&m, Point::zeros(), 0.3).unwrap(), 4.0).unwrap();
        assert_eq!(t, f64::INFINITY);
    }

    #[test]
    fn csv_export_has_header() {
        let (m, d) = disk();
        let s = GeodesicSolver::new(&m, &d);
        let r = s.shoot(&UnitVectorAt::from_angle(&m, Point::zeros(), 0.0).unwrap(), 10.0).unwrap();
        let csv = r.to_csv();
        assert!(csv.starts_with("t,x,y,vx,vy\n"));
        assert_eq!(csv.lines().count(), r.samples.len() + 1);
    }
}
