//! Non-convex domain where partial data fails to separate points.
//!
//! In the horseshoe every minimizer from Γ (left cap) into the right arm wraps
//! the inner circle through its bottom point `x₀`. Points on an involute of the
//! inner circle then have equal travel times to all of Γ while being far apart.
//! Distances come from fast marching on the masked lattice since minimizers
//! hug the boundary and shooting assumes interior geodesics.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::distance::{distance_eikonal_with, DistanceField, EikonalOptions};
use crate::error::{Error, Result};
use crate::manifold::catalog::{Horseshoe, Preset};
use crate::manifold::frame::DEFAULT_MARGIN_FLOOR;
use crate::manifold::{check_strict_convexity, DomainSpec, MetricSpec, Point};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseOptions {
    pub involute_count: usize,
    pub gamma_sensors: usize,
    pub boundary_samples: usize,
    pub h: f64,
    /// Data-diameter target on Γ.
    pub epsilon_collapse: f64,
    /// Geodesic-diameter target.
    pub d_sep: f64,
    /// Largest tolerated `|d(z, p) − d(z, x₀) − d(x₀, p)|`.
    pub funnel_tol: f64,
}

impl Default for CollapseOptions {
    fn default() -> Self {
        Self {
            involute_count: 8,
            gamma_sensors: 64,
            boundary_samples: 256,
            h: 1.0 / 256.0,
            epsilon_collapse: 1e-2,
            d_sep: 0.5,
            funnel_tol: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollapseReport {
    pub points: Vec<Point>,
    pub convexity_pass: bool,
    pub convexity_margin: f64,
    /// `max ‖r_p − r_q‖_∞` over Γ sensors.
    pub data_diameter_gamma: f64,
    /// Same over samples of the whole boundary.
    pub data_diameter_full: f64,
    pub geodesic_diameter: f64,
    pub funnel_defect: f64,
    /// The same construction on the Euclidean unit disk: smallest pairwise data gap on Γ.
    pub disk_min_gap: f64,
    pub epsilon_collapse: f64,
    pub d_sep: f64,
}

impl CollapseReport {
    pub fn collapses(&self) -> bool {
        self.data_diameter_gamma <= self.epsilon_collapse && self.geodesic_diameter >= self.d_sep
    }

    /// Full-boundary sensing separates the points again.
    pub fn full_boundary_separates(&self) -> bool {
        self.data_diameter_full > self.epsilon_collapse && self.data_diameter_full >= 0.5 * self.geodesic_diameter
    }

    pub fn disk_separates(&self) -> bool {
        self.disk_min_gap > self.epsilon_collapse
    }

    pub fn summary_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "geotime-collapse v1");
        let _ = writeln!(s, "points={}", self.points.len());
        let _ = writeln!(s, "convexity_pass={} convexity_margin={}", self.convexity_pass, self.convexity_margin);
        let _ = writeln!(s, "data_diameter_gamma={} (target <= {})", self.data_diameter_gamma, self.epsilon_collapse);
        let _ = writeln!(s, "geodesic_diameter={} (target >= {})", self.geodesic_diameter, self.d_sep);
        let _ = writeln!(s, "data_diameter_full_boundary={}", self.data_diameter_full);
        let _ = writeln!(s, "funnel_defect={}", self.funnel_defect);
        let _ = writeln!(s, "disk_min_gap={}", self.disk_min_gap);
        let _ = writeln!(
            s,
            "collapse={} full_boundary_separates={} disk_separates={}",
            self.collapses(),
            self.full_boundary_separates(),
            self.disk_separates()
        );
        s
    }

    pub fn points_csv(&self) -> String {
        let mut s = String::from("index,x,y\n");
        for (i, p) in self.points.iter().enumerate() {
            let _ = writeln!(s, "{i},{},{}", p.x, p.y);
        }
        s
    }

    /// Domain outline with Γ and the involute points.
    pub fn svg(&self, domain: &DomainSpec) -> String {
        let poly = domain.polyline();
        let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in poly {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        let size = 480.0;
        let scale = (size - 40.0) / (x1 - x0).max(y1 - y0);
        let map = |p: &Point| (20.0 + (p.x - x0) * scale, size - 20.0 - (p.y - y0) * scale);
        let join = |pts: &[Point]| {
            pts.iter()
                .map(|p| {
                    let (x, y) = map(p);
                    format!("{x:.2},{y:.2}")
                })
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#);
        let _ = writeln!(s, r##"<rect x="0" y="0" width="{size}" height="{size}" fill="#ffffff"/>"##);
        let _ = writeln!(s, r##"<polygon points="{}" fill="none" stroke="#444444"/>"##, join(poly));
        let gamma = gamma_points(domain, 64);
        let _ = writeln!(s, r##"<polyline points="{}" fill="none" stroke="#c0392b" stroke-width="3"/>"##, join(&gamma));
        for p in &self.points {
            let (x, y) = map(p);
            let _ = writeln!(s, r##"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="#2e86c1"/>"##);
        }
        s.push_str("</svg>\n");
        s
    }
}

fn gamma_points(domain: &DomainSpec, n: usize) -> Vec<Point> {
    let (a, b) = domain.gamma;
    let span = if b > a { b - a } else { b + domain.length() - a };
    (0..n).map(|k| domain.point(domain.wrap_s(a + span * k as f64 / (n - 1) as f64))).collect()
}

fn full_points(domain: &DomainSpec, n: usize) -> Vec<Point> {
    (0..n).map(|k| domain.point(domain.length() * k as f64 / n as f64)).collect()
}

fn rows(spec: &MetricSpec, fields: &[DistanceField], at: &[Point]) -> Result<Vec<Vec<f64>>> {
    fields
        .iter()
        .map(|f| {
            at.iter()
                .map(|z| {
                    f.sample(spec, z)
                        .ok_or_else(|| Error::Geometry(format!("no distance value at ({}, {})", z.x, z.y)))
                })
                .collect()
        })
        .collect()
}

fn sup_diameter(rows: &[Vec<f64>]) -> (f64, f64) {
    let (mut max, mut min) = (0.0f64, f64::INFINITY);
    for a in 0..rows.len() {
        for b in a + 1..rows.len() {
            let g = rows[a].iter().zip(&rows[b]).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            max = max.max(g);
            min = min.min(g);
        }
    }
    (max, min)
}

fn fields(spec: &MetricSpec, domain: &DomainSpec, pts: &[Point], h: f64) -> Result<Vec<DistanceField>> {
    let opts = EikonalOptions { h, ..Default::default() };
    pts.par_iter().map(|p| distance_eikonal_with(spec, domain, p, &opts)).collect()
}

pub fn counterexample_horseshoe(opts: &CollapseOptions) -> Result<CollapseReport> {
    let hs = Horseshoe::default();
    let (spec, domain) = Preset::Horseshoe.build()?;
    let convexity = check_strict_convexity(&domain, &spec, 4096, DEFAULT_MARGIN_FLOOR)?;
    let points = hs.involute_set(opts.involute_count);
    let f = fields(&spec, &domain, &points, opts.h)?;

    let gamma = gamma_points(&domain, opts.gamma_sensors.max(2));
    let on_gamma = rows(&spec, &f, &gamma)?;
    let (data_diameter_gamma, _) = sup_diameter(&on_gamma);
    let (data_diameter_full, _) = sup_diameter(&rows(&spec, &f, &full_points(&domain, opts.boundary_samples))?);
    let mut geodesic_diameter = 0.0f64;
    for a in &f {
        for q in &points {
            let d = a.sample(&spec, q).ok_or_else(|| Error::Geometry("involute point outside the lattice".into()))?;
            geodesic_diameter = geodesic_diameter.max(d);
        }
    }

    // every Γ-minimizer should pass through the pinch point
    let x0 = hs.pinch_point() - nalgebra::Vector2::new(0.0, 2.0 * opts.h);
    let fx = &fields(&spec, &domain, &[x0], opts.h)?[0];
    let via = rows(&spec, std::slice::from_ref(fx), &gamma)?.remove(0);
    let mut funnel_defect = 0.0f64;
    let mut worst = (0, 0);
    for (i, (row, field)) in on_gamma.iter().zip(&f).enumerate() {
        let d0 = field.sample(&spec, &x0).ok_or_else(|| Error::Geometry("pinch point outside the lattice".into()))?;
        for (j, (d, dz)) in row.iter().zip(&via).enumerate() {
            let defect = (d - dz - d0).abs();
            if defect > funnel_defect {
                funnel_defect = defect;
                worst = (i, j);
            }
        }
    }
    if funnel_defect > opts.funnel_tol {
        let (i, j) = worst;
        return Err(Error::Geometry(format!(
            "minimizers from Γ do not funnel through ({}, {}): defect {} at involute point {} ({}, {}) and Γ sample {} ({}, {})",
            x0.x, x0.y, funnel_defect, i, points[i].x, points[i].y, j, gamma[j].x, gamma[j].y
        )));
    }

    let disk_min_gap = disk_comparison(&points, opts)?;
    Ok(CollapseReport {
        points,
        convexity_pass: convexity.pass,
        convexity_margin: convexity.margin(),
        data_diameter_gamma,
        data_diameter_full,
        geodesic_diameter,
        funnel_defect,
        disk_min_gap,
        epsilon_collapse: opts.epsilon_collapse,
        d_sep: opts.d_sep,
    })
}

/// The involute set recentered in the Euclidean unit disk, measured on its Γ.
fn disk_comparison(points: &[Point], opts: &CollapseOptions) -> Result<f64> {
    let (spec, domain) = Preset::Disk.build()?;
    let c = points.iter().fold(nalgebra::Vector2::zeros(), |a, p| a + *p) / points.len() as f64;
    let moved: Vec<Point> = points.iter().map(|p| p - c).collect();
    let f = fields(&spec, &domain, &moved, opts.h)?;
    let (_, min) = sup_diameter(&rows(&spec, &f, &gamma_points(&domain, opts.gamma_sensors.max(2)))?);
    Ok(min)
}
