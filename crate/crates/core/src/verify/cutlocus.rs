//! Structure of the cut locus of one point: sample classes, the typical
//! polyline and its angle with ∂M, non-smooth boundary parameters of
//! `z ↦ d(p, z)`, and a two-resolution area estimate.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::Vector2;
use rayon::prelude::*;

use crate::distance::{
    boundary_distances, cut_locus_sample, cut_time_with, distance_eikonal_with, CutKind, CutOptions, CutPointRecord,
    DistanceField, EikonalOptions, FanOptions,
};
use crate::error::Result;
use crate::geodesic::{GeodesicSolver, UnitVectorAt};
use crate::manifold::{DomainSpec, MetricSpec, Point};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutLocusOptions {
    pub directions: usize,
    pub cut: CutOptions,
    /// Boundary parameters sampled for the non-smooth set.
    pub boundary_samples: usize,
    /// A second difference above `kappa_spike` times its local background marks a kink.
    pub kappa_spike: f64,
    /// Ridge threshold on `(u₊ + u₋ − 2u)/L`.
    pub ridge_tau: f64,
    /// Coarse lattice spacing; the fine lattice uses half of it.
    pub coarse_h: f64,
    /// Bisection levels between neighboring typical directions.
    pub refine_depth: usize,
}

impl Default for CutLocusOptions {
    fn default() -> Self {
        Self {
            directions: 512,
            cut: CutOptions::default(),
            boundary_samples: 512,
            kappa_spike: 8.0,
            ridge_tau: 0.1,
            coarse_h: 1.0 / 64.0,
            refine_depth: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutLocusReport {
    pub source: Point,
    pub samples: Vec<CutPointRecord>,
    pub typical: usize,
    pub conjugate: usize,
    pub atypical: usize,
    /// Direction spacing of the fan.
    pub dtheta: f64,
    /// Median distance between cut points of neighboring typical directions, per radian.
    pub speed: f64,
    /// Linkage radius `10·Δθ·speed`.
    pub link_radius: f64,
    /// Samples added by bisecting the fan.
    pub refined: usize,
    /// Conjugate samples grouped by single linkage; each group is one conjugate point.
    pub conjugate_clusters: Vec<Vec<usize>>,
    /// Smallest separation between distinct conjugate clusters.
    pub conjugate_separation: f64,
    /// Largest diameter of one conjugate cluster.
    pub conjugate_cluster_diameter: f64,
    pub typical_components: usize,
    /// Typical cut points ordered along the principal axis.
    pub polyline: Vec<Point>,
    pub polyline_max_gap: f64,
    /// Angle in degrees between the polyline end nearest ∂M and the boundary tangent.
    pub transversality_deg: Option<f64>,
    pub end_depth: Option<f64>,
    /// Runs of kinked boundary samples of `z ↦ d(p, z)`.
    pub boundary_nonsmooth: usize,
    pub boundary_nonsmooth_params: Vec<f64>,
    pub boundary_unresolved: usize,
    pub area_coarse: f64,
    pub area_fine: f64,
}

impl CutLocusReport {
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty() && self.boundary_nonsmooth == 0 && self.area_fine == 0.0
    }

    /// `area_fine / area_coarse`; 0 when both vanish.
    pub fn area_ratio(&self) -> f64 {
        if self.area_coarse == 0.0 {
            0.0
        } else {
            self.area_fine / self.area_coarse
        }
    }

    pub fn conjugate_isolated(&self) -> bool {
        self.conjugate_cluster_diameter <= self.link_radius && self.conjugate_separation > self.link_radius
    }

    pub fn summary_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "geotime-cutlocus v1");
        let _ = writeln!(s, "source={} {}", self.source.x, self.source.y);
        let _ = writeln!(s, "samples={} typical={} conjugate={} atypical={}", self.samples.len(), self.typical, self.conjugate, self.atypical);
        let _ = writeln!(s, "dtheta={} speed={} link_radius={} refined={}", self.dtheta, self.speed, self.link_radius, self.refined);
        let _ = writeln!(
            s,
            "conjugate_clusters={} cluster_diameter_max={} separation_min={} isolated={}",
            self.conjugate_clusters.len(),
            self.conjugate_cluster_diameter,
            self.conjugate_separation,
            self.conjugate_isolated()
        );
        let _ = writeln!(s, "typical_components={} polyline_points={} max_gap={}", self.typical_components, self.polyline.len(), self.polyline_max_gap);
        match (self.transversality_deg, self.end_depth) {
            (Some(a), Some(d)) => {
                let _ = writeln!(s, "transversality_deg={a} end_depth={d}");
            }
            _ => {
                let _ = writeln!(s, "transversality_deg=none");
            }
        }
        let _ = writeln!(s, "boundary_nonsmooth={} unresolved={}", self.boundary_nonsmooth, self.boundary_unresolved);
        for t in &self.boundary_nonsmooth_params {
            let _ = writeln!(s, "  theta={t}");
        }
        let _ = writeln!(s, "area_coarse={} area_fine={} ratio={}", self.area_coarse, self.area_fine, self.area_ratio());
        if self.is_empty() {
            let _ = writeln!(s, "cut locus empty");
        }
        s
    }

    pub fn samples_csv(&self) -> String {
        let mut s = String::from("direction,kind,cut_time,x,y,exit_time,conjugate_time,minimizers\n");
        for r in &self.samples {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                r.direction.angle(),
                r.kind.name(),
                r.cut_time,
                r.point.x,
                r.point.y,
                r.exit_time,
                r.conjugate_time,
                r.minimizer_count
            );
        }
        s
    }

    /// Overlay of ∂M, the source and the cut samples.
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
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#);
        let _ = writeln!(s, r##"<rect x="0" y="0" width="{size}" height="{size}" fill="#ffffff"/>"##);
        let pts: Vec<String> = poly
            .iter()
            .map(|p| {
                let (x, y) = map(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(s, r##"<polygon points="{}" fill="none" stroke="#444444"/>"##, pts.join(" "));
        for r in &self.samples {
            let (x, y) = map(&r.point);
            let color = match r.kind {
                CutKind::Conjugate => "#c0392b",
                CutKind::Atypical => "#8e44ad",
                _ => "#2e86c1",
            };
            let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2" fill="{color}"/>"#);
        }
        let (x, y) = map(&self.source);
        let _ = writeln!(s, r##"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="#27ae60"/>"##);
        s.push_str("</svg>\n");
        s
    }
}

pub fn cutlocus_report(spec: &MetricSpec, domain: &DomainSpec, p: &Point, opts: &CutLocusOptions) -> Result<CutLocusReport> {
    let solver = GeodesicSolver::new(spec, domain);
    let n = opts.directions.max(8);
    let dtheta = 2.0 * PI / n as f64;
    let mut samples = cut_locus_sample(&solver, p, n, &opts.cut)?;
    samples.sort_by(|a, b| a.direction.angle().rem_euclid(2.0 * PI).total_cmp(&b.direction.angle().rem_euclid(2.0 * PI)));
    let count = |s: &[CutPointRecord], k: CutKind| s.iter().filter(|r| r.kind == k).count();

    let index = |r: &CutPointRecord| ((r.direction.angle() / dtheta).round() as i64).rem_euclid(n as i64) as usize;
    let typ: Vec<CutPointRecord> = samples.iter().filter(|r| r.kind == CutKind::Typical).copied().collect();
    let mut rates = Vec::new();
    for a in 0..typ.len() {
        let b = (a + 1) % typ.len();
        if a != b && (index(&typ[a]) + 1) % n == index(&typ[b]) {
            rates.push((typ[b].point - typ[a].point).norm() / dtheta);
        }
    }
    let speed = median(&mut rates).unwrap_or(0.0);
    let link_radius = 10.0 * dtheta * speed;

    // the cut point moves much faster per radian near ∂M than the median;
    // bisect the fan where neighboring typical samples are farther apart than
    // the linkage radius, so a persisting gap means a genuine break
    let mut extra = Vec::new();
    for a in 0..typ.len() {
        let b = (a + 1) % typ.len();
        if a != b && (index(&typ[a]) + 1) % n == index(&typ[b]) {
            extra.extend(refine(&solver, &typ[a], &typ[b], link_radius, opts.refine_depth, &opts.cut)?);
        }
    }
    let refined = extra.len();
    samples.extend(extra);
    samples.sort_by(|a, b| a.direction.angle().rem_euclid(2.0 * PI).total_cmp(&b.direction.angle().rem_euclid(2.0 * PI)));
    let (typical, conjugate, atypical) =
        (count(&samples, CutKind::Typical), count(&samples, CutKind::Conjugate), count(&samples, CutKind::Atypical));

    let conj: Vec<Point> = samples.iter().filter(|r| r.kind == CutKind::Conjugate).map(|r| r.point).collect();
    let conjugate_clusters = single_linkage(&conj, link_radius);
    let mut conjugate_cluster_diameter = 0.0f64;
    for c in &conjugate_clusters {
        for &a in c {
            for &b in c {
                conjugate_cluster_diameter = conjugate_cluster_diameter.max((conj[a] - conj[b]).norm());
            }
        }
    }
    let mut conjugate_separation = f64::INFINITY;
    for (ci, c) in conjugate_clusters.iter().enumerate() {
        for d in &conjugate_clusters[ci + 1..] {
            for &a in c {
                for &b in d {
                    conjugate_separation = conjugate_separation.min((conj[a] - conj[b]).norm());
                }
            }
        }
    }

    let typ_pts: Vec<Point> = samples.iter().filter(|r| r.kind == CutKind::Typical).map(|r| r.point).collect();
    let typical_components = single_linkage(&typ_pts, link_radius).len();
    let polyline = order_along_axis(&typ_pts);
    let polyline_max_gap = polyline.windows(2).map(|w| (w[1] - w[0]).norm()).fold(0.0, f64::max);
    let (transversality_deg, end_depth) = match end_angle(domain, &polyline) {
        Some((a, d)) => (Some(a), Some(d)),
        None => (None, None),
    };

    let (boundary_nonsmooth_params, boundary_unresolved) = boundary_kinks(&solver, p, opts)?;
    let area_coarse = ridge_area(spec, domain, p, opts.coarse_h, opts.ridge_tau)?;
    let area_fine = ridge_area(spec, domain, p, 0.5 * opts.coarse_h, opts.ridge_tau)?;

    Ok(CutLocusReport {
        source: *p,
        typical,
        conjugate,
        atypical,
        dtheta,
        speed,
        link_radius,
        refined,
        conjugate_clusters,
        conjugate_separation,
        conjugate_cluster_diameter,
        typical_components,
        polyline,
        polyline_max_gap,
        transversality_deg,
        end_depth,
        boundary_nonsmooth: boundary_nonsmooth_params.len(),
        boundary_nonsmooth_params,
        boundary_unresolved,
        area_coarse,
        area_fine,
        samples,
    })
}

/// Cut records strictly between the directions of `a` and `b`, bisecting
/// while consecutive typical cut points are farther apart than `radius`.
fn refine(
    solver: &GeodesicSolver<'_>,
    a: &CutPointRecord,
    b: &CutPointRecord,
    radius: f64,
    depth: usize,
    opts: &CutOptions,
) -> Result<Vec<CutPointRecord>> {
    if depth == 0 || (a.point - b.point).norm() <= radius {
        return Ok(Vec::new());
    }
    let (ta, tb) = (a.direction.angle(), b.direction.angle());
    let mid = ta + 0.5 * (tb - ta + PI).rem_euclid(2.0 * PI) - 0.5 * PI;
    let init = UnitVectorAt::from_angle(solver.spec, a.direction.base, mid)?;
    let m = cut_time_with(solver, &init, opts)?;
    match m.kind {
        CutKind::BoundaryHit => Ok(Vec::new()),
        CutKind::Typical => {
            let mut out = refine(solver, a, &m, radius, depth - 1, opts)?;
            out.push(m);
            out.extend(refine(solver, &m, b, radius, depth - 1, opts)?);
            Ok(out)
        }
        _ => Ok(vec![m]),
    }
}

fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    Some(v[v.len() / 2])
}

/// Connected components of the graph joining points closer than `radius`.
fn single_linkage(pts: &[Point], radius: f64) -> Vec<Vec<usize>> {
    let mut label = vec![usize::MAX; pts.len()];
    let mut out = Vec::new();
    for s in 0..pts.len() {
        if label[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut comp = vec![s];
        label[s] = id;
        let mut k = 0;
        while k < comp.len() {
            let a = comp[k];
            for b in 0..pts.len() {
                if label[b] == usize::MAX && (pts[a] - pts[b]).norm() <= radius {
                    label[b] = id;
                    comp.push(b);
                }
            }
            k += 1;
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Points sorted by projection on their principal axis.
fn order_along_axis(pts: &[Point]) -> Vec<Point> {
    if pts.len() < 2 {
        return pts.to_vec();
    }
    let axis = principal_axis(pts);
    let mut v = pts.to_vec();
    v.sort_by(|a, b| a.dot(&axis).total_cmp(&b.dot(&axis)));
    v
}

fn principal_axis(pts: &[Point]) -> Vector2<f64> {
    let n = pts.len() as f64;
    let c = pts.iter().fold(Vector2::zeros(), |a, p| a + *p) / n;
    let mut m = nalgebra::Matrix2::zeros();
    for p in pts {
        let d = p - c;
        m += d * d.transpose();
    }
    let e = m.symmetric_eigen();
    let k = if e.eigenvalues[0] >= e.eigenvalues[1] { 0 } else { 1 };
    e.eigenvectors.column(k).into_owned()
}

/// Angle between ∂M and the polyline end closest to it, from the last five points.
fn end_angle(domain: &DomainSpec, poly: &[Point]) -> Option<(f64, f64)> {
    if poly.len() < 5 {
        return None;
    }
    let depth = |p: &Point| -domain.signed_distance(p, None).0;
    let (first, last) = (depth(&poly[0]), depth(&poly[poly.len() - 1]));
    let tail: Vec<Point> = if last <= first { poly[poly.len() - 5..].to_vec() } else { poly[..5].to_vec() };
    let end = if last <= first { poly[poly.len() - 1] } else { poly[0] };
    let d = principal_axis(&tail);
    let (sd, th) = domain.signed_distance(&end, None);
    let t = domain.curve.eval(th).d1.normalize();
    Some((d.dot(&t).abs().min(1.0).acos().to_degrees(), -sd))
}

/// Curve parameters where the second difference of `θ ↦ d(p, z(θ))` spikes,
/// one per run of flagged samples, plus the number of unresolved samples.
fn boundary_kinks(solver: &GeodesicSolver<'_>, p: &Point, opts: &CutLocusOptions) -> Result<(Vec<f64>, usize)> {
    let n = opts.boundary_samples.max(16);
    let thetas: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
    let f = boundary_distances(solver, p, &thetas, &FanOptions::default())?;
    let unresolved = f.iter().filter(|v| !v.is_finite()).count();
    let d2: Vec<f64> = (0..n).map(|k| (f[(k + 1) % n] + f[(k + n - 1) % n] - 2.0 * f[k]).abs()).collect();
    // a kink scales like Δθ against Δθ² for the smooth background, so compare
    // each sample with the median of its neighbors outside ±2
    let flag: Vec<bool> = (0..n)
        .map(|k| {
            let mut around: Vec<f64> = (3..=8)
                .flat_map(|o| [d2[(k + o) % n], d2[(k + n - o) % n]])
                .filter(|v| v.is_finite())
                .collect();
            match median(&mut around) {
                Some(m) => d2[k].is_finite() && d2[k] > opts.kappa_spike * m,
                None => false,
            }
        })
        .collect();
    if flag.iter().all(|&b| b) {
        return Ok((vec![0.0], unresolved));
    }
    // walk runs starting just after an unflagged sample so that wrap-around runs stay whole
    let start = (0..n).find(|&k| !flag[k]).unwrap_or(0);
    let mut out = Vec::new();
    let mut run: Vec<usize> = Vec::new();
    for step in 1..=n {
        let k = (start + step) % n;
        if flag[k] {
            run.push(k);
        } else if !run.is_empty() {
            let peak = *run.iter().max_by(|&&a, &&b| d2[a].total_cmp(&d2[b])).unwrap();
            out.push(thetas[peak]);
            run.clear();
        }
    }
    out.sort_by(|a, b| a.total_cmp(b));
    Ok((out, unresolved))
}

/// Area of lattice cells on which the distance field has a concave kink.
fn ridge_area(spec: &MetricSpec, domain: &DomainSpec, p: &Point, h: f64, tau: f64) -> Result<f64> {
    let field = distance_eikonal_with(spec, domain, p, &EikonalOptions { h, ..Default::default() })?;
    Ok(ridge_nodes(&field, p, tau) as f64 * h * h)
}

fn ridge_nodes(f: &DistanceField, p: &Point, tau: f64) -> usize {
    let h = f.h;
    let dirs: [(i64, i64, f64); 4] = [(1, 0, h), (0, 1, h), (1, 1, h * 2f64.sqrt()), (1, -1, h * 2f64.sqrt())];
    (1..f.ny.saturating_sub(1))
        .into_par_iter()
        .map(|j| {
            let mut count = 0;
            for i in 1..f.nx - 1 {
                if (f.node(i, j) - p).norm() < 4.0 * h {
                    continue;
                }
                let all_valid = (-1i64..=1).all(|dj| {
                    (-1i64..=1).all(|di| f.is_valid((i as i64 + di) as usize, (j as i64 + dj) as usize))
                });
                if !all_valid {
                    continue;
                }
                let u = f.get(i, j);
                let worst = dirs
                    .iter()
                    .map(|&(di, dj, l)| {
                        let a = f.get((i as i64 + di) as usize, (j as i64 + dj) as usize);
                        let b = f.get((i as i64 - di) as usize, (j as i64 - dj) as usize);
                        (a + b - 2.0 * u) / l
                    })
                    .fold(f64::INFINITY, f64::min);
                if worst <= -tau {
                    count += 1;
                }
            }
            count
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linkage_splits_far_groups() {
        let pts = [Point::new(0.0, 0.0), Point::new(0.05, 0.0), Point::new(1.0, 0.0)];
        assert_eq!(single_linkage(&pts, 0.1), vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn axis_ordering_follows_the_line() {
        let pts = [Point::new(0.2, 0.4), Point::new(0.0, 0.0), Point::new(0.1, 0.2)];
        let o = order_along_axis(&pts);
        let d = (o[2] - o[0]).norm();
        assert!((d - 0.2f64.hypot(0.4)).abs() < 1e-12);
        assert_eq!(o[1], Point::new(0.1, 0.2));
    }
}
