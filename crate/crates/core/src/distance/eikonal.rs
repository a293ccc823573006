//! Fast marching for `‖∇u‖_{g⁻¹} = 1` on conformal metrics, where the
//! equation reduces to `|∇u| = e^{φ}` on a masked lattice.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::manifold::{DomainSpec, MetricSpec, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldMethod {
    Eikonal,
    Shooting,
}

impl FieldMethod {
    pub fn name(&self) -> &'static str {
        match self {
            FieldMethod::Eikonal => "eikonal",
            FieldMethod::Shooting => "shooting",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EikonalOptions {
    pub h: f64,
    pub second_order: bool,
    /// Nodes within this many cells of the source are initialized directly.
    pub init_cells: f64,
}

impl Default for EikonalOptions {
    fn default() -> Self {
        Self { h: 1.0 / 128.0, second_order: true, init_cells: 4.0 }
    }
}

/// Distance values on the lattice `x_min + i·h`, `y_min + j·h`, row-major.
/// Nodes outside the domain hold `NaN`.
#[derive(Debug, Clone)]
pub struct DistanceField {
    pub source: Point,
    pub x_min: f64,
    pub y_min: f64,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
    pub method: FieldMethod,
}

impl DistanceField {
    pub fn node(&self, i: usize, j: usize) -> Point {
        Point::new(self.x_min + i as f64 * self.h, self.y_min + j as f64 * self.h)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn is_valid(&self, i: usize, j: usize) -> bool {
        !self.get(i, j).is_nan()
    }

    /// Value at an arbitrary point: bilinear inside fully valid cells,
    /// otherwise a Hopf–Lax minimum over valid nodes within two cells.
    pub fn sample(&self, spec: &MetricSpec, q: &Point) -> Option<f64> {
        let fx = (q.x - self.x_min) / self.h;
        let fy = (q.y - self.y_min) / self.h;
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let (i, j) = (fx.floor() as usize, fy.floor() as usize);
        if i + 1 < self.nx && j + 1 < self.ny {
            let c = [self.get(i, j), self.get(i + 1, j), self.get(i, j + 1), self.get(i + 1, j + 1)];
            if c.iter().all(|v| !v.is_nan()) {
                let (a, b) = (fx - i as f64, fy - j as f64);
                return Some(
                    c[0] * (1.0 - a) * (1.0 - b) + c[1] * a * (1.0 - b) + c[2] * (1.0 - a) * b + c[3] * a * b,
                );
            }
        }
        let mut best = f64::INFINITY;
        let (i0, j0) = (i.saturating_sub(2), j.saturating_sub(2));
        for jj in j0..(j + 4).min(self.ny) {
            for ii in i0..(i + 4).min(self.nx) {
                let v = self.get(ii, jj);
                if v.is_nan() {
                    continue;
                }
                let n = self.node(ii, jj);
                best = best.min(v + segment_length(spec, &n, q));
            }
        }
        best.is_finite().then_some(best)
    }

    /// CSV dump with a commented header line.
    pub fn to_csv(&self) -> String {
        let mut s = format!(
            "# method={} h={} x_min={} y_min={} nx={} ny={} source={},{}\nx,y,value\n",
            self.method.name(),
            self.h,
            self.x_min,
            self.y_min,
            self.nx,
            self.ny,
            self.source.x,
            self.source.y
        );
        for j in 0..self.ny {
            for i in 0..self.nx {
                let v = self.get(i, j);
                if !v.is_nan() {
                    let p = self.node(i, j);
                    let _ = writeln!(s, "{},{},{}", p.x, p.y, v);
                }
            }
        }
        s
    }
}

/// Simpson-rule length of the chart segment `a → b` in a conformal metric.
pub(crate) fn segment_length(spec: &MetricSpec, a: &Point, b: &Point) -> f64 {
    let f = |x: &Point| spec.log_factor(x).unwrap_or(0.0).exp();
    let m = (a + b) * 0.5;
    (b - a).norm() * (f(a) + 4.0 * f(&m) + f(b)) / 6.0
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Outside,
    Far,
    Trial,
    Accepted,
}

pub fn distance_eikonal(spec: &MetricSpec, domain: &DomainSpec, source: &Point) -> Result<DistanceField> {
    distance_eikonal_with(spec, domain, source, &EikonalOptions::default())
}

pub fn distance_eikonal_with(
    spec: &MetricSpec,
    domain: &DomainSpec,
    source: &Point,
    opts: &EikonalOptions,
) -> Result<DistanceField> {
    if !spec.is_conformal() {
        return Err(Error::UnsupportedMethod(
            "fast marching supports conformal metrics only; use the shooting oracle for custom_spd".into(),
        ));
    }
    if !(opts.h > 0.0) {
        return Err(Error::InvalidArgument(format!("grid spacing must be positive, got {}", opts.h)));
    }
    spec.chart.check(source)?;
    let (sd, _) = domain.signed_distance(source, None);
    if sd > 1e-9 {
        return Err(Error::InvalidDomain(format!(
            "source ({}, {}) lies outside the domain",
            source.x, source.y
        )));
    }
    let h = opts.h;
    let poly = domain.polyline();
    let (mut bx0, mut by0, mut bx1, mut by1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in poly {
        bx0 = bx0.min(p.x);
        by0 = by0.min(p.y);
        bx1 = bx1.max(p.x);
        by1 = by1.max(p.y);
    }
    let x_min = (bx0 / h).floor() * h - h;
    let y_min = (by0 / h).floor() * h - h;
    let nx = ((bx1 - x_min) / h).ceil() as usize + 2;
    let ny = ((by1 - y_min) / h).ceil() as usize + 2;
    let mask = domain.interior_mask(x_min, y_min, h, nx, ny);
    let node = |k: usize| Point::new(x_min + (k % nx) as f64 * h, y_min + (k / nx) as f64 * h);
    let slowness: Vec<f64> = (0..nx * ny)
        .map(|k| if mask[k] { spec.log_factor(&node(k)).unwrap_or(0.0).exp() } else { 0.0 })
        .collect();

    let mut u = vec![f64::INFINITY; nx * ny];
    let mut state: Vec<State> = mask.iter().map(|&m| if m { State::Far } else { State::Outside }).collect();
    let mut heap = BinaryHeap::new();

    let r_init = opts.init_cells * h;
    let ci = ((source.x - x_min) / h).round() as isize;
    let cj = ((source.y - y_min) / h).round() as isize;
    let span = opts.init_cells.ceil() as isize + 1;
    let mut seeded = 0;
    for dj in -span..=span {
        for di in -span..=span {
            let (i, j) = (ci + di, cj + dj);
            if i < 0 || j < 0 || i >= nx as isize || j >= ny as isize {
                continue;
            }
            let k = j as usize * nx + i as usize;
            if state[k] == State::Outside {
                continue;
            }
            let p = node(k);
            if (p - source).norm() <= r_init {
                u[k] = segment_length(spec, source, &p);
                state[k] = State::Accepted;
                seeded += 1;
            }
        }
    }
    if seeded == 0 {
        // source in a region thinner than the lattice: seed the nearest valid nodes
        let mut best: Vec<(f64, usize)> = (0..nx * ny)
            .filter(|&k| mask[k])
            .map(|k| ((node(k) - source).norm(), k))
            .collect();
        best.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(_, k) in best.iter().take(4) {
            u[k] = segment_length(spec, source, &node(k));
            state[k] = State::Accepted;
        }
    }
    let accepted: Vec<usize> = (0..nx * ny).filter(|&k| state[k] == State::Accepted).collect();
    for &k in &accepted {
        for nb in neighbors(k, nx, ny) {
            if state[nb] == State::Far || state[nb] == State::Trial {
                let v = update(nb, &u, &state, &slowness, nx, ny, h, opts.second_order);
                if v < u[nb] {
                    u[nb] = v;
                    state[nb] = State::Trial;
                    heap.push(Entry(v, nb));
                }
            }
        }
    }
    while let Some(Entry(v, k)) = heap.pop() {
        if state[k] == State::Accepted || v > u[k] {
            continue;
        }
        state[k] = State::Accepted;
        for nb in neighbors(k, nx, ny) {
            if state[nb] == State::Far || state[nb] == State::Trial {
                let w = update(nb, &u, &state, &slowness, nx, ny, h, opts.second_order);
                if w < u[nb] {
                    u[nb] = w;
                    state[nb] = State::Trial;
                    heap.push(Entry(w, nb));
                }
            }
        }
    }
    let values = u
        .iter()
        .zip(&state)
        .map(|(&v, s)| if *s == State::Accepted { v } else { f64::NAN })
        .collect();
    Ok(DistanceField { source: *source, x_min, y_min, h, nx, ny, values, method: FieldMethod::Eikonal })
}

fn neighbors(k: usize, nx: usize, ny: usize) -> impl Iterator<Item = usize> {
    let (i, j) = (k % nx, k / nx);
    let mut out = [usize::MAX; 4];
    if i > 0 {
        out[0] = k - 1;
    }
    if i + 1 < nx {
        out[1] = k + 1;
    }
    if j > 0 {
        out[2] = k - nx;
    }
    if j + 1 < ny {
        out[3] = k + nx;
    }
    out.into_iter().filter(|&n| n != usize::MAX)
}

#[allow(clippy::too_many_arguments)]
fn update(k: usize, u: &[f64], state: &[State], f: &[f64], nx: usize, ny: usize, h: f64, second: bool) -> f64 {
    let (i, j) = (k % nx, k / nx);
    let acc = |idx: Option<usize>| idx.filter(|&n| state[n] == State::Accepted).map(|n| u[n]);
    // (a, b) per axis with the one-dimensional difference written as a·u − b
    let mut terms: [(f64, f64, f64); 2] = [(0.0, 0.0, f64::INFINITY); 2];
    let mut used = 0;
    for axis in 0..2 {
        let (stride, pos, len) = if axis == 0 { (1, i, nx) } else { (nx, j, ny) };
        let mut best: Option<(f64, Option<f64>)> = None;
        for dir in [-1isize, 1] {
            let p1 = pos as isize + dir;
            if p1 < 0 || p1 >= len as isize {
                continue;
            }
            let n1 = (k as isize + dir * stride as isize) as usize;
            let Some(u1) = acc(Some(n1)) else { continue };
            let p2 = pos as isize + 2 * dir;
            let u2 = if second && p2 >= 0 && p2 < len as isize {
                acc(Some((k as isize + 2 * dir * stride as isize) as usize)).filter(|&u2| u2 <= u1)
            } else {
                None
            };
            if best.is_none_or(|(b, _)| u1 < b) {
                best = Some((u1, u2));
            }
        }
        if let Some((u1, u2)) = best {
            terms[used] = match u2 {
                Some(u2) => (1.5 / h, (4.0 * u1 - u2) / (2.0 * h), u1),
                None => (1.0 / h, u1 / h, u1),
            };
            used += 1;
        }
    }
    let fk = f[k];
    let one_d = |t: &(f64, f64, f64)| (t.1 + fk) / t.0;
    match used {
        0 => f64::INFINITY,
        1 => one_d(&terms[0]),
        _ => {
            let (a, b) = (&terms[0], &terms[1]);
            let qa = a.0 * a.0 + b.0 * b.0;
            let qb = -2.0 * (a.0 * a.1 + b.0 * b.1);
            let qc = a.1 * a.1 + b.1 * b.1 - fk * fk;
            let disc = qb * qb - 4.0 * qa * qc;
            if disc >= 0.0 {
                let v = (-qb + disc.sqrt()) / (2.0 * qa);
                if v >= a.2 && v >= b.2 {
                    return v;
                }
            }
            one_d(a).min(one_d(b))
        }
    }
}
