//! Cut times along geodesics and sampling of the cut locus.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::shooting::{angle_gap, distance_shooting_with, Connection, ShootingOptions};
use crate::error::{Error, Result};
use crate::geodesic::{GeodesicSolver, UnitVectorAt};
use crate::manifold::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CutKind {
    /// The geodesic minimizes all the way to the boundary; not a cut point of M.
    BoundaryHit,
    Typical,
    Conjugate,
    Atypical,
}

impl CutKind {
    pub fn name(&self) -> &'static str {
        match self {
            CutKind::BoundaryHit => "boundary_hit",
            CutKind::Typical => "typical",
            CutKind::Conjugate => "conjugate",
            CutKind::Atypical => "atypical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutPointRecord {
    pub direction: UnitVectorAt,
    pub cut_time: f64,
    pub kind: CutKind,
    pub minimizer_count: usize,
    pub point: Point,
    pub exit_time: f64,
    pub conjugate_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutOptions {
    /// Predicate slack: `d(p, γ(t)) < t − tol_cut` means γ stopped minimizing.
    pub tol_cut: f64,
    /// Cut and conjugate times closer than this are a conjugate cut point.
    pub tol_match: f64,
    /// Bisection stops when the bracket is shorter than this.
    pub bisect_tol: f64,
    pub shooting: ShootingOptions,
}

impl Default for CutOptions {
    fn default() -> Self {
        Self { tol_cut: 1e-8, tol_match: 1e-3, bisect_tol: 1e-6, shooting: ShootingOptions::default() }
    }
}

pub fn cut_time(solver: &GeodesicSolver<'_>, init: &UnitVectorAt) -> Result<CutPointRecord> {
    cut_time_with(solver, init, &CutOptions::default())
}

pub fn cut_time_with(solver: &GeodesicSolver<'_>, init: &UnitVectorAt, opts: &CutOptions) -> Result<CutPointRecord> {
    let p = init.base;
    let horizon = 100.0;
    let (exit_time, exit_point, _) = solver.exit_state(init, horizon)?;
    let t_end = if exit_time.is_finite() { exit_time } else { horizon };
    let conjugate_time = solver.conjugate_time(init, t_end + 1.0)?;
    let probe = |t: f64| -> Result<Option<Connection>> {
        let (x, _) = solver.flow_free(init, t)?;
        // the ray itself connects p to x with length t, so a failed solve
        // (typically at a caustic) means no shorter connection was found
        match distance_shooting_with(solver, &p, &x, &opts.shooting) {
            Ok(c) => Ok((c.distance < t - opts.tol_cut).then_some(c)),
            Err(Error::NoConnection { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    };
    if t_end <= 0.0 || probe(t_end)?.is_none() {
        return Ok(CutPointRecord {
            direction: *init,
            cut_time: t_end,
            kind: CutKind::BoundaryHit,
            minimizer_count: 1,
            point: exit_point,
            exit_time,
            conjugate_time,
        });
    }
    // τ_cut ≤ τ_con: still minimizing just before the conjugate time means the
    // cut point is the conjugate point (the length deficit past a conjugate
    // point grows too slowly for the bisection predicate to resolve)
    if conjugate_time < t_end && probe((conjugate_time - 0.5 * opts.tol_match).max(0.0))?.is_none() {
        let (point, _) = solver.flow_free(init, conjugate_time)?;
        return Ok(CutPointRecord {
            direction: *init,
            cut_time: conjugate_time,
            kind: CutKind::Conjugate,
            minimizer_count: 1,
            point,
            exit_time,
            conjugate_time,
        });
    }
    let (mut lo, mut hi) = (0.0, t_end.min(conjugate_time));
    while hi - lo > opts.bisect_tol {
        let mid = 0.5 * (lo + hi);
        if probe(mid)?.is_some() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let t_cut = 0.5 * (lo + hi);
    let (point, _) = solver.flow_free(init, t_cut)?;
    let at_hi = match probe(hi)? {
        Some(c) => c,
        None => Connection { distance: hi, minimizers: Vec::new(), candidates: Vec::new() },
    };
    // distinct minimizers meeting at the cut point: the ray itself plus the
    // competitors within a tolerance covering the bracket
    let slack = 1e-5 + 10.0 * (hi - lo);
    let ray = init.angle();
    let mut dirs = vec![ray];
    for m in at_hi.candidates.iter().filter(|m| m.length <= at_hi.distance + slack) {
        let a = m.direction.angle();
        if dirs.iter().all(|&d| angle_gap(d, a) >= opts.shooting.angle_merge) {
            dirs.push(a);
        }
    }
    let merges = at_hi
        .minimizers
        .iter()
        .any(|m| angle_gap(m.direction.angle(), ray) < opts.shooting.angle_merge);
    let kind = if (t_cut - conjugate_time).abs() <= opts.tol_match && (merges || dirs.len() == 1) {
        CutKind::Conjugate
    } else if dirs.len() >= 3 {
        CutKind::Atypical
    } else {
        CutKind::Typical
    };
    let minimizer_count = match kind {
        CutKind::Typical => 2,
        _ => dirs.len(),
    };
    Ok(CutPointRecord { direction: *init, cut_time: t_cut, kind, minimizer_count, point, exit_time, conjugate_time })
}

/// Genuine cut points over a uniform fan of `n_directions` at `p`. Directions
/// that leave the domain immediately (outward at a boundary point) are skipped.
pub fn cut_locus_sample(
    solver: &GeodesicSolver<'_>,
    p: &Point,
    n_directions: usize,
    opts: &CutOptions,
) -> Result<Vec<CutPointRecord>> {
    let n = n_directions.max(8);
    let recs: Vec<Result<Option<CutPointRecord>>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let th = 2.0 * PI * k as f64 / n as f64;
            let init = UnitVectorAt::from_angle(solver.spec, *p, th)?;
            if solver.exit_time(&init, 1e-3)? <= 0.0 {
                return Ok(None);
            }
            let r = cut_time_with(solver, &init, opts)?;
            Ok((r.kind != CutKind::BoundaryHit).then_some(r))
        })
        .collect();
    let mut out = Vec::new();
    for r in recs {
        if let Some(rec) = r? {
            out.push(rec);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::catalog::Preset;

    #[test]
    fn euclidean_rays_hit_boundary() {
        let (m, d) = Preset::Disk.build().unwrap();
        let s = GeodesicSolver::new(&m, &d);
        let r = cut_time(&s, &UnitVectorAt::from_angle(&m, Point::new(0.2, 0.1), 0.7).unwrap()).unwrap();
        assert_eq!(r.kind, CutKind::BoundaryHit);
        assert!((r.cut_time - r.exit_time).abs() < 1e-12);
        assert!(cut_locus_sample(&s, &Point::new(0.3, -0.2), 32, &CutOptions::default()).unwrap().is_empty());
    }

    #[test]
    fn lens_axis_ray_is_cut_before_exit() {
        let (m, d) = Preset::Lens.build().unwrap();
        let s = GeodesicSolver::new(&m, &d);
        let p = Point::new(-0.6, 0.0);
        let r = cut_time(&s, &UnitVectorAt::from_angle(&m, p, 0.0).unwrap()).unwrap();
        assert!(matches!(r.kind, CutKind::Typical | CutKind::Conjugate), "{r:?}");
        assert!(r.cut_time < r.exit_time);
        let r = cut_time(&s, &UnitVectorAt::from_angle(&m, p, 0.15).unwrap()).unwrap();
        assert_eq!(r.kind, CutKind::Typical, "{r:?}");
        assert!(r.point.y.abs() < 1e-3, "{r:?}");
    }
}
