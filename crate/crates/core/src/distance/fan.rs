//! Source-to-boundary distances from a single geodesic fan.
//!
//! In a strictly convex domain the minimizing geodesic from `p` to a boundary
//! point `z` runs inside `M` and first meets `∂M` at `z`, so `d(p, z)` is the
//! smallest exit time over directions whose exit point is `z`. The exit point
//! moves continuously with the direction; each sensor is bracketed on the fan
//! and refined by Illinois root finding on the exit curve parameter.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::Result;
use crate::geodesic::{GeodesicSolver, UnitVectorAt};
use crate::manifold::{boundary_frame, Point};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanOptions {
    pub directions: usize,
    /// Exit-parameter tolerance of the refined root (curve parameter units).
    pub root_tol: f64,
    pub horizon: f64,
}

impl Default for FanOptions {
    fn default() -> Self {
        Self { directions: 256, root_tol: 1e-13, horizon: 100.0 }
    }
}

fn wrap(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

#[derive(Clone, Copy)]
struct Sample {
    alpha: f64,
    phase: f64,
    t: f64,
}

/// Distances from `p` to the boundary points with curve parameters
/// `targets` (as returned by the domain's signed distance projection).
/// Entries that could not be resolved are `NaN`.
pub fn boundary_distances(
    solver: &GeodesicSolver<'_>,
    p: &Point,
    targets: &[f64],
    opts: &FanOptions,
) -> Result<Vec<f64>> {
    let spec = solver.spec;
    let domain = solver.domain;
    let (sd, th_p) = domain.signed_distance(p, None);
    let on_boundary = sd.abs() < 1e-9;
    let k = opts.directions.max(16);
    // direction parametrization: absolute angle inside, angle off the inward normal on ∂M
    let frame = if on_boundary { Some(boundary_frame(domain, spec, domain.s_of_theta(th_p))?) } else { None };
    let dir_of = |alpha: f64| -> Result<UnitVectorAt> {
        match &frame {
            Some(f) => UnitVectorAt::new(spec, *p, f.tangent * alpha.sin() + f.inward_normal * alpha.cos()),
            None => UnitVectorAt::from_angle(spec, *p, alpha),
        }
    };
    let shoot = |alpha: f64| -> Result<Option<(f64, f64)>> {
        let init = dir_of(alpha)?;
        let (t, x, _) = solver.exit_state(&init, opts.horizon)?;
        if !t.is_finite() || t <= 0.0 {
            return Ok(None);
        }
        let (_, th) = domain.signed_distance(&x, None);
        Ok(Some((th, t)))
    };

    let alphas: Vec<f64> = if on_boundary {
        (0..k).map(|i| -FRAC_PI_2 + PI * (i as f64 + 0.5) / k as f64).collect()
    } else {
        (0..k).map(|i| TAU * i as f64 / k as f64).collect()
    };
    let mut raw: Vec<Option<Sample>> = Vec::with_capacity(k + 2);
    if on_boundary {
        raw.push(Some(Sample { alpha: -FRAC_PI_2, phase: th_p, t: 0.0 }));
    }
    for &a in &alphas {
        raw.push(shoot(a)?.map(|(phase, t)| Sample { alpha: a, phase, t }));
    }
    if on_boundary {
        raw.push(Some(Sample { alpha: FRAC_PI_2, phase: th_p, t: 0.0 }));
    } else {
        raw.push(raw[0].map(|s| Sample { alpha: s.alpha + TAU, ..s }));
    }

    // unwrap phases along runs of successful shots
    let mut fan: Vec<Option<Sample>> = Vec::with_capacity(raw.len());
    let mut last: Option<f64> = None;
    for s in raw {
        match s {
            Some(mut s) => {
                if let Some(prev) = last {
                    s.phase = prev + wrap(s.phase - prev);
                }
                last = Some(s.phase);
                fan.push(Some(s));
            }
            None => {
                last = None;
                fan.push(None);
            }
        }
    }

    let mut out = vec![f64::NAN; targets.len()];
    for (j, &sigma) in targets.iter().enumerate() {
        let z = domain.curve.eval(sigma).p;
        if (z - p).norm() < 1e-12 {
            out[j] = 0.0;
            continue;
        }
        let mut best = f64::INFINITY;
        for w in fan.windows(2) {
            let (Some(a), Some(b)) = (w[0], w[1]) else { continue };
            let (lo, hi) = (a.phase.min(b.phase), a.phase.max(b.phase));
            let n0 = ((lo - sigma) / TAU).ceil() as i64;
            let n1 = ((hi - sigma) / TAU).floor() as i64;
            for n in n0..=n1 {
                let target = sigma + TAU * n as f64;
                if let Some(t) = refine(&shoot, a, b, target, opts.root_tol)? {
                    best = best.min(t);
                }
            }
        }
        if best.is_finite() {
            out[j] = best;
        }
    }
    Ok(out)
}

/// Illinois iteration on `phase(α) − target` inside one fan bracket.
fn refine<F>(shoot: &F, a: Sample, b: Sample, target: f64, tol: f64) -> Result<Option<f64>>
where
    F: Fn(f64) -> Result<Option<(f64, f64)>>,
{
    let (mut xa, mut fa) = (a.alpha, a.phase - target);
    let (mut xb, mut fb) = (b.alpha, b.phase - target);
    if fa == 0.0 {
        return Ok((a.t > 0.0).then_some(a.t));
    }
    if fb == 0.0 {
        return Ok((b.t > 0.0).then_some(b.t));
    }
    if fa.signum() == fb.signum() {
        return Ok(None);
    }
    // reference phase for unwrapping interior evaluations
    let mid_ref = 0.5 * (a.phase + b.phase);
    let mut side = 0i8;
    for _ in 0..100 {
        let x = (xa * fb - xb * fa) / (fb - fa);
        let x = if x > xa.min(xb) && x < xa.max(xb) { x } else { 0.5 * (xa + xb) };
        let Some((ph, t)) = shoot(x)? else { return Ok(None) };
        let f = mid_ref + wrap(ph - mid_ref) - target;
        if f.abs() < tol || (xb - xa).abs() < 1e-15 {
            return Ok(Some(t));
        }
        if f.signum() == fb.signum() {
            xb = x;
            fb = f;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            xa = x;
            fa = f;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Ok(None)
}
