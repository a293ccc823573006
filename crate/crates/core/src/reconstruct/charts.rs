//! Coordinate charts built from travel times at a base sensor `z_0 = z_{j0}`:
//! `α(p) = (−grad r_p(z_0), r_p(z_0))` and `β(p) = (η, T_{z_0, η} − r_p(z_0))`.

use super::gradient::GradientTable;
use super::sigma::SigmaContext;
use crate::data::TravelTimeDataset;
use crate::error::{Error, Result};

pub fn alpha_coords(ds: &TravelTimeDataset, grads: &GradientTable, i: usize, j0: usize) -> Result<(f64, f64)> {
    let g = grads.get(i, j0);
    if g.is_nan() || !grads.is_smooth(i, j0) {
        return Err(Error::ChartUnavailable { source_id: i, sensor: j0 });
    }
    Ok((-g, ds.get(i, j0)))
}

/// `β` coordinates; requires the σ-set at `(j0, η)` to be closed, i.e. its
/// `T` attained by a boundary-classified member.
pub fn beta_coords(ctx: &SigmaContext<'_>, boundary: &[bool], i: usize, j0: usize) -> Result<(f64, f64)> {
    let (eta, r) = alpha_coords(ctx.ds, ctx.grads, i, j0)?;
    let s = ctx.build(j0, eta);
    match s.argmax {
        Some(a) if !s.thin && boundary[a] => Ok((eta, s.t_value - r)),
        _ => Err(Error::SigmaNotClosed { sensor: j0 }),
    }
}

/// Base sensor for a source: smooth and gradient-continuous at `j`, ranked by
/// smoothness margin. Margins above `saturate` count as ties, broken toward
/// the nearest sensor with `|v| ≤ v_cap` and `r ≥ r_min`. Sensors closer than
/// `r_min` distort the source neighborhood too much in `(v, r)` and come last.
pub fn choose_base_sensor(
    ds: &TravelTimeDataset,
    grads: &GradientTable,
    continuity: &[bool],
    i: usize,
    saturate: f64,
    v_cap: f64,
    r_min: f64,
) -> Option<usize> {
    let m = grads.m;
    grads
        .interior_sensors()
        .filter(|&j| continuity[i * m + j])
        .map(|j| {
            let r = ds.get(i, j);
            (j, grads.margin(i, j).min(saturate), (r < r_min, grads.get(i, j).abs() > v_cap), r)
        })
        .fold(None, |best: Option<(usize, f64, (bool, bool), f64)>, c| match best {
            None => Some(c),
            Some(b) if c.1 > b.1 || (c.1 == b.1 && (c.2, c.3) < (b.2, b.3)) => Some(c),
            b => b,
        })
        .map(|c| c.0)
}

/// Smallest coordinate gap between distinct sources sharing one chart.
pub fn min_pairwise_gap(coords: &[(f64, f64)]) -> f64 {
    let mut best = f64::INFINITY;
    for a in 0..coords.len() {
        for b in a + 1..coords.len() {
            let d = ((coords[a].0 - coords[b].0).powi(2) + (coords[a].1 - coords[b].1).powi(2)).sqrt();
            best = best.min(d);
        }
    }
    best
}
