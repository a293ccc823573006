//! Tangential gradients `grad_{∂M} r_p(z_j)` and the smoothness screen.

use super::gamma::GammaGeometry;
use super::stencil::{derivative_weights, second_difference};
use crate::data::TravelTimeDataset;

pub const GRADIENT_STENCIL: usize = 5;

/// Per (source, sensor) gradient value and smoothness flag, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientTable {
    pub m: usize,
    pub n: usize,
    /// `NaN` where no central stencil exists or the row is incomplete.
    pub value: Vec<f64>,
    pub smooth: Vec<bool>,
    /// `1 − max|D²|/(κ·median|D²|)` over the stencil; positive iff smooth.
    pub margin: Vec<f64>,
}

impl GradientTable {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.value[i * self.m + j]
    }

    #[inline]
    pub fn is_smooth(&self, i: usize, j: usize) -> bool {
        self.smooth[i * self.m + j]
    }

    #[inline]
    pub fn margin(&self, i: usize, j: usize) -> f64 {
        self.margin[i * self.m + j]
    }

    /// Sensors with a central stencil.
    pub fn interior_sensors(&self) -> std::ops::Range<usize> {
        GRADIENT_STENCIL / 2..self.m - GRADIENT_STENCIL / 2
    }
}

/// Gradient along increasing `u` divided by `λ`, with its smoothness flag.
/// `None` at the ends of the sensor range.
pub fn boundary_gradient(
    ds: &TravelTimeDataset,
    gg: &GammaGeometry,
    i: usize,
    j: usize,
    kappa_spike: f64,
) -> Option<(f64, bool)> {
    let row = row_gradients(ds, gg, i, kappa_spike);
    let (v, ok, _) = row[j];
    (!v.is_nan()).then_some((v, ok))
}

fn row_gradients(ds: &TravelTimeDataset, gg: &GammaGeometry, i: usize, kappa_spike: f64) -> Vec<(f64, bool, f64)> {
    let m = ds.m;
    let half = GRADIENT_STENCIL / 2;
    let row = ds.row(i);
    let mut out = vec![(f64::NAN, false, f64::NEG_INFINITY); m];
    if !row.iter().all(|v| v.is_finite()) || m < GRADIENT_STENCIL {
        return out;
    }
    let d2: Vec<f64> = (0..m)
        .map(|k| if k == 0 || k + 1 == m { f64::NAN } else { second_difference(&gg.arc, row, k).abs() })
        .collect();
    let mut sorted: Vec<f64> = d2.iter().copied().filter(|v| v.is_finite()).collect();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let median = sorted[sorted.len() / 2];
    let threshold = kappa_spike * median;
    for j in half..m - half {
        let nodes = &ds.u[j - half..=j + half];
        let w = derivative_weights(nodes, ds.u[j]);
        let d: f64 = w.iter().zip(&row[j - half..=j + half]).map(|(a, b)| a * b).sum();
        let lo = j.saturating_sub(half).max(1);
        let hi = (j + half).min(m - 2);
        let peak = (lo..=hi).map(|k| d2[k]).fold(0.0, f64::max);
        let margin = if threshold > 0.0 { 1.0 - peak / threshold } else { f64::NEG_INFINITY };
        out[j] = (d / gg.lambda[j], margin > 0.0, margin);
    }
    out
}

pub fn gradient_table(ds: &TravelTimeDataset, gg: &GammaGeometry, kappa_spike: f64) -> GradientTable {
    use rayon::prelude::*;
    let rows: Vec<Vec<(f64, bool, f64)>> =
        (0..ds.n).into_par_iter().map(|i| row_gradients(ds, gg, i, kappa_spike)).collect();
    let mut t = GradientTable {
        m: ds.m,
        n: ds.n,
        value: Vec::with_capacity(ds.n * ds.m),
        smooth: Vec::with_capacity(ds.n * ds.m),
        margin: Vec::with_capacity(ds.n * ds.m),
    };
    for r in rows {
        for (v, s, mg) in r {
            t.value.push(v);
            t.smooth.push(s);
            t.margin.push(mg);
        }
    }
    t
}
