//! Intrinsic geometry of Γ from the Γ-source rows: the speed `λ(u) = ‖dz/du‖_g`.
//!
//! For the source sitting at sensor `j`, `u ↦ sign(u − u_j)·r_{z_j}(z(u))` is
//! smooth through `u_j` with slope `λ(u_j)`; its derivative is read off a
//! Lagrange interpolant on the nonuniform sensor grid.

use super::stencil::{derivative_weights, value_weights, window};
use crate::data::TravelTimeDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GammaGeometry {
    pub u: Vec<f64>,
    /// Speed at each sensor (interpolated where no Γ-source row exists).
    pub lambda: Vec<f64>,
    /// Row of the source located at each sensor.
    pub gamma_rows: Vec<Option<usize>>,
    /// Recovered arc length from the first sensor.
    pub arc: Vec<f64>,
}

pub const LAMBDA_STENCIL: usize = 5;

pub fn identify_gamma_rows(ds: &TravelTimeDataset, delta_id: f64) -> Vec<Option<usize>> {
    let mut rows = vec![None; ds.m];
    for i in 0..ds.n {
        let row = ds.row(i);
        let (j, v) = row
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .fold((usize::MAX, f64::INFINITY), |acc, (j, &v)| if v < acc.1 { (j, v) } else { acc });
        if j != usize::MAX && v <= delta_id && rows[j].is_none() && ds.row_is_complete(i) {
            rows[j] = Some(i);
        }
    }
    rows
}

pub fn recover_gamma_metric(ds: &TravelTimeDataset, delta_id: f64) -> Result<GammaGeometry> {
    let m = ds.m;
    let gamma_rows = identify_gamma_rows(ds, delta_id);
    let found = gamma_rows.iter().filter(|r| r.is_some()).count();
    let needed = m.div_ceil(2).max(2);
    if found < needed {
        return Err(Error::TooFewGammaSources { needed, found });
    }
    let mut known: Vec<(usize, f64)> = Vec::new();
    for (j, row) in gamma_rows.iter().enumerate() {
        let Some(i) = row else { continue };
        let w = window(j, LAMBDA_STENCIL, m);
        let nodes: Vec<f64> = w.clone().map(|k| ds.u[k]).collect();
        let vals: Vec<f64> = w.map(|k| if k < j { -ds.get(*i, k) } else { ds.get(*i, k) }).collect();
        let lam: f64 = derivative_weights(&nodes, ds.u[j]).iter().zip(&vals).map(|(a, b)| a * b).sum();
        if lam > 0.0 && lam.is_finite() {
            known.push((j, lam));
        }
    }
    if known.len() < needed {
        return Err(Error::TooFewGammaSources { needed, found: known.len() });
    }
    let lambda: Vec<f64> = (0..m)
        .map(|j| match known.iter().find(|(k, _)| *k == j) {
            Some((_, l)) => *l,
            None => interpolate(&known, &ds.u, ds.u[j]),
        })
        .collect();
    let mut g = GammaGeometry { u: ds.u.clone(), lambda, gamma_rows, arc: vec![0.0; m] };
    for j in 1..m {
        g.arc[j] = g.arc[j - 1] + g.arc_length(ds.u[j - 1], ds.u[j]);
    }
    Ok(g)
}

fn interpolate(known: &[(usize, f64)], u: &[f64], x: f64) -> f64 {
    let pos = known.partition_point(|(k, _)| u[*k] < x);
    let w = window(pos, 4, known.len());
    let nodes: Vec<f64> = known[w.clone()].iter().map(|(k, _)| u[*k]).collect();
    value_weights(&nodes, x).iter().zip(&known[w]).map(|(a, (_, l))| a * l).sum()
}

impl GammaGeometry {
    /// `λ` between sensors by local cubic interpolation.
    pub fn lambda_at(&self, x: f64) -> f64 {
        let pos = self.u.partition_point(|&v| v < x);
        let w = window(pos, 4, self.u.len());
        let nodes = &self.u[w.clone()];
        value_weights(nodes, x).iter().zip(&self.lambda[w]).map(|(a, l)| a * l).sum()
    }

    /// `∫ λ du` between two parameters (4-point Gauss–Legendre per sensor interval).
    pub fn arc_length(&self, a: f64, b: f64) -> f64 {
        if b < a {
            return -self.arc_length(b, a);
        }
        const X: [f64; 4] = [-0.861_136_311_594_052_6, -0.339_981_043_584_856_3, 0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
        const W: [f64; 4] = [0.347_854_845_137_453_9, 0.652_145_154_862_546_1, 0.652_145_154_862_546_1, 0.347_854_845_137_453_9];
        let mut cuts = vec![a];
        cuts.extend(self.u.iter().copied().filter(|&v| v > a && v < b));
        cuts.push(b);
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            for k in 0..4 {
                total += W[k] * half * self.lambda_at(mid + half * X[k]);
            }
        }
        total
    }

    /// Recovered arc length between sensors `j` and `k`.
    pub fn sensor_arc(&self, j: usize, k: usize) -> f64 {
        (self.arc[k] - self.arc[j]).abs()
    }

    /// Typical sensor spacing in recovered arc length.
    pub fn mean_spacing(&self) -> f64 {
        self.arc[self.arc.len() - 1] / (self.arc.len() - 1) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Unit circle arc sampled at `u`, Γ = [0, span]: times are chords.
    fn circle_dataset(u: &[f64], span: f64, warp: impl Fn(f64) -> f64) -> TravelTimeDataset {
        let m = u.len();
        let mut times = Vec::new();
        for &ui in u {
            for &uj in u {
                times.push(2.0 * ((span * (warp(ui) - warp(uj))).abs() / 2.0).sin());
            }
        }
        TravelTimeDataset { m, n: m, u: u.to_vec(), times }
    }

    #[test]
    fn constant_speed_on_quarter_arc() {
        let u: Vec<f64> = (0..32).map(|j| j as f64 / 31.0).collect();
        let span = std::f64::consts::FRAC_PI_2;
        let g = recover_gamma_metric(&circle_dataset(&u, span, |x| x), 1e-12).unwrap();
        for l in &g.lambda {
            assert!((l - span).abs() / span < 1e-3);
        }
        assert!((g.arc[31] - span).abs() / span < 1e-4);
    }

    #[test]
    fn warped_parametrization_keeps_arc_length() {
        let u: Vec<f64> = (0..32).map(|j| j as f64 / 31.0).collect();
        let span = 2.0;
        let warp = |x: f64| x + 0.4 * (std::f64::consts::TAU * x).sin() / std::f64::consts::TAU;
        let g = recover_gamma_metric(&circle_dataset(&u, span, warp), 1e-12).unwrap();
        for (j, k) in [(0, 31), (3, 17), (10, 11)] {
            let exact = span * (warp(u[k]) - warp(u[j]));
            assert!((g.sensor_arc(j, k) - exact).abs() / exact < 1e-3, "{j} {k}");
        }
    }

    #[test]
    fn too_few_gamma_rows() {
        let u: Vec<f64> = (0..10).map(|j| j as f64 / 9.0).collect();
        let mut ds = circle_dataset(&u, 1.0, |x| x);
        ds.times.truncate(3 * 10);
        ds.n = 3;
        assert!(matches!(recover_gamma_metric(&ds, 1e-12), Err(Error::TooFewGammaSources { needed: 5, found: 3 })));
    }
}
