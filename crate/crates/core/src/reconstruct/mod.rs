//! Reconstruction from a blind travel time dataset.

pub mod charts;
pub mod gamma;
pub mod gradient;
pub mod metric;
pub mod report;
pub mod sigma;
pub mod stencil;

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;

use crate::data::TravelTimeDataset;
use crate::error::{Error, Result};

pub use charts::{alpha_coords, beta_coords, choose_base_sensor, min_pairwise_gap};
pub use gamma::{identify_gamma_rows, recover_gamma_metric, GammaGeometry};
pub use gradient::{boundary_gradient, gradient_table, GradientTable};
pub use metric::{fit_cosphere, local_gradient, CosphereFit};
pub use sigma::{classify_boundary, continuity_table, direction_grid, undersampled_sets, SigmaContext, SigmaSet, SupNeighbors};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructOptions {
    /// Declared source spacing; sets the default boundary tolerance.
    pub h_src: f64,
    /// Rows whose minimum travel time is below this are sources on Γ.
    pub delta_id: f64,
    pub kappa_spike: f64,
    pub k_cont: usize,
    pub kappa_cont: f64,
    /// Defaults to `TOL_GRAD_PER_SPACING · Δs` with `Δs` the mean recovered sensor spacing.
    pub tol_grad: Option<f64>,
    /// Defaults to `h_src`.
    pub tol_t: Option<f64>,
    pub directions: usize,
    pub v_max: f64,
    pub chart_neighbors: usize,
    pub min_neighbors: usize,
    /// Margins above this rank equally when picking a base sensor.
    pub margin_saturate: f64,
    /// Base sensors seeing the source at `|v|` above this are used only as a fallback.
    pub base_v_cap: f64,
    /// Preferred minimum base distance, in units of `h_src`.
    pub base_r_min: f64,
    /// Sensors closer than this to any patch source, in units of `h_src`, give no covector.
    pub cov_r_min: f64,
    /// Row pairs closer than this in sup norm are reported as near duplicates.
    pub duplicate_tol: f64,
}

pub const TOL_GRAD_PER_SPACING: f64 = 0.2;

impl Default for ReconstructOptions {
    fn default() -> Self {
        Self {
            h_src: 0.08,
            delta_id: 1e-9,
            kappa_spike: 8.0,
            k_cont: 4,
            kappa_cont: 0.15,
            tol_grad: None,
            tol_t: None,
            directions: 33,
            v_max: 0.97,
            chart_neighbors: 24,
            min_neighbors: 5,
            margin_saturate: 0.5,
            base_v_cap: 0.7,
            base_r_min: 4.0,
            cov_r_min: 2.0,
            duplicate_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Chart {
    Alpha { base: usize, v: f64, r: f64 },
    /// `r` is kept alongside so both charts can be drawn in `(v, r)`.
    Beta { base: usize, eta: f64, tau: f64, r: f64 },
}

impl Chart {
    pub fn base(&self) -> usize {
        match *self {
            Chart::Alpha { base, .. } | Chart::Beta { base, .. } => base,
        }
    }

    pub fn coords(&self) -> (f64, f64) {
        match *self {
            Chart::Alpha { v, r, .. } => (v, r),
            Chart::Beta { eta, tau, .. } => (eta, tau),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceResult {
    pub boundary: bool,
    pub chart: std::result::Result<Chart, Error>,
    pub metric: Option<std::result::Result<MetricSample, Error>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSample {
    pub g: Matrix2<f64>,
    pub residual: f64,
    pub condition: f64,
    pub covectors: usize,
    /// Max `|ξᵀQξ − 1|` under the fitted co-metric.
    pub cosphere_dev: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub tol_grad: f64,
    pub tol_t: f64,
    pub h_src: f64,
    pub mean_spacing: f64,
    pub gamma_sources: usize,
    pub incomplete_rows: usize,
    pub smooth_fraction: f64,
    pub thin_sigma_sets: usize,
    /// Sets left out of the boundary test because `T` dips below both direction neighbors.
    pub undersampled_sigma_sets: usize,
    pub boundary_count: usize,
    pub charted: usize,
    pub metric_fitted: usize,
    pub min_embedding_gap: f64,
    /// Row pairs with sup-norm gap below `duplicate_tol`.
    pub near_duplicates: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructedManifold {
    pub gamma: GammaGeometry,
    pub sources: Vec<SourceResult>,
    pub diagnostics: Diagnostics,
    /// Directions and sensors of the σ grid, with `T` per cell (row-major by sensor).
    pub sigma_grid: Vec<SigmaSet>,
    pub grads: GradientTable,
}

impl ReconstructedManifold {
    pub fn boundary_flags(&self) -> Vec<bool> {
        self.sources.iter().map(|s| s.boundary).collect()
    }
}

/// Intermediate tables shared by the stages; exposed for checks that need
/// σ-sets away from the default grid.
pub struct Stages {
    pub gamma: GammaGeometry,
    pub grads: GradientTable,
    pub nbrs: SupNeighbors,
    pub continuity: Vec<bool>,
    pub tol_grad: f64,
    pub tol_t: f64,
}

impl Stages {
    pub fn build(ds: &TravelTimeDataset, opts: &ReconstructOptions) -> Result<Self> {
        let gamma = recover_gamma_metric(ds, opts.delta_id)?;
        let grads = gradient_table(ds, &gamma, opts.kappa_spike);
        let nbrs = SupNeighbors::build(ds, opts.k_cont.max(opts.chart_neighbors));
        let continuity = continuity_table(&grads, &nbrs, opts.k_cont, opts.kappa_cont);
        let tol_grad = opts.tol_grad.unwrap_or(TOL_GRAD_PER_SPACING * gamma.mean_spacing());
        let tol_t = opts.tol_t.unwrap_or(opts.h_src);
        Ok(Self { gamma, grads, nbrs, continuity, tol_grad, tol_t })
    }

    pub fn sigma<'a>(&'a self, ds: &'a TravelTimeDataset) -> SigmaContext<'a> {
        SigmaContext {
            ds,
            grads: &self.grads,
            continuity: &self.continuity,
            gamma_rows: &self.gamma.gamma_rows,
            tol_grad: self.tol_grad,
        }
    }

    pub fn sigma_grid(&self, ds: &TravelTimeDataset, opts: &ReconstructOptions) -> Vec<SigmaSet> {
        let ctx = self.sigma(ds);
        let dirs = direction_grid(opts.directions, opts.v_max);
        self.grads
            .interior_sensors()
            .flat_map(|j| dirs.iter().map(move |&v| (j, v)))
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&(j, v)| ctx.build(j, v))
            .collect()
    }

    /// Covectors `D_α r_·(z_j)` at source `i`, one per usable sensor.
    pub fn estimate_h(
        &self,
        ds: &TravelTimeDataset,
        opts: &ReconstructOptions,
        i: usize,
        j0: usize,
    ) -> Result<Vec<Vector2<f64>>> {
        let (vi, ri) = alpha_coords(ds, &self.grads, i, j0)?;
        let nbrs: Vec<(usize, Vector2<f64>)> = self.nbrs.idx[i]
            .iter()
            .take(opts.chart_neighbors)
            .filter_map(|&q| alpha_coords(ds, &self.grads, q, j0).ok().map(|(v, r)| (q, Vector2::new(v - vi, r - ri))))
            .collect();
        if nbrs.len() < opts.min_neighbors {
            return Err(Error::ThinNeighborhood { needed: opts.min_neighbors, found: nbrs.len() });
        }
        let mut offsets = vec![Vector2::zeros()];
        offsets.extend(nbrs.iter().map(|n| n.1));
        let scale = offsets.iter().map(|o| o.norm()).fold(0.0, f64::max).max(1e-12);
        let weights: Vec<f64> = offsets.iter().map(|o| 1.0 / (1.0 + (o.norm() / scale).powi(2))).collect();
        let rows: Vec<usize> = std::iter::once(i).chain(nbrs.iter().map(|n| n.0)).collect();
        let mut out = Vec::new();
        for j in self.grads.interior_sensors() {
            if rows.iter().any(|&q| !self.grads.is_smooth(q, j) || ds.get(q, j) < opts.cov_r_min * opts.h_src) {
                continue;
            }
            let vals: Vec<f64> = rows.iter().map(|&q| ds.get(q, j)).collect();
            if let Some((g, _)) = local_gradient(&offsets, &vals, &weights) {
                out.push(g);
            }
        }
        Ok(out)
    }
}

pub fn reconstruct_all(ds: &TravelTimeDataset, opts: &ReconstructOptions) -> Result<ReconstructedManifold> {
    let st = Stages::build(ds, opts)?;
    let sets = st.sigma_grid(ds, opts);
    let (flags, _) = classify_boundary(&sets, ds, st.tol_t);
    let ctx = st.sigma(ds);

    let sources: Vec<SourceResult> = (0..ds.n)
        .into_par_iter()
        .map(|i| {
            let boundary = flags[i];
            let Some(j0) = choose_base_sensor(ds, &st.grads, &st.continuity, i, opts.margin_saturate, opts.base_v_cap, opts.base_r_min * opts.h_src) else {
                return SourceResult {
                    boundary,
                    chart: Err(Error::ChartUnavailable { source_id: i, sensor: usize::MAX }),
                    metric: None,
                };
            };
            if boundary {
                let chart = beta_coords(&ctx, &flags, i, j0).map(|(eta, tau)| Chart::Beta { base: j0, eta, tau, r: ds.get(i, j0) });
                return SourceResult { boundary, chart, metric: None };
            }
            let chart = alpha_coords(ds, &st.grads, i, j0).map(|(v, r)| Chart::Alpha { base: j0, v, r });
            let metric = chart.is_ok().then(|| {
                let cov = st.estimate_h(ds, opts, i, j0)?;
                let fit = fit_cosphere(&cov)?;
                let dev = cov.iter().map(|c| (c.dot(&(fit.q * c)) - 1.0).abs()).fold(0.0, f64::max);
                Ok(MetricSample {
                    g: fit.g,
                    residual: fit.residual,
                    condition: fit.condition,
                    covectors: cov.len(),
                    cosphere_dev: dev,
                })
            });
            SourceResult { boundary, chart, metric }
        })
        .collect();

    let complete: Vec<usize> = (0..ds.n).filter(|&i| ds.row_is_complete(i)).collect();
    let mut near_duplicates = Vec::new();
    let mut min_gap = f64::INFINITY;
    for (i, (idx, dist)) in st.nbrs.idx.iter().zip(&st.nbrs.dist).enumerate() {
        for (&q, &d) in idx.iter().zip(dist) {
            min_gap = min_gap.min(d);
            if d < opts.duplicate_tol && i < q {
                near_duplicates.push((i, q, d));
            }
        }
    }
    let interior = st.grads.interior_sensors().len().max(1);
    let smooth = complete
        .iter()
        .map(|&i| st.grads.interior_sensors().filter(|&j| st.grads.is_smooth(i, j)).count())
        .sum::<usize>();
    let diagnostics = Diagnostics {
        tol_grad: st.tol_grad,
        tol_t: st.tol_t,
        h_src: opts.h_src,
        mean_spacing: st.gamma.mean_spacing(),
        gamma_sources: st.gamma.gamma_rows.iter().flatten().count(),
        incomplete_rows: ds.n - complete.len(),
        smooth_fraction: smooth as f64 / (complete.len().max(1) * interior) as f64,
        thin_sigma_sets: sets.iter().filter(|s| s.thin).count(),
        undersampled_sigma_sets: undersampled_sets(&sets, st.tol_t).iter().filter(|&&u| u).count(),
        boundary_count: flags.iter().filter(|&&b| b).count(),
        charted: sources.iter().filter(|s| s.chart.is_ok()).count(),
        metric_fitted: sources.iter().filter(|s| matches!(s.metric, Some(Ok(_)))).count(),
        min_embedding_gap: min_gap,
        near_duplicates,
    };
    Ok(ReconstructedManifold { gamma: st.gamma, sources, diagnostics, sigma_grid: sets, grads: st.grads })
}
