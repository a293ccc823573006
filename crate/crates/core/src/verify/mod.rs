//! Checks of reconstructions and datasets against ground truth.
//!
//! Nothing here feeds back into [`crate::reconstruct`]; the sidecar is read
//! only to score what the blind pipeline produced.

pub mod counterexample;
pub mod cutlocus;
pub mod embedding;
pub mod isometry;
pub mod truth;

use rayon::prelude::*;

use crate::data::{SourcePlan, TruthSidecar};
use crate::error::Result;
use crate::geodesic::GeodesicSolver;
use crate::reconstruct::report::ReportBundle;
use crate::reconstruct::{Chart, ReconstructedManifold};

pub use counterexample::{counterexample_horseshoe, CollapseOptions, CollapseReport};
pub use cutlocus::{cutlocus_report, CutLocusOptions, CutLocusReport};
pub use embedding::{embedding_check, embedding_truth_check, EmbeddingStats, TriangleCheck};
pub use isometry::{isometry_compare, IsometryOptions, IsometryReport, Side, SigmaTransport};

/// Boundary classification against truth. Sources with depth in
/// `(0, margin)` are counted separately and excluded from the strict tally.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub true_boundary: usize,
    pub true_interior: usize,
    pub false_boundary: usize,
    pub false_interior: usize,
    pub margin_true: usize,
    pub margin_false: usize,
}

impl Confusion {
    pub fn away_errors(&self) -> usize {
        self.false_boundary + self.false_interior
    }

    /// Precision and recall of the boundary label over all sources, margin included.
    pub fn precision_recall_all(&self, margin_flags: (usize, usize)) -> (f64, f64) {
        let (mfb, mfi) = margin_flags;
        let tp = self.true_boundary as f64;
        let fp = (self.false_boundary + mfb) as f64;
        let fn_ = (self.false_interior + mfi) as f64;
        let ratio = |a: f64, b: f64| if a + b == 0.0 { 1.0 } else { a / (a + b) };
        (ratio(tp, fp), ratio(tp, fn_))
    }
}

/// Decision margin used when scoring boundary flags: three collar depths.
pub fn decision_margin(plan: &SourcePlan) -> f64 {
    3.0 * plan.collar_depth()
}

/// Returns the strict confusion plus `(false boundary, false interior)` counts inside the margin.
pub fn boundary_confusion(flags: &[bool], truth: &TruthSidecar, margin: f64) -> (Confusion, (usize, usize)) {
    let mut c = Confusion::default();
    let mut inside = (0, 0);
    for (flag, src) in flags.iter().zip(&truth.sources) {
        let on = src.kind.on_boundary();
        let away = on || src.depth >= margin - 1e-12;
        match (on, *flag, away) {
            (true, true, _) => c.true_boundary += 1,
            (false, false, _) => c.true_interior += 1,
            (false, true, true) => c.false_boundary += 1,
            (true, false, _) => c.false_interior += 1,
            (false, true, false) => inside.0 += 1,
        }
        if !away {
            if on == *flag {
                c.margin_true += 1;
            } else {
                c.margin_false += 1;
            }
        }
    }
    (c, inside)
}

/// Relative Frobenius error of every fitted interior metric sample against
/// the true metric pulled back through the same α chart. `None` marks
/// truth-boundary sources; `Some(inf)` marks interior sources with no fit.
pub fn metric_errors(
    rec: &ReconstructedManifold,
    truth: &TruthSidecar,
    solver: &GeodesicSolver<'_>,
) -> Vec<Option<f64>> {
    rec.sources
        .par_iter()
        .zip(&truth.sources)
        .map(|(s, t)| {
            if t.kind.on_boundary() {
                return None;
            }
            let (Ok(Chart::Alpha { base, v, r }), Some(Ok(m))) = (&s.chart, &s.metric) else {
                return Some(f64::INFINITY);
            };
            let g = truth::alpha_metric(solver, truth.sensor_params[*base], *v, *r).ok()?;
            Some(truth::relative_frobenius(&m.g, &g))
        })
        .collect()
}

/// Metric errors of a report bundle read from disk, for truth-interior sources.
/// Returns `(source, error)` pairs and the number of interior sources without a fit.
pub fn bundle_metric_errors(
    bundle: &ReportBundle,
    truth: &TruthSidecar,
    solver: &GeodesicSolver<'_>,
) -> (Vec<(usize, f64)>, usize) {
    let errs: Vec<(usize, f64)> = bundle
        .metrics
        .par_iter()
        .filter(|m| truth.sources.get(m.0).is_some_and(|t| !t.kind.on_boundary()))
        .map(|&(i, base, v, r, g)| {
            let e = truth::alpha_metric(solver, truth.sensor_params[base], v, r)
                .map(|t| truth::relative_frobenius(&g, &t))
                .unwrap_or(f64::INFINITY);
            (i, e)
        })
        .collect();
    let interior = truth.sources.iter().filter(|t| !t.kind.on_boundary()).count();
    let missing = interior - errs.len();
    (errs, missing)
}

/// Summary of a per-source error list: count, median and fraction within `tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSummary {
    pub count: usize,
    pub median: f64,
    pub p90: f64,
    pub within: f64,
}

pub fn summarize(errors: impl IntoIterator<Item = f64>, tol: f64) -> ErrorSummary {
    let mut e: Vec<f64> = errors.into_iter().collect();
    if e.is_empty() {
        return ErrorSummary { count: 0, median: f64::NAN, p90: f64::NAN, within: 0.0 };
    }
    e.sort_by(|a, b| a.total_cmp(b));
    let n = e.len();
    ErrorSummary {
        count: n,
        median: e[n / 2],
        p90: e[(n * 9 / 10).min(n - 1)],
        within: e.iter().filter(|&&x| x <= tol).count() as f64 / n as f64,
    }
}

/// Relative error of recovered Γ arc length over all sensor pairs `(0, k)` and
/// consecutive pairs. Returns the largest relative error.
pub fn gamma_arc_error(arc: &[f64], truth: &TruthSidecar, solver: &GeodesicSolver<'_>) -> Result<f64> {
    let s = &truth.sensor_params;
    let m = s.len();
    let mut pairs: Vec<(usize, usize)> = (1..m).map(|k| (0, k)).collect();
    pairs.extend((1..m - 1).map(|k| (k, k + 1)));
    let errs: Vec<Result<f64>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let t = truth::boundary_arc(solver.spec, solver.domain, s[a], s[b])?;
            Ok(((arc[b] - arc[a]).abs() - t).abs() / t)
        })
        .collect();
    let mut worst = 0.0f64;
    for e in errs {
        worst = worst.max(e?);
    }
    Ok(worst)
}
