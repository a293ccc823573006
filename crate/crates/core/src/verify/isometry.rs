//! Discrete comparison of two reconstructions whose data coincide under a
//! sensor relabeling `φ` (sensor `j` of one dataset is sensor `j` of the other).
//!
//! The correspondence `Ψ` pairs rows by sup-norm nearest neighbors in data
//! space, so it exists only at sample points.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rayon::prelude::*;

use crate::data::{TravelTimeDataset, TruthSidecar};
use crate::error::{Error, Result};
use crate::geodesic::GeodesicSolver;
use crate::manifold::Point;
use crate::reconstruct::{Chart, ReconstructedManifold, SigmaSet};

use super::{summarize, truth, ErrorSummary};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsometryOptions {
    /// Second-best candidates within this of the best make a match ambiguous
    /// (ten times the dataset oracle tolerance).
    pub tie_tol: f64,
    /// Largest sup-norm gap accepted for a match.
    pub match_tol: f64,
    /// Sources with truth depth in `(0, margin)` are excluded from the strict boundary tally.
    pub margin: f64,
    pub distance_pairs: usize,
    /// Pairs closer than this are skipped for relative distance errors.
    pub min_pair_distance: f64,
    /// Every `sigma_stride`-th sensor and direction of the σ grid is compared.
    pub sigma_stride: usize,
    /// Lateral tolerance for transported σ members (lattice scale).
    pub transport_tol: f64,
    pub seed: u64,
}

impl Default for IsometryOptions {
    fn default() -> Self {
        Self {
            tie_tol: 1e-8,
            match_tol: 0.08,
            margin: 0.48,
            distance_pairs: 200,
            min_pair_distance: 0.25,
            sigma_stride: 3,
            transport_tol: 0.08,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaTransport {
    pub compared: usize,
    pub passed: usize,
    pub members_checked: usize,
    /// Members without a match or with a non-smooth arrival in the other dataset.
    pub members_skipped: usize,
    /// Largest lateral miss `(|∂r_q + v| − tol_grad)·r_q` of a transported member.
    pub max_defect: f64,
    pub max_t_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsometryReport {
    /// `(row in dataset 1, row in dataset 2, gap)`, mutual nearest pairs only.
    pub correspondence: Vec<(usize, usize, f64)>,
    pub ambiguous: Vec<usize>,
    /// Rows of dataset 1 without a match, with their smallest gap.
    pub unmatched: Vec<(usize, f64)>,
    /// Γ-rows of dataset 1 matched to the Γ-row of the same sensor in dataset 2.
    pub gamma_relabel: (usize, usize),
    /// `(source, error)`: fitted metric of reconstruction 1 against the truth of
    /// manifold 2 pulled back through the same α chart.
    pub metric_errors: Vec<(usize, f64)>,
    pub distance_errors: Vec<f64>,
    /// Matched pairs with equal boundary flags, away from the margin: `(agree, compared)`.
    pub boundary_away: (usize, usize),
    pub boundary_all: (usize, usize),
    pub sigma: SigmaTransport,
}

impl IsometryReport {
    pub fn is_identity(&self) -> bool {
        self.unmatched.is_empty() && self.ambiguous.is_empty() && self.correspondence.iter().all(|&(a, b, _)| a == b)
    }

    pub fn metric_summary(&self, tol: f64) -> ErrorSummary {
        summarize(self.metric_errors.iter().map(|e| e.1), tol)
    }

    pub fn summary_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "geotime-isometry v1");
        let _ = writeln!(
            s,
            "matched={} ambiguous={} unmatched={}",
            self.correspondence.len(),
            self.ambiguous.len(),
            self.unmatched.len()
        );
        let _ = writeln!(s, "gamma_relabel={}/{}", self.gamma_relabel.0, self.gamma_relabel.1);
        let _ = writeln!(s, "boundary_agreement_away={}/{}", self.boundary_away.0, self.boundary_away.1);
        let _ = writeln!(s, "boundary_agreement_all={}/{}", self.boundary_all.0, self.boundary_all.1);
        for tol in [0.02, 0.05] {
            let m = self.metric_summary(tol);
            let _ = writeln!(s, "metric_error count={} median={} p90={} within_{}={}", m.count, m.median, m.p90, tol, m.within);
        }
        let d = summarize(self.distance_errors.iter().copied(), 0.05);
        let _ = writeln!(s, "distance_error count={} median={} p90={}", d.count, d.median, d.p90);
        let _ = writeln!(
            s,
            "sigma_transport sets={} passed={} members={} skipped={} max_defect={} max_t_gap={}",
            self.sigma.compared,
            self.sigma.passed,
            self.sigma.members_checked,
            self.sigma.members_skipped,
            self.sigma.max_defect,
            self.sigma.max_t_gap
        );
        s
    }

    pub fn metric_csv(&self) -> String {
        let mut s = String::from("source,relative_frobenius\n");
        for (i, e) in &self.metric_errors {
            let _ = writeln!(s, "{i},{e}");
        }
        s
    }
}

/// Best and second-best sup-norm gap from row `a` of `x` to the rows of `y`.
fn nearest(x: &TravelTimeDataset, a: usize, y: &TravelTimeDataset) -> (usize, f64, f64) {
    let ra = x.row(a);
    let (mut best, mut b1, mut b2) = (usize::MAX, f64::INFINITY, f64::INFINITY);
    for k in 0..y.n {
        let g = ra.iter().zip(y.row(k)).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        if g < b1 {
            b2 = b1;
            b1 = g;
            best = k;
        } else if g < b2 {
            b2 = g;
        }
    }
    (best, b1, b2)
}

#[derive(Clone, Copy)]
pub struct Side<'a> {
    pub data: &'a TravelTimeDataset,
    pub rec: &'a ReconstructedManifold,
    pub truth: &'a TruthSidecar,
    pub solver: &'a GeodesicSolver<'a>,
}

pub fn isometry_compare(one: Side<'_>, two: Side<'_>, opts: &IsometryOptions) -> Result<IsometryReport> {
    let (d1, d2) = (one.data, two.data);
    if d1.m != d2.m {
        return Err(Error::InvalidArgument(format!("sensor counts differ: {} vs {}", d1.m, d2.m)));
    }
    let fwd: Vec<(usize, f64, f64)> = (0..d1.n).into_par_iter().map(|a| nearest(d1, a, d2)).collect();
    let back: Vec<(usize, f64, f64)> = (0..d2.n).into_par_iter().map(|b| nearest(d2, b, d1)).collect();
    let mut correspondence = Vec::new();
    let mut ambiguous = Vec::new();
    let mut unmatched = Vec::new();
    for (a, &(b, g, g2)) in fwd.iter().enumerate() {
        if b == usize::MAX || !g.is_finite() {
            unmatched.push((a, g));
        } else if g2 - g <= opts.tie_tol {
            ambiguous.push(a);
        } else if g > opts.match_tol || back[b].0 != a {
            unmatched.push((a, g));
        } else {
            correspondence.push((a, b, g));
        }
    }
    let map: HashMap<usize, usize> = correspondence.iter().map(|&(a, b, _)| (a, b)).collect();

    let mut gamma_relabel = (0, 0);
    for (r1, r2) in one.rec.gamma.gamma_rows.iter().zip(&two.rec.gamma.gamma_rows) {
        if let (Some(a), Some(b)) = (r1, r2) {
            gamma_relabel.1 += 1;
            if map.get(a) == Some(b) {
                gamma_relabel.0 += 1;
            }
        }
    }

    let (mut boundary_away, mut boundary_all) = ((0, 0), (0, 0));
    for &(a, b, _) in &correspondence {
        let agree = one.rec.sources[a].boundary == two.rec.sources[b].boundary;
        boundary_all.1 += 1;
        boundary_all.0 += agree as usize;
        let t = &one.truth.sources[a];
        if t.kind.on_boundary() || t.depth >= opts.margin - 1e-12 {
            boundary_away.1 += 1;
            boundary_away.0 += agree as usize;
        }
    }

    let metric_errors: Vec<(usize, f64)> = one
        .rec
        .sources
        .par_iter()
        .enumerate()
        .filter(|(i, _)| !one.truth.sources[*i].kind.on_boundary())
        .map(|(i, s)| {
            let (Ok(Chart::Alpha { base, v, r }), Some(Ok(m))) = (&s.chart, &s.metric) else {
                return (i, f64::INFINITY);
            };
            match truth::alpha_metric(two.solver, two.truth.sensor_params[*base], *v, *r) {
                Ok(g) => (i, truth::relative_frobenius(&m.g, &g)),
                Err(_) => (i, f64::INFINITY),
            }
        })
        .collect();

    let dist1 = truth::truth_distance(one.solver);
    let dist2 = truth::truth_distance(two.solver);
    let mut rng = rand::rngs::StdRng::seed_from_u64(opts.seed);
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    if correspondence.len() >= 2 {
        let mut tries = 0;
        while pairs.len() < opts.distance_pairs && tries < 50 * opts.distance_pairs {
            tries += 1;
            let pick: Vec<&(usize, usize, f64)> = correspondence.choose_multiple(&mut rng, 2).collect();
            let (p, q) = (one.truth.sources[pick[0].0].point, one.truth.sources[pick[1].0].point);
            if (p - q).norm() >= opts.min_pair_distance {
                pairs.push((pick[0].0, pick[1].0));
            }
        }
    }
    let pt = |t: &TruthSidecar, i: usize| -> Point { t.sources[i].point };
    let distance_errors: Vec<f64> = pairs
        .par_iter()
        .filter_map(|&(a, c)| {
            let x = dist1(&pt(one.truth, a), &pt(one.truth, c))?;
            let y = dist2(&pt(two.truth, map[&a]), &pt(two.truth, map[&c]))?;
            Some((y - x).abs() / x)
        })
        .collect();

    let sigma = sigma_transport(one, two, &map, opts);
    Ok(IsometryReport {
        correspondence,
        ambiguous,
        unmatched,
        gamma_relabel,
        metric_errors,
        distance_errors,
        boundary_away,
        boundary_all,
        sigma,
    })
}

/// `Ψ(σ(z, v)) ⊂ σ(φ(z), v)` at lattice scale. Each matched member `q` of the
/// transported set must arrive at the sensor within the direction tolerance
/// widened by `transport_tol / r`, i.e. pass within `transport_tol` laterally.
fn sigma_transport(one: Side<'_>, two: Side<'_>, map: &HashMap<usize, usize>, opts: &IsometryOptions) -> SigmaTransport {
    let key = |s: &SigmaSet| (s.sensor, (s.v * 1e6).round() as i64);
    let other: HashMap<(usize, i64), &SigmaSet> = two.rec.sigma_grid.iter().map(|s| (key(s), s)).collect();
    let mut sensors: Vec<usize> = one.rec.sigma_grid.iter().map(|s| s.sensor).collect();
    sensors.dedup();
    let mut vs: Vec<i64> = one.rec.sigma_grid.iter().map(|s| key(s).1).collect();
    vs.sort_unstable();
    vs.dedup();
    let stride = opts.sigma_stride.max(1);
    let keep_sensor: HashSet<usize> = sensors.iter().copied().step_by(stride).collect();
    let keep_v: HashSet<i64> = vs.iter().copied().step_by(stride).collect();
    let tol_t = one.rec.diagnostics.tol_t.max(two.rec.diagnostics.tol_t);
    let tol_grad = two.rec.diagnostics.tol_grad;
    let g2 = &two.rec.grads;
    let per_set: Vec<(bool, usize, usize, f64, f64)> = one
        .rec
        .sigma_grid
        .par_iter()
        .filter(|s| keep_sensor.contains(&s.sensor) && keep_v.contains(&key(s).1) && !s.thin)
        .filter_map(|s| {
            let t = other.get(&key(s)).filter(|t| !t.thin)?;
            let j = s.sensor;
            let (mut checked, mut skipped, mut worst) = (0, 0, 0.0f64);
            for &p in &s.members {
                if one.rec.gamma.gamma_rows[j] == Some(p) {
                    continue;
                }
                let Some(&q) = map.get(&p) else {
                    skipped += 1;
                    continue;
                };
                let r = two.data.get(q, j);
                if !g2.is_smooth(q, j) || !(r > 0.0) {
                    skipped += 1;
                    continue;
                }
                checked += 1;
                worst = worst.max(((g2.get(q, j) + s.v).abs() - tol_grad).max(0.0) * r);
            }
            let t_gap = (s.t_value - t.t_value).abs();
            Some((worst <= opts.transport_tol && t_gap <= tol_t, checked, skipped, worst, t_gap))
        })
        .collect();
    SigmaTransport {
        compared: per_set.len(),
        passed: per_set.iter().filter(|r| r.0).count(),
        members_checked: per_set.iter().map(|r| r.1).sum(),
        members_skipped: per_set.iter().map(|r| r.2).sum(),
        max_defect: per_set.iter().map(|r| r.3).fold(0.0, f64::max),
        max_t_gap: per_set.iter().map(|r| r.4).fold(0.0, f64::max),
    }
}
