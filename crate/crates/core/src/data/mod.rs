//! The partial travel time dataset: generation and serialization.

pub mod io;
pub mod plan;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rayon::prelude::*;

use crate::distance::{boundary_distances, distance_eikonal_with, EikonalOptions, FanOptions};
use crate::error::{Error, Result};
use crate::geodesic::{GeodesicSolver, Tolerances};
use crate::manifold::{DomainSpec, MetricSpec};

pub use io::{read_dataset, read_truth, sidecar_path, write_dataset, write_truth, TruthSidecar};
pub use plan::{PlannedSource, SensorArray, SensorLayout, SensorPlan, SourceKind, SourcePlan};

/// `times[i·m + j] = d(p_i, z_j)`; `NaN` marks an oracle failure.
#[derive(Debug, Clone, PartialEq)]
pub struct TravelTimeDataset {
    pub m: usize,
    pub n: usize,
    pub u: Vec<f64>,
    pub times: Vec<f64>,
}

impl TravelTimeDataset {
    pub fn new(u: Vec<f64>, times: Vec<f64>) -> Result<Self> {
        let m = u.len();
        if m == 0 || !times.len().is_multiple_of(m) {
            return Err(Error::InvalidArgument("times length is not a multiple of the sensor count".into()));
        }
        if u.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("sensor parameters must be strictly increasing".into()));
        }
        Ok(Self { m, n: times.len() / m, u, times })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.times[i * self.m + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.times[i * self.m..(i + 1) * self.m]
    }

    pub fn row_is_complete(&self, i: usize) -> bool {
        self.row(i).iter().all(|v| v.is_finite())
    }

    /// `‖r_p − r_q‖_∞` over sensors.
    pub fn sup_gap(&self, a: usize, b: usize) -> f64 {
        self.row(a).iter().zip(self.row(b)).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Oracle {
    /// Geodesic fan per source (convex domains).
    Shooting(FanOptions),
    /// Fast marching on the masked lattice (works without convexity).
    Eikonal(EikonalOptions),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerateOptions {
    pub oracle: Oracle,
    pub tolerances: Tolerances,
    /// Seed of the row permutation.
    pub seed: u64,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        Self { oracle: Oracle::Shooting(FanOptions::default()), tolerances: Tolerances::default(), seed: 1 }
    }
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub dataset: TravelTimeDataset,
    pub truth: TruthSidecar,
    pub sensors: SensorArray,
    /// Rows with at least one oracle failure.
    pub failed_rows: Vec<usize>,
}

pub fn generate_dataset(
    spec: &MetricSpec,
    domain: &DomainSpec,
    source_plan: &SourcePlan,
    sensor_plan: &SensorPlan,
    opts: &GenerateOptions,
) -> Result<Generated> {
    let sensors = SensorArray::new(domain, sensor_plan)?;
    let mut sources = source_plan.sources(domain, &sensors)?;
    let mut rng = rand::rngs::StdRng::seed_from_u64(opts.seed);
    sources.shuffle(&mut rng);
    let m = sensors.len();
    let targets: Vec<f64> = sensors.gamma_params.iter().map(|&s| domain.theta_of_s(s)).collect();
    let solver = GeodesicSolver::new(spec, domain).with_tolerances(opts.tolerances);
    let rows: Vec<Result<Vec<f64>>> = sources
        .par_iter()
        .map(|src| {
            let mut row = match opts.oracle {
                Oracle::Shooting(fan) => boundary_distances(&solver, &src.point, &targets, &fan)?,
                Oracle::Eikonal(eo) => {
                    let field = distance_eikonal_with(spec, domain, &src.point, &eo)?;
                    sensors.positions.iter().map(|z| field.sample(spec, z).unwrap_or(f64::NAN)).collect()
                }
            };
            for (j, z) in sensors.positions.iter().enumerate() {
                if (z - src.point).norm() < 1e-12 {
                    row[j] = 0.0;
                }
            }
            Ok(row)
        })
        .collect();
    let mut times = Vec::with_capacity(sources.len() * m);
    let mut failed_rows = Vec::new();
    for (i, r) in rows.into_iter().enumerate() {
        let r = r?;
        if r.iter().any(|v| !v.is_finite()) {
            failed_rows.push(i);
        }
        times.extend(r);
    }
    let dataset = TravelTimeDataset::new(sensors.u.clone(), times)?;
    let truth = TruthSidecar { sensor_params: sensors.gamma_params.clone(), sources };
    Ok(Generated { dataset, truth, sensors, failed_rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::catalog::Preset;

    #[test]
    fn euclidean_disk_small_dataset() {
        let (m, d) = Preset::Disk.build().unwrap();
        let plan = SourcePlan {
            h_src: 0.3,
            boundary_count: 16,
            collar_count: 0,
            lattice_min_depth: Some(0.05),
            ..Default::default()
        };
        let g = generate_dataset(&m, &d, &plan, &SensorPlan::uniform(32), &GenerateOptions::default()).unwrap();
        assert!(g.failed_rows.is_empty());
        assert_eq!(g.dataset.n, g.truth.sources.len());
        for i in 0..g.dataset.n {
            let p = g.truth.sources[i].point;
            let mut zeros = 0;
            for j in 0..g.dataset.m {
                let exact = (g.sensors.positions[j] - p).norm();
                assert!((g.dataset.get(i, j) - exact).abs() < 1e-8);
                zeros += (g.dataset.get(i, j) == 0.0) as usize;
            }
            assert!(zeros <= 1);
            if g.truth.sources[i].kind == SourceKind::Gamma {
                assert_eq!(zeros, 1);
            }
        }
    }

    #[test]
    fn deterministic_bytes() {
        let (m, d) = Preset::MildBump.build().unwrap();
        let plan = SourcePlan { h_src: 0.4, boundary_count: 8, collar_count: 4, ..Default::default() };
        let a = generate_dataset(&m, &d, &plan, &SensorPlan::uniform(8), &GenerateOptions::default()).unwrap();
        let b = generate_dataset(&m, &d, &plan, &SensorPlan::uniform(8), &GenerateOptions::default()).unwrap();
        assert_eq!(io::encode_dataset(&a.dataset), io::encode_dataset(&b.dataset));
        assert_eq!(io::encode_truth(&a.truth), io::encode_truth(&b.truth));
    }
}
