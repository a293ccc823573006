//! Sensor and source layouts.

use std::f64::consts::TAU;

use nalgebra::{Rotation2, Vector2};

use crate::error::{Error, Result};
use crate::manifold::{DomainSpec, Point};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SensorLayout {
    /// `u` proportional to arc length along Γ.
    Uniform,
    /// Arc length `s(u) = s_a + |Γ| (u + a·sin(2πu)/2π)`, monotone for `|a| < 1`.
    Warped(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorPlan {
    pub count: usize,
    pub layout: SensorLayout,
    /// Largest admissible arc-length gap between neighbors.
    pub max_spacing: Option<f64>,
}

impl SensorPlan {
    pub fn uniform(count: usize) -> Self {
        Self { count, layout: SensorLayout::Uniform, max_spacing: None }
    }
}

/// Sensors along Γ: abstract parameters `u_j ∈ [0, 1]` and their arc-length positions.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorArray {
    pub u: Vec<f64>,
    pub gamma_params: Vec<f64>,
    pub positions: Vec<Point>,
}

impl SensorArray {
    pub fn new(domain: &DomainSpec, plan: &SensorPlan) -> Result<Self> {
        if plan.count < 8 {
            return Err(Error::InvalidArgument(format!("need at least 8 sensors, got {}", plan.count)));
        }
        if let SensorLayout::Warped(a) = plan.layout {
            if !(a.abs() < 1.0) {
                return Err(Error::InvalidArgument(format!("warp amplitude must be below 1, got {a}")));
            }
        }
        let (sa, sb) = domain.gamma;
        let m = plan.count;
        let u: Vec<f64> = (0..m).map(|j| j as f64 / (m - 1) as f64).collect();
        let gamma_params: Vec<f64> = u
            .iter()
            .map(|&u| {
                let w = match plan.layout {
                    SensorLayout::Uniform => u,
                    SensorLayout::Warped(a) => u + a * (TAU * u).sin() / TAU,
                };
                sa + (sb - sa) * w
            })
            .collect();
        if let Some(max) = plan.max_spacing {
            let worst = gamma_params.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
            if worst > max {
                return Err(Error::InvalidArgument(format!(
                    "sensor spacing {worst} exceeds the configured maximum {max}"
                )));
            }
        }
        let positions = gamma_params.iter().map(|&s| domain.point(s)).collect();
        Ok(Self { u, gamma_params, positions })
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceKind {
    Lattice,
    Gamma,
    Boundary,
    Collar,
    Extra,
}

impl SourceKind {
    pub fn code(&self) -> u8 {
        match self {
            SourceKind::Lattice => 0,
            SourceKind::Gamma => 1,
            SourceKind::Boundary => 2,
            SourceKind::Collar => 3,
            SourceKind::Extra => 4,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        Some(match c {
            0 => SourceKind::Lattice,
            1 => SourceKind::Gamma,
            2 => SourceKind::Boundary,
            3 => SourceKind::Collar,
            4 => SourceKind::Extra,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            SourceKind::Lattice => "lattice",
            SourceKind::Gamma => "gamma",
            SourceKind::Boundary => "boundary",
            SourceKind::Collar => "collar",
            SourceKind::Extra => "extra",
        }
    }

    pub fn on_boundary(&self) -> bool {
        matches!(self, SourceKind::Gamma | SourceKind::Boundary)
    }
}

/// Boundary ring points closer than this to a sensor are dropped.
pub const DUPLICATE_RADIUS: f64 = 1e-6;

/// Interior lattice plus boundary ring plus collar ring. A source at every
/// sensor is always added by the generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SourcePlan {
    pub h_src: f64,
    pub boundary_count: usize,
    pub collar_count: usize,
    /// Collar depth; `None` means `2·h_src`.
    pub collar_depth: Option<f64>,
    /// Lattice points shallower than this are dropped; `None` means the collar depth.
    pub lattice_min_depth: Option<f64>,
    /// Rotation of the lattice about the origin.
    pub rotation: f64,
    pub lattice_offset: Vector2<f64>,
    /// Arc-length phase of the boundary and collar rings.
    pub ring_phase: f64,
    pub extra: Vec<Point>,
}

impl Default for SourcePlan {
    fn default() -> Self {
        Self {
            h_src: 0.08,
            boundary_count: 768,
            collar_count: 128,
            collar_depth: None,
            lattice_min_depth: None,
            rotation: 0.0,
            lattice_offset: Vector2::zeros(),
            ring_phase: 0.0,
            extra: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannedSource {
    pub point: Point,
    pub kind: SourceKind,
    /// Euclidean distance to ∂M.
    pub depth: f64,
}

impl SourcePlan {
    pub fn collar_depth(&self) -> f64 {
        self.collar_depth.unwrap_or(2.0 * self.h_src)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h_src > 0.0) {
            return Err(Error::InvalidArgument(format!("h_src must be positive, got {}", self.h_src)));
        }
        if !(self.collar_depth() > 0.0) {
            return Err(Error::InvalidArgument("collar depth must be positive".into()));
        }
        Ok(())
    }

    /// Sources in plan order: Γ, boundary ring, collar ring, lattice, extra.
    pub fn sources(&self, domain: &DomainSpec, sensors: &SensorArray) -> Result<Vec<PlannedSource>> {
        self.validate()?;
        let mut out = Vec::new();
        for p in &sensors.positions {
            out.push(PlannedSource { point: *p, kind: SourceKind::Gamma, depth: 0.0 });
        }
        let l = domain.length();
        for k in 0..self.boundary_count {
            let s = self.ring_phase + l * k as f64 / self.boundary_count as f64;
            let p = domain.point(s);
            // a ring point landing on a sensor would duplicate that Γ-source
            if sensors.positions.iter().all(|z| (z - p).norm() > DUPLICATE_RADIUS) {
                out.push(PlannedSource { point: p, kind: SourceKind::Boundary, depth: 0.0 });
            }
        }
        let depth = self.collar_depth();
        for k in 0..self.collar_count {
            let s = self.ring_phase + l * (k as f64 + 0.5) / self.collar_count as f64;
            let a = domain.arc_jet(s);
            let t = a.t.normalize();
            let n_in = Vector2::new(-t.y, t.x);
            let p = a.p + n_in * depth;
            let (sd, _) = domain.signed_distance(&p, None);
            if sd < 0.0 {
                out.push(PlannedSource { point: p, kind: SourceKind::Collar, depth: -sd });
            }
        }
        let min_depth = self.lattice_min_depth.unwrap_or(depth);
        let rot = Rotation2::new(self.rotation);
        let poly = domain.polyline();
        let r_max = poly.iter().map(|p| p.norm()).fold(0.0, f64::max) + self.h_src;
        let n = (r_max / self.h_src).ceil() as i64 + 1;
        for j in -n..=n {
            for i in -n..=n {
                let local = Point::new(i as f64 * self.h_src, j as f64 * self.h_src) + self.lattice_offset;
                let p = rot * local;
                if !domain.contains(&p) {
                    continue;
                }
                let (sd, _) = domain.signed_distance(&p, None);
                if -sd >= min_depth - 1e-12 {
                    out.push(PlannedSource { point: p, kind: SourceKind::Lattice, depth: -sd });
                }
            }
        }
        for p in &self.extra {
            let (sd, _) = domain.signed_distance(p, None);
            if sd > 1e-9 {
                return Err(Error::InvalidDomain(format!("extra source ({}, {}) outside the domain", p.x, p.y)));
            }
            out.push(PlannedSource { point: *p, kind: SourceKind::Extra, depth: (-sd).max(0.0) });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::catalog::Preset;

    #[test]
    fn uniform_and_warped_sensors() {
        let (_, d) = Preset::Disk.build().unwrap();
        let a = SensorArray::new(&d, &SensorPlan::uniform(16)).unwrap();
        assert_eq!(a.len(), 16);
        assert!((a.gamma_params[15] - d.gamma.1).abs() < 1e-12);
        let w = SensorArray::new(&d, &SensorPlan { count: 16, layout: SensorLayout::Warped(0.5), max_spacing: None })
            .unwrap();
        assert!(w.gamma_params.windows(2).all(|x| x[1] > x[0]));
        assert_eq!(a.u, w.u);
        assert!(SensorArray::new(&d, &SensorPlan::uniform(4)).is_err());
        let tight = SensorPlan { count: 8, layout: SensorLayout::Uniform, max_spacing: Some(0.01) };
        assert!(SensorArray::new(&d, &tight).is_err());
    }

    #[test]
    fn plan_kinds_and_depths() {
        let (_, d) = Preset::Disk.build().unwrap();
        let sensors = SensorArray::new(&d, &SensorPlan::uniform(16)).unwrap();
        let plan = SourcePlan { h_src: 0.25, boundary_count: 32, collar_count: 16, ..Default::default() };
        let src = plan.sources(&d, &sensors).unwrap();
        let count = |k| src.iter().filter(|s| s.kind == k).count();
        assert_eq!(count(SourceKind::Gamma), 16);
        // the ring point at s = 0 coincides with the first sensor and is dropped
        assert_eq!(count(SourceKind::Boundary), 31);
        assert_eq!(count(SourceKind::Collar), 16);
        assert!(count(SourceKind::Lattice) > 10);
        for s in &src {
            match s.kind {
                SourceKind::Collar => assert!((s.depth - 0.5).abs() < 1e-9),
                SourceKind::Lattice => assert!(s.depth >= 0.5 - 1e-9),
                _ => assert_eq!(s.depth, 0.0),
            }
        }
    }
}
