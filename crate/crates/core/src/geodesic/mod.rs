//! Geodesic integration on a chart with boundary events.

pub mod integrator;
pub mod shoot;

use nalgebra::Vector2;

use crate::error::{Error, Result};
use crate::manifold::{BoundaryFrame, MetricSpec};

pub use integrator::{Stop, Tolerances, Trajectory};
pub use shoot::{
    GeodesicRecord, GeodesicSample, GeodesicSolver, GeodesicStatus, UnitVectorAt, DEFAULT_EXTENSION,
};

/// Tangential part `h(z, v) = v - ⟨v, ν⟩ ν` of an inward unit vector at a
/// boundary point. Fails for tangential or outward `v`.
pub fn project_h(spec: &MetricSpec, frame: &BoundaryFrame, v: &Vector2<f64>) -> Result<Vector2<f64>> {
    let nu = frame.outward_normal();
    let vn = spec.inner(&frame.point, v, &nu);
    if !(vn < 0.0) {
        return Err(Error::NotInward { normal_component: vn });
    }
    Ok(v - nu * vn)
}

/// Inverse of [`project_h`]: adds `√(1 - ‖h‖²)` along the inward normal.
pub fn unproject_h(spec: &MetricSpec, frame: &BoundaryFrame, h: &Vector2<f64>) -> Result<Vector2<f64>> {
    let n2 = spec.inner(&frame.point, h, h);
    if !(n2 < 1.0) {
        return Err(Error::NotInward { normal_component: -(1.0 - n2).max(0.0).sqrt() });
    }
    Ok(h + frame.inward_normal * (1.0 - n2).sqrt())
}

/// Tangential coordinate `⟨v, T⟩_g ∈ (-1, 1)` of an inward unit vector.
pub fn h_coordinate(spec: &MetricSpec, frame: &BoundaryFrame, v: &Vector2<f64>) -> Result<f64> {
    let h = project_h(spec, frame, v)?;
    Ok(spec.inner(&frame.point, &h, &frame.tangent))
}

/// Inward unit vector with tangential coordinate `c ∈ (-1, 1)`.
pub fn from_h_coordinate(frame: &BoundaryFrame, c: f64) -> Result<Vector2<f64>> {
    if !(c.abs() < 1.0) {
        return Err(Error::NotInward { normal_component: 0.0 });
    }
    Ok(frame.tangent * c + frame.inward_normal * (1.0 - c * c).sqrt())
}
