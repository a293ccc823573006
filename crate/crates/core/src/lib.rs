//! Simulation and reconstruction of two-dimensional Riemannian manifolds with
//! strictly convex boundary from partial travel time data.
//!
//! The forward side ([`manifold`], [`geodesic`], [`distance`], [`data`])
//! generates the travel times `r_p(z) = d(p, z)` for sources `p` and sensors
//! `z` on a measurement arc `Γ`. The inverse side ([`reconstruct`]) reads only
//! those travel times and recovers the arc geometry, boundary membership,
//! coordinate charts and metric samples; [`verify`] compares the result with
//! ground truth.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod data;
pub mod distance;
pub mod geodesic;
pub mod manifold;
pub mod reconstruct;
pub mod verify;

pub use error::{Error, Result};
pub use manifold::{ChartRect, DomainSpec, MetricSpec, Point};
