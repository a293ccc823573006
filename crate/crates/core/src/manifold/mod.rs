//! Ground-truth geometry: metric fields, boundary curves, frames, presets and config files.

pub mod catalog;
pub mod domain;
pub mod frame;
pub mod metric;

pub use domain::{Containment, DomainSpec, FourierCurve};
pub use frame::{boundary_frame, check_strict_convexity, extend_domain, BoundaryFrame, ConvexityReport};
pub use metric::{ChartRect, MetricKind, MetricSpec, Point, Poly2};
