//! Ground-truth distance oracles and cut-locus sampling.

pub mod cut;
pub mod eikonal;
pub mod fan;
pub mod shooting;

pub use cut::{cut_locus_sample, cut_time, cut_time_with, CutKind, CutOptions, CutPointRecord};
pub use fan::{boundary_distances, FanOptions};
pub use eikonal::{distance_eikonal, distance_eikonal_with, DistanceField, EikonalOptions, FieldMethod};
pub use shooting::{distance_shooting, distance_shooting_with, Connection, Minimizer, ShootingOptions};
