//! Level-2 rough paths on time grids: lifts, Chen extension, Hölder
//! seminorm and distance, validity checks, and controlled paths.
//!
//! Distances between rough paths use the seminorm of the level-wise
//! difference, `ρ_α(X, Y) = ‖(X - Y, 𝕏 - 𝕐)‖_{α,2α}`, evaluated over grid pairs.

mod controlled;
mod io;
mod lift;
mod metric;
mod path;

pub use controlled::ControlledPath;
pub use io::{read_columnar, write_columnar};
pub use lift::{lift_piecewise_linear, lift_smooth_quadrature};
pub use metric::{
    check_chen, check_geometric, rough_distance, rough_seminorm, sup_distance, CheckReport,
    PairSet, Seminorm, ALL_PAIRS_LIMIT,
};
pub use path::{RoughPath, DEFAULT_HOELDER};

pub(crate) use path::check_hoelder;
