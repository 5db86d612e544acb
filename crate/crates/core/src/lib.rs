//! Rough-path solutions of controlled SDEs and robustness of near-optimal
//! policies under near-Brownian noise.
//!
//! The crate is organised bottom-up:
//!
//! * [`rough`]: grid-sampled level-2 rough paths, lifts, Chen extension and
//!   the `(α, 2α)` Hölder distance.
//! * [`noise`]: Brownian, Wong-Zakai, Karhunen-Loève, mollified and
//!   fractional Brownian drivers, all coupled to one Stratonovich reference.
//! * [`rde`]: second-order (Davie) solver for `dY = b(Y,u) dt + σ(Y) d𝐗`
//!   and the compensated rough integral.
//! * [`hjb`]: one-dimensional discounted and finite-horizon HJB solvers.
//! * [`policy`]: clamped piecewise-linear Lipschitz feedback policies.
//! * [`cost`]: Monte-Carlo discounted and finite-horizon cost evaluation.
//! * [`experiment`]: configuration-driven sweeps used by the CLI.
//!
//! Smaller pieces: [`grid`], [`quadrature`] (Gauss-Legendre), [`mollifier`]
//! (the bump kernel) and [`stats`].

pub mod cost;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod hjb;
pub mod mollifier;
pub mod noise;
pub mod policy;
pub mod quadrature;
pub mod rde;
pub mod rough;
pub mod stats;

pub use cost::{cost_gap, discounted_cost, finite_horizon_cost, CostEstimate, CostGap, CostSetup};
pub use error::{Error, Result};
pub use experiment::ExperimentConfig;
pub use grid::TimeGrid;
pub use hjb::{solve_discounted, solve_finite_horizon, ModelSpec, ValueFunction};
pub use noise::{NoiseFamily, NoiseSpec};
pub use policy::LipschitzPolicy;
pub use rde::{solve_rde, Feedback, VectorField};
pub use rough::{ControlledPath, PairSet, RoughPath, Seminorm};
