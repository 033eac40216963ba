//! Two-echelon (manufacturer–retailer) green supply chain model.
//!
//! The crate is organised bottom-up:
//!
//! - [`params`]: exogenous constants and their JSON document format.
//! - [`model`]: cycle schedules, inventory trajectories, cost and emission
//!   components, and the base per-player profits.
//! - [`policy`]: carbon tax, cap-and-trade and limited-emission objectives,
//!   plus the penalty transform used by the optimizers.
//! - [`optim`]: differential evolution (two mutation schemes) and particle
//!   swarm optimization with seeded, scheduling-independent determinism.
//! - [`anfis`]: a single-input first-order Sugeno neuro-fuzzy surrogate.
//! - [`sensitivity`]: one-at-a-time sweeps and calibration of the constants
//!   the published parameter table leaves out.
//! - [`surface`]: two-variable profit grids.

pub mod anfis;
pub mod error;
pub mod model;
pub mod numerics;
pub mod optim;
pub mod params;
pub mod policy;
pub mod sensitivity;
pub mod surface;

pub use error::{ModelError, ParamError};
pub use model::{base_profits, evaluate, CostBreakdown, CycleSchedule, DecisionVector, Evaluation, ProfitResult};
pub use params::{FormulaMode, ModelParameters};
pub use policy::{penalize, PolicyKind, PolicyObjective};
