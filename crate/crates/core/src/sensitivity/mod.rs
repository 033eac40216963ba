//! One-at-a-time parameter sweeps and calibration of the constants missing
//! from the published parameter table.

mod calibrate;
mod sweep;

use thiserror::Error;

pub use calibrate::{calibrate_missing_defaults, BaselineRow, CalibrationConfig, CalibrationResult};
pub use sweep::{
    check_direction, direction_verdict, published_pct_changes, run_sweep, Direction, DirectionVerdict, SweepRow,
    SweepSpec, DEFAULT_LEVELS, DIRECTION_CHECKS, DIRECTION_TOL, PUBLISHED_PCT_CHANGES,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SensitivityError {
    #[error("unknown parameter {0:?}")]
    UnknownParameter(String),
    #[error("invalid sweep specification: {0}")]
    InvalidSpec(String),
    #[error("the 0% row is not admissible, so percent changes are undefined")]
    InfeasibleBaseline,
    #[error("calibration failed: {0}")]
    Calibration(String),
}
