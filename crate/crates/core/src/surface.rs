//! Joint-profit grids over two decision variables.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::DecisionVector;
use crate::params::ModelParameters;
use crate::policy::PolicyKind;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurfaceError {
    #[error("unknown decision variable {0:?}")]
    UnknownVariable(String),
    #[error("both axes use {0}")]
    SameVariable(String),
    #[error("empty range for {name}: [{lo}, {hi}] with {n} points")]
    EmptyRange { name: String, lo: f64, hi: f64, n: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub variable: String,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(variable: &str, lo: f64, hi: f64, n: usize) -> Self {
        Axis {
            variable: variable.to_string(),
            lo,
            hi,
            n,
        }
    }

    /// Grid points; a single point sits at the midpoint.
    pub fn points(&self) -> Result<Vec<f64>, SurfaceError> {
        let empty = || SurfaceError::EmptyRange {
            name: self.variable.clone(),
            lo: self.lo,
            hi: self.hi,
            n: self.n,
        };
        if self.n == 0 || !self.lo.is_finite() || !self.hi.is_finite() || self.lo > self.hi {
            return Err(empty());
        }
        if self.n == 1 {
            return Ok(vec![0.5 * (self.lo + self.hi)]);
        }
        if self.lo == self.hi {
            return Err(empty());
        }
        let step = (self.hi - self.lo) / (self.n - 1) as f64;
        Ok((0..self.n).map(|k| self.lo + step * k as f64).collect())
    }

    fn index(&self) -> Result<usize, SurfaceError> {
        DecisionVector::index_of(&self.variable).ok_or_else(|| SurfaceError::UnknownVariable(self.variable.clone()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfaceCell {
    pub x: f64,
    pub y: f64,
    /// Policy objective value, `None` where the model is not admissible.
    pub value: Option<f64>,
}

/// Evaluate the policy objective on the `x × y` grid, other decisions from
/// `base`. Cells are ordered with `y` varying fastest.
pub fn profit_surface(
    params: &ModelParameters,
    policy: PolicyKind,
    base: &DecisionVector,
    x: &Axis,
    y: &Axis,
) -> Result<Vec<SurfaceCell>, SurfaceError> {
    let (ix, iy) = (x.index()?, y.index()?);
    if ix == iy {
        return Err(SurfaceError::SameVariable(x.variable.clone()));
    }
    let (xs, ys) = (x.points()?, y.points()?);
    let mut cells = Vec::with_capacity(xs.len() * ys.len());
    for &xv in &xs {
        for &yv in &ys {
            let mut arr = base.to_array();
            arr[ix] = xv;
            arr[iy] = yv;
            let value = policy
                .objective(params, &DecisionVector::from_array(arr))
                .ok()
                .map(|o| o.value);
            cells.push(SurfaceCell { x: xv, y: yv, value });
        }
    }
    Ok(cells)
}
