use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SensitivityError;
use crate::model::DecisionVector;
use crate::optim::{self, OptimizerConfig, PolicyProblem, SearchSpace};
use crate::params::ModelParameters;
use crate::policy::PolicyKind;

pub const DEFAULT_LEVELS: [f64; 5] = [-40.0, -20.0, 0.0, 20.0, 40.0];

/// One-at-a-time sweep of a single constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: String,
    /// Relative changes in percent; must include 0.
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default = "default_policy")]
    pub policy: PolicyKind,
    /// Re-optimize the decisions at every level. When off, every level is
    /// evaluated at `decisions`.
    #[serde(default = "default_true")]
    pub reoptimize: bool,
    #[serde(default)]
    pub decisions: Option<DecisionVector>,
}

fn default_levels() -> Vec<f64> {
    DEFAULT_LEVELS.to_vec()
}

fn default_policy() -> PolicyKind {
    PolicyKind::CarbonTax
}

fn default_true() -> bool {
    true
}

impl SweepSpec {
    pub fn new(parameter: &str, optimizer: OptimizerConfig) -> Self {
        SweepSpec {
            parameter: parameter.to_string(),
            levels: default_levels(),
            optimizer,
            policy: PolicyKind::CarbonTax,
            reoptimize: true,
            decisions: None,
        }
    }

    pub fn fixed_decisions(mut self, d: DecisionVector) -> Self {
        self.reoptimize = false;
        self.decisions = Some(d);
        self
    }

    pub fn validate(&self, params: &ModelParameters) -> Result<(), SensitivityError> {
        if params.get(&self.parameter).is_none() {
            return Err(SensitivityError::UnknownParameter(self.parameter.clone()));
        }
        if !self.levels.contains(&0.0) {
            return Err(SensitivityError::InvalidSpec("levels must include 0".into()));
        }
        if self.levels.iter().any(|l| !l.is_finite()) {
            return Err(SensitivityError::InvalidSpec("levels must be finite".into()));
        }
        if !self.reoptimize && self.decisions.is_none() {
            return Err(SensitivityError::InvalidSpec(
                "fixed-decision sweeps need a decision vector".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub parameter: String,
    /// Relative change in percent.
    pub level: f64,
    pub value: f64,
    pub decisions: Option<DecisionVector>,
    #[serde(rename = "Z_m")]
    pub z_m: Option<f64>,
    #[serde(rename = "Z_r")]
    pub z_r: Option<f64>,
    #[serde(rename = "phi_T")]
    pub phi_t: Option<f64>,
    pub pct_change: Option<f64>,
    pub feasible: bool,
    /// Why the row has no values, if it has none.
    pub note: Option<String>,
}

/// Evaluate or re-optimize at every level. Rows come back in level order.
pub fn run_sweep(spec: &SweepSpec, params: &ModelParameters) -> Result<Vec<SweepRow>, SensitivityError> {
    spec.validate(params)?;
    let base_value = params.get(&spec.parameter).expect("checked by validate");

    let mut rows: Vec<SweepRow> = spec
        .levels
        .par_iter()
        .map(|&level| sweep_row(spec, params, base_value, level))
        .collect();

    let reference = rows
        .iter()
        .find(|r| r.level == 0.0)
        .and_then(|r| r.phi_t)
        .ok_or(SensitivityError::InfeasibleBaseline)?;
    for row in &mut rows {
        row.pct_change = row.phi_t.map(|v| (v - reference) / reference * 100.0);
    }
    Ok(rows)
}

fn sweep_row(spec: &SweepSpec, params: &ModelParameters, base_value: f64, level: f64) -> SweepRow {
    let value = base_value * (1.0 + level / 100.0);
    let mut row = SweepRow {
        parameter: spec.parameter.clone(),
        level,
        value,
        decisions: None,
        z_m: None,
        z_r: None,
        phi_t: None,
        pct_change: None,
        feasible: false,
        note: None,
    };

    let mut p = params.clone();
    *p.get_mut(&spec.parameter).expect("checked by validate") = value;
    if let Err(e) = p.validate() {
        row.note = Some(e.to_string());
        return row;
    }

    let problem = PolicyProblem::new(p.clone(), spec.policy);
    let x = if spec.reoptimize {
        let space = SearchSpace::model_default(&p);
        match optim::run(&space, &spec.optimizer, &problem) {
            Ok(r) => r.best,
            Err(e) => {
                row.note = Some(e.to_string());
                return row;
            }
        }
    } else {
        spec.decisions.expect("checked by validate").to_array().to_vec()
    };

    match problem.evaluate(&x) {
        Ok(obj) => {
            row.decisions = Some(obj.diagnostics.decisions);
            row.z_m = Some(obj.phi_m);
            row.z_r = Some(obj.phi_r);
            row.phi_t = Some(obj.value);
            row.feasible = obj.constraint_violation <= optim::FEASIBILITY_TOL;
            if !row.feasible {
                row.note = Some(format!("constraint violation {}", obj.constraint_violation));
            }
        }
        Err(e) => row.note = Some(e.to_string()),
    }
    row
}

/// Expected direction of the joint profit as a constant grows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Nonincreasing,
    Nondecreasing,
}

/// The monotonicity the published sweeps exhibit.
pub const DIRECTION_CHECKS: [(&str, Direction); 14] = [
    ("C_p", Direction::Nonincreasing),
    ("C_r", Direction::Nonincreasing),
    ("E_p", Direction::Nonincreasing),
    ("E_t", Direction::Nonincreasing),
    ("h_p", Direction::Nonincreasing),
    ("C_Tax", Direction::Nonincreasing),
    ("d1", Direction::Nonincreasing),
    ("f_r", Direction::Nonincreasing),
    ("beta1", Direction::Nonincreasing),
    ("P", Direction::Nondecreasing),
    ("P_r", Direction::Nondecreasing),
    ("eta", Direction::Nondecreasing),
    ("v1", Direction::Nondecreasing),
    ("v2", Direction::Nondecreasing),
];

/// Relative slack allowed between consecutive levels before a direction
/// check fails; absorbs optimizer noise.
pub const DIRECTION_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionVerdict {
    pub parameter: String,
    pub expected: Direction,
    pub passed: bool,
    pub pct_changes: Vec<Option<f64>>,
}

/// Check that `phi_T` moves monotonically in the expected direction as the
/// level rises. Rows without a value fail the check.
pub fn check_direction(rows: &[SweepRow], expected: Direction) -> bool {
    let mut ordered: Vec<&SweepRow> = rows.iter().collect();
    ordered.sort_by(|a, b| a.level.total_cmp(&b.level));
    let values: Option<Vec<f64>> = ordered.iter().map(|r| r.phi_t).collect();
    let Some(values) = values else {
        return false;
    };
    values.windows(2).all(|w| {
        let slack = DIRECTION_TOL * w[0].abs().max(w[1].abs());
        match expected {
            Direction::Nonincreasing => w[1] <= w[0] + slack,
            Direction::Nondecreasing => w[1] >= w[0] - slack,
        }
    })
}

pub fn direction_verdict(rows: &[SweepRow], parameter: &str, expected: Direction) -> DirectionVerdict {
    DirectionVerdict {
        parameter: parameter.to_string(),
        expected,
        passed: check_direction(rows, expected),
        pct_changes: rows.iter().map(|r| r.pct_change).collect(),
    }
}

/// Published percent changes of the joint carbon-tax profit at
/// −40, −20, 0, +20, +40 % for each swept constant.
pub const PUBLISHED_PCT_CHANGES: [(&str, [f64; 5]); 27] = [
    ("W_m", [-4.0767, -2.0751, 0.0, 2.1573, 4.4070]),
    ("C_p", [3.3717, 1.6858, 0.0, -1.6857, -3.3713]),
    ("C_r", [0.0955, 0.0478, 0.0, -0.0478, -0.0955]),
    ("E_p", [0.0708, 0.0354, 0.0, -0.0354, -0.0708]),
    ("E_t", [1.2965, 0.6482, 0.0, -0.6482, -1.2965]),
    ("E_h1", [0.3800, 0.1894, 0.0, -0.1882, -0.3752]),
    ("h_p", [8.6675, 4.0066, 0.0, -3.5306, -6.6956]),
    ("h_d", [0.0238, 0.0119, 0.0, -0.0119, -0.0238]),
    ("h_r", [0.2247, 0.1123, 0.0, -0.1123, -0.2246]),
    ("P", [-3.2033, -1.2258, 0.0, 0.8342, 1.4387]),
    ("P_r", [-1.0067, -0.3800, 0.0, 0.2550, 0.4379]),
    ("theta1", [0.3542, 0.1754, 0.0, -0.1730, -0.3440]),
    ("theta2", [0.0152, 0.0069, 0.0, -0.0059, -0.0111]),
    ("v1", [-0.1606, -0.0617, 0.0, 0.0424, 0.0735]),
    ("v2", [-0.0837, -0.0323, 0.0, 0.0224, 0.0388]),
    ("beta1", [0.3096, 0.1545, 0.0, -0.1540, -0.3074]),
    ("beta2", [-0.0217, -0.0108, 0.0, 0.0108, 0.0217]),
    ("omega", [-0.0007, -0.0002, 0.0, -0.0001, -0.0005]),
    ("l1", [-0.0042, -0.0033, 0.0, 0.0074, 0.0207]),
    ("l2", [0.0090, 0.0027, 0.0, -0.0014, -0.0022]),
    ("f_d", [0.3695, 0.1844, 0.0, -0.1836, -0.3665]),
    ("f_r", [0.3649, 0.1824, 0.0, -0.1824, -0.3646]),
    ("b", [-48.1246, -25.0635, 0.0, 26.2495, 53.3048]),
    ("eta", [-11.7550, -4.9163, 0.0, 3.7641, 6.7715]),
    ("C_Tax", [1.8419, 0.9195, 0.0, -0.9168, -1.8313]),
    ("d1", [1.2965, 0.6482, 0.0, -0.6482, -1.2965]),
    ("i_c", [0.8991, 0.4495, 0.0, -0.4495, -0.8991]),
];

pub fn published_pct_changes(parameter: &str) -> Option<[f64; 5]> {
    PUBLISHED_PCT_CHANGES
        .iter()
        .find(|(k, _)| *k == parameter)
        .map(|(_, v)| *v)
}
