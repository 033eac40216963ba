//! Carbon-regulation objectives built on the base model.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::model::{evaluate, DecisionVector, Evaluation};
use crate::params::ModelParameters;

/// Emission reductions bought by green investment `G` (tonnes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreenReduction {
    pub rho_m: f64,
    pub rho_r: f64,
    #[serde(rename = "rho_G")]
    pub rho_g: f64,
}

pub fn green_reduction(g: f64, params: &ModelParameters) -> GreenReduction {
    let p = params;
    let reduce = |x: f64, l: f64, l_off: f64, kappa: f64| x * l - l_off * x.powf(kappa);
    GreenReduction {
        rho_m: reduce(p.omega * g, p.l1, p.l2, p.kappa1),
        rho_r: reduce((1.0 - p.omega) * g, p.l1, p.l2, p.kappa1),
        rho_g: reduce(g, p.l3, p.l4, p.kappa2),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolicyKind {
    #[serde(rename = "tax")]
    CarbonTax,
    #[serde(rename = "cap_trade")]
    CapAndTrade,
    #[serde(rename = "limited")]
    LimitedEmission,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 3] = [
        PolicyKind::CarbonTax,
        PolicyKind::CapAndTrade,
        PolicyKind::LimitedEmission,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::CarbonTax => "tax",
            PolicyKind::CapAndTrade => "cap_trade",
            PolicyKind::LimitedEmission => "limited",
        }
    }

    /// Parameter key of the carbon price this policy needs, if any.
    pub fn price_key(self) -> Option<&'static str> {
        match self {
            PolicyKind::CarbonTax => Some("C_Tax"),
            PolicyKind::CapAndTrade => Some("C_CT"),
            PolicyKind::LimitedEmission => None,
        }
    }

    /// Evaluate this policy's objective at `d`.
    pub fn objective(self, params: &ModelParameters, d: &DecisionVector) -> Result<PolicyObjective, ModelError> {
        match self {
            PolicyKind::CarbonTax => carbon_tax_profit(params, d),
            PolicyKind::CapAndTrade => cap_and_trade_profit(params, d),
            PolicyKind::LimitedEmission => limited_emission_objective(params, d),
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tax" => Ok(PolicyKind::CarbonTax),
            "cap_trade" => Ok(PolicyKind::CapAndTrade),
            "limited" => Ok(PolicyKind::LimitedEmission),
            other => Err(format!("unknown policy {other:?} (expected tax, cap_trade or limited)")),
        }
    }
}

/// A policy objective evaluated at one decision point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolicyObjective {
    pub kind: PolicyKind,
    /// The quantity being maximized ($/year).
    pub value: f64,
    pub phi_m: f64,
    pub phi_r: f64,
    /// Emissions above the cap net of green reduction; zero unless limited.
    pub constraint_violation: f64,
    /// Manufacturer plus retailer emissions before any reduction.
    pub total_emissions: f64,
    pub reduction: GreenReduction,
    pub diagnostics: Evaluation,
}

impl PolicyObjective {
    pub fn is_feasible(&self) -> bool {
        self.constraint_violation == 0.0
    }
}

/// Shared shape of the tax and cap-and-trade profits: the carbon charge
/// `price·(e − ρ − cap)` is paid inside each player's cycle average.
fn priced_profit(
    kind: PolicyKind,
    params: &ModelParameters,
    d: &DecisionVector,
    price: f64,
    cap: f64,
) -> Result<PolicyObjective, ModelError> {
    let ev = evaluate(params, d)?;
    let c = &ev.costs;
    let s = &ev.schedule;
    let rho = green_reduction(d.g, params);
    let omega = params.omega;

    let carbon_m = price * (c.carc_m - rho.rho_m - cap);
    let green_m = omega * d.g * s.t2;
    let phi_m = (c.sr_m - (c.manufacturer_total() + carbon_m + green_m)) / s.t2;

    let carbon_r = price * (c.carc_r - rho.rho_r - cap);
    let green_r = (1.0 - omega) * d.g * (s.t3 - s.t11);
    let phi_r_raw = (c.sr_r - (c.retailer_total() + carbon_r + green_r)) / s.t3;
    let phi_r = (1.0 - params.f_r) * phi_r_raw;

    Ok(PolicyObjective {
        kind,
        value: phi_m + phi_r,
        phi_m,
        phi_r,
        constraint_violation: 0.0,
        total_emissions: c.carc_m + c.carc_r,
        reduction: rho,
        diagnostics: ev,
    })
}

/// Joint profit when every tonne is taxed at `C_Tax`.
pub fn carbon_tax_profit(params: &ModelParameters, d: &DecisionVector) -> Result<PolicyObjective, ModelError> {
    let price = params.c_tax.ok_or(ModelError::MissingPrice("C_Tax"))?;
    priced_profit(PolicyKind::CarbonTax, params, d, price, 0.0)
}

/// Joint profit when each player trades emissions around the cap `U1` at `C_CT`.
/// A player below the cap earns the surplus.
pub fn cap_and_trade_profit(params: &ModelParameters, d: &DecisionVector) -> Result<PolicyObjective, ModelError> {
    let price = params.c_ct.ok_or(ModelError::MissingPrice("C_CT"))?;
    priced_profit(PolicyKind::CapAndTrade, params, d, price, params.u1)
}

/// Base joint profit less `G`, subject to total emissions − ρ_G ≤ U2.
pub fn limited_emission_objective(params: &ModelParameters, d: &DecisionVector) -> Result<PolicyObjective, ModelError> {
    let ev = evaluate(params, d)?;
    let rho = green_reduction(d.g, params);
    let total = ev.costs.carc_m + ev.costs.carc_r;
    Ok(PolicyObjective {
        kind: PolicyKind::LimitedEmission,
        value: ev.profits.phi_t - d.g,
        phi_m: ev.profits.phi_m,
        phi_r: ev.profits.phi_r,
        constraint_violation: (total - rho.rho_g - params.u2).max(0.0),
        total_emissions: total,
        reduction: rho,
        diagnostics: ev,
    })
}

/// Quadratic exterior penalty: `value − coefficient·violation²`.
pub fn penalize(objective: &PolicyObjective, coefficient: f64) -> f64 {
    penalized_value(objective.value, objective.constraint_violation, coefficient)
}

pub fn penalized_value(value: f64, violation: f64, coefficient: f64) -> f64 {
    if violation == 0.0 {
        value
    } else {
        value - coefficient * violation * violation
    }
}
