//! Cycle schedules, inventory trajectories, cost and emission components and
//! the base profits of both players.

mod manufacturer;
mod retailer;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::params::{FormulaMode, ModelParameters};

pub use manufacturer::{deterioration_rates, effective_rates, manufacturer_schedule, ManufacturerSchedule};
pub use retailer::{demand, retailer_schedule, RetailerSchedule};

/// The five decision variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionVector {
    #[serde(rename = "T0")]
    pub t0: f64,
    pub xi1: f64,
    pub xi2: f64,
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "W_r")]
    pub w_r: f64,
}

impl DecisionVector {
    pub const NAMES: [&'static str; 5] = ["T0", "xi1", "xi2", "G", "W_r"];

    pub fn new(t0: f64, xi1: f64, xi2: f64, g: f64, w_r: f64) -> Self {
        DecisionVector { t0, xi1, xi2, g, w_r }
    }

    pub fn from_array(x: [f64; 5]) -> Self {
        Self::new(x[0], x[1], x[2], x[3], x[4])
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.t0, self.xi1, self.xi2, self.g, self.w_r]
    }

    /// Index of a variable in [`Self::NAMES`] order.
    pub fn index_of(name: &str) -> Option<usize> {
        Self::NAMES.iter().position(|n| *n == name)
    }

    /// Check the domain of every component.
    pub fn validate(&self, params: &ModelParameters) -> Result<(), ModelError> {
        let checks: [(&'static str, f64, bool, &'static str); 5] = [
            ("T0", self.t0, self.t0 > 0.0, "T0 > 0"),
            ("xi1", self.xi1, self.xi1 >= 0.0, "xi1 >= 0"),
            ("xi2", self.xi2, self.xi2 >= 0.0, "xi2 >= 0"),
            ("G", self.g, self.g >= 0.0, "G >= 0"),
            ("W_r", self.w_r, self.w_r > 0.0, "W_r > 0"),
        ];
        for (name, value, ok, requirement) in checks {
            if !value.is_finite() || !ok {
                return Err(ModelError::InvalidDecision {
                    name,
                    value,
                    requirement,
                });
            }
        }
        let f = demand(params, self.w_r);
        if f < 0.0 {
            return Err(ModelError::NegativeDemand {
                w_r: self.w_r,
                demand: f,
            });
        }
        Ok(())
    }
}

/// Derived cycle times, lot sizes and rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleSchedule {
    #[serde(rename = "P_e")]
    pub p_e: f64,
    #[serde(rename = "P_de")]
    pub p_de: f64,
    pub theta_m: f64,
    pub theta_r: f64,
    #[serde(rename = "T0")]
    pub t0: f64,
    #[serde(rename = "T1")]
    pub t1: f64,
    #[serde(rename = "T2")]
    pub t2: f64,
    #[serde(rename = "Q_m")]
    pub q_m: f64,
    /// Base demand `f(W_r)`.
    #[serde(rename = "f_W_r")]
    pub f: f64,
    pub s: f64,
    #[serde(rename = "T11")]
    pub t11: f64,
    #[serde(rename = "Q_r")]
    pub q_r: f64,
    #[serde(rename = "T3")]
    pub t3: f64,
    #[serde(rename = "B1")]
    pub b1: f64,
    #[serde(rename = "B2")]
    pub b2: f64,
    /// Set when the backlog branch reaches zero before `T1`.
    pub backlog_reversed: bool,
}

impl CycleSchedule {
    pub fn manufacturer(&self) -> ManufacturerSchedule {
        ManufacturerSchedule {
            t1: self.t1,
            t2: self.t2,
            q_m: self.q_m,
        }
    }

    pub fn retailer(&self) -> RetailerSchedule {
        RetailerSchedule {
            f: self.f,
            s: self.s,
            t11: self.t11,
            q_r: self.q_r,
            t3: self.t3,
            b1: self.b1,
            b2: self.b2,
        }
    }

    /// Perfect-item stock at the manufacturer, `t ∈ [0, T2]`.
    pub fn manufacturer_inventory(&self, t: f64, params: &ModelParameters) -> f64 {
        manufacturer::perfect_stock(
            t,
            self.t0,
            &self.manufacturer(),
            self.p_e,
            params.p_r,
            params.d_r,
            self.theta_m,
            params.formula_mode,
        )
    }

    /// Defective stock at the manufacturer, `t ∈ [0, T1]`.
    pub fn defective_inventory(&self, t: f64, params: &ModelParameters) -> f64 {
        manufacturer::defective_stock(t, self.t0, self.t1, self.p_de, params.p_r, self.theta_m)
    }

    /// Retailer stock on `[T11, T3]`.
    pub fn retailer_inventory(&self, t: f64) -> f64 {
        retailer::stock(t, self.t2, &self.retailer())
    }

    /// The retailer branch anchored at `I(T1) = s`, valid between `T1` and `T11`.
    pub fn retailer_backlog_inventory(&self, t: f64, params: &ModelParameters) -> f64 {
        retailer::backlog_branch(t, self.t1, params.eta, &self.retailer())
    }

    /// `(∫₀^{T2} I dt, ∫₀^{T1} I_d dt)` at the manufacturer.
    pub fn manufacturer_integrals(&self, params: &ModelParameters) -> (f64, f64) {
        manufacturer::stock_integrals(
            self.t0,
            &self.manufacturer(),
            self.p_e,
            self.p_de,
            params.p_r,
            params.d_r,
            self.theta_m,
        )
    }

    /// `(∫_{T11}^{T3} I dt, ∫_{T1}^{T11} I dt)` at the retailer.
    pub fn retailer_integrals(&self, params: &ModelParameters) -> (f64, f64) {
        retailer::stock_integrals(self.t1, self.t2, params.eta, &self.retailer())
    }
}

/// Build the full schedule for a decision vector.
pub fn cycle_schedule(params: &ModelParameters, d: &DecisionVector) -> Result<CycleSchedule, ModelError> {
    d.validate(params)?;
    let (p_e, p_de) = effective_rates(params);
    let (theta_m, theta_r) = deterioration_rates(params, d.xi1, d.xi2);
    let m = manufacturer_schedule(params, d.t0, theta_m);
    let r = retailer_schedule(params, d.w_r, m.t1, m.t2, theta_r)?;
    let sched = CycleSchedule {
        p_e,
        p_de,
        theta_m,
        theta_r,
        t0: d.t0,
        t1: m.t1,
        t2: m.t2,
        q_m: m.q_m,
        f: r.f,
        s: r.s,
        t11: r.t11,
        q_r: r.q_r,
        t3: r.t3,
        b1: r.b1,
        b2: r.b2,
        backlog_reversed: r.t11 < m.t1,
    };
    for (name, v) in [
        ("T1", sched.t1),
        ("T2", sched.t2),
        ("Q_m", sched.q_m),
        ("T11", sched.t11),
        ("Q_r", sched.q_r),
    ] {
        if !v.is_finite() {
            return Err(ModelError::NonFinite(name));
        }
    }
    if sched.t3.is_nan() {
        return Err(ModelError::NonFinite("T3"));
    }
    Ok(sched)
}

/// Every revenue, cost and emission component of one cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostBreakdown {
    #[serde(rename = "SR_m")]
    pub sr_m: f64,
    #[serde(rename = "PC_m")]
    pub pc_m: f64,
    #[serde(rename = "StC_m")]
    pub stc_m: f64,
    #[serde(rename = "PeC_m")]
    pub pec_m: f64,
    #[serde(rename = "RC_m")]
    pub rc_m: f64,
    #[serde(rename = "PreC_m")]
    pub prec_m: f64,
    #[serde(rename = "ScC_m")]
    pub scc_m: f64,
    #[serde(rename = "HC_m1")]
    pub hc_m1: f64,
    #[serde(rename = "HC_m2")]
    pub hc_m2: f64,
    #[serde(rename = "DC_m1")]
    pub dc_m1: f64,
    #[serde(rename = "DC_m2")]
    pub dc_m2: f64,
    pub e_m1: f64,
    pub e_m2: f64,
    pub e_m3: f64,
    pub e_m4: f64,
    pub e_m5: f64,
    pub e_m6: f64,
    #[serde(rename = "CarC_m")]
    pub carc_m: f64,
    #[serde(rename = "SR_r")]
    pub sr_r: f64,
    #[serde(rename = "HC_r")]
    pub hc_r: f64,
    #[serde(rename = "DC_r")]
    pub dc_r: f64,
    #[serde(rename = "PC_r")]
    pub pc_r: f64,
    #[serde(rename = "OC_r")]
    pub oc_r: f64,
    #[serde(rename = "PreC_r")]
    pub prec_r: f64,
    #[serde(rename = "SC_r")]
    pub sc_r: f64,
    pub e_r1: f64,
    pub e_r2: f64,
    #[serde(rename = "CarC_r")]
    pub carc_r: f64,
}

impl CostBreakdown {
    /// Manufacturer costs excluding emissions.
    pub fn manufacturer_total(&self) -> f64 {
        self.pc_m
            + self.stc_m
            + self.pec_m
            + self.rc_m
            + self.prec_m
            + self.scc_m
            + self.hc_m1
            + self.hc_m2
            + self.dc_m1
            + self.dc_m2
    }

    /// Retailer costs excluding emissions.
    pub fn retailer_total(&self) -> f64 {
        self.hc_r + self.dc_r + self.pc_r + self.oc_r + self.prec_r + self.sc_r
    }
}

/// Manufacturer cost and emission fields. Retailer fields are left at zero.
pub fn manufacturer_costs(params: &ModelParameters, d: &DecisionVector, sched: &CycleSchedule) -> CostBreakdown {
    let p = params;
    let (j1, j2) = sched.manufacturer_integrals(p);
    let delivered = p.d_r * (sched.t2 - sched.t1);

    let e_m1 = sched.q_m * p.e_p;
    let e_m2 = p.e_h1 * j1;
    let e_m3 = p.e_h2 * j2;
    let e_m4 = p.e_d1 * p.theta1 * j1;
    let e_m5 = p.e_d2 * p.theta1 * j2;
    let e_m6 = p.d1 * p.e_t * delivered;

    CostBreakdown {
        sr_m: p.w_m * delivered,
        pc_m: p.c_p * p.p * d.t0,
        stc_m: p.c_op + p.c_or,
        pec_m: p.c_g * p.f_d * p.p * p.beta2 * d.t0,
        rc_m: p.c_r * p.p_r * (sched.t1 - d.t0),
        prec_m: d.xi1 * sched.t2,
        scc_m: p.i_c * p.p * d.t0,
        hc_m1: p.h_p * j1,
        hc_m2: p.h_d * j2,
        dc_m1: p.d_cp * p.theta1 * j1,
        dc_m2: p.d_cd * p.theta1 * j2,
        e_m1,
        e_m2,
        e_m3,
        e_m4,
        e_m5,
        e_m6,
        carc_m: e_m1 + e_m2 + e_m3 + e_m4 + e_m5 + e_m6,
        ..CostBreakdown::default()
    }
}

/// Copy the retailer cost and emission fields into `out`.
pub fn retailer_costs(params: &ModelParameters, d: &DecisionVector, sched: &CycleSchedule, out: &mut CostBreakdown) {
    let p = params;
    let (jr, js) = sched.retailer_integrals(p);
    let price = match p.formula_mode {
        FormulaMode::AsDerived => d.w_r,
        FormulaMode::AsPrinted => p.p_r,
    };
    out.sr_r = price * (sched.f * (sched.t3 - sched.t1) + p.eta * (js + jr));
    out.hc_r = p.h_r * jr;
    out.dc_r = p.d_cr * p.theta2 * jr;
    out.pc_r = p.w_m * p.d_r * (sched.t2 - sched.t1);
    out.oc_r = p.o_r;
    out.prec_r = d.xi2 * sched.t2;
    out.sc_r = 0.5 * sched.s * sched.t1 * p.c_s;
    out.e_r1 = p.e_hr * jr;
    out.e_r2 = p.e_dr * p.theta2 * jr;
    out.carc_r = out.e_r1 + out.e_r2;
}

impl Default for CostBreakdown {
    fn default() -> Self {
        CostBreakdown {
            sr_m: 0.0,
            pc_m: 0.0,
            stc_m: 0.0,
            pec_m: 0.0,
            rc_m: 0.0,
            prec_m: 0.0,
            scc_m: 0.0,
            hc_m1: 0.0,
            hc_m2: 0.0,
            dc_m1: 0.0,
            dc_m2: 0.0,
            e_m1: 0.0,
            e_m2: 0.0,
            e_m3: 0.0,
            e_m4: 0.0,
            e_m5: 0.0,
            e_m6: 0.0,
            carc_m: 0.0,
            sr_r: 0.0,
            hc_r: 0.0,
            dc_r: 0.0,
            pc_r: 0.0,
            oc_r: 0.0,
            prec_r: 0.0,
            sc_r: 0.0,
            e_r1: 0.0,
            e_r2: 0.0,
            carc_r: 0.0,
        }
    }
}

/// Per-year profits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfitResult {
    pub phi_m: f64,
    pub phi_r_raw: f64,
    pub phi_r: f64,
    #[serde(rename = "phi_T")]
    pub phi_t: f64,
}

/// Schedule, components and base profits at one decision point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub decisions: DecisionVector,
    pub schedule: CycleSchedule,
    pub costs: CostBreakdown,
    pub profits: ProfitResult,
}

/// Evaluate the full model at `d`.
pub fn evaluate(params: &ModelParameters, d: &DecisionVector) -> Result<Evaluation, ModelError> {
    let schedule = cycle_schedule(params, d)?;
    if schedule.f == 0.0 {
        return Err(ModelError::ZeroDemand);
    }
    let mut costs = manufacturer_costs(params, d, &schedule);
    retailer_costs(params, d, &schedule, &mut costs);

    let phi_m = (costs.sr_m - costs.manufacturer_total()) / schedule.t2;
    let phi_r_raw = (costs.sr_r - costs.retailer_total()) / schedule.t3;
    let phi_r = (1.0 - params.f_r) * phi_r_raw;
    let profits = ProfitResult {
        phi_m,
        phi_r_raw,
        phi_r,
        phi_t: phi_m + phi_r,
    };
    if !profits.phi_t.is_finite() {
        return Err(ModelError::NonFinite("phi_T"));
    }
    Ok(Evaluation {
        decisions: *d,
        schedule,
        costs,
        profits,
    })
}

/// Base profits without any carbon policy.
pub fn base_profits(params: &ModelParameters, d: &DecisionVector) -> Result<ProfitResult, ModelError> {
    evaluate(params, d).map(|e| e.profits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParameters {
        ModelParameters::reference(0.04, 0.06)
    }

    fn at_reference() -> DecisionVector {
        // ξ = 0 keeps θ at its base values
        DecisionVector::new(0.6626, 0.0, 0.0, 7.7565, 292.28)
    }

    #[test]
    fn decision_domain() {
        let p = params();
        assert!(at_reference().validate(&p).is_ok());
        let mut d = at_reference();
        d.t0 = 0.0;
        assert!(matches!(
            d.validate(&p),
            Err(ModelError::InvalidDecision { name: "T0", .. })
        ));
        let mut d = at_reference();
        d.w_r = 301.0;
        assert!(matches!(d.validate(&p), Err(ModelError::NegativeDemand { .. })));
        let mut d = at_reference();
        d.xi1 = f64::NAN;
        assert!(d.validate(&p).is_err());
    }

    #[test]
    fn reference_components() {
        let p = params();
        let e = evaluate(&p, &at_reference()).unwrap();
        assert!((e.costs.pc_m - 74542.5).abs() < 1e-8);
        assert!((e.costs.e_m6 - 7370.67).abs() < 0.5, "{}", e.costs.e_m6);
        assert_eq!(e.costs.oc_r, 130.0);
        assert!(e.schedule.backlog_reversed);
        let sum = e.costs.e_m1 + e.costs.e_m2 + e.costs.e_m3 + e.costs.e_m4 + e.costs.e_m5 + e.costs.e_m6;
        assert_eq!(e.costs.carc_m, sum);
        assert_eq!(e.costs.carc_r, e.costs.e_r1 + e.costs.e_r2);
    }

    #[test]
    fn goodwill_scaling() {
        let mut p = params();
        let r = base_profits(&p, &at_reference()).unwrap();
        assert_eq!(r.phi_r, 0.99 * r.phi_r_raw);
        assert_eq!(r.phi_t, r.phi_m + r.phi_r);
        p.f_r = 0.0;
        let r = base_profits(&p, &at_reference()).unwrap();
        assert_eq!(r.phi_r, r.phi_r_raw);
    }

    #[test]
    fn zero_demand_is_a_domain_error() {
        let p = params();
        let mut d = at_reference();
        d.w_r = p.a / p.b;
        assert_eq!(evaluate(&p, &d).unwrap_err(), ModelError::ZeroDemand);
    }

    #[test]
    fn penalty_cost_vanishes_without_escapes() {
        let mut p = params();
        p.beta2 = 0.0;
        assert_eq!(evaluate(&p, &at_reference()).unwrap().costs.pec_m, 0.0);
    }

    #[test]
    fn as_printed_mode_changes_revenue_prefactor() {
        let p = params();
        let derived = evaluate(&p, &at_reference()).unwrap().costs.sr_r;
        let printed = evaluate(&p.clone().with_formula_mode(FormulaMode::AsPrinted), &at_reference())
            .unwrap()
            .costs
            .sr_r;
        assert!((printed / derived - p.p_r / 292.28).abs() < 1e-12);
    }

    #[test]
    fn decision_json_uses_symbol_keys() {
        let text = serde_json::to_string(&at_reference()).unwrap();
        assert!(text.contains("\"T0\"") && text.contains("\"W_r\"") && text.contains("\"G\""));
        let back: DecisionVector = serde_json::from_str(&text).unwrap();
        assert_eq!(back, at_reference());
    }
}
