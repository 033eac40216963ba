//! Manufacturer side: production, screening, rework and delivery.

use crate::numerics::{growth, growth2, log1p_over};
use crate::params::{FormulaMode, ModelParameters};

/// Effective perfect and defective production rates `(P_e, P_de)`.
///
/// Screening lets a fraction `beta2` of defectives through as perfect and
/// rejects a fraction `beta1` of perfect units, so `P_e + P_de = P`.
pub fn effective_rates(params: &ModelParameters) -> (f64, f64) {
    let p = params.p;
    let good = (1.0 - params.f_d) * p;
    let bad = params.f_d * p;
    let p_e = good + bad * params.beta2 - good * params.beta1;
    let p_de = good * params.beta1 + bad - bad * params.beta2;
    (p_e, p_de)
}

/// Effective deterioration rates `(θ_m, θ_r)` after preservation spending.
pub fn deterioration_rates(params: &ModelParameters, xi1: f64, xi2: f64) -> (f64, f64) {
    (
        params.theta1 * (-params.v1 * xi1).exp(),
        params.theta2 * (-params.v2 * xi2).exp(),
    )
}

/// Rework end `T1`, cycle end `T2` and lot size `Q_m` of the manufacturer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturerSchedule {
    pub t1: f64,
    pub t2: f64,
    pub q_m: f64,
}

pub fn manufacturer_schedule(params: &ModelParameters, t0: f64, theta_m: f64) -> ManufacturerSchedule {
    let (_, p_de) = effective_rates(params);
    let u = growth(-theta_m, t0);
    let t1 = t0 + log1p_over(theta_m, p_de * u / params.p_r);
    // P·u(T0) carried forward through the rework phase
    let q_m = params.p * params.p_r * u / (params.p_r + theta_m * p_de * u);
    let t2 = t1 + log1p_over(theta_m, q_m / params.d_r);
    ManufacturerSchedule { t1, t2, q_m }
}

/// Perfect-item stock level at time `t ∈ [0, T2]`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn perfect_stock(
    t: f64,
    t0: f64,
    sched: &ManufacturerSchedule,
    p_e: f64,
    p_r: f64,
    d_r: f64,
    theta: f64,
    mode: FormulaMode,
) -> f64 {
    if t <= t0 {
        p_e * growth(-theta, t)
    } else if t <= sched.t1 {
        sched.q_m * (theta * (sched.t1 - t)).exp() - p_r * growth(theta, sched.t1 - t)
    } else {
        let anchor = match mode {
            FormulaMode::AsDerived => sched.t2,
            FormulaMode::AsPrinted => sched.t1,
        };
        d_r * growth(theta, anchor - t)
    }
}

/// Defective stock level at time `t ∈ [0, T1]`.
pub(crate) fn defective_stock(t: f64, t0: f64, t1: f64, p_de: f64, p_r: f64, theta: f64) -> f64 {
    if t <= t0 {
        p_de * growth(-theta, t)
    } else {
        p_r * growth(theta, t1 - t)
    }
}

/// Stock-time integrals `(∫₀^{T2} I dt, ∫₀^{T1} I_d dt)`.
pub(crate) fn stock_integrals(
    t0: f64,
    sched: &ManufacturerSchedule,
    p_e: f64,
    p_de: f64,
    p_r: f64,
    d_r: f64,
    theta: f64,
) -> (f64, f64) {
    let rework = sched.t1 - t0;
    let delivery = sched.t2 - sched.t1;
    let j1 = p_e * growth2(-theta, t0) + sched.q_m * growth(theta, rework) - p_r * growth2(theta, rework)
        + d_r * growth2(theta, delivery);
    let j2 = p_de * growth2(-theta, t0) + p_r * growth2(theta, rework);
    (j1, j2)
}
