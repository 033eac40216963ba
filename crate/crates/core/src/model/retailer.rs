//! Retailer side: backlog until the first delivery, then stock- and
//! price-dependent consumption with deterioration.

use crate::error::ModelError;
use crate::numerics::{growth, growth2, log1p_over};
use crate::params::ModelParameters;

/// Retailer cycle quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetailerSchedule {
    /// Base demand `f(W_r) = a − b·W_r`.
    pub f: f64,
    pub s: f64,
    pub t11: f64,
    pub q_r: f64,
    pub t3: f64,
    pub b1: f64,
    pub b2: f64,
}

/// Base (price-dependent) demand rate.
pub fn demand(params: &ModelParameters, w_r: f64) -> f64 {
    params.a - params.b * w_r
}

/// Backlog `s`, clearing time `T11`, peak stock `Q_r` and cycle end `T3`.
///
/// With zero base demand the stock after `T2` only decays, so `T3 = ∞`.
pub fn retailer_schedule(
    params: &ModelParameters,
    w_r: f64,
    t1: f64,
    t2: f64,
    theta_r: f64,
) -> Result<RetailerSchedule, ModelError> {
    let f = demand(params, w_r);
    if f < 0.0 {
        return Err(ModelError::NegativeDemand { w_r, demand: f });
    }
    let eta = params.eta;
    let s = f * t1;
    let b1 = eta + theta_r;
    let b2 = params.d_r - f;
    if b2 - s * eta <= 0.0 {
        return Err(ModelError::BacklogNeverClears { b2, s_eta: s * eta });
    }
    let t11 = t1 + log1p_over(eta, -s / b2);
    let q_r = b2 * growth(-b1, t2 - t11);
    let t3 = if f == 0.0 {
        f64::INFINITY
    } else {
        t2 + log1p_over(b1, q_r / f)
    };
    Ok(RetailerSchedule {
        f,
        s,
        t11,
        q_r,
        t3,
        b1,
        b2,
    })
}

/// Stock level on `[T11, T3]`.
pub(crate) fn stock(t: f64, t2: f64, sched: &RetailerSchedule) -> f64 {
    if t <= t2 {
        sched.b2 * growth(-sched.b1, t - sched.t11)
    } else {
        sched.f * growth(sched.b1, sched.t3 - t)
    }
}

/// Level of the branch that starts from `I(T1) = s`. It reaches zero at `T11`.
pub(crate) fn backlog_branch(t: f64, t1: f64, eta: f64, sched: &RetailerSchedule) -> f64 {
    let x = t - t1;
    sched.s * (-eta * x).exp() + sched.b2 * growth(-eta, x)
}

/// `(∫_{T11}^{T3} I dt, ∫_{T1}^{T11} I dt)`; the second is signed, so it is
/// negative when `T11 < T1`.
pub(crate) fn stock_integrals(t1: f64, t2: f64, eta: f64, sched: &RetailerSchedule) -> (f64, f64) {
    let jr = sched.b2 * growth2(-sched.b1, t2 - sched.t11) + sched.f * growth2(sched.b1, sched.t3 - t2);
    let delta = sched.t11 - t1;
    let js = sched.s * growth(-eta, delta) + sched.b2 * growth2(-eta, delta);
    (jr, js)
}
