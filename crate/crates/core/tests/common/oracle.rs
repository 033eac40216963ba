//! Schedule, trajectory and cost-integral checks against RK4 and Simpson.

use greenchain_core::model::effective_rates;
use greenchain_core::{Evaluation, ModelParameters};

use super::{rel_err, rk4, rk4_zero, simpson};

const H: f64 = 1e-3;
pub const POINTS: usize = 50;

type Rhs<'a> = Box<dyn Fn(f64, f64) -> f64 + 'a>;

/// Piecewise ODE: each segment runs to its end time with its own right-hand side.
struct Piecewise<'a> {
    y0: f64,
    t0: f64,
    segments: Vec<(f64, Rhs<'a>)>,
}

impl Piecewise<'_> {
    /// Values at sorted times `ts`, integrating through each breakpoint.
    fn values(&self, ts: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(ts.len());
        let (mut t, mut y) = (self.t0, self.y0);
        let mut k = 0;
        for (end, f) in &self.segments {
            while k < ts.len() && ts[k] <= *end {
                y = advance(f, t, y, ts[k]);
                t = ts[k];
                out.push(y);
                k += 1;
            }
            y = advance(f, t, y, *end);
            t = *end;
        }
        assert_eq!(out.len(), ts.len(), "sample times beyond the last segment");
        out
    }
}

fn advance(f: &dyn Fn(f64, f64) -> f64, t: f64, y: f64, to: f64) -> f64 {
    if to == t {
        return y;
    }
    let steps = ((to - t).abs() / H).ceil().max(1.0) as usize;
    rk4(f, t, y, to, steps)
}

pub struct Oracle {
    pub t1: f64,
    pub t2: f64,
    pub q_m: f64,
    pub t11: f64,
    pub q_r: f64,
    pub t3: f64,
}

/// Breakpoints found by integrating the balance equations and locating each
/// zero crossing, independent of the closed forms.
pub fn oracle(p: &ModelParameters, e: &Evaluation) -> Oracle {
    let s = &e.schedule;
    let (p_e, p_de) = effective_rates(p);
    let th = s.theta_m;
    let t0 = e.decisions.t0;

    // defective stock builds up, then is reworked away; T1 is where it empties
    let id0 = rk4(|_, y| p_de - th * y, 0.0, 0.0, t0, 2000);
    let t1 = rk4_zero(|_, y| -p.p_r - th * y, t0, id0, H, 10_000_000).expect("rework ends");

    let i0 = rk4(|_, y| p_e - th * y, 0.0, 0.0, t0, 2000);
    let q_m = advance(&|_, y| p.p_r - th * y, t0, i0, t1);
    let t2 = rk4_zero(|_, y| -p.d_r - th * y, t1, q_m, H, 10_000_000).expect("stock runs out");

    let f = p.a - p.b * e.decisions.w_r;
    let b2 = p.d_r - f;
    let b1 = p.eta + s.theta_r;
    let s0 = f * t1;
    let t11 = if s0 == 0.0 {
        t1
    } else {
        rk4_zero(|_, y| b2 - p.eta * y, t1, s0, -H, 10_000_000).expect("backlog clears")
    };
    let q_r = advance(&|_, y| b2 - b1 * y, t11, 0.0, t2);
    let t3 = rk4_zero(|_, y| -f - b1 * y, t2, q_r, H, 100_000_000).expect("retailer runs out");
    Oracle {
        t1,
        t2,
        q_m,
        t11,
        q_r,
        t3,
    }
}

fn grid(a: f64, b: f64) -> Vec<f64> {
    (0..POINTS)
        .map(|k| a + (b - a) * (k as f64 + 0.5) / POINTS as f64)
        .collect()
}

/// Largest error relative to `max(|closed|, 1e-3·peak)`, so points beside a
/// zero crossing are measured against the trajectory scale.
fn traj_error(ode: &[f64], closed: &[f64], peak: f64) -> f64 {
    ode.iter()
        .zip(closed)
        .map(|(o, c)| (o - c).abs() / c.abs().max(1e-3 * peak))
        .fold(0.0, f64::max)
}

/// Relative errors of every closed-form breakpoint and stock trajectory.
pub fn schedule_errors(p: &ModelParameters, e: &Evaluation) -> Vec<(&'static str, f64)> {
    let s = &e.schedule;
    let o = oracle(p, e);
    let mut out = vec![
        ("T1", rel_err(o.t1, s.t1)),
        ("T2", rel_err(o.t2, s.t2)),
        ("Q_m", rel_err(o.q_m, s.q_m)),
        ("T11", (o.t11 - s.t11).abs() / s.t1),
        ("Q_r", rel_err(o.q_r, s.q_r)),
        ("T3", rel_err(o.t3, s.t3)),
    ];

    let (p_e, p_de) = effective_rates(p);
    let th = s.theta_m;
    let perfect = Piecewise {
        y0: 0.0,
        t0: 0.0,
        segments: vec![
            (s.t0, Box::new(move |_, y| p_e - th * y)),
            (s.t1, Box::new(|_, y| p.p_r - th * y)),
            (s.t2, Box::new(|_, y| -p.d_r - th * y)),
        ],
    };
    let ts = grid(0.0, s.t2);
    let closed: Vec<f64> = ts.iter().map(|&t| s.manufacturer_inventory(t, p)).collect();
    out.push(("I_m(t)", traj_error(&perfect.values(&ts), &closed, s.q_m)));

    let defective = Piecewise {
        y0: 0.0,
        t0: 0.0,
        segments: vec![
            (s.t0, Box::new(move |_, y| p_de - th * y)),
            (s.t1, Box::new(|_, y| -p.p_r - th * y)),
        ],
    };
    let ts = grid(0.0, s.t1);
    let closed: Vec<f64> = ts.iter().map(|&t| s.defective_inventory(t, p)).collect();
    out.push(("I_d(t)", traj_error(&defective.values(&ts), &closed, p_de * s.t0)));

    let (b1, b2, f) = (s.b1, s.b2, s.f);
    let retail = Piecewise {
        y0: 0.0,
        t0: s.t11,
        segments: vec![
            (s.t2, Box::new(move |_, y| b2 - b1 * y)),
            (s.t3, Box::new(move |_, y| -f - b1 * y)),
        ],
    };
    let ts = grid(s.t11, s.t3);
    let closed: Vec<f64> = ts.iter().map(|&t| s.retailer_inventory(t)).collect();
    out.push(("I_r(t)", traj_error(&retail.values(&ts), &closed, s.q_r)));

    if s.s > 0.0 {
        let eta = p.eta;
        let ts = grid(s.t11, s.t1);
        let ode: Vec<f64> = ts
            .iter()
            .map(|&t| advance(&|_, y| b2 - eta * y, s.t1, s.s, t))
            .collect();
        let closed: Vec<f64> = ts.iter().map(|&t| s.retailer_backlog_inventory(t, p)).collect();
        out.push(("I_s(t)", traj_error(&ode, &closed, s.s)));
    }
    out
}

fn simpson_pieces(f: impl Fn(f64) -> f64, breaks: &[f64]) -> f64 {
    breaks.windows(2).map(|w| simpson(&f, w[0], w[1], 2000)).sum()
}

/// Relative errors of the stock-time cost terms against Simpson quadrature
/// of the closed-form trajectories.
pub fn quadrature_errors(p: &ModelParameters, e: &Evaluation) -> Vec<(&'static str, f64)> {
    let s = &e.schedule;
    let c = &e.costs;
    let j1 = simpson_pieces(|t| s.manufacturer_inventory(t, p), &[0.0, s.t0, s.t1, s.t2]);
    let j2 = simpson_pieces(|t| s.defective_inventory(t, p), &[0.0, s.t0, s.t1]);
    let jr = simpson_pieces(|t| s.retailer_inventory(t), &[s.t11, s.t2, s.t3]);
    let js = simpson(|t| s.retailer_backlog_inventory(t, p), s.t1, s.t11, 2000);
    let stock_term = c.sr_r / e.decisions.w_r - s.f * (s.t3 - s.t1);
    vec![
        ("HC_m1", rel_err(c.hc_m1, p.h_p * j1)),
        ("HC_m2", rel_err(c.hc_m2, p.h_d * j2)),
        ("DC_m1", rel_err(c.dc_m1, p.d_cp * p.theta1 * j1)),
        ("DC_m2", rel_err(c.dc_m2, p.d_cd * p.theta1 * j2)),
        ("HC_r", rel_err(c.hc_r, p.h_r * jr)),
        ("DC_r", rel_err(c.dc_r, p.d_cr * p.theta2 * jr)),
        ("SR_r stock", rel_err(stock_term, p.eta * (js + jr))),
    ]
}

/// Absolute errors, scaled by `max(|x|, 1)`, of the boundary conditions,
/// continuity at the phase changes, and the profit identities.
pub fn identity_errors(p: &ModelParameters, e: &Evaluation) -> Vec<(&'static str, f64)> {
    let s = &e.schedule;
    let (p_e, p_de) = effective_rates(p);
    let scaled = |err: f64, x: f64| err.abs() / x.abs().max(1.0);
    let eps = 1e-12 * s.t2;
    let im = |t| s.manufacturer_inventory(t, p);
    let id = |t| s.defective_inventory(t, p);
    let pr = &e.profits;
    vec![
        ("P_e + P_de = P", scaled(p_e + p_de - p.p, p.p)),
        ("I_m(0) = 0", scaled(im(0.0), s.q_m)),
        ("I_d(0) = 0", scaled(id(0.0), p_de * s.t0)),
        ("I_m continuous at T0", scaled(im(s.t0 - eps) - im(s.t0 + eps), s.q_m)),
        ("I_m(T1) = Q_m", scaled(im(s.t1) - s.q_m, s.q_m)),
        ("I_m continuous at T1", scaled(im(s.t1 - eps) - im(s.t1 + eps), s.q_m)),
        ("I_m(T2) = 0", scaled(im(s.t2), s.q_m)),
        (
            "I_d continuous at T0",
            scaled(id(s.t0 - eps) - id(s.t0 + eps), p_de * s.t0),
        ),
        ("I_d(T1) = 0", scaled(id(s.t1), p_de * s.t0)),
        ("I_r(T11) = 0", scaled(s.retailer_inventory(s.t11), s.q_r)),
        ("I_r(T2) = Q_r", scaled(s.retailer_inventory(s.t2) - s.q_r, s.q_r)),
        ("I_r(T3) = 0", scaled(s.retailer_inventory(s.t3), s.q_r)),
        ("I_s(T1) = s", scaled(s.retailer_backlog_inventory(s.t1, p) - s.s, s.s)),
        ("I_s(T11) = 0", scaled(s.retailer_backlog_inventory(s.t11, p), s.s)),
        (
            "phi_r = (1 - f_r) phi_r_raw",
            scaled(pr.phi_r - (1.0 - p.f_r) * pr.phi_r_raw, pr.phi_r),
        ),
        (
            "phi_T = phi_m + phi_r",
            scaled(pr.phi_t - pr.phi_m - pr.phi_r, pr.phi_t),
        ),
    ]
}
