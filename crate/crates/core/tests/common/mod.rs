//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

pub mod oracle;

use greenchain_core::{evaluate, DecisionVector, Evaluation, ModelParameters};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Classical fourth-order Runge-Kutta for a scalar ODE, `steps` equal steps
/// from `t0` to `t1` (which may lie before `t0`).
pub fn rk4(f: impl Fn(f64, f64) -> f64, t0: f64, y0: f64, t1: f64, steps: usize) -> f64 {
    let h = (t1 - t0) / steps as f64;
    let mut t = t0;
    let mut y = y0;
    for _ in 0..steps {
        y = rk4_step(&f, t, y, h);
        t += h;
    }
    y
}

pub fn rk4_step(f: &impl Fn(f64, f64) -> f64, t: f64, y: f64, h: f64) -> f64 {
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
    let k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
    let k4 = f(t + h, y + h * k3);
    y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Integrate from `(t0, y0)` in direction `sign(h)` until `y` crosses zero,
/// then bisect on a single RK4 step from the last grid point.
pub fn rk4_zero(f: impl Fn(f64, f64) -> f64, t0: f64, y0: f64, h: f64, max_steps: usize) -> Option<f64> {
    let mut t = t0;
    let mut y = y0;
    for _ in 0..max_steps {
        let next = rk4_step(&f, t, y, h);
        if next.signum() != y.signum() || next == 0.0 {
            let (mut lo, mut hi) = (0.0, h);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let ym = rk4_step(&f, t, y, mid);
                if ym.signum() == y.signum() && ym != 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some(t + 0.5 * (lo + hi));
        }
        t += h;
        y = next;
    }
    None
}

/// Bisection for a sign change of `g` on `[a, b]`.
pub fn bisect(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut ga = g(a);
    assert!(ga * g(b) <= 0.0, "no sign change on [{a}, {b}]");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if gm.signum() == ga.signum() {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Composite Simpson rule with `n` (made even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 1 { n + 1 } else { n.max(2) };
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + h * k as f64);
    }
    s * h / 3.0
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Calibrated constants for the published baseline.
pub fn calibrated() -> ModelParameters {
    ModelParameters::reference(0.039976, 0.062673)
        .with_carbon_tax(2.108969)
        .with_cap_trade_price(2.108969)
}

pub fn baseline_decisions() -> DecisionVector {
    DecisionVector::new(0.6626, 167.8651, 93.6741, 7.7565, 292.28)
}

/// A random admissible parameter set and decision vector, with every
/// constant perturbed around the published defaults.
pub fn sample_admissible(rng: &mut ChaCha8Rng) -> (ModelParameters, DecisionVector, Evaluation) {
    loop {
        let mut p = ModelParameters::reference(rng.random_range(0.005..0.1), rng.random_range(0.005..0.1));
        for &key in ModelParameters::REQUIRED_KEYS {
            if matches!(key, "v1" | "v2") {
                continue;
            }
            let v = p.get_mut(key).unwrap();
            *v *= rng.random_range(0.7..1.3);
        }
        p.theta1 = rng.random_range(0.01..0.5);
        p.theta2 = rng.random_range(0.01..0.5);
        p.eta = rng.random_range(0.05..2.0);
        p.c_tax = Some(rng.random_range(0.0..5.0));
        p.c_ct = Some(rng.random_range(0.0..5.0));
        if p.validate().is_err() {
            continue;
        }
        let d = DecisionVector::new(
            rng.random_range(0.05..1.5),
            rng.random_range(0.0..200.0),
            rng.random_range(0.0..200.0),
            rng.random_range(0.0..20.0),
            rng.random_range(p.w_m..p.max_retail_price() * 0.999),
        );
        if let Ok(e) = evaluate(&p, &d) {
            return (p, d, e);
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
