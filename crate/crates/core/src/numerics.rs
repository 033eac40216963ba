//! Exponential kernels shared by the closed-form trajectories.
//!
//! Every `(1/θ)(e^{θx} − 1)`-style term in the model goes through one of these
//! helpers so that the θ → 0 limit is finite. Below [`THETA_FLOOR`] the
//! kernels switch to their second-order series.

/// Rates with magnitude below this are treated as zero.
pub const THETA_FLOOR: f64 = 1e-10;

/// `(e^{r x} − 1) / r`, with limit `x` as `r → 0`.
#[inline]
pub fn growth(r: f64, x: f64) -> f64 {
    if r.abs() < THETA_FLOOR {
        x + 0.5 * r * x * x
    } else {
        (r * x).exp_m1() / r
    }
}

/// `(e^{r x} − 1 − r x) / r²`, with limit `x²/2` as `r → 0`.
#[inline]
pub fn growth2(r: f64, x: f64) -> f64 {
    let z = r * x;
    if r.abs() < THETA_FLOOR {
        0.5 * x * x + r * x * x * x / 6.0
    } else if z.abs() < 1e-3 {
        // exp_m1(z) - z cancels catastrophically here
        0.5 * x * x * (1.0 + z / 3.0 * (1.0 + z / 4.0 * (1.0 + z / 5.0 * (1.0 + z / 6.0))))
    } else {
        (z.exp_m1() - z) / (r * r)
    }
}

/// `ln(1 + r y) / r`, with limit `y` as `r → 0`.
#[inline]
pub fn log1p_over(r: f64, y: f64) -> f64 {
    if r.abs() < THETA_FLOOR {
        y - 0.5 * r * y * y
    } else {
        (r * y).ln_1p() / r
    }
}
