//! Single-input first-order Sugeno fuzzy model with five trapezoidal
//! membership functions, one rule per function, weighted-average
//! defuzzification, and hybrid training (least squares for the rule
//! consequents, gradient descent for the trapezoid corners).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ModelError;
use crate::model::DecisionVector;
use crate::params::ModelParameters;
use crate::policy::carbon_tax_profit;

pub const N_MF: usize = 5;
/// Ridge added to the normal equations when the least-squares system is singular.
pub const RIDGE_LAMBDA: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnfisError {
    #[error("input {0} is outside the fuzzy support (all rule weights are zero)")]
    OutsideSupport(f64),
    #[error("training dataset is empty")]
    EmptyDataset,
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("no admissible points in the sweep range")]
    NoAdmissiblePoints,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    VeryLow,
    Low,
    Medium,
    High,
    VeryHigh,
}

impl Label {
    pub const ALL: [Label; N_MF] = [Label::VeryLow, Label::Low, Label::Medium, Label::High, Label::VeryHigh];
}

/// Trapezoid with corners `a ≤ b ≤ c ≤ d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipFunction {
    pub label: Label,
    pub corners: [f64; 4],
}

impl MembershipFunction {
    pub fn new(label: Label, corners: [f64; 4]) -> Self {
        let mut mf = MembershipFunction { label, corners };
        mf.repair();
        mf
    }

    pub fn eval(&self, x: f64) -> f64 {
        let [a, b, c, d] = self.corners;
        if x >= b && x <= c {
            1.0
        } else if x > a && x < b {
            (x - a) / (b - a)
        } else if x > c && x < d {
            (d - x) / (d - c)
        } else {
            0.0
        }
    }

    /// `∂μ/∂(a, b, c, d)` at `x`, zero on the plateau and outside the support.
    pub fn gradient(&self, x: f64) -> [f64; 4] {
        let [a, b, c, d] = self.corners;
        if x > a && x < b {
            let w = b - a;
            [(x - b) / (w * w), -(x - a) / (w * w), 0.0, 0.0]
        } else if x > c && x < d {
            let w = d - c;
            [0.0, 0.0, (d - x) / (w * w), (x - c) / (w * w)]
        } else {
            [0.0; 4]
        }
    }

    /// Restore corner ordering after an update.
    pub fn repair(&mut self) {
        self.corners.sort_by(f64::total_cmp);
    }
}

/// Linear rule consequent `p·x + q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Consequent {
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnfisModel {
    pub mfs: Vec<MembershipFunction>,
    pub rules: Vec<Consequent>,
}

impl AnfisModel {
    /// Equal-width overlapping trapezoids across `[lo, hi]`; rule `k`
    /// fires on membership function `k`. Consequents start at zero.
    pub fn grid(lo: f64, hi: f64) -> Result<Self, AnfisError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(AnfisError::InvalidSpec(format!("need lo < hi, got [{lo}, {hi}]")));
        }
        let h = (hi - lo) / (N_MF - 1) as f64;
        let mfs = Label::ALL
            .iter()
            .enumerate()
            .map(|(k, &label)| {
                let c = lo + k as f64 * h;
                MembershipFunction::new(label, [c - h, c - 0.25 * h, c + 0.25 * h, c + h])
            })
            .collect();
        Ok(AnfisModel {
            mfs,
            rules: vec![Consequent { p: 0.0, q: 0.0 }; N_MF],
        })
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    /// Input, membership, firing, normalization and consequent layers plus
    /// the three output nodes (weighted sum, weight sum, quotient).
    pub fn node_count(&self) -> usize {
        1 + self.mfs.len() + 3 * self.rules.len() + 3
    }

    pub fn linear_parameter_count(&self) -> usize {
        2 * self.rules.len()
    }

    pub fn nonlinear_parameter_count(&self) -> usize {
        4 * self.mfs.len()
    }

    pub fn weights(&self, x: f64) -> Vec<f64> {
        self.mfs.iter().map(|mf| mf.eval(x)).collect()
    }

    pub fn forward(&self, x: f64) -> Result<f64, AnfisError> {
        let w = self.weights(x);
        let total: f64 = w.iter().sum();
        if total <= 0.0 {
            return Err(AnfisError::OutsideSupport(x));
        }
        let num: f64 = w.iter().zip(&self.rules).map(|(wi, r)| wi * (r.p * x + r.q)).sum();
        Ok(num / total)
    }

    pub fn predict(&self, xs: &[f64]) -> Result<Vec<f64>, AnfisError> {
        xs.iter().map(|&x| self.forward(x)).collect()
    }

    pub fn rmse(&self, data: &Dataset) -> Result<f64, AnfisError> {
        if data.is_empty() {
            return Err(AnfisError::EmptyDataset);
        }
        let mut sse = 0.0;
        for (&x, &y) in data.x.iter().zip(&data.y) {
            let e = self.forward(x)? - y;
            sse += e * e;
        }
        Ok((sse / data.len() as f64).sqrt())
    }

    /// Gradient of `Σ (ŷ − y)²` with respect to every corner, in
    /// membership-function order.
    pub fn premise_gradient(&self, data: &Dataset) -> Result<Vec<f64>, AnfisError> {
        let mut grad = vec![0.0; 4 * self.mfs.len()];
        for (&x, &t) in data.x.iter().zip(&data.y) {
            let w = self.weights(x);
            let total: f64 = w.iter().sum();
            if total <= 0.0 {
                return Err(AnfisError::OutsideSupport(x));
            }
            let f: Vec<f64> = self.rules.iter().map(|r| r.p * x + r.q).collect();
            let y = w.iter().zip(&f).map(|(a, b)| a * b).sum::<f64>() / total;
            let outer = 2.0 * (y - t);
            for (i, mf) in self.mfs.iter().enumerate() {
                let dy_dw = (f[i] - y) / total;
                for (k, g) in mf.gradient(x).iter().enumerate() {
                    grad[4 * i + k] += outer * dy_dw * g;
                }
            }
        }
        Ok(grad)
    }

    /// Solve the consequents by least squares with the premises fixed.
    pub fn fit_consequents(&mut self, data: &Dataset) -> Result<(), AnfisError> {
        if data.is_empty() {
            return Err(AnfisError::EmptyDataset);
        }
        let n = self.rules.len();
        let mut a = DMatrix::<f64>::zeros(data.len(), 2 * n);
        for (row, &x) in data.x.iter().enumerate() {
            let w = self.weights(x);
            let total: f64 = w.iter().sum();
            if total <= 0.0 {
                return Err(AnfisError::OutsideSupport(x));
            }
            for i in 0..n {
                let wn = w[i] / total;
                a[(row, 2 * i)] = wn * x;
                a[(row, 2 * i + 1)] = wn;
            }
        }
        let b = DVector::from_column_slice(&data.y);
        let theta = least_squares(&a, &b);
        for i in 0..n {
            self.rules[i] = Consequent {
                p: theta[2 * i],
                q: theta[2 * i + 1],
            };
        }
        Ok(())
    }

    /// Flattened corners, membership-function order.
    pub fn corners(&self) -> Vec<f64> {
        self.mfs.iter().flat_map(|mf| mf.corners).collect()
    }

    pub fn set_corners(&mut self, corners: &[f64]) {
        for (i, mf) in self.mfs.iter_mut().enumerate() {
            mf.corners.copy_from_slice(&corners[4 * i..4 * i + 4]);
            mf.repair();
        }
    }
}

/// Least squares by thin QR; falls back to ridge-regularized normal
/// equations when `R` is numerically singular.
fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let cols = a.ncols();
    if a.nrows() >= cols {
        let qr = a.clone().qr();
        let r = qr.r();
        let scale = (0..cols).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
        let rank_ok = scale > 0.0 && (0..cols).all(|i| r[(i, i)].abs() > 1e-12 * scale);
        if rank_ok {
            let qtb = qr.q().transpose() * b;
            if let Some(x) = r.solve_upper_triangular(&qtb) {
                return x;
            }
        }
    }
    log::debug!("singular least-squares system, using ridge lambda = {RIDGE_LAMBDA}");
    let mut ata = a.transpose() * a;
    for i in 0..cols {
        ata[(i, i)] += RIDGE_LAMBDA;
    }
    let atb = a.transpose() * b;
    match ata.clone().cholesky() {
        Some(ch) => ch.solve(&atb),
        None => ata.lu().solve(&atb).unwrap_or_else(|| DVector::zeros(cols)),
    }
}

/// Paired training samples.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Grid points dropped because the model was not admissible there.
    #[serde(default)]
    pub skipped: usize,
}

impl Dataset {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert_eq!(x.len(), y.len(), "x and y lengths differ");
        Dataset { x, y, skipped: 0 }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x_range(&self) -> (f64, f64) {
        let lo = self.x.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            learning_rate: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainOutcome {
    pub model: AnfisModel,
    /// RMSE after the least-squares step of each epoch. Nonincreasing up to
    /// rounding in the refit.
    pub rmse_history: Vec<f64>,
    pub final_learning_rate: f64,
}

/// Hybrid training. Each epoch refits the consequents, then takes one
/// normalized gradient step on the corners, sized `learning_rate × (x range)`.
/// A step that raises the error is undone and the rate halved.
pub fn train_hybrid(model: &AnfisModel, data: &Dataset, config: &TrainConfig) -> Result<TrainOutcome, AnfisError> {
    if data.is_empty() {
        return Err(AnfisError::EmptyDataset);
    }
    if !(config.learning_rate >= 0.0 && config.learning_rate.is_finite()) {
        return Err(AnfisError::InvalidSpec(format!(
            "learning rate {}",
            config.learning_rate
        )));
    }
    let (lo, hi) = data.x_range();
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut model = model.clone();
    let mut lr = config.learning_rate;
    let mut history = Vec::with_capacity(config.epochs.max(1));

    model.fit_consequents(data)?;
    let mut current = model.rmse(data)?;
    history.push(current);

    for _ in 1..config.epochs {
        let grad = model.premise_gradient(data)?;
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if norm > 0.0 && lr > 0.0 {
            let step = lr * span / norm;
            let trial_corners: Vec<f64> = model.corners().iter().zip(&grad).map(|(c, g)| c - step * g).collect();
            let mut trial = model.clone();
            trial.set_corners(&trial_corners);
            match trial.rmse(data) {
                Ok(e) if e <= current => model = trial,
                _ => lr *= 0.5,
            }
        }
        model.fit_consequents(data)?;
        current = model.rmse(data)?;
        history.push(current);
    }
    Ok(TrainOutcome {
        model,
        rmse_history: history,
        final_learning_rate: lr,
    })
}

/// Sweep one decision variable over `n` evenly spaced points in `[lo, hi]`,
/// holding the others at `base`, and record the carbon-tax joint profit.
pub fn generate_dataset(
    params: &ModelParameters,
    base: &DecisionVector,
    variable: &str,
    lo: f64,
    hi: f64,
    n: usize,
) -> Result<Dataset, AnfisError> {
    let idx = DecisionVector::index_of(variable)
        .ok_or_else(|| AnfisError::InvalidSpec(format!("unknown decision variable {variable:?}")))?;
    if n < 2 || lo >= hi || lo.is_nan() || hi.is_nan() {
        return Err(AnfisError::InvalidSpec(format!(
            "need n >= 2 and lo < hi, got n = {n}, [{lo}, {hi}]"
        )));
    }
    if params.c_tax.is_none() {
        return Err(ModelError::MissingPrice("C_Tax").into());
    }
    let mut data = Dataset::default();
    for k in 0..n {
        let x = lo + (hi - lo) * k as f64 / (n - 1) as f64;
        let mut arr = base.to_array();
        arr[idx] = x;
        match carbon_tax_profit(params, &DecisionVector::from_array(arr)) {
            Ok(obj) => {
                data.x.push(x);
                data.y.push(obj.value);
            }
            Err(e) => {
                log::warn!("skipping {variable} = {x}: {e}");
                data.skipped += 1;
            }
        }
    }
    if data.is_empty() {
        return Err(AnfisError::NoAdmissiblePoints);
    }
    Ok(data)
}
