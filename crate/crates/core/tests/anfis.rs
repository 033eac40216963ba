//! Surrogate fitting on synthetic targets and on a profit sweep.

mod common;

use greenchain_core::anfis::{generate_dataset, train_hybrid, AnfisModel, Consequent, Dataset, TrainConfig};
use greenchain_core::optim::{run, Algorithm, OptimizerConfig, PolicyProblem, SearchSpace};
use greenchain_core::{DecisionVector, PolicyKind};
use proptest::prelude::*;
use rand::Rng;

fn sse(model: &AnfisModel, data: &Dataset) -> f64 {
    data.x
        .iter()
        .zip(&data.y)
        .map(|(&x, &y)| (model.forward(x).unwrap() - y).powi(2))
        .sum()
}

fn smooth_data(n: usize) -> Dataset {
    let x: Vec<f64> = (0..n).map(|k| 0.013 + 0.97 * k as f64 / (n - 1) as f64).collect();
    let y = x.iter().map(|x| (3.0 * x).sin() + 0.5 * x * x).collect();
    Dataset::new(x, y)
}

#[test]
fn premise_gradient_matches_finite_differences() {
    let data = smooth_data(37);
    let mut model = AnfisModel::grid(0.0, 1.0).unwrap();
    model.fit_consequents(&data).unwrap();
    let grad = model.premise_gradient(&data).unwrap();
    let corners = model.corners();
    let h = 1e-6;
    for (k, &g) in grad.iter().enumerate() {
        let at = |c: f64| {
            let mut m = model.clone();
            let mut cs = corners.clone();
            cs[k] = c;
            m.set_corners(&cs);
            sse(&m, &data)
        };
        let fd = (at(corners[k] + h) - at(corners[k] - h)) / (2.0 * h);
        let scale = g.abs().max(fd.abs()).max(1e-6);
        assert!((g - fd).abs() / scale <= 1e-4, "corner {k}: analytic {g} fd {fd}");
    }
}

#[test]
fn recovers_a_known_network() {
    let mut truth = AnfisModel::grid(-2.0, 3.0).unwrap();
    let mut rng = common::rng(5);
    for r in &mut truth.rules {
        *r = Consequent {
            p: rng.random_range(-5.0..5.0),
            q: rng.random_range(-5.0..5.0),
        };
    }
    let x: Vec<f64> = (0..80).map(|k| -1.9 + 4.8 * k as f64 / 79.0).collect();
    let y = truth.predict(&x).unwrap();
    let data = Dataset::new(x, y);
    let fit = train_hybrid(&AnfisModel::grid(-2.0, 3.0).unwrap(), &data, &TrainConfig::default()).unwrap();
    let rmse = fit.model.rmse(&data).unwrap();
    assert!(rmse <= 1e-8, "{rmse:e}");
}

#[test]
fn training_history_never_rises() {
    let data = smooth_data(61);
    let out = train_hybrid(&AnfisModel::grid(0.0, 1.0).unwrap(), &data, &TrainConfig::default()).unwrap();
    assert_eq!(out.rmse_history.len(), 100);
    for w in out.rmse_history.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12), "{:?}", w);
    }
}

fn tax_optimum() -> DecisionVector {
    let problem = PolicyProblem::new(common::calibrated(), PolicyKind::CarbonTax);
    let space = SearchSpace::model_default(&problem.params);
    let res = run(&space, &OptimizerConfig::for_algorithm(Algorithm::Pso, 0), &problem).unwrap();
    DecisionVector::from_array(res.best.clone().try_into().unwrap())
}

#[test]
fn fits_the_cycle_length_sweep() {
    let p = common::calibrated();
    let data = generate_dataset(&p, &tax_optimum(), "T0", 0.3, 1.0, 61).unwrap();
    assert_eq!(data.len(), 61);
    let out = train_hybrid(&AnfisModel::grid(0.3, 1.0).unwrap(), &data, &TrainConfig::default()).unwrap();
    let (lo, hi) = data
        .y
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
    let rmse = *out.rmse_history.last().unwrap();
    assert!(rmse <= 0.01 * (hi - lo), "rmse {rmse} range {}", hi - lo);
}

#[test]
fn dataset_reports_skipped_points() {
    let p = common::calibrated();
    let base = common::baseline_decisions();
    let data = generate_dataset(&p, &base, "W_r", 280.0, 310.0, 31).unwrap();
    assert!(data.skipped > 0 && data.len() + data.skipped == 31);
    assert!(generate_dataset(&p, &base, "T9", 0.0, 1.0, 5).is_err());
    assert!(generate_dataset(&p, &base, "T0", 1.0, 0.5, 5).is_err());
}

#[test]
fn outside_support_is_an_error() {
    let m = AnfisModel::grid(0.0, 1.0).unwrap();
    assert!(m.forward(-0.5).is_err());
    assert!(m.forward(1.5).is_err());
    assert!(train_hybrid(&m, &Dataset::default(), &TrainConfig::default()).is_err());
}

proptest! {
    #[test]
    fn output_is_a_convex_mix_of_rule_outputs(
        x in 0.0..1.0f64,
        coeffs in prop::collection::vec(-10.0..10.0f64, 10),
    ) {
        let mut m = AnfisModel::grid(0.0, 1.0).unwrap();
        for (i, r) in m.rules.iter_mut().enumerate() {
            *r = Consequent { p: coeffs[2 * i], q: coeffs[2 * i + 1] };
        }
        let outs: Vec<f64> = m.rules.iter().map(|r| r.p * x + r.q).collect();
        let lo = outs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = outs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let y = m.forward(x).unwrap();
        prop_assert!(y >= lo - 1e-12 && y <= hi + 1e-12);
    }

    #[test]
    fn memberships_stay_in_unit_interval(x in -0.5..1.5f64) {
        let m = AnfisModel::grid(0.0, 1.0).unwrap();
        for w in m.weights(x) {
            prop_assert!((0.0..=1.0).contains(&w));
        }
    }
}
