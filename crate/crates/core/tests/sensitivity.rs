//! Parameter sweeps, calibration and profit surfaces.

mod common;

use greenchain_core::optim::{run, Algorithm, OptimizerConfig, PolicyProblem, SearchSpace};
use greenchain_core::policy::carbon_tax_profit;
use greenchain_core::sensitivity::{
    calibrate_missing_defaults, check_direction, run_sweep, BaselineRow, CalibrationConfig, Direction,
    SensitivityError, SweepSpec,
};
use greenchain_core::surface::{profit_surface, Axis};
use greenchain_core::{DecisionVector, ModelParameters, PolicyKind};

fn pso() -> OptimizerConfig {
    OptimizerConfig::for_algorithm(Algorithm::Pso, 0)
}

fn tax_optimum(p: &ModelParameters) -> DecisionVector {
    let problem = PolicyProblem::new(p.clone(), PolicyKind::CarbonTax);
    let res = run(&SearchSpace::model_default(p), &pso(), &problem).unwrap();
    DecisionVector::from_array(res.best.try_into().unwrap())
}

#[test]
fn production_cost_sweep_lowers_profit() {
    let rows = run_sweep(&SweepSpec::new("C_p", pso()), &common::calibrated()).unwrap();
    assert_eq!(rows.len(), 5);
    assert!(check_direction(&rows, Direction::Nonincreasing));
    let zero = rows.iter().find(|r| r.level == 0.0).unwrap();
    assert_eq!(zero.pct_change, Some(0.0));
    assert!(rows.iter().all(|r| r.feasible && r.phi_t.is_some()));
    for r in &rows {
        let (zm, zr, phi) = (r.z_m.unwrap(), r.z_r.unwrap(), r.phi_t.unwrap());
        assert!((zm + zr - phi).abs() <= 1e-9 * phi.abs());
    }
}

#[test]
fn unused_constant_gives_identical_rows() {
    // the tax objective never reads the emission cap
    let p = common::calibrated();
    let spec = SweepSpec::new("U2", pso()).fixed_decisions(common::baseline_decisions());
    let rows = run_sweep(&spec, &p).unwrap();
    let v0 = rows[0].phi_t.unwrap();
    assert!(rows.iter().all(|r| r.phi_t == Some(v0) && r.pct_change == Some(0.0)));

    let spec = SweepSpec::new("U2", pso());
    let rows = run_sweep(&spec, &p).unwrap();
    assert!(rows.iter().all(|r| r.phi_t == rows[0].phi_t));
}

#[test]
fn inadmissible_levels_are_flagged() {
    // f_r = 0.8 scaled by +40% exceeds 1
    let mut p = common::calibrated();
    p.f_r = 0.8;
    let spec = SweepSpec::new("f_r", pso()).fixed_decisions(common::baseline_decisions());
    let rows = run_sweep(&spec, &p).unwrap();
    let top = rows.iter().find(|r| r.level == 40.0).unwrap();
    assert!(top.phi_t.is_none() && top.note.is_some() && !top.feasible);
    assert!(rows.iter().filter(|r| r.level <= 0.0).all(|r| r.phi_t.is_some()));
}

#[test]
fn bad_sweep_specs_are_rejected() {
    let p = common::calibrated();
    assert!(matches!(
        run_sweep(&SweepSpec::new("nope", pso()), &p),
        Err(SensitivityError::UnknownParameter(_))
    ));
    let mut spec = SweepSpec::new("C_p", pso());
    spec.levels = vec![-10.0, 10.0];
    assert!(matches!(run_sweep(&spec, &p), Err(SensitivityError::InvalidSpec(_))));
    let mut spec = SweepSpec::new("C_p", pso());
    spec.reoptimize = false;
    assert!(run_sweep(&spec, &p).is_err());
}

#[test]
fn calibration_recovers_synthetic_constants() {
    let truth = ModelParameters::reference(0.04, 0.06).with_carbon_tax(2.1);
    let d = tax_optimum(&truth);
    let obj = carbon_tax_profit(&truth, &d).unwrap();
    let target = BaselineRow {
        decisions: d,
        z_m: obj.phi_m,
        z_r: obj.phi_r,
        phi_t: obj.value,
    };
    let fit = calibrate_missing_defaults(&truth, &target, &CalibrationConfig::default()).unwrap();
    assert!(fit.passed, "{}", fit.report());
    assert!(fit.max_relative_error <= 1e-6, "{}", fit.report());
    assert!((fit.v1 - 0.04).abs() <= 1e-3 * 0.04, "{}", fit.report());
    assert!((fit.v2 - 0.06).abs() <= 1e-3 * 0.06, "{}", fit.report());
    assert!((fit.c_tax - 2.1).abs() <= 1e-3 * 2.1, "{}", fit.report());
}

#[test]
fn calibration_flags_a_price_that_does_nothing() {
    let mut p = ModelParameters::reference(0.04, 0.06).with_carbon_tax(2.0);
    for key in ["E_p", "E_t", "E_h1", "E_h2", "E_hr", "E_d1", "E_d2", "E_dr"] {
        *p.get_mut(key).unwrap() = 0.0;
    }
    let mut d = common::baseline_decisions();
    d.g = 0.0;
    let obj = carbon_tax_profit(&p, &d).unwrap();
    let target = BaselineRow {
        decisions: d,
        z_m: obj.phi_m,
        z_r: obj.phi_r,
        phi_t: obj.value,
    };
    let fit = calibrate_missing_defaults(&p, &target, &CalibrationConfig::default()).unwrap();
    assert!(fit.unidentifiable.contains(&"C_Tax".to_string()), "{}", fit.report());
    assert!(!fit.passed);
}

#[test]
fn single_cell_surface_is_the_objective() {
    let p = common::calibrated();
    let base = common::baseline_decisions();
    let cells = profit_surface(
        &p,
        PolicyKind::CarbonTax,
        &base,
        &Axis::new("T0", 0.5, 0.7, 1),
        &Axis::new("xi1", 160.0, 170.0, 1),
    )
    .unwrap();
    assert_eq!(cells.len(), 1);
    let mut d = base;
    d.t0 = 0.6;
    d.xi1 = 165.0;
    assert_eq!(cells[0].value, Some(carbon_tax_profit(&p, &d).unwrap().value));
}

#[test]
fn surface_peaks_inside_a_grid_around_the_optimum() {
    let p = common::calibrated();
    let opt = tax_optimum(&p);
    let x = Axis::new("T0", opt.t0 * 0.8, opt.t0 * 1.2, 11);
    let y = Axis::new("xi1", opt.xi1 * 0.8, opt.xi1 * 1.2, 11);
    let cells = profit_surface(&p, PolicyKind::CarbonTax, &opt, &x, &y).unwrap();
    assert_eq!(cells.len(), 121);
    let (k, _) = cells
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.value.unwrap().total_cmp(&b.1.value.unwrap()))
        .unwrap();
    let (i, j) = (k / 11, k % 11);
    assert!((1..10).contains(&i) && (1..10).contains(&j), "peak at ({i}, {j})");
    assert_eq!(cells[1].x, cells[0].x);
}
