//! Closed forms against direct integration of the balance equations.

mod common;

use common::oracle::{identity_errors, oracle, quadrature_errors, schedule_errors};
use common::{rel_err, sample_admissible};
use greenchain_core::{evaluate, DecisionVector, FormulaMode, ModelParameters};

const SAMPLES: usize = 100;

#[test]
fn trajectories_match_balance_equations() {
    let mut rng = common::rng(11);
    for _ in 0..SAMPLES {
        let (p, d, e) = sample_admissible(&mut rng);
        for (name, err) in schedule_errors(&p, &e) {
            assert!(err <= 1e-6, "{name}: rel {err:e} at {d:?}");
        }
    }
}

#[test]
fn cost_integrals_match_quadrature() {
    let mut rng = common::rng(12);
    for _ in 0..SAMPLES {
        let (p, d, e) = sample_admissible(&mut rng);
        for (name, err) in quadrature_errors(&p, &e) {
            assert!(err <= 1e-6, "{name}: rel {err:e} at {d:?}");
        }
    }
}

#[test]
fn identities_and_continuity() {
    let mut rng = common::rng(13);
    for _ in 0..SAMPLES {
        let (p, d, e) = sample_admissible(&mut rng);
        for (name, err) in identity_errors(&p, &e) {
            assert!(err <= 1e-9, "{name}: {err:e} at {d:?}");
        }
        let s = &e.schedule;
        assert!(s.t0 < s.t1 && s.t1 < s.t2 && s.t2 < s.t3);
    }
}

#[test]
fn reference_point_schedule() {
    let p = ModelParameters::reference(0.04, 0.06);
    let d = DecisionVector::new(0.6626, 167.8651, 93.6741, 7.7565, 292.28);
    let e = evaluate(&p, &d).unwrap();
    let o = oracle(&p, &e);
    assert!(rel_err(o.t1, e.schedule.t1) < 1e-9);
    assert!(rel_err(o.q_m, e.schedule.q_m) < 1e-9);
    assert!(rel_err(o.t3, e.schedule.t3) < 1e-9);
}

#[test]
fn as_printed_mode_changes_only_the_documented_terms() {
    let derived = ModelParameters::reference(0.04, 0.06);
    let printed = derived.clone().with_formula_mode(FormulaMode::AsPrinted);
    let d = DecisionVector::new(0.6626, 167.8651, 93.6741, 7.7565, 292.28);
    let (a, b) = (evaluate(&derived, &d).unwrap(), evaluate(&printed, &d).unwrap());
    assert_eq!(a.schedule, b.schedule);
    assert_ne!(a.costs.sr_r, b.costs.sr_r);
    let t = 0.5 * (a.schedule.t1 + a.schedule.t2);
    assert_ne!(
        a.schedule.manufacturer_inventory(t, &derived),
        b.schedule.manufacturer_inventory(t, &printed)
    );
}
