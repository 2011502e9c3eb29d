//! The eight-point acceptance gate. One test per criterion: each prints the
//! criterion's verdict line and fails if any check inside it failed.

use chemorepel::acceptance::{self, CriterionOutcome};
use chemorepel::Result;

fn assert_criterion(outcome: Result<CriterionOutcome>) {
    let outcome = outcome.expect("criterion aborted");
    println!("{}", outcome.summary());
    assert!(outcome.passed(), "{}", outcome.summary());
}

#[test]
fn criterion_1_constant_supply_dichotomy() {
    assert_criterion(acceptance::criterion_1());
}

#[test]
fn criterion_2_inhomogeneous_supply_convergence() {
    assert_criterion(acceptance::criterion_2());
}

#[test]
fn criterion_3_closed_form_periodic_orbits() {
    assert_criterion(acceptance::criterion_3());
}

#[test]
fn criterion_4_mean_system_a_priori_bounds() {
    assert_criterion(acceptance::criterion_4());
}

#[test]
fn criterion_5_mass_persistence() {
    assert_criterion(acceptance::criterion_5());
}

#[test]
fn criterion_6_discrete_identities() {
    assert_criterion(acceptance::criterion_6());
}

#[test]
fn criterion_7_discretization_orders() {
    assert_criterion(acceptance::criterion_7());
}

#[test]
fn criterion_8_dichotomy_boundary_sweep() {
    let scratch = tempfile::tempdir().expect("scratch dir for the sweep artifacts");
    assert_criterion(acceptance::criterion_8(scratch.path()));
}
