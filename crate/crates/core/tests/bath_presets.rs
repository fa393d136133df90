use std::f64::consts::PI;
use std::io::Write;

use dressed_qubit::bath::{balance_residual, fill_rates, ElectronBath, RateModel, TabulatedRates};
use dressed_qubit::floquet::{floquet_decompose, DriveSpec};
use dressed_qubit::presets::{
    constant_drive_preset, monochromatic_preset, weak_drive_limit_check, MonochromaticClosedForm,
};
use dressed_qubit::{Branch, Error};
use proptest::prelude::*;

#[test]
fn electron_bath_rates_on_the_constant_registry() {
    let p = constant_drive_preset(1.0, 2.0).unwrap();
    let model = RateModel::ElectronBath(ElectronBath::new(1.0, 10.0, 10.0, 1.0, 1.0));
    let reg = fill_rates(&p.registry, &model).unwrap();
    assert_eq!(reg.len(), 2);
    let report = reg.balance_report().unwrap();
    assert_eq!(report.pairs.len(), 1);
    assert!(report.max_residual < 1e-6);
    let (down, up) = (reg.find(1.0).unwrap().gamma, reg.find(-1.0).unwrap().gamma);
    assert!(down > up && up > 0.0);
    assert!((up / down - (-1.0f64).exp()).abs() < 1e-6);
}

#[test]
fn missing_tabulated_frequency_is_reported() {
    let p = monochromatic_preset(1.0, 0.8, 0.1).unwrap();
    let table = TabulatedRates {
        beta: 1.0,
        points: vec![(0.8, 0.1), (-0.8, 0.05)],
    };
    match fill_rates(&p.registry, &RateModel::Tabulated(table)) {
        Err(Error::MissingRate { omega }) => assert!((omega.abs() - 0.8).abs() > 1e-6),
        other => panic!("expected MissingRate, got {other:?}"),
    }
}

#[test]
fn tabulated_rates_from_a_file() {
    let p = monochromatic_preset(1.0, 0.8, 0.1).unwrap();
    let beta = 1.5;
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "# balanced table").unwrap();
    writeln!(file, "omega,gamma").unwrap();
    for c in p.registry.channels() {
        writeln!(file, "{:?},{:?}", c.omega, 0.2 / (1.0 + (-beta * c.omega).exp())).unwrap();
    }
    let table = TabulatedRates::from_csv(file.path(), beta).unwrap();
    let reg = fill_rates(&p.registry, &RateModel::Tabulated(table)).unwrap();
    assert!(reg.balance_report().unwrap().max_residual < 1e-12);
    assert!(reg.channels().iter().all(|c| c.gamma > 0.0));
}

#[test]
fn monochromatic_closed_form_constants() {
    let cf = MonochromaticClosedForm::new(1.0, 0.8, 0.1).unwrap();
    assert!((cf.nu - 0.08f64.sqrt()).abs() < 1e-15);
    assert!((cf.theta.cos() - 0.5f64.sqrt()).abs() < 1e-15);
    let d = monochromatic_preset(1.0, 0.8, 0.1).unwrap().decomposition;
    let eps = d.quasi_energies();
    let split = eps[0] - eps[1];
    let w = 0.8;
    // equal to nu up to a whole number of drive quanta
    let k = ((split - cf.nu) / w).round();
    assert!((split - cf.nu - k * w).abs() < 1e-12);
}

#[test]
fn constant_preset_matches_the_numeric_pipeline() {
    let period = 2.0 * PI / 0.8;
    let p = constant_drive_preset(1.0, period).unwrap();
    let d = floquet_decompose(&DriveSpec::constant(1.0, period), 1024).unwrap();
    for r in Branch::ALL {
        assert!((p.decomposition.quasi_energy(r) - d.quasi_energy(r)).abs() < 1e-10);
    }
    let half = 0.5 * 0.8;
    assert!(p
        .decomposition
        .quasi_energies()
        .iter()
        .all(|e| *e > -half && *e <= half));
}

#[test]
fn weak_drive_splitting_approaches_the_bare_qubit() {
    let model = RateModel::Phenomenological { gamma0: 0.1, beta: 1.0 };
    let lambdas = [0.0, 0.004, 0.008, 0.016, 0.032];
    let report = weak_drive_limit_check(1.0, 2.0 * PI / 0.7, &lambdas, &model).unwrap();
    assert_eq!(report.points[0].photon_weight, 0.0);
    assert!(report.points[0].splitting_deviation < 1e-12);
    for w in report.points[1..].windows(2) {
        let ratio = w[1].splitting_deviation / w[0].splitting_deviation;
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }
    assert!((report.exponent.unwrap() - 2.0).abs() < 0.05);
}

proptest! {
    #[test]
    fn phenomenological_rates_are_balanced(beta in 0.01f64..20.0, omega in -3.0f64..3.0, gamma0 in 0.01f64..5.0) {
        let model = RateModel::Phenomenological { gamma0, beta };
        let (f, b) = (model.rate(omega).unwrap(), model.rate(-omega).unwrap());
        prop_assert!(f >= 0.0 && b >= 0.0);
        prop_assert!(balance_residual(beta, omega, f, b) < 1e-12);
    }
}
