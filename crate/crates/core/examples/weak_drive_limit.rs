//! Approach of a weakly driven qubit to the undriven one.

use std::f64::consts::PI;

use dressed_qubit::bath::RateModel;
use dressed_qubit::presets::weak_drive_limit_check;

fn main() -> dressed_qubit::Result<()> {
    let model = RateModel::Phenomenological { gamma0: 0.1, beta: 1.0 };
    let lambdas = [0.0, 0.001, 0.002, 0.005, 0.01, 0.02, 0.05];
    let report = weak_drive_limit_check(1.0, 2.0 * PI / 0.7, &lambdas, &model)?;
    println!(
        "{:>8} {:>14} {:>14} {:>14}",
        "lambda", "photon weight", "splitting dev", "heat current"
    );
    for pt in &report.points {
        println!(
            "{:>8} {:>14.4e} {:>14.4e} {:>14.4e}",
            pt.lambda, pt.photon_weight, pt.splitting_deviation, pt.heat_current
        );
    }
    println!("photon weight ~ lambda^{:.4}", report.exponent.unwrap_or(f64::NAN));
    println!(
        "undriven: emission {:.6}, absorption {:.6}",
        report.reference_emission_rate, report.reference_absorption_rate
    );
    Ok(())
}
