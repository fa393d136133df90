//! Forward and reversed path probabilities of sampled jump paths, and the
//! entropy production of the Pauli equations.

use dressed_qubit::bath::{fill_rates, RateModel};
use dressed_qubit::dynamics::master::{stationary_populations, PauliRates};
use dressed_qubit::dynamics::{drift_spectrum, evolve_qubit_trajectory, run_ensemble, QubitState, TrajectoryConfig};
use dressed_qubit::presets::monochromatic_preset;
use dressed_qubit::thermo::{
    entropy_production_collapsed, entropy_production_per_zone, fluctuation_residual, PathRecord,
};
use dressed_qubit::Branch;

fn main() -> dressed_qubit::Result<()> {
    let beta = 1.0;
    let p = monochromatic_preset(1.0, 0.8, 0.1)?;
    let reg = fill_rates(&p.registry, &RateModel::Phenomenological { gamma0: 0.3, beta })?;
    let drift = drift_spectrum(&reg);
    let cfg = TrajectoryConfig::uniform(10.0, 2);
    let records = run_ensemble(200, 4, |i| {
        evolve_qubit_trajectory(&reg, &drift, &QubitState::floquet(Branch::Plus), &cfg, 5, i)
    })?;
    let mut worst: f64 = 0.0;
    for rec in &records {
        let path = PathRecord::from_trajectory(rec)?;
        worst = worst.max(fluctuation_residual(&path, &reg, beta)?.residual);
    }
    let path = PathRecord::from_trajectory(&records[0])?;
    let check = fluctuation_residual(&path, &reg, beta)?;
    println!(
        "path 0: {} jumps, ln P_F {:.6}, ln P_R {:.6}, beta Q {:.6}",
        path.jumps.len(),
        check.log_forward,
        check.log_reverse,
        check.entropy_flow
    );
    println!("largest residual over {} paths: {worst:.2e}", records.len());

    let rates = PauliRates::from_registry(&reg);
    let ps = stationary_populations(&reg)?;
    println!(
        "stationary entropy production, collapsed: {:.3e}",
        entropy_production_collapsed(&rates, ps)
    );
    println!(
        "stationary entropy production per zone:   {:.6}",
        entropy_production_per_zone(&rates, ps)
    );
    Ok(())
}
