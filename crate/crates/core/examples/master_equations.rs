//! Ensemble average of trajectories against the Lindblad equation, and
//! the Pauli equation on the photon ladder.

use dressed_qubit::bath::{fill_rates, RateModel};
use dressed_qubit::dynamics::master::{
    lindblad_qubit, pauli_ladder, stationary_populations, LadderPopulations, PauliRates,
};
use dressed_qubit::dynamics::{drift_spectrum, evolve_qubit_trajectory, run_ensemble, QubitState, TrajectoryConfig};
use dressed_qubit::presets::monochromatic_preset;
use dressed_qubit::thermo::MeanSe;
use dressed_qubit::Branch;

fn main() -> dressed_qubit::Result<()> {
    let p = monochromatic_preset(1.0, 0.8, 0.1)?;
    let reg = fill_rates(&p.registry, &RateModel::Phenomenological { gamma0: 0.2, beta: 1.0 })?;
    let drift = drift_spectrum(&reg);
    let times = vec![2.0, 5.0, 10.0, 20.0];
    let cfg = TrajectoryConfig {
        t_final: 20.0,
        checkpoints: times.clone(),
    };
    let psi = QubitState::floquet(Branch::Plus);
    let records = run_ensemble(4000, 4, |i| evolve_qubit_trajectory(&reg, &drift, &psi, &cfg, 1, i))?;
    let rhos = lindblad_qubit(&reg, &psi.density(), &times, 0.005)?;
    for (k, rho) in rhos.iter().enumerate() {
        let xs: Vec<f64> = records
            .iter()
            .map(|r| r.checkpoints[k].state.population(Branch::Plus))
            .collect();
        let m = MeanSe::from_samples(&xs);
        println!(
            "t = {:4.1}  P(+) trajectories {:.4} +- {:.4}  Lindblad {:.4}",
            times[k],
            m.mean,
            m.stderr,
            rho[(0, 0)].re
        );
    }
    println!("stationary P(+), P(-) = {:?}", stationary_populations(&reg)?);

    let rates = PauliRates::from_registry(&reg);
    let mut init = LadderPopulations::zeros(24);
    init.set(Branch::Plus, 0, 1.0);
    let ladder = pauli_ladder(&rates, &init, &[20.0], 0.005)?;
    let end = &ladder[0];
    for zone in -4..=4 {
        println!(
            "zone {zone:+}: P(+) {:.4}  P(-) {:.4}",
            end.get(Branch::Plus, zone),
            end.get(Branch::Minus, zone)
        );
    }
    Ok(())
}
