//! A handful of quantum-jump trajectories with their jump records.

use dressed_qubit::bath::{fill_rates, RateModel};
use dressed_qubit::dynamics::{drift_spectrum, evolve_qubit_trajectory, QubitState, TrajectoryConfig};
use dressed_qubit::presets::monochromatic_preset;
use dressed_qubit::Branch;

fn main() -> dressed_qubit::Result<()> {
    let p = monochromatic_preset(1.0, 0.8, 0.1)?;
    let reg = fill_rates(&p.registry, &RateModel::Phenomenological { gamma0: 0.2, beta: 1.0 })?;
    let drift = drift_spectrum(&reg);
    let cfg = TrajectoryConfig::uniform(30.0, 4);
    let psi = QubitState::floquet(Branch::Plus);
    for i in 0..3 {
        let rec = evolve_qubit_trajectory(&reg, &drift, &psi, &cfg, 42, i)?;
        println!(
            "trajectory {i}: {} jumps, final mu {}",
            rec.events.len(),
            rec.final_mu()
        );
        for e in &rec.events {
            println!(
                "  t = {:8.4}  omega = {:+.4}  n = {:+}  mu -> {}",
                e.t, e.omega, e.n_omega, e.mu_after
            );
        }
        for c in &rec.checkpoints {
            println!("  t = {:5.1}  P(+) = {:.4}", c.t, c.state.population(Branch::Plus));
        }
    }
    Ok(())
}
