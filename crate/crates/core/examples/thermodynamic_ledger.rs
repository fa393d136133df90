//! Energy bookkeeping along trajectories and the averaged first law.

use dressed_qubit::bath::{fill_rates, RateModel};
use dressed_qubit::dynamics::{drift_spectrum, evolve_qubit_trajectory, run_ensemble, QubitState, TrajectoryConfig};
use dressed_qubit::linalg::C64;
use dressed_qubit::presets::monochromatic_preset;
use dressed_qubit::thermo::{first_law_residual, ledger_from_trajectory, EnergyTables};

fn main() -> dressed_qubit::Result<()> {
    let p = monochromatic_preset(1.0, 0.8, 0.1)?;
    let reg = fill_rates(&p.registry, &RateModel::Phenomenological { gamma0: 0.2, beta: 1.0 })?;
    let drift = drift_spectrum(&reg);
    let tables = EnergyTables::new(&p.decomposition, 8)?;
    let cfg = TrajectoryConfig::uniform(20.0, 5);
    let psi = QubitState::new(C64::new(0.6, 0.0), C64::new(0.0, 0.8));
    let records = run_ensemble(2000, 4, |i| evolve_qubit_trajectory(&reg, &drift, &psi, &cfg, 3, i))?;
    let ledgers: Vec<_> = records.iter().map(|r| ledger_from_trajectory(r, &tables)).collect();

    println!("first trajectory:");
    for row in &ledgers[0].rows {
        println!(
            "  t = {:5.1}  mu {:+}  E_q {:+.4}  E_N {:+.4}  E_tot {:+.4}  Q {:+.4}  W {:+.4}",
            row.t, row.mu, row.e_qubit, row.e_drive_number, row.e_total, row.q_cum, row.w_cum
        );
    }
    for j in 1..cfg.checkpoints.len() {
        let r = first_law_residual(&ledgers, j - 1, j);
        println!(
            "[{:4.1}, {:4.1}]  qubit residual {:+.2e} +- {:.1e}  dressed residual {:+.2e} +- {:.1e}",
            r.t0, r.t1, r.qubit.mean, r.qubit.stderr, r.dressed.mean, r.dressed.stderr
        );
    }
    Ok(())
}
