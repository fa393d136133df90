//! The qubit unravelling and the ladder unravelling driven by the same
//! random numbers land on the same state.

use dressed_qubit::bath::{fill_rates, RateModel};
use dressed_qubit::dynamics::{
    drift_spectrum, embed_state, evolve_dressed_trajectory, evolve_qubit_trajectory, QubitState, TrajectoryConfig,
};
use dressed_qubit::linalg::C64;
use dressed_qubit::presets::monochromatic_preset;

fn main() -> dressed_qubit::Result<()> {
    let p = monochromatic_preset(1.0, 0.8, 0.1)?;
    let reg = fill_rates(&p.registry, &RateModel::Phenomenological { gamma0: 0.3, beta: 1.0 })?;
    let drift = drift_spectrum(&reg);
    let cfg = TrajectoryConfig::uniform(20.0, 5);
    let psi = QubitState::new(C64::new(0.6, 0.0), C64::new(0.0, 0.8));
    let q = evolve_qubit_trajectory(&reg, &drift, &psi, &cfg, 7, 0)?;
    let d = evolve_dressed_trajectory(&reg, &drift, &embed_state(&psi, 0)?, &cfg, 7, 0)?;
    println!("events identical: {}", q.events == d.events);
    for (a, b) in q.checkpoints.iter().zip(&d.checkpoints) {
        let dist = embed_state(&a.state, a.mu)?.distance(&b.state);
        println!(
            "t = {:5.1}  mu = {:+}  zones {:?}  distance {dist:.2e}",
            a.t,
            a.mu,
            b.state.occupied_zones()
        );
    }
    Ok(())
}
