//! Quasi-energies of a resonantly driven qubit, numeric versus closed form.

use dressed_qubit::floquet::{floquet_decompose, DriveSpec};
use dressed_qubit::presets::monochromatic_preset;
use dressed_qubit::Branch;

fn main() -> dressed_qubit::Result<()> {
    let (wq, wl, lambda) = (1.0, 0.8, 0.1);
    let numeric = floquet_decompose(&DriveSpec::monochromatic(wq, wl, lambda), 1024)?;
    let exact = monochromatic_preset(wq, wl, lambda)?.decomposition;
    println!("omega_L = {wl}, period = {:.6}", numeric.period());
    for r in Branch::ALL {
        println!(
            "eps_{r}: numeric {:+.12}  closed form {:+.12}",
            numeric.quasi_energy(r),
            exact.quasi_energy(r)
        );
    }
    println!(
        "unitarity deviation   {:.2e}",
        numeric.propagator().max_unitarity_deviation()
    );
    println!("periodicity residual  {:.2e}", numeric.periodicity_residual());
    println!("orthonormality defect {:.2e}", numeric.orthonormality_defect(3));
    Ok(())
}
