//! Electron-bath transition rates and their detailed-balance residuals.

use dressed_qubit::bath::{electron_rate, fill_rates, ElectronBath, RateModel};
use dressed_qubit::presets::monochromatic_preset;

fn main() -> dressed_qubit::Result<()> {
    let bath = ElectronBath::new(2.0, 10.0, 10.0, 1.0, 1.0);
    println!("{:>8} {:>14} {:>14}", "omega", "gamma(omega)", "gamma(-omega)");
    for w in [0.1, 0.5, 1.0, 2.0] {
        println!(
            "{w:>8} {:>14.6e} {:>14.6e}",
            electron_rate(&bath, w)?,
            electron_rate(&bath, -w)?
        );
    }

    let p = monochromatic_preset(1.0, 0.8, 0.1)?;
    let reg = fill_rates(&p.registry, &RateModel::ElectronBath(bath))?;
    if let Some(report) = reg.balance_report() {
        for pair in &report.pairs {
            println!("omega {:+.6}: residual {:.2e}", pair.omega, pair.residual);
        }
        println!("max residual {:.2e}", report.max_residual);
    }
    Ok(())
}
