//! Jump channels of the monochromatic drive and their matrix elements.

use dressed_qubit::presets::monochromatic_preset;

fn main() -> dressed_qubit::Result<()> {
    let p = monochromatic_preset(1.0, 0.8, 0.1)?;
    println!("completeness defect {:.2e}", p.alpha.completeness_defect());
    println!("{:>4} {:>12} {:>4}  entries", "id", "omega", "n");
    for c in p.registry.channels() {
        let entries: Vec<String> = c
            .entries
            .iter()
            .map(|e| format!("{}<-{} |alpha|^2={:.4}", e.to, e.from, e.alpha.norm_sqr()))
            .collect();
        println!("{:>4} {:>12.6} {:>4}  {}", c.id, c.omega, c.n_omega, entries.join(", "));
    }
    Ok(())
}
