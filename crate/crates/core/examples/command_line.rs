//! Drive the command-line front end from a configuration written on the fly.

use dressed_qubit::cli::{self, Command, RunConfig};

const CONFIG: &str = r#"{
  "seed": 11,
  "drive": {"preset": "monochromatic", "omega_q": 1.0, "omega_l": 0.8, "lambda": 0.1},
  "bath": {"model": "phenomenological", "gamma0": 0.1},
  "beta": 1.0,
  "t_final": 20.0,
  "checkpoints": 5,
  "n_trajectories": 200,
  "initial": "stationary",
  "workers": 4
}"#;

fn main() -> dressed_qubit::Result<()> {
    let out = std::env::temp_dir().join("dressed-qubit-example");
    std::fs::create_dir_all(&out)?;
    let cfg = RunConfig::from_json(CONFIG, &out, None)?;
    println!("{}", cli::validate(&cfg).to_json());
    for command in [
        Command::Channels,
        Command::Simulate,
        Command::ThermoReport,
        Command::FluctuationTest,
    ] {
        for f in cli::run(command, &cfg, &out)? {
            println!("{command:?}: {}", f.display());
        }
    }
    Ok(())
}
