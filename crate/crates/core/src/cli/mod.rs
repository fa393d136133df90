//! Command-line front end: configuration, orchestration and file output.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::channels::ChannelRegistry;
use crate::dynamics::master::{lindblad_qubit, pauli_ladder, LadderPopulations, PauliRates};
use crate::dynamics::state::MAX_HALF_WIDTH;
use crate::dynamics::{
    drift_spectrum, evolve_dressed_trajectory, evolve_qubit_trajectory, run_ensemble, DressedState, JumpEvent,
    JumpState, QubitState, TrajectoryConfig, TrajectoryRecord,
};
use crate::error::{Error, Result};
use crate::linalg::{Mat2, C64};
use crate::thermo::entropy::{entropy_production_collapsed, entropy_production_ladder};
use crate::thermo::{
    first_law_residual, fluctuation_residual, ledger_from_trajectory, pathwise_entropy, EnergyTables, LedgerState,
    MeanSe, PathRecord, ThermoLedger,
};
use crate::Branch;

pub use config::{Pipeline, Representation, RunConfig};
use output::{num, write_json, write_jsonl, CsvTable, FORMAT_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "dressed-qubit", version, about = "Driven-qubit quantum-jump thermodynamics")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; overrides the config.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Quasi-energies and sampled Floquet states.
    Decompose,
    /// Jump-channel registry.
    Channels,
    /// Rate table and detailed-balance report.
    Rates,
    /// Quantum-jump ensemble: trajectories and checkpoints.
    Simulate,
    /// Lindblad density-matrix time series.
    Lindblad,
    /// Energy ledger, per-window first-law statistics and entropy production.
    ThermoReport,
    /// Per-path fluctuation-relation residuals.
    FluctuationTest,
    /// Check a configuration without running it.
    Validate,
}

fn exit_code(e: &Error) -> i32 {
    if e.is_config_error() {
        EXIT_CONFIG
    } else {
        EXIT_NUMERICAL
    }
}

fn report_error(e: &Error) {
    eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
}

/// Parse arguments, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            report_error(&e);
            exit_code(&e)
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let path = cli.config.as_deref().ok_or_else(|| Error::Config {
        field: "--config".into(),
        message: "a configuration file is required".into(),
    })?;
    let mut cfg = RunConfig::load(path, cli.seed)?;
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(Error::Config {
                field: "--workers".into(),
                message: "must be >= 1".into(),
            });
        }
        cfg.workers = w;
    }
    if cli.command == Command::Validate {
        return Ok(validate_and_print(&cfg));
    }
    let out = match (&cli.out, &cfg.out) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) => cfg.resolve(o),
        (None, None) => PathBuf::from("."),
    };
    std::fs::create_dir_all(&out)?;
    for f in run(cli.command, &cfg, &out)? {
        println!("{}", f.display());
    }
    Ok(EXIT_OK)
}

/// Run one subcommand, writing into `out`; returns the files written.
pub fn run(command: Command, cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    if command == Command::Validate {
        let report = validate(cfg);
        return Ok(vec![write_json(&out.join("validate.json"), &report.to_json())?]);
    }
    let pipe = Pipeline::build(cfg)?;
    match command {
        Command::Decompose => decompose(&pipe, out),
        Command::Channels => Ok(vec![write_json(&out.join("channels.json"), &pipe.registry.to_json())?]),
        Command::Rates => rates(&pipe, out),
        Command::Simulate => simulate(cfg, &pipe, out),
        Command::Lindblad => lindblad(cfg, &pipe, out),
        Command::ThermoReport => thermo_report(cfg, &pipe, out),
        Command::FluctuationTest => fluctuation_test(cfg, &pipe, out),
        Command::Validate => unreachable!(),
    }
}

fn decompose(pipe: &Pipeline, out: &Path) -> Result<Vec<PathBuf>> {
    let d = &pipe.decomposition;
    let mut q = CsvTable::new(&["branch", "epsilon", "omega_l"]);
    for r in Branch::ALL {
        q.row(&[r.to_string(), num(d.quasi_energy(r)), num(d.omega_l())]);
    }
    let mut s = CsvTable::new(&["k", "tau", "branch", "phi_e_re", "phi_e_im", "phi_g_re", "phi_g_im"]);
    for r in Branch::ALL {
        for (k, v) in d.state(r).iter().enumerate() {
            s.row(&[
                k.to_string(),
                num(d.tau(k)),
                r.to_string(),
                num(v[0].re),
                num(v[0].im),
                num(v[1].re),
                num(v[1].im),
            ]);
        }
    }
    Ok(vec![
        q.write(&out.join("quasi_energies.csv"))?,
        s.write(&out.join("floquet_states.csv"))?,
    ])
}

fn rates(pipe: &Pipeline, out: &Path) -> Result<Vec<PathBuf>> {
    let mut t = CsvTable::new(&["id", "omega", "n_omega", "gamma"]);
    for c in pipe.registry.channels() {
        t.row(&[c.id.to_string(), num(c.omega), c.n_omega.to_string(), num(c.gamma)]);
    }
    let report = match pipe.registry.balance_report() {
        Some(r) => serde_json::to_value(r).map_err(|e| Error::Io(e.to_string()))?,
        None => serde_json::Value::Null,
    };
    let doc = json!({ "format_version": FORMAT_VERSION, "detailed_balance": report });
    Ok(vec![
        t.write(&out.join("rates.csv"))?,
        write_json(&out.join("detailed_balance.json"), &doc)?,
    ])
}

fn event_json(e: &JumpEvent) -> serde_json::Value {
    json!({
        "t": e.t,
        "channel": e.channel,
        "omega": e.omega,
        "n_omega": e.n_omega,
        "weight_before": e.weight_before,
        "mu_after": e.mu_after,
    })
}

fn complex_json(z: C64) -> serde_json::Value {
    json!([z.re, z.im])
}

/// Results of an ensemble in either representation.
pub enum Ensemble {
    Qubit(Vec<TrajectoryRecord<QubitState>>),
    Dressed(Vec<TrajectoryRecord<DressedState>>),
}

pub fn simulate_ensemble(cfg: &RunConfig, pipe: &Pipeline) -> Result<Ensemble> {
    let stationary = pipe.stationary().unwrap_or([0.5, 0.5]);
    let drift = drift_spectrum(&pipe.registry);
    let tc = TrajectoryConfig {
        t_final: cfg.t_final,
        checkpoints: cfg.checkpoint_times(),
    };
    let reg = &pipe.registry;
    Ok(match cfg.representation {
        Representation::Qubit => Ensemble::Qubit(run_ensemble(cfg.n_trajectories, cfg.workers, |i| {
            evolve_qubit_trajectory(reg, &drift, &cfg.initial_state(i, stationary), &tc, cfg.seed, i)
        })?),
        Representation::Dressed => Ensemble::Dressed(run_ensemble(cfg.n_trajectories, cfg.workers, |i| {
            let mut d = DressedState::single_zone(cfg.initial_state(i, stationary).c, 0)?;
            d.ensure_contains(-cfg.zone_half_width, cfg.zone_half_width)?;
            evolve_dressed_trajectory(reg, &drift, &d, &tc, cfg.seed, i)
        })?),
    })
}

trait Reduced {
    fn reduced(&self) -> Mat2;
    fn final_json(&self) -> serde_json::Value;
}

impl Reduced for QubitState {
    fn reduced(&self) -> Mat2 {
        self.density() / C64::from(self.norm_sqr())
    }
    fn final_json(&self) -> serde_json::Value {
        json!([complex_json(self.c[0]), complex_json(self.c[1])])
    }
}

impl Reduced for DressedState {
    fn reduced(&self) -> Mat2 {
        self.reduced_density() / C64::from(self.norm_sqr())
    }
    fn final_json(&self) -> serde_json::Value {
        let zones: Vec<_> = self
            .occupied_zones()
            .into_iter()
            .map(|z| {
                let b = self.block(z);
                json!([z, complex_json(b[0]), complex_json(b[1])])
            })
            .collect();
        json!({ "zones": zones })
    }
}

fn density_cells(rho: &Mat2) -> [String; 4] {
    [
        num(rho[(0, 0)].re),
        num(rho[(1, 1)].re),
        num(rho[(0, 1)].re),
        num(rho[(0, 1)].im),
    ]
}

fn write_records<S: Reduced>(
    records: &[TrajectoryRecord<S>],
    header: serde_json::Value,
    out: &Path,
) -> Result<Vec<PathBuf>> {
    let lines: Vec<_> = records
        .iter()
        .map(|r| {
            json!({
                "index": r.index,
                "events": r.events.iter().map(event_json).collect::<Vec<_>>(),
                "final_mu": r.final_mu(),
                "final_state": r.final_state.final_json(),
            })
        })
        .collect();
    let mut cp = CsvTable::new(&["index", "t", "mu", "norm", "rho_pp", "rho_mm", "rho_pm_re", "rho_pm_im"]);
    for r in records {
        for c in &r.checkpoints {
            let [a, b, x, y] = density_cells(&c.state.reduced());
            cp.row(&[r.index.to_string(), num(c.t), c.mu.to_string(), num(c.norm), a, b, x, y]);
        }
    }
    Ok(vec![
        write_jsonl(&out.join("trajectories.jsonl"), &header, &lines)?,
        cp.write(&out.join("checkpoints.csv"))?,
    ])
}

fn simulate(cfg: &RunConfig, pipe: &Pipeline, out: &Path) -> Result<Vec<PathBuf>> {
    let header = |repr: &str| {
        json!({
            "format_version": FORMAT_VERSION,
            "kind": "trajectories",
            "representation": repr,
            "seed": cfg.seed,
            "n_trajectories": cfg.n_trajectories,
            "t_final": cfg.t_final,
        })
    };
    match simulate_ensemble(cfg, pipe)? {
        Ensemble::Qubit(r) => write_records(&r, header("qubit"), out),
        Ensemble::Dressed(r) => write_records(&r, header("dressed"), out),
    }
}

fn lindblad(cfg: &RunConfig, pipe: &Pipeline, out: &Path) -> Result<Vec<PathBuf>> {
    let rho0 = cfg.initial_density(pipe.stationary().unwrap_or([0.5, 0.5]));
    let times = cfg.checkpoint_times();
    let rhos = lindblad_qubit(&pipe.registry, &rho0, &times, cfg.dt)?;
    let mut t = CsvTable::new(&["t", "rho_pp", "rho_mm", "rho_pm_re", "rho_pm_im"]);
    for (time, rho) in times.iter().zip(&rhos) {
        let [a, b, x, y] = density_cells(rho);
        t.row(&[num(*time), a, b, x, y]);
    }
    Ok(vec![t.write(&out.join("lindblad.csv"))?])
}

fn initial_ladder(cfg: &RunConfig, stationary: [f64; 2], half: i64) -> LadderPopulations {
    let mut l = LadderPopulations::zeros(half);
    let p = match cfg.initial {
        config::InitialState::Floquet(r) => {
            let mut p = [0.0; 2];
            p[r.index()] = 1.0;
            p
        }
        config::InitialState::Stationary => stationary,
        config::InitialState::Amplitudes(psi) => {
            let n = psi.norm_sqr();
            [psi.population(Branch::Plus) / n, psi.population(Branch::Minus) / n]
        }
    };
    for r in Branch::ALL {
        l.set(r, 0, p[r.index()]);
    }
    l
}

/// Pauli ladder at `times`, doubling the zone window until nothing leaks.
pub fn ladder_evolution(
    cfg: &RunConfig,
    registry: &ChannelRegistry,
    min_half: i64,
    times: &[f64],
) -> Result<Vec<LadderPopulations>> {
    let rates = PauliRates::from_registry(registry);
    let stationary = crate::dynamics::master::stationary_populations(registry).unwrap_or([0.5, 0.5]);
    let mut half = cfg.zone_half_width.max(min_half);
    loop {
        match pauli_ladder(&rates, &initial_ladder(cfg, stationary, half), times, cfg.dt) {
            Err(Error::WindowOverflow { .. }) if half * 2 <= MAX_HALF_WIDTH => half *= 2,
            other => return other,
        }
    }
}

fn ledgers_of<S: LedgerState>(records: &[TrajectoryRecord<S>], tables: &EnergyTables) -> Vec<ThermoLedger> {
    records.iter().map(|r| ledger_from_trajectory(r, tables)).collect()
}

fn thermo_report(cfg: &RunConfig, pipe: &Pipeline, out: &Path) -> Result<Vec<PathBuf>> {
    let tables = EnergyTables::new(&pipe.decomposition, cfg.n_max)?;
    let ledgers = match simulate_ensemble(cfg, pipe)? {
        Ensemble::Qubit(r) => ledgers_of(&r, &tables),
        Ensemble::Dressed(r) => ledgers_of(&r, &tables),
    };
    let mut t = CsvTable::new(&[
        "index",
        "t",
        "mu",
        "e_qubit",
        "e_drive_number",
        "e_total",
        "q_cum",
        "w_cum",
    ]);
    for l in &ledgers {
        for r in &l.rows {
            t.row(&[
                l.index.to_string(),
                num(r.t),
                r.mu.to_string(),
                num(r.e_qubit),
                num(r.e_drive_number),
                num(r.e_total),
                num(r.q_cum),
                num(r.w_cum),
            ]);
        }
    }
    let rows = ledgers[0].rows.len();
    let times = cfg.checkpoint_times();
    let rates = PauliRates::from_registry(&pipe.registry);
    let ladder = ladder_evolution(cfg, &pipe.registry, 1, &times)?;
    let sigmas: Vec<(f64, f64, usize)> = ladder
        .iter()
        .map(|p| {
            let s = entropy_production_ladder(&rates, p);
            (
                s.sigma,
                entropy_production_collapsed(&rates, p.collapsed()),
                s.one_sided,
            )
        })
        .collect();
    let mut w = CsvTable::new(&[
        "t0",
        "t1",
        "de_qubit_mean",
        "de_qubit_se",
        "dw_mean",
        "dw_se",
        "dq_mean",
        "dq_se",
        "de_total_mean",
        "de_total_se",
        "first_law_qubit_mean",
        "first_law_qubit_se",
        "first_law_dressed_mean",
        "first_law_dressed_se",
        "sigma",
        "sigma_collapsed",
    ]);
    let mut windows = Vec::new();
    for j in 1..rows {
        let delta = |f: fn(&crate::thermo::LedgerRow) -> f64| {
            MeanSe::from_samples(
                &ledgers
                    .iter()
                    .map(|l| f(&l.rows[j]) - f(&l.rows[j - 1]))
                    .collect::<Vec<_>>(),
            )
        };
        let stats = [
            delta(|r| r.e_qubit),
            delta(|r| r.w_cum),
            delta(|r| r.q_cum),
            delta(|r| r.e_total),
        ];
        let f = first_law_residual(&ledgers, j - 1, j);
        let mut cells = vec![num(f.t0), num(f.t1)];
        for m in stats.iter().chain([&f.qubit, &f.dressed]) {
            cells.push(num(m.mean));
            cells.push(num(m.stderr));
        }
        cells.push(num(sigmas[j].0));
        cells.push(num(sigmas[j].1));
        w.row(&cells);
        windows.push(json!({
            "t0": f.t0,
            "t1": f.t1,
            "qubit_mean": f.qubit.mean,
            "qubit_stderr": f.qubit.stderr,
            "dressed_mean": f.dressed.mean,
            "dressed_stderr": f.dressed.stderr,
        }));
    }
    let entropy: Vec<_> = sigmas
        .iter()
        .zip(&times)
        .map(|((s, sb, one_sided), t)| json!({ "t": t, "sigma": s, "sigma_collapsed": sb, "one_sided": one_sided }))
        .collect();
    let summary = json!({
        "format_version": FORMAT_VERSION,
        "kind": "thermo_summary",
        "n_trajectories": ledgers.len(),
        "first_law": windows,
        "floquet_identity_defect": tables.floquet_identity_defect(),
        "entropy_production": entropy,
    });
    Ok(vec![
        t.write(&out.join("ledger.csv"))?,
        w.write(&out.join("thermo_windows.csv"))?,
        write_json(&out.join("thermo_summary.json"), &summary)?,
    ])
}

fn fluctuation_test(cfg: &RunConfig, pipe: &Pipeline, out: &Path) -> Result<Vec<PathBuf>> {
    if let config::InitialState::Amplitudes(_) = cfg.initial {
        return Err(Error::config(
            "initial",
            "fluctuation-test needs trajectories started in Floquet states",
        ));
    }
    let qcfg = RunConfig {
        representation: Representation::Qubit,
        ..cfg.clone()
    };
    let Ensemble::Qubit(records) = simulate_ensemble(&qcfg, pipe)? else {
        unreachable!()
    };
    let reg = &pipe.registry;
    let paths = records
        .iter()
        .map(PathRecord::from_trajectory)
        .collect::<Result<Vec<_>>>()?;
    let mut reach = 1;
    for p in &paths {
        for (_, z) in p.labels(reg)? {
            reach = reach.max(z.abs() + 1);
        }
    }
    let ends = ladder_evolution(cfg, reg, reach, &[0.0, cfg.t_final])?;
    let mut t = CsvTable::new(&[
        "index",
        "jumps",
        "heat",
        "log_forward",
        "log_reverse",
        "entropy_flow",
        "residual",
        "pathwise_entropy",
    ]);
    for (r, p) in records.iter().zip(paths) {
        let p = p.with_populations(reg, &ends[0], &ends[1])?;
        let f = fluctuation_residual(&p, reg, cfg.beta)?;
        let s = pathwise_entropy(&p, reg, cfg.beta).map_or(String::new(), num);
        t.row(&[
            r.index.to_string(),
            p.jumps.len().to_string(),
            num(p.heat(reg)),
            num(f.log_forward),
            num(f.log_reverse),
            num(f.entropy_flow),
            num(f.residual),
            s,
        ]);
    }
    Ok(vec![t.write(&out.join("fluctuation.csv"))?])
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub warnings: Vec<(String, String)>,
    pub errors: Vec<Error>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let item = |k: &str, m: &str| json!({ "kind": k, "message": m });
        json!({
            "format_version": FORMAT_VERSION,
            "ok": self.ok(),
            "warnings": self.warnings.iter().map(|(k, m)| item(k, m)).collect::<Vec<_>>(),
            "errors": self.errors.iter().map(|e| item(e.kind(), &e.to_string())).collect::<Vec<_>>(),
        })
    }
}

/// Pre-run checks; warnings do not block a run, errors do.
pub fn validate(cfg: &RunConfig) -> ValidationReport {
    let mut report = ValidationReport::default();
    let required = 8 * cfg.n_max as usize;
    let coarse = cfg.grid < required;
    if coarse {
        let e = Error::GridTooCoarse {
            grid: cfg.grid,
            n_max: cfg.n_max,
            required,
        };
        report.warnings.push((e.kind().to_string(), e.to_string()));
    }
    match Pipeline::build(cfg) {
        Ok(pipe) => {
            let photon_rate: f64 = pipe
                .registry
                .channels()
                .iter()
                .filter(|c| c.is_photon_exchanging())
                .map(|c| {
                    c.gamma * c.entries.iter().map(|e| e.alpha.norm_sqr()).fold(0.0, f64::max) * c.n_omega.abs() as f64
                })
                .sum();
            let reach = photon_rate * cfg.t_final;
            if reach > cfg.zone_half_width as f64 {
                report.warnings.push((
                    "ZoneWindow".into(),
                    format!(
                        "expected photon excursion ~{reach:.3e} exceeds zone_half_width {}; the window will grow",
                        cfg.zone_half_width
                    ),
                ));
            }
        }
        Err(Error::GridTooCoarse { .. }) if coarse => {}
        Err(e) => report.errors.push(e),
    }
    report
}

fn validate_and_print(cfg: &RunConfig) -> i32 {
    let report = validate(cfg);
    println!(
        "{}",
        serde_json::to_string_pretty(&report.to_json()).unwrap_or_default()
    );
    match report.errors.first() {
        None => EXIT_OK,
        Some(e) => exit_code(e),
    }
}
