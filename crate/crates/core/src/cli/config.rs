//! Run configuration: one JSON document, paths relative to its directory.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::bath::{fill_rates, ElectronBath, RateModel, TabulatedRates};
use crate::channels::{compute_alpha, enumerate_channels, ChannelRegistry, DEFAULT_N_MAX, DEFAULT_PRUNE_TOL};
use crate::dynamics::master::stationary_populations;
use crate::dynamics::state::MAX_HALF_WIDTH;
use crate::dynamics::QubitState;
use crate::error::{Error, Result};
use crate::floquet::{
    floquet_decompose_with, DecomposeOptions, DriveSpec, FloquetDecomposition, DEFAULT_GRID, MIN_GRID,
};
use crate::linalg::{Mat2, C64};
use crate::presets::{constant_drive_preset_with, monochromatic_preset_with};
use crate::Branch;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "preset", rename_all = "lowercase", deny_unknown_fields)]
pub enum DriveConfig {
    Constant {
        omega_q: f64,
        period: f64,
    },
    Monochromatic {
        omega_q: f64,
        omega_l: f64,
        lambda: f64,
    },
    /// CSV of drive samples `H_d(k T / M)`, one row per sample with columns
    /// `h11_re,h11_im,h12_re,h12_im,h21_re,h21_im,h22_re,h22_im`.
    Sampled {
        omega_q: f64,
        period: f64,
        file: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase", deny_unknown_fields)]
pub enum BathConfig {
    Phenomenological {
        gamma0: f64,
    },
    Electron {
        mu_chem: f64,
        e_fermi: f64,
        n_electrons: f64,
        coupling: f64,
        #[serde(default)]
        e_max: Option<f64>,
    },
    /// Two-column CSV `omega,gamma`.
    Tabulated {
        file: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum InitialConfig {
    /// `"+"`, `"-"` or `"stationary"`.
    Label(String),
    Amplitudes {
        plus: [f64; 2],
        minus: [f64; 2],
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Qubit,
    Dressed,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    drive: DriveConfig,
    bath: BathConfig,
    beta: f64,
    #[serde(default = "default_n_max")]
    n_max: i64,
    #[serde(default = "default_grid")]
    grid: usize,
    #[serde(default = "default_half_width")]
    zone_half_width: i64,
    t_final: f64,
    #[serde(default = "default_checkpoints")]
    checkpoints: usize,
    #[serde(default = "default_trajectories")]
    n_trajectories: u64,
    #[serde(default = "default_initial")]
    initial: InitialConfig,
    #[serde(default = "default_representation")]
    representation: Representation,
    #[serde(default = "default_dt")]
    dt: f64,
    #[serde(default = "default_workers")]
    workers: usize,
    #[serde(default)]
    out: Option<PathBuf>,
}

fn default_n_max() -> i64 {
    DEFAULT_N_MAX
}
fn default_grid() -> usize {
    DEFAULT_GRID
}
fn default_half_width() -> i64 {
    8
}
fn default_checkpoints() -> usize {
    11
}
fn default_trajectories() -> u64 {
    100
}
fn default_initial() -> InitialConfig {
    InitialConfig::Label("stationary".into())
}
fn default_representation() -> Representation {
    Representation::Qubit
}
fn default_dt() -> f64 {
    0.01
}
fn default_workers() -> usize {
    1
}

/// Initial condition of an ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    Floquet(Branch),
    /// Trajectory `i` of `N` starts in `+` when `(i + 1/2) / N < P_+`.
    Stationary,
    Amplitudes(QubitState),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub drive: DriveConfig,
    pub bath: BathConfig,
    pub beta: f64,
    pub n_max: i64,
    pub grid: usize,
    pub zone_half_width: i64,
    pub t_final: f64,
    pub checkpoints: usize,
    pub n_trajectories: u64,
    pub initial: InitialState,
    pub representation: Representation,
    pub dt: f64,
    pub workers: usize,
    pub out: Option<PathBuf>,
    /// Directory relative paths are resolved against.
    pub base_dir: PathBuf,
}

fn require(ok: bool, field: &str, message: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(field, message))
    }
}

fn positive(x: f64, field: &str) -> Result<()> {
    require(
        x > 0.0 && x.is_finite(),
        field,
        format!("must be finite and > 0, got {x}"),
    )
}

fn finite(x: f64, field: &str) -> Result<()> {
    require(x.is_finite(), field, format!("must be finite, got {x}"))
}

impl RunConfig {
    pub fn load(path: &Path, seed_override: Option<u64>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        RunConfig::from_json(&text, &base, seed_override)
    }

    pub fn from_json(text: &str, base_dir: &Path, seed_override: Option<u64>) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))?;
        let seed = seed_override
            .or(raw.seed)
            .ok_or_else(|| Error::config("seed", "a seed is required (config `seed` or --seed)"))?;
        let initial = match &raw.initial {
            InitialConfig::Label(s) => match s.as_str() {
                "+" => InitialState::Floquet(Branch::Plus),
                "-" => InitialState::Floquet(Branch::Minus),
                "stationary" => InitialState::Stationary,
                other => return Err(Error::config("initial", format!("unknown initial state {other:?}"))),
            },
            InitialConfig::Amplitudes { plus, minus } => {
                let psi = QubitState::new(C64::new(plus[0], plus[1]), C64::new(minus[0], minus[1]));
                let n = crate::dynamics::JumpState::norm_sqr(&psi);
                require(
                    n > 0.0 && n.is_finite(),
                    "initial",
                    "amplitudes must be finite and not all zero",
                )?;
                InitialState::Amplitudes(psi)
            }
        };
        let cfg = RunConfig {
            seed,
            drive: raw.drive,
            bath: raw.bath,
            beta: raw.beta,
            n_max: raw.n_max,
            grid: raw.grid,
            zone_half_width: raw.zone_half_width,
            t_final: raw.t_final,
            checkpoints: raw.checkpoints,
            n_trajectories: raw.n_trajectories,
            initial,
            representation: raw.representation,
            dt: raw.dt,
            workers: raw.workers,
            out: raw.out,
            base_dir: base_dir.to_path_buf(),
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        match &self.drive {
            DriveConfig::Constant { omega_q, period } | DriveConfig::Sampled { omega_q, period, .. } => {
                finite(*omega_q, "drive.omega_q")?;
                positive(*period, "drive.period")?;
            }
            DriveConfig::Monochromatic {
                omega_q,
                omega_l,
                lambda,
            } => {
                finite(*omega_q, "drive.omega_q")?;
                positive(*omega_l, "drive.omega_l")?;
                finite(*lambda, "drive.lambda")?;
            }
        }
        match &self.bath {
            BathConfig::Phenomenological { gamma0 } => positive(*gamma0, "bath.gamma0")?,
            BathConfig::Electron {
                e_fermi,
                n_electrons,
                coupling,
                mu_chem,
                e_max,
            } => {
                positive(*e_fermi, "bath.e_fermi")?;
                positive(*n_electrons, "bath.n_electrons")?;
                finite(*coupling, "bath.coupling")?;
                finite(*mu_chem, "bath.mu_chem")?;
                if let Some(e) = e_max {
                    positive(*e, "bath.e_max")?;
                }
            }
            BathConfig::Tabulated { .. } => {}
        }
        positive(self.beta, "beta")?;
        require(self.n_max >= 1, "n_max", format!("must be >= 1, got {}", self.n_max))?;
        require(
            self.grid >= MIN_GRID,
            "grid",
            format!("must be >= {MIN_GRID}, got {}", self.grid),
        )?;
        require(
            (1..=MAX_HALF_WIDTH).contains(&self.zone_half_width),
            "zone_half_width",
            format!("must lie in 1..={MAX_HALF_WIDTH}, got {}", self.zone_half_width),
        )?;
        positive(self.t_final, "t_final")?;
        require(self.checkpoints >= 1, "checkpoints", "must be >= 1")?;
        require(self.n_trajectories >= 1, "n_trajectories", "must be >= 1")?;
        positive(self.dt, "dt")?;
        require(self.workers >= 1, "workers", "must be >= 1")
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn drive_spec(&self) -> Result<DriveSpec> {
        Ok(match &self.drive {
            DriveConfig::Constant { omega_q, period } => DriveSpec::constant(*omega_q, *period),
            DriveConfig::Monochromatic {
                omega_q,
                omega_l,
                lambda,
            } => DriveSpec::monochromatic(*omega_q, *omega_l, *lambda),
            DriveConfig::Sampled { omega_q, period, file } => {
                DriveSpec::sampled(*omega_q, *period, read_samples(&self.resolve(file))?)?
            }
        })
    }

    pub fn rate_model(&self) -> Result<RateModel> {
        Ok(match &self.bath {
            BathConfig::Phenomenological { gamma0 } => RateModel::Phenomenological {
                gamma0: *gamma0,
                beta: self.beta,
            },
            BathConfig::Electron {
                mu_chem,
                e_fermi,
                n_electrons,
                coupling,
                e_max,
            } => {
                let mut b = ElectronBath::new(self.beta, *mu_chem, *e_fermi, *n_electrons, *coupling);
                if let Some(e) = e_max {
                    b.e_max = *e;
                }
                b.validate()?;
                RateModel::ElectronBath(b)
            }
            BathConfig::Tabulated { file } => {
                RateModel::Tabulated(TabulatedRates::from_csv(&self.resolve(file), self.beta)?)
            }
        })
    }

    pub fn checkpoint_times(&self) -> Vec<f64> {
        crate::dynamics::TrajectoryConfig::uniform(self.t_final, self.checkpoints).checkpoints
    }

    /// Initial state of trajectory `index`.
    pub fn initial_state(&self, index: u64, stationary: [f64; 2]) -> QubitState {
        match self.initial {
            InitialState::Floquet(r) => QubitState::floquet(r),
            InitialState::Amplitudes(psi) => psi,
            InitialState::Stationary => {
                let x = (index as f64 + 0.5) / self.n_trajectories as f64;
                QubitState::floquet(if x < stationary[0] { Branch::Plus } else { Branch::Minus })
            }
        }
    }

    /// Initial density matrix in the Floquet basis.
    pub fn initial_density(&self, stationary: [f64; 2]) -> Mat2 {
        match self.initial {
            InitialState::Floquet(r) => QubitState::floquet(r).density(),
            InitialState::Amplitudes(mut psi) => {
                crate::dynamics::JumpState::normalize(&mut psi);
                psi.density()
            }
            InitialState::Stationary => Mat2::new(
                C64::from(stationary[0]),
                C64::from(0.0),
                C64::from(0.0),
                C64::from(stationary[1]),
            ),
        }
    }
}

fn read_samples(path: &Path) -> Result<Vec<Mat2>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        if record.len() != 8 {
            return Err(Error::config(
                "drive.file",
                format!("row {}: expected 8 columns, got {}", line + 1, record.len()),
            ));
        }
        match record
            .iter()
            .map(str::parse)
            .collect::<std::result::Result<Vec<f64>, _>>()
        {
            Ok(v) => out.push(Mat2::new(
                C64::new(v[0], v[1]),
                C64::new(v[2], v[3]),
                C64::new(v[4], v[5]),
                C64::new(v[6], v[7]),
            )),
            Err(_) if line == 0 => continue,
            Err(e) => return Err(Error::config("drive.file", format!("row {}: {e}", line + 1))),
        }
    }
    Ok(out)
}

/// Decomposition, channels and rates for a configuration.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub decomposition: FloquetDecomposition,
    /// Registry with rates filled from the bath model.
    pub registry: ChannelRegistry,
    pub model: RateModel,
}

impl Pipeline {
    pub fn build(cfg: &RunConfig) -> Result<Self> {
        let (decomposition, bare) = match &cfg.drive {
            DriveConfig::Constant { omega_q, period } => {
                let p = constant_drive_preset_with(*omega_q, *period, cfg.grid, cfg.n_max)?;
                (p.decomposition, p.registry)
            }
            DriveConfig::Monochromatic {
                omega_q,
                omega_l,
                lambda,
            } => {
                let p = monochromatic_preset_with(*omega_q, *omega_l, *lambda, cfg.grid, cfg.n_max)?;
                (p.decomposition, p.registry)
            }
            DriveConfig::Sampled { .. } => {
                let spec = cfg.drive_spec()?;
                let decomp = floquet_decompose_with(
                    &spec,
                    &DecomposeOptions {
                        grid: cfg.grid,
                        ..DecomposeOptions::default()
                    },
                )?;
                let alpha = compute_alpha(&decomp, cfg.n_max, DEFAULT_PRUNE_TOL)?;
                let registry = enumerate_channels(&alpha, &decomp)?;
                (decomp, registry)
            }
        };
        let model = cfg.rate_model()?;
        let registry = fill_rates(&bare, &model)?;
        Ok(Pipeline {
            decomposition,
            registry,
            model,
        })
    }

    pub fn stationary(&self) -> Result<[f64; 2]> {
        stationary_populations(&self.registry)
    }
}
