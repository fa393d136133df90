//! Heat, work and energy bookkeeping along trajectories.
//!
//! Energies are evaluated on the dressed state `Psi = sum c_{r,n} phi_{r,n}`
//! in the Schrödinger picture, `a_{r,n}(t) = c_{r,n} e^{-i(eps_r + n w_L) t}`:
//! the qubit energy `<Psi, H_Q Psi>`, the drive-quantum energy
//! `<Psi, -i d_tau Psi>` and their sum `<Psi, H_F Psi>`.

pub mod entropy;
pub mod paths;

use crate::channels::ChannelRegistry;
use crate::dynamics::master::stationary_populations;
use crate::dynamics::{DressedState, JumpEvent, QubitState, TrajectoryRecord};
use crate::error::Result;
use crate::floquet::{number_table, observable_table, FloquetDecomposition, ObservableTable};
use crate::linalg::{cis, Vec2, C64};
use crate::Branch;

pub use entropy::{
    entropy_production_collapsed, entropy_production_ladder, entropy_production_per_zone, LadderEntropy,
};
pub use paths::{
    apply_to_label, fluctuation_residual, path_log_density, pathwise_entropy, reverse_path, second_law_check,
    FluctuationCheck, PathJump, PathRecord,
};

/// Energy released to the bath by a jump.
pub fn heat_of_event(event: &JumpEvent) -> f64 {
    event.omega
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSe {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

impl MeanSe {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return MeanSe {
                mean: f64::NAN,
                stderr: f64::NAN,
                count: 0,
            };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        MeanSe {
            mean,
            stderr: (var / n as f64).sqrt(),
            count: n,
        }
    }

    /// `|mean - target| <= k * stderr`, with `floor` absorbing rounding when
    /// the sample has no spread.
    pub fn within(&self, target: f64, k: f64, floor: f64) -> bool {
        (self.mean - target).abs() <= (k * self.stderr).max(floor)
    }
}

/// States whose energies can be read from zone blocks.
pub trait LedgerState {
    /// Occupied `(zone, amplitudes)` pairs given the photon counter.
    fn zone_blocks(&self, mu: i64) -> Vec<(i64, Vec2)>;
}

impl LedgerState for QubitState {
    fn zone_blocks(&self, mu: i64) -> Vec<(i64, Vec2)> {
        vec![(-mu, self.c)]
    }
}

impl LedgerState for DressedState {
    fn zone_blocks(&self, _mu: i64) -> Vec<(i64, Vec2)> {
        self.occupied_zones().into_iter().map(|z| (z, self.block(z))).collect()
    }
}

/// Tables of `H_Q` and `-i d_tau` in the Floquet zone basis.
#[derive(Debug, Clone)]
pub struct EnergyTables {
    hamiltonian: ObservableTable,
    number: ObservableTable,
    eps: [f64; 2],
    omega_l: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energies {
    pub qubit: f64,
    pub drive_number: f64,
    pub total: f64,
}

impl EnergyTables {
    pub fn new(decomp: &FloquetDecomposition, n_max: i64) -> Result<Self> {
        let hamiltonian = observable_table(decomp, &decomp.hamiltonian_samples(), n_max)?;
        Ok(EnergyTables {
            hamiltonian,
            number: number_table(decomp, n_max),
            eps: decomp.quasi_energies(),
            omega_l: decomp.omega_l(),
        })
    }

    fn level(&self, r: Branch, zone: i64) -> f64 {
        self.eps[r.index()] + zone as f64 * self.omega_l
    }

    /// `<Psi, H_F Psi>` from the spectral form; independent of `t`.
    pub fn total_energy(&self, blocks: &[(i64, Vec2)]) -> f64 {
        blocks
            .iter()
            .map(|(k, c)| {
                Branch::ALL
                    .iter()
                    .map(|&r| c[r.index()].norm_sqr() * self.level(r, *k))
                    .sum::<f64>()
            })
            .sum()
    }

    pub fn energies(&self, blocks: &[(i64, Vec2)], t: f64) -> Energies {
        let phased: Vec<(i64, [C64; 2])> = blocks
            .iter()
            .map(|(k, c)| (*k, Branch::ALL.map(|r| c[r.index()] * cis(-self.level(r, *k) * t))))
            .collect();
        let (mut eq, mut en) = (C64::from(0.0), C64::from(0.0));
        for (k, a) in &phased {
            for (l, b) in &phased {
                for r in Branch::ALL {
                    for s in Branch::ALL {
                        let amp = a[r.index()].conj() * b[s.index()];
                        eq += amp * self.hamiltonian.get(r, *k, s, *l);
                        let mut n = self.number.get(r, *k, s, *l);
                        if r == s && k == l {
                            n += C64::from(*l as f64 * self.omega_l);
                        }
                        en += amp * n;
                    }
                }
            }
        }
        Energies {
            qubit: eq.re,
            drive_number: en.re,
            total: self.total_energy(blocks),
        }
    }

    /// `max |<phi_{r,k}, (H_Q - i d_tau) phi_{s,l}> - (eps_s + l w_L) delta|`,
    /// the accuracy of the identity `E_total = E_qubit + E_drive_number`.
    pub fn floquet_identity_defect(&self) -> f64 {
        let n_max = self.hamiltonian.n_max().min(self.number.n_max());
        let mut worst: f64 = 0.0;
        for r in Branch::ALL {
            for s in Branch::ALL {
                for d in -n_max..=n_max {
                    let v = self.hamiltonian.by_difference(r, s, d) + self.number.by_difference(r, s, d);
                    let target = if r == s && d == 0 { self.eps[r.index()] } else { 0.0 };
                    worst = worst.max((v - C64::from(target)).norm());
                }
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerRow {
    pub t: f64,
    pub mu: i64,
    pub e_qubit: f64,
    pub e_drive_number: f64,
    pub e_total: f64,
    pub q_cum: f64,
    pub w_cum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermoLedger {
    pub index: u64,
    pub rows: Vec<LedgerRow>,
}

impl ThermoLedger {
    /// Per-checkpoint `max |E_total - E_qubit - E_drive_number|`.
    pub fn identity_defect(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.e_total - r.e_qubit - r.e_drive_number).abs())
            .fold(0.0, f64::max)
    }
}

/// Heat released strictly before `t`; a checkpoint coinciding with a jump
/// holds the pre-jump state.
fn heat_before(events: &[JumpEvent], t: f64) -> f64 {
    events
        .iter()
        .take_while(|e| e.t < t)
        .map(heat_of_event)
        .fold(0.0, |a, b| a + b)
}

pub fn ledger_from_trajectory<S: LedgerState>(record: &TrajectoryRecord<S>, tables: &EnergyTables) -> ThermoLedger {
    let mut rows = Vec::with_capacity(record.checkpoints.len());
    let mut e_number_0 = None;
    for cp in &record.checkpoints {
        let e = tables.energies(&cp.state.zone_blocks(cp.mu), cp.t);
        let base = *e_number_0.get_or_insert(e.drive_number);
        rows.push(LedgerRow {
            t: cp.t,
            mu: cp.mu,
            e_qubit: e.qubit,
            e_drive_number: e.drive_number,
            e_total: e.total,
            q_cum: heat_before(&record.events, cp.t),
            w_cum: base - e.drive_number,
        });
    }
    ThermoLedger {
        index: record.index,
        rows,
    }
}

/// Explicit-time work of the dressed system between two checkpoints:
/// `<Psi, H_F Psi>` evaluated on the same state with Schrödinger phases at
/// the two times. The dressed generator has no time argument, so this
/// vanishes identically up to rounding.
pub fn dressed_explicit_work(tables: &EnergyTables, blocks: &[(i64, Vec2)], t0: f64, t1: f64) -> f64 {
    let at = |t: f64| -> Vec<(i64, Vec2)> {
        blocks
            .iter()
            .map(|(k, c)| {
                let mut v = *c;
                for r in Branch::ALL {
                    v[r.index()] *= cis(-tables.level(r, *k) * t);
                }
                (*k, v)
            })
            .collect()
    };
    tables.total_energy(&at(t1)) - tables.total_energy(&at(t0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstLawResidual {
    pub t0: f64,
    pub t1: f64,
    /// `E[dE_qubit - dW + dQ]`.
    pub qubit: MeanSe,
    /// `E[dE_total + dQ]`.
    pub dressed: MeanSe,
}

/// First-law residuals over the window between checkpoints `i` and `j`.
pub fn first_law_residual(ledgers: &[ThermoLedger], i: usize, j: usize) -> FirstLawResidual {
    let mut qubit = Vec::with_capacity(ledgers.len());
    let mut dressed = Vec::with_capacity(ledgers.len());
    for l in ledgers {
        let (a, b) = (&l.rows[i], &l.rows[j]);
        let dq = b.q_cum - a.q_cum;
        qubit.push((b.e_qubit - a.e_qubit) - (b.w_cum - a.w_cum) + dq);
        dressed.push((b.e_total - a.e_total) + dq);
    }
    FirstLawResidual {
        t0: ledgers[0].rows[i].t,
        t1: ledgers[0].rows[j].t,
        qubit: MeanSe::from_samples(&qubit),
        dressed: MeanSe::from_samples(&dressed),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateWork {
    /// `E[dW/dt]` from the drive-number ledger.
    pub work_rate: MeanSe,
    /// `omega_L E[d mu / dt]`.
    pub photon_rate: MeanSe,
    /// Paired difference of the two per-trajectory estimates.
    pub difference: MeanSe,
    /// `omega_L sum n_omega gamma <A^dagger A>` at the stationary state.
    pub analytic: f64,
}

/// Photon-counting and ledger work rates over checkpoints `i..j` of an
/// ensemble started at the stationary state.
pub fn steady_state_work(
    registry: &ChannelRegistry,
    ledgers: &[ThermoLedger],
    i: usize,
    j: usize,
) -> Result<SteadyStateWork> {
    let w = registry.omega_l();
    let mut work = Vec::with_capacity(ledgers.len());
    let mut photon = Vec::with_capacity(ledgers.len());
    let mut diff = Vec::with_capacity(ledgers.len());
    for l in ledgers {
        let (a, b) = (&l.rows[i], &l.rows[j]);
        let dt = b.t - a.t;
        let x = (b.w_cum - a.w_cum) / dt;
        let y = w * (b.mu - a.mu) as f64 / dt;
        work.push(x);
        photon.push(y);
        diff.push(x - y);
    }
    let p = stationary_populations(registry)?;
    let analytic = w * registry
        .channels()
        .iter()
        .map(|c| {
            c.n_omega as f64
                * c.entries
                    .iter()
                    .map(|e| c.gamma * e.alpha.norm_sqr() * p[e.from.index()])
                    .sum::<f64>()
        })
        .sum::<f64>();
    Ok(SteadyStateWork {
        work_rate: MeanSe::from_samples(&work),
        photon_rate: MeanSe::from_samples(&photon),
        difference: MeanSe::from_samples(&diff),
        analytic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{drift_spectrum, evolve_qubit_trajectory, TrajectoryConfig};
    use crate::presets::{constant_drive_preset, monochromatic_preset};

    #[test]
    fn heat_is_channel_frequency() {
        let e = JumpEvent {
            t: 1.0,
            channel: 0,
            omega: -0.3,
            n_omega: 0,
            weight_before: 1.0,
            mu_after: 0,
        };
        assert_eq!(heat_of_event(&e), -0.3);
    }

    #[test]
    fn mean_and_stderr() {
        let m = MeanSe::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.stderr - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn single_zone_total_energy() {
        let p = monochromatic_preset(1.0, 0.8, 0.1).unwrap();
        let tables = EnergyTables::new(&p.decomposition, 4).unwrap();
        let eps = p.decomposition.quasi_energies();
        let psi = QubitState::new(C64::new(0.6, 0.0), C64::new(0.0, 0.8));
        for mu in [-2i64, 0, 3] {
            let e = tables.energies(&psi.zone_blocks(mu), 1.7);
            let want = 0.36 * eps[0] + 0.64 * eps[1] - mu as f64 * 0.8;
            assert!((e.total - want).abs() < 1e-12);
            assert!((e.total - e.qubit - e.drive_number).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_drive_does_no_work() {
        let p = constant_drive_preset(1.0, 2.0).unwrap();
        let reg = p.registry.with_rates(&[0.3, 0.6], None).unwrap();
        let drift = drift_spectrum(&reg);
        let tables = EnergyTables::new(&p.decomposition, 2).unwrap();
        let psi = QubitState::new(C64::new(0.6, 0.0), C64::new(0.8, 0.0));
        let rec = evolve_qubit_trajectory(&reg, &drift, &psi, &TrajectoryConfig::uniform(20.0, 11), 3, 0).unwrap();
        let ledger = ledger_from_trajectory(&rec, &tables);
        assert!(ledger.rows.iter().all(|r| r.w_cum.abs() < 1e-14));
    }
}
