//! Jump channels: the matrix elements of the coupling operator in the
//! Floquet basis, grouped by the energy each jump releases to the bath.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::floquet::{observable_table, FloquetDecomposition};
use crate::linalg::{norm_sqr, sigma_x, Mat2, Vec2, C64, ZERO};
use crate::Branch;

pub const DEFAULT_N_MAX: i64 = 32;
pub const DEFAULT_PRUNE_TOL: f64 = 1e-12;
/// Two channel frequencies closer than this (times `omega_L`) coincide.
pub const FREQUENCY_TOL: f64 = 1e-9;
const ZERO_WEIGHT: f64 = 1e-300;

/// `alpha_{r,s,n} = (1/T) int <phi_r, sigma_x e^{i n omega_L tau} phi_s>`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaTable {
    n_max: i64,
    prune_tol: f64,
    raw: [[Vec<C64>; 2]; 2],
}

impl AlphaTable {
    /// Build a table from any generator of entries, `|n| <= n_max`.
    pub fn from_fn(n_max: i64, prune_tol: f64, f: impl Fn(Branch, Branch, i64) -> C64) -> Self {
        let raw = Branch::ALL.map(|r| Branch::ALL.map(|s| (-n_max..=n_max).map(|n| f(r, s, n)).collect()));
        AlphaTable { n_max, prune_tol, raw }
    }

    pub fn n_max(&self) -> i64 {
        self.n_max
    }

    pub fn prune_tol(&self) -> f64 {
        self.prune_tol
    }

    /// Unpruned entry; zero outside the table.
    pub fn raw(&self, r: Branch, s: Branch, n: i64) -> C64 {
        if n.abs() > self.n_max {
            return ZERO;
        }
        self.raw[r.index()][s.index()][(n + self.n_max) as usize]
    }

    pub fn survives(&self, r: Branch, s: Branch, n: i64) -> bool {
        self.raw(r, s, n).norm_sqr() >= self.prune_tol && n.abs() <= self.n_max
    }

    /// Entry after pruning.
    pub fn get(&self, r: Branch, s: Branch, n: i64) -> C64 {
        if self.survives(r, s, n) {
            self.raw(r, s, n)
        } else {
            ZERO
        }
    }

    /// Surviving `(r, s, n, alpha)` quadruples.
    pub fn entries(&self) -> Vec<(Branch, Branch, i64, C64)> {
        let mut out = Vec::new();
        for r in Branch::ALL {
            for s in Branch::ALL {
                for n in -self.n_max..=self.n_max {
                    if self.survives(r, s, n) {
                        out.push((r, s, n, self.raw(r, s, n)));
                    }
                }
            }
        }
        out
    }

    /// `max_s |sum_{r,n} |alpha_{r,s,n}|^2 - 1|` over unpruned entries;
    /// measures the weight lost to the `n_max` truncation.
    pub fn completeness_defect(&self) -> f64 {
        Branch::ALL
            .iter()
            .map(|&s| {
                let total: f64 = Branch::ALL
                    .iter()
                    .flat_map(|&r| (-self.n_max..=self.n_max).map(move |n| (r, n)))
                    .map(|(r, n)| self.raw(r, s, n).norm_sqr())
                    .sum();
                (total - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `max |alpha_{r,s,n} - conj(alpha_{s,r,-n})|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in Branch::ALL {
            for s in Branch::ALL {
                for n in -self.n_max..=self.n_max {
                    worst = worst.max((self.raw(r, s, n) - self.raw(s, r, -n).conj()).norm());
                }
            }
        }
        worst
    }
}

pub fn compute_alpha(decomp: &FloquetDecomposition, n_max: i64, prune_tol: f64) -> Result<AlphaTable> {
    let m = decomp.grid_size();
    let required = 8 * n_max.max(0) as usize;
    if m < required {
        return Err(Error::GridTooCoarse {
            grid: m,
            n_max,
            required,
        });
    }
    let sx = vec![sigma_x(); m];
    let table = observable_table(decomp, &sx, n_max)?;
    Ok(AlphaTable::from_fn(n_max, prune_tol, |r, s, n| {
        table.by_difference(r, s, n)
    }))
}

/// One `(to, from, alpha)` term of a jump operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelEntry {
    pub to: Branch,
    pub from: Branch,
    pub alpha: C64,
}

/// A jump channel: every transition releasing energy `omega` to the bath.
/// All entries share the same photon number `n_omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpChannel {
    pub id: usize,
    pub omega: f64,
    pub n_omega: i64,
    pub entries: Vec<ChannelEntry>,
    pub gamma: f64,
}

impl JumpChannel {
    /// `A(omega)` in the Floquet basis `{phi_+, phi_-}`.
    pub fn matrix(&self) -> Mat2 {
        let mut a = Mat2::zeros();
        for e in &self.entries {
            a[(e.to.index(), e.from.index())] += e.alpha;
        }
        a
    }

    pub fn apply(&self, c: &Vec2) -> Vec2 {
        let mut out = Vec2::zeros();
        for e in &self.entries {
            out[e.to.index()] += e.alpha * c[e.from.index()];
        }
        out
    }

    /// `||A(omega) c||^2`.
    pub fn weight(&self, c: &Vec2) -> f64 {
        norm_sqr(&self.apply(c))
    }

    /// `|alpha|^2` of the transition `from -> to`, zero if absent.
    pub fn strength(&self, to: Branch, from: Branch) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.to == to && e.from == from)
            .map(|e| e.alpha.norm_sqr())
            .sum()
    }

    pub fn is_photon_exchanging(&self) -> bool {
        self.n_omega != 0
    }
}

/// Per-pair detailed-balance diagnostics attached by rate filling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetailedBalanceReport {
    pub beta: f64,
    pub pairs: Vec<BalancePair>,
    pub max_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BalancePair {
    pub omega: f64,
    pub gamma_forward: f64,
    pub gamma_backward: f64,
    /// `|gamma(omega) e^{-beta omega} / gamma(-omega) - 1|`.
    pub residual: f64,
}

/// The finite set of jump channels, sorted by frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRegistry {
    channels: Vec<JumpChannel>,
    n_max: i64,
    omega_l: f64,
    quasi_energies: [f64; 2],
    balance: Option<DetailedBalanceReport>,
}

fn triple_label(r: Branch, s: Branch, n: i64) -> String {
    format!("({r},{s},{n})")
}

pub fn enumerate_channels(alpha: &AlphaTable, decomp: &FloquetDecomposition) -> Result<ChannelRegistry> {
    let w = decomp.omega_l();
    let eps = decomp.quasi_energies();
    let mut triples: Vec<(f64, Branch, Branch, i64, C64)> = alpha
        .entries()
        .into_iter()
        .map(|(r, s, n, a)| (eps[s.index()] - eps[r.index()] + n as f64 * w, r, s, n, a))
        .collect();
    triples.sort_by(|a, b| a.0.total_cmp(&b.0));

    let tol = FREQUENCY_TOL * w;
    let mut channels: Vec<JumpChannel> = Vec::new();
    let mut group_head: Option<(f64, Branch, Branch, i64)> = None;
    for (omega, r, s, n, a) in triples {
        if let Some((w0, r0, s0, n0)) = group_head {
            if (omega - w0).abs() < tol {
                let mergeable = n == n0 && r == s && r0 == s0;
                if !mergeable {
                    return Err(Error::AssumptionViolated {
                        omega,
                        first: triple_label(r0, s0, n0),
                        second: triple_label(r, s, n),
                    });
                }
                channels
                    .last_mut()
                    .expect("group has a channel")
                    .entries
                    .push(ChannelEntry {
                        to: r,
                        from: s,
                        alpha: a,
                    });
                continue;
            }
        }
        group_head = Some((omega, r, s, n));
        channels.push(JumpChannel {
            id: channels.len(),
            omega,
            n_omega: n,
            entries: vec![ChannelEntry {
                to: r,
                from: s,
                alpha: a,
            }],
            gamma: 0.0,
        });
    }
    Ok(ChannelRegistry {
        channels,
        n_max: alpha.n_max(),
        omega_l: w,
        quasi_energies: eps,
        balance: None,
    })
}

impl ChannelRegistry {
    pub fn channels(&self) -> &[JumpChannel] {
        &self.channels
    }

    pub fn channel(&self, id: usize) -> &JumpChannel {
        &self.channels[id]
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn n_max(&self) -> i64 {
        self.n_max
    }

    pub fn omega_l(&self) -> f64 {
        self.omega_l
    }

    pub fn quasi_energies(&self) -> [f64; 2] {
        self.quasi_energies
    }

    pub fn quasi_energy(&self, r: Branch) -> f64 {
        self.quasi_energies[r.index()]
    }

    pub fn balance_report(&self) -> Option<&DetailedBalanceReport> {
        self.balance.as_ref()
    }

    /// Channel whose frequency matches `omega` within the registry tolerance.
    pub fn find(&self, omega: f64) -> Option<&JumpChannel> {
        let tol = FREQUENCY_TOL * self.omega_l;
        self.channels.iter().find(|c| (c.omega - omega).abs() < tol)
    }

    /// Id of the channel at `-omega`.
    pub fn partner(&self, id: usize) -> Option<usize> {
        self.find(-self.channels[id].omega).map(|c| c.id)
    }

    /// Replace every rate; `gammas` is indexed by channel id.
    pub fn with_rates(&self, gammas: &[f64], balance: Option<DetailedBalanceReport>) -> Result<Self> {
        if gammas.len() != self.channels.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} rates, got {}",
                self.channels.len(),
                gammas.len()
            )));
        }
        if let Some(g) = gammas.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "rate must be finite and >= 0, got {g}"
            )));
        }
        let mut out = self.clone();
        for (c, g) in out.channels.iter_mut().zip(gammas) {
            c.gamma = *g;
        }
        out.balance = balance;
        Ok(out)
    }

    /// Same registry with a uniform rate, useful for structural tests.
    pub fn with_uniform_rate(&self, gamma: f64) -> Self {
        self.with_rates(&vec![gamma; self.len()], None)
            .expect("uniform finite rate")
    }

    /// `Gamma_eff = sum_omega gamma(omega) A^dagger A` in the Floquet basis.
    pub fn effective_decay(&self) -> Mat2 {
        let mut g = Mat2::zeros();
        for c in &self.channels {
            let a = c.matrix();
            g += a.adjoint() * a * C64::from(c.gamma);
        }
        g
    }

    /// Channels with a surviving entry leaving `from`.
    pub fn channels_from(&self, from: Branch) -> impl Iterator<Item = &JumpChannel> {
        self.channels
            .iter()
            .filter(move |c| c.entries.iter().any(|e| e.from == from))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let channels: Vec<serde_json::Value> = self
            .channels
            .iter()
            .map(|c| {
                let entries: Vec<serde_json::Value> = c
                    .entries
                    .iter()
                    .map(|e| {
                        serde_json::json!({
                            "r": e.to.to_string(),
                            "s": e.from.to_string(),
                            "n": c.n_omega,
                            "alpha_re": e.alpha.re,
                            "alpha_im": e.alpha.im,
                        })
                    })
                    .collect();
                serde_json::json!({
                    "id": c.id,
                    "omega": c.omega,
                    "n_omega": c.n_omega,
                    "gamma": c.gamma,
                    "entries": entries,
                })
            })
            .collect();
        serde_json::json!({
            "format_version": 1,
            "omega_l": self.omega_l,
            "quasi_energies": {"+": self.quasi_energies[0], "-": self.quasi_energies[1]},
            "n_max": self.n_max,
            "channels": channels,
            "detailed_balance": self.balance,
        })
    }
}

/// Apply `A(omega)` to a normalised Floquet-basis state.
pub fn apply_jump_qubit(registry: &ChannelRegistry, channel: usize, psi: &Vec2) -> Result<(Vec2, f64)> {
    let c = registry.channel(channel);
    let out = c.apply(psi);
    let weight = norm_sqr(&out);
    if weight < ZERO_WEIGHT {
        return Err(Error::ZeroWeight { channel, weight });
    }
    Ok((out / C64::from(weight.sqrt()), weight))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::{floquet_decompose, DriveSpec, DEFAULT_GRID};
    use crate::linalg::ONE;
    use std::f64::consts::PI;

    fn constant() -> (FloquetDecomposition, ChannelRegistry) {
        let d = floquet_decompose(&DriveSpec::constant(0.3, 2.0 * PI), 256).unwrap();
        let a = compute_alpha(&d, 8, DEFAULT_PRUNE_TOL).unwrap();
        let reg = enumerate_channels(&a, &d).unwrap();
        (d, reg)
    }

    #[test]
    fn constant_drive_alpha() {
        let d = floquet_decompose(&DriveSpec::constant(0.3, 2.0 * PI), 256).unwrap();
        let a = compute_alpha(&d, 8, DEFAULT_PRUNE_TOL).unwrap();
        assert!((a.get(Branch::Plus, Branch::Minus, 0).norm() - 1.0).abs() < 1e-12);
        for r in Branch::ALL {
            for s in Branch::ALL {
                for n in -8..=8 {
                    if n != 0 {
                        assert!(a.raw(r, s, n).norm() < 1e-12);
                    }
                }
            }
        }
        assert!(a.completeness_defect() < 1e-10);
    }

    #[test]
    fn constant_drive_has_two_channels() {
        let (_, reg) = constant();
        assert_eq!(reg.len(), 2);
        assert!((reg.channel(0).omega + 0.3).abs() < 1e-12);
        assert!((reg.channel(1).omega - 0.3).abs() < 1e-12);
        assert_eq!(reg.partner(0), Some(1));
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let d = floquet_decompose(&DriveSpec::constant(0.3, 2.0 * PI), 128).unwrap();
        assert!(matches!(
            compute_alpha(&d, 32, DEFAULT_PRUNE_TOL),
            Err(Error::GridTooCoarse { required: 256, .. })
        ));
    }

    #[test]
    fn jump_from_excited_state() {
        let (_, reg) = constant();
        let down = reg.find(0.3).unwrap().id;
        let plus = Vec2::new(ONE, ZERO);
        let (after, w) = apply_jump_qubit(&reg, down, &plus).unwrap();
        assert!((w - 1.0).abs() < 1e-12);
        assert!((after[1].norm() - 1.0).abs() < 1e-12);
        let minus = Vec2::new(ZERO, ONE);
        assert!(matches!(
            apply_jump_qubit(&reg, down, &minus),
            Err(Error::ZeroWeight { .. })
        ));
    }

    #[test]
    fn numeric_monochromatic_registry() {
        let spec = DriveSpec::monochromatic(1.0, 0.8, 0.1);
        let d = floquet_decompose(&spec, DEFAULT_GRID).unwrap();
        let a = compute_alpha(&d, DEFAULT_N_MAX, DEFAULT_PRUNE_TOL).unwrap();
        assert!(a.completeness_defect() < 1e-8);
        assert!(a.hermiticity_defect() < 1e-10);
        let reg = enumerate_channels(&a, &d).unwrap();
        assert_eq!(reg.len(), 6);
        let nu = 0.08f64.sqrt();
        let mut want = [0.8, -0.8, 0.8 + nu, -0.8 - nu, 0.8 - nu, nu - 0.8];
        want.sort_by(f64::total_cmp);
        for (c, w) in reg.channels().iter().zip(want) {
            assert!((c.omega - w).abs() < 1e-10, "{} vs {w}", c.omega);
        }
        for c in reg.channels() {
            assert!(reg.partner(c.id).is_some());
        }
    }
}
