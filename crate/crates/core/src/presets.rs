//! Closed-form Floquet decompositions and channel registries for the
//! constant and the monochromatic drive.
//!
//! Closed-form states are written in their natural (unfolded) gauge and
//! then passed through the same canonicalisation as numeric
//! decompositions; the jump matrix elements follow through the returned
//! [`GaugeMap`].

use std::f64::consts::PI;

use crate::bath::{fill_rates, RateModel};
use crate::channels::{enumerate_channels, AlphaTable, ChannelRegistry, DEFAULT_N_MAX, DEFAULT_PRUNE_TOL};
use crate::dynamics::master::stationary_populations;
use crate::error::{Error, Result};
use crate::floquet::{brillouin_fold, DriveSpec, FloquetDecomposition, GaugeMap, DEFAULT_GRID};
use crate::linalg::{cis, Vec2, C64, ZERO};
use crate::Branch;

/// A decomposition with its channel registry (rates not yet filled).
#[derive(Debug, Clone)]
pub struct Preset {
    pub decomposition: FloquetDecomposition,
    pub alpha: AlphaTable,
    pub registry: ChannelRegistry,
    pub gauge: GaugeMap,
}

/// Map an alpha generator given in the closed-form gauge to the canonical
/// gauge described by `gauge`.
fn canonical_alpha(gauge: &GaugeMap, n_max: i64, natural: impl Fn(Branch, Branch, i64) -> C64) -> AlphaTable {
    AlphaTable::from_fn(n_max, DEFAULT_PRUNE_TOL, |r, s, n| {
        let (ri, si) = (r.index(), s.index());
        let src = (
            Branch::from_index(gauge.source[ri]),
            Branch::from_index(gauge.source[si]),
        );
        let shifted = n + gauge.shift[si] - gauge.shift[ri];
        gauge.phase[ri].conj() * gauge.phase[si] * natural(src.0, src.1, shifted)
    })
}

fn build(
    spec: DriveSpec,
    eps: [f64; 2],
    state: impl Fn(Branch, f64) -> Vec2,
    alpha: impl Fn(Branch, Branch, i64) -> C64,
    grid: usize,
    n_max: i64,
) -> Result<Preset> {
    let states = Branch::ALL.map(|r| {
        (0..grid)
            .map(|k| state(r, k as f64 * spec.period / grid as f64))
            .collect::<Vec<_>>()
    });
    let (decomposition, gauge) = FloquetDecomposition::canonical(spec, eps, states, None);
    let alpha = canonical_alpha(&gauge, n_max, alpha);
    let registry = enumerate_channels(&alpha, &decomposition)?;
    Ok(Preset {
        decomposition,
        alpha,
        registry,
        gauge,
    })
}

pub fn constant_drive_preset(omega: f64, period: f64) -> Result<Preset> {
    constant_drive_preset_with(omega, period, DEFAULT_GRID, DEFAULT_N_MAX)
}

/// `phi_{+-,n}(tau) = e^{i n omega_L tau} |+->`, `eps = +-omega/2`.
pub fn constant_drive_preset_with(omega: f64, period: f64, grid: usize, n_max: i64) -> Result<Preset> {
    if !(omega > 0.0 && period > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "constant drive needs omega > 0 and T > 0, got {omega}, {period}"
        )));
    }
    let spec = DriveSpec::constant(omega, period);
    build(
        spec,
        [0.5 * omega, -0.5 * omega],
        |r, _| match r {
            Branch::Plus => Vec2::new(C64::from(1.0), ZERO),
            Branch::Minus => Vec2::new(ZERO, C64::from(1.0)),
        },
        |r, s, n| if r != s && n == 0 { C64::from(1.0) } else { ZERO },
        grid,
        n_max,
    )
}

/// Closed-form solution of the monochromatic drive in the rotating-frame
/// gauge: `phi_+ = (c e^{-i w tau}, s)`, `phi_- = (-s e^{-i w tau}, c)` with
/// `c = cos(theta/2)`, `s = sin(theta/2)`, `tan theta = 2 lambda / (w_q - w_L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonochromaticClosedForm {
    pub omega_q: f64,
    pub omega_l: f64,
    pub lambda: f64,
    pub theta: f64,
    pub nu: f64,
}

impl MonochromaticClosedForm {
    pub fn new(omega_q: f64, omega_l: f64, lambda: f64) -> Result<Self> {
        let detuning = omega_q - omega_l;
        let nu = (detuning * detuning + 4.0 * lambda * lambda).sqrt();
        if !(nu > 0.0) || !(omega_l > 0.0) {
            return Err(Error::InvalidParameter(
                "monochromatic drive needs omega_L > 0 and (w_q - w_L)^2 + 4 lambda^2 > 0".into(),
            ));
        }
        Ok(MonochromaticClosedForm {
            omega_q,
            omega_l,
            lambda,
            theta: (2.0 * lambda).atan2(detuning),
            nu,
        })
    }

    fn cs(&self) -> (f64, f64) {
        ((0.5 * self.theta).cos(), (0.5 * self.theta).sin())
    }

    /// Unfolded quasi-energies `(-w_L +- nu)/2`.
    pub fn quasi_energy(&self, r: Branch) -> f64 {
        match r {
            Branch::Plus => 0.5 * (-self.omega_l + self.nu),
            Branch::Minus => 0.5 * (-self.omega_l - self.nu),
        }
    }

    pub fn state(&self, r: Branch, tau: f64) -> Vec2 {
        let (c, s) = self.cs();
        let rot = cis(-self.omega_l * tau);
        match r {
            Branch::Plus => Vec2::new(rot * c, C64::from(s)),
            Branch::Minus => Vec2::new(rot * (-s), C64::from(c)),
        }
    }

    /// Fourier coefficients of `<phi_r, sigma_x phi_s>` in this gauge.
    pub fn alpha(&self, r: Branch, s: Branch, n: i64) -> C64 {
        let (c, sn) = self.cs();
        let half_sin = 0.5 * self.theta.sin();
        let v = match (r, s, n) {
            (Branch::Plus, Branch::Plus, 1 | -1) => half_sin,
            (Branch::Minus, Branch::Minus, 1 | -1) => -half_sin,
            (Branch::Minus, Branch::Plus, 1) => c * c,
            (Branch::Minus, Branch::Plus, -1) => -sn * sn,
            (Branch::Plus, Branch::Minus, -1) => c * c,
            (Branch::Plus, Branch::Minus, 1) => -sn * sn,
            _ => 0.0,
        };
        C64::from(v)
    }

    /// The six jump frequencies `{+-w_L, +-(w_L + nu), +-(w_L - nu)}`.
    pub fn channel_frequencies(&self) -> [f64; 6] {
        let (w, nu) = (self.omega_l, self.nu);
        let mut f = [w, -w, w + nu, -w - nu, w - nu, nu - w];
        f.sort_by(f64::total_cmp);
        f
    }

    /// Zone shift `k_r` that moves the dominant Fourier component of
    /// `phi_r` to mode zero.
    pub fn dominant_shift(&self, r: Branch) -> i64 {
        let (c, s) = self.cs();
        let rotating = match r {
            Branch::Plus => c * c >= s * s,
            Branch::Minus => s * s > c * c,
        };
        if rotating {
            1
        } else {
            0
        }
    }
}

pub fn monochromatic_preset(omega_q: f64, omega_l: f64, lambda: f64) -> Result<Preset> {
    monochromatic_preset_with(omega_q, omega_l, lambda, DEFAULT_GRID, DEFAULT_N_MAX)
}

pub fn monochromatic_preset_with(omega_q: f64, omega_l: f64, lambda: f64, grid: usize, n_max: i64) -> Result<Preset> {
    let cf = MonochromaticClosedForm::new(omega_q, omega_l, lambda)?;
    build(
        DriveSpec::monochromatic(omega_q, omega_l, lambda),
        Branch::ALL.map(|r| cf.quasi_energy(r)),
        |r, tau| cf.state(r, tau),
        |r, s, n| cf.alpha(r, s, n),
        grid,
        n_max,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakDrivePoint {
    pub lambda: f64,
    /// `sum_{r,s} sum_{n != 0} |alpha_{r,s,n}|^2` with each state gauged to
    /// its dominant zone.
    pub photon_weight: f64,
    /// Stationary jump rate through photon-exchanging channels.
    pub photon_rate: f64,
    /// `|fold(eps_+ - eps_- - omega_q)|` in the dominant-zone gauge.
    pub splitting_deviation: f64,
    /// Frequency of the strongest decay channel out of `+`.
    pub dominant_omega: f64,
    /// Stationary rates of jumps with `omega > 0` and `omega < 0`.
    pub emission_rate: f64,
    pub absorption_rate: f64,
    pub heat_current: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakDriveReport {
    pub omega_q: f64,
    pub points: Vec<WeakDrivePoint>,
    /// Least-squares slope of `log photon_weight` against `log lambda`
    /// over the points with `lambda > 0`.
    pub exponent: Option<f64>,
    /// Undriven reference: two channels at `+-omega_q`.
    pub reference_emission_rate: f64,
    pub reference_absorption_rate: f64,
    pub reference_heat_current: f64,
}

fn stationary_rates(registry: &ChannelRegistry) -> Result<(f64, f64, f64)> {
    let p = stationary_populations(registry)?;
    let (mut emission, mut absorption, mut heat) = (0.0, 0.0, 0.0);
    for c in registry.channels() {
        let flux: f64 = c
            .entries
            .iter()
            .map(|e| c.gamma * e.alpha.norm_sqr() * p[e.from.index()])
            .sum();
        if c.omega > 0.0 {
            emission += flux;
        } else if c.omega < 0.0 {
            absorption += flux;
        }
        heat += c.omega * flux;
    }
    Ok((emission, absorption, heat))
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || x.len() != y.len() {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Compare a sequence of weak monochromatic drives with the undriven qubit.
pub fn weak_drive_limit_check(
    omega_q: f64,
    period: f64,
    lambdas: &[f64],
    model: &RateModel,
) -> Result<WeakDriveReport> {
    let omega_l = 2.0 * PI / period;
    let reference = fill_rates(&constant_drive_preset(omega_q, period)?.registry, model)?;
    let (ref_em, ref_abs, ref_heat) = stationary_rates(&reference)?;
    let mut points = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let cf = MonochromaticClosedForm::new(omega_q, omega_l, lambda)?;
        let k = Branch::ALL.map(|r| cf.dominant_shift(r));
        let preset = monochromatic_preset(omega_q, omega_l, lambda)?;
        let registry = fill_rates(&preset.registry, model)?;
        let (emission_rate, absorption_rate, heat_current) = stationary_rates(&registry)?;
        let populations = stationary_populations(&registry)?;
        // closed-form label -> canonical label
        let canonical = |r: Branch| Branch::from_index(if preset.gauge.source[0] == r.index() { 0 } else { 1 });
        let mut photon_weight = 0.0;
        let mut photon_rate = 0.0;
        for r in Branch::ALL {
            for s in Branch::ALL {
                for n in -3i64..=3 {
                    if n == 0 {
                        continue;
                    }
                    let natural_n = n + k[s.index()] - k[r.index()];
                    let a2 = cf.alpha(r, s, natural_n).norm_sqr();
                    if a2 == 0.0 {
                        continue;
                    }
                    photon_weight += a2;
                    let omega = cf.quasi_energy(s) - cf.quasi_energy(r) + natural_n as f64 * omega_l;
                    photon_rate += model.rate(omega)? * a2 * populations[canonical(s).index()];
                }
            }
        }
        let eps = Branch::ALL.map(|r| cf.quasi_energy(r) + k[r.index()] as f64 * omega_l);
        let splitting_deviation = brillouin_fold(eps[0] - eps[1] - omega_q, period).0.abs();

        let dominant_omega = registry
            .channels_from(Branch::Plus)
            .filter(|c| c.omega > 0.0)
            .map(|c| (c.omega, c.strength(Branch::Minus, Branch::Plus)))
            .fold((f64::NAN, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best })
            .0;
        points.push(WeakDrivePoint {
            lambda,
            photon_weight,
            photon_rate,
            splitting_deviation,
            dominant_omega,
            emission_rate,
            absorption_rate,
            heat_current,
        });
    }
    let fit: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.lambda > 0.0 && p.photon_weight > 0.0)
        .map(|p| (p.lambda.ln(), p.photon_weight.ln()))
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = fit.into_iter().unzip();
    Ok(WeakDriveReport {
        omega_q,
        points,
        exponent: fit_slope(&xs, &ys),
        reference_emission_rate: ref_em,
        reference_absorption_rate: ref_abs,
        reference_heat_current: ref_heat,
    })
}
