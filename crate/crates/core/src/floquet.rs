//! Floquet decomposition of a periodically driven two-level Hamiltonian.
//!
//! The one-period propagator is integrated with fixed-step RK4, its
//! eigenphases give the quasi-energies, and the Floquet states are stored
//! as samples on a uniform grid over one period. Fourier coefficients and
//! period-averaged inner products are computed from those samples with the
//! periodic trapezoid rule.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg::{
    cis, gauge_phase, hermiticity_deviation, inner, norm_sqr, normal_eigen, sigma_minus, sigma_plus, sigma_z,
    unitarity_deviation, Mat2, Vec2, C64, I, ZERO,
};
use crate::Branch;

/// Default number of samples per period.
pub const DEFAULT_GRID: usize = 1024;
/// Smallest grid accepted by [`propagate_period`].
pub const MIN_GRID: usize = 64;
const HERMITICITY_TOL: f64 = 1e-12;

/// A drive Hermitian matrix sampled on a uniform grid over one period,
/// evaluated off-grid by trigonometric interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledDrive {
    samples: Vec<Mat2>,
    // (mode, coefficient) pairs; the Nyquist mode of an even grid is
    // stored once and evaluated as a cosine.
    modes: Vec<(i64, Mat2)>,
    nyquist: Option<Mat2>,
}

impl SampledDrive {
    pub fn new(samples: Vec<Mat2>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidParameter(
                "sampled drive needs at least two samples".into(),
            ));
        }
        for (index, h) in samples.iter().enumerate() {
            let deviation = hermiticity_deviation(h);
            if deviation > HERMITICITY_TOL {
                return Err(Error::NonHermitianInput { index, deviation });
            }
        }
        let n = samples.len();
        let coefficient = |m: i64| -> Mat2 {
            let mut acc = Mat2::zeros();
            for (k, h) in samples.iter().enumerate() {
                let phase = -2.0 * PI * ((m.rem_euclid(n as i64) as usize * k) % n) as f64 / n as f64;
                acc += h * cis(phase);
            }
            acc / C64::from(n as f64)
        };
        let half = (n as i64 - 1) / 2;
        let modes = (-half..=half).map(|m| (m, coefficient(m))).collect();
        let nyquist = (n % 2 == 0).then(|| coefficient(n as i64 / 2));
        Ok(SampledDrive {
            samples,
            modes,
            nyquist,
        })
    }

    pub fn samples(&self) -> &[Mat2] {
        &self.samples
    }

    fn at(&self, t: f64, omega_l: f64) -> Mat2 {
        let mut h = Mat2::zeros();
        for (m, c) in &self.modes {
            h += c * cis(*m as f64 * omega_l * t);
        }
        if let Some(c) = &self.nyquist {
            let m = self.samples.len() as f64 / 2.0;
            h += c * C64::from((m * omega_l * t).cos());
        }
        h
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Drive {
    /// No drive: `H_q = omega_q/2 sigma_z`.
    Constant,
    /// `lambda (e^{-i omega_L t} sigma_+ + e^{i omega_L t} sigma_-)`.
    Monochromatic { lambda: f64 },
    /// Arbitrary periodic Hermitian drive given by samples over `[0, T)`.
    Sampled(SampledDrive),
}

/// Periodic qubit Hamiltonian `H_q(t) = omega_q/2 sigma_z + H_d(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveSpec {
    pub omega_q: f64,
    pub period: f64,
    pub drive: Drive,
}

impl DriveSpec {
    pub fn constant(omega_q: f64, period: f64) -> Self {
        DriveSpec {
            omega_q,
            period,
            drive: Drive::Constant,
        }
    }

    pub fn monochromatic(omega_q: f64, omega_l: f64, lambda: f64) -> Self {
        DriveSpec {
            omega_q,
            period: 2.0 * PI / omega_l,
            drive: Drive::Monochromatic { lambda },
        }
    }

    pub fn sampled(omega_q: f64, period: f64, samples: Vec<Mat2>) -> Result<Self> {
        Ok(DriveSpec {
            omega_q,
            period,
            drive: Drive::Sampled(SampledDrive::new(samples)?),
        })
    }

    pub fn omega_l(&self) -> f64 {
        2.0 * PI / self.period
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "period must be positive and finite, got {}",
                self.period
            )));
        }
        if !self.omega_q.is_finite() {
            return Err(Error::InvalidParameter("omega_q must be finite".into()));
        }
        if let Drive::Monochromatic { lambda } = self.drive {
            if !lambda.is_finite() {
                return Err(Error::InvalidParameter("lambda must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn hamiltonian(&self, t: f64) -> Mat2 {
        let bare = sigma_z() * C64::from(0.5 * self.omega_q);
        match &self.drive {
            Drive::Constant => bare,
            Drive::Monochromatic { lambda } => {
                let w = self.omega_l() * t;
                bare + (sigma_plus() * cis(-w) + sigma_minus() * cis(w)) * C64::from(*lambda)
            }
            Drive::Sampled(s) => bare + s.at(t, self.omega_l()),
        }
    }
}

/// Fold an energy into the zeroth Brillouin zone `]-pi/T, pi/T]`.
///
/// Returns `(e0, n)` with `e = e0 + n omega_L`.
pub fn brillouin_fold(e: f64, period: f64) -> (f64, i64) {
    let omega = 2.0 * PI / period;
    let half = PI / period;
    let mut n = ((e - half) / omega).ceil() as i64;
    let mut e0 = e - n as f64 * omega;
    // rounding can leave e0 a hair outside the zone
    if e0 > half {
        n += 1;
        e0 -= omega;
    } else if e0 <= -half {
        n -= 1;
        e0 += omega;
    }
    (e0, n)
}

/// Uniform trapezoid weights for the normalised period average.
#[derive(Debug, Clone, PartialEq)]
pub struct L2Product {
    weights: Vec<f64>,
}

impl L2Product {
    pub fn new(m: usize) -> Self {
        L2Product {
            weights: vec![1.0 / m as f64; m],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(1/T) int <f(tau), g(tau)> dtau`.
    pub fn inner(&self, f: &[Vec2], g: &[Vec2]) -> Result<C64> {
        if f.len() != g.len() {
            return Err(Error::GridMismatch {
                left: f.len(),
                right: g.len(),
            });
        }
        if f.len() != self.weights.len() {
            return Err(Error::GridMismatch {
                left: f.len(),
                right: self.weights.len(),
            });
        }
        Ok(f.iter()
            .zip(g)
            .zip(&self.weights)
            .map(|((a, b), w)| inner(a, b) * *w)
            .sum())
    }
}

/// Period-averaged inner product of two sampled periodic functions.
pub fn l2_inner(f: &[Vec2], g: &[Vec2]) -> Result<C64> {
    L2Product::new(f.len()).inner(f, g)
}

/// Full propagator `U(tau_k)` sampled at `tau_k = k T / m`, `k = 0..=m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    pub period: f64,
    pub samples: Vec<Mat2>,
}

impl Propagator {
    pub fn grid_size(&self) -> usize {
        self.samples.len() - 1
    }

    /// The one-period propagator `U(T) = e^{-i D T}`.
    pub fn monodromy(&self) -> &Mat2 {
        self.samples.last().expect("propagator is never empty")
    }

    pub fn max_unitarity_deviation(&self) -> f64 {
        self.samples.iter().map(unitarity_deviation).fold(0.0, f64::max)
    }
}

fn rk4_step(spec: &DriveSpec, t: f64, h: f64, u: &Mat2) -> Mat2 {
    let minus_i = -I;
    let h_start = spec.hamiltonian(t);
    let h_mid = spec.hamiltonian(t + 0.5 * h);
    let h_end = spec.hamiltonian(t + h);
    let half = C64::from(0.5 * h);
    let k1 = h_start * u * minus_i;
    let k2 = h_mid * (u + k1 * half) * minus_i;
    let k3 = h_mid * (u + k2 * half) * minus_i;
    let k4 = h_end * (u + k3 * C64::from(h)) * minus_i;
    u + (k1 + k2 * C64::from(2.0) + k3 * C64::from(2.0) + k4) * C64::from(h / 6.0)
}

/// Integrate `i dU/dt = H_q(t) U`, `U(0) = 1` over one period on `m` steps.
pub fn propagate_period(spec: &DriveSpec, m: usize) -> Result<Propagator> {
    spec.validate()?;
    if m < MIN_GRID {
        return Err(Error::InvalidParameter(format!(
            "grid size must be >= {MIN_GRID}, got {m}"
        )));
    }
    let h = spec.period / m as f64;
    let mut samples = Vec::with_capacity(m + 1);
    let mut u = Mat2::identity();
    samples.push(u);
    for k in 0..m {
        u = rk4_step(spec, k as f64 * h, h, &u);
        samples.push(u);
    }
    Ok(Propagator {
        period: spec.period,
        samples,
    })
}

/// Directly integrate the Schrödinger equation from `psi0` up to time `t`
/// with about `steps_per_period` RK4 steps per period.
pub fn propagate_to(spec: &DriveSpec, psi0: &Vec2, t: f64, steps_per_period: usize) -> Vec2 {
    if t == 0.0 {
        return *psi0;
    }
    let n = ((t / spec.period) * steps_per_period as f64).ceil().max(1.0) as usize;
    let h = t / n as f64;
    let mut u = Mat2::identity();
    for k in 0..n {
        u = rk4_step(spec, k as f64 * h, h, &u);
    }
    u * psi0
}

/// Options for [`floquet_decompose_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecomposeOptions {
    pub grid: usize,
    /// Degeneracy threshold in units of `omega_L`.
    pub degeneracy_tol: f64,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions {
            grid: DEFAULT_GRID,
            degeneracy_tol: 1e-9,
        }
    }
}

/// How a canonical decomposition relates to the raw eigenpairs it was
/// built from: canonical state `r` is `phase[r] e^{i shift[r] omega_L tau}`
/// times raw state `source[r]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeMap {
    pub source: [usize; 2],
    pub shift: [i64; 2],
    pub phase: [C64; 2],
}

/// Quasi-energies and period-sampled Floquet states.
#[derive(Debug, Clone)]
pub struct FloquetDecomposition {
    spec: DriveSpec,
    eps: [f64; 2],
    nu: [Vec2; 2],
    states: [Vec<Vec2>; 2],
    propagator: Propagator,
    fourier: OnceLock<[Vec<Vec2>; 2]>,
}

pub fn floquet_decompose(spec: &DriveSpec, m: usize) -> Result<FloquetDecomposition> {
    floquet_decompose_with(
        spec,
        &DecomposeOptions {
            grid: m,
            ..DecomposeOptions::default()
        },
    )
}

pub fn floquet_decompose_with(spec: &DriveSpec, options: &DecomposeOptions) -> Result<FloquetDecomposition> {
    let propagator = propagate_period(spec, options.grid)?;
    let m = options.grid;
    let period = spec.period;
    let omega_l = spec.omega_l();
    let (values, vectors) = normal_eigen(propagator.monodromy());
    let eps = values.map(|z| brillouin_fold(-z.arg() / period, period).0);
    let splitting = brillouin_fold(eps[0] - eps[1], period).0.abs();
    if splitting < options.degeneracy_tol * omega_l {
        return Err(Error::DegenerateQuasiEnergies { splitting });
    }
    let states = [0, 1].map(|r| {
        (0..m)
            .map(|k| {
                let tau = k as f64 * period / m as f64;
                propagator.samples[k] * vectors[r] * cis(eps[r] * tau)
            })
            .collect::<Vec<_>>()
    });
    let (decomp, _) = FloquetDecomposition::canonical(spec.clone(), eps, states, Some(propagator));
    Ok(decomp)
}

impl FloquetDecomposition {
    /// Build a decomposition from raw eigenpairs (any zone, any order, any
    /// phase), folding quasi-energies into the zeroth zone, ordering the
    /// labels and fixing the phase gauge.
    ///
    /// When `propagator` is `None` it is reconstructed from the states.
    pub fn canonical(
        spec: DriveSpec,
        eps_raw: [f64; 2],
        states_raw: [Vec<Vec2>; 2],
        propagator: Option<Propagator>,
    ) -> (Self, GaugeMap) {
        let period = spec.period;
        let omega_l = spec.omega_l();
        let m = states_raw[0].len();
        let tau = |k: usize| k as f64 * period / m as f64;

        let mut eps = [0.0; 2];
        let mut shift = [0i64; 2];
        let mut folded: [Vec<Vec2>; 2] = [Vec::new(), Vec::new()];
        for r in 0..2 {
            let (e0, n) = brillouin_fold(eps_raw[r], period);
            eps[r] = e0;
            shift[r] = -n;
            folded[r] = states_raw[r]
                .iter()
                .enumerate()
                .map(|(k, v)| v * cis(-(n as f64) * omega_l * tau(k)))
                .collect();
        }

        let hs: Vec<Mat2> = (0..m).map(|k| spec.hamiltonian(tau(k))).collect();
        let average = |states: &[Vec2], op: &dyn Fn(usize) -> Mat2| -> f64 {
            states
                .iter()
                .enumerate()
                .map(|(k, v)| inner(v, &(op(k) * v)).re)
                .sum::<f64>()
                / m as f64
        };
        let sz = [0, 1].map(|r| average(&folded[r], &|_| sigma_z()));
        let plus_first = if (sz[0] - sz[1]).abs() > 1e-9 {
            sz[0] > sz[1]
        } else {
            let e = [0, 1].map(|r| average(&folded[r], &|k| hs[k]));
            e[0] >= e[1]
        };
        let source = if plus_first { [0, 1] } else { [1, 0] };

        let mut phase = [C64::from(1.0); 2];
        let mut states: [Vec<Vec2>; 2] = [Vec::new(), Vec::new()];
        let mut out_eps = [0.0; 2];
        let mut out_shift = [0; 2];
        for r in 0..2 {
            let src = source[r];
            let p = gauge_phase(&folded[src][0]);
            phase[r] = p;
            states[r] = folded[src].iter().map(|v| v * p).collect();
            out_eps[r] = eps[src];
            out_shift[r] = shift[src];
        }
        let nu = [states[0][0], states[1][0]];

        let propagator = propagator.unwrap_or_else(|| {
            let mut samples: Vec<Mat2> = (0..m)
                .map(|k| {
                    let mut u = Mat2::zeros();
                    for r in 0..2 {
                        u += states[r][k] * nu[r].adjoint() * cis(-out_eps[r] * tau(k));
                    }
                    u
                })
                .collect();
            let mut u_t = Mat2::zeros();
            for r in 0..2 {
                u_t += nu[r] * nu[r].adjoint() * cis(-out_eps[r] * period);
            }
            samples.push(u_t);
            Propagator { period, samples }
        });

        (
            FloquetDecomposition {
                spec,
                eps: out_eps,
                nu,
                states,
                propagator,
                fourier: OnceLock::new(),
            },
            GaugeMap {
                source,
                shift: out_shift,
                phase,
            },
        )
    }

    pub fn spec(&self) -> &DriveSpec {
        &self.spec
    }

    pub fn period(&self) -> f64 {
        self.spec.period
    }

    pub fn omega_l(&self) -> f64 {
        self.spec.omega_l()
    }

    pub fn grid_size(&self) -> usize {
        self.states[0].len()
    }

    pub fn tau(&self, k: usize) -> f64 {
        k as f64 * self.period() / self.grid_size() as f64
    }

    pub fn quasi_energy(&self, r: Branch) -> f64 {
        self.eps[r.index()]
    }

    pub fn quasi_energies(&self) -> [f64; 2] {
        self.eps
    }

    /// `nu_r = phi_r(0)`.
    pub fn nu(&self, r: Branch) -> Vec2 {
        self.nu[r.index()]
    }

    /// Samples `phi_r(tau_k)`, `k = 0..m`.
    pub fn state(&self, r: Branch) -> &[Vec2] {
        &self.states[r.index()]
    }

    /// Samples of `phi_{r,n}(tau) = e^{i n omega_L tau} phi_r(tau)`.
    pub fn zone_state(&self, r: Branch, n: i64) -> Vec<Vec2> {
        let w = self.omega_l();
        self.state(r)
            .iter()
            .enumerate()
            .map(|(k, v)| v * cis(n as f64 * w * self.tau(k)))
            .collect()
    }

    pub fn propagator(&self) -> &Propagator {
        &self.propagator
    }

    pub fn hamiltonian_samples(&self) -> Vec<Mat2> {
        (0..self.grid_size())
            .map(|k| self.spec.hamiltonian(self.tau(k)))
            .collect()
    }

    /// Periodic part `P_{tau_k,0} = sum_r phi_r(tau_k) nu_r^dagger`.
    pub fn periodic_part(&self, k: usize) -> Mat2 {
        let mut p = Mat2::zeros();
        for r in Branch::ALL {
            p += self.state(r)[k] * self.nu(r).adjoint();
        }
        p
    }

    /// Trapezoid Fourier coefficient `(1/T) int e^{-i m omega_L tau} phi_r dtau`.
    pub fn fourier_coefficient(&self, r: Branch, mode: i64) -> Vec2 {
        let m = self.grid_size();
        let mut acc = Vec2::zeros();
        for (k, v) in self.state(r).iter().enumerate() {
            let j = (mode.rem_euclid(m as i64) as usize * k) % m;
            acc += v * cis(-2.0 * PI * j as f64 / m as f64);
        }
        acc / C64::from(m as f64)
    }

    fn fourier_table(&self) -> &[Vec<Vec2>; 2] {
        self.fourier.get_or_init(|| {
            let m = self.grid_size() as i64;
            let half = (m - 1) / 2;
            Branch::ALL.map(|r| (-half..=half).map(|mode| self.fourier_coefficient(r, mode)).collect())
        })
    }

    /// Trigonometric interpolation of `phi_r` at an arbitrary time.
    pub fn state_at(&self, r: Branch, t: f64) -> Vec2 {
        let coeffs = &self.fourier_table()[r.index()];
        let half = (coeffs.len() as i64 - 1) / 2;
        let w = self.omega_l();
        coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * cis((j as i64 - half) as f64 * w * t))
            .sum()
    }

    /// Spectral derivative samples of `-i d/dtau phi_r`.
    pub fn number_action_samples(&self, r: Branch) -> Vec<Vec2> {
        let coeffs = &self.fourier_table()[r.index()];
        let half = (coeffs.len() as i64 - 1) / 2;
        let w = self.omega_l();
        (0..self.grid_size())
            .map(|k| {
                let tau = self.tau(k);
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, c)| {
                        let mode = (j as i64 - half) as f64;
                        c * (C64::from(mode * w) * cis(mode * w * tau))
                    })
                    .sum()
            })
            .collect()
    }

    /// Gauge transformation: `eps_r -> eps_r + k omega_L`,
    /// `phi_r -> e^{i k omega_L tau} phi_r`. The result leaves the zeroth
    /// zone when `k != 0`.
    pub fn shifted(&self, r: Branch, k: i64) -> Self {
        let mut out = self.clone();
        out.fourier = OnceLock::new();
        let w = self.omega_l();
        out.eps[r.index()] += k as f64 * w;
        let taus: Vec<f64> = (0..self.grid_size()).map(|j| self.tau(j)).collect();
        for (v, tau) in out.states[r.index()].iter_mut().zip(taus) {
            *v *= cis(k as f64 * w * tau);
        }
        out
    }

    /// Zone index of the dominant Fourier component of `phi_r`.
    pub fn dominant_mode(&self, r: Branch) -> i64 {
        let coeffs = &self.fourier_table()[r.index()];
        let half = (coeffs.len() as i64 - 1) / 2;
        let (j, _) = coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| (j, norm_sqr(c)))
            .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        j as i64 - half
    }

    /// Re-gauge both states so their dominant Fourier component is the
    /// zero mode; for a weak drive this connects each state continuously
    /// to an undriven energy eigenstate.
    pub fn dominant_zone_gauge(&self) -> Self {
        let mut out = self.clone();
        for r in Branch::ALL {
            let mode = self.dominant_mode(r);
            if mode != 0 {
                out = out.shifted(r, -mode);
            }
        }
        out
    }

    /// Largest deviation of the L2 Gram matrix of `{phi_{r,n}}`,
    /// `|n| <= zones`, from the identity.
    pub fn orthonormality_defect(&self, zones: i64) -> f64 {
        let mut basis = Vec::new();
        for r in Branch::ALL {
            for n in -zones..=zones {
                basis.push(self.zone_state(r, n));
            }
        }
        let mut worst: f64 = 0.0;
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let g = l2_inner(a, b).expect("same grid");
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - C64::from(target)).norm());
            }
        }
        worst
    }

    /// `max_r |phi_r(T) - phi_r(0)|` using the monodromy matrix.
    pub fn periodicity_residual(&self) -> f64 {
        Branch::ALL
            .iter()
            .map(|&r| {
                let back = self.propagator.monodromy() * self.nu(r) * cis(self.quasi_energy(r) * self.period());
                norm_sqr(&(back - self.nu(r))).sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Matrix elements `<phi_{r,k}, O phi_{s,l}>_{L2}` of a periodic operator,
/// stored by zone difference `d = l - k` for `|d| <= n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableTable {
    n_max: i64,
    entries: [[Vec<C64>; 2]; 2],
}

impl ObservableTable {
    pub fn n_max(&self) -> i64 {
        self.n_max
    }

    /// Element for zone difference `d = l - k`; zero outside the table.
    pub fn by_difference(&self, r: Branch, s: Branch, d: i64) -> C64 {
        if d.abs() > self.n_max {
            return ZERO;
        }
        self.entries[r.index()][s.index()][(d + self.n_max) as usize]
    }

    pub fn get(&self, r: Branch, k: i64, s: Branch, l: i64) -> C64 {
        self.by_difference(r, s, l - k)
    }

    /// Largest violation of `O_{rs}[d] = conj(O_{sr}[-d])`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in Branch::ALL {
            for s in Branch::ALL {
                for d in -self.n_max..=self.n_max {
                    let a = self.by_difference(r, s, d);
                    let b = self.by_difference(s, r, -d).conj();
                    worst = worst.max((a - b).norm());
                }
            }
        }
        worst
    }
}

fn table_from_products(
    decomp: &FloquetDecomposition,
    left: &[Vec<Vec2>; 2],
    right: &[Vec<Vec2>; 2],
    n_max: i64,
) -> ObservableTable {
    let m = decomp.grid_size();
    let w = decomp.omega_l();
    let entries = Branch::ALL.map(|r| {
        Branch::ALL.map(|s| {
            let products: Vec<C64> = (0..m)
                .map(|k| inner(&left[r.index()][k], &right[s.index()][k]))
                .collect();
            (-n_max..=n_max)
                .map(|d| {
                    products
                        .iter()
                        .enumerate()
                        .map(|(k, p)| p * cis(d as f64 * w * decomp.tau(k)))
                        .sum::<C64>()
                        / m as f64
                })
                .collect()
        })
    });
    ObservableTable { n_max, entries }
}

/// Tabulate an operator given by its samples on the decomposition grid.
pub fn observable_table(decomp: &FloquetDecomposition, operator: &[Mat2], n_max: i64) -> Result<ObservableTable> {
    if operator.len() != decomp.grid_size() {
        return Err(Error::GridMismatch {
            left: operator.len(),
            right: decomp.grid_size(),
        });
    }
    let left = Branch::ALL.map(|r| decomp.state(r).to_vec());
    let right = Branch::ALL.map(|s| decomp.state(s).iter().zip(operator).map(|(v, o)| o * v).collect());
    Ok(table_from_products(decomp, &left, &right, n_max))
}

/// Table of `-i d/dtau` acting on the base states `phi_s` (spectral
/// derivative). The full number-operator element adds `l omega_L` on the
/// diagonal: `<phi_{r,k}, -i d_tau phi_{s,l}> = l omega_L delta + D_rs[l-k]`.
pub fn number_table(decomp: &FloquetDecomposition, n_max: i64) -> ObservableTable {
    let left = Branch::ALL.map(|r| decomp.state(r).to_vec());
    let right = Branch::ALL.map(|s| decomp.number_action_samples(s));
    table_from_products(decomp, &left, &right, n_max)
}

/// `<phi_{r,k}, O phi_{s,l}>` evaluated directly with explicit zone phases.
pub fn matrix_element(
    decomp: &FloquetDecomposition,
    operator: &[Mat2],
    r: Branch,
    k: i64,
    s: Branch,
    l: i64,
) -> Result<C64> {
    let left = decomp.zone_state(r, k);
    let right: Vec<Vec2> = decomp
        .zone_state(s, l)
        .iter()
        .zip(operator)
        .map(|(v, o)| o * v)
        .collect();
    l2_inner(&left, &right)
}

/// Largest deviation between table entries and direct evaluation over
/// all `k, l` in `-zones..=zones` with `|l - k| <= n_max`.
pub fn translation_defect(
    decomp: &FloquetDecomposition,
    operator: &[Mat2],
    table: &ObservableTable,
    zones: i64,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for r in Branch::ALL {
        for s in Branch::ALL {
            for k in -zones..=zones {
                for l in -zones..=zones {
                    if (l - k).abs() > table.n_max() {
                        continue;
                    }
                    let direct = matrix_element(decomp, operator, r, k, s, l)?;
                    worst = worst.max((direct - table.get(r, k, s, l)).norm());
                }
            }
        }
    }
    Ok(worst)
}

/// Residuals of the closed-system dressed embedding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedEmbeddingResidual {
    /// `max_tau |Psi(t, tau) - P_{tau,t} psi(t)|`.
    pub field: f64,
    /// `|psi(t) - Psi(t, tau = t)|`.
    pub diagonal: f64,
}

impl ClosedEmbeddingResidual {
    pub fn max(&self) -> f64 {
        self.field.max(self.diagonal)
    }
}

/// Compare the dressed solution built from the Floquet expansion with the
/// directly integrated qubit solution transported by the periodic part of
/// the propagator.
///
/// `psi0` is in the lab basis; `zones` bounds the Fourier sum.
pub fn verify_closed_embedding(
    decomp: &FloquetDecomposition,
    psi0: &Vec2,
    t: f64,
    zones: i64,
) -> Result<ClosedEmbeddingResidual> {
    let m = decomp.grid_size();
    let w = decomp.omega_l();
    // lifted initial condition Psi0(s) = P_{s,0} psi0
    let lifted: Vec<Vec2> = (0..m).map(|k| decomp.periodic_part(k) * psi0).collect();
    let mut coeffs = Vec::new();
    for r in Branch::ALL {
        for n in -zones..=zones {
            let c = l2_inner(&decomp.zone_state(r, n), &lifted)?;
            coeffs.push((r, n, c));
        }
    }
    let dressed_at = |tau: f64, phi: &dyn Fn(Branch) -> Vec2| -> Vec2 {
        coeffs
            .iter()
            .map(|&(r, n, c)| {
                let energy = decomp.quasi_energy(r) + n as f64 * w;
                phi(r) * (c * cis(-energy * t) * cis(n as f64 * w * tau))
            })
            .sum()
    };

    let psi_t = propagate_to(decomp.spec(), psi0, t, m);
    let phi_t = Branch::ALL.map(|r| decomp.state_at(r, t));
    let overlaps = Branch::ALL.map(|r| inner(&phi_t[r.index()], &psi_t));

    let mut field: f64 = 0.0;
    for k in 0..m {
        let tau = decomp.tau(k);
        let psi_dressed = dressed_at(tau, &|r| decomp.state(r)[k]);
        let transported: Vec2 = Branch::ALL
            .iter()
            .map(|&r| decomp.state(r)[k] * overlaps[r.index()])
            .sum();
        field = field.max(norm_sqr(&(psi_dressed - transported)).sqrt());
    }
    let on_diagonal = dressed_at(t, &|r| phi_t[r.index()]);
    let diagonal = norm_sqr(&(on_diagonal - psi_t)).sqrt();
    Ok(ClosedEmbeddingResidual { field, diagonal })
}
