//! Lindblad and Pauli master equations in the Floquet interaction picture,
//! for the qubit and for the zone ladder.
//!
//! All solvers use fixed-step RK4 on the same step schedule, so linear
//! relations between them (block sums, diagonals) hold to rounding.

use crate::channels::ChannelRegistry;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, Mat2, C64};
use crate::Branch;

const POSITIVITY_TOL: f64 = 1e-9;
const MAX_HALVINGS: u32 = 12;
const LEAK_TOL: f64 = 1e-10;

/// One population transfer `(from, zone l) -> (to, zone l - n)` at rate
/// `gamma(omega) |alpha|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub channel: usize,
    pub to: Branch,
    pub from: Branch,
    pub n: i64,
    pub omega: f64,
    pub rate: f64,
}

/// Rates `W_n(r|s)` of the Pauli equations.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliRates {
    pub transitions: Vec<Transition>,
    /// Total escape rate of each label, the diagonal of `Gamma_eff`.
    pub escape: [f64; 2],
}

impl PauliRates {
    pub fn from_registry(registry: &ChannelRegistry) -> Self {
        let mut transitions = Vec::new();
        let mut escape = [0.0; 2];
        for c in registry.channels() {
            for e in &c.entries {
                let rate = c.gamma * e.alpha.norm_sqr();
                escape[e.from.index()] += rate;
                transitions.push(Transition {
                    channel: c.id,
                    to: e.to,
                    from: e.from,
                    n: c.n_omega,
                    omega: c.omega,
                    rate,
                });
            }
        }
        PauliRates { transitions, escape }
    }

    /// Collapsed rate `W(r|s) = sum_n W_n(r|s)`.
    pub fn collapsed(&self, to: Branch, from: Branch) -> f64 {
        self.transitions
            .iter()
            .filter(|t| t.to == to && t.from == from)
            .map(|t| t.rate)
            .sum()
    }
}

/// Stationary populations `(P_+, P_-) = (Gamma_+, Gamma_-) / (Gamma_+ + Gamma_-)`
/// with `Gamma_r` the total rate into `r` from the other label.
pub fn stationary_populations(registry: &ChannelRegistry) -> Result<[f64; 2]> {
    let rates = PauliRates::from_registry(registry);
    let into_plus = rates.collapsed(Branch::Plus, Branch::Minus);
    let into_minus = rates.collapsed(Branch::Minus, Branch::Plus);
    let total = into_plus + into_minus;
    if !(total > 0.0) {
        return Err(Error::InvalidParameter(
            "no transitions between Floquet states; stationary state undefined".into(),
        ));
    }
    Ok([into_plus / total, into_minus / total])
}

pub fn stationary_state(registry: &ChannelRegistry) -> Result<Mat2> {
    let p = stationary_populations(registry)?;
    Ok(Mat2::new(
        C64::from(p[0]),
        C64::from(0.0),
        C64::from(0.0),
        C64::from(p[1]),
    ))
}

/// Step counts and sizes between consecutive output times starting at 0.
fn schedule(times: &[f64], dt: f64) -> Result<Vec<(usize, f64)>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {dt}")));
    }
    let mut out = Vec::with_capacity(times.len());
    let mut prev = 0.0;
    for &t in times {
        if t < prev {
            return Err(Error::InvalidParameter("output times must be non-decreasing".into()));
        }
        let span = t - prev;
        let n = (span / dt).ceil() as usize;
        out.push(if n == 0 { (0, 0.0) } else { (n, span / n as f64) });
        prev = t;
    }
    Ok(out)
}

fn rk4<T: Clone>(x: &T, h: f64, rhs: &impl Fn(&T) -> T, axpy: &impl Fn(&T, f64, &T) -> T) -> T {
    let k1 = rhs(x);
    let k2 = rhs(&axpy(x, 0.5 * h, &k1));
    let k3 = rhs(&axpy(x, 0.5 * h, &k2));
    let k4 = rhs(&axpy(x, h, &k3));
    let mut out = axpy(x, h / 6.0, &k1);
    out = axpy(&out, h / 3.0, &k2);
    out = axpy(&out, h / 3.0, &k3);
    axpy(&out, h / 6.0, &k4)
}

/// Advance through the schedule, retrying a step with halved size while
/// `accept` rejects the result.
fn integrate<T: Clone>(
    x0: &T,
    times: &[f64],
    dt: f64,
    rhs: impl Fn(&T) -> T,
    axpy: impl Fn(&T, f64, &T) -> T,
    accept: impl Fn(&T) -> std::result::Result<(), String>,
) -> Result<Vec<T>> {
    let mut x = x0.clone();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for (n, h) in schedule(times, dt)? {
        for _ in 0..n {
            let mut pieces = 1u32;
            loop {
                let sub = h / pieces as f64;
                let mut y = x.clone();
                for _ in 0..pieces {
                    y = rk4(&y, sub, &rhs, &axpy);
                }
                match accept(&y) {
                    Ok(()) => {
                        x = y;
                        break;
                    }
                    Err(detail) if pieces >= 1 << MAX_HALVINGS => {
                        return Err(Error::StepRejected { t, detail });
                    }
                    Err(_) => pieces *= 2,
                }
            }
            t += h;
        }
        out.push(x.clone());
    }
    Ok(out)
}

fn operators(registry: &ChannelRegistry) -> Vec<(f64, i64, Mat2)> {
    registry
        .channels()
        .iter()
        .filter(|c| c.gamma > 0.0)
        .map(|c| (c.gamma, c.n_omega, c.matrix()))
        .collect()
}

fn anticommutator_half(g: &Mat2, rho: &Mat2) -> Mat2 {
    (g * rho + rho * g) * C64::from(0.5)
}

fn min_eigenvalue(rho: &Mat2) -> f64 {
    let h = (rho + rho.adjoint()) * C64::from(0.5);
    hermitian_eigen(&h).0[0]
}

/// Integrate the qubit Lindblad equation; returns `rho(t)` at each time.
pub fn lindblad_qubit(registry: &ChannelRegistry, rho0: &Mat2, times: &[f64], dt: f64) -> Result<Vec<Mat2>> {
    let ops = operators(registry);
    let g = registry.effective_decay();
    integrate(
        rho0,
        times,
        dt,
        |rho: &Mat2| {
            let mut d = -anticommutator_half(&g, rho);
            for (gamma, _, a) in &ops {
                d += a * rho * a.adjoint() * C64::from(*gamma);
            }
            d
        },
        |x, h, k| x + k * C64::from(h),
        |rho| {
            let m = min_eigenvalue(rho);
            if m < -POSITIVITY_TOL {
                Err(format!("eigenvalue {m} below -{POSITIVITY_TOL}"))
            } else {
                Ok(())
            }
        },
    )
}

/// Zone-resolved density blocks `rho_n` on `[lo, lo + len - 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDensity {
    pub lo: i64,
    pub blocks: Vec<Mat2>,
}

impl BlockDensity {
    pub fn zeros(half: i64) -> Self {
        BlockDensity {
            lo: -half,
            blocks: vec![Mat2::zeros(); (2 * half + 1) as usize],
        }
    }

    pub fn single_zone(rho: Mat2, zone: i64, half: i64) -> Self {
        let mut b = BlockDensity::zeros(half);
        b.blocks[(zone + half) as usize] = rho;
        b
    }

    pub fn block(&self, zone: i64) -> Mat2 {
        let i = zone - self.lo;
        if i < 0 || i >= self.blocks.len() as i64 {
            Mat2::zeros()
        } else {
            self.blocks[i as usize]
        }
    }

    pub fn zones(&self) -> std::ops::RangeInclusive<i64> {
        self.lo..=self.lo + self.blocks.len() as i64 - 1
    }

    pub fn trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.trace().re).sum()
    }

    pub fn sum(&self) -> Mat2 {
        self.blocks.iter().sum()
    }
}

/// Integrate the coupled block equations on a fixed window; mass leaving
/// the window beyond `1e-10` is an error.
pub fn lindblad_blocks(
    registry: &ChannelRegistry,
    init: &BlockDensity,
    times: &[f64],
    dt: f64,
) -> Result<Vec<BlockDensity>> {
    let ops = operators(registry);
    let g = registry.effective_decay();
    let trace0 = init.trace();
    let out = integrate(
        init,
        times,
        dt,
        |x: &BlockDensity| {
            let mut d = BlockDensity {
                lo: x.lo,
                blocks: x.blocks.iter().map(|rho| -anticommutator_half(&g, rho)).collect(),
            };
            for (i, zone) in x.zones().enumerate() {
                for (gamma, n, a) in &ops {
                    let src = x.block(zone + n);
                    d.blocks[i] += a * src * a.adjoint() * C64::from(*gamma);
                }
            }
            d
        },
        |x, h, k| BlockDensity {
            lo: x.lo,
            blocks: x
                .blocks
                .iter()
                .zip(&k.blocks)
                .map(|(a, b)| a + b * C64::from(h))
                .collect(),
        },
        |_| Ok(()),
    )?;
    for (t, b) in times.iter().zip(&out) {
        let loss = trace0 - b.trace();
        if loss > LEAK_TOL {
            return Err(Error::WindowOverflow {
                detail: format!("block window lost {loss:e} of the trace by t = {t}"),
            });
        }
    }
    Ok(out)
}

/// Populations `P(r, n)` on `[lo, lo + len - 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderPopulations {
    pub lo: i64,
    pub p: Vec<[f64; 2]>,
}

impl LadderPopulations {
    pub fn zeros(half: i64) -> Self {
        LadderPopulations {
            lo: -half,
            p: vec![[0.0; 2]; (2 * half + 1) as usize],
        }
    }

    pub fn get(&self, r: Branch, zone: i64) -> f64 {
        let i = zone - self.lo;
        if i < 0 || i >= self.p.len() as i64 {
            0.0
        } else {
            self.p[i as usize][r.index()]
        }
    }

    pub fn set(&mut self, r: Branch, zone: i64, v: f64) {
        let i = (zone - self.lo) as usize;
        self.p[i][r.index()] = v;
    }

    pub fn zones(&self) -> std::ops::RangeInclusive<i64> {
        self.lo..=self.lo + self.p.len() as i64 - 1
    }

    pub fn total(&self) -> f64 {
        self.p.iter().map(|x| x[0] + x[1]).sum()
    }

    pub fn collapsed(&self) -> [f64; 2] {
        let mut out = [0.0; 2];
        for x in &self.p {
            out[0] += x[0];
            out[1] += x[1];
        }
        out
    }
}

/// Pauli equation on the zone ladder.
pub fn pauli_ladder(
    rates: &PauliRates,
    init: &LadderPopulations,
    times: &[f64],
    dt: f64,
) -> Result<Vec<LadderPopulations>> {
    let total0 = init.total();
    let out = integrate(
        init,
        times,
        dt,
        |x: &LadderPopulations| {
            let mut d = LadderPopulations {
                lo: x.lo,
                p: x.p
                    .iter()
                    .map(|p| [-rates.escape[0] * p[0], -rates.escape[1] * p[1]])
                    .collect(),
            };
            for (i, zone) in x.zones().enumerate() {
                for tr in &rates.transitions {
                    d.p[i][tr.to.index()] += tr.rate * x.get(tr.from, zone + tr.n);
                }
            }
            d
        },
        |x, h, k| LadderPopulations {
            lo: x.lo,
            p: x.p
                .iter()
                .zip(&k.p)
                .map(|(a, b)| [a[0] + h * b[0], a[1] + h * b[1]])
                .collect(),
        },
        |_| Ok(()),
    )?;
    for (t, p) in times.iter().zip(&out) {
        let loss = total0 - p.total();
        if loss > LEAK_TOL {
            return Err(Error::WindowOverflow {
                detail: format!("ladder window lost {loss:e} of the probability by t = {t}"),
            });
        }
    }
    Ok(out)
}

/// Pauli equation for the collapsed populations `P(r)`.
pub fn pauli_collapsed(rates: &PauliRates, init: [f64; 2], times: &[f64], dt: f64) -> Result<Vec<[f64; 2]>> {
    let w = [
        [
            rates.collapsed(Branch::Plus, Branch::Plus),
            rates.collapsed(Branch::Plus, Branch::Minus),
        ],
        [
            rates.collapsed(Branch::Minus, Branch::Plus),
            rates.collapsed(Branch::Minus, Branch::Minus),
        ],
    ];
    integrate(
        &init,
        times,
        dt,
        |p: &[f64; 2]| [0, 1].map(|r| w[r][0] * p[0] + w[r][1] * p[1] - rates.escape[r] * p[r]),
        |x, h, k| [x[0] + h * k[0], x[1] + h * k[1]],
        |_| Ok(()),
    )
}
