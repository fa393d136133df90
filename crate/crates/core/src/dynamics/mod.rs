//! Quantum-jump trajectories and the master equations they average to.
//!
//! Between jumps a state follows `e^{-Gamma_eff t / 2}`, which is exact
//! because the effective decay operator is time independent in the
//! Floquet interaction picture. Jump times are drawn by inverting the norm
//! survival function.

pub mod master;
pub mod state;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::channels::{ChannelRegistry, JumpChannel};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, Mat2, C64};

pub use state::{embed_state, embedding_weight_defect, DressedState, JumpState, QubitState};

/// Eigen-decomposition of `Gamma_eff = sum gamma A^dagger A`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftSpectrum {
    pub gamma_eff: Mat2,
    /// Non-negative eigenvalues in ascending order.
    pub values: [f64; 2],
    /// Column eigenvectors.
    pub vectors: Mat2,
}

impl DriftSpectrum {
    /// No-jump propagator `e^{-Gamma_eff t / 2}`.
    pub fn propagator(&self, t: f64) -> Mat2 {
        let d = Mat2::new(
            C64::from((-0.5 * self.values[0] * t).exp()),
            C64::from(0.0),
            C64::from(0.0),
            C64::from((-0.5 * self.values[1] * t).exp()),
        );
        self.vectors * d * self.vectors.adjoint()
    }

    pub fn max_rate(&self) -> f64 {
        self.values[1]
    }
}

pub fn drift_spectrum(registry: &ChannelRegistry) -> DriftSpectrum {
    let gamma_eff = registry.effective_decay();
    let (values, vectors) = hermitian_eigen(&gamma_eff);
    DriftSpectrum {
        gamma_eff,
        values: values.map(|v| v.max(0.0)),
        vectors,
    }
}

/// Normalised survival `S(t) = sum w_i e^{-l_i t} / sum w_i`.
pub fn survival(weights: [f64; 2], rates: [f64; 2], t: f64) -> f64 {
    let total = weights[0] + weights[1];
    (weights[0] * (-rates[0] * t).exp() + weights[1] * (-rates[1] * t).exp()) / total
}

/// Solve `S(t) = u` for `u` in `(0, 1]`; `None` when the survival never
/// drops to `u`.
pub fn solve_survival(weights: [f64; 2], rates: [f64; 2], u: f64) -> Option<f64> {
    let total = weights[0] + weights[1];
    let w = [weights[0] / total, weights[1] / total];
    let floor: f64 = (0..2).filter(|&i| rates[i] == 0.0).map(|i| w[i]).sum();
    let fastest = (0..2).filter(|&i| w[i] > 0.0).map(|i| rates[i]).fold(0.0, f64::max);
    if u <= floor || fastest == 0.0 {
        return None;
    }
    if u >= 1.0 {
        return Some(0.0);
    }
    let f = |t: f64| w[0] * (-rates[0] * t).exp() + w[1] * (-rates[1] * t).exp() - u;
    let df = |t: f64| -(w[0] * rates[0] * (-rates[0] * t).exp() + w[1] * rates[1] * (-rates[1] * t).exp());
    // S is convex and decreasing, and S(t0) >= u, so Newton from t0
    // increases monotonically onto the root
    let mut t = -u.ln() / fastest;
    for _ in 0..200 {
        let (v, d) = (f(t), df(t));
        if v == 0.0 {
            return Some(t);
        }
        if v < 0.0 || d == 0.0 || !d.is_finite() {
            break;
        }
        let next = t - v / d;
        if !(next > t) || (next - t) <= 1e-15 * next {
            return Some(next.max(t));
        }
        t = next;
    }
    Some(bisect_survival(w, rates, u, t))
}

fn bisect_survival(w: [f64; 2], rates: [f64; 2], u: f64, guess: f64) -> f64 {
    let f = |t: f64| w[0] * (-rates[0] * t).exp() + w[1] * (-rates[1] * t).exp() - u;
    let mut lo = 0.0;
    let mut hi = guess.max(1e-300);
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaitingTime {
    At(f64),
    NoJumpWithinHorizon,
}

/// Waiting time from a normalised state until the next jump.
pub fn sample_waiting_time<S: JumpState>(state: &S, drift: &DriftSpectrum, u: f64, horizon: f64) -> WaitingTime {
    match solve_survival(state.eigen_weights(&drift.vectors), drift.values, u) {
        Some(t) if t <= horizon => WaitingTime::At(t),
        _ => WaitingTime::NoJumpWithinHorizon,
    }
}

/// `gamma(omega) ||A(omega) psi||^2` for every channel.
pub fn channel_weights<S: JumpState>(registry: &ChannelRegistry, state: &S) -> Vec<f64> {
    registry
        .channels()
        .iter()
        .map(|c| c.gamma * state.jump_weight(c))
        .collect()
}

/// Categorical draw with `u` in `[0, 1)`.
pub fn select_channel(weights: &[f64], u: f64, t: f64) -> Result<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::NumericalLeak { t });
    }
    let target = u * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if acc > target && *w > 0.0 {
            return Ok(i);
        }
    }
    // rounding left target at the very top
    Ok(weights.iter().rposition(|w| *w > 0.0).expect("positive total"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub t: f64,
    pub channel: usize,
    pub omega: f64,
    pub n_omega: i64,
    pub weight_before: f64,
    pub mu_after: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint<S> {
    pub t: f64,
    pub state: S,
    pub mu: i64,
    /// Norm before renormalisation of the stored state.
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord<S> {
    pub index: u64,
    pub seed: u64,
    pub initial: S,
    pub events: Vec<JumpEvent>,
    pub checkpoints: Vec<Checkpoint<S>>,
    pub t_final: f64,
    pub final_state: S,
}

impl<S> TrajectoryRecord<S> {
    /// Photon counter just after time `t`.
    pub fn mu_at(&self, t: f64) -> i64 {
        self.events
            .iter()
            .take_while(|e| e.t <= t)
            .last()
            .map_or(0, |e| e.mu_after)
    }

    pub fn final_mu(&self) -> i64 {
        self.events.last().map_or(0, |e| e.mu_after)
    }

    /// Heat released up to and including time `t`.
    pub fn heat_until(&self, t: f64) -> f64 {
        self.events.iter().take_while(|e| e.t <= t).map(|e| e.omega).sum()
    }
}

/// Output times and horizon of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryConfig {
    pub t_final: f64,
    pub checkpoints: Vec<f64>,
}

impl TrajectoryConfig {
    /// `count` equally spaced checkpoints on `[0, t_final]`.
    pub fn uniform(t_final: f64, count: usize) -> Self {
        let checkpoints = if count <= 1 {
            vec![t_final]
        } else {
            (0..count).map(|i| t_final * i as f64 / (count - 1) as f64).collect()
        };
        TrajectoryConfig { t_final, checkpoints }
    }
}

/// Independent stream for trajectory `index` under `master_seed`.
pub fn trajectory_rng(master_seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Uniform draw in `(0, 1]`.
fn open_uniform(rng: &mut ChaCha20Rng) -> f64 {
    1.0 - rng.random::<f64>()
}

fn snapshot<S: JumpState>(state: &S, drift: &DriftSpectrum, dt: f64) -> (S, f64) {
    let mut s = state.clone();
    s.transform(&drift.propagator(dt));
    let norm = s.norm_sqr().sqrt();
    s.scale(1.0 / norm);
    (s, norm)
}

/// Evolve one trajectory in either representation.
pub fn evolve_trajectory<S: JumpState>(
    registry: &ChannelRegistry,
    drift: &DriftSpectrum,
    initial: &S,
    config: &TrajectoryConfig,
    master_seed: u64,
    index: u64,
) -> Result<TrajectoryRecord<S>> {
    let mut rng = trajectory_rng(master_seed, index);
    let mut state = initial.clone();
    state.normalize();
    let mut t = 0.0;
    let mut mu = 0i64;
    let mut events = Vec::new();
    let mut checkpoints = Vec::with_capacity(config.checkpoints.len());
    let mut next = 0;
    loop {
        let u = open_uniform(&mut rng);
        let wait = sample_waiting_time(&state, drift, u, config.t_final - t);
        let horizon = match wait {
            WaitingTime::At(w) => t + w,
            WaitingTime::NoJumpWithinHorizon => config.t_final,
        };
        while next < config.checkpoints.len() && config.checkpoints[next] <= horizon {
            let tc = config.checkpoints[next];
            let (s, norm) = snapshot(&state, drift, tc - t);
            checkpoints.push(Checkpoint {
                t: tc,
                state: s,
                mu,
                norm,
            });
            next += 1;
        }
        let WaitingTime::At(w) = wait else { break };
        let t_jump = t + w;
        state.transform(&drift.propagator(w));
        state.normalize();
        let weights = channel_weights(registry, &state);
        let id = select_channel(&weights, rng.random::<f64>(), t_jump)?;
        let channel: &JumpChannel = registry.channel(id);
        let weight = state.jump_weight(channel);
        let mut jumped = state.apply_channel(channel)?;
        jumped.scale(1.0 / weight.sqrt());
        state = jumped;
        mu += channel.n_omega;
        t = t_jump;
        events.push(JumpEvent {
            t,
            channel: id,
            omega: channel.omega,
            n_omega: channel.n_omega,
            weight_before: weight,
            mu_after: mu,
        });
    }
    let (final_state, _) = snapshot(&state, drift, config.t_final - t);
    Ok(TrajectoryRecord {
        index,
        seed: master_seed,
        initial: initial.clone(),
        events,
        checkpoints,
        t_final: config.t_final,
        final_state,
    })
}

pub fn evolve_qubit_trajectory(
    registry: &ChannelRegistry,
    drift: &DriftSpectrum,
    psi0: &QubitState,
    config: &TrajectoryConfig,
    master_seed: u64,
    index: u64,
) -> Result<TrajectoryRecord<QubitState>> {
    evolve_trajectory(registry, drift, psi0, config, master_seed, index)
}

pub fn evolve_dressed_trajectory(
    registry: &ChannelRegistry,
    drift: &DriftSpectrum,
    psi0: &DressedState,
    config: &TrajectoryConfig,
    master_seed: u64,
    index: u64,
) -> Result<TrajectoryRecord<DressedState>> {
    evolve_trajectory(registry, drift, psi0, config, master_seed, index)
}

/// Run `count` trajectories on `workers` threads; results are ordered by
/// trajectory index whatever the scheduling.
pub fn run_ensemble<T, F>(count: u64, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| (0..count).into_par_iter().map(&f).collect())
}
