use std::f64::consts::PI;

use dressed_qubit::bath::{fill_rates, RateModel};
use dressed_qubit::channels::ChannelRegistry;
use dressed_qubit::dynamics::master::{
    lindblad_blocks, lindblad_qubit, pauli_collapsed, pauli_ladder, stationary_state, BlockDensity, LadderPopulations,
    PauliRates,
};
use dressed_qubit::dynamics::{
    channel_weights, drift_spectrum, evolve_dressed_trajectory, evolve_qubit_trajectory, run_ensemble,
    sample_waiting_time, select_channel, DressedState, JumpState, QubitState, TrajectoryConfig, WaitingTime,
};
use dressed_qubit::linalg::{Mat2, Vec2, C64};
use dressed_qubit::presets::{constant_drive_preset, monochromatic_preset};
use dressed_qubit::thermo::MeanSe;
use dressed_qubit::Branch;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn mono(gamma0: f64, beta: f64) -> ChannelRegistry {
    let p = monochromatic_preset(1.0, 0.8, 0.1).unwrap();
    fill_rates(&p.registry, &RateModel::Phenomenological { gamma0, beta }).unwrap()
}

fn constant(gamma0: f64, beta: f64) -> ChannelRegistry {
    let p = constant_drive_preset(1.0, 2.0 * PI / 0.8).unwrap();
    fill_rates(&p.registry, &RateModel::Phenomenological { gamma0, beta }).unwrap()
}

fn mixed_state() -> QubitState {
    QubitState::new(C64::new(0.6, 0.0), C64::new(0.0, 0.8))
}

#[test]
fn waiting_times_from_a_floquet_state_are_exponential() {
    let reg = constant(0.5, 1.0);
    let drift = drift_spectrum(&reg);
    let rate = drift.gamma_eff[(0, 0)].re;
    let plus = QubitState::floquet(Branch::Plus);
    let mut rng = ChaCha20Rng::seed_from_u64(17);
    let n = 100_000;
    let xs: Vec<f64> = (0..n)
        .map(
            |_| match sample_waiting_time(&plus, &drift, 1.0 - rng.random::<f64>(), f64::INFINITY) {
                WaitingTime::At(t) => t,
                WaitingTime::NoJumpWithinHorizon => panic!("finite rate must jump"),
            },
        )
        .collect();
    let m = MeanSe::from_samples(&xs);
    let sigma = 1.0 / rate / (n as f64).sqrt();
    assert!(
        (m.mean - 1.0 / rate).abs() < 3.0 * sigma,
        "{} vs {}",
        m.mean,
        1.0 / rate
    );
}

#[test]
fn channel_selection_follows_the_weights() {
    let weights = [0.1, 0.0, 0.2, 0.3, 0.4];
    let mut counts = [0usize; 5];
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let n = 100_000;
    for _ in 0..n {
        counts[select_channel(&weights, rng.random::<f64>(), 0.0).unwrap()] += 1;
    }
    assert_eq!(counts[1], 0);
    let chi2: f64 = weights
        .iter()
        .zip(&counts)
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, &c)| {
            let e = w * n as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    // 3 degrees of freedom, p = 0.001
    assert!(chi2 < 16.27, "chi2 = {chi2}");
}

#[test]
fn lindblad_preserves_trace_and_fixes_the_stationary_state() {
    let reg = mono(0.3, 1.0);
    let times: Vec<f64> = (1..=5).map(|k| k as f64).collect();
    let rhos = lindblad_qubit(&reg, &mixed_state().density(), &times, 0.005).unwrap();
    for rho in &rhos {
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        assert!((rho - rho.adjoint()).norm() < 1e-12);
    }
    let rho_s = stationary_state(&reg).unwrap();
    let later = lindblad_qubit(&reg, &rho_s, &[10.0], 0.005).unwrap();
    assert!((later[0] - rho_s).norm() < 1e-9);
}

#[test]
fn block_equations_sum_to_the_qubit_equation() {
    let reg = mono(0.3, 1.0);
    let rho0 = mixed_state().density();
    let times = [1.0, 2.5, 5.0];
    let qubit = lindblad_qubit(&reg, &rho0, &times, 0.005).unwrap();
    let blocks = lindblad_blocks(&reg, &BlockDensity::single_zone(rho0, 0, 16), &times, 0.005).unwrap();
    for (q, b) in qubit.iter().zip(&blocks) {
        assert!((q - b.sum()).norm() < 1e-9);
    }
}

#[test]
fn block_diagonals_follow_the_ladder_pauli_equation() {
    let reg = mono(0.3, 1.0);
    let rates = PauliRates::from_registry(&reg);
    let rho0 = Mat2::new(C64::from(0.3), C64::from(0.0), C64::from(0.0), C64::from(0.7));
    let mut init = LadderPopulations::zeros(16);
    init.set(Branch::Plus, 0, 0.3);
    init.set(Branch::Minus, 0, 0.7);
    let times = [0.5, 2.0, 4.0];
    let ladder = pauli_ladder(&rates, &init, &times, 0.005).unwrap();
    let blocks = lindblad_blocks(&reg, &BlockDensity::single_zone(rho0, 0, 16), &times, 0.005).unwrap();
    let collapsed = pauli_collapsed(&rates, [0.3, 0.7], &times, 0.005).unwrap();
    for ((l, b), c) in ladder.iter().zip(&blocks).zip(&collapsed) {
        for zone in l.zones() {
            let blk = b.block(zone);
            assert!((l.get(Branch::Plus, zone) - blk[(0, 0)].re).abs() < 1e-9);
            assert!((l.get(Branch::Minus, zone) - blk[(1, 1)].re).abs() < 1e-9);
        }
        let s = l.collapsed();
        assert!((s[0] - c[0]).abs() < 1e-9 && (s[1] - c[1]).abs() < 1e-9);
    }
}

#[test]
fn dressed_trajectories_are_zone_translation_covariant() {
    let reg = mono(0.3, 1.0);
    let drift = drift_spectrum(&reg);
    let cfg = TrajectoryConfig::uniform(20.0, 11);
    let psi = mixed_state();
    let m = 5;
    for i in 0..20 {
        let a =
            evolve_dressed_trajectory(&reg, &drift, &DressedState::single_zone(psi.c, 0).unwrap(), &cfg, 9, i).unwrap();
        let b =
            evolve_dressed_trajectory(&reg, &drift, &DressedState::single_zone(psi.c, m).unwrap(), &cfg, 9, i).unwrap();
        assert_eq!(a.events, b.events);
        for (x, y) in a.checkpoints.iter().zip(&b.checkpoints) {
            for zone in x.state.occupied_zones() {
                assert!((x.state.block(zone) - y.state.block(zone + m)).norm() < 1e-12);
            }
            assert_eq!(x.state.occupied_zones().len(), y.state.occupied_zones().len());
        }
    }
}

#[test]
fn two_zone_superposition_averages_to_the_block_equations() {
    let reg = mono(0.3, 1.0);
    let drift = drift_spectrum(&reg);
    let a = Vec2::new(C64::new(0.6, 0.0), C64::new(0.0, 0.0));
    let b = Vec2::new(C64::new(0.0, 0.0), C64::new(0.0, 0.8));
    let init = DressedState::from_blocks(&[(0, a), (1, b)]).unwrap();
    let t = 4.0;
    let cfg = TrajectoryConfig {
        t_final: t,
        checkpoints: vec![t],
    };
    let n = 4000;
    let records = run_ensemble(n, 8, |i| evolve_dressed_trajectory(&reg, &drift, &init, &cfg, 31, i)).unwrap();

    let mut rho0 = BlockDensity::zeros(16);
    rho0.blocks[16] = a * a.adjoint();
    rho0.blocks[17] = b * b.adjoint();
    let exact = &lindblad_blocks(&reg, &rho0, &[t], 0.005).unwrap()[0];
    for zone in -4..=5 {
        for r in Branch::ALL {
            let xs: Vec<f64> = records
                .iter()
                .map(|rec| rec.checkpoints[0].state.population(r, zone))
                .collect();
            let m = MeanSe::from_samples(&xs);
            let target = exact.block(zone)[(r.index(), r.index())].re;
            assert!(
                m.within(target, 5.0, 1e-3),
                "zone {zone} {r}: {} +- {} vs {target}",
                m.mean,
                m.stderr
            );
        }
    }
}

#[test]
fn checkpoint_states_are_normalised() {
    let reg = mono(0.3, 1.0);
    let drift = drift_spectrum(&reg);
    let cfg = TrajectoryConfig::uniform(15.0, 31);
    for i in 0..50 {
        let rec = evolve_qubit_trajectory(&reg, &drift, &mixed_state(), &cfg, 5, i).unwrap();
        for c in &rec.checkpoints {
            assert!((c.state.norm_sqr() - 1.0).abs() < 1e-12);
            assert!(c.norm <= 1.0 + 1e-12);
        }
    }
}

#[test]
fn ensemble_does_not_depend_on_worker_count() {
    let reg = mono(0.3, 1.0);
    let drift = drift_spectrum(&reg);
    let cfg = TrajectoryConfig::uniform(10.0, 5);
    let run = |w| {
        run_ensemble(64, w, |i| {
            evolve_qubit_trajectory(&reg, &drift, &mixed_state(), &cfg, 77, i)
        })
        .unwrap()
    };
    assert_eq!(run(1), run(4));
}

/// Small-step Bernoulli unravelling of the same master equation.
fn bernoulli_jump_count(
    reg: &ChannelRegistry,
    gamma_eff: &Mat2,
    t_final: f64,
    dt: f64,
    rng: &mut ChaCha20Rng,
) -> usize {
    let mut psi = mixed_state();
    let step = Mat2::identity() - gamma_eff * C64::from(0.5 * dt);
    let mut jumps = 0;
    for _ in 0..(t_final / dt).round() as usize {
        let w = channel_weights(reg, &psi);
        let total: f64 = w.iter().sum();
        if rng.random::<f64>() < total * dt {
            let k = select_channel(&w, rng.random::<f64>(), 0.0).unwrap();
            psi = psi.apply_channel(reg.channel(k)).unwrap();
            jumps += 1;
        } else {
            psi.transform(&step);
        }
        psi.normalize();
    }
    jumps
}

#[test]
fn waiting_time_sampler_matches_small_step_scheme() {
    let reg = mono(0.3, 1.0);
    let drift = drift_spectrum(&reg);
    let t_final = 5.0;
    let cfg = TrajectoryConfig {
        t_final,
        checkpoints: vec![t_final],
    };
    let n = 4000;
    let exact: Vec<f64> = run_ensemble(n, 8, |i| {
        evolve_qubit_trajectory(&reg, &drift, &mixed_state(), &cfg, 1, i)
    })
    .unwrap()
    .iter()
    .map(|r| r.events.len() as f64)
    .collect();
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let approx: Vec<f64> = (0..n)
        .map(|_| bernoulli_jump_count(&reg, &drift.gamma_eff, t_final, 1e-3, &mut rng) as f64)
        .collect();
    let (a, b) = (MeanSe::from_samples(&exact), MeanSe::from_samples(&approx));
    let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
    assert!((a.mean - b.mean).abs() < 5.0 * se, "{} vs {} (se {se})", a.mean, b.mean);
}
