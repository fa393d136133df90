use std::f64::consts::PI;

use dressed_qubit::channels::{apply_jump_qubit, compute_alpha, enumerate_channels, DEFAULT_PRUNE_TOL};
use dressed_qubit::floquet::{
    brillouin_fold, floquet_decompose, l2_inner, observable_table, translation_defect, verify_closed_embedding,
    DriveSpec,
};
use dressed_qubit::linalg::{sigma_z, Vec2, C64};
use dressed_qubit::presets::{constant_drive_preset, monochromatic_preset, MonochromaticClosedForm};
use dressed_qubit::{Branch, Error};
use proptest::prelude::*;

fn mono_spec() -> DriveSpec {
    DriveSpec::monochromatic(1.0, 0.8, 0.1)
}

#[test]
fn monochromatic_propagator_is_unitary_and_states_periodic() {
    let d = floquet_decompose(&mono_spec(), 1024).unwrap();
    assert!(d.propagator().max_unitarity_deviation() < 1e-10);
    assert!(d.periodicity_residual() < 1e-10);
    assert!(d.orthonormality_defect(3) < 1e-10);
}

#[test]
fn numeric_states_match_closed_form_up_to_phase() {
    let d = floquet_decompose(&mono_spec(), 1024).unwrap();
    let p = monochromatic_preset(1.0, 0.8, 0.1).unwrap();
    for r in Branch::ALL {
        let overlap = l2_inner(d.state(r), p.decomposition.state(r)).unwrap().norm();
        assert!((overlap - 1.0).abs() < 1e-8, "{r}: {overlap}");
    }
}

#[test]
fn closed_embedding_for_a_generic_state() {
    let d = floquet_decompose(&mono_spec(), 1024).unwrap();
    let mut psi = Vec2::new(C64::new(0.3, -0.4), C64::new(0.5, 0.2));
    psi /= C64::from(psi.norm());
    let t = 3.7 * d.period();
    let res = verify_closed_embedding(&d, &psi, t, 12).unwrap();
    assert!(res.max() < 1e-8, "{res:?}");
}

#[test]
fn sigma_z_table_is_translation_invariant() {
    let d = floquet_decompose(&mono_spec(), 512).unwrap();
    let sz = vec![sigma_z(); d.grid_size()];
    let table = observable_table(&d, &sz, 6).unwrap();
    assert!(translation_defect(&d, &sz, &table, 3).unwrap() < 1e-10);
    assert!(table.hermiticity_defect() < 1e-12);
}

#[test]
fn channel_frequencies_do_not_depend_on_gauge() {
    let d = floquet_decompose(&mono_spec(), 512).unwrap();
    let freqs = |d: &dressed_qubit::floquet::FloquetDecomposition| -> Vec<f64> {
        let a = compute_alpha(d, 8, DEFAULT_PRUNE_TOL).unwrap();
        enumerate_channels(&a, d)
            .unwrap()
            .channels()
            .iter()
            .map(|c| c.omega)
            .collect()
    };
    let base = freqs(&d);
    assert_eq!(base.len(), 6);
    for (r, k) in [(Branch::Plus, 1), (Branch::Minus, -2), (Branch::Plus, 3)] {
        let other = freqs(&d.shifted(r, k));
        assert_eq!(other.len(), base.len());
        for (a, b) in base.iter().zip(&other) {
            assert!((a - b).abs() < 1e-10);
        }
    }
    let cf = MonochromaticClosedForm::new(1.0, 0.8, 0.1).unwrap();
    for (a, b) in base.iter().zip(cf.channel_frequencies()) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
}

#[test]
fn alpha_table_is_complete_and_hermitian() {
    let p = monochromatic_preset(1.0, 0.8, 0.1).unwrap();
    assert!(p.alpha.completeness_defect() < 1e-10);
    assert!(p.alpha.hermiticity_defect() < 1e-12);
    for c in p.registry.channels() {
        let partner = p.registry.partner(c.id).expect("every channel has a partner");
        assert!((p.registry.channel(partner).omega + c.omega).abs() < 1e-12);
    }
}

#[test]
fn jump_weights_for_the_monochromatic_drive() {
    let p = monochromatic_preset(1.0, 0.8, 0.1).unwrap();
    let theta = (0.2f64).atan2(0.2);
    let c = p.registry.find(0.8).expect("omega_L channel");
    let plus = Vec2::new(C64::from(1.0), C64::from(0.0));
    let (_, w) = apply_jump_qubit(&p.registry, c.id, &plus).unwrap();
    assert!((w - theta.sin().powi(2) / 4.0).abs() < 1e-12);
}

#[test]
fn lowering_an_already_lowered_state_has_zero_weight() {
    let p = constant_drive_preset(0.3, 2.0 * PI).unwrap();
    let down = p
        .registry
        .channels()
        .iter()
        .find(|c| c.strength(Branch::Minus, Branch::Plus) > 0.0)
        .unwrap();
    let minus = Vec2::new(C64::from(0.0), C64::from(1.0));
    match apply_jump_qubit(&p.registry, down.id, &minus) {
        Err(Error::ZeroWeight { channel, .. }) => assert_eq!(channel, down.id),
        other => panic!("expected ZeroWeight, got {other:?}"),
    }
}

#[test]
fn registry_json_lists_every_channel() {
    let p = monochromatic_preset(1.0, 0.8, 0.1).unwrap();
    let v = p.registry.to_json();
    assert_eq!(v["format_version"], 1);
    let channels = v["channels"].as_array().unwrap();
    assert_eq!(channels.len(), 6);
    for c in channels {
        let entries = c["entries"].as_array().unwrap();
        assert!(!entries.is_empty());
        assert!(entries.iter().all(|e| e["n"] == c["n_omega"]));
    }
}

proptest! {
    #[test]
    fn fold_lands_in_zone_and_reconstructs(e in -1e3f64..1e3, period in 0.1f64..20.0) {
        let (e0, n) = brillouin_fold(e, period);
        let w = 2.0 * PI / period;
        prop_assert!(e0 > -PI / period - 1e-12 && e0 <= PI / period + 1e-12);
        prop_assert!((e0 + n as f64 * w - e).abs() <= 1e-9 * (1.0 + e.abs()));
    }

    #[test]
    fn monochromatic_alpha_is_hermitian(wq in 0.5f64..2.0, wl in 0.3f64..1.5, lambda in 0.01f64..0.3) {
        prop_assume!(((wq - wl).powi(2) + 4.0 * lambda * lambda).sqrt() < wl * 0.95);
        if let Ok(p) = monochromatic_preset(wq, wl, lambda) {
            prop_assert!(p.alpha.hermiticity_defect() < 1e-10);
        }
    }
}
