use std::f64::consts::FRAC_PI_4;

use udw_core::channels::{build_channel, build_checked, plus_y, Backend, Channel, ChannelSpec};
use udw_core::field::{default_smear_norm, standard_model};
use udw_core::metrics::{capacity_n1, diamond_distance, sweep, DiamondOptions, Metric, Pair, SweepBackend, SweepConfig};
use udw_core::noise::{noisy_capacity, NoiseConfig, NoiseFlag};
use udw_core::Error;

fn config(metric: Metric, pair: Pair) -> SweepConfig {
    SweepConfig {
        metric,
        pair,
        gamma: FRAC_PI_4,
        smear_norm: default_smear_norm(),
        bob: plus_y(),
        backend: SweepBackend::Single(Backend::Symbolic),
        diamond: DiamondOptions {
            coarse_samples: 2_000,
            ..DiamondOptions::default()
        },
    }
}

#[test]
fn qubit_qst_is_the_identity_channel() {
    let ch = build_channel(&ChannelSpec::qubit_qst(), Backend::Symbolic).unwrap();
    assert!(ch.max_abs_diff(&Channel::identity(2)).unwrap() < 1e-12);
    let d = diamond_distance(&ch, &Channel::identity(2), &DiamondOptions::default()).unwrap();
    assert!(d.value < 1e-8);
}

#[test]
fn sweep_rows_follow_grid_order() {
    let grid = [3.0, 0.5, 2.0, 1.0];
    let rows = sweep(&config(Metric::Capacity, Pair::Qst), &grid).unwrap();
    let lambdas: Vec<f64> = rows.iter().map(|r| r.lambda_phi).collect();
    assert_eq!(lambdas, grid);
    assert!(rows.iter().all(|r| r.metric == "capacity" && r.backend == "symbolic"));
}

#[test]
fn diamond_sweep_is_deterministic_for_a_seed() {
    let cfg = config(Metric::Diamond, Pair::Cnot1);
    let grid = [0.5, 1.5, 2.5];
    let a = sweep(&cfg, &grid).unwrap();
    let b = sweep(&cfg, &grid).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().all(|r| r.starts.is_some() && r.converged.is_some()));
}

#[test]
fn field_qst_approaches_identity_with_coupling() {
    let rows = sweep(&config(Metric::Diamond, Pair::Qst), &[1.0, 2.0, 3.0]).unwrap();
    assert!(rows[0].value > rows[1].value && rows[1].value > rows[2].value);
    assert!(rows[2].value < 0.05);
}

#[test]
fn checked_build_agrees_across_backends() {
    let spec = ChannelSpec::field_qst(standard_model(1.5).unwrap());
    let (ch, deviation) = build_checked(&spec, None).unwrap();
    assert!(deviation < 1e-10);
    assert!(capacity_n1(&ch).unwrap() > 0.5);
}

#[test]
fn explicit_truncation_too_small_is_rejected() {
    let spec = ChannelSpec::field_qst(standard_model(2.0).unwrap());
    let err = build_channel(&spec, Backend::Fock { n_max: Some(4) }).unwrap_err();
    assert!(matches!(err, Error::TruncationTooSmall { .. }), "{err}");
}

#[test]
fn empty_grid_is_an_error() {
    assert!(sweep(&config(Metric::Capacity, Pair::Qst), &[]).is_err());
}

#[test]
fn noisy_capacity_flags_imaginary_couplings() {
    let rows = noisy_capacity(&[0.2, 3.0], 10.0, &NoiseConfig::default()).unwrap();
    assert_eq!(rows[0].flag, NoiseFlag::Domain);
    assert!(rows[0].capacity.is_none() && rows[0].lambda_eff.is_none());
    assert_eq!(rows[1].lambda_phi, 3.0);
}

#[test]
fn noiseless_noisy_capacity_matches_clean_sweep() {
    let grid = [0.5, 1.0, 2.0];
    let clean = sweep(&config(Metric::Capacity, Pair::Qst), &grid).unwrap();
    let noisy = noisy_capacity(&grid, 0.0, &NoiseConfig::default()).unwrap();
    for (c, n) in clean.iter().zip(&noisy) {
        assert_eq!(n.flag, NoiseFlag::Ok);
        assert!((n.capacity.unwrap() - c.value).abs() < 1e-12);
    }
}
