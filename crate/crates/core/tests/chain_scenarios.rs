//! End-to-end runs of the measurement chain.

use collapse_lab::chain::{
    interference_readout, output_mixture, reset_sweep, rho_superposed, run_collapse, run_linear,
    run_trajectories, ChainSpec, CollapseMode,
};
use collapse_lab::metrics::trace_distance;

#[test]
fn no_reset_makes_linear_look_collapsed() {
    let spec = ChainSpec::standard(0.0).unwrap();
    let l = run_linear(&spec, &rho_superposed()).unwrap();
    let k = run_collapse(&spec, &rho_superposed(), CollapseMode::Channel, 0).unwrap();
    assert!(trace_distance(&l.rho_out, &k.rho_out).unwrap() < 1e-10);
    assert!(interference_readout(&l).unwrap() < 1e-10);
}

#[test]
fn trajectory_frequency_within_three_sigma() {
    let ens = run_trajectories(&ChainSpec::default(), &rho_superposed(), 10_000, 7).unwrap();
    assert!(
        (0.485..=0.515).contains(&ens.a_prime_frequency),
        "{}",
        ens.a_prime_frequency
    );
    assert_eq!(ens.records.len(), 10_000);
    assert!(trace_distance(&ens.mean_output, &output_mixture()).unwrap() < 0.02);
}

#[test]
fn trajectories_are_reproducible() {
    let spec = ChainSpec::default();
    let a = run_trajectories(&spec, &rho_superposed(), 500, 3).unwrap();
    let b = run_trajectories(&spec, &rho_superposed(), 500, 3).unwrap();
    assert_eq!(a.records, b.records);
    let single = run_collapse(&spec, &rho_superposed(), CollapseMode::Trajectory, 3).unwrap();
    assert_eq!(
        single.trajectory_record.as_ref().unwrap()[0].outcome,
        a.records[0].outcome
    );
}

#[test]
fn late_collapse_after_reset_keeps_coherence() {
    // once the observer has reset, projecting it onto its basis no longer separates the branches
    for point in [2, 3] {
        let spec = ChainSpec::default().with_collapse_point(point).unwrap();
        let k = run_collapse(&spec, &rho_superposed(), CollapseMode::Channel, 0).unwrap();
        assert!((k.coherence - 0.5).abs() < 1e-10, "point {point}");
    }
    let early = run_collapse(
        &ChainSpec::default(),
        &rho_superposed(),
        CollapseMode::Channel,
        0,
    )
    .unwrap();
    assert!(early.coherence < 1e-10);
}

#[test]
fn spec_round_trips_through_json() {
    let spec = ChainSpec::standard(0.6)
        .unwrap()
        .with_collapse_point(2)
        .unwrap();
    let text = serde_json::to_string_pretty(&spec).unwrap();
    let back: ChainSpec = serde_json::from_str(&text).unwrap();
    assert_eq!(back, spec);
    let a = run_linear(&spec, &rho_superposed()).unwrap();
    let b = run_linear(&back, &rho_superposed()).unwrap();
    assert_eq!(a.rho_out, b.rho_out);
}

#[test]
fn sweep_visibility_tracks_coherence() {
    let eps: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    for p in reset_sweep(&ChainSpec::default(), &eps).unwrap() {
        assert!((p.visibility - 2.0 * p.coherence).abs() < 0.01);
    }
}
