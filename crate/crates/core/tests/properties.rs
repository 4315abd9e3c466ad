//! Randomized invariants for the state algebra, the eraser densities, the chain and
//! the bath model.

use std::f64::consts::PI;

use collapse_lab::chain::{
    photon_input, rho_superposed, run_collapse, run_linear, ChainSpec, CollapseMode,
};
use collapse_lab::decoherence::{
    attach_bath, branch_overlap, decohered_output, BathMode, BathModel,
};
use collapse_lab::eraser::{conditional_pdf, unconditional_pdf, EraserParams, Idler};
use collapse_lab::linalg::{hermitian_eigenvalues, hermiticity_error, max_abs_diff, CMatrix};
use collapse_lab::prelude::*;
use collapse_lab::random::{random_density, random_ket, random_measurement, random_unitary};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const DIMS: [&[usize]; 5] = [&[2], &[3], &[2, 2], &[3, 2], &[2, 2, 2]];

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Reduced state of the first factor by explicit index contraction.
fn trace_out_second(m: &CMatrix, da: usize, db: usize) -> CMatrix {
    CMatrix::from_fn(da, da, |i, j| {
        (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()
    })
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generated_unitaries_are_unitary(seed in any::<u64>(), k in 0usize..5) {
        let u = random_unitary(DIMS[k], &mut rng(seed));
        let m = u.matrix();
        let d = m.nrows();
        prop_assert!(max_abs_diff(&(m.adjoint() * m), &CMatrix::identity(d, d)) < 1e-10);
    }

    #[test]
    fn evolution_preserves_spectrum(seed in any::<u64>(), k in 0usize..5, rank in 1usize..4) {
        let mut r = rng(seed);
        let rho = random_density(DIMS[k], rank, &mut r);
        let u = random_unitary(DIMS[k], &mut r);
        let out = evolve(&rho, &u).unwrap();
        prop_assert!((out.trace() - 1.0).abs() < 1e-10);
        prop_assert!(hermiticity_error(out.matrix()) < 1e-10);
        prop_assert!((purity(&out) - purity(&rho)).abs() < 1e-10);
        let (a, b) = (sorted(hermitian_eigenvalues(rho.matrix())), sorted(hermitian_eigenvalues(out.matrix())));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn born_probabilities_sum_to_one(seed in any::<u64>(), k in 0usize..5, parts in 1usize..5) {
        let mut r = rng(seed);
        let psi = random_ket(DIMS[k], &mut r);
        let family = random_measurement(DIMS[k], parts, &mut r);
        let p = born_probabilities(&psi, &family).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        prop_assert!(p.iter().all(|&x| x >= -1e-12));
    }

    #[test]
    fn collapse_then_measure_is_certain(seed in any::<u64>(), k in 0usize..5, parts in 2usize..4) {
        let mut r = rng(seed);
        let rho = random_density(DIMS[k], 2, &mut r);
        let family = random_measurement(DIMS[k], parts, &mut r);
        let probs = born_probabilities(&rho, &family).unwrap();
        for (i, p) in family.iter().enumerate() {
            if probs[i] < 1e-9 {
                continue;
            }
            let post = collapse(&rho, p).unwrap();
            let again = born_probabilities(&post, &family).unwrap();
            for (j, q) in again.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                prop_assert!((q - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn partial_trace_recovers_factors(seed in any::<u64>(), da in 2usize..4, db in 2usize..4) {
        let mut r = rng(seed);
        let a = random_density(&[da], 2, &mut r);
        let b = random_density(&[db], 3, &mut r);
        let ab = tensor(&a, &b);
        prop_assert!(max_abs_diff(partial_trace(&ab, &[0]).unwrap().matrix(), a.matrix()) < 1e-10);
        prop_assert!(max_abs_diff(partial_trace(&ab, &[1]).unwrap().matrix(), b.matrix()) < 1e-10);
    }

    #[test]
    fn partial_trace_matches_contraction(seed in any::<u64>(), da in 2usize..4, db in 2usize..4) {
        let rho = random_density(&[da, db], 3, &mut rng(seed));
        let expect = trace_out_second(rho.matrix(), da, db);
        let got = partial_trace(&rho, &[0]).unwrap();
        prop_assert_eq!(got.dims(), &[da][..]);
        prop_assert!(max_abs_diff(got.matrix(), &expect) < 1e-12);
    }

    #[test]
    fn ket_and_density_partial_traces_agree(seed in any::<u64>(), keep in 0usize..3) {
        let psi = random_ket(&[2, 3, 2], &mut rng(seed));
        let from_ket = psi.partial_trace(&[keep]).unwrap();
        let from_rho = psi.to_density().unwrap().partial_trace(&[keep]).unwrap();
        prop_assert!(max_abs_diff(from_ket.matrix(), from_rho.matrix()) < 1e-12);
    }

    #[test]
    fn trace_distance_is_a_metric(seed in any::<u64>(), k in 0usize..5) {
        let mut r = rng(seed);
        let a = random_density(DIMS[k], 1, &mut r);
        let b = random_density(DIMS[k], 2, &mut r);
        let c = random_density(DIMS[k], 3, &mut r);
        let ab = trace_distance(&a, &b).unwrap();
        prop_assert!(trace_distance(&a, &a).unwrap().abs() < 1e-12);
        prop_assert!((ab - trace_distance(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        prop_assert!(trace_distance(&a, &c).unwrap() <= ab + trace_distance(&b, &c).unwrap() + 1e-9);
    }

}

// chain runs cost tens of milliseconds each
proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn conditionals_add_to_twice_the_marginal(x in -3.0 * PI..=3.0 * PI, alpha in 0.2f64..3.0, beta in 0.0f64..10.0) {
        let p = EraserParams::new(alpha, beta, (-3.0 * PI, 3.0 * PI), 64).unwrap();
        let d3 = conditional_pdf(x, Idler::D3, &p).unwrap();
        let d4 = conditional_pdf(x, Idler::D4, &p).unwrap();
        prop_assert!(d3 >= 0.0 && d4 >= 0.0);
        prop_assert!((d3 + d4 - 2.0 * unconditional_pdf(x, &p).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn diagonal_inputs_hide_collapse(w in 0.0f64..=1.0, point in 1usize..=3, eps in 0.0f64..=1.0) {
        let spec = ChainSpec::standard(eps).unwrap().with_collapse_point(point).unwrap();
        let (a, b) = (collapse_lab::chain::rho_a(), collapse_lab::chain::rho_b());
        let rho = DensityMatrix::mixture(&[(w, &a), (1.0 - w, &b)]).unwrap();
        let l = run_linear(&spec, &rho).unwrap();
        let k = run_collapse(&spec, &rho, CollapseMode::Channel, 0).unwrap();
        prop_assert!(trace_distance(&l.rho_out, &k.rho_out).unwrap() < 1e-10);
    }

    #[test]
    fn collapse_never_raises_purity(ar in -1.0f64..1.0, ai in -1.0f64..1.0, br in -1.0f64..1.0, w in 0.0f64..=1.0) {
        prop_assume!(ar.hypot(ai) + br.abs() > 0.1);
        let n = (ar * ar + ai * ai + br * br).sqrt();
        let pure = photon_input(c(ar / n, ai / n), c(br / n, 0.0)).unwrap();
        let rho = DensityMatrix::mixture(&[(w, &pure), (1.0 - w, &collapse_lab::chain::rho_a())]).unwrap();
        let spec = ChainSpec::default();
        let l = run_linear(&spec, &rho).unwrap();
        let k = run_collapse(&spec, &rho, CollapseMode::Channel, 0).unwrap();
        prop_assert!((l.rho_out.trace() - 1.0).abs() < 1e-10);
        prop_assert!(k.purity <= purity(&rho) + 1e-10);
        prop_assert!(l.coherence <= 0.5 + 1e-12);
    }

    #[test]
    fn bath_keeps_populations(n in 1usize..=6, theta in 0.0f64..=PI, ar in 0.1f64..1.0) {
        let br = (1.0 - ar * ar).sqrt();
        let rho = photon_input(c(ar, 0.0), c(0.0, br)).unwrap();
        let spec = ChainSpec::default();
        let linear = run_linear(&spec, &rho).unwrap();
        let a = decohered_output(&spec, &BathModel::new(n, theta, BathMode::Analytic).unwrap(), &rho).unwrap();
        let t = decohered_output(&spec, &BathModel::new(n, theta, BathMode::FullTensor).unwrap(), &rho).unwrap();
        for i in 0..3 {
            prop_assert!((a.rho_out.entry(i, i) - linear.rho_out.entry(i, i)).norm() < 1e-10);
        }
        prop_assert!(max_abs_diff(a.rho_out.matrix(), t.rho_out.matrix()) < 1e-10);
    }
}

#[test]
fn bath_distance_non_increasing() {
    let spec = ChainSpec::default();
    let collapse = collapse_lab::chain::output_mixture();
    let linear = run_linear(&spec, &rho_superposed()).unwrap();
    let distance = |n: usize, theta: f64| {
        let out = attach_bath(
            &linear,
            &BathModel::new(n, theta, BathMode::Analytic).unwrap(),
        )
        .unwrap();
        trace_distance(&out.rho_out, &collapse).unwrap()
    };
    for theta in [0.05, 0.2, 0.9, 1.4] {
        let mut prev = f64::INFINITY;
        for n in 1..200 {
            let d = distance(n, theta);
            assert!((d - 0.5 * theta.cos().powi(n as i32)).abs() < 1e-10);
            assert!(d <= prev + 1e-15);
            prev = d;
        }
    }
    for n in [1, 5, 40] {
        let mut prev = f64::INFINITY;
        for k in 0..=50 {
            let d = distance(n, k as f64 * PI / 100.0);
            assert!(d <= prev + 1e-15);
            prev = d;
        }
    }
}

#[test]
fn tensor_oracle_grid() {
    let spec = ChainSpec::default();
    for n in 1..=8 {
        for theta in [0.0, 0.1, 0.2, 0.5, 1.0] {
            let a = decohered_output(
                &spec,
                &BathModel::new(n, theta, BathMode::Analytic).unwrap(),
                &rho_superposed(),
            )
            .unwrap();
            let t = decohered_output(
                &spec,
                &BathModel::new(n, theta, BathMode::FullTensor).unwrap(),
                &rho_superposed(),
            )
            .unwrap();
            assert!(
                max_abs_diff(a.rho_out.matrix(), t.rho_out.matrix()) < 1e-10,
                "n={n} θ={theta}"
            );
            assert!(
                (t.coherence
                    - 0.5 * branch_overlap(&BathModel::new(n, theta, BathMode::Analytic).unwrap()))
                .abs()
                    < 1e-10
            );
        }
    }
}

#[test]
fn reset_distance_shrinks_with_overlap() {
    let mut prev = f64::INFINITY;
    for k in (0..=20).rev() {
        let spec = ChainSpec::standard(k as f64 / 20.0).unwrap();
        let l = run_linear(&spec, &rho_superposed()).unwrap();
        let m = run_collapse(&spec, &rho_superposed(), CollapseMode::Channel, 0).unwrap();
        let d = trace_distance(&l.rho_out, &m.rho_out).unwrap();
        assert!(d <= prev + 1e-12);
        prev = d;
    }
    assert!(prev < 1e-10);
}

#[test]
fn coherent_state_deficit_shrinks() {
    let mut prev = f64::INFINITY;
    for cutoff in 1..40 {
        let deficit = 1.0 - coherent_state(c(1.5, -0.5), cutoff).unwrap().norm().powi(2);
        assert!(deficit <= prev + 1e-15);
        prev = deficit;
    }
}
