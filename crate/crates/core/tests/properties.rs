mod common;

use macroent::analysis::{fit_scaling, Classification};
use macroent::grover::{self, GroverInstance};
use macroent::refstates::{build_reference, ReferenceState};
use macroent::shor::{self, ShorInstance};
use macroent::vcm::{build_vcm, e_max, max_eigen, operator_fluctuation, AdditiveOperator, DEFAULT_DEGENERACY_RTOL};
use macroent::{Axis, Site, Stage, StateVector, TraceOptions, C64};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn circuit_state(n: usize, seed: u64) -> StateVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    common::random_circuit(n, 3 * n + 4, &mut rng)
}

fn random_operator(n: usize, rng: &mut ChaCha8Rng) -> AdditiveOperator {
    let coeffs = (0..n)
        .map(|_| std::array::from_fn(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)))
        .collect();
    AdditiveOperator::new(Site::range(1, n).collect(), coeffs).unwrap()
}

fn spectrum(s: &StateVector) -> Vec<f64> {
    max_eigen(&build_vcm(s), DEFAULT_DEGENERACY_RTOL).unwrap().eigenvalues
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gates_preserve_norm_and_invert(n in 1usize..=7, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = common::random_circuit(n, 20, &mut rng);
        prop_assert!((s.norm_sqr() - 1.0).abs() <= 1e-12);
        let site = Site::new(rng.random_range(1..=n));
        let g = common::random_gate(&mut rng);
        let mut t = s.clone();
        t.apply_gate(site, &g).unwrap();
        t.apply_gate(site, &g.dagger()).unwrap();
        for (a, b) in s.amplitudes().iter().zip(t.amplitudes()) {
            prop_assert!((a - b).norm() <= 1e-12);
        }
    }

    #[test]
    fn pair_expectations_match_density_matrix(n in 2usize..=6, seed in any::<u64>()) {
        let s = circuit_state(n, seed);
        let oracle = common::density_matrix_vcm(s.amplitudes());
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let l = rng.random_range(1..=n);
        let mut lp = rng.random_range(1..=n);
        while lp == l {
            lp = rng.random_range(1..=n);
        }
        for a in Axis::ALL {
            for b in Axis::ALL {
                let got = s.pauli_pair_expectation(Site::new(l), a, Site::new(lp), b).unwrap();
                // the oracle VCM entry plus the product of the single-site means
                let i = 3 * (l - 1) + a.index();
                let j = 3 * (lp - 1) + b.index();
                let rho_mean = |k: usize| {
                    let op = common::embedded_pauli(n, k / 3 + 1, k % 3);
                    let psi = nalgebra::DVector::from_column_slice(s.amplitudes());
                    psi.dotc(&(op * &psi))
                };
                let want = oracle[(i, j)] + rho_mean(i) * rho_mean(j);
                prop_assert!((got - want).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn outcome_probabilities_sum_to_one(n in 1usize..=7, seed in any::<u64>(), k in 1usize..=3) {
        let s = circuit_state(n, seed);
        let mut sites: Vec<Site> = Site::range(1, n).collect();
        sites.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        sites.truncate(k.min(n));
        let total: f64 = s.outcome_probabilities(&sites).unwrap().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn quadratic_form_is_operator_fluctuation(n in 1usize..=6, seed in any::<u64>()) {
        let s = shor::random_state(n, seed).unwrap();
        let v = build_vcm(&s);
        let em = max_eigen(&v, DEFAULT_DEGENERACY_RTOL).unwrap().e_max;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..5 {
            let op = random_operator(n, &mut rng);
            let direct = operator_fluctuation(&s, &op).unwrap();
            prop_assert!((v.quadratic_form(&op).unwrap() - direct).abs() <= 1e-9);
            prop_assert!(direct <= em * n as f64 + 1e-8 * n as f64);
        }
    }

    #[test]
    fn e_max_ignores_local_unitaries(n in 1usize..=7, seed in any::<u64>()) {
        let s = shor::random_state(n, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = s.clone();
        for site in Site::range(1, n) {
            t.apply_gate(site, &common::random_gate(&mut rng)).unwrap();
        }
        prop_assert!((e_max(&s).unwrap() - e_max(&t).unwrap()).abs() <= 1e-8);
    }

    #[test]
    fn spectrum_ignores_site_order(n in 1usize..=7, seed in any::<u64>()) {
        let s = shor::random_state(n, seed).unwrap();
        let mut perm: Vec<Site> = Site::range(1, n).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = spectrum(&s);
        let b = spectrum(&s.permute_sites(&perm).unwrap());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn e_max_bounds(n in 1usize..=7, seed in any::<u64>()) {
        let s = circuit_state(n, seed);
        let v = build_vcm(&s);
        let spec = max_eigen(&v, DEFAULT_DEGENERACY_RTOL).unwrap();
        prop_assert!(spec.diagnostics.is_valid());
        prop_assert!(spec.e_max >= 2.0 / 3.0 - 1e-9);
        prop_assert!(spec.e_max <= v.trace() + 1e-9);
        prop_assert!(v.trace() <= 3.0 * n as f64 + 1e-9);
    }

    #[test]
    fn product_states_give_two(angles in prop::collection::vec((0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU), 1..=8)) {
        let l = angles.len();
        let s = build_reference(&ReferenceState::Product(angles), l).unwrap();
        prop_assert!((e_max(&s).unwrap() - 2.0).abs() <= 1e-9);
    }

    #[test]
    fn grover_states_stay_in_plane(l in 2usize..=9, seed in any::<u64>()) {
        let inst = GroverInstance::random(l, 1, seed).unwrap();
        let (alpha, beta) = grover::rotation_plane(&inst).unwrap();
        let mut s = grover::simulate_psi_k(&inst, 0).unwrap();
        for k in 0..=inst.params().iterations {
            if k > 0 {
                grover::apply_iterations(&mut s, inst.solutions(), 1).unwrap();
            }
            let inside = s.inner(&alpha).unwrap().norm_sqr() + s.inner(&beta).unwrap().norm_sqr();
            prop_assert!(1.0 - inside <= 1e-10);
        }
    }

    #[test]
    fn dft_round_trip(n in 1usize..=8, seed in any::<u64>()) {
        let s = shor::random_state(n, seed).unwrap();
        let l = 1 + (seed as usize) % n;
        let mut t = s.clone();
        shor::run_dft(&mut t, l).unwrap();
        shor::run_inverse_dft(&mut t, l).unwrap();
        for (a, b) in s.amplitudes().iter().zip(t.amplitudes()) {
            prop_assert!((a - b).norm() <= 1e-11);
        }
    }

    #[test]
    fn fits_recover_lines_in_any_order(slope in -3.0f64..3.0, intercept in -5.0f64..5.0, seed in any::<u64>()) {
        let mut pts: Vec<(f64, f64)> = (3..10).map(|x| (x as f64, slope * x as f64 + intercept)).collect();
        let f = fit_scaling(&pts).unwrap();
        prop_assert!((f.slope - slope).abs() <= 1e-12);
        prop_assert!((f.intercept - intercept).abs() <= 1e-11);
        pts.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(fit_scaling(&pts).unwrap().classification, f.classification);
    }
}

#[test]
fn hadamard_substages_keep_e_max() {
    for l in 3..=7 {
        let inst = GroverInstance::random(l, 1, 3).unwrap();
        let t = grover::run_grover(&inst, &TraceOptions::default()).unwrap();
        assert_eq!(t.total_steps(), inst.params().total_steps(l));
        for w in t.records.windows(2) {
            if w[1].stage == Stage::Hadamard {
                assert!((w[1].e_max().unwrap() - w[0].e_max().unwrap()).abs() <= 1e-9, "L={l} step {}", w[1].step);
            }
        }
    }
}

#[test]
fn macroscopic_mx_fluctuation_inside_window() {
    let delta: f64 = 0.4;
    for l in 6..=12 {
        let inst = GroverInstance::random(l, 1, l as u64).unwrap();
        let n = inst.dim() as f64;
        let mx = AdditiveOperator::magnetization(l, Axis::X, false).unwrap();
        let lf = l as f64;
        for k in 0..=inst.params().iterations {
            let x = (4 * k + 2) as f64 / n.sqrt();
            if x < delta || x > std::f64::consts::PI - delta {
                continue;
            }
            let s = grover::analytic_psi_k(&inst, k).unwrap();
            let v = operator_fluctuation(&s, &mx).unwrap() / (lf * lf);
            assert!(v >= 0.25 * delta.sin().powi(2) - 2.0 / lf, "L={l} k={k}: {v}");
        }
    }
}

#[test]
fn solution_choice_does_not_change_trace() {
    let a = GroverInstance::random(10, 1, 1).unwrap();
    let b = GroverInstance::random(10, 1, 2).unwrap();
    assert_ne!(a.solutions(), b.solutions());
    let ta = grover::run_grover(&a, &TraceOptions::default()).unwrap().e_max_series();
    let tb = grover::run_grover(&b, &TraceOptions::default()).unwrap().e_max_series();
    assert_eq!(ta.len(), tb.len());
    for (x, y) in ta.iter().zip(&tb) {
        assert!((x.1 - y.1).abs() <= 1e-9, "step {}", x.0);
    }
}

#[test]
fn measured_branches_leave_r2_uncorrelated() {
    for (n, x) in [(15, 2), (21, 2), (33, 5)] {
        let inst = ShorInstance::new(n, x).unwrap();
        let me = shor::simulate_me_state(&inst).unwrap();
        let branches = shor::measure_second_register(&me, &inst).unwrap();
        let total: f64 = branches.iter().map(|b| b.0.probability).sum();
        assert!((total - 1.0).abs() <= 1e-10);
        for (_, post) in &branches {
            let v = build_vcm(post);
            for site in inst.r2_sites() {
                let i = site.get() - 1;
                // a basis-state qubit keeps its own σx/σy variance; its
                // covariance with every other site vanishes
                for j in (0..v.n_sites()).filter(|&j| j != i) {
                    for row in v.block(i, j) {
                        assert!(row.iter().all(|z| z.norm() <= 1e-12));
                    }
                }
            }
        }
    }
}

#[test]
fn shor_hadamard_stage_is_product() {
    let inst = ShorInstance::new(21, 2).unwrap();
    let mut s = inst.initial_state().unwrap();
    s.apply_hadamard_all(inst.r1_sites()).unwrap();
    assert!((e_max(&s).unwrap() - 2.0).abs() <= 1e-9);
}

#[test]
fn cat_log_log_slope_is_one() {
    let pts: Vec<(f64, f64)> = (3..=10)
        .map(|l| (l as f64, e_max(&build_reference(&ReferenceState::Cat, l).unwrap()).unwrap()))
        .collect();
    let f = fit_scaling(&pts).unwrap();
    assert!((f.loglog_slope - 1.0).abs() <= 1e-6);
    assert_eq!(f.classification, Classification::P2);
}

#[test]
fn all_vcms_are_valid_for_circuits() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..40 {
        let s = common::random_circuit(1 + i % 6, 12, &mut rng);
        let oracle = common::density_matrix_vcm(s.amplitudes());
        let dense = common::jacobi_eigenvalues(&oracle);
        let spec = max_eigen(&build_vcm(&s), DEFAULT_DEGENERACY_RTOL).unwrap();
        for (a, b) in spec.eigenvalues.iter().zip(&dense) {
            assert!((a - b).abs() <= 1e-9);
        }
    }
}
