use proptest::prelude::*;

use subgeo_core::certify::{drift_constants, minorisation, recheck, StateSet};
use subgeo_core::chain::{
    evolve_function, evolve_measure, tv_distance, FiniteKernel, KernelSequence, SequenceMode,
    StateMeasure,
};
use subgeo_core::constants::{
    c_star, m_one, rescale_condition2, theorem_c, DriftConstants, LemmaBounds,
};
use subgeo_core::coupling::{
    dp_expected_sum_all, marginal_check, AugmentedSequence, CoupledDistribution, DpQuery,
    PairWeight, Stop,
};
use subgeo_core::ratefn::{big_h, big_h_inv, big_h_quadrature, delta_k, rate_r, PhiSpec, Rate};
use subgeo_core::verify::check_rate_props;
use subgeo_core::young::{check_young, make_pair, weighted_norm, WeightW};
use subgeo_core::Tolerances;

const TOL: Tolerances = Tolerances::DEFAULT;

fn phi_params() -> impl Strategy<Value = (f64, f64)> {
    (0.0..0.95f64, 0.05..5.0f64)
}

fn kernel(n: usize) -> impl Strategy<Value = FiniteKernel> {
    prop::collection::vec(prop::collection::vec(0.01..1.0f64, n), n).prop_map(|rows| {
        let rows = rows
            .into_iter()
            .map(|r| {
                let s: f64 = r.iter().sum();
                r.into_iter().map(|p| p / s).collect()
            })
            .collect();
        FiniteKernel::new(rows, 0, &TOL).unwrap()
    })
}

/// Two random kernels on the same space, cycled.
fn cycle_seq() -> impl Strategy<Value = KernelSequence> {
    (2usize..6)
        .prop_flat_map(|n| (kernel(n), kernel(n)))
        .prop_map(|(a, b)| {
            let b = FiniteKernel::new(
                (0..b.n_states()).map(|x| b.row(x).to_vec()).collect(),
                1,
                &TOL,
            )
            .unwrap();
            KernelSequence::new(SequenceMode::Cycle, vec![a, b]).unwrap()
        })
}

fn v_for(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1.0..20.0f64, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rate_properties_hold((alpha, beta) in phi_params(), eps_b in 0.05..0.95f64) {
        let phi = PhiSpec::polynomial(alpha, beta).unwrap();
        let [sub, diff] = check_rate_props(&phi, eps_b, 64).unwrap();
        prop_assert!(sub.pass, "{sub:?}");
        prop_assert!(diff.pass, "{diff:?}");
    }

    #[test]
    fn rate_monotone_delta_antitone((alpha, beta) in phi_params(), eps_b in 0.05..0.95f64) {
        let phi = PhiSpec::polynomial(alpha, beta).unwrap();
        for n in 0..200u64 {
            prop_assert!(rate_r(&phi, eps_b, n + 1).unwrap() >= rate_r(&phi, eps_b, n).unwrap());
            prop_assert!(delta_k(&phi, eps_b, n + 1).unwrap() <= delta_k(&phi, eps_b, n).unwrap());
        }
    }

    #[test]
    fn big_h_closed_form_matches_quadrature((alpha, beta) in phi_params(), t in 1.0..1000.0f64) {
        let phi = PhiSpec::polynomial(alpha, beta).unwrap();
        let exact = big_h(&phi, t).unwrap();
        let quad = big_h_quadrature(&phi, t, TOL.quadrature_abs).unwrap();
        prop_assert!((exact - quad).abs() <= 1e-10 * exact.abs().max(1e-300) + 1e-13, "{exact} {quad}");
        let back = big_h_inv(&phi, exact).unwrap();
        prop_assert!((back - t).abs() <= 1e-9 * t);
    }

    #[test]
    fn young_pairs_are_monotone(xi in 0.0..=1.0f64, x in 1.0..1e6f64, dx in 0.0..1e3f64) {
        let p = make_pair(xi).unwrap();
        prop_assert!(p.psi1(x + dx) >= p.psi1(x));
        prop_assert!(p.psi2(x + dx) >= p.psi2(x));
        prop_assert!(p.violation(x, x + dx) <= 0.0);
    }

    #[test]
    fn weighted_norm_is_homogeneous(
        xi in 0.0..=1.0f64,
        (alpha, beta) in phi_params(),
        (v, f) in (2usize..8).prop_flat_map(|n| (v_for(n), prop::collection::vec(-10.0..10.0f64, n))),
        c in -100.0..100.0f64,
    ) {
        let w = WeightW::new(PhiSpec::polynomial(alpha, beta).unwrap(), make_pair(xi).unwrap(), &v).unwrap();
        let base = weighted_norm(&f, &w).unwrap();
        let scaled: Vec<f64> = f.iter().map(|x| c * x).collect();
        let got = weighted_norm(&scaled, &w).unwrap();
        prop_assert!((got - c.abs() * base).abs() <= 1e-14 * (c.abs() * base).max(f64::MIN_POSITIVE));
    }

    #[test]
    fn c_star_dominates_partial_sums(
        (alpha, beta) in phi_params(),
        b_v in 0.0..5.0f64,
        c_v in 1.0..5.0f64,
        eps_b in 0.1..0.9f64,
        eps_nu in 0.05..0.99f64,
    ) {
        let phi = PhiSpec::polynomial(alpha, beta).unwrap();
        let k = DriftConstants::new(phi, b_v, c_v, eps_b, eps_nu).unwrap();
        let Ok(bound) = c_star(&k, TOL.series_rel) else { return Ok(()) };
        let m1 = m_one(&k).unwrap();
        let (mut partial, mut term) = (0.0, 1.0);
        for j in 1..=bound.terms.max(1) + 50 {
            partial += term;
            prop_assert!(partial <= bound.value * (1.0 + 1e-12));
            term *= (1.0 - eps_nu) * (1.0 + delta_k(&phi, eps_b, j as u64).unwrap() * m1);
        }
    }

    #[test]
    fn constant_phi_c_star_is_reciprocal(beta in 0.05..5.0f64, eps_nu in 0.01..=1.0f64) {
        let k = DriftConstants::new(PhiSpec::constant(beta).unwrap(), 1.0, 2.0, 0.5, eps_nu).unwrap();
        let v = c_star(&k, TOL.series_rel).unwrap().value;
        prop_assert!((v - 1.0 / eps_nu).abs() <= 1e-12 / eps_nu);
    }

    #[test]
    fn theorem_c_antitone_in_eps_nu(
        (alpha, beta) in phi_params(),
        b_v in 0.0..5.0f64,
        eps_b in 0.1..0.9f64,
        e1 in 0.05..0.95f64,
        e2 in 0.05..0.95f64,
    ) {
        let phi = PhiSpec::polynomial(alpha, beta).unwrap();
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        let c = |e| theorem_c(&DriftConstants::new(phi, b_v, 2.0, eps_b, e).unwrap(), TOL.series_rel);
        if let (Ok(a), Ok(b)) = (c(lo), c(hi)) {
            prop_assert!(b.c <= a.c * (1.0 + 1e-9));
        }
    }

    #[test]
    fn rescaled_side_condition(
        (alpha, beta) in phi_params(),
        b_hat in 0.0..10.0f64,
        c_hat in 1.0..10.0f64,
        lambda in 0.0..0.9f64,
        eps_b in 0.05..0.95f64,
    ) {
        if let Ok(r) = rescale_condition2(alpha, beta, b_hat, c_hat, lambda, eps_b) {
            prop_assert!(r.c_v_min >= c_hat);
            prop_assert!(r.phi.value(r.c_v_min) >= r.b_v / (1.0 - eps_b));
        }
    }

    #[test]
    fn evolution_composes(seq in cycle_seq(), n in 0usize..12, m in 0usize..12, seed in any::<u64>()) {
        let size = seq.n_states();
        let f: Vec<f64> = (0..size).map(|x| ((seed >> (x % 60)) & 0xff) as f64 - 128.0).collect();
        let whole = evolve_function(&seq, &f, n + m).unwrap();
        let tail = evolve_function(&seq.shifted(n), &f, m).unwrap();
        let split = evolve_function(&seq, &tail, n).unwrap();
        for (a, b) in whole.iter().zip(&split) {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn differences_bounded_by_total_variation(seq in cycle_seq(), n in 0usize..20, f_seed in prop::collection::vec(-5.0..5.0f64, 6)) {
        let size = seq.n_states();
        let f = &f_seed[..size];
        let sup = f.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
        let g = evolve_function(&seq, f, n).unwrap();
        for x in 0..size {
            for x2 in 0..size {
                let a = evolve_measure(&seq, &StateMeasure::point(size, x), n).unwrap();
                let b = evolve_measure(&seq, &StateMeasure::point(size, x2), n).unwrap();
                let tv = tv_distance(&a, &b).unwrap();
                prop_assert!((g[x] - g[x2]).abs() <= 2.0 * sup * tv + 1e-12);
            }
        }
    }

    #[test]
    fn minorisation_is_maximal(seq in cycle_seq(), bump in 1e-10..0.5f64) {
        let set = StateSet::all(seq.n_states());
        let m = minorisation(&seq, &set).unwrap();
        let bigger = m.eps_nu + 1e-12 + bump;
        let violated = seq.kernels().iter().enumerate().any(|(k, kern)| {
            (0..seq.n_states()).any(|x| (0..seq.n_states()).any(|y| kern.get(x, y) < bigger * m.nus[k][y]))
        });
        prop_assert!(violated);
        for (k, kern) in seq.kernels().iter().enumerate() {
            for x in 0..seq.n_states() {
                for y in 0..seq.n_states() {
                    prop_assert!(kern.get(x, y) >= m.eps_nu * m.nus[k][y] - 1e-15);
                }
            }
        }
    }

    #[test]
    fn certificates_round_trip(
        (seq, v) in cycle_seq().prop_flat_map(|s| { let n = s.n_states(); (Just(s), v_for(n)) }),
        (alpha, beta) in phi_params(),
    ) {
        let set = StateSet::all(seq.n_states());
        let phi = PhiSpec::polynomial(alpha, beta).unwrap();
        let cert = drift_constants(&seq, &v, phi, &set, None, &TOL).unwrap();
        prop_assert!(recheck(&cert, &TOL).is_empty());
    }

    #[test]
    fn coupling_marginals_and_mass(
        (seq, v) in cycle_seq().prop_flat_map(|s| { let n = s.n_states(); (Just(s), v_for(n)) }),
        small in 1usize..4,
    ) {
        let n = seq.n_states();
        let set = StateSet::from_indices(n, &(0..small.min(n)).collect::<Vec<_>>()).unwrap();
        let phi = PhiSpec::constant(1e-3).unwrap();
        let Ok(cert) = drift_constants(&seq, &v, phi, &set, None, &TOL) else { return Ok(()) };
        let aug = AugmentedSequence::new(&cert).unwrap();
        for x in 0..n {
            for x2 in 0..n {
                prop_assert!(marginal_check(&aug, x, x2, 100).unwrap() <= 1e-12);
                let mut d = CoupledDistribution::start(n, x, x2);
                let mut prev = d.uncoupled_mass();
                for _ in 0..60 {
                    d.step(&aug);
                    let m = d.uncoupled_mass();
                    prop_assert!(m <= prev);
                    prev = m;
                }
            }
        }
    }

    #[test]
    fn visits_to_small_pairs_average_reciprocal_eps(seq in cycle_seq(), v_seed in 1.0..3.0f64) {
        // With C = X every step is in C̄, so the expected number of steps
        // before coupling is the expected number of C̄ visits.
        let n = seq.n_states();
        let v = vec![v_seed; n];
        let cert = drift_constants(&seq, &v, PhiSpec::constant(1.0).unwrap(), &StateSet::all(n), None, &TOL).unwrap();
        let consts = theorem_c(&cert.constants, TOL.series_rel).unwrap();
        let bounds = LemmaBounds::new(&cert.constants, &consts);
        let aug = AugmentedSequence::new(&cert).unwrap();
        let q = DpQuery { weight: PairWeight::SmallSetIndicator, rate: Rate::Unit, stop: Stop::Tau };
        let all = dp_expected_sum_all(&aug, &bounds, &q, TOL.dp_rel, TOL.dp_max_steps).unwrap();
        let want = 1.0 / cert.constants.eps_nu;
        for (val, tail) in all.values.iter().zip(&all.tails) {
            prop_assert!(*val <= want * (1.0 + 1e-9));
            prop_assert!(val + tail >= want * (1.0 - 1e-9));
        }
    }
}

#[test]
fn young_grid_holds_for_21_exponents() {
    for i in 0..=20 {
        let xi = i as f64 / 20.0;
        assert!(
            check_young(&make_pair(xi).unwrap(), 64).unwrap() <= 0.0,
            "xi = {xi}"
        );
    }
}
