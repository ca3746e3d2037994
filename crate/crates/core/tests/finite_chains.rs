use nrmh::analysis::{
    asymptotic_variance_exact, equivalence_check, ld_rate_function, stationary_distribution, uniformize, AnalysisError,
};
use nrmh::instances::{
    random_compatible_triple, random_distribution, random_function, random_probability, random_proposal,
    random_reversible_kernel, random_vorticity,
};
use nrmh::markov::{
    additive_kernel, make_compat_triple, mh_kernel, nrmh_kernel, time_reversal, vorticity_of, MarkovError,
    StochasticMatrix,
};
use nrmh::numerics::DenseMatrix;
use nrmh::rng::SeededRng;
use proptest::prelude::*;

fn random_stochastic(n: usize, rng: &mut SeededRng) -> StochasticMatrix {
    let mut m = DenseMatrix::from_fn(n, n, |_, _| 0.05 + rng.uniform());
    for x in 0..n {
        let total: f64 = m.row(x).iter().sum();
        for v in m.row_mut(x) {
            *v /= total;
        }
    }
    StochasticMatrix::new(m).unwrap()
}

/// `−Σ μ(x)(Gu)(x)/u(x)` at `u = √(μ/π)`, the maximizer for reversible generators.
fn reversible_rate(k: &StochasticMatrix, pi: &[f64], mu: &[f64]) -> f64 {
    let n = k.n();
    let u: Vec<f64> = (0..n).map(|x| (mu[x] / pi[x]).sqrt()).collect();
    let g = uniformize(k, 1.0);
    let gu = g.matrix().matvec(&u);
    -(0..n).map(|x| mu[x] * gu[x] / u[x]).sum::<f64>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn nrmh_kernel_has_prescribed_target_and_vorticity(seed in any::<u64>(), n in 2usize..9) {
        let mut rng = SeededRng::new(seed);
        let t = random_compatible_triple(n, &mut rng);
        let p = nrmh_kernel(&t);
        prop_assert!(t.target().invariance_residual(&p) <= 1e-12);
        let recovered = vorticity_of(&p, t.target()).unwrap();
        prop_assert!(recovered.max_abs_diff(t.vorticity()) <= 1e-12);
    }

    #[test]
    fn rejection_in_one_direction_means_acceptance_in_the_other(seed in any::<u64>(), n in 2usize..9) {
        let mut rng = SeededRng::new(seed);
        let t = random_compatible_triple(n, &mut rng);
        for x in 0..n {
            for y in 0..n {
                if x != y && t.proposal().get(x, y) != 0.0 && t.hastings_ratio(x, y) < 1.0 {
                    prop_assert!(t.hastings_ratio(y, x) > 1.0);
                }
            }
        }
    }

    #[test]
    fn chain_is_rebuilt_from_its_own_vorticity(seed in any::<u64>(), n in 2usize..9) {
        let mut rng = SeededRng::new(seed);
        let p = random_stochastic(n, &mut rng);
        let pi = stationary_distribution(&p).unwrap();
        let gamma = vorticity_of(&p, &pi).unwrap();
        let t = make_compat_triple(p.clone(), gamma, pi, false).unwrap();
        prop_assert!(nrmh_kernel(&t).matrix().max_abs_diff(p.matrix()) <= 1e-14);
    }

    #[test]
    fn time_reversal_negates_vorticity(seed in any::<u64>(), n in 2usize..8) {
        let mut rng = SeededRng::new(seed);
        let t = random_compatible_triple(n, &mut rng);
        let p = nrmh_kernel(&t);
        let back = time_reversal(&p, t.target()).unwrap();
        let g = vorticity_of(&back, t.target()).unwrap();
        prop_assert!(g.max_abs_diff(&t.vorticity().scaled(-1.0)) <= 1e-12);
    }

    #[test]
    fn additive_and_nrmh_constructions_agree(seed in any::<u64>(), n in 2usize..9) {
        let mut rng = SeededRng::new(seed);
        let pi = random_distribution(n, &mut rng);
        let h = random_proposal(n, &mut rng);
        let gamma = random_vorticity(&h, &pi, &mut rng);
        let report = equivalence_check(&h, &gamma, &pi).unwrap();
        prop_assert!(report.max_diff <= 1e-12);
    }

    #[test]
    fn vorticity_never_increases_asymptotic_variance(seed in any::<u64>(), n in 3usize..7) {
        let mut rng = SeededRng::new(seed);
        let (k, pi) = random_reversible_kernel(n, &mut rng);
        let gamma = random_vorticity(&k, &pi, &mut rng);
        let p = additive_kernel(&k, &gamma, &pi).unwrap();
        for _ in 0..8 {
            let f = random_function(n, &mut rng);
            let rev = asymptotic_variance_exact(&k, &pi, &f).unwrap();
            let non = asymptotic_variance_exact(&p, &pi, &f).unwrap();
            prop_assert!(non <= rev + 1e-10, "{non} > {rev}");
        }
    }

    #[test]
    fn reversible_rate_matches_closed_form(seed in any::<u64>(), n in 2usize..6) {
        let mut rng = SeededRng::new(seed);
        let (k, pi) = random_reversible_kernel(n, &mut rng);
        let mu = random_probability(n, &mut rng);
        let r = ld_rate_function(&uniformize(&k, 1.0), &mu).unwrap();
        let exact = reversible_rate(&k, &pi.normalized(), &mu);
        prop_assert!((r.value - exact).abs() <= 1e-8 * (1.0 + exact), "{} vs {exact}", r.value);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn vorticity_raises_the_rate_function(seed in any::<u64>()) {
        let mut rng = SeededRng::new(seed);
        let (k, pi) = random_reversible_kernel(4, &mut rng);
        let gamma = random_vorticity(&k, &pi, &mut rng);
        let p = additive_kernel(&k, &gamma, &pi).unwrap();
        let (gk, gp) = (uniformize(&k, 1.0), uniformize(&p, 1.0));
        for _ in 0..3 {
            let mu = random_probability(4, &mut rng);
            let ik = ld_rate_function(&gk, &mu).unwrap().value;
            let ip = ld_rate_function(&gp, &mu).unwrap().value;
            prop_assert!(ip >= ik - 1e-7, "{ip} < {ik}");
        }
        prop_assert!(ld_rate_function(&gp, &pi.normalized()).unwrap().value <= 1e-8);
    }
}

#[test]
fn strict_variance_decrease_occurs() {
    let mut rng = SeededRng::new(3);
    let mut strict = 0;
    for _ in 0..20 {
        let (k, pi) = random_reversible_kernel(5, &mut rng);
        let gamma = random_vorticity(&k, &pi, &mut rng);
        let p = additive_kernel(&k, &gamma, &pi).unwrap();
        let f = random_function(5, &mut rng);
        let rev = asymptotic_variance_exact(&k, &pi, &f).unwrap();
        let non = asymptotic_variance_exact(&p, &pi, &f).unwrap();
        if non < rev - 1e-10 {
            strict += 1;
        }
    }
    assert!(strict > 0);
}

#[test]
fn excessive_vorticity_is_rejected() {
    let mut rng = SeededRng::new(4);
    let pi = random_distribution(4, &mut rng);
    let q = random_proposal(4, &mut rng);
    let k = mh_kernel(&q, &pi).unwrap();
    let gamma = loop {
        let g = random_vorticity(&k, &pi, &mut rng);
        if !g.is_zero() {
            break g;
        }
    };
    let err = make_compat_triple(q, gamma.scaled(100.0), pi, false).unwrap_err();
    assert!(matches!(err, MarkovError::VorticityBoundViolated(..)));
}

#[test]
fn periodic_chain_has_no_asymptotic_variance() {
    let p = StochasticMatrix::new(DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])).unwrap();
    let pi = stationary_distribution(&p).unwrap();
    let err = asymptotic_variance_exact(&p, &pi, &[1.0, -1.0]).unwrap_err();
    assert!(matches!(err, AnalysisError::Periodic { .. }));
}
