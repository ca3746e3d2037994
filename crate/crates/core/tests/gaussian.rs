use std::f64::consts::PI;

use nrmh::diagnostics::acceptance_ratio;
use nrmh::gauss::{
    general_target_ratio, presets, run_chain, select_params, GaussianError, GaussianTarget, GeneralTarget, Kernel,
    ProposalModel, SkewDrift,
};
use nrmh::numerics::{sym_eigen, Cholesky, DenseMatrix, Lu};
use nrmh::rng::SeededRng;
use proptest::prelude::*;

fn model_3d() -> ProposalModel {
    let t = GaussianTarget::new(presets::benchmark_3d_covariance()).unwrap();
    let d = SkewDrift::new(&t, &presets::benchmark_3d_skew()).unwrap();
    ProposalModel::with_selected_params(t, d).unwrap()
}

fn random_instance(n: usize, rng: &mut SeededRng) -> (GaussianTarget, SkewDrift) {
    let l = DenseMatrix::from_fn(n, n, |_, _| rng.normal() / (n as f64).sqrt());
    let v = &(&l * &l.transpose()) + &DenseMatrix::identity(n).scale(0.2);
    let t = GaussianTarget::new(v.symmetrized()).unwrap();
    let upper: Vec<f64> = (0..n * (n - 1) / 2).map(|_| rng.normal()).collect();
    let d = SkewDrift::from_upper(&t, &upper).unwrap();
    (t, d)
}

/// `x` from a Gaussian twice as wide as the target, `y` either a proposal from
/// `x` or an independent wide draw.
fn random_pair(model: &ProposalModel, rng: &mut SeededRng) -> (Vec<f64>, Vec<f64>) {
    let wide = |rng: &mut SeededRng| -> Vec<f64> { model.target().sample(rng).iter().map(|v| 2.0 * v).collect() };
    let x = wide(rng);
    let y = if rng.uniform() < 0.5 {
        let z: Vec<f64> = (0..model.dim()).map(|_| rng.normal()).collect();
        model.propose_with(&x, &z)
    } else {
        wide(rng)
    };
    (x, y)
}

fn log_joint_density(m: &DenseMatrix, x: &[f64], y: &[f64]) -> f64 {
    let chol = Cholesky::new(m).unwrap();
    let z: Vec<f64> = x.iter().chain(y).copied().collect();
    -(z.len() as f64) / 2.0 * (2.0 * PI).ln() - 0.5 * chol.log_det() - 0.5 * chol.inv_quad_form(&z)
}

#[test]
fn gamma_matches_dense_joint_density() {
    let model = model_3d();
    let mut rng = SeededRng::new(11);
    for _ in 0..200 {
        let (x, y) = random_pair(&model, &mut rng);
        let parts = model.log_parts(&x, &y);
        let fxy = log_joint_density(model.m(), &x, &y);
        let fyx = log_joint_density(model.m(), &y, &x);
        assert!((parts.logf_xy - fxy).abs() < 1e-9 * (1.0 + fxy.abs()), "{} vs {fxy}", parts.logf_xy);
        assert!((parts.logf_yx - fyx).abs() < 1e-9 * (1.0 + fyx.abs()));
        let gamma = fxy.exp() - fyx.exp();
        assert!((parts.gamma() - gamma).abs() <= 1e-9 * (fxy.exp() + fyx.exp()));
    }
}

#[test]
fn gamma_is_skew() {
    let model = model_3d();
    let mut rng = SeededRng::new(12);
    for _ in 0..1000 {
        let (x, y) = random_pair(&model, &mut rng);
        assert_eq!(model.log_parts(&x, &y).gamma(), -model.log_parts(&y, &x).gamma());
    }
}

#[test]
fn nonnegativity_on_random_instances() {
    let mut rng = SeededRng::new(13);
    for n in 2..=5 {
        let (t, d) = random_instance(n, &mut rng);
        let model = ProposalModel::with_selected_params(t, d).unwrap();
        for _ in 0..2000 {
            let (x, y) = random_pair(&model, &mut rng);
            assert!(model.nonnegativity_term(&x, &y) >= -1e-12);
            assert!(model.hastings_ratio(&x, &y).unwrap() >= 0.0);
        }
    }
}

/// Recomputes the construction identities from the public matrices.
fn check_identities(model: &ProposalModel) {
    let n = model.dim();
    let p = model.params();
    let (h, s2) = (p.h, p.sigma * p.sigma);
    let det_m = Lu::new(model.m()).unwrap().det();
    let det_r = Lu::new(model.r()).unwrap().det();
    let expected = (2.0 * h * s2).powi(n as i32) * det_r;
    assert!((det_m / expected - 1.0).abs() < 1e-8, "det M {det_m} vs {expected}");

    let v = model.target().covariance();
    let lower = sym_eigen(&(model.r() - &v.scale(s2)).symmetrized()).unwrap().min();
    assert!(lower >= -1e-10, "R - sigma^2 V has eigenvalue {lower}");
    if p.c > 0.0 {
        let kappa = (2.0 - h * (p.c2 - p.c1)) / (2.0 - h * p.c2);
        let upper = sym_eigen(&(model.r() - &v.scale(s2 * kappa)).symmetrized()).unwrap().max();
        assert!(upper <= 1e-10, "R - sigma^2 kappa V has eigenvalue {upper}");
    }
    let direct = Lu::new(model.m()).unwrap().inverse();
    let scale = 1.0 + direct.max_abs();
    assert!(model.m_inv().max_abs_diff(&direct) <= 1e-8 * scale);
}

#[test]
fn identities_for_benchmarks() {
    let one = GaussianTarget::from_diag(&[1.0]).unwrap();
    let zero = SkewDrift::zero(&one);
    let p = select_params(&one, &zero).unwrap();
    check_identities(&ProposalModel::new(one.clone(), zero.clone(), p).unwrap());
    let q = nrmh::gauss::NrmhParams::new(1, 0.5, 1.0, 0.0, 1.0, 1.0).unwrap();
    check_identities(&ProposalModel::new(one, zero, q).unwrap());

    check_identities(&model_3d());

    let nine = GaussianTarget::new(presets::benchmark_9d_covariance()).unwrap();
    let mut rng = SeededRng::new(14);
    let upper: Vec<f64> = (0..36).map(|_| rng.normal()).collect();
    let d = SkewDrift::from_upper(&nine, &upper).unwrap();
    check_identities(&ProposalModel::with_selected_params(nine, d).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn identities_hold_for_random_instances(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = SeededRng::new(seed);
        let (t, d) = random_instance(n, &mut rng);
        let model = ProposalModel::with_selected_params(t, d).unwrap();
        check_identities(&model);
    }

    #[test]
    fn ratio_is_one_at_origin(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = SeededRng::new(seed);
        let (t, d) = random_instance(n, &mut rng);
        let model = ProposalModel::with_selected_params(t, d).unwrap();
        let o = vec![0.0; n];
        prop_assert!((model.hastings_ratio(&o, &o).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn general_target_equal_to_envelope_matches() {
    let model = model_3d();
    let env = model.target().clone();
    let same = GeneralTarget::new(move |x| env.log_density(x), model.target().clone(), 1.0).unwrap();
    let env = model.target().clone();
    let doubled = GeneralTarget::new(move |x| env.log_density(x) + 2f64.ln(), model.target().clone(), 2.0).unwrap();
    let mut rng = SeededRng::new(15);
    for _ in 0..500 {
        let (x, y) = random_pair(&model, &mut rng);
        let r = model.hastings_ratio(&x, &y).unwrap();
        let a = general_target_ratio(&same, &model, &x, &y).unwrap();
        let b = general_target_ratio(&doubled, &model, &x, &y).unwrap();
        assert!((a - r).abs() <= 1e-10 * (1.0 + r));
        assert!((b - r).abs() <= 1e-10 * (1.0 + r));
    }
}

fn mixture(model: &ProposalModel, k: f64) -> GeneralTarget {
    let base = model.target().clone();
    let shifted = GaussianTarget::from_diag(&[0.5, 2.0, 0.25]).unwrap();
    let logpi = move |x: &[f64]| {
        let moved: Vec<f64> = x.iter().zip([1.5, -1.0, 0.5]).map(|(a, m)| a - m).collect();
        let a = 0.5f64.ln() + base.log_density(x);
        let b = 0.5f64.ln() + shifted.log_density(&moved);
        let hi = a.max(b);
        hi + ((a - hi).exp() + (b - hi).exp()).ln()
    };
    GeneralTarget::new(logpi, model.target().clone(), k).unwrap()
}

#[test]
fn mixture_dominating_envelope_is_nonnegative() {
    let model = model_3d();
    let gt = mixture(&model, 0.5);
    let mut rng = SeededRng::new(16);
    for _ in 0..100_000 {
        let (x, y) = random_pair(&model, &mut rng);
        assert!(general_target_ratio(&gt, &model, &x, &y).unwrap() >= 0.0);
    }
}

#[test]
fn violated_envelope_is_reported() {
    let model = model_3d();
    let gt = mixture(&model, 50.0);
    let mut rng = SeededRng::new(17);
    let detected = (0..10_000).any(|_| {
        let (x, y) = random_pair(&model, &mut rng);
        matches!(general_target_ratio(&gt, &model, &x, &y), Err(GaussianError::EnvelopeViolationDetected { .. }))
    });
    assert!(detected);
}

fn assert_covariance_close(trace: &nrmh::diagnostics::ChainTrace, diag: &[f64]) {
    for (i, (v, want)) in trace.variances().iter().zip(diag).enumerate() {
        assert!((v / want - 1.0).abs() < 0.05, "coordinate {i}: variance {v}, target {want}");
    }
}

#[test]
fn nrmh_and_langevin_chains_keep_the_target() {
    let model = model_3d();
    let diag = [1.0, 1.0, 0.25];
    let nr = run_chain(Kernel::Nrmh(&model), &[0.0; 3], 1_000_000, 21).unwrap();
    assert_covariance_close(&nr, &diag);
    let h = model.params().h;
    let mala = run_chain(Kernel::Mala { target: model.target(), h }, &[0.0; 3], 1_000_000, 22).unwrap();
    assert_covariance_close(&mala, &diag);
    assert!(acceptance_ratio(&nr).unwrap() < acceptance_ratio(&mala).unwrap());
}
