//! Uses a vorticity density built for a Gaussian envelope `π₀` with a
//! two-component mixture target satisfying `k·π₀ ≤ π`, and samples it.

use nrmh::gauss::{general_target_ratio, select_params, GaussianTarget, GeneralTarget, ProposalModel, SkewDrift};
use nrmh::rng::SeededRng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let envelope = GaussianTarget::from_diag(&[1.0, 0.5])?;
    let drift = SkewDrift::from_upper(&envelope, &[1.0])?;
    let params = select_params(&envelope, &drift)?;
    let model = ProposalModel::new(envelope.clone(), drift, params)?;

    let base = envelope.clone();
    let other = GaussianTarget::from_diag(&[0.3, 0.3])?;
    let logpi = move |x: &[f64]| {
        let a = 0.5f64.ln() + base.log_density(x);
        let b = 0.5f64.ln() + other.log_density(&[x[0] - 2.0, x[1] + 1.0]);
        let hi = a.max(b);
        hi + ((a - hi).exp() + (b - hi).exp()).ln()
    };
    let target = GeneralTarget::new(logpi, envelope, 0.5)?;

    let mut rng = SeededRng::new(5);
    let mut x = vec![0.0, 0.0];
    let (mut accepted, mut sum) = (0usize, [0.0f64; 2]);
    let steps = 200_000;
    for _ in 0..steps {
        let z = [rng.normal(), rng.normal()];
        let y = model.propose_with(&x, &z);
        if rng.uniform() < general_target_ratio(&target, &model, &x, &y)?.min(1.0) {
            x = y;
            accepted += 1;
        }
        sum[0] += x[0];
        sum[1] += x[1];
    }
    println!("acceptance   {:.4}", accepted as f64 / steps as f64);
    println!("mean         ({:.3}, {:.3})  (mixture mean (1.000, -0.500))", sum[0] / steps as f64, sum[1] / steps as f64);
    Ok(())
}
