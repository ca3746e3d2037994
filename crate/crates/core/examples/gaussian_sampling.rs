//! Samples the 3-dimensional benchmark Gaussian with NRMH and with the
//! Langevin baseline at the same step size, and compares the chains.

use nrmh::diagnostics::{acceptance_ratio, batch_means_asvar, eacf};
use nrmh::gauss::{presets, run_chain, GaussianTarget, Kernel, ProposalModel, SkewDrift};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let target = GaussianTarget::new(presets::benchmark_3d_covariance())?;
    let drift = SkewDrift::new(&target, &presets::benchmark_3d_skew())?;
    let model = ProposalModel::with_selected_params(target, drift)?;
    let p = *model.params();
    println!("c = {:.4}, h = {:.4}, sigma = {:.4}", p.c, p.h, p.sigma);

    let steps = 200_000;
    let nr = run_chain(Kernel::Nrmh(&model), &[0.0; 3], steps, 1)?;
    let mh = run_chain(Kernel::Mala { target: model.target(), h: p.h }, &[0.0; 3], steps, 2)?;
    for trace in [&nr, &mh] {
        let acf = eacf(trace, 200)?;
        let at: Vec<String> = (0..3).map(|i| format!("{:.3}", acf.normalized(i)[200])).collect();
        let asvar: Vec<String> = batch_means_asvar(trace)?.iter().map(|v| format!("{v:.1}")).collect();
        println!("{}", trace.meta().algorithm);
        println!("  acceptance       {:.4}", acceptance_ratio(trace)?);
        println!("  variances        {:?}", trace.variances().iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>());
        println!("  acf at lag 200   [{}]", at.join(", "));
        println!("  batch means      [{}]", asvar.join(", "));
    }
    Ok(())
}
