//! Autocorrelation and batch-means estimates on an AR(1) trace, where the
//! asymptotic variance of a unit-variance AR(1) chain is known:
//! `(1 + φ)/(1 − φ)`.

use nrmh::diagnostics::{batch_means_asvar, eacf, format_summary_csv, ChainTrace, TraceMeta};
use nrmh::rng::SeededRng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let phi: [f64; 2] = [0.5, 0.9];
    let mut trace = ChainTrace::new(2, TraceMeta::new(1, "AR(1)", 0.0, 0.0, 0.0));
    let mut rng = SeededRng::new(1);
    let mut x = [0.0; 2];
    for _ in 0..400_000 {
        for (xi, p) in x.iter_mut().zip(phi) {
            *xi = p * *xi + (1.0 - p * p).sqrt() * rng.normal();
        }
        trace.push(&x, true);
    }
    let acf = eacf(&trace, 5)?;
    for (i, p) in phi.iter().enumerate() {
        let r: Vec<String> = acf.normalized(i).iter().map(|v| format!("{v:.3}")).collect();
        println!("phi = {p}: acf [{}]", r.join(", "));
    }
    let est = batch_means_asvar(&trace)?;
    for (p, e) in phi.iter().zip(est) {
        println!("phi = {p}: batch means {e:.3}, exact {:.3}", (1.0 + p) / (1.0 - p));
    }
    print!("{}", format_summary_csv(&trace)?);
    Ok(())
}
