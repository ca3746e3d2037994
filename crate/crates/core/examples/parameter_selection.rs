//! Constants `C1 ≤ C2` and the selected `(c, h, σ)` for a few targets, with
//! the largest admissible `σ` along a range of step sizes.

use nrmh::gauss::{compute_constants, max_sigma_squared, presets, select_params, GaussianTarget, SkewDrift};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let three = GaussianTarget::new(presets::benchmark_3d_covariance())?;
    let cases = [
        ("1D, S = 0", GaussianTarget::from_diag(&[1.0])?, None),
        ("3D, S = 0", three.clone(), None),
        ("3D, optimal S", three, Some(presets::benchmark_3d_skew())),
    ];
    for (name, target, skew) in cases {
        let drift = match skew {
            Some(s) => SkewDrift::new(&target, &s)?,
            None => SkewDrift::zero(&target),
        };
        let (c1, c2) = compute_constants(&target, &drift)?;
        let p = select_params(&target, &drift)?;
        println!("{name:<14} C1 = {c1:.4}, C2 = {c2:.4} -> c = {:.4}, h = {:.4}, sigma = {:.4}", p.c, p.h, p.sigma);
        for frac in [0.1, 0.5, 0.9] {
            let h = frac * 2.0 / c2;
            println!("{:<14} h = {h:.4}: max sigma = {:.4}", "", max_sigma_squared(h, c1, c2).sqrt());
        }
    }
    Ok(())
}
