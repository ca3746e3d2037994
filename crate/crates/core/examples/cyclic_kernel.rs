//! Builds MH and non-reversible MH kernels for a uniform target on three
//! states with a cyclic vorticity, then checks invariance and simulates.

use nrmh::markov::{
    make_compat_triple, mh_kernel, nrmh_kernel, sample_chain, vorticity_of, Distribution, StochasticMatrix,
    VorticityMatrix,
};
use nrmh::numerics::DenseMatrix;

fn print(name: &str, m: &DenseMatrix) {
    println!("{name}:");
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:.4}")).collect();
        println!("  [{}]", row.join(", "));
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = StochasticMatrix::new(DenseMatrix::from_fn(3, 3, |_, _| 1.0 / 3.0))?;
    let pi = Distribution::uniform(3);
    let cycle = DenseMatrix::from_rows(&[vec![0.0, 1.0, -1.0], vec![-1.0, 0.0, 1.0], vec![1.0, -1.0, 0.0]]);
    let gamma = VorticityMatrix::from_matrix(&cycle.scale(1.0 / 9.0))?;

    let triple = make_compat_triple(q.clone(), gamma.clone(), pi.clone(), false)?;
    let p = nrmh_kernel(&triple);
    print("MH kernel", mh_kernel(&q, &pi)?.matrix());
    print("NRMH kernel", p.matrix());
    println!("invariance residual  {:.2e}", pi.invariance_residual(&p));
    println!("vorticity recovered  {:.2e}", vorticity_of(&p, &pi)?.max_abs_diff(&gamma));

    let path = sample_chain(&p, 0, 300_000, 7);
    let mut counts = [0usize; 3];
    let mut forward = 0usize;
    for w in path.windows(2) {
        counts[w[1]] += 1;
        forward += usize::from(w[1] == (w[0] + 1) % 3);
    }
    let steps = (path.len() - 1) as f64;
    println!("visit frequencies    {:?}", counts.map(|c| format!("{:.3}", c as f64 / steps)));
    println!("forward moves        {:.3}", forward as f64 / steps);
    Ok(())
}
