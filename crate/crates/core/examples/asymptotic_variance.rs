//! Compares exact asymptotic variances of a reversible kernel `K` and the
//! non-reversible `K + diag(π)⁻¹Γ/2` on a random five-state instance.

use nrmh::analysis::asymptotic_variance_exact;
use nrmh::instances::{random_function, random_reversible_kernel, random_vorticity};
use nrmh::markov::additive_kernel;
use nrmh::rng::SeededRng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = SeededRng::new(42);
    let (k, pi) = random_reversible_kernel(5, &mut rng);
    let gamma = random_vorticity(&k, &pi, &mut rng);
    let p = additive_kernel(&k, &gamma, &pi)?;
    println!("{:>10} {:>12} {:>12}", "function", "reversible", "vorticity");
    for i in 0..6 {
        let f = random_function(5, &mut rng);
        let a = asymptotic_variance_exact(&k, &pi, &f)?;
        let b = asymptotic_variance_exact(&p, &pi, &f)?;
        println!("{i:>10} {a:>12.6} {b:>12.6}");
    }
    Ok(())
}
