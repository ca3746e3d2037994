//! The same non-reversible chain built two ways: NRMH with proposal
//! `H + diag(π)⁻¹Γ/2`, and the MH kernel of `H` plus `diag(π)⁻¹Γ/2`.

use nrmh::analysis::equivalence_check;
use nrmh::instances::{random_distribution, random_proposal, random_vorticity};
use nrmh::rng::SeededRng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = SeededRng::new(9);
    for n in 3..=7 {
        let pi = random_distribution(n, &mut rng);
        let h = random_proposal(n, &mut rng);
        let gamma = random_vorticity(&h, &pi, &mut rng);
        let report = equivalence_check(&h, &gamma, &pi)?;
        println!("n = {n}: max |P1 - P2| = {:.2e}", report.max_diff);
    }
    Ok(())
}
