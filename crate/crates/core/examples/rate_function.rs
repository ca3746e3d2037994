//! Large-deviation rate functions of the occupation measure for a reversible
//! chain and its non-reversible perturbation, after uniformization.

use nrmh::analysis::{ld_rate_function, uniformize};
use nrmh::instances::{random_probability, random_reversible_kernel, random_vorticity};
use nrmh::markov::additive_kernel;
use nrmh::rng::SeededRng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = SeededRng::new(3);
    let (k, pi) = random_reversible_kernel(4, &mut rng);
    let gamma = random_vorticity(&k, &pi, &mut rng);
    let p = additive_kernel(&k, &gamma, &pi)?;
    let (gk, gp) = (uniformize(&k, 1.0), uniformize(&p, 1.0));

    let mut measures = vec![pi.normalized(), vec![0.5, 0.5, 0.0, 0.0]];
    measures.extend((0..4).map(|_| random_probability(4, &mut rng)));
    for mu in &measures {
        let a = ld_rate_function(&gk, mu)?;
        let b = ld_rate_function(&gp, mu)?;
        let shown: Vec<String> = mu.iter().map(|v| format!("{v:.3}")).collect();
        println!("mu = [{}]  I_K = {:.6}  I_G = {:.6}", shown.join(", "), a.value, b.value);
    }
    Ok(())
}
