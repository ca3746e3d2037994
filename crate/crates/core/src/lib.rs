pub mod analysis;
pub mod diagnostics;
pub mod experiment;
pub mod gauss;
pub mod instances;
pub mod io;
pub mod markov;
pub mod numerics;
pub mod rng;
