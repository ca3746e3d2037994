use std::fmt::Write as _;
use std::fs;

use super::{ExperimentConfig, ExperimentError};
use crate::analysis::{asymptotic_variance_exact, ld_rate_function, uniformize, AnalysisError};
use crate::instances::{random_distribution, random_function, random_probability, random_proposal, random_vorticity};
use crate::io::{self, format_matrix, format_vector};
use crate::markov::{
    additive_kernel, make_compat_triple, mh_kernel, nrmh_kernel, sample_chain, vorticity_of, Distribution,
    StochasticMatrix, VorticityMatrix,
};
use crate::numerics::DenseMatrix;
use crate::rng::{derive_seed, SeededRng};

/// The 3-state example: uniform target, uniform proposal, cyclic vorticity `C/9`.
#[derive(Debug, Clone)]
pub struct CyclicDemo {
    pub q: StochasticMatrix,
    pub gamma: VorticityMatrix,
    pub pi: Distribution,
    pub p_mh: StochasticMatrix,
    pub p_nrmh: StochasticMatrix,
    pub stationarity_residual: f64,
    pub vorticity_recovery: f64,
    /// Visit frequencies along a sampled NRMH path.
    pub empirical: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceRow {
    pub instance: usize,
    pub n: usize,
    pub function: usize,
    pub reversible: f64,
    pub nonreversible: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub instance: usize,
    pub n: usize,
    pub measure: usize,
    pub reversible: f64,
    pub nonreversible: f64,
}

#[derive(Debug, Clone)]
pub struct DiscreteReport {
    pub cyclic: CyclicDemo,
    /// `K` reversible, `P = K + diag(π)⁻¹Γ/2`.
    pub variance: Vec<VarianceRow>,
    /// Control: MH kernel against NRMH with `Γ = 0` on the same proposal.
    pub control: Vec<VarianceRow>,
    pub rates: Vec<RateRow>,
}

impl DiscreteReport {
    /// Rows where the non-reversible variance exceeds the reversible one by more than `1e-10`.
    pub fn variance_violations(&self) -> usize {
        self.variance.iter().filter(|r| r.nonreversible > r.reversible + 1e-10).count()
    }

    /// Instances in which at least one function has a strictly smaller variance.
    pub fn instances_with_strict_decrease(&self) -> usize {
        let mut ids: Vec<usize> = self
            .variance
            .iter()
            .filter(|r| r.nonreversible < r.reversible - 1e-10)
            .map(|r| r.instance)
            .collect();
        ids.dedup();
        ids.len()
    }

    pub fn rate_violations(&self) -> usize {
        self.rates.iter().filter(|r| r.nonreversible < r.reversible - 1e-7).count()
    }

    pub fn control_max_diff(&self) -> f64 {
        self.control.iter().map(|r| (r.reversible - r.nonreversible).abs()).fold(0.0, f64::max)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "discrete-demo");
        let _ = writeln!(s, "cyclic stationarity residual = {:e}", self.cyclic.stationarity_residual);
        let _ = writeln!(s, "cyclic vorticity recovery    = {:e}", self.cyclic.vorticity_recovery);
        let instances = self.variance.iter().map(|r| r.instance + 1).max().unwrap_or(0);
        let _ = writeln!(
            s,
            "variance: {} rows over {instances} instances, {} violations, strict decrease in {} instances",
            self.variance.len(),
            self.variance_violations(),
            self.instances_with_strict_decrease()
        );
        let _ = writeln!(s, "control max |difference| = {:e}", self.control_max_diff());
        let _ = writeln!(s, "rate function: {} rows, {} violations", self.rates.len(), self.rate_violations());
        s
    }
}

fn numerical<E: std::fmt::Display>(e: E) -> ExperimentError {
    ExperimentError::Numerical(e.to_string())
}

fn cyclic_demo(steps: usize, seed: u64) -> Result<CyclicDemo, ExperimentError> {
    let third = 1.0 / 3.0;
    let q = StochasticMatrix::new(DenseMatrix::from_fn(3, 3, |_, _| third)).map_err(numerical)?;
    let c = DenseMatrix::from_rows(&[vec![0.0, 1.0, -1.0], vec![-1.0, 0.0, 1.0], vec![1.0, -1.0, 0.0]]);
    let gamma = VorticityMatrix::from_matrix(&c.scale(1.0 / 9.0)).map_err(numerical)?;
    let pi = Distribution::uniform(3);
    let p_mh = mh_kernel(&q, &pi).map_err(numerical)?;
    let triple = make_compat_triple(q.clone(), gamma.clone(), pi.clone(), false).map_err(numerical)?;
    let p_nrmh = nrmh_kernel(&triple);
    let stationarity_residual = pi.invariance_residual(&p_nrmh);
    let vorticity_recovery = vorticity_of(&p_nrmh, &pi).map_err(numerical)?.max_abs_diff(&gamma);
    let mut empirical = vec![0.0; 3];
    if steps > 0 {
        for x in sample_chain(&p_nrmh, 0, steps, seed) {
            empirical[x] += 1.0;
        }
        for e in &mut empirical {
            *e /= steps as f64;
        }
    }
    Ok(CyclicDemo { q, gamma, pi, p_mh, p_nrmh, stationarity_residual, vorticity_recovery, empirical })
}

/// Draws proposal, target and a nonzero vorticity on `n` states.
fn draw_instance(n: usize, rng: &mut SeededRng) -> (StochasticMatrix, Distribution, VorticityMatrix) {
    loop {
        let pi = random_distribution(n, rng);
        let q = random_proposal(n, rng);
        let k = mh_kernel(&q, &pi).expect("zero vorticity is compatible");
        let gamma = random_vorticity(&k, &pi, rng);
        if !gamma.is_zero() {
            return (q, pi, gamma);
        }
    }
}

/// Runs the finite-state demonstrations: the 3-state cyclic chain, exact
/// asymptotic variances of reversible versus non-reversible kernels on random
/// instances (with a `Γ = 0` control), and large-deviation rate functions of
/// their uniformizations. Writes nothing.
pub fn run_discrete_demo(cfg: &ExperimentConfig) -> Result<DiscreteReport, ExperimentError> {
    cfg.check_common()?;
    let cyclic = cyclic_demo(cfg.steps, derive_seed(cfg.seed, 0))?;
    let mut rng = SeededRng::new(derive_seed(cfg.seed, 1));
    let mut variance = Vec::new();
    let mut control = Vec::new();
    let mut rates = Vec::new();
    for instance in 0..cfg.instances {
        let n = 3 + (rng.next_u64() % 4) as usize;
        let (q, pi, gamma) = draw_instance(n, &mut rng);
        let k = mh_kernel(&q, &pi).map_err(numerical)?;
        let p = additive_kernel(&k, &gamma, &pi).map_err(numerical)?;
        let zero = make_compat_triple(q, VorticityMatrix::zero(n), pi.clone(), false).map_err(numerical)?;
        let p_zero = nrmh_kernel(&zero);
        for function in 0..cfg.functions {
            let f = random_function(n, &mut rng);
            let var = |m: &StochasticMatrix| asymptotic_variance_exact(m, &pi, &f).map_err(numerical);
            variance.push(VarianceRow { instance, n, function, reversible: var(&k)?, nonreversible: var(&p)? });
            control.push(VarianceRow { instance, n, function, reversible: var(&k)?, nonreversible: var(&p_zero)? });
        }
        let gk = uniformize(&k, cfg.lambda);
        let gp = uniformize(&p, cfg.lambda);
        for measure in 0..cfg.measures {
            let mu = random_probability(n, &mut rng);
            let rate = |g| -> Result<f64, ExperimentError> {
                ld_rate_function(g, &mu).map(|r| r.value).map_err(|e: AnalysisError| numerical(e))
            };
            rates.push(RateRow { instance, n, measure, reversible: rate(&gk)?, nonreversible: rate(&gp)? });
        }
    }
    Ok(DiscreteReport { cyclic, variance, control, rates })
}

fn write(path: &std::path::Path, text: &str) -> Result<(), ExperimentError> {
    Ok(io::write(path, text)?)
}

fn variance_csv(rows: &[VarianceRow]) -> String {
    let mut s = String::from("instance,n,function,sigma2_reversible,sigma2_nonreversible,difference\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.instance,
            r.n,
            r.function,
            r.reversible,
            r.nonreversible,
            r.reversible - r.nonreversible
        );
    }
    s
}

/// Writes `cyclic/` (kernels, vorticity, target), `cyclic_checks.csv`,
/// `asvar.csv`, `asvar_control.csv`, `rate.csv` and `summary.csv`.
pub fn write_discrete_demo(report: &DiscreteReport, cfg: &ExperimentConfig) -> Result<(), ExperimentError> {
    let dir = cfg.out.join("cyclic");
    fs::create_dir_all(&dir).map_err(|e| ExperimentError::Output(format!("{}: {e}", dir.display())))?;
    let c = &report.cyclic;
    write(&dir.join("q.csv"), &format_matrix(c.q.matrix()))?;
    write(&dir.join("gamma.csv"), &format_matrix(&c.gamma.to_dense()))?;
    write(&dir.join("pi.csv"), &format_vector(c.pi.weights()))?;
    write(&dir.join("p_mh.csv"), &format_matrix(c.p_mh.matrix()))?;
    write(&dir.join("p_nrmh.csv"), &format_matrix(c.p_nrmh.matrix()))?;

    let mut checks = String::from("quantity,value\n");
    let _ = writeln!(checks, "stationarity_residual,{}", c.stationarity_residual);
    let _ = writeln!(checks, "vorticity_recovery,{}", c.vorticity_recovery);
    for (x, e) in c.empirical.iter().enumerate() {
        let _ = writeln!(checks, "empirical_frequency_{},{e}", x + 1);
    }
    write(&cfg.out.join("cyclic_checks.csv"), &checks)?;

    write(&cfg.out.join("asvar.csv"), &variance_csv(&report.variance))?;
    write(&cfg.out.join("asvar_control.csv"), &variance_csv(&report.control))?;

    let mut rate = String::from("instance,n,measure,rate_reversible,rate_nonreversible\n");
    for r in &report.rates {
        let _ = writeln!(rate, "{},{},{},{},{}", r.instance, r.n, r.measure, r.reversible, r.nonreversible);
    }
    write(&cfg.out.join("rate.csv"), &rate)?;

    let mut summary = String::from("quantity,value\n");
    let _ = writeln!(summary, "seed,{}", cfg.seed);
    let _ = writeln!(summary, "instances,{}", cfg.instances);
    let _ = writeln!(summary, "variance_violations,{}", report.variance_violations());
    let _ = writeln!(summary, "instances_with_strict_decrease,{}", report.instances_with_strict_decrease());
    let _ = writeln!(summary, "control_max_diff,{}", report.control_max_diff());
    let _ = writeln!(summary, "rate_violations,{}", report.rate_violations());
    write(&cfg.out.join("summary.csv"), &summary)
}
