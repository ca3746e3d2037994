use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::thread;

use super::{ExperimentConfig, ExperimentError, SkewSource};
use crate::diagnostics::{
    acceptance_ratio, batch_means_asvar, eacf, format_eacf_csv, format_metadata, format_summary_csv,
    format_trace_csv, ChainTrace, EacfResult,
};
use crate::gauss::{
    max_sigma_squared, optimize_skew_drift, presets, run_chain, select_params, GaussianTarget, Kernel,
    NrmhParams, ProposalModel, SkewDrift,
};
use crate::io::{self, format_matrix};
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    ThreeD,
    NineD,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::ThreeD => "experiment3d",
            Scenario::NineD => "experiment9d",
        }
    }

    fn default_covariance(self) -> crate::numerics::DenseMatrix {
        match self {
            Scenario::ThreeD => presets::benchmark_3d_covariance(),
            Scenario::NineD => presets::benchmark_9d_covariance(),
        }
    }

    fn default_skew(self) -> SkewSource {
        match self {
            Scenario::ThreeD => SkewSource::Benchmark3d,
            Scenario::NineD => SkewSource::Optimize,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChainReport {
    pub trace: ChainTrace,
    pub acceptance: f64,
    pub asvar: Vec<f64>,
    pub eacf: EacfResult,
}

impl ChainReport {
    fn from_trace(trace: ChainTrace, max_lag: usize) -> Result<Self, ExperimentError> {
        Ok(Self {
            acceptance: acceptance_ratio(&trace)?,
            asvar: batch_means_asvar(&trace)?,
            eacf: eacf(&trace, max_lag)?,
            trace,
        })
    }
}

#[derive(Debug, Clone)]
pub struct GaussianReport {
    pub scenario: Scenario,
    pub model: ProposalModel,
    /// Parameters from the selection rule, before any overrides.
    pub selected: NrmhParams,
    /// `s(B)` for the drift in use.
    pub spectral_bound: f64,
    /// `−tr(V⁻¹)/n`.
    pub optimal_bound: f64,
    /// `s(−V⁻¹)`.
    pub reversible_bound: f64,
    pub nrmh: ChainReport,
    pub baseline: Option<ChainReport>,
    pub master_seed: u64,
}

impl GaussianReport {
    pub fn summary(&self) -> String {
        let p = self.model.params();
        let mut s = String::new();
        let _ = writeln!(s, "{}: n = {}", self.scenario.name(), self.model.dim());
        let _ = writeln!(s, "c = {:.4}, h = {:.4e}, sigma = {:.4}", p.c, p.h, p.sigma);
        let _ = writeln!(s, "C1 = {:.6}, C2 = {:.6}", p.c1, p.c2);
        let _ = writeln!(
            s,
            "s(B) = {:.6}, -tr(V^-1)/n = {:.6}, s(-V^-1) = {:.6}",
            self.spectral_bound, self.optimal_bound, self.reversible_bound
        );
        let _ = writeln!(s, "acceptance NRMH = {:.4}", self.nrmh.acceptance);
        if let Some(b) = &self.baseline {
            let _ = writeln!(s, "acceptance MH   = {:.4}", b.acceptance);
        }
        s
    }
}

fn load_target(scenario: Scenario, cfg: &ExperimentConfig) -> Result<GaussianTarget, ExperimentError> {
    let v = match &cfg.covariance {
        Some(path) => io::read_matrix(path).map_err(|e| ExperimentError::Config(e.to_string()))?,
        None => scenario.default_covariance(),
    };
    GaussianTarget::new(v).map_err(ExperimentError::from_input)
}

fn load_drift(
    scenario: Scenario,
    cfg: &ExperimentConfig,
    target: &GaussianTarget,
) -> Result<SkewDrift, ExperimentError> {
    let n = target.dim();
    match cfg.skew.clone().unwrap_or_else(|| scenario.default_skew()) {
        SkewSource::Benchmark3d => {
            if n != 3 {
                return Err(ExperimentError::Config(format!("benchmark-3d skew needs n = 3, target has n = {n}")));
            }
            SkewDrift::new(target, &presets::benchmark_3d_skew()).map_err(ExperimentError::from_input)
        }
        SkewSource::Zero => Ok(SkewDrift::zero(target)),
        SkewSource::Csv(path) => {
            let s = io::read_matrix(&path).map_err(|e| ExperimentError::Config(e.to_string()))?;
            SkewDrift::new(target, &s).map_err(ExperimentError::from_input)
        }
        SkewSource::Optimize => Ok(optimize_skew_drift(target, &cfg.drift_budget)
            .map_err(ExperimentError::from_model)?
            .drift),
    }
}

/// Selected parameters with the configured overrides applied. Overriding `h`
/// alone moves `σ` to its largest admissible value for that `h`; `c` defaults to `σⁿ`.
fn apply_overrides(n: usize, sel: NrmhParams, cfg: &ExperimentConfig) -> Result<NrmhParams, ExperimentError> {
    if cfg.h.is_none() && cfg.sigma.is_none() && cfg.c.is_none() {
        return Ok(sel);
    }
    let h = cfg.h.unwrap_or(sel.h);
    let sigma = match (cfg.sigma, cfg.h) {
        (Some(s), _) => s,
        (None, Some(h)) => max_sigma_squared(h, sel.c1, sel.c2).max(0.0).sqrt(),
        (None, None) => sel.sigma,
    };
    let c = cfg.c.unwrap_or_else(|| sigma.powi(n as i32));
    NrmhParams::new(n, h, sigma, c, sel.c1, sel.c2)
        .map_err(|e| ExperimentError::Config(format!("parameter overrides rejected: {e}")))
}

/// Builds the model, runs NRMH and (optionally) the Langevin baseline with the
/// same `h` concurrently, and computes the diagnostics. Writes nothing.
pub fn run_gaussian(scenario: Scenario, cfg: &ExperimentConfig) -> Result<GaussianReport, ExperimentError> {
    cfg.check_common()?;
    if cfg.steps < 16 || cfg.max_lag >= cfg.steps {
        return Err(ExperimentError::Config(format!(
            "steps = {} must be at least 16 and exceed max_lag = {}",
            cfg.steps, cfg.max_lag
        )));
    }
    let target = load_target(scenario, cfg)?;
    let n = target.dim();
    let x0 = cfg.start.clone().unwrap_or_else(|| vec![0.0; n]);
    if x0.len() != n {
        return Err(ExperimentError::Config(format!("start has {} entries, target has n = {n}", x0.len())));
    }
    let drift = load_drift(scenario, cfg, &target)?;
    let selected = select_params(&target, &drift).map_err(ExperimentError::from_model)?;
    let params = apply_overrides(n, selected, cfg)?;
    let spectral_bound = drift.spectral_bound().map_err(ExperimentError::from_model)?;
    let optimal_bound = -target.precision().trace() / n as f64;
    let reversible_bound = SkewDrift::zero(&target).spectral_bound().map_err(ExperimentError::from_model)?;
    let model = ProposalModel::new(target, drift, params).map_err(ExperimentError::from_model)?;

    let h = model.params().h;
    let (nrmh, baseline) = thread::scope(|s| {
        let nr = s.spawn(|| run_chain(Kernel::Nrmh(&model), &x0, cfg.steps, derive_seed(cfg.seed, 0)));
        let mh = cfg.baseline.then(|| {
            s.spawn(|| run_chain(Kernel::Mala { target: model.target(), h }, &x0, cfg.steps, derive_seed(cfg.seed, 1)))
        });
        (nr.join().expect("sampler thread panicked"), mh.map(|m| m.join().expect("sampler thread panicked")))
    });
    let nrmh = ChainReport::from_trace(nrmh.map_err(ExperimentError::from_model)?, cfg.max_lag)?;
    let baseline = match baseline {
        Some(t) => Some(ChainReport::from_trace(t.map_err(ExperimentError::from_model)?, cfg.max_lag)?),
        None => None,
    };
    Ok(GaussianReport {
        scenario,
        model,
        selected,
        spectral_bound,
        optimal_bound,
        reversible_bound,
        nrmh,
        baseline,
        master_seed: cfg.seed,
    })
}

fn write(path: &Path, text: &str) -> Result<(), ExperimentError> {
    Ok(io::write(path, text)?)
}

fn write_chain(dir: &Path, chain: &ChainReport, report: &GaussianReport, cfg: &ExperimentConfig) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir).map_err(|e| ExperimentError::Output(format!("{}: {e}", dir.display())))?;
    write(&dir.join("trace.csv"), &format_trace_csv(&chain.trace, cfg.trace_thin))?;
    write(&dir.join("eacf.csv"), &format_eacf_csv(&chain.eacf))?;
    write(&dir.join("summary.csv"), &format_summary_csv(&chain.trace)?)?;
    let extra = [
        ("experiment", report.scenario.name().into()),
        ("dimension", report.model.dim().into()),
        ("master_seed", report.master_seed.into()),
        ("acceptance_ratio", chain.acceptance.into()),
        ("max_lag", cfg.max_lag.into()),
        ("trace_thin", cfg.trace_thin.into()),
        ("asymptotic_variance_note", "batch-means estimate".into()),
    ];
    write(&dir.join("metadata.json"), &format_metadata(chain.trace.meta(), chain.trace.len(), &extra))
}

/// Writes `params.csv`, `acceptance.csv`, `covariance.csv`, `skew.csv`, and per
/// chain a directory (`nrmh/`, `mh/`) with `trace.csv`, `eacf.csv`,
/// `summary.csv` and `metadata.json`.
pub fn write_gaussian(report: &GaussianReport, cfg: &ExperimentConfig) -> Result<(), ExperimentError> {
    let out = &cfg.out;
    fs::create_dir_all(out).map_err(|e| ExperimentError::Output(format!("{}: {e}", out.display())))?;
    let p = report.model.params();
    let mut params = String::from("key,value\n");
    for (k, v) in [
        ("c", p.c),
        ("h", p.h),
        ("sigma", p.sigma),
        ("C1", p.c1),
        ("C2", p.c2),
        ("selected_c", report.selected.c),
        ("selected_h", report.selected.h),
        ("selected_sigma", report.selected.sigma),
        ("spectral_bound", report.spectral_bound),
        ("optimal_spectral_bound", report.optimal_bound),
        ("reversible_spectral_bound", report.reversible_bound),
    ] {
        let _ = writeln!(params, "{k},{v}");
    }
    write(&out.join("params.csv"), &params)?;
    write(&out.join("covariance.csv"), &format_matrix(report.model.target().covariance()))?;
    write(&out.join("skew.csv"), &format_matrix(&report.model.drift().s()))?;

    let mut acc = String::from("algorithm,acceptance_ratio\n");
    let _ = writeln!(acc, "{},{}", report.nrmh.trace.meta().algorithm, report.nrmh.acceptance);
    if let Some(b) = &report.baseline {
        let _ = writeln!(acc, "{},{}", b.trace.meta().algorithm, b.acceptance);
    }
    write(&out.join("acceptance.csv"), &acc)?;

    write_chain(&out.join("nrmh"), &report.nrmh, report, cfg)?;
    if let Some(b) = &report.baseline {
        write_chain(&out.join("mh"), b, report, cfg)?;
    }
    Ok(())
}
