//! Trace statistics: empirical autocorrelation, batch-means variance
//! estimates, acceptance ratios, and their CSV forms.

use std::fmt::Write as _;
use std::path::Path;
use std::thread;

use thiserror::Error;

use crate::io::{self, CsvError};
use crate::rng::{NORMAL_METHOD, PRNG_NAME};

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("trace of length {len} is too short (need {needed})")]
    TraceTooShort { len: usize, needed: usize },
    #[error("state has dimension {found}, trace has {expected}")]
    Dimension { expected: usize, found: usize },
    #[error(transparent)]
    Csv(#[from] CsvError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceMeta {
    pub seed: u64,
    pub prng: String,
    pub normal_method: String,
    pub algorithm: String,
    pub h: f64,
    pub sigma: f64,
    pub c: f64,
    pub wall_time_secs: f64,
}

impl TraceMeta {
    pub fn new(seed: u64, algorithm: &str, h: f64, sigma: f64, c: f64) -> Self {
        Self {
            seed,
            prng: PRNG_NAME.to_string(),
            normal_method: NORMAL_METHOD.to_string(),
            algorithm: algorithm.to_string(),
            h,
            sigma,
            c,
            wall_time_secs: 0.0,
        }
    }
}

/// A sampled path: the state after each proposal and whether it was accepted.
#[derive(Debug, Clone)]
pub struct ChainTrace {
    dim: usize,
    states: Vec<f64>,
    accepted: Vec<bool>,
    meta: TraceMeta,
}

impl ChainTrace {
    pub fn new(dim: usize, meta: TraceMeta) -> Self {
        Self::with_capacity(dim, 0, meta)
    }

    pub fn with_capacity(dim: usize, len: usize, meta: TraceMeta) -> Self {
        assert!(dim > 0, "trace dimension must be positive");
        Self { dim, states: Vec::with_capacity(dim * len), accepted: Vec::with_capacity(len), meta }
    }

    /// Builds a trace from row-major states.
    pub fn from_parts(
        dim: usize,
        states: Vec<f64>,
        accepted: Vec<bool>,
        meta: TraceMeta,
    ) -> Result<Self, DiagnosticsError> {
        if dim == 0 || states.len() != dim * accepted.len() {
            return Err(DiagnosticsError::Dimension { expected: dim * accepted.len(), found: states.len() });
        }
        Ok(Self { dim, states, accepted, meta })
    }

    pub fn push(&mut self, state: &[f64], accepted: bool) {
        assert_eq!(state.len(), self.dim, "state dimension");
        self.states.extend_from_slice(state);
        self.accepted.push(accepted);
    }

    pub fn len(&self) -> usize {
        self.accepted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accepted.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major states, `len × dim`.
    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn state(&self, p: usize) -> &[f64] {
        &self.states[p * self.dim..(p + 1) * self.dim]
    }

    pub fn coordinate(&self, i: usize) -> Vec<f64> {
        self.states.iter().skip(i).step_by(self.dim).copied().collect()
    }

    pub fn accepted(&self) -> &[bool] {
        &self.accepted
    }

    pub fn meta(&self) -> &TraceMeta {
        &self.meta
    }

    pub fn meta_mut(&mut self) -> &mut TraceMeta {
        &mut self.meta
    }

    pub fn means(&self) -> Vec<f64> {
        (0..self.dim).map(|i| mean(&self.coordinate(i))).collect()
    }

    /// Sample variances (divisor `len − 1`).
    pub fn variances(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|i| {
                let x = self.coordinate(i);
                let m = mean(&x);
                x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
            })
            .collect()
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// `values[i][k] = r^i(k)` for lags `0..=max_lag`.
#[derive(Debug, Clone, PartialEq)]
pub struct EacfResult {
    pub max_lag: usize,
    pub values: Vec<Vec<f64>>,
}

impl EacfResult {
    /// `r^i(k)/r^i(0)`; zero when the coordinate is constant.
    pub fn normalized(&self, i: usize) -> Vec<f64> {
        let r0 = self.values[i][0];
        self.values[i].iter().map(|v| if r0 > 0.0 { v / r0 } else { 0.0 }).collect()
    }
}

/// `r(k) = 1/(P−k) Σ_{p<P−k} (X_p − μ̂)(X_{p+k} − μ̂)`, evaluated directly.
pub fn autocovariance(x: &[f64], max_lag: usize) -> Vec<f64> {
    let mu = mean(x);
    let c: Vec<f64> = x.iter().map(|v| v - mu).collect();
    let len = c.len();
    (0..=max_lag)
        .map(|k| c[..len - k].iter().zip(&c[k..]).map(|(a, b)| a * b).sum::<f64>() / (len - k) as f64)
        .collect()
}

/// Empirical autocorrelation of every coordinate, one thread per coordinate.
pub fn eacf(trace: &ChainTrace, max_lag: usize) -> Result<EacfResult, DiagnosticsError> {
    if max_lag >= trace.len() {
        return Err(DiagnosticsError::TraceTooShort { len: trace.len(), needed: max_lag + 1 });
    }
    let values = thread::scope(|s| {
        let handles: Vec<_> = (0..trace.dim())
            .map(|i| s.spawn(move || autocovariance(&trace.coordinate(i), max_lag)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("eacf worker panicked")).collect()
    });
    Ok(EacfResult { max_lag, values })
}

/// Batch-means estimate of the asymptotic variance of one series.
///
/// With `m = ⌊√len⌋`, the first `m²` samples form `m` batches of length `m`;
/// the estimate is `m` times the sample variance (divisor `m − 1`) of the batch means.
pub fn batch_means(x: &[f64]) -> Result<f64, DiagnosticsError> {
    if x.len() < 16 {
        return Err(DiagnosticsError::TraceTooShort { len: x.len(), needed: 16 });
    }
    let m = (x.len() as f64).sqrt().floor() as usize;
    let m = if (m + 1) * (m + 1) <= x.len() { m + 1 } else if m * m > x.len() { m - 1 } else { m };
    let batch: Vec<f64> = x[..m * m].chunks_exact(m).map(mean).collect();
    let mu = mean(&batch);
    let var = batch.iter().map(|b| (b - mu) * (b - mu)).sum::<f64>() / (m as f64 - 1.0);
    Ok(m as f64 * var)
}

pub fn batch_means_asvar(trace: &ChainTrace) -> Result<Vec<f64>, DiagnosticsError> {
    (0..trace.dim()).map(|i| batch_means(&trace.coordinate(i))).collect()
}

pub fn acceptance_ratio(trace: &ChainTrace) -> Result<f64, DiagnosticsError> {
    if trace.is_empty() {
        return Err(DiagnosticsError::TraceTooShort { len: 0, needed: 1 });
    }
    Ok(trace.accepted.iter().filter(|&&a| a).count() as f64 / trace.len() as f64)
}

/// `lag, coord_1..coord_n, coordn_1..coordn_n` (raw, then normalized by lag 0).
pub fn format_eacf_csv(result: &EacfResult) -> String {
    let n = result.values.len();
    let mut out = String::from("lag");
    for i in 1..=n {
        let _ = write!(out, ",coord_{i}");
    }
    for i in 1..=n {
        let _ = write!(out, ",coordn_{i}");
    }
    out.push('\n');
    let normalized: Vec<Vec<f64>> = (0..n).map(|i| result.normalized(i)).collect();
    for k in 0..=result.max_lag {
        let _ = write!(out, "{k}");
        for v in &result.values {
            let _ = write!(out, ",{}", v[k]);
        }
        for v in &normalized {
            let _ = write!(out, ",{}", v[k]);
        }
        out.push('\n');
    }
    out
}

/// `coord, batch_means_asvar, mean, variance`, coordinates numbered from 1.
pub fn format_summary_csv(trace: &ChainTrace) -> Result<String, DiagnosticsError> {
    let asvar = batch_means_asvar(trace)?;
    let means = trace.means();
    let vars = trace.variances();
    let mut out = String::from("coord,batch_means_asvar,mean,variance\n");
    for i in 0..trace.dim() {
        let _ = writeln!(out, "{},{},{},{}", i + 1, asvar[i], means[i], vars[i]);
    }
    Ok(out)
}

/// Every `thin`-th state as `step,x_1..x_n,accepted`, steps numbered from 1.
pub fn format_trace_csv(trace: &ChainTrace, thin: usize) -> String {
    let thin = thin.max(1);
    let mut out = String::from("step");
    for i in 1..=trace.dim() {
        let _ = write!(out, ",x_{i}");
    }
    out.push_str(",accepted\n");
    for p in (thin - 1..trace.len()).step_by(thin) {
        let _ = write!(out, "{}", p + 1);
        for v in trace.state(p) {
            let _ = write!(out, ",{v}");
        }
        let _ = writeln!(out, ",{}", u8::from(trace.accepted[p]));
    }
    out
}

/// Run metadata as a flat JSON object; `extra` entries are appended verbatim as numbers or strings.
pub fn format_metadata(meta: &TraceMeta, steps: usize, extra: &[(&str, serde_json::Value)]) -> String {
    let mut obj = serde_json::Map::new();
    obj.insert("algorithm".into(), meta.algorithm.clone().into());
    obj.insert("seed".into(), meta.seed.into());
    obj.insert("prng".into(), meta.prng.clone().into());
    obj.insert("normal_method".into(), meta.normal_method.clone().into());
    obj.insert("steps".into(), steps.into());
    obj.insert("h".into(), meta.h.into());
    obj.insert("sigma".into(), meta.sigma.into());
    obj.insert("c".into(), meta.c.into());
    for (k, v) in extra {
        obj.insert((*k).into(), v.clone());
    }
    obj.insert("wall_time_secs".into(), meta.wall_time_secs.into());
    let mut s = serde_json::to_string_pretty(&serde_json::Value::Object(obj)).expect("serializable");
    s.push('\n');
    s
}

pub fn write_eacf_csv(path: impl AsRef<Path>, result: &EacfResult) -> Result<(), DiagnosticsError> {
    Ok(io::write(path.as_ref(), &format_eacf_csv(result))?)
}

pub fn write_summary_csv(path: impl AsRef<Path>, trace: &ChainTrace) -> Result<(), DiagnosticsError> {
    Ok(io::write(path.as_ref(), &format_summary_csv(trace)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use proptest::prelude::*;

    fn trace_from(dim: usize, states: Vec<f64>) -> ChainTrace {
        let len = states.len() / dim;
        ChainTrace::from_parts(dim, states, vec![true; len], TraceMeta::new(0, "test", 0.0, 0.0, 0.0)).unwrap()
    }

    #[test]
    fn constant_trace_has_zero_statistics() {
        let t = trace_from(2, vec![3.0; 200]);
        let e = eacf(&t, 10).unwrap();
        assert!(e.values.iter().flatten().all(|&v| v == 0.0));
        assert_eq!(batch_means_asvar(&t).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn lag_zero_is_biased_variance() {
        let x = vec![1.0, 4.0, 2.0, 8.0, 5.0];
        let m = 4.0;
        let var = x.iter().map(|v: &f64| (v - m) * (v - m)).sum::<f64>() / 5.0;
        assert!((autocovariance(&x, 0)[0] - var).abs() < 1e-15);
        // Lag 1 by hand: centered (-3, 0, -2, 4, 1).
        let r1 = (0.0 + 0.0 - 8.0 + 4.0) / 4.0;
        assert!((autocovariance(&x, 1)[1] - r1).abs() < 1e-15);
    }

    #[test]
    fn too_short() {
        let t = trace_from(1, vec![1.0; 10]);
        assert!(matches!(eacf(&t, 10), Err(DiagnosticsError::TraceTooShort { .. })));
        assert!(matches!(batch_means_asvar(&t), Err(DiagnosticsError::TraceTooShort { .. })));
        let empty = ChainTrace::new(1, TraceMeta::new(0, "test", 0.0, 0.0, 0.0));
        assert!(acceptance_ratio(&empty).is_err());
    }

    #[test]
    fn acceptance_counts_flags() {
        let meta = TraceMeta::new(0, "test", 0.0, 0.0, 0.0);
        let all = ChainTrace::from_parts(1, vec![0.0; 4], vec![true; 4], meta.clone()).unwrap();
        let none = ChainTrace::from_parts(1, vec![0.0; 4], vec![false; 4], meta.clone()).unwrap();
        let half = ChainTrace::from_parts(1, vec![0.0; 4], vec![true, false, true, false], meta).unwrap();
        assert_eq!(acceptance_ratio(&all).unwrap(), 1.0);
        assert_eq!(acceptance_ratio(&none).unwrap(), 0.0);
        assert_eq!(acceptance_ratio(&half).unwrap(), 0.5);
    }

    #[test]
    fn iid_normal_statistics() {
        let mut rng = SeededRng::new(2024);
        let x: Vec<f64> = (0..100_000).map(|_| rng.normal()).collect();
        let r = autocovariance(&x, 20);
        let bound = 3.0 / (x.len() as f64).sqrt();
        let exceed = (1..=20).filter(|&k| (r[k] / r[0]).abs() >= bound).count();
        assert!(exceed <= 2, "{exceed} exceedances");
    }

    #[test]
    fn batch_means_iid_and_ar1() {
        let mut rng = SeededRng::new(7);
        let iid: Vec<f64> = (0..1_000_000).map(|_| rng.normal()).collect();
        let est = batch_means(&iid).unwrap();
        assert!((0.9..=1.1).contains(&est), "iid estimate {est}");

        let mut x = 0.0;
        let ar: Vec<f64> = (0..1_000_000)
            .map(|_| {
                x = 0.5 * x + rng.normal();
                x
            })
            .collect();
        let est = batch_means(&ar).unwrap();
        assert!((est - 4.0).abs() < 0.15 * 4.0, "AR(1) estimate {est}");
    }

    #[test]
    fn batches_are_square() {
        // 20 samples: m = 4, the last 4 are dropped.
        let x: Vec<f64> = (0..20).map(|v| v as f64).collect();
        let means = [1.5, 5.5, 9.5, 13.5];
        let mu = 7.5;
        let var = means.iter().map(|b| (b - mu) * (b - mu)).sum::<f64>() / 3.0;
        assert!((batch_means(&x).unwrap() - 4.0 * var).abs() < 1e-12);
    }

    #[test]
    fn csv_layouts() {
        let t = trace_from(2, vec![0.0, 1.0, 1.0, 0.0, 2.0, 1.0, 3.0, 0.0]);
        let e = eacf(&t, 1).unwrap();
        let csv = format_eacf_csv(&e);
        assert!(csv.starts_with("lag,coord_1,coord_2,coordn_1,coordn_2\n0,"));
        assert_eq!(csv.lines().count(), 3);
        let tr = format_trace_csv(&t, 2);
        assert_eq!(tr, "step,x_1,x_2,accepted\n2,1,0,1\n4,3,0,1\n");
        let meta = format_metadata(t.meta(), 4, &[("label", "x".into())]);
        let parsed: serde_json::Value = serde_json::from_str(&meta).unwrap();
        assert_eq!(parsed["steps"], 4);
        assert_eq!(parsed["label"], "x");
    }

    proptest! {
        #[test]
        fn eacf_translation_invariant(seed in any::<u64>(), shift in -50.0f64..50.0) {
            let mut rng = SeededRng::new(seed);
            let base: Vec<f64> = (0..300).map(|_| rng.normal()).collect();
            let moved: Vec<f64> = base.iter().map(|v| v + shift).collect();
            let a = eacf(&trace_from(3, base), 20).unwrap();
            let b = eacf(&trace_from(3, moved), 20).unwrap();
            for (u, v) in a.values.iter().flatten().zip(b.values.iter().flatten()) {
                prop_assert!((u - v).abs() < 1e-10);
            }
        }

        #[test]
        fn batch_means_follow_coordinate_permutation(seed in any::<u64>()) {
            let mut rng = SeededRng::new(seed);
            let states: Vec<f64> = (0..3 * 100).map(|_| rng.normal()).collect();
            let permuted: Vec<f64> = states.chunks(3).flat_map(|s| [s[2], s[0], s[1]]).collect();
            let a = batch_means_asvar(&trace_from(3, states)).unwrap();
            let b = batch_means_asvar(&trace_from(3, permuted)).unwrap();
            prop_assert_eq!(vec![a[2], a[0], a[1]], b);
        }

        #[test]
        fn acceptance_ignores_states(seed in any::<u64>(), scale in 0.1f64..10.0, offset in -5.0f64..5.0) {
            let mut rng = SeededRng::new(seed);
            let flags: Vec<bool> = (0..50).map(|_| rng.uniform() < 0.5).collect();
            let states: Vec<f64> = (0..50).map(|_| rng.normal()).collect();
            let mapped: Vec<f64> = states.iter().map(|v| scale * v + offset).collect();
            let meta = TraceMeta::new(0, "test", 0.0, 0.0, 0.0);
            let a = ChainTrace::from_parts(1, states, flags.clone(), meta.clone()).unwrap();
            let b = ChainTrace::from_parts(1, mapped, flags, meta).unwrap();
            prop_assert_eq!(acceptance_ratio(&a).unwrap(), acceptance_ratio(&b).unwrap());
        }
    }
}
