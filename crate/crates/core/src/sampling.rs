//! Randomized sublinear-time schemes.
//!
//! Both schemes draw jobs uniformly at random (with replacement) from a
//! [`JobSource`], build an estimated sketch whose counts are scaled by
//! `n/n'`, drop groups whose estimate is not above `2τ`, and turn the rest
//! into an approximate makespan plus an estimated schedule sketch.
//!
//! When the derived sample size reaches `n`, every job is read exactly once
//! instead and the counts are exact.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bucket::{bucket_index, floor_log, snap_floor};
use crate::error::{Error, Result};
use crate::model::{derive_params, guarantee_condition, AlgoParams, Algorithm, SamplingPlan};
use crate::report::{cumulative, Discovered, RunReport};
use crate::sketch::SketchKey;
use crate::streaming::{depth_loads, RoundedValues};

/// What a sampler sees of a job.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceJob {
    pub p: u64,
    pub depth: u32,
}

/// Random access to `n` jobs by 0-based index.
pub trait JobSource: Sync {
    fn len(&self) -> u64;

    fn job(&self, index: u64) -> SourceJob;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl<T: JobSource + ?Sized> JobSource for &T {
    fn len(&self) -> u64 {
        (**self).len()
    }

    fn job(&self, index: u64) -> SourceJob {
        (**self).job(index)
    }
}

impl JobSource for [SourceJob] {
    fn len(&self) -> u64 {
        <[SourceJob]>::len(self) as u64
    }

    fn job(&self, index: u64) -> SourceJob {
        self[index as usize]
    }
}

impl JobSource for Vec<SourceJob> {
    fn len(&self) -> u64 {
        self.as_slice().len() as u64
    }

    fn job(&self, index: u64) -> SourceJob {
        self[index as usize]
    }
}

/// Wraps a source and counts every `job` call.
#[derive(Debug)]
pub struct CountingSource<S> {
    inner: S,
    reads: AtomicU64,
}

impl<S: JobSource> CountingSource<S> {
    pub fn new(inner: S) -> Self {
        CountingSource { inner, reads: AtomicU64::new(0) }
    }

    pub fn reads(&self) -> u64 {
        self.reads.load(Ordering::Relaxed)
    }
}

impl<S: JobSource> JobSource for CountingSource<S> {
    fn len(&self) -> u64 {
        self.inner.len()
    }

    fn job(&self, index: u64) -> SourceJob {
        self.reads.fetch_add(1, Ordering::Relaxed);
        self.inner.job(index)
    }
}

/// Raw counts `n'_{d,u}` of the sampled jobs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawSample {
    pub counts: BTreeMap<SketchKey, u64>,
    /// Jobs read from the source.
    pub draws: u64,
    /// Divisor for scaling: `n'`, or `n` when every job was read.
    pub effective_size: u64,
    /// Draws removed by the processing-time filter.
    pub filtered: u64,
    pub full_scan: bool,
    pub max_p: u64,
    pub max_depth: u32,
}

struct BucketMemo {
    delta: f64,
    last: Option<(u64, i64)>,
}

impl BucketMemo {
    fn get(&mut self, p: u64) -> i64 {
        match self.last {
            Some((q, u)) if q == p => u,
            _ => {
                let u = bucket_index(p, self.delta);
                self.last = Some((p, u));
                u
            }
        }
    }
}

/// Draw `sample_size` jobs uniformly with replacement (or scan all `n` when
/// `sample_size >= n`) and count them per `(d, u)`. Jobs with
/// `p <= filter` are discarded after being drawn.
pub fn estimate_counts<S: JobSource + ?Sized, R: Rng>(
    source: &S,
    sample_size: u64,
    filter: Option<f64>,
    delta: f64,
    rng: &mut R,
) -> RawSample {
    let n = source.len();
    let mut out = RawSample::default();
    if n == 0 || sample_size == 0 {
        return out;
    }
    let mut memo = BucketMemo { delta, last: None };
    let mut record = |job: SourceJob, out: &mut RawSample| {
        out.draws += 1;
        if filter.is_some_and(|cut| job.p as f64 <= cut) {
            out.filtered += 1;
            return;
        }
        out.max_p = out.max_p.max(job.p);
        out.max_depth = out.max_depth.max(job.depth);
        let u = memo.get(job.p.max(1));
        *out.counts.entry(SketchKey { u, d: job.depth }).or_insert(0) += 1;
    };
    if sample_size >= n {
        out.full_scan = true;
        out.effective_size = n;
        for i in 0..n {
            record(source.job(i), &mut out);
        }
    } else {
        out.effective_size = sample_size;
        for _ in 0..sample_size {
            let i = rng.gen_range(0..n);
            record(source.job(i), &mut out);
        }
    }
    out
}

/// Largest processing time among `pilot_size` uniform draws.
pub fn estimate_wmax<S: JobSource + ?Sized, R: Rng>(source: &S, pilot_size: u64, rng: &mut R) -> u64 {
    let n = source.len();
    (0..pilot_size.max(1)).map(|_| source.job(rng.gen_range(0..n)).p).max().unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatedEntry {
    pub d: u32,
    pub u: i64,
    /// Estimated group size `ê_{d,u} = n·n'_{d,u}/n'`.
    pub e: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatedSketch {
    /// Groups with `ê > 2τ`, in `(u, d)` order.
    pub entries: Vec<EstimatedEntry>,
    pub tau: f64,
    pub sample_count: u64,
    /// `n / n'`.
    pub scale: f64,
}

impl EstimatedSketch {
    fn from_raw(raw: &RawSample, n: u64, tau: f64) -> Self {
        let scale = n as f64 / raw.effective_size.max(1) as f64;
        let entries = raw
            .counts
            .iter()
            .map(|(k, &cnt)| EstimatedEntry { d: k.d, u: k.u, e: n as f64 * cnt as f64 / raw.effective_size as f64 })
            .filter(|e| e.e > 2.0 * tau)
            .collect();
        EstimatedSketch { entries, tau, sample_count: raw.effective_size, scale }
    }

    fn triples(&self) -> impl Iterator<Item = (u32, i64, f64)> + '_ {
        self.entries.iter().map(|e| (e.d, e.u, e.e))
    }
}

fn resolve_n<S: JobSource + ?Sized>(source: &S, params: &AlgoParams) -> Result<AlgoParams> {
    let n = source.len();
    if n == 0 {
        return Err(Error::contract("empty instance"));
    }
    match params.n {
        Some(given) if given != n => Err(Error::param(format!(
            "n = {given} does not match the source size {n}"
        ))),
        _ => Ok(params.clone().with_n(n)),
    }
}

fn check_sample(raw: &RawSample, h: u32, max_p: Option<u64>) -> Result<()> {
    if raw.max_depth > h {
        return Err(Error::contract(format!("sampled job depth {} exceeds h = {h}", raw.max_depth)));
    }
    if raw.counts.keys().any(|k| k.d == 0) {
        return Err(Error::contract("sampled job has depth 0"));
    }
    if let Some(c) = max_p {
        if raw.max_p > c {
            return Err(Error::contract(format!("sampled processing time {} exceeds c = {c}", raw.max_p)));
        }
    }
    Ok(())
}

/// Sampling scheme for instances with `1 <= p_j <= c`.
pub fn rand_approx_bounded<S: JobSource + ?Sized>(source: &S, params: &AlgoParams) -> Result<RunReport> {
    let params = resolve_n(source, params)?;
    let derived = derive_params(&params, Algorithm::SampleBounded)?;
    let plan: SamplingPlan = derived.sampling.expect("sampling mode");
    let (n, m, c, h) = (source.len(), params.m, params.require_c()?, params.require_h()?);
    let k = derived.k.expect("k defined");
    let k_eff = derived.k_eff.expect("k_eff defined") as u64;
    let delta = derived.delta;

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let raw = estimate_counts(source, plan.sample_size, None, delta, &mut rng);
    check_sample(&raw, h, Some(c))?;
    let est = EstimatedSketch::from_raw(&raw, n, plan.tau);

    let rp = RoundedValues { delta, top: k, top_value: c as f64 };
    let loads = depth_loads(est.triples(), h, m, 0, k, &rp);
    let approx = loads.iter().map(|&a| snap_floor(a) + c).sum();
    let pad = c + snap_floor(3.0 * plan.tau) * k_eff * c;
    let sks = cumulative(loads.iter().map(|&a| snap_floor(a / (1.0 - delta)) + pad));

    Ok(RunReport {
        algorithm: Algorithm::SampleBounded,
        approx,
        sks,
        sketch_nodes: est.entries.len(),
        peak_sketch_nodes: raw.counts.len(),
        samples: plan.pilot_size + raw.draws,
        update_count: raw.draws,
        guarantee_condition_met: guarantee_condition(
            Algorithm::SampleBounded,
            n,
            m,
            params.epsilon,
            h,
            c,
            1.0,
        ),
        seed: Some(params.seed),
        derived,
        discovered: Discovered { n, h, c, p_min: 0, p_max: raw.max_p, skipped: raw.filtered, w0: None },
        sketch: None,
        estimated_sketch: Some(est),
        depths: None,
        params,
    })
}

/// Sampling scheme for α-constrained instances.
pub fn rand_approx_alpha<S: JobSource + ?Sized>(source: &S, params: &AlgoParams) -> Result<RunReport> {
    let params = resolve_n(source, params)?;
    let derived = derive_params(&params, Algorithm::SampleAlpha)?;
    let plan: SamplingPlan = derived.sampling.expect("sampling mode");
    let (n, m, c, h) = (source.len(), params.m, params.require_c()?, params.require_h()?);
    let k_eff = derived.k_eff.expect("k_eff defined") as u64;
    let delta = derived.delta;

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let w0 = estimate_wmax(source, plan.pilot_size, &mut rng);
    let cutoff = delta * w0 as f64 / n as f64;
    let raw = estimate_counts(source, plan.sample_size, Some(cutoff), delta, &mut rng);
    check_sample(&raw, h, None)?;
    let est = EstimatedSketch::from_raw(&raw, n, plan.tau);

    let top_value = c * w0;
    let lo = floor_log(cutoff, delta);
    let hi = bucket_index(top_value, delta);
    let rp = RoundedValues { delta, top: hi, top_value: top_value as f64 };
    let loads = depth_loads(est.triples(), h, m, lo, hi, &rp);
    let approx = loads.iter().map(|&a| snap_floor(a) + top_value).sum();
    let pad = top_value + snap_floor(3.0 * plan.tau) * k_eff * top_value + snap_floor(delta * w0 as f64);
    let sks = cumulative(loads.iter().map(|&a| snap_floor(a / (1.0 - delta)) + pad));

    Ok(RunReport {
        algorithm: Algorithm::SampleAlpha,
        approx,
        sks,
        sketch_nodes: est.entries.len(),
        peak_sketch_nodes: raw.counts.len(),
        samples: plan.pilot_size + raw.draws,
        update_count: plan.pilot_size + raw.draws,
        guarantee_condition_met: guarantee_condition(
            Algorithm::SampleAlpha,
            n,
            m,
            params.epsilon,
            h,
            c,
            params.alpha,
        ),
        seed: Some(params.seed),
        derived,
        discovered: Discovered {
            n,
            h,
            c,
            p_min: 0,
            p_max: raw.max_p,
            skipped: raw.filtered,
            w0: Some(w0),
        },
        sketch: None,
        estimated_sketch: Some(est),
        depths: None,
        params,
    })
}

/// Dispatch by algorithm id.
pub fn run_sampling<S: JobSource + ?Sized>(alg: Algorithm, source: &S, params: &AlgoParams) -> Result<RunReport> {
    match alg {
        Algorithm::SampleBounded => rand_approx_bounded(source, params),
        Algorithm::SampleAlpha => rand_approx_alpha(source, params),
        other => Err(Error::param(format!("{other} is not a sampling algorithm"))),
    }
}
