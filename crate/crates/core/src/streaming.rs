//! One-pass streaming approximation schemes.
//!
//! Each scheme is a small state machine: feed it [`StreamEvent`]s with
//! `push`, then call `finish` to get the approximate makespan and the
//! schedule sketch. Nothing is buffered; every event is looked at once.

use crate::bucket::{bucket_index, rounded_value, snap_floor};
use crate::error::{Error, Result};
use crate::model::{
    derive_params, guarantee_condition, AlgoParams, Algorithm, DerivedParams, Job, JobId,
    StreamEvent,
};
use crate::report::{cumulative, Discovered, RunReport};
use crate::sketch::{alpha_bucket_range, GridSketch, InputSketch, SketchEntry};

/// Rounded processing time per bucket: `(1+δ)^(u+1)` everywhere except the
/// top bucket, which is pinned to a known maximum.
#[derive(Debug, Clone, Copy)]
pub struct RoundedValues {
    pub delta: f64,
    pub top: i64,
    pub top_value: f64,
}

impl RoundedValues {
    pub fn get(&self, u: i64) -> f64 {
        if u == self.top {
            self.top_value
        } else {
            rounded_value(u, self.delta)
        }
    }
}

/// `A_d = (1/m) Σ_u n_{d,u}·rp_u` for `d = 1..=h`, restricted to buckets in `[lo, hi]`.
pub(crate) fn depth_loads(
    entries: impl Iterator<Item = (u32, i64, f64)>,
    h: u32,
    m: u64,
    lo: i64,
    hi: i64,
    rp: &RoundedValues,
) -> Vec<f64> {
    let mut loads = vec![0.0; h as usize];
    for (d, u, n) in entries {
        if u < lo || u > hi || d == 0 || d > h {
            continue;
        }
        loads[d as usize - 1] += n * rp.get(u);
    }
    for a in &mut loads {
        *a /= m as f64;
    }
    loads
}

fn entry_triples(it: impl Iterator<Item = SketchEntry>) -> impl Iterator<Item = (u32, i64, f64)> {
    it.map(|e| (e.d, e.u, e.n as f64))
}

fn check_p(job: &Job) -> Result<()> {
    if job.p == 0 {
        return Err(Error::contract(format!("job {} has processing time 0", job.id)));
    }
    if job.id == 0 {
        return Err(Error::contract("job ids start at 1"));
    }
    Ok(())
}

/// Known `c`, `h` and depths: dense grid sketch, constant work per job.
#[derive(Debug, Clone)]
pub struct StreamKnown {
    params: AlgoParams,
    derived: DerivedParams,
    c: u64,
    h: u32,
    k: i64,
    grid: GridSketch,
    n: u64,
    p_min: u64,
    p_max: u64,
    updates: u64,
}

impl StreamKnown {
    pub fn new(params: &AlgoParams) -> Result<Self> {
        let derived = derive_params(params, Algorithm::StreamKnown)?;
        let c = params.require_c()?;
        let h = params.require_h()?;
        let k = derived.k.expect("known mode defines k");
        Ok(StreamKnown {
            params: params.clone(),
            derived,
            c,
            h,
            k,
            grid: GridSketch::new(h, k),
            n: 0,
            p_min: u64::MAX,
            p_max: 0,
            updates: 0,
        })
    }

    pub fn push(&mut self, event: StreamEvent) -> Result<()> {
        self.updates += 1;
        let job = match event {
            StreamEvent::Job(job) => job,
            StreamEvent::Arc { .. } => {
                return Err(Error::contract("stream1 consumes jobs with depths, not arcs"))
            }
        };
        check_p(&job)?;
        let d = job
            .depth
            .ok_or_else(|| Error::contract(format!("job {} carries no depth", job.id)))?;
        if d == 0 || d > self.h {
            return Err(Error::contract(format!("job {} depth {d} outside [1, {}]", job.id, self.h)));
        }
        if job.p > self.c {
            return Err(Error::contract(format!(
                "job {} processing time {} exceeds c = {}",
                job.id, job.p, self.c
            )));
        }
        let u = bucket_index(job.p, self.derived.delta);
        self.grid.add(d, u);
        self.n += 1;
        self.p_min = self.p_min.min(job.p);
        self.p_max = self.p_max.max(job.p);
        Ok(())
    }

    pub fn finish(self) -> Result<RunReport> {
        if self.n == 0 {
            return Err(Error::contract("empty job stream"));
        }
        let rp = RoundedValues { delta: self.derived.delta, top: self.k, top_value: self.c as f64 };
        let loads =
            depth_loads(entry_triples(self.grid.iter()), self.h, self.params.m, 0, self.k, &rp);
        let increments: Vec<u64> = loads.iter().map(|&a| snap_floor(a) + self.c).collect();
        let sks = cumulative(increments.iter().copied());
        let approx = *sks.last().expect("h >= 1");
        let nodes = self.grid.cells();
        Ok(RunReport {
            algorithm: Algorithm::StreamKnown,
            approx,
            sks,
            sketch_nodes: nodes,
            peak_sketch_nodes: nodes,
            samples: self.n,
            update_count: self.updates,
            guarantee_condition_met: guarantee_condition(
                Algorithm::StreamKnown,
                self.n,
                self.params.m,
                self.params.epsilon,
                self.h,
                self.c,
                1.0,
            ),
            params: self.params,
            derived: self.derived,
            seed: None,
            discovered: Discovered {
                n: self.n,
                h: self.h,
                c: self.c,
                p_min: self.p_min,
                p_max: self.p_max,
                skipped: 0,
                w0: None,
            },
            sketch: Some(crate::sketch::SketchSnapshot {
                entries: self.grid.iter().collect(),
                p_min: Some(self.p_min),
                p_max: Some(self.p_max),
            }),
            estimated_sketch: None,
            depths: None,
        })
    }
}

/// Per-job bookkeeping for the arc-driven modes.
#[derive(Debug, Clone, Copy)]
struct JobRecord {
    depth: u32,
    u: i64,
    /// Whether the job is represented in the sketch.
    counted: bool,
    /// Whether the job has already appeared as an arc source; its depth is
    /// then frozen, otherwise the arc order was not topological.
    emitted: bool,
}

/// Depth tracking shared by the two modes that read jobs and then arcs.
#[derive(Debug, Clone, Default)]
struct DepthTable {
    records: Vec<Option<JobRecord>>,
    jobs: u64,
    h: u32,
    arcs_started: bool,
}

impl DepthTable {
    fn insert(&mut self, id: JobId, rec: JobRecord) -> Result<()> {
        if self.arcs_started {
            return Err(Error::contract(format!("job {id} arrived after the first arc")));
        }
        let idx = id as usize - 1;
        if idx >= self.records.len() {
            self.records.resize(idx + 1, None);
        }
        if self.records[idx].is_some() {
            return Err(Error::contract(format!("duplicate job id {id}")));
        }
        self.records[idx] = Some(rec);
        self.jobs += 1;
        self.h = self.h.max(rec.depth);
        Ok(())
    }

    fn get(&self, id: JobId) -> Result<JobRecord> {
        (id as usize)
            .checked_sub(1)
            .and_then(|i| self.records.get(i).copied().flatten())
            .ok_or_else(|| Error::contract(format!("arc references unseen job {id}")))
    }

    /// Apply arc `src -> dst`. Returns `(old, new, record)` when `dst`'s depth grew.
    fn relax(&mut self, src: JobId, dst: JobId) -> Result<Option<(u32, u32, JobRecord)>> {
        if src == dst {
            return Err(Error::CycleSuspected { src, dst });
        }
        let mut s = self.get(src)?;
        let mut t = self.get(dst)?;
        if !s.emitted {
            s.emitted = true;
            self.records[src as usize - 1] = Some(s);
        }
        if s.depth < t.depth {
            return Ok(None);
        }
        let new = s.depth + 1;
        if new as u64 > self.jobs {
            return Err(Error::CycleSuspected { src, dst });
        }
        if t.emitted {
            return Err(Error::contract(format!(
                "arcs not in topological order: depth of job {dst} grew after it was used as a source"
            )));
        }
        let old = t.depth;
        t.depth = new;
        self.records[dst as usize - 1] = Some(t);
        self.h = self.h.max(new);
        Ok(Some((old, new, t)))
    }

    fn depths(&self) -> Result<Vec<u32>> {
        self.records
            .iter()
            .enumerate()
            .map(|(i, r)| {
                r.map(|r| r.depth)
                    .ok_or_else(|| Error::contract(format!("job ids not contiguous: {} missing", i + 1)))
            })
            .collect()
    }
}

/// Unknown `c`, `h`, depths: jobs first, then arcs in topological order.
#[derive(Debug, Clone)]
pub struct StreamUnknown {
    params: AlgoParams,
    derived: DerivedParams,
    sketch: InputSketch,
    table: DepthTable,
    peak: usize,
    updates: u64,
}

impl StreamUnknown {
    pub fn new(params: &AlgoParams) -> Result<Self> {
        let derived = derive_params(params, Algorithm::StreamUnknown)?;
        Ok(StreamUnknown {
            params: params.clone(),
            derived,
            sketch: InputSketch::new(),
            table: DepthTable::default(),
            peak: 0,
            updates: 0,
        })
    }

    pub fn push(&mut self, event: StreamEvent) -> Result<()> {
        self.updates += 1;
        match event {
            StreamEvent::Job(job) => {
                check_p(&job)?;
                let u = bucket_index(job.p, self.derived.delta);
                self.table.insert(job.id, JobRecord { depth: 1, u, counted: true, emitted: false })?;
                self.sketch.observe(job.p);
                self.sketch.add(1, u);
            }
            StreamEvent::Arc { src, dst } => {
                self.table.arcs_started = true;
                if let Some((old, new, rec)) = self.table.relax(src, dst)? {
                    self.sketch.move_job(old, new, rec.u)?;
                }
            }
        }
        self.peak = self.peak.max(self.sketch.len());
        Ok(())
    }

    pub fn finish(self) -> Result<RunReport> {
        let n = self.table.jobs;
        if n == 0 {
            return Err(Error::contract("empty job stream"));
        }
        let depths = self.table.depths()?;
        let delta = self.derived.delta;
        let p_min = self.sketch.p_min().expect("n > 0");
        let p_max = self.sketch.p_max().expect("n > 0");
        let c = p_max.div_ceil(p_min);
        let h = self.table.h;
        let lo = bucket_index(p_min, delta);
        let hi = bucket_index(p_max, delta);
        let rp = RoundedValues { delta, top: hi, top_value: p_max as f64 };
        let loads = depth_loads(entry_triples(self.sketch.iter()), h, self.params.m, lo, hi, &rp);
        let sks = cumulative(loads.iter().map(|&a| snap_floor(a) + p_max));
        let approx = *sks.last().expect("h >= 1");
        Ok(RunReport {
            algorithm: Algorithm::StreamUnknown,
            approx,
            sks,
            sketch_nodes: self.sketch.len(),
            peak_sketch_nodes: self.peak,
            samples: n,
            update_count: self.updates,
            guarantee_condition_met: guarantee_condition(
                Algorithm::StreamUnknown,
                n,
                self.params.m,
                self.params.epsilon,
                h,
                c,
                1.0,
            ),
            params: self.params,
            derived: self.derived,
            seed: None,
            discovered: Discovered { n, h, c, p_min, p_max, skipped: 0, w0: None },
            sketch: Some(self.sketch.snapshot()),
            estimated_sketch: None,
            depths: Some(depths),
        })
    }
}

/// Small-job cutoff: `p < p_max / n²`, evaluated exactly in integers.
fn below_cutoff(p: u64, p_max: u64, n: u64) -> bool {
    (p as u128) * (n as u128) * (n as u128) < p_max as u128
}

/// Running state of the α-constrained job phase: skip small jobs, insert,
/// and prune the minimum node lazily after each new insertion.
#[derive(Debug, Clone)]
struct AlphaSketcher {
    delta: f64,
    n: u64,
    p_max: u64,
    p_min: u64,
    sketch: InputSketch,
    seen: u64,
    skipped: u64,
    peak: usize,
}

impl AlphaSketcher {
    fn new(delta: f64, n: u64) -> Self {
        AlphaSketcher {
            delta,
            n,
            p_max: 1,
            p_min: u64::MAX,
            sketch: InputSketch::new(),
            seen: 0,
            skipped: 0,
            peak: 0,
        }
    }

    /// Returns the bucket if the job was counted.
    fn push(&mut self, job: &Job, depth: u32) -> Result<Option<i64>> {
        check_p(job)?;
        self.seen += 1;
        if self.seen > self.n {
            return Err(Error::contract(format!("more than n = {} jobs on the stream", self.n)));
        }
        self.p_min = self.p_min.min(job.p);
        if below_cutoff(job.p, self.p_max, self.n) {
            self.skipped += 1;
            return Ok(None);
        }
        self.p_max = self.p_max.max(job.p);
        self.sketch.observe(job.p);
        let u = bucket_index(job.p, self.delta);
        if self.sketch.add(depth, u) {
            let (cutoff, _) = alpha_bucket_range(self.p_max, self.n, self.delta);
            self.sketch.prune_smallest(cutoff);
        }
        self.peak = self.peak.max(self.sketch.len());
        Ok(Some(u))
    }

    fn check_complete(&self) -> Result<()> {
        if self.seen == 0 {
            return Err(Error::contract("empty job stream"));
        }
        if self.seen != self.n {
            return Err(Error::contract(format!(
                "stream carried {} jobs but n = {}",
                self.seen, self.n
            )));
        }
        Ok(())
    }

    /// `A`, the schedule-sketch instants and the bucket range used.
    fn estimate(&self, h: u32, m: u64) -> (u64, Vec<u64>, (i64, i64)) {
        let (lo, hi) = alpha_bucket_range(self.p_max, self.n, self.delta);
        let rp = RoundedValues { delta: self.delta, top: hi, top_value: self.p_max as f64 };
        let loads = depth_loads(entry_triples(self.sketch.iter()), h, m, lo, hi, &rp);
        let small_slack = self.p_max.div_ceil(self.n);
        let approx = loads.iter().map(|&a| snap_floor(a) + self.p_max).sum::<u64>() + small_slack;
        let sks = cumulative(loads.iter().map(|&a| snap_floor(a) + self.p_max + small_slack));
        (approx, sks, (lo, hi))
    }
}

/// α-constrained, depths given: small jobs skipped, min-key pruning.
#[derive(Debug, Clone)]
pub struct StreamAlphaKnown {
    params: AlgoParams,
    derived: DerivedParams,
    h: u32,
    c: u64,
    inner: AlphaSketcher,
    updates: u64,
}

impl StreamAlphaKnown {
    pub fn new(params: &AlgoParams) -> Result<Self> {
        let derived = derive_params(params, Algorithm::StreamAlphaKnown)?;
        let n = params.require_n()?;
        Ok(StreamAlphaKnown {
            params: params.clone(),
            h: params.require_h()?,
            c: params.require_c()?,
            inner: AlphaSketcher::new(derived.delta, n),
            derived,
            updates: 0,
        })
    }

    pub fn push(&mut self, event: StreamEvent) -> Result<()> {
        self.updates += 1;
        let job = match event {
            StreamEvent::Job(job) => job,
            StreamEvent::Arc { .. } => {
                return Err(Error::contract("stream3 consumes jobs with depths, not arcs"))
            }
        };
        let d = job
            .depth
            .ok_or_else(|| Error::contract(format!("job {} carries no depth", job.id)))?;
        if d == 0 || d > self.h {
            return Err(Error::contract(format!("job {} depth {d} outside [1, {}]", job.id, self.h)));
        }
        self.inner.push(&job, d)?;
        Ok(())
    }

    /// Current number of sketch nodes (for size-bound checks mid-stream).
    pub fn sketch_nodes(&self) -> usize {
        self.inner.sketch.len()
    }

    pub fn finish(mut self) -> Result<RunReport> {
        self.inner.check_complete()?;
        let (approx, sks, (lo, hi)) = self.inner.estimate(self.h, self.params.m);
        self.inner.sketch.retain_buckets(lo, hi);
        let n = self.inner.n;
        Ok(RunReport {
            algorithm: Algorithm::StreamAlphaKnown,
            approx,
            sks,
            sketch_nodes: self.inner.sketch.len(),
            peak_sketch_nodes: self.inner.peak,
            samples: self.inner.seen,
            update_count: self.updates,
            guarantee_condition_met: guarantee_condition(
                Algorithm::StreamAlphaKnown,
                n,
                self.params.m,
                self.params.epsilon,
                self.h,
                self.c,
                self.params.alpha,
            ),
            derived: self.derived,
            seed: None,
            discovered: Discovered {
                n,
                h: self.h,
                c: self.c,
                p_min: self.inner.p_min,
                p_max: self.inner.p_max,
                skipped: self.inner.skipped,
                w0: None,
            },
            sketch: Some(self.inner.sketch.snapshot()),
            estimated_sketch: None,
            depths: None,
            params: self.params,
        })
    }
}

/// α-constrained, jobs then arcs.
#[derive(Debug, Clone)]
pub struct StreamAlphaUnknown {
    params: AlgoParams,
    derived: DerivedParams,
    inner: AlphaSketcher,
    table: DepthTable,
    /// Bottom bucket fixed when the first arc arrives (p_max is final by then).
    floor_bucket: Option<i64>,
    updates: u64,
}

impl StreamAlphaUnknown {
    pub fn new(params: &AlgoParams) -> Result<Self> {
        let derived = derive_params(params, Algorithm::StreamAlphaUnknown)?;
        let n = params.require_n()?;
        Ok(StreamAlphaUnknown {
            params: params.clone(),
            inner: AlphaSketcher::new(derived.delta, n),
            derived,
            table: DepthTable::default(),
            floor_bucket: None,
            updates: 0,
        })
    }

    fn close_job_phase(&mut self) -> i64 {
        match self.floor_bucket {
            Some(lo) => lo,
            None => {
                let (lo, hi) =
                    alpha_bucket_range(self.inner.p_max, self.inner.n, self.inner.delta);
                self.inner.sketch.retain_buckets(lo, hi);
                self.floor_bucket = Some(lo);
                lo
            }
        }
    }

    pub fn push(&mut self, event: StreamEvent) -> Result<()> {
        self.updates += 1;
        match event {
            StreamEvent::Job(job) => {
                if self.floor_bucket.is_some() {
                    return Err(Error::contract(format!("job {} arrived after the first arc", job.id)));
                }
                let counted = self.inner.push(&job, 1)?;
                let u = counted.unwrap_or_else(|| bucket_index(job.p.max(1), self.inner.delta));
                self.table.insert(
                    job.id,
                    JobRecord { depth: 1, u, counted: counted.is_some(), emitted: false },
                )?;
            }
            StreamEvent::Arc { src, dst } => {
                let lo = self.close_job_phase();
                self.table.arcs_started = true;
                if let Some((old, new, rec)) = self.table.relax(src, dst)? {
                    // Jobs below the final floor bucket were dropped or pruned.
                    if rec.counted && rec.u >= lo {
                        self.inner.sketch.move_job(old, new, rec.u)?;
                    }
                }
                self.inner.peak = self.inner.peak.max(self.inner.sketch.len());
            }
        }
        Ok(())
    }

    pub fn sketch_nodes(&self) -> usize {
        self.inner.sketch.len()
    }

    pub fn finish(mut self) -> Result<RunReport> {
        self.inner.check_complete()?;
        self.close_job_phase();
        let depths = self.table.depths()?;
        let h = self.table.h;
        let (approx, sks, _) = self.inner.estimate(h, self.params.m);
        let n = self.inner.n;
        let c = self.params.c.unwrap_or_else(|| self.inner.p_max.div_ceil(self.inner.p_min));
        Ok(RunReport {
            algorithm: Algorithm::StreamAlphaUnknown,
            approx,
            sks,
            sketch_nodes: self.inner.sketch.len(),
            peak_sketch_nodes: self.inner.peak,
            samples: self.inner.seen,
            update_count: self.updates,
            guarantee_condition_met: guarantee_condition(
                Algorithm::StreamAlphaUnknown,
                n,
                self.params.m,
                self.params.epsilon,
                h,
                c,
                self.params.alpha,
            ),
            derived: self.derived,
            seed: None,
            discovered: Discovered {
                n,
                h,
                c,
                p_min: self.inner.p_min,
                p_max: self.inner.p_max,
                skipped: self.inner.skipped,
                w0: None,
            },
            sketch: Some(self.inner.sketch.snapshot()),
            estimated_sketch: None,
            depths: Some(depths),
            params: self.params,
        })
    }
}

/// Any of the four streaming schemes behind one interface.
#[derive(Debug, Clone)]
pub enum StreamRunner {
    Known(StreamKnown),
    Unknown(StreamUnknown),
    AlphaKnown(StreamAlphaKnown),
    AlphaUnknown(StreamAlphaUnknown),
}

impl StreamRunner {
    pub fn new(alg: Algorithm, params: &AlgoParams) -> Result<Self> {
        Ok(match alg {
            Algorithm::StreamKnown => StreamRunner::Known(StreamKnown::new(params)?),
            Algorithm::StreamUnknown => StreamRunner::Unknown(StreamUnknown::new(params)?),
            Algorithm::StreamAlphaKnown => StreamRunner::AlphaKnown(StreamAlphaKnown::new(params)?),
            Algorithm::StreamAlphaUnknown => {
                StreamRunner::AlphaUnknown(StreamAlphaUnknown::new(params)?)
            }
            other => {
                return Err(Error::param(format!("{other} is not a streaming algorithm")))
            }
        })
    }

    pub fn push(&mut self, event: StreamEvent) -> Result<()> {
        match self {
            StreamRunner::Known(s) => s.push(event),
            StreamRunner::Unknown(s) => s.push(event),
            StreamRunner::AlphaKnown(s) => s.push(event),
            StreamRunner::AlphaUnknown(s) => s.push(event),
        }
    }

    pub fn finish(self) -> Result<RunReport> {
        match self {
            StreamRunner::Known(s) => s.finish(),
            StreamRunner::Unknown(s) => s.finish(),
            StreamRunner::AlphaKnown(s) => s.finish(),
            StreamRunner::AlphaUnknown(s) => s.finish(),
        }
    }
}

/// Run `alg` over `events` in a single pass.
pub fn run_stream<I>(alg: Algorithm, params: &AlgoParams, events: I) -> Result<RunReport>
where
    I: IntoIterator<Item = StreamEvent>,
{
    let mut runner = StreamRunner::new(alg, params)?;
    for ev in events {
        runner.push(ev)?;
    }
    runner.finish()
}

pub fn stream_known<I: IntoIterator<Item = StreamEvent>>(events: I, params: &AlgoParams) -> Result<RunReport> {
    run_stream(Algorithm::StreamKnown, params, events)
}

pub fn stream_unknown<I: IntoIterator<Item = StreamEvent>>(events: I, params: &AlgoParams) -> Result<RunReport> {
    run_stream(Algorithm::StreamUnknown, params, events)
}

pub fn stream_alpha_known<I: IntoIterator<Item = StreamEvent>>(
    events: I,
    params: &AlgoParams,
) -> Result<RunReport> {
    run_stream(Algorithm::StreamAlphaKnown, params, events)
}

pub fn stream_alpha_unknown<I: IntoIterator<Item = StreamEvent>>(
    events: I,
    params: &AlgoParams,
) -> Result<RunReport> {
    run_stream(Algorithm::StreamAlphaUnknown, params, events)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jobs_with_depth(ps: &[(u64, u32)]) -> Vec<StreamEvent> {
        ps.iter()
            .enumerate()
            .map(|(i, &(p, d))| StreamEvent::Job(Job::with_depth(i as u32 + 1, p, d)))
            .collect()
    }

    fn jobs_then_arcs(ps: &[u64], arcs: &[(u32, u32)]) -> Vec<StreamEvent> {
        let mut ev: Vec<_> = ps
            .iter()
            .enumerate()
            .map(|(i, &p)| StreamEvent::Job(Job::new(i as u32 + 1, p)))
            .collect();
        ev.extend(arcs.iter().map(|&(src, dst)| StreamEvent::Arc { src, dst }));
        ev
    }

    #[test]
    fn known_six_unit_jobs_two_machines() {
        let params = AlgoParams::new(0.3, 2).with_c(1).with_h(1);
        let r = stream_known(jobs_with_depth(&[(1, 1); 6]), &params).unwrap();
        assert_eq!(r.derived.k, Some(0));
        assert_eq!(r.approx, 4);
        assert_eq!(r.sks, vec![4]);
        assert!(r.sketch_nodes <= 1);
    }

    #[test]
    fn known_single_unit_job() {
        let params = AlgoParams::new(0.3, 1).with_c(1).with_h(1);
        let r = stream_known(jobs_with_depth(&[(1, 1)]), &params).unwrap();
        assert_eq!(r.approx, 2);
    }

    #[test]
    fn known_mixed_buckets() {
        // δ = 0.2, k = 3; p=1 -> u=0 (rp 1.2), p=2 -> u=3 = k (rp = c = 2).
        // A_1 = 1.2 + 3*2 = 7.2 -> A = 7 + 2 = 9.
        let params = AlgoParams::new(0.6, 1).with_c(2).with_h(1);
        let r = stream_known(jobs_with_depth(&[(1, 1), (2, 1), (2, 1), (2, 1)]), &params).unwrap();
        assert_eq!(r.derived.k, Some(3));
        assert_eq!(r.approx, 9);
    }

    #[test]
    fn known_rejects_contract_violations() {
        let params = AlgoParams::new(0.3, 1).with_c(2).with_h(1);
        assert!(matches!(
            stream_known(jobs_with_depth(&[(1, 2)]), &params),
            Err(Error::InputContract(_))
        ));
        assert!(matches!(
            stream_known(jobs_with_depth(&[(3, 1)]), &params),
            Err(Error::InputContract(_))
        ));
        assert!(matches!(stream_known(vec![], &params), Err(Error::InputContract(_))));
    }

    #[test]
    fn known_empty_levels_still_pay_c() {
        let params = AlgoParams::new(0.3, 1).with_c(1).with_h(3);
        let r = stream_known(jobs_with_depth(&[(1, 1)]), &params).unwrap();
        assert_eq!(r.sks, vec![2, 3, 4]);
    }

    #[test]
    fn unknown_two_sources_one_sink() {
        let params = AlgoParams::new(0.3, 1);
        let r = stream_unknown(jobs_then_arcs(&[1, 1, 1], &[(1, 3), (2, 3)]), &params).unwrap();
        assert_eq!(r.depths, Some(vec![1, 1, 2]));
        assert_eq!(r.discovered.h, 2);
        assert_eq!(r.approx, 5);
        assert_eq!(r.sks, vec![3, 5]);
    }

    #[test]
    fn unknown_matches_known_without_arcs() {
        let ev = jobs_then_arcs(&[1; 7], &[]);
        let u = stream_unknown(ev, &AlgoParams::new(0.3, 3)).unwrap();
        let k = stream_known(
            jobs_with_depth(&[(1, 1); 7]),
            &AlgoParams::new(0.3, 3).with_c(1).with_h(1),
        )
        .unwrap();
        assert_eq!(u.approx, k.approx);
    }

    #[test]
    fn unknown_rejects_back_edges_and_unseen_jobs() {
        let params = AlgoParams::new(0.3, 1);
        let err = stream_unknown(jobs_then_arcs(&[1, 1, 1], &[(1, 3), (3, 1)]), &params).unwrap_err();
        assert!(matches!(err, Error::InputContract(_) | Error::CycleSuspected { .. }), "{err:?}");
        let err = stream_unknown(jobs_then_arcs(&[1, 1], &[(1, 5)]), &params).unwrap_err();
        assert!(matches!(err, Error::InputContract(_)));
        let err = stream_unknown(jobs_then_arcs(&[1, 1], &[(2, 2)]), &params).unwrap_err();
        assert!(matches!(err, Error::CycleSuspected { .. }));
    }

    #[test]
    fn unknown_rejects_jobs_after_arcs() {
        let mut ev = jobs_then_arcs(&[1, 1], &[(1, 2)]);
        ev.push(StreamEvent::Job(Job::new(3, 1)));
        assert!(matches!(
            stream_unknown(ev, &AlgoParams::new(0.3, 1)),
            Err(Error::InputContract(_))
        ));
    }

    #[test]
    fn alpha_known_no_skips() {
        // n = 4, p ∈ {3,4}: δ = 0.1, 3 -> u=11 (rp 1.1^12 = 3.1384...),
        // 4 -> u=14 = u₊ (rp = p_max = 4).
        let params = AlgoParams::new(0.3, 1).with_c(2).with_h(1).with_n(4);
        let r = stream_alpha_known(jobs_with_depth(&[(3, 1), (4, 1), (3, 1), (4, 1)]), &params)
            .unwrap();
        assert_eq!(r.discovered.skipped, 0);
        let a1 = 2.0 * 1.1f64.powi(12) + 2.0 * 4.0;
        assert_eq!(r.approx, a1.floor() as u64 + 4 + 1);
        assert!(r.approx >= 14);
    }

    #[test]
    fn alpha_known_skips_tiny_job() {
        let mut jobs = vec![(1_000_000, 1)];
        jobs.extend(std::iter::repeat_n((1_000_000, 1), 8));
        jobs.push((1, 1));
        let params = AlgoParams::new(0.3, 1).with_c(1).with_h(1).with_n(10);
        let r = stream_alpha_known(jobs_with_depth(&jobs), &params).unwrap();
        assert_eq!(r.discovered.skipped, 1);
        let counted: u64 = r.sketch.unwrap().entries.iter().map(|e| e.n).sum();
        assert_eq!(counted, 9);
    }

    #[test]
    fn alpha_known_single_job() {
        let params = AlgoParams::new(0.3, 1).with_c(1).with_h(1).with_n(1);
        let r = stream_alpha_known(jobs_with_depth(&[(5, 1)]), &params).unwrap();
        assert_eq!(r.approx, 15);
    }

    #[test]
    fn alpha_known_job_count_must_match_n() {
        let params = AlgoParams::new(0.3, 1).with_c(1).with_h(1).with_n(3);
        assert!(stream_alpha_known(jobs_with_depth(&[(5, 1)]), &params).is_err());
        let params = params.with_n(1);
        assert!(stream_alpha_known(jobs_with_depth(&[(5, 1), (5, 1)]), &params).is_err());
    }

    #[test]
    fn alpha_unknown_chain() {
        let params = AlgoParams::new(0.3, 1).with_n(3);
        let r = stream_alpha_unknown(jobs_then_arcs(&[1, 1, 1], &[(1, 2), (2, 3)]), &params)
            .unwrap();
        assert_eq!(r.discovered.h, 3);
        assert_eq!(r.approx, 7);
    }

    #[test]
    fn alpha_unknown_differs_from_unknown_by_small_slack() {
        let ev = jobs_then_arcs(&[1, 1, 1], &[(1, 3), (2, 3)]);
        let a = stream_unknown(ev.clone(), &AlgoParams::new(0.3, 1)).unwrap();
        let b = stream_alpha_unknown(ev, &AlgoParams::new(0.3, 1).with_n(3)).unwrap();
        assert_eq!(b.approx, a.approx + 1);
    }

    #[test]
    fn alpha_unknown_without_arcs_matches_alpha_known() {
        let ps = [7, 3, 9, 9, 4, 1];
        let a = stream_alpha_unknown(jobs_then_arcs(&ps, &[]), &AlgoParams::new(0.3, 2).with_n(6))
            .unwrap();
        let with_d: Vec<_> = ps.iter().map(|&p| (p, 1)).collect();
        let b = stream_alpha_known(
            jobs_with_depth(&with_d),
            &AlgoParams::new(0.3, 2).with_n(6).with_c(9).with_h(1),
        )
        .unwrap();
        assert_eq!(a.approx, b.approx);
        assert_eq!(a.sks, b.sks);
    }

    #[test]
    fn update_count_is_one_per_event() {
        let ev = jobs_then_arcs(&[1, 2, 3, 4], &[(1, 2), (2, 3), (1, 4)]);
        let r = stream_unknown(ev, &AlgoParams::new(0.3, 1)).unwrap();
        assert_eq!(r.update_count, 7);
    }
}
