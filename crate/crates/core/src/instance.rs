use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Job, JobId, StreamEvent};
use crate::sampling::{JobSource, SourceJob};

/// Facts about an instance that travel in the JSON sidecar.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    /// Generator spec that rebuilds the instance, e.g. `chain:m=2,q=1,h=3`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    /// Optimal makespan, when the construction fixes it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_star: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Jobs with ids `1..=n` (stored in id order) and precedence arcs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Instance {
    pub jobs: Vec<Job>,
    pub arcs: Vec<(JobId, JobId)>,
    pub meta: InstanceMeta,
}

impl Instance {
    /// Build from processing times (job `i` gets id `i + 1`) and arcs, and
    /// fill in depths.
    pub fn from_parts(p: &[u64], arcs: Vec<(JobId, JobId)>) -> Result<Self> {
        let jobs = p.iter().enumerate().map(|(i, &p)| Job::new(i as JobId + 1, p)).collect();
        let mut inst = Instance { jobs, arcs, meta: InstanceMeta::default() };
        inst.fill_depths()?;
        Ok(inst)
    }

    pub fn n(&self) -> usize {
        self.jobs.len()
    }

    pub fn job(&self, id: JobId) -> &Job {
        &self.jobs[id as usize - 1]
    }

    /// Recompute every job's depth from the arcs.
    pub fn fill_depths(&mut self) -> Result<()> {
        let depths = compute_depths(&self.arcs, self.jobs.len())?;
        for (job, d) in self.jobs.iter_mut().zip(depths) {
            job.depth = Some(d);
        }
        Ok(())
    }

    pub fn depths(&self) -> Result<Vec<u32>> {
        compute_depths(&self.arcs, self.jobs.len())
    }

    pub fn height(&self) -> u32 {
        self.jobs.iter().filter_map(|j| j.depth).max().unwrap_or(0)
    }

    pub fn total_p(&self) -> u64 {
        self.jobs.iter().map(|j| j.p).sum()
    }

    pub fn p_max(&self) -> u64 {
        self.jobs.iter().map(|j| j.p).max().unwrap_or(0)
    }

    pub fn p_min(&self) -> u64 {
        self.jobs.iter().map(|j| j.p).min().unwrap_or(0)
    }

    /// Stream order: all jobs, then all arcs.
    pub fn events(&self) -> impl Iterator<Item = StreamEvent> + '_ {
        self.jobs
            .iter()
            .map(|&j| StreamEvent::Job(j))
            .chain(self.arcs.iter().map(|&(src, dst)| StreamEvent::Arc { src, dst }))
    }

    /// Jobs only, carrying their depths: the stream for modes told the depths.
    pub fn job_events(&self) -> impl Iterator<Item = StreamEvent> + '_ {
        self.jobs.iter().map(|&j| StreamEvent::Job(j))
    }

    /// Same as [`events`](Self::events) with depths stripped from the jobs.
    pub fn events_without_depths(&self) -> impl Iterator<Item = StreamEvent> + '_ {
        self.events().map(|e| match e {
            StreamEvent::Job(j) => StreamEvent::Job(Job::new(j.id, j.p)),
            arc => arc,
        })
    }

    /// Predecessor lists indexed by `id - 1`.
    pub fn predecessors(&self) -> Vec<Vec<JobId>> {
        let mut preds = vec![Vec::new(); self.jobs.len()];
        for &(s, d) in &self.arcs {
            preds[d as usize - 1].push(s);
        }
        preds
    }

    /// Weight of the heaviest path (sum of processing times).
    pub fn critical_path(&self) -> Result<u64> {
        let order = topological_order(&self.arcs, self.jobs.len())?;
        let succ = successors(&self.arcs, self.jobs.len());
        let mut finish = vec![0u64; self.jobs.len()];
        let mut start = vec![0u64; self.jobs.len()];
        for v in order {
            finish[v] = start[v] + self.jobs[v].p;
            for &w in &succ[v] {
                start[w] = start[w].max(finish[v]);
            }
        }
        Ok(finish.into_iter().max().unwrap_or(0))
    }
}

impl JobSource for Instance {
    fn len(&self) -> u64 {
        self.jobs.len() as u64
    }

    /// Jobs without a depth report depth 0, which samplers reject.
    fn job(&self, index: u64) -> SourceJob {
        let j = &self.jobs[index as usize];
        SourceJob { p: j.p, depth: j.depth.unwrap_or(0) }
    }
}

fn check_arcs(arcs: &[(JobId, JobId)], n: usize) -> Result<()> {
    for &(s, d) in arcs {
        if s == 0 || d == 0 || s as usize > n || d as usize > n {
            return Err(Error::contract(format!("arc {s} -> {d} references a job outside 1..={n}")));
        }
    }
    Ok(())
}

fn successors(arcs: &[(JobId, JobId)], n: usize) -> Vec<Vec<usize>> {
    let mut succ = vec![Vec::new(); n];
    for &(s, d) in arcs {
        succ[s as usize - 1].push(d as usize - 1);
    }
    succ
}

/// 0-based job indices in a topological order (Kahn, smallest index first
/// among ties is not guaranteed).
pub fn topological_order(arcs: &[(JobId, JobId)], n: usize) -> Result<Vec<usize>> {
    check_arcs(arcs, n)?;
    let succ = successors(arcs, n);
    let mut indeg = vec![0usize; n];
    for &(_, d) in arcs {
        indeg[d as usize - 1] += 1;
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &w in &succ[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                queue.push_back(w);
            }
        }
    }
    if order.len() < n {
        let (src, dst) = find_back_edge(&succ, &indeg);
        return Err(Error::CycleSuspected { src: src as JobId + 1, dst: dst as JobId + 1 });
    }
    Ok(order)
}

/// DFS restricted to the jobs Kahn could not release; the first edge into a
/// vertex on the current path closes a cycle.
fn find_back_edge(succ: &[Vec<usize>], indeg: &[usize]) -> (usize, usize) {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        OnPath,
        Done,
    }
    let n = succ.len();
    let mut mark = vec![Mark::New; n];
    for root in (0..n).filter(|&v| indeg[v] > 0) {
        if mark[root] != Mark::New {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        mark[root] = Mark::OnPath;
        while let Some(top) = stack.last_mut() {
            let v = top.0;
            if let Some(&w) = succ[v].get(top.1) {
                top.1 += 1;
                match mark[w] {
                    Mark::OnPath => return (v, w),
                    Mark::New => {
                        mark[w] = Mark::OnPath;
                        stack.push((w, 0));
                    }
                    Mark::Done => {}
                }
            } else {
                mark[v] = Mark::Done;
                stack.pop();
            }
        }
    }
    unreachable!("a vertex with positive residual in-degree lies on or behind a cycle")
}

/// Depth of every job: 1 for sources, else 1 + the deepest predecessor.
pub fn compute_depths(arcs: &[(JobId, JobId)], n: usize) -> Result<Vec<u32>> {
    let order = topological_order(arcs, n)?;
    let succ = successors(arcs, n);
    let mut depth = vec![1u32; n];
    for v in order {
        for &w in &succ[v] {
            depth[w] = depth[w].max(depth[v] + 1);
        }
    }
    Ok(depth)
}
