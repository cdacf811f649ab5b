//! Ground truth for small instances and a greedy baseline.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use crate::error::{Error, Result};
use crate::instance::{topological_order, Instance};
use crate::model::JobId;
use crate::schedule::{Assignment, ConcreteSchedule};

pub const EXACT_MAX_N: usize = 12;
pub const EXACT_MAX_M: u64 = 3;

/// `max(⌈Σp/m⌉, heaviest path)`.
pub fn lower_bound(inst: &Instance, m: u64) -> Result<u64> {
    Ok(inst.total_p().div_ceil(m.max(1)).max(inst.critical_path()?))
}

/// Non-increasing processing time, ties by id.
pub fn default_order(inst: &Instance) -> Vec<JobId> {
    let mut ids: Vec<JobId> = inst.jobs.iter().map(|j| j.id).collect();
    ids.sort_by_key(|&id| (Reverse(inst.job(id).p), id));
    ids
}

/// Graham list scheduling: whenever a machine is free, start the first ready
/// job in `order` on the lowest-numbered free machine.
pub fn list_schedule(inst: &Instance, m: u64, order: &[JobId]) -> Result<ConcreteSchedule> {
    let n = inst.n();
    if m == 0 {
        return Err(Error::param("m must be at least 1"));
    }
    let mut rank = vec![usize::MAX; n];
    for (pos, &id) in order.iter().enumerate() {
        if id == 0 || id as usize > n || rank[id as usize - 1] != usize::MAX {
            return Err(Error::contract(format!("order is not a permutation of 1..={n}")));
        }
        rank[id as usize - 1] = pos;
    }
    if order.len() != n {
        return Err(Error::contract(format!("order is not a permutation of 1..={n}")));
    }
    topological_order(&inst.arcs, n)?;

    let mut succ = vec![Vec::new(); n];
    let mut waiting = vec![0usize; n];
    for &(s, d) in &inst.arcs {
        succ[s as usize - 1].push(d as usize - 1);
        waiting[d as usize - 1] += 1;
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&v| waiting[v] == 0).map(|v| rank[v]).collect();
    let mut free: BTreeSet<u64> = (1..=m.min(n as u64).max(1)).collect();
    let mut running: BinaryHeap<Reverse<(u64, u64, usize)>> = BinaryHeap::new();
    let mut now = 0u64;
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        while let (Some(&machine), Some(&pos)) = (free.first(), ready.first()) {
            free.pop_first();
            ready.pop_first();
            let v = order[pos] as usize - 1;
            let done = now + inst.jobs[v].p;
            out.push(Assignment { job: v as JobId + 1, machine, start: now, completion: done });
            running.push(Reverse((done, machine, v)));
        }
        let Some(Reverse((t, _, _))) = running.peek().copied() else {
            break;
        };
        now = t;
        while let Some(&Reverse((t, machine, v))) = running.peek() {
            if t != now {
                break;
            }
            running.pop();
            free.insert(machine);
            for &w in &succ[v] {
                waiting[w] -= 1;
                if waiting[w] == 0 {
                    ready.insert(rank[w]);
                }
            }
        }
    }
    Ok(ConcreteSchedule { assignments: out })
}

/// Optimal makespan by exhaustive search, for `n <= 12` and `m <= 3`.
///
/// Every optimal schedule can be shifted so each job starts at time 0 or at
/// some completion time. The search walks those event times: at each one it
/// starts any subset of ready jobs on the idle machines (possibly none, if a
/// job is still running) and jumps to the next completion. States are the
/// finished set plus the remaining times of running jobs, memoized.
pub fn exact_makespan(inst: &Instance, m: u64) -> Result<u64> {
    let n = inst.n();
    if n > EXACT_MAX_N || m > EXACT_MAX_M || m == 0 {
        return Err(Error::OracleGuard { n, m, max_n: EXACT_MAX_N, max_m: EXACT_MAX_M });
    }
    topological_order(&inst.arcs, n)?;
    let mut pred_mask = vec![0u16; n];
    for &(s, d) in &inst.arcs {
        pred_mask[d as usize - 1] |= 1 << (s - 1);
    }
    let p: Vec<u64> = inst.jobs.iter().map(|j| j.p).collect();
    let mut search = Exact { n, m: m as usize, p, pred_mask, memo: HashMap::new() };
    Ok(search.solve(0, &[]))
}

type Running = Vec<(u8, u64)>;

struct Exact {
    n: usize,
    m: usize,
    p: Vec<u64>,
    pred_mask: Vec<u16>,
    memo: HashMap<(u16, Running), u64>,
}

impl Exact {
    /// Least remaining time from a state; `running` is sorted by job.
    fn solve(&mut self, done: u16, running: &[(u8, u64)]) -> u64 {
        let all = ((1u32 << self.n) - 1) as u16;
        if done == all {
            return 0;
        }
        let key = (done, running.to_vec());
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let busy: u16 = running.iter().fold(0, |acc, &(j, _)| acc | 1 << j);
        let ready: Vec<u8> = (0..self.n as u8)
            .filter(|&j| (done | busy) & (1 << j) == 0 && self.pred_mask[j as usize] & !done == 0)
            .collect();
        let slots = self.m - running.len();
        let mut best = u64::MAX;
        let mut pick = Vec::with_capacity(slots);
        self.subsets(done, running, &ready, 0, slots, &mut pick, &mut best);
        self.memo.insert(key, best);
        best
    }

    #[allow(clippy::too_many_arguments)]
    fn subsets(
        &mut self,
        done: u16,
        running: &[(u8, u64)],
        ready: &[u8],
        from: usize,
        slots: usize,
        pick: &mut Vec<u8>,
        best: &mut u64,
    ) {
        if !pick.is_empty() || !running.is_empty() {
            let mut next: Running = running.to_vec();
            next.extend(pick.iter().map(|&j| (j, self.p[j as usize])));
            let step = next.iter().map(|&(_, r)| r).min().expect("something runs");
            let mut finished = done;
            next.retain_mut(|(j, r)| {
                *r -= step;
                if *r == 0 {
                    finished |= 1 << *j;
                    false
                } else {
                    true
                }
            });
            next.sort_unstable();
            let total = step + self.solve(finished, &next);
            *best = (*best).min(total);
        }
        if pick.len() == slots {
            return;
        }
        for i in from..ready.len() {
            pick.push(ready[i]);
            self.subsets(done, running, ready, i + 1, slots, pick, best);
            pick.pop();
        }
    }
}
