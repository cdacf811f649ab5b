//! Second pass: turn a schedule sketch into machine assignments, and check
//! any assignment against an instance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::model::{Algorithm, Job, JobId};

/// Instants `t_1..t_h` (with `t_0 = 0` implied). Depth `d` owns `[t_{d-1}, t_d)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleSketch {
    pub t: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<Algorithm>,
}

impl ScheduleSketch {
    pub fn new(t: Vec<u64>) -> Self {
        ScheduleSketch { t, source: None }
    }

    pub fn h(&self) -> u32 {
        self.t.len() as u32
    }

    pub fn makespan_bound(&self) -> u64 {
        self.t.last().copied().unwrap_or(0)
    }

    /// `[t_{d-1}, t_d)` for `1 <= d <= h`.
    pub fn interval(&self, d: u32) -> (u64, u64) {
        let i = d as usize - 1;
        (if i == 0 { 0 } else { self.t[i - 1] }, self.t[i])
    }

    pub fn check(&self) -> Result<()> {
        if self.t.is_empty() {
            return Err(Error::contract("schedule sketch has no instants"));
        }
        if self.t[0] == 0 || self.t.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::contract(format!("schedule sketch instants are not increasing: {:?}", self.t)));
        }
        Ok(())
    }

    /// Accepts either `{"t": [...]}` or a result file carrying `sks`.
    pub fn from_json(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct FromReport {
            sks: Vec<u64>,
            #[serde(default)]
            algorithm: Option<Algorithm>,
        }
        if let Ok(sk) = serde_json::from_str::<ScheduleSketch>(s) {
            return Ok(sk);
        }
        let r: FromReport = serde_json::from_str(s)
            .map_err(|e| Error::contract(format!("not a schedule sketch or result file: {e}")))?;
        Ok(ScheduleSketch { t: r.sks, source: r.algorithm })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    #[serde(rename = "job_id")]
    pub job: JobId,
    /// 1-based.
    pub machine: u64,
    pub start: u64,
    pub completion: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConcreteSchedule {
    pub assignments: Vec<Assignment>,
}

impl ConcreteSchedule {
    pub fn makespan(&self) -> u64 {
        self.assignments.iter().map(|a| a.completion).max().unwrap_or(0)
    }

    pub fn sorted_by_job(mut self) -> Self {
        self.assignments.sort_by_key(|a| a.job);
        self
    }
}

/// Place jobs depth by depth with a next-fit cursor per depth.
///
/// Each depth starts on machine 1 at `t_{d-1}`; a job that would cross `t_d`
/// moves the cursor to the next machine.
pub fn sketch_to_schedule<I>(sks: &ScheduleSketch, jobs: I, m: u64) -> Result<ConcreteSchedule>
where
    I: IntoIterator<Item = Job>,
{
    sks.check()?;
    if m == 0 {
        return Err(Error::param("m must be at least 1"));
    }
    let h = sks.h();
    // (machine, time) per depth
    let mut cursor: Vec<(u64, u64)> = (1..=h).map(|d| (1, sks.interval(d).0)).collect();
    let mut out = Vec::new();
    for job in jobs {
        let d = job
            .depth
            .ok_or_else(|| Error::contract(format!("job {} has no depth", job.id)))?;
        if d == 0 || d > h {
            return Err(Error::contract(format!("job {} has depth {d}, sketch covers 1..={h}", job.id)));
        }
        let (lo, hi) = sks.interval(d);
        let infeasible = Error::SketchInfeasible { job: job.id, depth: d, machines: m };
        if job.p > hi - lo {
            return Err(infeasible);
        }
        let cur = &mut cursor[d as usize - 1];
        if cur.1 + job.p > hi {
            *cur = (cur.0 + 1, lo);
            if cur.0 > m {
                return Err(infeasible);
            }
        }
        out.push(Assignment { job: job.id, machine: cur.0, start: cur.1, completion: cur.1 + job.p });
        cur.1 += job.p;
    }
    Ok(ConcreteSchedule { assignments: out })
}

/// One feasibility failure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Overlap { machine: u64, jobs: [JobId; 2] },
    Precedence { src: JobId, dst: JobId },
    MachineRange { job: JobId, machine: u64 },
    Duration { job: JobId, expected: u64, got: u64 },
    Missing { job: JobId },
    Duplicate { job: JobId },
    UnknownJob { job: JobId },
}

/// Check non-overlap, precedence, machine range and that every job appears
/// once with its own processing time. An empty result means feasible.
pub fn validate_schedule(sched: &ConcreteSchedule, inst: &Instance, m: u64) -> Vec<Violation> {
    let n = inst.n();
    let mut out = Vec::new();
    let mut seen: Vec<Option<&Assignment>> = vec![None; n];
    for a in &sched.assignments {
        if a.job == 0 || a.job as usize > n {
            out.push(Violation::UnknownJob { job: a.job });
            continue;
        }
        let slot = &mut seen[a.job as usize - 1];
        if slot.is_some() {
            out.push(Violation::Duplicate { job: a.job });
            continue;
        }
        *slot = Some(a);
        if a.machine == 0 || a.machine > m {
            out.push(Violation::MachineRange { job: a.job, machine: a.machine });
        }
        let p = inst.job(a.job).p;
        if a.completion < a.start || a.completion - a.start != p {
            out.push(Violation::Duration { job: a.job, expected: p, got: a.completion.saturating_sub(a.start) });
        }
    }
    for (i, s) in seen.iter().enumerate() {
        if s.is_none() {
            out.push(Violation::Missing { job: i as JobId + 1 });
        }
    }

    let mut placed: Vec<&Assignment> = seen.iter().flatten().copied().collect();
    placed.sort_unstable_by_key(|a| (a.machine, a.start, a.completion, a.job));
    // compare each job with the one reaching furthest so far on its machine
    let mut reach: Option<&Assignment> = None;
    for a in placed {
        match reach {
            Some(r) if r.machine == a.machine => {
                if a.start < r.completion {
                    out.push(Violation::Overlap { machine: a.machine, jobs: [r.job, a.job] });
                }
                if a.completion > r.completion {
                    reach = Some(a);
                }
            }
            _ => reach = Some(a),
        }
    }

    for &(src, dst) in &inst.arcs {
        let at = |id: JobId| (id as usize).checked_sub(1).and_then(|i| seen.get(i).copied().flatten());
        let (Some(a), Some(b)) = (at(src), at(dst)) else {
            continue;
        };
        if b.start < a.completion {
            out.push(Violation::Precedence { src, dst });
        }
    }
    out
}
