#![allow(dead_code)]

use rand::Rng;
use schedsketch::{
    run_stream, sketch_to_schedule, AlgoParams, Algorithm, GenSpec, Instance, Job, Result, RunReport,
    ScheduleSketch,
};

pub const STREAMING: [Algorithm; 4] = [
    Algorithm::StreamKnown,
    Algorithm::StreamUnknown,
    Algorithm::StreamAlphaKnown,
    Algorithm::StreamAlphaUnknown,
];

/// A small instance of a random shape with `n <= 10`, `h <= 3`, `p <= c <= 3`.
pub fn small_instance<R: Rng>(rng: &mut R) -> (GenSpec, Instance) {
    let c = rng.gen_range(1..=3u64);
    let seed = rng.gen::<u32>() as u64;
    let spec = match rng.gen_range(0..4) {
        0 => GenSpec::Uniform { n: rng.gen_range(1..=10), c, m: 1, seed },
        1 => {
            let h = rng.gen_range(1..=3u32);
            let chains = rng.gen_range(1..=10 / h as u64);
            GenSpec::Chain { m: chains, q: 1, h }
        }
        2 => {
            let layers = rng.gen_range(1..=3);
            let sizes = (0..layers).map(|_| rng.gen_range(1..=3)).collect();
            GenSpec::Layered { sizes, c, seed }
        }
        _ => {
            let n = rng.gen_range(1..=10u64);
            let h = rng.gen_range(1..=n.min(3)) as u32;
            GenSpec::RandomDag { n, h, density: rng.gen_range(0.0..=1.0), c, seed }
        }
    };
    let inst = spec.instance().expect("valid spec");
    (spec, inst)
}

/// Parameters for `alg` on `inst`, giving each mode exactly what it may know.
pub fn params_for(alg: Algorithm, inst: &Instance, m: u64, c: u64, epsilon: f64) -> AlgoParams {
    let base = AlgoParams::new(epsilon, m);
    let h = inst.height();
    let n = inst.n() as u64;
    match alg {
        Algorithm::StreamKnown => base.with_c(c).with_h(h),
        Algorithm::StreamUnknown => base,
        Algorithm::StreamAlphaKnown => base.with_c(c).with_h(h).with_n(n),
        Algorithm::StreamAlphaUnknown => base.with_n(n),
        Algorithm::SampleBounded => base.with_c(c).with_h(h).with_n(n),
        Algorithm::SampleAlpha => base.with_c(c).with_h(h).with_n(n),
    }
}

/// Feed the instance to a streaming mode; known-depth modes see depths,
/// the others only jobs and arcs.
pub fn stream(alg: Algorithm, inst: &Instance, params: &AlgoParams) -> Result<RunReport> {
    if alg.depths_given() {
        run_stream(alg, params, inst.job_events())
    } else {
        run_stream(alg, params, inst.events_without_depths())
    }
}

/// Jobs with the depths the run used (persisted ones for derived-depth modes).
pub fn jobs_for_second_pass(inst: &Instance, report: &RunReport) -> Vec<Job> {
    inst.jobs
        .iter()
        .map(|j| {
            let d = match &report.depths {
                Some(ds) => ds[j.id as usize - 1],
                None => j.depth.expect("depth"),
            };
            Job::with_depth(j.id, j.p, d)
        })
        .collect()
}

pub fn reconstruct(inst: &Instance, report: &RunReport, m: u64) -> Result<schedsketch::ConcreteSchedule> {
    let sks: ScheduleSketch = report.schedule_sketch();
    sketch_to_schedule(&sks, jobs_for_second_pass(inst, report), m)
}

/// Upper end of the unconditional sandwich for each streaming mode.
pub fn sandwich_upper(alg: Algorithm, epsilon: f64, c_star: u64, h: u32, c: u64, p_max: u64) -> f64 {
    let base = (1.0 + epsilon / 3.0) * c_star as f64;
    match alg {
        Algorithm::StreamKnown => base + (h as u64 * c) as f64,
        Algorithm::StreamUnknown => base + (h as u64 * p_max) as f64,
        _ => base + ((h as u64 + 1) * p_max) as f64 + 1.0,
    }
}
