//! Browser demo. Each exported function takes plain strings and numbers and
//! returns a JSON string, or throws a string error.

use schedsketch::format::read_instance;
use schedsketch::oracle::{EXACT_MAX_M, EXACT_MAX_N};
use schedsketch::{
    default_order, exact_makespan, list_schedule, lower_bound, run_sampling, run_stream, sketch_to_schedule,
    validate_schedule, AlgoParams, Algorithm, GenSpec, Instance, Job,
};
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

type Out = Result<String, JsValue>;

fn err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Either a generator spec like `chain:m=4,q=2,h=3` or instance text.
fn load(input: &str) -> Result<Instance, JsValue> {
    let input = input.trim();
    if input.starts_with('#') {
        let mut inst = read_instance(input.as_bytes()).map_err(err)?;
        inst.fill_depths().map_err(err)?;
        Ok(inst)
    } else {
        input.parse::<GenSpec>().map_err(err)?.instance().map_err(err)
    }
}

fn algorithm(name: &str) -> Result<Algorithm, JsValue> {
    Algorithm::from_name(name).ok_or_else(|| err(format!("unknown algorithm {name}")))
}

/// Parameters from the instance itself; each mode gets only what it may know.
fn params(alg: Algorithm, inst: &Instance, epsilon: f64, m: u64) -> AlgoParams {
    let base = AlgoParams::new(epsilon, m).with_n(inst.n() as u64);
    match alg {
        Algorithm::StreamUnknown | Algorithm::StreamAlphaUnknown => base,
        _ => base.with_c(inst.p_max()).with_h(inst.height()),
    }
}

#[derive(Serialize)]
struct Reference {
    value: u64,
    kind: &'static str,
}

fn reference(inst: &Instance, m: u64) -> Result<Reference, JsValue> {
    if inst.n() <= EXACT_MAX_N && m <= EXACT_MAX_M {
        Ok(Reference { value: exact_makespan(inst, m).map_err(err)?, kind: "optimum" })
    } else {
        Ok(Reference { value: lower_bound(inst, m).map_err(err)?, kind: "lower_bound" })
    }
}

/// One streaming pass plus the second pass that places every job. Returns the
/// report, the concrete schedule for the Gantt chart, the validator output
/// and a reference makespan.
#[wasm_bindgen]
pub fn stream_run(input: &str, alg: &str, epsilon: f64, m: u32) -> Out {
    let inst = load(input)?;
    let alg = algorithm(alg)?;
    if alg.is_sampling() {
        return Err(err("stream_run takes stream1..stream4"));
    }
    let m = m as u64;
    let p = params(alg, &inst, epsilon, m);
    let report = if alg.depths_given() {
        run_stream(alg, &p, inst.job_events())
    } else {
        run_stream(alg, &p, inst.events_without_depths())
    }
    .map_err(err)?;

    let depths = inst.depths().map_err(err)?;
    let jobs = inst.jobs.iter().map(|j| Job::with_depth(j.id, j.p, depths[j.id as usize - 1]));
    let schedule = sketch_to_schedule(&report.schedule_sketch(), jobs, m).map_err(err)?;
    let violations = validate_schedule(&schedule, &inst, m);
    let list = list_schedule(&inst, m, &default_order(&inst)).map_err(err)?.makespan();
    Ok(json!({
        "report": report,
        "schedule": schedule.clone().sorted_by_job().assignments,
        "makespan": schedule.makespan(),
        "violations": violations,
        "reference": reference(&inst, m)?,
        "list_makespan": list,
        "n": inst.n(),
        "h": inst.height(),
    })
    .to_string())
}

/// Repeated sampling runs with consecutive seeds; returns each trial's
/// estimate and its ratio to the reference makespan.
#[wasm_bindgen]
pub fn sample_trials(spec: &str, alg: &str, epsilon: f64, m: u32, alpha: f64, scale: f64, trials: u32) -> Out {
    let spec: GenSpec = spec.parse().map_err(err)?;
    let alg = algorithm(alg)?;
    if !alg.is_sampling() {
        return Err(err("sample_trials takes sample1 or sample2"));
    }
    let inst = spec.instance().map_err(err)?;
    let m = m as u64;
    let reference = reference(&inst, m)?;
    let base = AlgoParams::new(epsilon, m)
        .with_c(inst.p_max())
        .with_h(inst.height())
        .with_alpha(alpha)
        .with_confidence_scale(scale);
    let mut rows = Vec::new();
    for seed in 0..trials as u64 {
        let r = run_sampling(alg, &inst, &base.clone().with_seed(seed)).map_err(err)?;
        rows.push(json!({
            "seed": seed,
            "A": r.approx,
            "samples": r.samples,
            "ratio": r.approx as f64 / reference.value.max(1) as f64,
            "full_scan": r.samples >= inst.n() as u64,
        }));
    }
    Ok(json!({ "trials": rows, "reference": reference, "n": inst.n() }).to_string())
}

/// Instance text for a generator spec, so the page can show and edit it.
#[wasm_bindgen]
pub fn generate(spec: &str) -> Out {
    let spec: GenSpec = spec.parse().map_err(err)?;
    let inst = spec.instance().map_err(err)?;
    Ok(schedsketch::format::instance_to_string(&inst))
}

#[cfg(test)]
mod tests {
    use super::*;

    // JsValue errors only work on wasm, so native tests stick to success paths.
    #[test]
    fn chain_run_is_valid() {
        let out = stream_run("chain:m=4,q=2,h=3", "stream2", 0.3, 4).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["violations"], json!([]));
        assert_eq!(v["schedule"].as_array().unwrap().len(), 24);
        assert!(v["makespan"].as_u64().unwrap() <= v["report"]["A"].as_u64().unwrap());
    }

    #[test]
    fn pasted_text_runs() {
        let text = generate("random-dag:n=10,h=3,c=4,seed=3").unwrap();
        for alg in ["stream1", "stream2", "stream3", "stream4"] {
            let v: serde_json::Value = serde_json::from_str(&stream_run(&text, alg, 0.5, 2).unwrap()).unwrap();
            assert_eq!(v["violations"], json!([]), "{alg}");
            assert_eq!(v["reference"]["kind"], "optimum");
        }
    }

    #[test]
    fn trials_are_listed() {
        let out = sample_trials("uniform:n=500,c=3,seed=1", "sample1", 0.5, 2, 1.0, 1e-3, 5).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["trials"].as_array().unwrap().len(), 5);
    }
}
