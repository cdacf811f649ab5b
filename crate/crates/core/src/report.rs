use serde::{Deserialize, Serialize};

use crate::model::{AlgoParams, Algorithm, DerivedParams};
use crate::sampling::EstimatedSketch;
use crate::schedule::ScheduleSketch;
use crate::sketch::SketchSnapshot;

/// Instance facts an algorithm learned (or was told) during its run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Discovered {
    pub n: u64,
    pub h: u32,
    pub c: u64,
    pub p_min: u64,
    pub p_max: u64,
    /// Jobs left out of the sketch (small-job cutoff or sample filter).
    #[serde(default)]
    pub skipped: u64,
    /// `w0`, the pilot estimate of the largest processing time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w0: Option<u64>,
}

/// Outcome of one run. Serializes to the result-file JSON layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub algorithm: Algorithm,
    /// Approximate optimal makespan.
    #[serde(rename = "A")]
    pub approx: u64,
    /// Schedule-sketch instants `t_1..t_h`.
    pub sks: Vec<u64>,
    pub sketch_nodes: usize,
    /// Largest sketch size observed during the pass.
    #[serde(default)]
    pub peak_sketch_nodes: usize,
    /// Job draws (sampling) or job reads (streaming).
    pub samples: u64,
    pub update_count: u64,
    pub params: AlgoParams,
    pub derived: DerivedParams,
    pub guarantee_condition_met: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub discovered: Discovered,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sketch: Option<SketchSnapshot>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimated_sketch: Option<EstimatedSketch>,
    /// Per-job depths (index `id - 1`), persisted by the modes that derive
    /// depths from arcs so a second pass can rebuild the schedule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depths: Option<Vec<u32>>,
}

impl RunReport {
    pub fn schedule_sketch(&self) -> ScheduleSketch {
        ScheduleSketch { t: self.sks.clone(), source: Some(self.algorithm) }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serializable")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

/// Cumulative instants from per-depth interval lengths.
pub(crate) fn cumulative(increments: impl IntoIterator<Item = u64>) -> Vec<u64> {
    increments
        .into_iter()
        .scan(0u64, |t, inc| {
            *t += inc;
            Some(*t)
        })
        .collect()
}
