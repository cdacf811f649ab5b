//! Domain types shared by every algorithm: jobs, stream events, parameters
//! and the constants derived from them.

use serde::{Deserialize, Serialize};

use crate::bucket::{bucket_index, floor_log};
use crate::error::{Error, Result};

pub type JobId = u32;

/// A job as it appears on a stream: positive integer processing time and,
/// when known, its depth in the precedence DAG.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    pub id: JobId,
    pub p: u64,
    pub depth: Option<u32>,
}

impl Job {
    pub fn new(id: JobId, p: u64) -> Self {
        Job { id, p, depth: None }
    }

    pub fn with_depth(id: JobId, p: u64, depth: u32) -> Self {
        Job { id, p, depth: Some(depth) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamEvent {
    Job(Job),
    Arc { src: JobId, dst: JobId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    /// One pass, `c`, `h` and depths known up front.
    #[serde(rename = "stream1")]
    StreamKnown,
    /// One pass over jobs then topologically ordered arcs.
    #[serde(rename = "stream2")]
    StreamUnknown,
    /// α-constrained instances, depths known, small jobs pruned.
    #[serde(rename = "stream3")]
    StreamAlphaKnown,
    /// α-constrained instances over jobs then arcs.
    #[serde(rename = "stream4")]
    StreamAlphaUnknown,
    /// Uniform sampling, bounded processing-time ratio.
    #[serde(rename = "sample1")]
    SampleBounded,
    /// Uniform sampling for α-constrained instances.
    #[serde(rename = "sample2")]
    SampleAlpha,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::StreamKnown,
        Algorithm::StreamUnknown,
        Algorithm::StreamAlphaKnown,
        Algorithm::StreamAlphaUnknown,
        Algorithm::SampleBounded,
        Algorithm::SampleAlpha,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::StreamKnown => "stream1",
            Algorithm::StreamUnknown => "stream2",
            Algorithm::StreamAlphaKnown => "stream3",
            Algorithm::StreamAlphaUnknown => "stream4",
            Algorithm::SampleBounded => "sample1",
            Algorithm::SampleAlpha => "sample2",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == name)
    }

    pub fn is_sampling(self) -> bool {
        matches!(self, Algorithm::SampleBounded | Algorithm::SampleAlpha)
    }

    /// Whether depths arrive with the jobs (as opposed to being derived from arcs).
    pub fn depths_given(self) -> bool {
        !matches!(self, Algorithm::StreamUnknown | Algorithm::StreamAlphaUnknown)
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn default_alpha() -> f64 {
    1.0
}

fn default_scale() -> f64 {
    1.0
}

/// User-facing parameters. Which of the optional fields are required
/// depends on the algorithm; see [`derive_params`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgoParams {
    pub epsilon: f64,
    pub m: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<u32>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    /// Multiplies the sample sizes `n'` and `n0`; 1 keeps the published constants.
    #[serde(default = "default_scale")]
    pub confidence_scale: f64,
}

impl AlgoParams {
    pub fn new(epsilon: f64, m: u64) -> Self {
        AlgoParams {
            epsilon,
            m,
            c: None,
            h: None,
            alpha: 1.0,
            n: None,
            seed: 0,
            confidence_scale: 1.0,
        }
    }

    pub fn with_c(mut self, c: u64) -> Self {
        self.c = Some(c);
        self
    }

    pub fn with_h(mut self, h: u32) -> Self {
        self.h = Some(h);
        self
    }

    pub fn with_n(mut self, n: u64) -> Self {
        self.n = Some(n);
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_confidence_scale(mut self, scale: f64) -> Self {
        self.confidence_scale = scale;
        self
    }

    pub(crate) fn require_c(&self) -> Result<u64> {
        self.c.ok_or_else(|| Error::param("c is required"))
    }

    pub(crate) fn require_h(&self) -> Result<u32> {
        self.h.ok_or_else(|| Error::param("h is required"))
    }

    pub(crate) fn require_n(&self) -> Result<u64> {
        self.n.ok_or_else(|| Error::param("n is required"))
    }
}

/// Sample sizes and thresholds for the two sampling schemes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    /// Failure budget per `(d, u)` group.
    pub gamma: f64,
    /// Group-frequency threshold `p`; `τ = n·p`.
    pub prob: f64,
    pub beta: f64,
    /// `n'`, before any capping at `n`.
    pub sample_size: u64,
    /// `n0` draws used to estimate the largest processing time (0 when unused).
    pub pilot_size: u64,
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub delta: f64,
    /// Bucket count exponent, when the algorithm defines one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<i64>,
    /// `max(k, 1)`, used wherever `k` appears as a divisor or multiplier.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_eff: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SamplingPlan>,
}

fn validate_common(raw: &AlgoParams) -> Result<()> {
    if !(raw.epsilon > 0.0 && raw.epsilon < 1.0) {
        return Err(Error::param(format!("epsilon must lie in (0,1), got {}", raw.epsilon)));
    }
    if !(raw.alpha > 0.0 && raw.alpha <= 1.0) {
        return Err(Error::param(format!("alpha must lie in (0,1], got {}", raw.alpha)));
    }
    if raw.m < 1 {
        return Err(Error::param("m must be at least 1"));
    }
    if !(raw.confidence_scale > 0.0 && raw.confidence_scale.is_finite()) {
        return Err(Error::param("confidence_scale must be a positive finite number"));
    }
    if raw.c == Some(0) {
        return Err(Error::param("c must be at least 1"));
    }
    if raw.h == Some(0) {
        return Err(Error::param("h must be at least 1"));
    }
    if raw.n == Some(0) {
        return Err(Error::param("n must be at least 1"));
    }
    Ok(())
}

fn ceil_to_u64(x: f64) -> u64 {
    // `as` saturates at u64::MAX for out-of-range floats.
    x.ceil() as u64
}

/// Validate `raw` for `alg` and compute every constant the algorithm uses.
pub fn derive_params(raw: &AlgoParams, alg: Algorithm) -> Result<DerivedParams> {
    validate_common(raw)?;
    let eps = raw.epsilon;
    match alg {
        Algorithm::StreamKnown => {
            let c = raw.require_c()?;
            raw.require_h()?;
            let delta = eps / 3.0;
            let k = bucket_index(c, delta);
            Ok(DerivedParams { delta, k: Some(k), k_eff: Some(k.max(1)), sampling: None })
        }
        Algorithm::StreamUnknown => Ok(DerivedParams {
            delta: eps / 3.0,
            k: None,
            k_eff: None,
            sampling: None,
        }),
        Algorithm::StreamAlphaKnown => {
            raw.require_n()?;
            raw.require_c()?;
            raw.require_h()?;
            Ok(DerivedParams { delta: eps / 3.0, k: None, k_eff: None, sampling: None })
        }
        Algorithm::StreamAlphaUnknown => {
            raw.require_n()?;
            Ok(DerivedParams { delta: eps / 3.0, k: None, k_eff: None, sampling: None })
        }
        Algorithm::SampleBounded => {
            let c = raw.require_c()?;
            let h = raw.require_h()?;
            let n = raw.require_n()?;
            let delta = eps / 20.0;
            let k = bucket_index(c, delta);
            let k_eff = k.max(1);
            let hk = h as f64 * k_eff as f64;
            let gamma = 1.0 / (10.0 * hk);
            let prob = 5.0 * delta / (2.0 * c as f64 * hk * raw.m as f64);
            let beta = delta * prob;
            let n_prime = raw.confidence_scale * 3.0 / (beta * beta) * (2.0 / gamma).ln();
            Ok(DerivedParams {
                delta,
                k: Some(k),
                k_eff: Some(k_eff),
                sampling: Some(SamplingPlan {
                    gamma,
                    prob,
                    beta,
                    sample_size: ceil_to_u64(n_prime),
                    pilot_size: 0,
                    tau: n as f64 * prob,
                }),
            })
        }
        Algorithm::SampleAlpha => {
            let c = raw.require_c()?;
            let h = raw.require_h()?;
            let n = raw.require_n()?;
            let alpha = raw.alpha;
            let delta = eps / 20.0;
            let k = floor_log(c as f64 * n as f64 / delta, delta);
            let k_eff = k.max(1);
            let hk = h as f64 * k_eff as f64;
            let gamma = 1.0 / (10.0 * hk);
            let pilot_size = if alpha >= 1.0 {
                1
            } else {
                ceil_to_u64(raw.confidence_scale * gamma.ln() / (1.0 - alpha).ln()).max(1)
            };
            let cf = c as f64;
            let prob = 5.0 * alpha * delta / (2.0 * cf * cf * hk * raw.m as f64);
            let beta = delta * prob;
            let n_prime = raw.confidence_scale * 3.0 / (alpha * beta * beta) * (2.0 / gamma).ln();
            Ok(DerivedParams {
                delta,
                k: Some(k),
                k_eff: Some(k_eff),
                sampling: Some(SamplingPlan {
                    gamma,
                    prob,
                    beta,
                    sample_size: ceil_to_u64(n_prime),
                    pilot_size,
                    tau: n as f64 * prob,
                }),
            })
        }
    }
}

/// The machine-count condition under which each scheme's `(1+ε)` guarantee holds.
pub fn guarantee_condition(
    alg: Algorithm,
    n: u64,
    m: u64,
    epsilon: f64,
    h: u32,
    c: u64,
    alpha: f64,
) -> bool {
    let (n, m, h, c) = (n as f64, m as f64, h as f64, c as f64);
    // Compare in product form with a relative slack so that boundary cases
    // such as m = 2nε/(3hc) exactly are not lost to rounding.
    let (lhs, rhs) = match alg {
        Algorithm::StreamKnown | Algorithm::StreamUnknown => (3.0 * h * c * m, 2.0 * n * epsilon),
        Algorithm::StreamAlphaKnown | Algorithm::StreamAlphaUnknown => {
            (3.0 * (h + 1.0) * c * m, 2.0 * n * alpha * epsilon)
        }
        Algorithm::SampleBounded => (20.0 * h * c * m, n * epsilon),
        Algorithm::SampleAlpha => (20.0 * c * c * h * m, n * alpha * epsilon),
    };
    lhs <= rhs * (1.0 + 1e-12)
}
