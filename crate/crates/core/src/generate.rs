//! Seeded instance families.
//!
//! A [`GenSpec`] names a family and its parameters and has a canonical text
//! form such as `chain:m=200,q=5,h=3`. `chain`, `uniform` and `alpha-mixed`
//! also expose an implicit [`JobSource`] that computes job `i` on demand, so
//! samplers can run on instances far too large to materialize. Materializing
//! one of those families goes through the same per-index function.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::{Instance, InstanceMeta};
use crate::model::{Job, JobId};
use crate::sampling::{JobSource, SourceJob};

#[derive(Debug, Clone, PartialEq)]
pub enum GenSpec {
    /// `m·q` disjoint chains of `h` unit jobs; `C* = q·h` on `m` machines.
    Chain { m: u64, q: u64, h: u32 },
    /// `n` independent jobs with `p` uniform in `[1, c]`.
    Uniform { n: u64, c: u64, m: u64, seed: u64 },
    /// Layers of the given sizes; each job past layer 1 depends on one
    /// random job of the layer before.
    Layered { sizes: Vec<u64>, c: u64, seed: u64 },
    /// `n` independent jobs, exactly `⌈αn⌉` of them in `[⌈big/c⌉, big]` and
    /// the rest in `[1, small]`.
    AlphaMixed { n: u64, alpha: f64, c: u64, big: u64, small: u64, seed: u64 },
    /// `n` jobs on `h` levels; one parent on the previous level plus each
    /// other job of that level with probability `density`.
    RandomDag { n: u64, h: u32, density: f64, c: u64, seed: u64 },
}

pub const FAMILIES: [&str; 5] = ["chain", "uniform", "layered", "alpha-mixed", "random-dag"];

impl GenSpec {
    pub fn family(&self) -> &'static str {
        match self {
            GenSpec::Chain { .. } => "chain",
            GenSpec::Uniform { .. } => "uniform",
            GenSpec::Layered { .. } => "layered",
            GenSpec::AlphaMixed { .. } => "alpha-mixed",
            GenSpec::RandomDag { .. } => "random-dag",
        }
    }

    pub fn n(&self) -> u64 {
        match *self {
            GenSpec::Chain { m, q, h } => m * q * h as u64,
            GenSpec::Uniform { n, .. } | GenSpec::AlphaMixed { n, .. } | GenSpec::RandomDag { n, .. } => n,
            GenSpec::Layered { ref sizes, .. } => sizes.iter().sum(),
        }
    }

    /// Build from a family name and `key=value` pairs; missing keys take
    /// defaults, unknown keys are rejected.
    pub fn from_pairs(family: &str, pairs: &BTreeMap<String, String>) -> Result<Self> {
        let mut kv = Pairs { family, pairs, used: Vec::new() };
        let spec = match family {
            "chain" => GenSpec::Chain { m: kv.get("m", 1)?, q: kv.get("q", 1)?, h: kv.get("h", 1)? },
            "uniform" => GenSpec::Uniform {
                n: kv.required("n")?,
                c: kv.get("c", 1)?,
                m: kv.get("m", 1)?,
                seed: kv.get("seed", 0)?,
            },
            "layered" => GenSpec::Layered {
                sizes: kv
                    .raw("sizes")
                    .ok_or_else(|| Error::param("layered needs sizes=a/b/..."))?
                    .split('/')
                    .map(|s| s.trim().parse().map_err(|_| Error::param(format!("bad layer size {s:?}"))))
                    .collect::<Result<_>>()?,
                c: kv.get("c", 1)?,
                seed: kv.get("seed", 0)?,
            },
            "alpha-mixed" => {
                let c: u64 = kv.get("c", 2)?;
                let big: u64 = kv.get("big", 10)?;
                let default_small = big.div_ceil(c.max(1)).saturating_sub(1).max(1);
                GenSpec::AlphaMixed {
                    n: kv.required("n")?,
                    alpha: kv.get("alpha", 0.1)?,
                    c,
                    big,
                    small: kv.get("small", default_small)?,
                    seed: kv.get("seed", 0)?,
                }
            }
            "random-dag" => GenSpec::RandomDag {
                n: kv.required("n")?,
                h: kv.get("h", 3)?,
                density: kv.get("density", 0.3)?,
                c: kv.get("c", 3)?,
                seed: kv.get("seed", 0)?,
            },
            other => {
                return Err(Error::param(format!(
                    "unknown family {other:?} (expected one of {})",
                    FAMILIES.join(", ")
                )))
            }
        };
        kv.finish()?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::param(msg));
        match *self {
            GenSpec::Chain { m, q, h } if m == 0 || q == 0 || h == 0 => bad("chain needs m, q, h >= 1".into()),
            GenSpec::Uniform { n, c, m, .. } if n == 0 || c == 0 || m == 0 => {
                bad("uniform needs n, c, m >= 1".into())
            }
            GenSpec::Layered { ref sizes, c, .. } if sizes.is_empty() || sizes.contains(&0) || c == 0 => {
                bad("layered needs non-empty layers and c >= 1".into())
            }
            GenSpec::AlphaMixed { n, alpha, c, big, small, .. } => {
                if !(alpha > 0.0 && alpha <= 1.0) {
                    return bad(format!("alpha must lie in (0, 1], got {alpha}"));
                }
                if alpha * (n as f64) < 1.0 {
                    return bad(format!("alpha·n = {} < 1 leaves no large job", alpha * n as f64));
                }
                if c == 0 || big == 0 || small == 0 {
                    return bad("alpha-mixed needs c, big, small >= 1".into());
                }
                if alpha < 1.0 && small >= big.div_ceil(c) {
                    return bad(format!("small = {small} must stay below ⌈big/c⌉ = {}", big.div_ceil(c)));
                }
                Ok(())
            }
            GenSpec::RandomDag { n, h, density, c, .. } => {
                if h == 0 || n < h as u64 || c == 0 {
                    return bad(format!("random-dag needs 1 <= h <= n and c >= 1 (n = {n}, h = {h})"));
                }
                if !(0.0..=1.0).contains(&density) {
                    return bad(format!("density must lie in [0, 1], got {density}"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// On-demand job access for the families that have it.
    pub fn source(&self) -> Option<GenSource> {
        match *self {
            GenSpec::Chain { m, q, h } => Some(GenSource::Chain { width: m * q, h }),
            GenSpec::Uniform { n, c, seed, .. } => Some(GenSource::Uniform { n, c, rng: stream_base(seed) }),
            GenSpec::AlphaMixed { n, alpha, c, big, small, seed } => Some(GenSource::AlphaMixed {
                n,
                n_big: big_count(n, alpha),
                big_lo: big.div_ceil(c),
                big,
                small,
                rng: stream_base(seed),
            }),
            _ => None,
        }
    }

    /// Build every job and arc, with depths and metadata filled in.
    pub fn instance(&self) -> Result<Instance> {
        self.validate()?;
        let (jobs, arcs) = match self {
            GenSpec::Chain { m, q, h } => {
                let src = self.source().expect("implicit");
                let width = m * q;
                let arcs = (1..*h as u64)
                    .flat_map(|l| (0..width).map(move |i| (id_of((l - 1) * width + i), id_of(l * width + i))))
                    .collect();
                (materialize(&src), arcs)
            }
            GenSpec::Uniform { .. } | GenSpec::AlphaMixed { .. } => {
                (materialize(&self.source().expect("implicit")), Vec::new())
            }
            GenSpec::Layered { sizes, c, seed } => levelled(sizes, *c, 0.0, *seed),
            GenSpec::RandomDag { n, h, density, c, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
                let mut sizes = vec![1u64; *h as usize];
                for _ in *h as u64..*n {
                    sizes[rng.gen_range(0..*h as usize)] += 1;
                }
                levelled(&sizes, *c, *density, *seed)
            }
        };
        let mut inst = Instance { jobs, arcs, meta: self.meta() };
        let depths = inst.depths()?;
        for (j, d) in inst.jobs.iter_mut().zip(depths) {
            debug_assert!(j.depth.is_none() || j.depth == Some(d));
            j.depth = Some(d);
        }
        inst.meta.h = Some(inst.height());
        inst.meta.c = Some(inst.p_max());
        Ok(inst)
    }

    fn meta(&self) -> InstanceMeta {
        let mut meta = InstanceMeta {
            family: Some(self.family().to_string()),
            spec: Some(self.to_string()),
            ..Default::default()
        };
        match *self {
            GenSpec::Chain { m, q, h } => {
                meta.m = Some(m);
                meta.c_star = Some(q * h as u64);
            }
            GenSpec::Uniform { n, c, m, seed } => {
                meta.m = Some(m);
                meta.seed = Some(seed);
                if c == 1 {
                    meta.c_star = Some(n.div_ceil(m));
                }
            }
            GenSpec::AlphaMixed { alpha, seed, .. } => {
                meta.alpha = Some(alpha);
                meta.seed = Some(seed);
            }
            GenSpec::Layered { seed, .. } | GenSpec::RandomDag { seed, .. } => meta.seed = Some(seed),
        }
        meta
    }
}

impl fmt::Display for GenSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenSpec::Chain { m, q, h } => write!(f, "chain:m={m},q={q},h={h}"),
            GenSpec::Uniform { n, c, m, seed } => write!(f, "uniform:n={n},c={c},m={m},seed={seed}"),
            GenSpec::Layered { sizes, c, seed } => {
                let s: Vec<String> = sizes.iter().map(u64::to_string).collect();
                write!(f, "layered:sizes={},c={c},seed={seed}", s.join("/"))
            }
            GenSpec::AlphaMixed { n, alpha, c, big, small, seed } => {
                write!(f, "alpha-mixed:n={n},alpha={alpha},c={c},big={big},small={small},seed={seed}")
            }
            GenSpec::RandomDag { n, h, density, c, seed } => {
                write!(f, "random-dag:n={n},h={h},density={density},c={c},seed={seed}")
            }
        }
    }
}

impl FromStr for GenSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (family, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut pairs = BTreeMap::new();
        for item in rest.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::param(format!("expected key=value in gen spec, got {item:?}")))?;
            if pairs.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(Error::param(format!("key {k:?} repeated in gen spec")));
            }
        }
        GenSpec::from_pairs(family.trim(), &pairs)
    }
}

struct Pairs<'a> {
    family: &'a str,
    pairs: &'a BTreeMap<String, String>,
    used: Vec<&'static str>,
}

impl<'a> Pairs<'a> {
    fn raw(&mut self, key: &'static str) -> Option<&'a str> {
        self.used.push(key);
        self.pairs.get(key).map(String::as_str)
    }

    fn get<T: FromStr>(&mut self, key: &'static str, default: T) -> Result<T> {
        let family = self.family;
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| Error::param(format!("{family}: bad value {v:?} for {key}"))),
        }
    }

    fn required<T: FromStr>(&mut self, key: &'static str) -> Result<T> {
        if !self.pairs.contains_key(key) {
            return Err(Error::param(format!("{} needs {key}=...", self.family)));
        }
        let v = self.raw(key).expect("present");
        v.parse().map_err(|_| Error::param(format!("{}: bad value {v:?} for {key}", self.family)))
    }

    fn finish(self) -> Result<()> {
        match self.pairs.keys().find(|k| !self.used.contains(&k.as_str())) {
            Some(k) => Err(Error::param(format!("{}: unknown key {k:?}", self.family))),
            None => Ok(()),
        }
    }
}

fn id_of(index: u64) -> JobId {
    index as JobId + 1
}

fn big_count(n: u64, alpha: f64) -> u64 {
    // ⌈αn⌉ with a little slack so that e.g. 0.1·100 stays 10
    ((alpha * n as f64) - 1e-9).ceil().max(1.0) as u64
}

fn stream_base(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Implicit job source backed by a per-index random stream.
#[derive(Debug, Clone)]
pub enum GenSource {
    Chain { width: u64, h: u32 },
    Uniform { n: u64, c: u64, rng: ChaCha8Rng },
    AlphaMixed { n: u64, n_big: u64, big_lo: u64, big: u64, small: u64, rng: ChaCha8Rng },
}

impl GenSource {
    fn rng_at(base: &ChaCha8Rng, index: u64) -> ChaCha8Rng {
        let mut rng = base.clone();
        rng.set_stream(index);
        rng.set_word_pos(0);
        rng
    }
}

impl JobSource for GenSource {
    fn len(&self) -> u64 {
        match *self {
            GenSource::Chain { width, h } => width * h as u64,
            GenSource::Uniform { n, .. } | GenSource::AlphaMixed { n, .. } => n,
        }
    }

    fn job(&self, index: u64) -> SourceJob {
        match self {
            GenSource::Chain { width, .. } => SourceJob { p: 1, depth: (index / width) as u32 + 1 },
            GenSource::Uniform { c: 1, .. } => SourceJob { p: 1, depth: 1 },
            GenSource::Uniform { c, rng, .. } => {
                SourceJob { p: Self::rng_at(rng, index).gen_range(1..=*c), depth: 1 }
            }
            GenSource::AlphaMixed { n, n_big, big_lo, big, small, rng } => {
                // spread the large jobs evenly: index i is large when
                // ⌊(i+1)·b/n⌋ steps past ⌊i·b/n⌋
                let (i, b, n) = (index as u128, *n_big as u128, *n as u128);
                let is_big = (i + 1) * b / n > i * b / n;
                let mut r = Self::rng_at(rng, index);
                let p = if is_big { r.gen_range(*big_lo..=*big) } else { r.gen_range(1..=*small) };
                SourceJob { p, depth: 1 }
            }
        }
    }
}

fn materialize(src: &GenSource) -> Vec<Job> {
    (0..src.len())
        .map(|i| {
            let j = src.job(i);
            Job::with_depth(id_of(i), j.p, j.depth)
        })
        .collect()
}

/// Jobs numbered level by level, arcs only between consecutive levels, so
/// depth equals level and arcs sorted by source are in topological order.
fn levelled(sizes: &[u64], c: u64, density: f64, seed: u64) -> (Vec<Job>, Vec<(JobId, JobId)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jobs = Vec::new();
    let mut arcs = Vec::new();
    let mut prev: std::ops::Range<u64> = 0..0;
    let mut next_index = 0u64;
    for (l, &size) in sizes.iter().enumerate() {
        let level = next_index..next_index + size;
        for i in level.clone() {
            jobs.push(Job::with_depth(id_of(i), rng.gen_range(1..=c), l as u32 + 1));
            if !prev.is_empty() {
                let parent = rng.gen_range(prev.clone());
                for q in prev.clone() {
                    if q == parent || (density > 0.0 && rng.gen_bool(density)) {
                        arcs.push((id_of(q), id_of(i)));
                    }
                }
            }
        }
        prev = level;
        next_index += size;
    }
    arcs.sort_unstable();
    (jobs, arcs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{default_order, list_schedule};

    #[test]
    fn chain_example() {
        let spec: GenSpec = "chain:m=200,q=5,h=3".parse().unwrap();
        let inst = spec.instance().unwrap();
        assert_eq!(inst.n(), 3000);
        assert!(inst.jobs.iter().all(|j| j.p == 1));
        assert_eq!(inst.meta.c_star, Some(15));
        assert_eq!(inst.height(), 3);
        let s = list_schedule(&inst, 200, &default_order(&inst)).unwrap();
        assert_eq!(s.makespan(), 15);
    }

    #[test]
    fn chain_single_job() {
        let inst = GenSpec::Chain { m: 1, q: 1, h: 1 }.instance().unwrap();
        assert_eq!(inst.n(), 1);
        assert_eq!(inst.meta.c_star, Some(1));
    }

    #[test]
    fn alpha_mixed_example() {
        let spec: GenSpec = "alpha-mixed:n=100,alpha=0.1,c=2,big=10,seed=3".parse().unwrap();
        let inst = spec.instance().unwrap();
        assert_eq!(inst.jobs.iter().filter(|j| j.p >= 5).count(), 10);
        assert!(inst.jobs.iter().all(|j| j.p <= 10));
    }

    #[test]
    fn alpha_times_n_below_one_is_rejected() {
        assert!("alpha-mixed:n=5,alpha=0.1".parse::<GenSpec>().is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        for s in ["random-dag:n=40,h=4,seed=9", "uniform:n=50,c=7,seed=2", "layered:sizes=3/4/2,c=5,seed=1"] {
            let spec: GenSpec = s.parse().unwrap();
            assert_eq!(spec.instance().unwrap(), spec.instance().unwrap());
        }
        let a = "random-dag:n=40,h=4,seed=9".parse::<GenSpec>().unwrap().instance().unwrap();
        let b = "random-dag:n=40,h=4,seed=10".parse::<GenSpec>().unwrap().instance().unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn depths_match_levels() {
        let inst = "random-dag:n=30,h=5,density=0.5,seed=4".parse::<GenSpec>().unwrap().instance().unwrap();
        assert_eq!(inst.height(), 5);
        let inst = "layered:sizes=3/4/2".parse::<GenSpec>().unwrap().instance().unwrap();
        let d: Vec<u32> = inst.jobs.iter().map(|j| j.depth.unwrap()).collect();
        assert_eq!(d, vec![1, 1, 1, 2, 2, 2, 2, 3, 3]);
        assert_eq!(inst.arcs.len(), 6);
    }

    #[test]
    fn implicit_source_matches_materialized() {
        for s in ["chain:m=3,q=2,h=4", "uniform:n=64,c=9,seed=5", "alpha-mixed:n=64,alpha=0.25,c=3,big=30,seed=1"] {
            let spec: GenSpec = s.parse().unwrap();
            let src = spec.source().unwrap();
            let inst = spec.instance().unwrap();
            assert_eq!(src.len(), inst.n() as u64);
            for (i, j) in inst.jobs.iter().enumerate() {
                assert_eq!(src.job(i as u64), SourceJob { p: j.p, depth: j.depth.unwrap() });
            }
        }
    }

    #[test]
    fn spec_text_round_trips() {
        for s in [
            "chain:m=200,q=5,h=3",
            "uniform:n=10,c=1,m=1,seed=0",
            "layered:sizes=1/2,c=3,seed=7",
            "alpha-mixed:n=100,alpha=0.1,c=2,big=10,small=4,seed=3",
            "random-dag:n=8,h=2,density=0.25,c=3,seed=1",
        ] {
            assert_eq!(s.parse::<GenSpec>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn bad_specs() {
        assert!("nope:n=1".parse::<GenSpec>().is_err());
        assert!("chain:m=1,z=2".parse::<GenSpec>().is_err());
        assert!("chain:m=x".parse::<GenSpec>().is_err());
        assert!("uniform:c=2".parse::<GenSpec>().is_err());
        assert!("chain:m=0".parse::<GenSpec>().is_err());
    }
}
