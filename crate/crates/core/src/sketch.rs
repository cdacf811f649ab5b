//! Sketch of the input: job counts per (depth, geometric bucket).
//!
//! Two realizations share one read interface. [`GridSketch`] is a dense
//! `h × (k+1)` array for when `c` and `h` are known up front; [`InputSketch`]
//! is an ordered map keyed by `(u, d)` that supports deletes, moves and
//! min-key pruning for the unknown-parameter and α-constrained modes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bucket::{bucket_index, floor_log};
use crate::error::{Error, Result};

/// Sort key: bucket first, depth second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SketchKey {
    pub u: i64,
    pub d: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SketchEntry {
    pub d: u32,
    pub u: i64,
    pub n: u64,
}

/// Serialized form: entries sorted by `(u, d)` plus the observed extremes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SketchSnapshot {
    pub entries: Vec<SketchEntry>,
    pub p_min: Option<u64>,
    pub p_max: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InputSketch {
    entries: BTreeMap<SketchKey, u64>,
    p_min: Option<u64>,
    p_max: Option<u64>,
    total_counted: u64,
}

impl InputSketch {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_counted(&self) -> u64 {
        self.total_counted
    }

    pub fn p_min(&self) -> Option<u64> {
        self.p_min
    }

    pub fn p_max(&self) -> Option<u64> {
        self.p_max
    }

    pub fn count(&self, d: u32, u: i64) -> u64 {
        self.entries.get(&SketchKey { u, d }).copied().unwrap_or(0)
    }

    /// Record a processing time in the running extremes without counting a job.
    pub fn observe(&mut self, p: u64) {
        self.p_min = Some(self.p_min.map_or(p, |v| v.min(p)));
        self.p_max = Some(self.p_max.map_or(p, |v| v.max(p)));
    }

    /// Increment `n_{d,u}`. Returns `true` when a new entry was created.
    pub fn add(&mut self, d: u32, u: i64) -> bool {
        debug_assert!(d >= 1);
        self.total_counted += 1;
        let slot = self.entries.entry(SketchKey { u, d }).or_insert(0);
        *slot += 1;
        *slot == 1
    }

    /// Move one job of bucket `u` from depth `from` to depth `to`.
    pub fn move_job(&mut self, from: u32, to: u32, u: i64) -> Result<()> {
        if to <= from {
            return Err(Error::InvariantViolation(format!(
                "depth must increase on move, got {from} -> {to}"
            )));
        }
        let key = SketchKey { u, d: from };
        match self.entries.get_mut(&key) {
            Some(n) if *n > 1 => *n -= 1,
            Some(_) => {
                self.entries.remove(&key);
            }
            None => {
                return Err(Error::InvariantViolation(format!(
                    "no sketch entry at (d={from}, u={u}) to move from"
                )))
            }
        }
        *self.entries.entry(SketchKey { u, d: to }).or_insert(0) += 1;
        Ok(())
    }

    /// Remove the minimum-key entry if its bucket lies below `cutoff_u`.
    /// At most one entry is removed per call.
    pub fn prune_smallest(&mut self, cutoff_u: i64) -> bool {
        match self.entries.first_key_value() {
            Some((key, _)) if key.u < cutoff_u => {
                self.entries.pop_first();
                true
            }
            _ => false,
        }
    }

    /// Keep only entries with `lo <= u <= hi`.
    pub fn retain_buckets(&mut self, lo: i64, hi: i64) {
        self.entries.retain(|k, _| k.u >= lo && k.u <= hi);
    }

    /// Restrict to `[u₋, u₊]` with `u₋ = ⌊log(p_max/n²)⌋` and `u₊ = ⌊log p_max⌋`.
    /// Returns the bucket range used, or `None` if no job was observed.
    pub fn finalize_alpha(&mut self, n: u64, delta: f64) -> Option<(i64, i64)> {
        let p_max = self.p_max?;
        let (lo, hi) = alpha_bucket_range(p_max, n, delta);
        self.retain_buckets(lo, hi);
        Some((lo, hi))
    }

    /// Entries in `(u, d)` order.
    pub fn iter(&self) -> impl Iterator<Item = SketchEntry> + '_ {
        self.entries.iter().map(|(k, &n)| SketchEntry { d: k.d, u: k.u, n })
    }

    pub fn max_depth(&self) -> u32 {
        self.entries.keys().map(|k| k.d).max().unwrap_or(0)
    }

    pub fn snapshot(&self) -> SketchSnapshot {
        SketchSnapshot { entries: self.iter().collect(), p_min: self.p_min, p_max: self.p_max }
    }
}

/// `[⌊log_{1+δ}(p_max/n²)⌋, ⌊log_{1+δ} p_max⌋]`.
pub fn alpha_bucket_range(p_max: u64, n: u64, delta: f64) -> (i64, i64) {
    let nf = n as f64;
    (floor_log(p_max as f64 / (nf * nf), delta), bucket_index(p_max, delta))
}

/// Dense `h × (k+1)` counts for the known-parameter mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSketch {
    h: u32,
    k: i64,
    counts: Vec<u64>,
}

impl GridSketch {
    pub fn new(h: u32, k: i64) -> Self {
        let cells = h as usize * (k as usize + 1);
        GridSketch { h, k, counts: vec![0; cells] }
    }

    /// Number of cells, `h·(k+1)`; this is the sketch's space footprint.
    pub fn cells(&self) -> usize {
        self.counts.len()
    }

    pub fn add(&mut self, d: u32, u: i64) {
        debug_assert!(d >= 1 && d <= self.h && (0..=self.k).contains(&u));
        let idx = (d as usize - 1) * (self.k as usize + 1) + u as usize;
        self.counts[idx] += 1;
    }

    pub fn count(&self, d: u32, u: i64) -> u64 {
        self.counts[(d as usize - 1) * (self.k as usize + 1) + u as usize]
    }

    /// Non-zero cells in `(u, d)` order.
    pub fn iter(&self) -> impl Iterator<Item = SketchEntry> + '_ {
        (0..=self.k).flat_map(move |u| {
            (1..=self.h).filter_map(move |d| {
                let n = self.count(d, u);
                (n > 0).then_some(SketchEntry { d, u, n })
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entries(sk: &InputSketch) -> Vec<(u32, i64, u64)> {
        sk.iter().map(|e| (e.d, e.u, e.n)).collect()
    }

    #[test]
    fn add_inserts_then_increments() {
        let mut sk = InputSketch::new();
        assert!(sk.add(1, 0));
        assert_eq!(entries(&sk), vec![(1, 0, 1)]);
        assert!(!sk.add(1, 0));
        assert_eq!(entries(&sk), vec![(1, 0, 2)]);
    }

    #[test]
    fn iteration_is_bucket_major() {
        let mut sk = InputSketch::new();
        sk.add(2, 3);
        sk.add(1, 0);
        sk.add(1, 3);
        assert_eq!(entries(&sk), vec![(1, 0, 1), (1, 3, 1), (2, 3, 1)]);
    }

    #[test]
    fn move_conserves_counts() {
        let mut sk = InputSketch::new();
        sk.add(1, 2);
        sk.move_job(1, 2, 2).unwrap();
        assert_eq!(entries(&sk), vec![(2, 2, 1)]);

        let mut sk = InputSketch::new();
        for _ in 0..3 {
            sk.add(1, 2);
        }
        sk.move_job(1, 3, 2).unwrap();
        assert_eq!(entries(&sk), vec![(1, 2, 2), (3, 2, 1)]);
        assert_eq!(sk.total_counted(), 3);
    }

    #[test]
    fn move_from_missing_entry_is_an_error() {
        let mut sk = InputSketch::new();
        assert!(matches!(sk.move_job(1, 2, 0), Err(Error::InvariantViolation(_))));
    }

    #[test]
    fn prune_removes_only_the_minimum_below_cutoff() {
        let mut sk = InputSketch::new();
        sk.add(1, -5);
        sk.add(1, -5);
        sk.add(1, 3);
        assert!(sk.prune_smallest(0));
        assert_eq!(entries(&sk), vec![(1, 3, 1)]);
        assert!(!sk.prune_smallest(0));
        assert_eq!(entries(&sk), vec![(1, 3, 1)]);

        let mut empty = InputSketch::new();
        assert!(!empty.prune_smallest(0));
        assert!(empty.is_empty());
    }

    #[test]
    fn prune_is_lazy() {
        let mut sk = InputSketch::new();
        sk.add(1, -3);
        sk.add(2, -2);
        sk.add(1, 5);
        assert!(sk.prune_smallest(0));
        assert_eq!(sk.len(), 2);
    }

    #[test]
    fn finalize_alpha_drops_out_of_range_buckets() {
        // p_max = 100, n = 10, δ = 0.1: u₋ = ⌊log 1⌋ = 0, u₊ = 48.
        let mut sk = InputSketch::new();
        sk.observe(100);
        sk.add(1, -1);
        sk.add(1, 0);
        sk.add(2, 48);
        sk.add(1, 49);
        let range = sk.finalize_alpha(10, 0.1).unwrap();
        assert_eq!(range, (0, 48));
        assert_eq!(entries(&sk), vec![(1, 0, 1), (2, 48, 1)]);
    }

    #[test]
    fn finalize_alpha_is_identity_when_in_range() {
        let mut sk = InputSketch::new();
        sk.observe(100);
        sk.add(1, 10);
        sk.add(3, 20);
        let before = sk.clone();
        sk.finalize_alpha(10, 0.1);
        assert_eq!(sk, before);
    }

    #[test]
    fn grid_iterates_in_key_order() {
        let mut g = GridSketch::new(2, 3);
        assert_eq!(g.cells(), 8);
        g.add(2, 0);
        g.add(1, 3);
        g.add(1, 0);
        let got: Vec<_> = g.iter().map(|e| (e.d, e.u, e.n)).collect();
        assert_eq!(got, vec![(1, 0, 1), (2, 0, 1), (1, 3, 1)]);
    }

    #[test]
    fn snapshot_json_shape() {
        let mut sk = InputSketch::new();
        sk.observe(3);
        sk.add(1, 0);
        let js = serde_json::to_value(sk.snapshot()).unwrap();
        assert_eq!(
            js,
            serde_json::json!({"entries": [{"d": 1, "u": 0, "n": 1}], "p_min": 3, "p_max": 3})
        );
    }
}
