//! Line-oriented instance files.
//!
//! ```text
//! # sched-stream v1
//! J 1 3 1
//! J 2 1 2
//! A 1 2
//! ```
//!
//! `J <id> <p> [<depth>]` lines come first with ids `1..n` in order, then
//! `A <src> <dst>` lines. Blank lines and other `#` lines are ignored.

use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::instance::{Instance, InstanceMeta};
use crate::model::{Job, JobId, StreamEvent};

pub const HEADER: &str = "# sched-stream v1";

/// Reads events one line at a time and enforces the file contract as it goes.
pub struct EventReader<R> {
    lines: io::Lines<R>,
    line_no: usize,
    seen_header: bool,
    jobs: u64,
    with_depth: Option<bool>,
    in_arcs: bool,
    done: bool,
}

impl<R: BufRead> EventReader<R> {
    pub fn new(reader: R) -> Self {
        EventReader {
            lines: reader.lines(),
            line_no: 0,
            seen_header: false,
            jobs: 0,
            with_depth: None,
            in_arcs: false,
            done: false,
        }
    }

    /// Jobs read so far.
    pub fn jobs(&self) -> u64 {
        self.jobs
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line_no, msg: msg.into() }
    }

    fn parse_line(&mut self, line: &str) -> Result<Option<StreamEvent>> {
        let line = line.trim();
        if !self.seen_header {
            if line.is_empty() {
                return Ok(None);
            }
            if line != HEADER {
                return Err(self.err(format!("expected header {HEADER:?}")));
            }
            self.seen_header = true;
            return Ok(None);
        }
        if line.is_empty() || line.starts_with('#') {
            return Ok(None);
        }
        let mut fields = line.split_ascii_whitespace();
        let tag = fields.next().expect("non-empty line");
        let nums: Vec<u64> = fields
            .map(|f| f.parse::<u64>().map_err(|_| self.err(format!("not a non-negative integer: {f:?}"))))
            .collect::<Result<_>>()?;
        match tag {
            "J" => {
                if self.in_arcs {
                    return Err(self.err("job line after arc lines"));
                }
                if !(2..=3).contains(&nums.len()) {
                    return Err(self.err("expected J <id> <p> [<depth>]"));
                }
                let has_depth = nums.len() == 3;
                if *self.with_depth.get_or_insert(has_depth) != has_depth {
                    return Err(self.err("either every job line carries a depth or none does"));
                }
                if nums[0] != self.jobs + 1 {
                    return Err(self.err(format!("expected job id {}, got {}", self.jobs + 1, nums[0])));
                }
                if nums[1] == 0 {
                    return Err(self.err("processing time must be positive"));
                }
                let id = to_id(nums[0]).ok_or_else(|| self.err("job id too large"))?;
                let job = if has_depth {
                    let d = u32::try_from(nums[2]).ok().filter(|&d| d >= 1);
                    Job::with_depth(id, nums[1], d.ok_or_else(|| self.err("depth must be in 1..2^32"))?)
                } else {
                    Job::new(id, nums[1])
                };
                self.jobs += 1;
                Ok(Some(StreamEvent::Job(job)))
            }
            "A" => {
                self.in_arcs = true;
                if nums.len() != 2 {
                    return Err(self.err("expected A <src> <dst>"));
                }
                for &id in &nums {
                    if id == 0 || id > self.jobs {
                        return Err(self.err(format!("arc endpoint {id} is not a job id in 1..={}", self.jobs)));
                    }
                }
                Ok(Some(StreamEvent::Arc { src: nums[0] as JobId, dst: nums[1] as JobId }))
            }
            other => Err(self.err(format!("unknown line tag {other:?}"))),
        }
    }
}

fn to_id(x: u64) -> Option<JobId> {
    JobId::try_from(x).ok()
}

impl<R: BufRead> Iterator for EventReader<R> {
    type Item = Result<StreamEvent>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        loop {
            let line = match self.lines.next() {
                None => {
                    self.done = true;
                    if !self.seen_header {
                        return Some(Err(self.err(format!("missing header {HEADER:?}"))));
                    }
                    return None;
                }
                Some(Err(e)) => {
                    self.done = true;
                    return Some(Err(self.err(format!("read error: {e}"))));
                }
                Some(Ok(l)) => l,
            };
            self.line_no += 1;
            match self.parse_line(&line) {
                Ok(None) => continue,
                Ok(Some(ev)) => return Some(Ok(ev)),
                Err(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
            }
        }
    }
}

/// Parse a whole instance. Depths given in the file must agree with the arcs;
/// missing depths are computed.
pub fn read_instance<R: BufRead>(reader: R) -> Result<Instance> {
    let mut inst = Instance::default();
    for ev in EventReader::new(reader) {
        match ev? {
            StreamEvent::Job(j) => inst.jobs.push(j),
            StreamEvent::Arc { src, dst } => inst.arcs.push((src, dst)),
        }
    }
    let depths = inst.depths()?;
    for (j, d) in inst.jobs.iter_mut().zip(depths) {
        match j.depth {
            Some(given) if given != d => {
                return Err(Error::contract(format!("job {} has depth {given}, arcs give {d}", j.id)))
            }
            _ => j.depth = Some(d),
        }
    }
    Ok(inst)
}

pub fn read_instance_file(path: &Path) -> Result<Instance> {
    let f = fs::File::open(path).map_err(|e| Error::contract(format!("{}: {e}", path.display())))?;
    let mut inst = read_instance(BufReader::new(f))?;
    if let Some(meta) = read_meta(path)? {
        inst.meta = meta;
    }
    Ok(inst)
}

/// Write jobs (with depths when every job has one) and arcs.
pub fn write_instance<W: Write>(inst: &Instance, mut w: W) -> io::Result<()> {
    writeln!(w, "{HEADER}")?;
    let all_depths = inst.jobs.iter().all(|j| j.depth.is_some());
    for j in &inst.jobs {
        match j.depth {
            Some(d) if all_depths => writeln!(w, "J {} {} {d}", j.id, j.p)?,
            _ => writeln!(w, "J {} {}", j.id, j.p)?,
        }
    }
    for (s, d) in &inst.arcs {
        writeln!(w, "A {s} {d}")?;
    }
    w.flush()
}

pub fn instance_to_string(inst: &Instance) -> String {
    let mut buf = Vec::new();
    write_instance(inst, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii")
}

/// Sidecar path: `inst.txt` -> `inst.txt.meta.json`.
pub fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub fn write_meta(path: &Path, meta: &InstanceMeta) -> io::Result<()> {
    let js = serde_json::to_string_pretty(meta).expect("meta is serializable");
    fs::write(meta_path(path), js + "\n")
}

pub fn read_meta(path: &Path) -> Result<Option<InstanceMeta>> {
    let p = meta_path(path);
    match fs::read_to_string(&p) {
        Ok(s) => serde_json::from_str(&s)
            .map(Some)
            .map_err(|e| Error::contract(format!("{}: {e}", p.display()))),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(Error::contract(format!("{}: {e}", p.display()))),
    }
}
