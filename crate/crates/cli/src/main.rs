use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use schedsketch::format::{self, EventReader};
use schedsketch::generate::FAMILIES;
use schedsketch::streaming::StreamRunner;
use schedsketch::{
    default_order, exact_makespan, list_schedule, lower_bound, run_sampling, sketch_to_schedule, validate_schedule,
    AlgoParams, Algorithm, Error, GenSpec, Instance, Job, RunReport, ScheduleSketch, StreamEvent,
};

#[derive(Parser)]
#[command(name = "schedsketch", version, about = "Sketch-based makespan approximation for precedence-constrained jobs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// One pass, c and h known, depths on the job lines
    Stream1(RunArgs),
    /// One pass, nothing known, depths derived from the arcs
    Stream2(RunArgs),
    /// One pass, α-constrained, c, h and n known, depths on the job lines
    Stream3(RunArgs),
    /// One pass, α-constrained, only n known, depths derived from the arcs
    Stream4(RunArgs),
    /// Sampling, 1 <= p <= c
    Sample1(RunArgs),
    /// Sampling, α-constrained
    Sample2(RunArgs),
    /// Second pass: build a schedule from a result file's sketch and validate it
    Schedule(ScheduleArgs),
    /// Exact optimum (small instances) or list-scheduling makespan
    Oracle(OracleArgs),
    /// Write a generated instance
    Gen(GenArgs),
    /// Run seeded trials and write one CSV row per trial
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct Common {
    /// Instance file, `-` for stdin, or a generator spec such as chain:m=200,q=5,h=3
    #[arg(long = "in", value_name = "FILE|SPEC")]
    input: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutFormat>,
}

#[derive(Args, Clone)]
struct Params {
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    m: u64,
    #[arg(long)]
    c: Option<u64>,
    #[arg(long)]
    h: Option<u32>,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Multiplies the sampling schemes' sample sizes
    #[arg(long, default_value_t = 1.0)]
    confidence_scale: f64,
}

impl Params {
    fn algo(&self) -> AlgoParams {
        AlgoParams {
            epsilon: self.epsilon,
            m: self.m,
            c: self.c,
            h: self.h,
            alpha: self.alpha,
            n: self.n,
            seed: self.seed,
            confidence_scale: self.confidence_scale,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    params: Params,
    /// Sampling only: run this many trials with seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    trials: u64,
}

#[derive(Args)]
struct ScheduleArgs {
    #[command(flatten)]
    common: Common,
    /// Result file (or {"t": [...]}) holding the schedule sketch
    #[arg(long)]
    sks: PathBuf,
    #[arg(long)]
    m: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleKind {
    Exact,
    List,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(value_enum)]
    kind: OracleKind,
    #[arg(long = "in", value_name = "FILE|SPEC")]
    input: String,
    #[arg(long)]
    m: u64,
}

#[derive(Args)]
struct GenArgs {
    /// Full generator spec; alternative to --family plus parameters
    #[arg(long, conflicts_with = "family")]
    spec: Option<String>,
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(FAMILIES))]
    family: Option<String>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    c: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    big: Option<String>,
    #[arg(long)]
    small: Option<String>,
    #[arg(long)]
    density: Option<String>,
    /// Layer sizes for the layered family, e.g. 3/4/2
    #[arg(long)]
    sizes: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// stream1..stream4, sample1, sample2
    #[arg(long)]
    alg: String,
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    params: Params,
    #[arg(long, default_value_t = 10)]
    trials: u64,
}

/// Failure with the exit status it maps to.
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter(_) | Error::OracleGuard { .. } => 2,
            Error::SketchInfeasible { .. } => 4,
            _ => 3,
        };
        Failure { code, msg: e.to_string() }
    }
}

fn arg_error(msg: impl Into<String>) -> Failure {
    Failure { code: 2, msg: msg.into() }
}

fn io_error(what: &Path, e: io::Error) -> Failure {
    Failure { code: 2, msg: format!("{}: {e}", what.display()) }
}

type CliResult<T = ()> = Result<T, Failure>;

enum Input {
    Stdin,
    File(PathBuf),
    Gen(GenSpec),
}

impl Input {
    fn parse(s: &str) -> CliResult<Self> {
        if s == "-" {
            return Ok(Input::Stdin);
        }
        let family = s.split(':').next().unwrap_or_default();
        if FAMILIES.contains(&family) && !Path::new(s).exists() {
            return Ok(Input::Gen(s.parse()?));
        }
        Ok(Input::File(PathBuf::from(s)))
    }

    fn reader(&self) -> CliResult<Box<dyn BufRead>> {
        match self {
            Input::Stdin => Ok(Box::new(BufReader::new(io::stdin()))),
            Input::File(p) => Ok(Box::new(BufReader::new(File::open(p).map_err(|e| io_error(p, e))?))),
            Input::Gen(_) => unreachable!("generated inputs have no reader"),
        }
    }

    fn instance(&self) -> CliResult<Instance> {
        match self {
            Input::Gen(spec) => Ok(spec.instance()?),
            Input::File(p) => {
                let mut inst = format::read_instance(self.reader()?)?;
                if let Some(meta) = format::read_meta(p)? {
                    inst.meta = meta;
                }
                Ok(inst)
            }
            Input::Stdin => Ok(format::read_instance(self.reader()?)?),
        }
    }
}

fn output(out: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    match out {
        Some(p) => Ok(Box::new(BufWriter::new(File::create(p).map_err(|e| io_error(p, e))?))),
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
    }
}

fn write_failed(e: io::Error) -> Failure {
    Failure { code: 1, msg: format!("write failed: {e}") }
}

/// Stream events in file order, shaping them for the mode: known-depth
/// modes get jobs only, derived-depth modes get jobs without depths.
fn run_streaming(alg: Algorithm, input: &Input, params: &AlgoParams) -> CliResult<RunReport> {
    let mut params = params.clone();
    let mut runner;
    let feed = |runner: &mut StreamRunner, ev: StreamEvent| -> CliResult {
        match ev {
            StreamEvent::Arc { .. } if alg.depths_given() => Ok(()),
            StreamEvent::Job(j) if !alg.depths_given() => Ok(runner.push(StreamEvent::Job(Job::new(j.id, j.p)))?),
            ev => Ok(runner.push(ev)?),
        }
    };
    match input {
        Input::Gen(spec) => {
            if params.n.is_none() {
                params.n = Some(spec.n());
            }
            runner = StreamRunner::new(alg, &params)?;
            let inst = spec.instance()?;
            for ev in inst.events() {
                feed(&mut runner, ev)?;
            }
        }
        _ => {
            runner = StreamRunner::new(alg, &params)?;
            for ev in EventReader::new(input.reader()?) {
                feed(&mut runner, ev?)?;
            }
        }
    }
    Ok(runner.finish()?)
}

fn run_sampling_input(alg: Algorithm, input: &Input, params: &AlgoParams) -> CliResult<RunReport> {
    if let Input::Gen(spec) = input {
        if let Some(src) = spec.source() {
            return Ok(run_sampling(alg, &src, params)?);
        }
    }
    let inst = input.instance()?;
    Ok(run_sampling(alg, &inst, params)?)
}

const SUMMARY_HEADER: [&str; 9] =
    ["algorithm", "seed", "A", "sks", "sketch_nodes", "samples", "update_count", "guarantee_condition_met", "h"];

fn summary_row(r: &RunReport) -> Vec<String> {
    let sks: Vec<String> = r.sks.iter().map(u64::to_string).collect();
    vec![
        r.algorithm.to_string(),
        r.seed.map(|s| s.to_string()).unwrap_or_default(),
        r.approx.to_string(),
        sks.join(" "),
        r.sketch_nodes.to_string(),
        r.samples.to_string(),
        r.update_count.to_string(),
        r.guarantee_condition_met.to_string(),
        r.sks.len().to_string(),
    ]
}

fn write_reports(reports: &[RunReport], common: &Common) -> CliResult {
    let mut w = output(&common.out)?;
    match common.format.unwrap_or(OutFormat::Json) {
        OutFormat::Json => {
            let text = if reports.len() == 1 {
                reports[0].to_json()
            } else {
                serde_json::to_string_pretty(reports).expect("serializable")
            };
            writeln!(w, "{text}").map_err(write_failed)?;
        }
        OutFormat::Csv => {
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record(SUMMARY_HEADER).map_err(|e| write_failed(e.into()))?;
            for r in reports {
                csv.write_record(summary_row(r)).map_err(|e| write_failed(e.into()))?;
            }
            csv.flush().map_err(write_failed)?;
            return Ok(());
        }
    }
    w.flush().map_err(write_failed)
}

fn cmd_run(alg: Algorithm, args: &RunArgs) -> CliResult {
    let input = Input::parse(&args.common.input)?;
    let params = args.params.algo();
    let reports = if alg.is_sampling() {
        if args.trials == 0 {
            return Err(arg_error("--trials must be at least 1"));
        }
        let seeds: Vec<u64> = (0..args.trials).map(|t| params.seed.wrapping_add(t)).collect();
        seeds
            .par_iter()
            .map(|&s| run_sampling_input(alg, &input, &params.clone().with_seed(s)))
            .collect::<CliResult<Vec<_>>>()?
    } else {
        if args.trials != 1 {
            return Err(arg_error("--trials applies to sample1 and sample2 only"));
        }
        vec![run_streaming(alg, &input, &params)?]
    };
    write_reports(&reports, &args.common)
}

fn cmd_schedule(args: &ScheduleArgs) -> CliResult {
    let text = std::fs::read_to_string(&args.sks).map_err(|e| io_error(&args.sks, e))?;
    let sks = ScheduleSketch::from_json(&text)?;
    let persisted: Option<Vec<u32>> = serde_json::from_str::<serde_json::Value>(&text)
        .ok()
        .and_then(|v| v.get("depths").cloned())
        .and_then(|d| serde_json::from_value(d).ok());
    let input = Input::parse(&args.common.input)?;
    let inst = input.instance()?;
    if let Some(d) = &persisted {
        if d.len() != inst.n() {
            return Err(Failure {
                code: 3,
                msg: format!("result file has depths for {} jobs, instance has {}", d.len(), inst.n()),
            });
        }
    }
    let jobs = inst.jobs.iter().map(|j| {
        let d = persisted.as_ref().map(|d| d[j.id as usize - 1]).or(j.depth).expect("depths filled on read");
        Job::with_depth(j.id, j.p, d)
    });
    let sched = sketch_to_schedule(&sks, jobs, args.m)?;
    let violations = validate_schedule(&sched, &inst, args.m);

    let mut w = output(&args.common.out)?;
    match args.common.format.unwrap_or(OutFormat::Csv) {
        OutFormat::Csv => {
            let mut csv = csv::Writer::from_writer(w);
            for a in &sched.assignments {
                csv.serialize(a).map_err(|e| write_failed(e.into()))?;
            }
            csv.flush().map_err(write_failed)?;
        }
        OutFormat::Json => {
            writeln!(w, "{}", serde_json::to_string_pretty(&sched).expect("serializable")).map_err(write_failed)?;
            w.flush().map_err(write_failed)?;
        }
    }
    eprintln!("makespan {} (t_h = {})", sched.makespan(), sks.makespan_bound());
    eprintln!("violations: {}", serde_json::to_string(&violations).expect("serializable"));
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure { code: 3, msg: format!("{} violation(s)", violations.len()) })
    }
}

fn cmd_oracle(args: &OracleArgs) -> CliResult {
    let inst = Input::parse(&args.input)?.instance()?;
    let makespan = match args.kind {
        OracleKind::Exact => exact_makespan(&inst, args.m)?,
        OracleKind::List => list_schedule(&inst, args.m, &default_order(&inst))?.makespan(),
    };
    println!("{makespan}");
    Ok(())
}

fn cmd_gen(args: &GenArgs) -> CliResult {
    let spec: GenSpec = match (&args.spec, &args.family) {
        (Some(s), _) => s.parse()?,
        (None, Some(family)) => {
            let fields = [
                ("m", &args.m),
                ("q", &args.q),
                ("h", &args.h),
                ("n", &args.n),
                ("c", &args.c),
                ("alpha", &args.alpha),
                ("big", &args.big),
                ("small", &args.small),
                ("density", &args.density),
                ("sizes", &args.sizes),
                ("seed", &args.seed),
            ];
            let pairs = fields
                .into_iter()
                .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
                .collect();
            GenSpec::from_pairs(family, &pairs)?
        }
        (None, None) => return Err(arg_error("gen needs --family or --spec")),
    };
    let inst = spec.instance()?;
    let mut w = output(&args.out)?;
    format::write_instance(&inst, &mut w).map_err(write_failed)?;
    if let Some(p) = &args.out {
        format::write_meta(p, &inst.meta).map_err(|e| io_error(p, e))?;
    }
    Ok(())
}

/// `C*` when the family fixes it or the exact search can afford it, else the lower bound.
fn reference_makespan(inst: &Instance, m: u64) -> CliResult<(u64, &'static str)> {
    if let (Some(c_star), Some(gm)) = (inst.meta.c_star, inst.meta.m) {
        if gm == m {
            return Ok((c_star, "optimum"));
        }
    }
    match exact_makespan(inst, m) {
        Ok(v) => Ok((v, "optimum")),
        Err(Error::OracleGuard { .. }) => Ok((lower_bound(inst, m)?, "lower_bound")),
        Err(e) => Err(e.into()),
    }
}

fn cmd_bench(args: &BenchArgs) -> CliResult {
    let alg = Algorithm::from_name(&args.alg).ok_or_else(|| arg_error(format!("unknown algorithm {:?}", args.alg)))?;
    if args.trials == 0 {
        return Err(arg_error("--trials must be at least 1"));
    }
    let input = Input::parse(&args.common.input)?;
    let base = args.params.algo();
    let rows = (0..args.trials)
        .into_par_iter()
        .map(|t| {
            let seed = base.seed.wrapping_add(t);
            // vary the instance with the trial when the generator takes a seed
            let input = match &input {
                Input::Gen(spec) => Input::Gen(reseed(spec, seed)),
                Input::File(p) => Input::File(p.clone()),
                Input::Stdin => return Err(arg_error("bench cannot read stdin")),
            };
            let inst = input.instance()?;
            let params = base.clone().with_seed(seed);
            let report = if alg.is_sampling() {
                run_sampling_input(alg, &input, &params)?
            } else {
                run_streaming(alg, &input, &params)?
            };
            let (reference, kind) = reference_makespan(&inst, base.m)?;
            Ok((seed, report, reference, kind))
        })
        .collect::<CliResult<Vec<_>>>()?;

    let w = output(&args.common.out)?;
    let mut csv = csv::Writer::from_writer(w);
    let err = |e: csv::Error| write_failed(e.into());
    csv.write_record(["seed", "A", "C*_or_bound", "reference", "ratio", "samples", "sketch_nodes"]).map_err(err)?;
    for (seed, r, reference, kind) in rows {
        csv.write_record([
            seed.to_string(),
            r.approx.to_string(),
            reference.to_string(),
            kind.to_string(),
            format!("{:.6}", r.approx as f64 / reference as f64),
            r.samples.to_string(),
            r.sketch_nodes.to_string(),
        ])
        .map_err(err)?;
    }
    csv.flush().map_err(write_failed)
}

fn reseed(spec: &GenSpec, seed: u64) -> GenSpec {
    let mut s = spec.clone();
    match &mut s {
        GenSpec::Chain { .. } => {}
        GenSpec::Uniform { seed: x, .. }
        | GenSpec::Layered { seed: x, .. }
        | GenSpec::AlphaMixed { seed: x, .. }
        | GenSpec::RandomDag { seed: x, .. } => *x = x.wrapping_add(seed),
    }
    s
}

fn run(cli: Cli) -> CliResult {
    match &cli.cmd {
        Cmd::Stream1(a) => cmd_run(Algorithm::StreamKnown, a),
        Cmd::Stream2(a) => cmd_run(Algorithm::StreamUnknown, a),
        Cmd::Stream3(a) => cmd_run(Algorithm::StreamAlphaKnown, a),
        Cmd::Stream4(a) => cmd_run(Algorithm::StreamAlphaUnknown, a),
        Cmd::Sample1(a) => cmd_run(Algorithm::SampleBounded, a),
        Cmd::Sample2(a) => cmd_run(Algorithm::SampleAlpha, a),
        Cmd::Schedule(a) => cmd_schedule(a),
        Cmd::Oracle(a) => cmd_oracle(a),
        Cmd::Gen(a) => cmd_gen(a),
        Cmd::Bench(a) => cmd_bench(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = std::env::var("SCHEDSKETCH_THREADS").ok().and_then(|v| v.parse().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
