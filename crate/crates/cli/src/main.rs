//! Batch front end over the gyrodial library: synthesize traces, train
//! profiles, detect unlock events, segment and invert them, rank candidate
//! keys, run Monte Carlo evaluations, and compare result sets.
//!
//! Data goes to stdout or to `--out` files; progress and warnings go to
//! stderr. Every command that draws randomness takes an explicit `--seed`.

use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use gyrodial::attack::{default_min_spins, AttackProfile, KeySpace, PhaseModels, Strategy};
use gyrodial::error::{Error, Result};
use gyrodial::eval::{monte_carlo_topr, paired_t_test};
use gyrodial::io as gio;
use gyrodial::lock::{implemented_key_set, CombinationKey, KeySet, LockSpec};
use gyrodial::pipeline::{attack_trace, rank_trace};
use gyrodial::recognition::detect_unlock_events;
use gyrodial::regression::{averaged_sigma, fit_linear_models};
use gyrodial::segmentation::segment_phases_traced;
use gyrodial::synth::{synthesize_day_trace, synthesize_unlock_trace, SynthConfig};

#[derive(Parser)]
#[command(
    name = "gyrodial",
    version,
    about = "Combination-lock key recovery from wrist gyroscope traces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic unlock trace or a day-long labeled stream.
    Simulate(SimulateArgs),
    /// Fit per-phase linear models from a displacement-pair CSV.
    Train(TrainArgs),
    /// Detect unlock events in a trace.
    Detect(DetectArgs),
    /// Split an event trace into phases and report their features.
    Segment(SegmentArgs),
    /// Recover the dialed key of each detected event.
    Infer(InferArgs),
    /// Rank the most probable keys for the first detected event.
    Rank(RankArgs),
    /// Monte Carlo top-r success and improvement curves.
    Eval(EvalArgs),
    /// Paired two-tailed t-test between two value columns.
    Ttest(TtestArgs),
}

#[derive(Args)]
struct LockArg {
    /// Lock: `padlock`, `safe`, or a lock-description JSON path.
    #[arg(long, default_value = "padlock")]
    lock: String,
    /// Attack profile JSON; defaults to the built-in reference profile of
    /// the selected lock.
    #[arg(long)]
    profile: Option<PathBuf>,
}

impl LockArg {
    fn spec(&self) -> Result<LockSpec> {
        match self.lock.as_str() {
            "padlock" => Ok(LockSpec::padlock()),
            "safe" => Ok(LockSpec::safe()),
            path => gio::load_lock_spec(path),
        }
    }

    fn profile(&self) -> Result<AttackProfile> {
        if let Some(path) = &self.profile {
            return gio::load_profile(path);
        }
        match self.lock.as_str() {
            "padlock" => Ok(AttackProfile::padlock_reference()),
            "safe" => Ok(AttackProfile::safe_reference()),
            other => Err(Error::InvalidArgument(format!(
                "custom lock {other:?} has no built-in models; pass --profile"
            ))),
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    lock: LockArg,
    /// Key to dial for a single unlock trace, e.g. 10-30-0.
    #[arg(long, conflicts_with = "day")]
    key: Option<String>,
    /// Generate a long stream instead of a single event.
    #[arg(long, requires = "duration")]
    day: bool,
    /// Stream length in seconds (day mode).
    #[arg(long)]
    duration: Option<f64>,
    /// Unlock event as KEY@SECONDS; repeatable (day mode).
    #[arg(long = "event")]
    events: Vec<String>,
    /// Number of non-unlock rotary bursts to scatter in (day mode).
    #[arg(long, default_value_t = 0)]
    confusers: usize,
    /// Make confuser bursts long enough to pass the event threshold.
    #[arg(long)]
    hard_confusers: bool,
    /// Trace CSV destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Interval-label CSV destination.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Generator ground-truth JSON destination (single-event mode).
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Per-phase transition noise in dial units, comma separated.
    #[arg(long)]
    noise: Option<String>,
    /// Sample rate in Hz.
    #[arg(long, default_value_t = 200.0)]
    rate: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    lock: LockArg,
    /// Displacement training pairs CSV (phase,sign,theta,alpha).
    #[arg(long)]
    pairs: PathBuf,
    /// Profile JSON destination.
    #[arg(long)]
    out: PathBuf,
    /// Per-phase strategy overrides, comma separated (pos|neg|avg). Default
    /// picks the lowest-deviation strategy per phase.
    #[arg(long)]
    strategy: Option<String>,
    /// Dial position the first phase starts from.
    #[arg(long)]
    start: Option<u32>,
    /// Spin windows required before windows merge into an unlock event.
    #[arg(long)]
    min_spins: Option<usize>,
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    lock: LockArg,
    /// Input trace CSV.
    #[arg(long)]
    trace: PathBuf,
    /// Event CSV destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SegmentArgs {
    #[command(flatten)]
    lock: LockArg,
    /// Input trace CSV holding one unlock event.
    #[arg(long)]
    trace: PathBuf,
    /// Slice the trace to [start, end] seconds before segmenting.
    #[arg(long)]
    start: Option<f64>,
    #[arg(long)]
    end: Option<f64>,
    /// Per-phase boundary/feature CSV destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Dump of the transformed/smoothed series with peak flags.
    #[arg(long)]
    debug_out: Option<PathBuf>,
}

#[derive(Args)]
struct InferArgs {
    #[command(flatten)]
    lock: LockArg,
    /// Input trace CSV.
    #[arg(long)]
    trace: PathBuf,
    /// Emit CSV with per-phase transition estimates instead of bare keys.
    #[arg(long)]
    estimates: bool,
    /// Destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RankArgs {
    #[command(flatten)]
    lock: LockArg,
    /// Input trace CSV.
    #[arg(long)]
    trace: PathBuf,
    /// Number of candidates to emit.
    #[arg(long = "top-r", default_value_t = 10)]
    top_r: usize,
    /// Rank only the known factory key set (padlock).
    #[arg(long, conflicts_with_all = ["key_set", "grid"])]
    restricted_4k: bool,
    /// Rank only keys listed in this file.
    #[arg(long, conflicts_with = "grid")]
    key_set: Option<PathBuf>,
    /// Rank only keys whose transitions are multiples of STEP.
    #[arg(long, value_name = "STEP")]
    grid: Option<u32>,
    /// Ranked CSV destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    lock: LockArg,
    /// Candidate space: auto, full, 4k, grid, or grid:STEP. Auto uses the
    /// full space when it is enumerable and a step-5 grid otherwise.
    #[arg(long, default_value = "auto")]
    space: String,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Comma-separated list-depth cutoffs for the curve.
    #[arg(long, default_value = "1,2,5,10,20,50,100,200,500,1000")]
    r: String,
    /// Curve CSV destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TtestArgs {
    /// First samples CSV.
    a: PathBuf,
    /// Second samples CSV, matched pairwise with the first.
    b: PathBuf,
    /// Zero-based column to use from each file.
    #[arg(long, default_value_t = 0)]
    col_a: usize,
    #[arg(long, default_value_t = 0)]
    col_b: usize,
    /// Destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn out_writer(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(gio::create_file(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn parse_f64_list(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad {what} entry {s:?}")))
        })
        .collect()
}

fn parse_usize_list(text: &str, what: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidArgument(format!("bad {what} entry {s:?}")))
        })
        .collect()
}

fn run_simulate(args: SimulateArgs) -> Result<()> {
    let profile = args.lock.profile()?;
    let config = SynthConfig {
        sample_rate_hz: args.rate,
        noise_sigma: match &args.noise {
            Some(list) => parse_f64_list(list, "noise")?,
            None => Vec::new(),
        },
        seed: args.seed,
        ..SynthConfig::default()
    };
    if args.day {
        let duration = args.duration.expect("clap enforces --duration with --day");
        let mut events = Vec::new();
        for entry in &args.events {
            let (key, at) = entry.split_once('@').ok_or_else(|| {
                Error::InvalidArgument(format!("event {entry:?} is not KEY@SECONDS"))
            })?;
            let key: CombinationKey = key.parse()?;
            key.validate(&profile.spec)?;
            let at: f64 = at
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad event time in {entry:?}")))?;
            events.push((key, at));
        }
        let (trace, labels) = synthesize_day_trace(
            &events,
            args.confusers,
            args.hard_confusers,
            duration,
            &profile,
            &config,
        )?;
        gio::write_trace(out_writer(args.out.as_deref())?, &trace)?;
        if let Some(path) = &args.labels {
            gio::save_labels(path, &labels)?;
        }
        eprintln!(
            "wrote {:.0} s day trace: {} unlocks, {} confusers",
            duration,
            events.len(),
            args.confusers
        );
    } else {
        let key: CombinationKey = args
            .key
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument("pass --key or --day".into()))?
            .parse()?;
        key.validate(&profile.spec)?;
        let (trace, truth) = synthesize_unlock_trace(&key, &profile, &config)?;
        gio::write_trace(out_writer(args.out.as_deref())?, &trace)?;
        if let Some(path) = &args.labels {
            let label = gyrodial::synth::TraceLabel {
                start_t: truth.event_interval.0,
                end_t: truth.event_interval.1,
                kind: gyrodial::synth::LabelKind::Unlock,
                key: Some(key.clone()),
            };
            gio::save_labels(path, &[label])?;
        }
        if let Some(path) = &args.truth {
            gio::save_ground_truth(path, &truth)?;
        }
        eprintln!("wrote {:.2} s unlock trace for {key}", trace.duration());
    }
    Ok(())
}

fn run_train(args: TrainArgs) -> Result<()> {
    let spec = args.lock.spec()?;
    let pairs = gio::load_training_pairs(&args.pairs)?;
    let fitted = fit_linear_models(&pairs, spec.phase_count())?;
    let mut models = Vec::with_capacity(fitted.len());
    for (phase, (pos, neg)) in fitted.iter().enumerate() {
        models.push(PhaseModels {
            pos: *pos,
            neg: *neg,
            averaged_sigma: averaged_sigma(&pairs, phase, pos, neg)?,
        });
    }
    let strategy = match &args.strategy {
        Some(list) => {
            let parsed: Result<Vec<Strategy>> = list.split(',').map(|s| s.trim().parse()).collect();
            let parsed = parsed?;
            if parsed.len() != spec.phase_count() {
                return Err(Error::InvalidArgument(format!(
                    "{} strategies for a {}-phase lock",
                    parsed.len(),
                    spec.phase_count()
                )));
            }
            parsed
        }
        None => models
            .iter()
            .map(|m| {
                // Lowest deviation wins; the averaged estimator is preferred
                // on ties since it uses both displacement signs.
                let options = [
                    (m.averaged_sigma, Strategy::Averaged),
                    (m.pos.residual_sigma, Strategy::Positive),
                    (m.neg.residual_sigma, Strategy::Negative),
                ];
                options
                    .iter()
                    .min_by(|a, b| a.0.total_cmp(&b.0))
                    .map(|&(_, s)| s)
                    .expect("three options")
            })
            .collect(),
    };
    let start = args.start.unwrap_or(spec.start_default);
    let min_spins = args
        .min_spins
        .unwrap_or_else(|| default_min_spins(&spec, SynthConfig::default().spin_advance));
    let mut profile = AttackProfile::from_models(spec, start, strategy, models, min_spins)?;
    profile.start = start;
    gio::save_profile(&args.out, &profile)?;
    eprintln!(
        "trained {} phases from {} pairs -> {}",
        profile.spec.phase_count(),
        pairs.len(),
        args.out.display()
    );
    Ok(())
}

fn run_detect(args: DetectArgs) -> Result<()> {
    let profile = args.lock.profile()?;
    let trace = gio::load_trace(&args.trace)?;
    let events = detect_unlock_events(&trace, &profile.spin_profile);
    let mut w = out_writer(args.out.as_deref())?;
    writeln!(w, "{}", gio::CSV_SCHEMA_COMMENT)?;
    writeln!(w, "event_start,event_end,spin_count")?;
    for e in &events {
        writeln!(w, "{},{},{}", e.start_t, e.end_t, e.spin_count)?;
    }
    eprintln!("{} event(s) detected", events.len());
    Ok(())
}

fn run_segment(args: SegmentArgs) -> Result<()> {
    let spec = args.lock.spec()?;
    let mut trace = gio::load_trace(&args.trace)?;
    if args.start.is_some() || args.end.is_some() {
        let lo = args.start.unwrap_or(f64::NEG_INFINITY);
        let hi = args.end.unwrap_or(f64::INFINITY);
        trace = trace.slice(lo, hi);
    }
    let (segments, debug) = segment_phases_traced(&trace, &spec)?;
    let mut w = out_writer(args.out.as_deref())?;
    writeln!(w, "{}", gio::CSV_SCHEMA_COMMENT)?;
    writeln!(w, "phase,start_t,end_t,pos,neg,summed,total")?;
    let mut bounds = vec![0usize];
    bounds.extend(&segments.boundaries);
    bounds.push(trace.len() - 1);
    for (p, f) in segments.features.iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            p + 1,
            trace.t[bounds[p]],
            trace.t[bounds[p + 1]],
            f.pos,
            f.neg,
            f.summed,
            f.total
        )?;
    }
    if let Some(path) = &args.debug_out {
        gio::write_segmentation_debug(BufWriter::new(gio::create_file(path)?), &debug)?;
    }
    Ok(())
}

fn run_infer(args: InferArgs) -> Result<()> {
    let profile = args.lock.profile()?;
    let trace = gio::load_trace(&args.trace)?;
    let attacks = attack_trace(&trace, &profile)?;
    let mut w = out_writer(args.out.as_deref())?;
    if args.estimates {
        writeln!(w, "{}", gio::CSV_SCHEMA_COMMENT)?;
        let thetas: Vec<String> = (1..=profile.spec.phase_count())
            .map(|p| format!("theta_{p}"))
            .collect();
        writeln!(w, "key,{}", thetas.join(","))?;
        for a in &attacks {
            let est: Vec<String> = a.estimate.theta_bar.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{},{}", a.key, est.join(","))?;
        }
    } else {
        for a in &attacks {
            writeln!(w, "{}", a.key)?;
        }
    }
    Ok(())
}

fn run_rank(args: RankArgs) -> Result<()> {
    let profile = args.lock.profile()?;
    let trace = gio::load_trace(&args.trace)?;
    let set: Option<KeySet> = if args.restricted_4k {
        Some(implemented_key_set(&profile.spec)?)
    } else if let Some(path) = &args.key_set {
        Some(gio::load_key_list(path, &profile.spec)?)
    } else {
        None
    };
    let space = match (&set, args.grid) {
        (Some(s), _) => KeySpace::Set(s),
        (None, Some(step)) => KeySpace::Grid { step },
        (None, None) => KeySpace::Full,
    };
    let (ranked, attack) = rank_trace(&trace, &profile, space, args.top_r)?;
    eprintln!(
        "deterministic estimate {}; ranking {} of {} keys",
        attack.key,
        ranked.entries.len(),
        ranked.key_space_size
    );
    gio::write_ranked(out_writer(args.out.as_deref())?, &ranked)?;
    Ok(())
}

fn run_eval(args: EvalArgs) -> Result<()> {
    let profile = args.lock.profile()?;
    let spec = &profile.spec;
    let sigma: Vec<f64> = (0..spec.phase_count())
        .map(|p| profile.scoring_sigma(p))
        .collect();
    let set: Option<KeySet>;
    let space = match args.space.as_str() {
        "full" => KeySpace::Full,
        "4k" => {
            set = Some(implemented_key_set(spec)?);
            KeySpace::Set(set.as_ref().expect("just set"))
        }
        "auto" => {
            if spec.key_space_size() <= gyrodial::attack::EXHAUSTIVE_GUARD {
                KeySpace::Full
            } else {
                KeySpace::Grid { step: 5 }
            }
        }
        other => {
            let step = match other.strip_prefix("grid") {
                Some("") => 5,
                Some(rest) => rest
                    .strip_prefix(':')
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| Error::InvalidArgument(format!("bad space {other:?}")))?,
                None => {
                    return Err(Error::InvalidArgument(format!(
                        "space must be auto, full, 4k, grid, or grid:STEP, got {other:?}"
                    )))
                }
            };
            KeySpace::Grid { step }
        }
    };
    let r_list: Vec<usize> = parse_usize_list(&args.r, "r")?
        .into_iter()
        .filter(|&r| r as u64 <= space.size(spec).unwrap_or(u64::MAX))
        .collect();
    if r_list.is_empty() {
        return Err(Error::InvalidArgument("no usable r values".into()));
    }
    eprintln!(
        "evaluating {} trials over {} keys at sigma {:?}",
        args.trials,
        space.size(spec)?,
        sigma
    );
    let started = Instant::now();
    let curve = monte_carlo_topr(spec, &sigma, space, args.trials, &r_list, args.seed)?;
    eprintln!("done in {:.1} s", started.elapsed().as_secs_f64());
    gio::write_curve(out_writer(args.out.as_deref())?, &curve)?;
    Ok(())
}

fn run_ttest(args: TtestArgs) -> Result<()> {
    let take = |path: &Path, col: usize| -> Result<Vec<f64>> {
        let cols = gio::load_columns(path)?;
        cols.get(col).cloned().ok_or_else(|| {
            Error::InvalidArgument(format!(
                "{} has {} columns, wanted index {col}",
                path.display(),
                cols.len()
            ))
        })
    };
    let a = take(&args.a, args.col_a)?;
    let b = take(&args.b, args.col_b)?;
    let (t, p) = paired_t_test(&a, &b)?;
    let mut w = out_writer(args.out.as_deref())?;
    writeln!(w, "{}", gio::CSV_SCHEMA_COMMENT)?;
    writeln!(w, "t,p")?;
    writeln!(w, "{t},{p}")?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => run_simulate(args),
        Command::Train(args) => run_train(args),
        Command::Detect(args) => run_detect(args),
        Command::Segment(args) => run_segment(args),
        Command::Infer(args) => run_infer(args),
        Command::Rank(args) => run_rank(args),
        Command::Eval(args) => run_eval(args),
        Command::Ttest(args) => run_ttest(args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
