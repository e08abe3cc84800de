//! `koutcube` — sample k-out random subgraphs of the n-cube and run the
//! structural analyses as seeded, machine-readable experiments.
//!
//! Exit codes: 0 success, 2 usage error, 1 runtime refusal (budget caps,
//! I/O failures).

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use koutcube::connectivity::{
    is_connected, minimal_disconnected_sets, plant_subcube_component, subcube_component_scan,
    CutQuery, KCONN_VERTEX_LIMIT,
};
use koutcube::experiments::{
    run as run_experiment, summarize, summary_csv, threshold_sweep, trial_seed, ExperimentConfig,
    MetricSelection, TrialRecord,
};
use koutcube::hypercube::{Dimension, SubcubeSpec};
use koutcube::sampler::{sample_kout, Seed, SplitMix64, SubsetSampler};
use koutcube::walk::{exact_distribution, inequality_report, zero_hit_frequencies, WalkParams};

const THREADS_ENV: &str = "KOUTCUBE_THREADS";

#[derive(Parser)]
#[command(
    name = "koutcube",
    version,
    about = "k-out random subgraphs of the n-cube: samplers, analyses, and a Monte Carlo harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Jsonl,
    Csv,
}

#[derive(Args)]
struct TrialArgs {
    /// Cube dimension (1..=30)
    #[arg(long)]
    n: u32,
    /// Number of seeded trials
    #[arg(long, default_value_t = 1)]
    trials: u64,
    /// Master seed; every per-trial stream derives from it
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Jsonl)]
    format: Format,
    /// Worker threads (overrides KOUTCUBE_THREADS; 0 = all cores)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one k-out sample and emit its binary dump
    Sample {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Component census metrics over seeded trials
    Components {
        #[command(flatten)]
        trial: TrialArgs,
        #[arg(long)]
        k: u32,
    },
    /// Cycle and tail census of the 1-out model (k = 1)
    Cycles {
        #[command(flatten)]
        trial: TrialArgs,
    },
    /// Connectivity and exact vertex connectivity (desk-scale cap)
    Kconn {
        #[command(flatten)]
        trial: TrialArgs,
        #[arg(long)]
        k: u32,
        /// Early-exit ceiling for the flow computation (default n)
        #[arg(long)]
        ceiling: Option<u32>,
    },
    /// Minimal disconnected sets of one sample under a removal set
    CutCensus {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated vertex ids to remove (may be empty)
        #[arg(long, default_value = "")]
        remove: String,
        #[arg(long, value_enum, default_value_t = Format::Jsonl)]
        format: Format,
    },
    /// Scan samples for subcube components; optionally plant one first
    SubcubeScan {
        #[command(flatten)]
        trial: TrialArgs,
        #[arg(long)]
        k: u32,
        /// Plant a random level subcube with |free| = k in every trial
        #[arg(long)]
        plant: bool,
    },
    /// Exact distribution and tail bounds of the biased comparison walk
    Walk {
        /// Chain parameter (plain integer, not capped at 30)
        #[arg(long)]
        n: u32,
        /// Steps for the per-step distribution output (default 2n^2)
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Cross-check the DP with this many simulated runs
        #[arg(long, default_value_t = 0)]
        mc_runs: u64,
        /// Write the per-step distribution as CSV to this path
        #[arg(long)]
        dist_csv: Option<PathBuf>,
        /// jsonl: one JSON summary line; csv: per-step rows to stdout
        #[arg(long, value_enum, default_value_t = Format::Jsonl)]
        format: Format,
    },
    /// Verify the edge-isoperimetric bound (exhaustive for n <= 4)
    IsoCheck {
        #[arg(long)]
        n: u32,
        /// Random sets to draw when n > 4
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Connectivity-rate curve over a k range, with threshold labels
    Sweep {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k_min: u32,
        #[arg(long)]
        k_max: u32,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Jsonl)]
        format: Format,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Fold a JSONL record stream into the summary CSV
    Summarize {
        /// Input path; stdin when omitted
        #[arg(long)]
        input: Option<PathBuf>,
        /// Accepted for interface uniformity; summarize is a pure fold
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<koutcube::Error> for Failure {
    fn from(e: koutcube::Error) -> Self {
        match e {
            koutcube::Error::BudgetExceeded(_) => Failure::Runtime(e.to_string()),
            koutcube::Error::Io(_) | koutcube::Error::MalformedFile(_) | koutcube::Error::Parse(_) => {
                Failure::Runtime(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Sample { n, k, seed, out } => cmd_sample(n, k, seed, out),
        Command::Components { trial, k } => {
            let metrics = MetricSelection {
                components: true,
                connectivity: true,
                ..Default::default()
            };
            run_trials("components", &trial, k, metrics, None)
        }
        Command::Cycles { trial } => {
            let metrics = MetricSelection {
                cycles: true,
                components: true,
                ..Default::default()
            };
            run_trials("cycles", &trial, 1, metrics, None)
        }
        Command::Kconn { trial, k, ceiling } => cmd_kconn(trial, k, ceiling),
        Command::CutCensus {
            n,
            k,
            seed,
            remove,
            format,
        } => cmd_cut_census(n, k, seed, &remove, format),
        Command::SubcubeScan { trial, k, plant } => {
            if plant {
                cmd_subcube_plant(&trial, k)
            } else {
                let metrics = MetricSelection {
                    subcube: true,
                    connectivity: true,
                    ..Default::default()
                };
                run_trials("subcube-scan", &trial, k, metrics, None)
            }
        }
        Command::Walk {
            n,
            horizon,
            seed,
            mc_runs,
            dist_csv,
            format,
        } => cmd_walk(n, horizon, seed, mc_runs, dist_csv, format),
        Command::IsoCheck { n, samples, seed } => cmd_iso_check(n, samples, seed),
        Command::Sweep {
            n,
            k_min,
            k_max,
            trials,
            seed,
            format,
            threads,
        } => cmd_sweep(n, k_min, k_max, trials, seed, format, threads),
        Command::Summarize { input, seed: _ } => cmd_summarize(input),
    }
}

fn resolve_threads(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or(0)
}

fn cmd_sample(n: u32, k: u32, seed: u64, out: Option<PathBuf>) -> Result<(), Failure> {
    let dim = Dimension::new(n)?;
    let seed = Seed::new(seed);
    let sample = sample_kout(dim, k, seed)?;
    match out {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            sample.write_to(seed, &mut file)?;
            file.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut handle = BufWriter::new(stdout.lock());
            sample.write_to(seed, &mut handle)?;
            handle.flush()?;
        }
    }
    Ok(())
}

fn run_trials(
    name: &str,
    trial: &TrialArgs,
    k: u32,
    metrics: MetricSelection,
    kconn_ceiling: Option<u32>,
) -> Result<(), Failure> {
    let mut config = ExperimentConfig::new(
        name,
        vec![trial.n],
        vec![k],
        trial.trials,
        trial.seed,
        metrics,
    );
    config.kconn_ceiling = kconn_ceiling;
    let threads = resolve_threads(trial.threads);
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match trial.format {
        Format::Jsonl => {
            run_experiment(&config, threads, |record| {
                writeln!(out, "{}", record.to_json()).expect("stdout write");
            })?;
        }
        Format::Csv => {
            let names = metrics.metric_names();
            writeln!(out, "experiment,n,k,trial,seed,{}", names.join(","))?;
            run_experiment(&config, threads, |record| {
                let values: Vec<String> = names
                    .iter()
                    .map(|name| {
                        record
                            .metrics
                            .get(*name)
                            .map(|v| v.to_string())
                            .unwrap_or_default()
                    })
                    .collect();
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    record.experiment,
                    record.n,
                    record.k,
                    record.trial,
                    record.seed,
                    values.join(",")
                )
                .expect("stdout write");
            })?;
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_kconn(trial: TrialArgs, k: u32, ceiling: Option<u32>) -> Result<(), Failure> {
    let dim = Dimension::new(trial.n)?;
    if dim.vertex_count() > KCONN_VERTEX_LIMIT {
        return Err(Failure::Runtime(format!(
            "refused: vertex connectivity is capped at {KCONN_VERTEX_LIMIT} vertices, got 2^{}",
            trial.n
        )));
    }
    let metrics = MetricSelection {
        connectivity: true,
        kconn: true,
        ..Default::default()
    };
    run_trials("kconn", &trial, k, metrics, ceiling)
}

fn cmd_cut_census(n: u32, k: u32, seed: u64, remove: &str, format: Format) -> Result<(), Failure> {
    let dim = Dimension::new(n)?;
    let removed: Vec<u32> = remove
        .split(',')
        .filter(|part| !part.is_empty())
        .map(|part| {
            part.trim()
                .parse::<u32>()
                .map_err(|_| Failure::Usage(format!("bad vertex id in --remove: {part}")))
        })
        .collect::<Result<_, _>>()?;
    let cut = CutQuery::new(removed, dim)?;
    let sample = sample_kout(dim, k, Seed::new(seed))?;
    let census = minimal_disconnected_sets(&sample.undirected(), &cut);
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match format {
        Format::Jsonl => {
            let line = json!({
                "experiment": "cut-census",
                "n": n,
                "k": k,
                "seed": seed,
                "removed": census.removed(),
                "sizes": census.sizes(),
                "sets": census.sets(),
            });
            writeln!(out, "{line}")?;
        }
        Format::Csv => {
            writeln!(out, "set,size")?;
            for (i, set) in census.sets().iter().enumerate() {
                writeln!(out, "{i},{}", set.len())?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Random level subcube with |free| = k, derived from the trial stream.
fn random_spec(dim: Dimension, k: u32, rng: &mut SplitMix64) -> SubcubeSpec {
    let n = dim.get();
    let mut coords: Vec<u32> = (0..n).collect();
    for i in 0..n {
        let j = i + rng.next_below(n - i);
        coords.swap(i as usize, j as usize);
    }
    let free = &coords[..k as usize];
    let max_level = n - k;
    let level = if max_level > 0 {
        rng.next_below(max_level + 1) as usize
    } else {
        0
    };
    let ones = &coords[k as usize..k as usize + level];
    SubcubeSpec::from_coords(ones, free, dim).expect("coords are a partition")
}

fn cmd_subcube_plant(trial: &TrialArgs, k: u32) -> Result<(), Failure> {
    let dim = Dimension::new(trial.n)?;
    if trial.format == Format::Csv {
        println!("trial,seed,recovered,connected,hits");
    }
    for t in 0..trial.trials {
        let mut spec_rng = SplitMix64::derive(&[trial.seed, 0x5C, t]);
        let spec = random_spec(dim, k, &mut spec_rng);
        let seed = Seed::new(trial_seed(trial.seed, trial.n, k, t));
        let sample = plant_subcube_component(dim, k, &spec, seed)?;
        let found = subcube_component_scan(&sample);
        let recovered = found.contains(&spec);
        let connected = is_connected(&sample.undirected());
        match trial.format {
            Format::Jsonl => {
                let (ones, free, zeros) = spec.coordinate_lists();
                let line = json!({
                    "experiment": "subcube-scan",
                    "n": trial.n,
                    "k": k,
                    "trial": t,
                    "seed": seed.master,
                    "planted": {"ones": ones, "free": free, "zeros": zeros},
                    "hits": found.len(),
                    "recovered": recovered,
                    "connected": connected,
                });
                println!("{line}");
            }
            Format::Csv => {
                println!(
                    "{t},{},{},{},{}",
                    seed.master, recovered as u8, connected as u8, found.len()
                );
            }
        }
    }
    Ok(())
}

fn cmd_walk(
    n: u32,
    horizon: Option<usize>,
    seed: u64,
    mc_runs: u64,
    dist_csv: Option<PathBuf>,
    format: Format,
) -> Result<(), Failure> {
    let params = match horizon {
        Some(h) => WalkParams::with_horizon(n, h)?,
        None => WalkParams::new(n)?,
    };
    let dist = exact_distribution(&params)?;
    if let Some(path) = &dist_csv {
        let mut file = BufWriter::new(File::create(path)?);
        write_dist_csv(&dist, &mut file)?;
        file.flush()?;
    }
    if format == Format::Csv {
        let stdout = io::stdout();
        let mut out = BufWriter::new(stdout.lock());
        write_dist_csv(&dist, &mut out)?;
        out.flush()?;
        return Ok(());
    }
    let report = inequality_report(n)?;
    let mut summary = json!({
        "n": n,
        "horizon": params.horizon(),
        "window_lo": dist.window().0,
        "window_hi": dist.window().1,
        "window_hit_probability": report.window_hit_probability,
        "window_bound": report.window_bound,
        "window_ok": report.window_ok(),
        "early_step": report.early_step,
        "early_threshold": report.early_threshold,
        "early_probability": report.early_probability,
        "conditional_gap": report.conditional_gap,
        "conditional_worst": report.conditional_worst,
        "chernoff_bound": report.chernoff_bound,
        "all_ok": report.all_ok(),
    });
    if mc_runs > 0 {
        let ells: Vec<usize> = (1..=5).collect();
        let freqs = zero_hit_frequencies(n, &ells, mc_runs, Seed::new(seed));
        let mc: Vec<serde_json::Value> = ells
            .iter()
            .zip(&freqs)
            .map(|(&ell, &freq)| {
                json!({
                    "ell": ell,
                    "dp": dist.p_zero(2 * ell),
                    "empirical": freq,
                    "runs": mc_runs,
                })
            })
            .collect();
        summary["mc"] = json!(mc);
    }
    println!("{summary}");
    Ok(())
}

fn write_dist_csv<W: Write>(
    dist: &koutcube::walk::WalkDistribution,
    out: &mut W,
) -> Result<(), Failure> {
    writeln!(out, "step,state,mass")?;
    for (step, masses) in dist.steps().iter().enumerate() {
        for (state, &mass) in masses.iter().enumerate() {
            if mass != 0.0 {
                writeln!(out, "{step},{state},{mass}")?;
            }
        }
    }
    Ok(())
}

fn cmd_iso_check(n: u32, samples: u64, seed: u64) -> Result<(), Failure> {
    use koutcube::hypercube::{boundary_edge_count, iso_lower_bound};
    let dim = Dimension::new(n)?;
    let mut violations = 0u64;
    let mut min_slack = f64::INFINITY;
    let mut sets_checked = 0u64;
    let mode = if n <= 4 { "exhaustive" } else { "sampled" };
    if n <= 4 {
        let size = dim.vertex_count();
        for mask in 1u32..(1u32 << size) {
            let a: Vec<u32> = (0..size as u32).filter(|&v| mask >> v & 1 == 1).collect();
            let d = boundary_edge_count(&a, dim) as f64;
            let bound = iso_lower_bound(dim, a.len() as u64);
            if d < bound - 1e-9 {
                violations += 1;
            }
            min_slack = min_slack.min(d - bound);
            sets_checked += 1;
        }
    } else {
        let mut rng = SplitMix64::derive(&[seed, 0x150]);
        let mut sampler = SubsetSampler::new(dim);
        for _ in 0..samples {
            let u = rng.next_f64();
            let s = ((2.0f64).powf(u * n as f64).floor() as usize).clamp(1, dim.vertex_count());
            let set = sampler.draw(s, &mut rng);
            let d = boundary_edge_count(&set, dim) as f64;
            let bound = iso_lower_bound(dim, s as u64);
            if d < bound - 1e-9 {
                violations += 1;
            }
            min_slack = min_slack.min(d - bound);
            sets_checked += 1;
        }
    }
    let line = json!({
        "experiment": "iso-check",
        "n": n,
        "mode": mode,
        "seed": seed,
        "sets_checked": sets_checked,
        "violations": violations,
        "min_slack": min_slack,
    });
    println!("{line}");
    Ok(())
}

fn cmd_sweep(
    n: u32,
    k_min: u32,
    k_max: u32,
    trials: u64,
    seed: u64,
    format: Format,
    threads: Option<usize>,
) -> Result<(), Failure> {
    let curve = threshold_sweep(n, k_min, k_max, trials, seed, resolve_threads(threads))?;
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match format {
        Format::Jsonl => {
            for point in &curve.points {
                let line = json!({
                    "experiment": "sweep",
                    "n": curve.n,
                    "k": point.k,
                    "connected": point.connected,
                    "trials": point.trials,
                    "rate": point.rate,
                    "wilson_lo": point.wilson_lo,
                    "wilson_hi": point.wilson_hi,
                    "k0": curve.k0,
                    "k1": curve.k1,
                });
                writeln!(out, "{line}")?;
            }
        }
        Format::Csv => {
            writeln!(out, "n,k,connected,trials,rate,wilson_lo,wilson_hi,k0,k1")?;
            for point in &curve.points {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    curve.n,
                    point.k,
                    point.connected,
                    point.trials,
                    point.rate,
                    point.wilson_lo,
                    point.wilson_hi,
                    curve.k0.map(|v| v.to_string()).unwrap_or_default(),
                    curve.k1.map(|v| v.to_string()).unwrap_or_default(),
                )?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_summarize(input: Option<PathBuf>) -> Result<(), Failure> {
    let mut records = Vec::new();
    let reader: Box<dyn Read> = match input {
        Some(path) => Box::new(File::open(path)?),
        None => Box::new(io::stdin()),
    };
    for line in BufReader::new(reader).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(TrialRecord::from_json(&line)?);
    }
    let rows = summarize(&records);
    print!("{}", summary_csv(&rows));
    Ok(())
}
