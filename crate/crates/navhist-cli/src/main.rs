//! Command-line front end: simulate, sample, sweep, metrics, posenc and
//! eqa-pack subcommands over the navhist library.
//!
//! Exit codes: 0 success, 1 runtime error, 2 usage error. Machine-readable
//! output (JSON or CSV) goes to stdout; status notes go to stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use navhist::eqa::{
    build_prompt, default_exemplars, generator_from_env, select_context, EqaPair, Exemplar,
};
use navhist::io::{load_episodes, load_trajectory, save_episodes, save_sampled, save_trajectory};
use navhist::metrics::{pct_rooms, sel, success_rate};
use navhist::posenc::{encode_2d, PosEncConfig};
use navhist::sampler::{redundancy_stats, sample_history};
use navhist::sim::{generate_house, run_policy, FeatureSynthConfig, GridPos, Policy};
use navhist::types::SamplerConfig;

#[derive(Parser)]
#[command(
    name = "navhist",
    version,
    about = "Observation-history sampling toolkit for embodied navigation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic trajectory and episode summary in a seeded house.
    Simulate(SimulateArgs),
    /// Sample a trajectory into a fixed-length history and print stats.
    Sample(SampleArgs),
    /// Run a (W, epsilon, tau) grid over trajectories and emit CSV rows.
    Sweep(SweepArgs),
    /// Compute SR, SEL and %Rooms over an episode-summary file.
    Metrics(MetricsArgs),
    /// Print the sinusoidal 2D positional encoding of a point.
    Posenc(PosencArgs),
    /// Build an EQA context from a trajectory and persist the generated pair.
    EqaPack(EqaPackArgs),
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum PolicyArg {
    RevisitLoop,
    RandomWalk,
    ShortestPath,
}

impl From<PolicyArg> for Policy {
    fn from(p: PolicyArg) -> Policy {
        match p {
            PolicyArg::RevisitLoop => Policy::RevisitLoop,
            PolicyArg::RandomWalk => Policy::RandomWalk,
            PolicyArg::ShortestPath => Policy::ShortestPath,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Seed for house layout, features and policy randomness.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of rooms.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    rooms: u32,
    /// House extent in meters per side.
    #[arg(long, default_value_t = 8.0)]
    extent: f64,
    #[arg(long, value_enum)]
    policy: PolicyArg,
    /// Rollout length (observations for revisit_loop, moves for random_walk;
    /// ignored by shortest_path).
    #[arg(long, default_value_t = 40, value_parser = clap::value_parser!(u64).range(1..))]
    steps: u64,
    /// Trajectory output path (JSON lines).
    #[arg(long)]
    out: PathBuf,
    /// Episode summary output path; defaults next to --out.
    #[arg(long)]
    episode_out: Option<PathBuf>,
    /// Optional house map output path (JSON).
    #[arg(long)]
    house_out: Option<PathBuf>,
    /// Instruction stored in the trajectory header for downstream eqa-pack.
    #[arg(long)]
    instruction: Option<String>,
    /// Start cell as "row,col"; defaults to the first free cell.
    #[arg(long)]
    start: Option<String>,
    /// Goal cell as "row,col"; defaults to the farthest free cell.
    #[arg(long)]
    goal: Option<String>,
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(1..))]
    feat_dim: u64,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    n_basis: u64,
    #[arg(long, default_value_t = 1.0)]
    length_scale: f64,
    #[arg(long, default_value_t = 45.0)]
    heading_scale: f64,
}

#[derive(Args)]
struct SampleArgs {
    /// Input trajectory (JSON lines).
    #[arg(long = "in")]
    input: PathBuf,
    /// Sampled-history output path (JSON).
    #[arg(long)]
    out: PathBuf,
    /// Window size W.
    #[arg(long, default_value_t = 60, value_parser = clap::value_parser!(u64).range(1..))]
    w: u64,
    /// Relative position threshold in meters.
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    epsilon: f64,
    /// Semantic similarity threshold.
    #[arg(long, default_value_t = 0.95, allow_negative_numbers = true)]
    tau: f64,
    /// Compare raw flattened token matrices instead of pooled vectors.
    #[arg(long)]
    raw_compare: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Window sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    w: Vec<u64>,
    /// Epsilon values, comma separated.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    epsilon: Vec<f64>,
    /// Tau values, comma separated.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    tau: Vec<f64>,
    /// Input trajectories.
    #[arg(long = "in", required = true, num_args = 1..)]
    inputs: Vec<PathBuf>,
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MetricsArgs {
    /// Episode-summary file (JSON lines).
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Args)]
struct PosencArgs {
    #[arg(long, allow_negative_numbers = true)]
    x: f64,
    #[arg(long, allow_negative_numbers = true)]
    y: f64,
    /// Encoding length c (a positive multiple of 4).
    #[arg(long)]
    c: u64,
    #[arg(long, default_value_t = 10000.0)]
    base: f64,
}

#[derive(Args)]
struct EqaPackArgs {
    /// Input trajectory (JSON lines).
    #[arg(long = "in")]
    input: PathBuf,
    /// Context window: the final W frames are selected.
    #[arg(long, default_value_t = 60, value_parser = clap::value_parser!(u64).range(1..))]
    w: u64,
    /// Output file for the persisted EQA pair (JSON lines).
    #[arg(long)]
    out: PathBuf,
    /// Instruction; defaults to the trajectory's "instruction" meta entry.
    #[arg(long)]
    instruction: Option<String>,
    /// JSON file with exactly two exemplars to replace the placeholders.
    #[arg(long)]
    exemplars: Option<PathBuf>,
}

/// Usage errors exit 2, runtime errors exit 1.
enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<navhist::Error> for CliError {
    fn from(e: navhist::Error) -> Self {
        CliError::Runtime(anyhow::Error::new(e))
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Sample(args) => cmd_sample(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Metrics(args) => cmd_metrics(args),
        Command::Posenc(args) => cmd_posenc(args),
        Command::EqaPack(args) => cmd_eqa_pack(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn parse_cell(text: &str) -> Result<GridPos, CliError> {
    let (row, col) = text
        .split_once(',')
        .ok_or_else(|| usage(format!("cell {text:?} must be \"row,col\"")))?;
    let row = row.trim().parse().map_err(|_| usage(format!("bad row in {text:?}")))?;
    let col = col.trim().parse().map_err(|_| usage(format!("bad col in {text:?}")))?;
    Ok(GridPos::new(row, col))
}

fn default_episode_path(out: &Path) -> PathBuf {
    let mut name = out.file_stem().unwrap_or_default().to_os_string();
    name.push(".episode.jsonl");
    out.with_file_name(name)
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let house = generate_house(args.seed, args.rooms as usize, args.extent)
        .map_err(|e| usage(e.to_string()))?;
    let fcfg = FeatureSynthConfig {
        feat_dim: args.feat_dim as usize,
        n_basis: args.n_basis as usize,
        length_scale_m: args.length_scale,
        heading_scale_deg: args.heading_scale,
        seed: args.seed,
    };
    fcfg.validate().map_err(|e| usage(e.to_string()))?;

    let start = match &args.start {
        Some(text) => parse_cell(text)?,
        None => house.first_free(),
    };
    let goal = args.goal.as_deref().map(parse_cell).transpose()?;

    let run = run_policy(&house, args.policy.into(), start, goal, args.steps as usize, &fcfg)?;
    let mut trajectory = run.trajectory;
    if let Some(instruction) = &args.instruction {
        trajectory = trajectory.with_meta_entry("instruction", instruction);
    }

    save_trajectory(&trajectory, &args.out)?;
    let episode_path = args.episode_out.unwrap_or_else(|| default_episode_path(&args.out));
    save_episodes(std::slice::from_ref(&run.episode), &episode_path)?;
    if let Some(house_path) = &args.house_out {
        let json = serde_json::to_string(&house).context("serialize house")?;
        fs::write(house_path, json).with_context(|| format!("write {}", house_path.display()))?;
    }
    eprintln!(
        "wrote {} ({} observations) and {}",
        args.out.display(),
        trajectory.len(),
        episode_path.display()
    );
    Ok(())
}

fn sampler_config(w: u64, epsilon: f64, tau: f64, raw_compare: bool) -> Result<SamplerConfig, CliError> {
    let cfg = SamplerConfig {
        window_w: w as usize,
        epsilon_m: epsilon,
        tau,
        pool_before_compare: !raw_compare,
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

fn cmd_sample(args: SampleArgs) -> Result<(), CliError> {
    let cfg = sampler_config(args.w, args.epsilon, args.tau, args.raw_compare)?;
    let traj = load_trajectory(&args.input)?;
    if traj.is_empty() {
        return Err(CliError::Runtime(anyhow!(
            "{} holds no observations",
            args.input.display()
        )));
    }
    let history = sample_history(&traj, &cfg)?;
    save_sampled(&history, &args.out)?;
    let stats = redundancy_stats(&traj, &history)?;
    println!("{}", serde_json::to_string(&stats).context("serialize stats")?);
    Ok(())
}

#[derive(Serialize)]
struct SweepRow {
    trajectory: String,
    w: u64,
    epsilon: f64,
    tau: f64,
    n_total: usize,
    n_selected: usize,
    n_padded: usize,
    retained_fraction: f64,
    min_pairwise_dist_m: f64,
    mean_pairwise_cos: f64,
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    // Validate the whole grid before doing any work.
    for &w in &args.w {
        for &epsilon in &args.epsilon {
            for &tau in &args.tau {
                sampler_config(w, epsilon, tau, false)?;
            }
        }
    }
    let trajectories = args
        .inputs
        .iter()
        .map(|path| Ok((path, load_trajectory(path)?)))
        .collect::<Result<Vec<_>, navhist::Error>>()
        .map_err(CliError::from)?;

    let mut wtr = csv::Writer::from_writer(Vec::new());
    for &w in &args.w {
        for &epsilon in &args.epsilon {
            for &tau in &args.tau {
                for (path, traj) in &trajectories {
                    let cfg = sampler_config(w, epsilon, tau, false)?;
                    let row = (|| -> navhist::Result<SweepRow> {
                        let history = sample_history(traj, &cfg)?;
                        let stats = redundancy_stats(traj, &history)?;
                        Ok(SweepRow {
                            trajectory: path.to_string_lossy().into_owned(),
                            w,
                            epsilon,
                            tau,
                            n_total: stats.n_total,
                            n_selected: stats.n_selected,
                            n_padded: stats.n_padded,
                            retained_fraction: stats.retained_fraction,
                            min_pairwise_dist_m: stats.min_pairwise_dist_m,
                            mean_pairwise_cos: stats.mean_pairwise_cos,
                        })
                    })()
                    .map_err(|e| {
                        CliError::Runtime(anyhow!(
                            "sweep failed at (w={w}, epsilon={epsilon}, tau={tau}, trajectory={}): {e}",
                            path.display()
                        ))
                    })?;
                    wtr.serialize(row).context("write csv row")?;
                }
            }
        }
    }
    let csv_bytes = wtr.into_inner().map_err(|e| CliError::Runtime(anyhow!("flush csv: {e}")))?;
    match &args.out {
        Some(path) => fs::write(path, csv_bytes).with_context(|| format!("write {}", path.display()))?,
        None => print!("{}", String::from_utf8(csv_bytes).context("csv is utf-8")?),
    }
    Ok(())
}

fn cmd_metrics(args: MetricsArgs) -> Result<(), CliError> {
    let episodes = load_episodes(&args.input)?;
    let out = serde_json::json!({
        "sr": success_rate(&episodes)?,
        "sel": sel(&episodes)?,
        "pct_rooms": pct_rooms(&episodes)?,
    });
    println!("{out}");
    Ok(())
}

fn cmd_posenc(args: PosencArgs) -> Result<(), CliError> {
    let cfg = PosEncConfig::new(args.c as usize, args.base).map_err(|e| usage(e.to_string()))?;
    let encoding = encode_2d(args.x, args.y, &cfg);
    println!("{}", serde_json::to_string(&encoding).context("serialize encoding")?);
    Ok(())
}

fn load_exemplars(path: &Path) -> Result<[Exemplar; 2], CliError> {
    let data = fs::read_to_string(path)
        .with_context(|| format!("read {}", path.display()))
        .map_err(CliError::Runtime)?;
    let list: Vec<Exemplar> = serde_json::from_str(&data)
        .with_context(|| format!("parse {}", path.display()))
        .map_err(CliError::Runtime)?;
    list.try_into()
        .map_err(|list: Vec<Exemplar>| usage(format!("expected exactly 2 exemplars, got {}", list.len())))
}

fn cmd_eqa_pack(args: EqaPackArgs) -> Result<(), CliError> {
    let traj = load_trajectory(&args.input)?;
    let instruction = match &args.instruction {
        Some(text) => text.clone(),
        None => traj
            .meta()
            .get("instruction")
            .cloned()
            .ok_or_else(|| usage("no --instruction flag and no \"instruction\" meta entry"))?,
    };
    let exemplars = match &args.exemplars {
        Some(path) => load_exemplars(path)?,
        None => default_exemplars(),
    };
    let frames = select_context(&traj, args.w as usize)?;
    let prompt = build_prompt(&instruction, &frames, &exemplars)?;
    let generator = generator_from_env()?;
    let response = generator.generate_with_meta(&prompt, traj.meta())?;
    let pair = EqaPair::new(&prompt, response);

    let mut line = serde_json::to_string(&pair).context("serialize pair")?;
    println!("{line}");
    line.push('\n');
    fs::write(&args.out, line).with_context(|| format!("write {}", args.out.display()))?;
    eprintln!("packed {} frames for {:?}", pair.frame_refs.len(), pair.instruction);
    Ok(())
}
