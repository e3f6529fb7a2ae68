//! Command-line front end for the orgscope pipeline.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use orgscope::pipeline::{run_pipeline, run_stage, Config, KMeansSpace, Stage, Workspace};
use orgscope::report::AgreementMode;
use orgscope::synth::{generate_synthetic_org, SyntheticOrgSpec};

#[derive(Debug, Parser)]
#[command(name = "orgscope", version, about = "Mine team structure from version-control history")]
struct Cli {
    /// Directory holding stage artifacts.
    #[arg(long, global = true, default_value = "orgscope-work")]
    workspace: PathBuf,
    /// YAML or JSON config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config value.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Scan repositories and fixtures into commit facts.
    Ingest,
    /// Merge author signatures into identities.
    Identities,
    /// Build activity series, language matrix and developer documents.
    Features,
    /// DTW distances, DBSCAN and a 2-D embedding of activity.
    ClusterActivity(ActivityArgs),
    /// Language-experience embedding and elbow k-means.
    ClusterExperience(ExperienceArgs),
    /// Fit the regularized topic model.
    Topics(TopicArgs),
    /// Team alignment tables, agreement metric and plots.
    Report(ReportArgs),
    /// Write a synthetic organization with planted teams.
    Synth(SynthArgs),
    /// Run every stage in order.
    Run,
}

#[derive(Debug, Args)]
struct ActivityArgs {
    /// Fixed DBSCAN radius instead of the k-distance knee.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    min_pts: Option<usize>,
    /// FastDTW search radius.
    #[arg(long)]
    radius: Option<usize>,
}

#[derive(Debug, Args)]
struct ExperienceArgs {
    #[arg(long)]
    kmax: Option<usize>,
    #[arg(long, value_parser = ["embedding", "original"])]
    space: Option<String>,
}

#[derive(Debug, Args)]
struct TopicArgs {
    #[arg(long)]
    topics: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    normalize_docs: bool,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long)]
    team_map: Option<PathBuf>,
    /// Random-baseline permutations.
    #[arg(long)]
    trials: Option<usize>,
    /// Count distinct clusters per developer's main topic instead of per topic.
    #[arg(long)]
    per_developer: bool,
    #[arg(long)]
    include_stubs: bool,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 3)]
    teams: usize,
    #[arg(long, default_value_t = 5)]
    devs: usize,
    #[arg(long, default_value_t = 120)]
    days: usize,
    /// Output directory for org.jsonl, teams.yml and config.yml.
    #[arg(long, default_value = "synth-org")]
    out: PathBuf,
}

fn load_config(cli: &Cli) -> Result<Config> {
    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn apply_overrides(config: &mut Config, command: &Command) {
    match command {
        Command::ClusterActivity(a) => {
            if a.eps.is_some() {
                config.dbscan.eps = a.eps;
            }
            if let Some(m) = a.min_pts {
                config.dbscan.min_pts = m;
            }
            if let Some(r) = a.radius {
                config.dtw.radius = r;
            }
        }
        Command::ClusterExperience(a) => {
            if let Some(k) = a.kmax {
                config.kmeans.k_max = k;
            }
            match a.space.as_deref() {
                Some("original") => config.kmeans.space = KMeansSpace::Original,
                Some(_) => config.kmeans.space = KMeansSpace::Embedding,
                None => {}
            }
        }
        Command::Topics(a) => {
            let t = &mut config.topics;
            if let Some(n) = a.topics {
                t.n_topics = n;
            }
            if a.tau.is_some() {
                t.tau_decor = a.tau;
            }
            if let Some(b) = a.beta {
                t.beta_phi = b;
            }
            if let Some(al) = a.alpha {
                t.alpha_theta = al;
            }
            if let Some(m) = a.max_iters {
                t.max_iters = m;
            }
            t.normalize_docs |= a.normalize_docs;
        }
        Command::Report(a) => {
            if a.team_map.is_some() {
                config.report.team_map = a.team_map.clone();
            }
            if let Some(n) = a.trials {
                config.report.trials = n;
            }
            if a.per_developer {
                config.report.mode = AgreementMode::PerDeveloper;
            }
            config.report.include_stubs |= a.include_stubs;
        }
        _ => {}
    }
}

fn synth(args: &SynthArgs, seed: u64) -> Result<()> {
    let org = generate_synthetic_org(&SyntheticOrgSpec {
        n_teams: args.teams,
        devs_per_team: args.devs,
        days: args.days,
        seed,
        ..SyntheticOrgSpec::default()
    })?;
    fs::create_dir_all(&args.out).with_context(|| format!("cannot create {}", args.out.display()))?;
    let write = |name: &str, text: &str| -> Result<()> {
        let path: PathBuf = args.out.join(name);
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
    };
    write("org.jsonl", &org.facts_text())?;
    write("teams.yml", &org.team_map_text())?;
    write(
        "config.yml",
        &format!("fixtures: [org.jsonl]\nseed: {seed}\nreport:\n  team_map: teams.yml\n"),
    )?;
    log::info!("wrote {} identities in {} teams to {}", org.members.len(), args.teams, args.out.display());
    Ok(())
}

fn execute(cli: &Cli) -> Result<()> {
    let mut config = load_config(cli)?;
    if let Command::Synth(args) = &cli.command {
        return synth(args, config.seed);
    }
    apply_overrides(&mut config, &cli.command);
    let ws = Workspace::open(&cli.workspace)?;
    let stage = match &cli.command {
        Command::Ingest => Stage::Ingest,
        Command::Identities => Stage::Identities,
        Command::Features => Stage::Features,
        Command::ClusterActivity(_) => Stage::ClusterActivity,
        Command::ClusterExperience(_) => Stage::ClusterExperience,
        Command::Topics(_) => Stage::Topics,
        Command::Report(_) => Stage::Report,
        Command::Run => return Ok(run_pipeline(&config, &ws)?),
        Command::Synth(_) => unreachable!(),
    };
    Ok(run_stage(stage, &config, &ws)?)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
