use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use psl_cli::report::write_report;
use psl_cli::server::{router, Snapshot};
use psl_core::campaign::{export_front, write_atomic, Campaign, CampaignConfig, CampaignOutcome, Checkpoint, Strategy};
use psl_core::problems::{make_problem, problem_names};
use psl_core::psmodel::TrainConfig;
use psl_core::rng::{self, Phase};

const LOG_FILE: &str = "run_log.json";
const CHECKPOINT_FILE: &str = "checkpoint.json";
const CHECKPOINT_DIR: &str = "checkpoints";

/// Multi-objective Bayesian optimization with a learned Pareto set model.
#[derive(Parser)]
#[command(name = "psl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an optimization campaign with the Pareto set model.
    Run(RunArgs),
    /// Run a comparison campaign without the Pareto set model.
    Baseline(BaselineArgs),
    /// Sample the learned front of a finished campaign.
    ExportFront(ExportArgs),
    /// List the registered problems.
    ListProblems,
    /// Serve a finished campaign over HTTP.
    Serve(ServeArgs),
}

#[derive(Args, Clone)]
struct CampaignArgs {
    /// Problem name (see list-problems).
    #[arg(long)]
    problem: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Batched iterations after the initial design.
    #[arg(long, default_value_t = 20)]
    iters: usize,
    /// Evaluations per iteration.
    #[arg(long, default_value_t = 5)]
    batch: usize,
    /// Size of the initial Latin hypercube design.
    #[arg(long, default_value_t = 10)]
    init: usize,
    /// Candidate designs sampled from the model per iteration.
    #[arg(long, default_value_t = 1000)]
    candidates: usize,
    /// LCB exploration weight.
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    /// Network training steps per iteration.
    #[arg(long, default_value_t = 1000)]
    train_steps: usize,
    /// Gradient refinement steps per candidate (0 disables).
    #[arg(long, default_value_t = 0)]
    refine_steps: usize,
    /// Output directory for the run log and checkpoint.
    #[arg(long, default_value = "psl-out")]
    out: PathBuf,
    /// Save a mid-run checkpoint every this many iterations (0 disables).
    #[arg(long, default_value_t = 0)]
    checkpoint_every: usize,
    /// Continue from a checkpoint instead of starting fresh.
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Approximate front (CSV) for problems without an analytic one.
    #[arg(long)]
    front_file: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    campaign: CampaignArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineStrategy {
    Sobol,
    NoModel,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(long, value_enum)]
    strategy: BaselineStrategy,
    /// Preferences optimized per iteration by no-model (defaults to --candidates).
    #[arg(long)]
    baseline_preferences: Option<usize>,
    #[command(flatten)]
    campaign: CampaignArgs,
}

#[derive(Args)]
struct ExportArgs {
    /// Finished campaign checkpoint.
    #[arg(long)]
    checkpoint: PathBuf,
    /// Number of preferences to sample.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Output directory for the report files.
    #[arg(long, default_value = "psl-front")]
    out: PathBuf,
    /// Approximate front (CSV) overriding the one recorded in the checkpoint.
    #[arg(long)]
    front_file: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    /// Finished campaign checkpoint.
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
}

impl CampaignArgs {
    fn config(&self) -> CampaignConfig {
        CampaignConfig {
            n_init: self.init,
            n_iterations: self.iters,
            batch_size: self.batch,
            candidate_count: self.candidates,
            lcb_beta: self.beta,
            train: TrainConfig {
                steps: self.train_steps,
                ..TrainConfig::default()
            },
            refine_steps: self.refine_steps,
            front_file: self.front_file.clone(),
            ..CampaignConfig::new(&self.problem, self.seed)
        }
    }
}

fn save_log(out: &Path, outcome: &CampaignOutcome) -> Result<()> {
    write_atomic(out.join(LOG_FILE), &serde_json::to_vec_pretty(&outcome.log)?)?;
    outcome.checkpoint().save(out.join(CHECKPOINT_FILE))?;
    Ok(())
}

/// Mid-run checkpoints go to `checkpoints/iter_NNN.json` so they survive the final one.
fn save_intermediate(out: &Path, campaign: &Campaign) -> psl_core::Result<PathBuf> {
    let dir = out.join(CHECKPOINT_DIR);
    std::fs::create_dir_all(&dir)?;
    let path = dir.join(format!("iter_{:03}.json", campaign.state().iteration));
    campaign.checkpoint().save(&path)?;
    Ok(path)
}

fn run_campaign(args: &CampaignArgs, config: CampaignConfig, strategy: Strategy) -> Result<()> {
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut campaign = match &args.resume {
        Some(path) => {
            let cp = Checkpoint::load(path).with_context(|| format!("loading {}", path.display()))?;
            if cp.strategy != strategy {
                bail!("checkpoint was written by a {:?} run", cp.strategy);
            }
            Campaign::resume(cp, Some(&args.problem))?
        }
        None => Campaign::new(config, strategy)?,
    };
    let checkpoint_path = args.out.join(CHECKPOINT_FILE);
    let every = args.checkpoint_every;
    let result = campaign.run_with(|c| {
        let t = c.state().iteration;
        eprintln!(
            "iteration {t}/{}: archive HV {:.6}",
            c.config().n_iterations,
            c.log().iterations.last().map_or(0.0, |r| r.archive_hv)
        );
        if every > 0 && t % every == 0 {
            save_intermediate(&args.out, c)?;
        }
        Ok(())
    });
    if let Err(e) = result {
        let saved = save_intermediate(&args.out, &campaign)?;
        return Err(e).context(format!(
            "campaign stopped after {} iterations; state saved to {}",
            campaign.state().iteration,
            saved.display()
        ));
    }
    let outcome = campaign.finish()?;
    save_log(&args.out, &outcome)?;
    let summary = outcome.log.summary.as_ref().context("missing summary")?;
    println!("evaluations: {}", summary.evaluations);
    println!("final HV: {}", summary.final_hv);
    match summary.log_hv_difference {
        Some(v) => println!("log HV difference: {v}"),
        None => println!("log HV difference: n/a (no reference front)"),
    }
    if let Some(v) = summary.relative_hv_difference {
        println!("relative HV difference of learned front: {v}");
    }
    print!("{}", outcome.log.timing_table());
    println!("wrote {} and {}", args.out.join(LOG_FILE).display(), checkpoint_path.display());
    Ok(())
}

fn export(args: &ExportArgs) -> Result<()> {
    let mut cp = Checkpoint::load(&args.checkpoint).with_context(|| format!("loading {}", args.checkpoint.display()))?;
    if let Some(path) = &args.front_file {
        cp.config.front_file = Some(path.clone());
    }
    let fm = cp.final_model.as_ref().context("checkpoint has no trained model")?;
    let bundle = cp.final_surrogates()?.context("checkpoint has no surrogate parameters")?;
    let problem = cp.problem()?;
    let mut r = rng::stream(cp.config.seed, Phase::Export, cp.state.iteration);
    let report = export_front(&fm.model, &bundle, &problem, args.samples, Some(&fm.ideal.utopia()), &mut r)?;
    write_report(&args.out, &report)?;
    println!("samples: {}", report.samples.len());
    println!("predicted front points: {}", report.predicted_front.len());
    println!("hypervolume: {}", report.hypervolume);
    if let Some(v) = report.relative_hv_difference {
        println!("relative HV difference: {v}");
    }
    println!("wrote report to {}", args.out.display());
    Ok(())
}

fn list_problems() -> Result<()> {
    println!("{:<12} {:>2} {:>2}  {:<6} description", "name", "n", "m", "front");
    for name in problem_names() {
        let p = make_problem(name)?;
        let front = if p.has_known_front { "exact" } else { "file" };
        println!("{:<12} {:>2} {:>2}  {:<6} {}", p.name, p.n, p.m, front, p.kind.description());
    }
    Ok(())
}

fn serve(args: &ServeArgs) -> Result<()> {
    let cp = Checkpoint::load(&args.checkpoint).with_context(|| format!("loading {}", args.checkpoint.display()))?;
    let snapshot = Arc::new(Snapshot::from_checkpoint(&cp)?);
    let addr: SocketAddr = format!("{}:{}", args.host, args.port).parse().context("bad host or port")?;
    let runtime = tokio::runtime::Builder::new_current_thread().enable_all().build()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("binding {addr}"))?;
        eprintln!("serving {} on http://{addr}", snapshot.problem.name);
        axum::serve(listener, router(snapshot)).await?;
        Ok(())
    })
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => run_campaign(&args.campaign, args.campaign.config(), Strategy::Psl),
        Command::Baseline(args) => {
            let mut config = args.campaign.config();
            config.baseline_preferences = args.baseline_preferences;
            let strategy = match args.strategy {
                BaselineStrategy::Sobol => Strategy::Sobol,
                BaselineStrategy::NoModel => Strategy::NoModel,
            };
            run_campaign(&args.campaign, config, strategy)
        }
        Command::ExportFront(args) => export(&args),
        Command::ListProblems => list_problems(),
        Command::Serve(args) => serve(&args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
