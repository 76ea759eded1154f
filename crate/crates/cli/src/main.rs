//! `gdl-reward`: validate, simulate and score LudiLite game descriptions.

mod table;

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gdl_reward::concepts::run_playouts;
use gdl_reward::dataset::{filter_by_length, load_instances, load_predictions};
use gdl_reward::engine::check_functionality;
use gdl_reward::metrics::{evaluate_corpus, EvalError};
use gdl_reward::rewards::{evaluate_description, score_candidates, Evaluated};
use gdl_reward::{compile, Grammar, RewardConfig, RewardConfigOverrides, SeedPolicy};
use serde::Serialize;

/// Exit statuses. Clap reports usage errors with status 2 itself.
const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_INPUT: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "gdl-reward",
    version,
    about = "Grammar and concept rewards for LudiLite game descriptions"
)]
struct Cli {
    #[command(flatten)]
    opts: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalOpts {
    /// Grammar file; defaults to the shipped LudiLite grammar.
    #[arg(long, global = true)]
    grammar: Option<PathBuf>,
    /// Fixed base seed for every playout batch (default: content hash of each description).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON file of reward config overrides, applied before the flags below.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Ground-truth playouts per description [default: 50].
    #[arg(long, global = true)]
    playouts_gt: Option<usize>,
    /// Candidate playouts per description [default: 10].
    #[arg(long, global = true)]
    playouts_pred: Option<usize>,
    /// Turn cap per playout [default: 250].
    #[arg(long, global = true)]
    max_turns: Option<usize>,
    /// Wall-clock budget per playout batch, in seconds [default: 180].
    #[arg(long, global = true)]
    budget_secs: Option<f64>,
    /// Gaussian penalty width [default: 0.3].
    #[arg(long, global = true)]
    sigma: Option<f64>,
    /// Concept reward weight in the combined reward [default: 1.0].
    #[arg(long, global = true)]
    lambda_c: Option<f64>,
    /// More log output (serve).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Grammar reward and valid-prefix diagnostics for a description file.
    Validate { file: PathBuf },
    /// Compile a description and probe it for functionality.
    Compile { file: PathBuf },
    /// Run seeded random playouts and print their traces.
    Playout {
        file: PathBuf,
        #[arg(short, default_value_t = 5)]
        n: usize,
        /// Print every move as well as the summary line.
        #[arg(long)]
        moves: bool,
    },
    /// Concept vector of a description (JSON).
    Concepts {
        file: PathBuf,
        /// Playouts to run [default: --playouts-gt].
        #[arg(long)]
        playouts: Option<usize>,
    },
    /// Score candidate files against a reference file (JSON).
    Reward {
        reference: PathBuf,
        #[arg(required = true)]
        candidates: Vec<PathBuf>,
    },
    /// Evaluate predictions against an instance corpus.
    Eval {
        #[arg(long)]
        instances: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
        /// Report file (JSON).
        #[arg(long, short)]
        out: PathBuf,
        /// Drop instances whose description exceeds this many tokens.
        #[arg(long)]
        max_tokens: Option<usize>,
    },
    /// Start the HTTP reward service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
    },
}

enum Failure {
    Input(String),
    Internal(String),
}

type Outcome = Result<bool, Failure>;

fn input<E: std::fmt::Display>(ctx: impl std::fmt::Display) -> impl FnOnce(E) -> Failure {
    move |e| Failure::Input(format!("{ctx}: {e}"))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(input(path.display()))
}

/// 1-based line and column of a character offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let mut line = 1;
    let mut col = 1;
    for c in text.chars().take(offset) {
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

impl GlobalOpts {
    fn seeds(&self) -> SeedPolicy {
        self.seed.map_or(SeedPolicy::ContentHash, SeedPolicy::Fixed)
    }

    fn grammar(&self) -> Result<Grammar, Failure> {
        match &self.grammar {
            Some(p) => Grammar::load(p).map_err(input(p.display())),
            None => Ok(Grammar::ludilite()),
        }
    }

    fn reward_config(&self) -> Result<RewardConfig, Failure> {
        let base = match &self.config {
            Some(p) => serde_json::from_str::<RewardConfigOverrides>(&read(p)?)
                .map_err(input(p.display()))?
                .apply(&RewardConfig::default())
                .map_err(input(p.display()))?,
            None => RewardConfig::default(),
        };
        RewardConfigOverrides {
            sigma: self.sigma,
            lambda_c: self.lambda_c,
            playouts_gt: self.playouts_gt,
            playouts_pred: self.playouts_pred,
            max_turns: self.max_turns,
            budget_secs: self.budget_secs,
            ..Default::default()
        }
        .apply(&base)
        .map_err(input("flags"))
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let s = serde_json::to_string_pretty(value).map_err(|e| Failure::Internal(e.to_string()))?;
    println!("{s}");
    Ok(())
}

fn validate(opts: &GlobalOpts, file: &Path) -> Outcome {
    let text = read(file)?;
    let grammar = opts.grammar()?;
    let res = grammar.recognize(&text);
    println!("r_g = {:?}", grammar.reward::<f64>(&text));
    println!(
        "consumed = {}/{} chars",
        res.consumed_chars, res.total_chars
    );
    println!("accepted = {}", res.accepted);
    if let Some(f) = &res.failure {
        let (line, col) = line_col(&text, f.offset);
        println!(
            "{}:{line}:{col}: unexpected `{}`; expected one of: {}",
            file.display(),
            f.token,
            f.expected.join(" ")
        );
    } else if !res.accepted {
        println!("{}: input ends before a complete game", file.display());
    }
    Ok(res.accepted)
}

fn compile_cmd(opts: &GlobalOpts, file: &Path) -> Outcome {
    let text = read(file)?;
    let cfg = opts.reward_config()?;
    let spec = match compile(&text) {
        Ok(s) => s,
        Err(e) => {
            let (line, col) = line_col(&text, e.offset);
            println!(
                "{}:{line}:{col}: {} error: {}",
                file.display(),
                e.kind,
                e.message
            );
            return Ok(false);
        }
    };
    println!(
        "compiled `{}`: {} players, {}x{} board, {} end rules",
        spec.name,
        spec.num_players,
        spec.rows,
        spec.cols,
        spec.end_rules.len()
    );
    let probe = check_functionality(&spec, &cfg.probe_seed_list(), cfg.max_turns);
    match probe.reason {
        None => {
            println!("functional = true");
            Ok(true)
        }
        Some(reason) => {
            println!("functional = false ({reason})");
            Ok(false)
        }
    }
}

fn playout(opts: &GlobalOpts, file: &Path, n: usize, moves: bool) -> Outcome {
    let text = read(file)?;
    let cfg = opts.reward_config()?;
    let spec = compile(&text).map_err(input(file.display()))?;
    let stats = run_playouts(
        &spec,
        n,
        opts.seeds().base_seed(&text),
        cfg.max_turns,
        cfg.budget_secs,
    );
    for t in &stats.traces {
        println!(
            "seed {} outcome {:?} length {} decisions {}{}",
            t.seed,
            t.outcome,
            t.len(),
            t.decision_points.iter().filter(|&&d| d > 1).count(),
            if t.stalled { " stalled" } else { "" }
        );
        if moves {
            for m in &t.moves {
                println!("  p{} -> site {}", m.player, m.site);
            }
        }
    }
    println!(
        "completed {}/{}; wins per player {:?}; draws {}; timeouts {}",
        stats.completed, stats.requested, stats.wins_per_player, stats.draws, stats.timeouts
    );
    Ok(!stats.budget_exceeded)
}

fn concepts(opts: &GlobalOpts, file: &Path, playouts: Option<usize>) -> Outcome {
    let text = read(file)?;
    let cfg = opts.reward_config()?;
    let n = playouts.unwrap_or(cfg.playouts_gt);
    match evaluate_description(&text, n, &cfg, opts.seeds()) {
        Evaluated::Computed(_, c) => {
            print_json(&c)?;
            Ok(true)
        }
        Evaluated::NotCompilable(e) => {
            let (line, col) = line_col(&text, e.offset);
            println!("{}:{line}:{col}: {e}", file.display());
            Ok(false)
        }
        Evaluated::NonFunctional(_, reason) => {
            println!("{}: not functional ({reason})", file.display());
            Ok(false)
        }
        Evaluated::Uncomputable(_) => {
            println!("{}: no playout completed within the budget", file.display());
            Ok(false)
        }
    }
}

#[derive(Serialize)]
struct RewardOutput<'a> {
    reference: String,
    candidates: Vec<String>,
    config: &'a RewardConfig,
    seed_policy: SeedPolicy,
    reference_concepts: gdl_reward::ConceptVector,
    breakdowns: Vec<gdl_reward::RewardBreakdown>,
    advantages: Vec<f64>,
}

fn reward(opts: &GlobalOpts, reference: &Path, candidates: &[PathBuf]) -> Outcome {
    let ref_text = read(reference)?;
    let texts = candidates
        .iter()
        .map(|p| read(p))
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = opts.reward_config()?;
    let grammar = opts.grammar()?;
    let seeds = opts.seeds();
    let (gt, scored) = score_candidates(&ref_text, &texts, &grammar, &cfg, seeds)
        .map_err(input(reference.display()))?;
    print_json(&RewardOutput {
        reference: reference.display().to_string(),
        candidates: candidates.iter().map(|p| p.display().to_string()).collect(),
        config: &cfg,
        seed_policy: seeds,
        reference_concepts: gt,
        breakdowns: scored.breakdowns,
        advantages: scored.advantages,
    })?;
    Ok(true)
}

fn eval(
    opts: &GlobalOpts,
    instances: &Path,
    predictions: &Path,
    out: &Path,
    max_tokens: Option<usize>,
) -> Outcome {
    let mut corpus = load_instances(instances).map_err(input(instances.display()))?;
    if let Some(max) = max_tokens {
        corpus = filter_by_length(&corpus, max);
    }
    let preds = load_predictions(predictions).map_err(input(predictions.display()))?;
    let cfg = opts.reward_config()?;
    let grammar = opts.grammar()?;
    let report = evaluate_corpus(&corpus, &preds, &grammar, &cfg, opts.seeds()).map_err(|e| {
        let path = match e {
            EvalError::UnknownInstance(_) => predictions,
            _ => instances,
        };
        Failure::Input(format!("{}: {e}", path.display()))
    })?;
    let json =
        serde_json::to_string_pretty(&report).map_err(|e| Failure::Internal(e.to_string()))?;
    fs::write(out, json + "\n").map_err(input(out.display()))?;
    print!("{}", table::render(&report));
    if !report.missing.is_empty() {
        println!(
            "{} (instance, seed) pairs had no prediction",
            report.missing.len()
        );
    }
    println!("report written to {}", out.display());
    Ok(true)
}

fn serve(opts: &GlobalOpts, bind: SocketAddr) -> Outcome {
    let level = match opts.verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(level)),
        )
        .init();
    let cfg = opts.reward_config()?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Internal(e.to_string()))?;
    runtime
        .block_on(gdl_reward_service::serve(
            bind,
            opts.grammar.as_deref(),
            cfg,
        ))
        .map_err(|e| Failure::Input(e.to_string()))?;
    Ok(true)
}

fn run(cli: &Cli) -> Outcome {
    let o = &cli.opts;
    // Reject bad overrides even for subcommands that do not use them.
    o.reward_config()?;
    match &cli.command {
        Command::Validate { file } => validate(o, file),
        Command::Compile { file } => compile_cmd(o, file),
        Command::Playout { file, n, moves } => playout(o, file, *n, *moves),
        Command::Concepts { file, playouts } => concepts(o, file, *playouts),
        Command::Reward {
            reference,
            candidates,
        } => reward(o, reference, candidates),
        Command::Eval {
            instances,
            predictions,
            out,
            max_tokens,
        } => eval(o, instances, predictions, out, *max_tokens),
        Command::Serve { bind } => serve(o, *bind),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}
