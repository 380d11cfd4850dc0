//! Command-line front end: `generate`, `train`, `evaluate`, `sweep`.
//!
//! Exit status: 0 on success, 1 for usage errors, 2 for runtime errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ngar::harness::{
    evaluate_pretrained, run_experiment_on_with, sweep, train_network, write_report_files, write_sweep,
    ExperimentConfig, Method,
};
use ngar::neural::{load_checkpoint, save_checkpoint};
use ngar::sim::io::{load_sequence, save_sequence};
use ngar::sim::{generate_sequence, GeneratorConfig, PmldsConfig, RotationalConfig};
use ngar::{Correspondence, Error};

#[derive(Parser)]
#[command(name = "ngar", version, about = "Forecasting sequences of attributed graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a graph sequence and write it as JSON lines.
    Generate(GenerateArgs),
    /// Train the network on the training segment of a dataset and save a checkpoint.
    Train(TrainArgs),
    /// Evaluate predictors on the test segment of a dataset.
    Evaluate(EvaluateArgs),
    /// Run several experiments and write their reports plus a summary table.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Generator {
    Rotational,
    Pmlds,
}

#[derive(Args)]
struct ProcessArgs {
    #[arg(long, value_enum, default_value = "pmlds")]
    generator: Generator,
    #[arg(long, default_value_t = 5)]
    nodes: usize,
    #[arg(long, default_value_t = 20_000)]
    steps: usize,
    /// Process noise standard deviation.
    #[arg(long, default_value_t = 0.001)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ProcessArgs {
    fn generator(&self, p: usize, c: usize) -> Result<GeneratorConfig, Error> {
        Ok(match self.generator {
            Generator::Rotational => GeneratorConfig::Rotational(
                RotationalConfig::new(self.nodes, p, self.seed)?.with_noise_std(self.sigma)?,
            ),
            Generator::Pmlds => {
                GeneratorConfig::Pmlds(PmldsConfig::new(self.nodes, 2, c, self.seed)?.with_noise_std(self.sigma)?)
            }
        })
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    process: ProcessArgs,
    /// Rotational model order.
    #[arg(long, default_value_t = 5)]
    p: usize,
    /// PMLDS latent dimension.
    #[arg(long, default_value_t = 11)]
    c: usize,
    /// Output dataset file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ModelArgs {
    /// Window length.
    #[arg(long, default_value_t = 20)]
    k: usize,
    /// Seed for network initialisation and shuffling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum training epochs.
    #[arg(long)]
    epochs: Option<usize>,
    /// Use this width for every layer instead of the default architecture.
    #[arg(long)]
    width: Option<usize>,
    /// Print one line per training epoch.
    #[arg(long)]
    verbose: bool,
}

impl ModelArgs {
    fn apply(&self, config: &mut ExperimentConfig) {
        config.window = self.k;
        config.seed = self.seed;
        if let Some(w) = self.width {
            config.ngar = config.ngar.clone().with_width(w);
        }
        if let Some(e) = self.epochs {
            config.ngar.max_epochs = e;
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset written by `generate`.
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    /// Output checkpoint file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    data: PathBuf,
    /// Checkpoint from `train`; without it NGAR is trained from scratch.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "mean,mart,move,var,ngar")]
    methods: Vec<String>,
    #[command(flatten)]
    model: ModelArgs,
    /// Match nodes by the best permutation instead of by index.
    #[arg(long)]
    optimal_permutation: bool,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON-lines file with one experiment configuration per line. When
    /// absent, configurations are built from the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    process: ProcessArgs,
    /// Comma-separated rotational orders.
    #[arg(long, value_delimiter = ',', default_value = "5")]
    p: Vec<usize>,
    /// Comma-separated PMLDS dimensions.
    #[arg(long, value_delimiter = ',', default_value = "11")]
    c: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "mean,mart,move,var,ngar")]
    methods: Vec<String>,
    #[arg(long, default_value_t = 20)]
    k: usize,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    width: Option<usize>,
    /// Worker threads; 1 gives a fully sequential run.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

/// Failure category, mapped to the exit status.
enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn parse_methods(names: &[String]) -> Result<Vec<Method>, Failure> {
    names
        .iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse().map_err(usage))
        .collect()
}

fn progress(verbose: bool) -> impl FnMut(&str, &ngar::neural::EpochRecord) {
    move |label, r| {
        if verbose {
            eprintln!(
                "{label} epoch {:>3}: train {:.5}  validation {:.5}  accuracy {:.4}",
                r.epoch, r.train_loss, r.validation_loss, r.validation_accuracy
            );
        }
    }
}

fn dataset_config(path: &Path) -> Result<(ngar::GraphSequence, ExperimentConfig), Failure> {
    let seq = load_sequence(path).map_err(|e| e.context(format!("reading {}", path.display())))?;
    let mut config = ExperimentConfig::default();
    if let Some(origin) = seq.origin() {
        config.generator = origin.clone();
    }
    config.total_steps = seq.len();
    Ok((seq, config))
}

fn generate(args: GenerateArgs) -> Result<(), Failure> {
    let p = &args.process;
    let gen = p.generator(args.p, args.c).map_err(usage)?;
    let seq = generate_sequence(&gen, p.steps)?;
    save_sequence(&seq, &args.out).map_err(|e| e.context(format!("writing {}", args.out.display())))?;
    println!("wrote {} graphs of {} to {}", seq.len(), gen.label(), args.out.display());
    Ok(())
}

fn train(args: TrainArgs) -> Result<(), Failure> {
    let (seq, mut config) = dataset_config(&args.data)?;
    args.model.apply(&mut config);
    config.network_config().validate().map_err(usage)?;
    let mut log = progress(args.model.verbose);
    let label = config.generator.label();
    let (model, history) = train_network(&seq, &config, |r| log(&label, r))?;
    save_checkpoint(&model, &args.out)?;
    let best = history.best().expect("history holds the initial evaluation");
    println!(
        "trained {} epochs (best {}: validation loss {:.5}, accuracy {:.4}); checkpoint {}",
        history.epochs.len() - 1,
        history.best_epoch,
        best.validation_loss,
        best.validation_accuracy,
        args.out.display()
    );
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> Result<(), Failure> {
    let (seq, mut config) = dataset_config(&args.data)?;
    args.model.apply(&mut config);
    config.methods = parse_methods(&args.methods)?;
    if args.optimal_permutation {
        config.distance.correspondence = Correspondence::OptimalPermutation;
    }
    config.output_dir = Some(args.out.clone());
    let report = match &args.checkpoint {
        Some(path) if config.methods.contains(&Method::Ngar) => {
            let model = load_checkpoint::<f32>(path).map_err(|e| e.context(format!("reading {}", path.display())))?;
            config.ngar = model.config.clone();
            evaluate_pretrained(&seq, &config, model)?
        }
        _ => run_experiment_on_with(&seq, &config, progress(args.model.verbose))?,
    };
    let paths = write_report_files(&report, &args.out, "report")?;
    for r in &report.results {
        println!("{:<5} median GED {:.6}", r.method, r.summary.median);
    }
    println!("report: {}", paths[0].display());
    Ok(())
}

fn sweep_cmd(args: SweepArgs) -> Result<(), Failure> {
    if let Some(t) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
    }
    let configs: Vec<ExperimentConfig> = match &args.config {
        Some(path) => read_configs(path)?,
        None => {
            let methods = parse_methods(&args.methods)?;
            let p = &args.process;
            let values: Vec<(usize, usize)> = match p.generator {
                Generator::Rotational => args.p.iter().map(|&v| (v, 0)).collect(),
                Generator::Pmlds => args.c.iter().map(|&v| (0, v)).collect(),
            };
            values
                .into_iter()
                .map(|(pv, cv)| {
                    let mut config = ExperimentConfig::new(p.generator(pv, cv).map_err(usage)?);
                    config.total_steps = p.steps;
                    config.window = args.k;
                    config.seed = p.seed;
                    config.methods = methods.clone();
                    if let Some(w) = args.width {
                        config.ngar = config.ngar.with_width(w);
                    }
                    if let Some(e) = args.epochs {
                        config.ngar.max_epochs = e;
                    }
                    Ok(config)
                })
                .collect::<Result<_, Failure>>()?
        }
    };
    for c in &configs {
        c.validate().map_err(usage)?;
    }
    let entries = sweep(&configs)?;
    let summary = write_sweep(&entries, &args.out)?;
    let failed = entries.iter().filter(|e| e.outcome.is_err()).count();
    for (i, e) in entries.iter().enumerate() {
        if let Err(err) = &e.outcome {
            eprintln!("config {i} ({}) failed: {err}", e.config.generator.label());
        }
    }
    println!("{} of {} runs succeeded; summary {}", entries.len() - failed, entries.len(), summary.display());
    if failed > 0 {
        return Err(Failure::Runtime(Error::Numerical(format!("{failed} sweep configuration(s) failed"))));
    }
    Ok(())
}

fn read_configs(path: &Path) -> Result<Vec<ExperimentConfig>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Error::from(e).context(format!("reading {}", path.display())))?;
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') {
        return serde_json::from_str(trimmed).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())));
    }
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Failure::Usage(format!("{} line {}: {e}", path.display(), i + 1)))
        })
        .collect()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Sweep(a) => sweep_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

