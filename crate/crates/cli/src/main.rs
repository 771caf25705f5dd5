use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use drls_core::io::{write_matrix, TableFormat};
use drls_core::pipeline::{render_report, run_pipeline, write_outputs, Command, RunConfig};
use drls_core::synth::{power_law_ridge_matrix, random_with_spectrum, SpectrumProfile};

/// Deterministic ridge leverage score column sampling.
#[derive(Parser, Debug)]
#[command(name = "drls", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Write a seeded synthetic matrix.
    Gen(GenArgs),
    /// Ridge, subspace and classical scores plus a power-law fit.
    Scores(RunArgs),
    /// DRLS column selection.
    Select(RunArgs),
    /// Check the spectral, column-subset, projection-cost and kernel bounds.
    Verify(RunArgs),
    /// Ridge regression risk on A and on the selected columns.
    Regress(RunArgs),
    /// Compare against randomized ridge leverage sampling.
    CompareRandom(RunArgs),
    /// Every stage in order.
    All(RunArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    /// power-law:<a>, exponential:<rate> or flat
    #[arg(long, default_value = "power-law:1")]
    spectrum: String,
    /// Exact ridge-score decay power-law:<a>; overrides --spectrum.
    #[arg(long)]
    leverage: Option<String>,
    /// Rank parameter for --leverage.
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output matrix file.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for report.txt and the .dat files.
    #[arg(long, default_value = "drls-out")]
    out: PathBuf,
    #[arg(long, default_value_t = 1000)]
    projections: usize,
    #[arg(long, default_value_t = 10000)]
    trials: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [1e-3, 1.0, 1e3])]
    sigma_sq: Vec<f64>,
    /// Mean-center columns (default).
    #[arg(long, overrides_with = "no_center")]
    center: bool,
    #[arg(long, overrides_with = "center")]
    no_center: bool,
    #[arg(long, default_value = "csv")]
    format: String,
    /// Treat checks outside their proved epsilon range as acceptable.
    #[arg(long)]
    allow_out_of_range: bool,
    #[arg(long, default_value_t = 4.0)]
    oversample: f64,
    #[arg(long, default_value_t = 100)]
    random_trials: usize,
}

impl RunArgs {
    fn into_config(self, commands: Vec<Command>) -> anyhow::Result<RunConfig> {
        let format: TableFormat = self.format.parse()?;
        Ok(RunConfig {
            input_path: Some(self.input),
            format,
            k: self.k,
            epsilon: self.epsilon,
            seed: self.seed,
            commands,
            output_dir: Some(self.out),
            num_projections: self.projections,
            monte_carlo_trials: self.trials,
            sigma_sq_list: self.sigma_sq,
            center: self.center || !self.no_center,
            allow_out_of_range: self.allow_out_of_range,
            oversample: self.oversample,
            random_trials: self.random_trials,
        })
    }
}

fn generate(args: GenArgs) -> anyhow::Result<()> {
    let format: TableFormat = args.format.parse()?;
    let matrix = match &args.leverage {
        Some(spec) => {
            let Some(("power-law", a)) = spec.split_once(':') else {
                bail!("--leverage expects power-law:<a>, got {spec:?}");
            };
            let a: f64 = a.parse().with_context(|| format!("bad decay power {a:?}"))?;
            let (m, design) = power_law_ridge_matrix(args.rows, args.cols, args.k, a, args.seed)?;
            eprintln!(
                "ridge scores follow {:.4}*i^-{a} to relative error {:.2e}",
                design.top_score, design.max_relative_error
            );
            m
        }
        None => {
            let profile: SpectrumProfile = args.spectrum.parse()?;
            random_with_spectrum(args.rows, args.cols, profile, args.seed)?
        }
    };
    write_matrix(&args.out, &matrix, format)?;
    eprintln!("wrote {}x{} matrix to {}", matrix.rows(), matrix.cols(), args.out.display());
    Ok(())
}

fn run(args: RunArgs, commands: Vec<Command>) -> anyhow::Result<bool> {
    let config = args.into_config(commands)?;
    let report = run_pipeline(&config)?;
    let dir = config.output_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let plots = write_outputs(&report, &dir).with_context(|| format!("writing to {}", dir.display()))?;
    print!("{}", render_report(&report));
    for note in &plots.skipped {
        eprintln!("skipped {note}");
    }
    Ok(report.success())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Cmd::Gen(args) => generate(args).map(|()| true),
        Cmd::Scores(args) => run(args, vec![Command::Scores]),
        Cmd::Select(args) => run(args, vec![Command::Select]),
        Cmd::Verify(args) => run(args, vec![Command::Select, Command::Verify]),
        Cmd::Regress(args) => run(args, vec![Command::Select, Command::Regress]),
        Cmd::CompareRandom(args) => run(args, vec![Command::Select, Command::CompareRandom]),
        Cmd::All(args) => run(args, Command::ALL.to_vec()),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more guarantee checks did not pass");
            ExitCode::from(1)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
