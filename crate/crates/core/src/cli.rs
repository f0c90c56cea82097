//! Command-line front end: `run`, `experiment` and `summarize`.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{
    load_dataset, normalize, stratified_kfold, Dataset, FoldPlan, LabelColumn, LoadOptions,
    MissingPolicy,
};
use crate::error::{Error, Result};
use crate::evolution::EvolutionParams;
use crate::experiment::{
    derive_seed, load_records, run_evolution, run_experiment, summarize, write_records,
    write_results, write_summary, ExperimentSettings, OutputFormat, RunConfig, SeedPurpose,
    FOLD_PLAN_FILE,
};
use crate::selection::Strategy;

#[derive(Debug, Parser)]
#[command(
    name = "gpclass",
    version,
    about = "Genetic programming classifiers with validation-set and parsimony-based model selection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve a single classifier on one cross-validation fold.
    Run(RunArgs),
    /// Run every strategy over all folds and repeats and write result files.
    Experiment(ExperimentArgs),
    /// Recompute the summary of a records file.
    Summarize(SummarizeArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Delimited text file, one sample per row.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Zero-based label column, or `last`.
    #[arg(long, default_value = "last")]
    pub label_col: LabelColumn,
    #[arg(long, default_value = ",")]
    pub delimiter: char,
    /// Skip the first row.
    #[arg(long)]
    pub header: bool,
    /// Drop rows with missing values instead of rejecting the file.
    #[arg(long)]
    pub drop_incomplete: bool,
    /// Label string mapped to the first class (default: first one in the file).
    #[arg(long)]
    pub first_label: Option<String>,
    /// Dataset name used in records and seed derivation (default: file stem).
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvolutionArgs {
    #[arg(long, default_value_t = 1000)]
    pub pop: usize,
    #[arg(long, default_value_t = 100)]
    pub gens: usize,
    #[arg(long, default_value_t = 2)]
    pub tournament: usize,
    #[arg(long, default_value_t = 17)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub evolution: EvolutionArgs,
    #[arg(long, default_value = "baseline")]
    pub strategy: Strategy,
    /// Test fold index.
    #[arg(long, default_value_t = 0)]
    pub fold: usize,
    #[arg(long, default_value_t = 0)]
    pub repeat: usize,
    /// Import this fold plan instead of deriving one.
    #[arg(long)]
    pub fold_plan: Option<PathBuf>,
    /// Write records and summary into this directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub evolution: EvolutionArgs,
    /// Comma-separated subset of baseline,validation,parsimony,both.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "baseline,validation,parsimony,both"
    )]
    pub strategies: Vec<Strategy>,
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Import this fold plan instead of deriving one.
    #[arg(long)]
    pub fold_plan: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Write comma-separated instead of tab-separated files.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    #[arg(long)]
    pub records: PathBuf,
    /// Write the summary here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl DataArgs {
    fn load(&self) -> Result<(String, Dataset)> {
        if !self.delimiter.is_ascii() {
            return Err(Error::Config(format!(
                "delimiter must be ASCII, got `{}`",
                self.delimiter
            )));
        }
        let options = LoadOptions {
            delimiter: self.delimiter as u8,
            label_column: self.label_col,
            has_header: self.header,
            missing: if self.drop_incomplete {
                MissingPolicy::Drop
            } else {
                MissingPolicy::Reject
            },
            first_label: self.first_label.clone(),
        };
        let raw = load_dataset(&self.dataset, &options)?;
        let name = self.name.clone().unwrap_or_else(|| {
            self.dataset
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "dataset".into())
        });
        Ok((name, normalize(&raw)))
    }
}

impl EvolutionArgs {
    fn params(&self) -> EvolutionParams {
        EvolutionParams {
            population_size: self.pop,
            generations: self.gens,
            tournament_size: self.tournament,
            max_depth: self.max_depth,
            ..Default::default()
        }
    }
}

fn fold_plan_for(
    path: Option<&Path>,
    name: &str,
    dataset: &Dataset,
    seed: u64,
    folds: usize,
) -> Result<FoldPlan> {
    match path {
        Some(p) => FoldPlan::load(p),
        None => {
            let s = derive_seed(seed, name, SeedPurpose::FoldPlan, None, 0, 0);
            stratified_kfold(&mut ChaCha8Rng::seed_from_u64(s), &dataset.samples, folds)
        }
    }
}

fn stdout_error(e: io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let (name, dataset) = args.data.load()?;
    let ev = &args.evolution;
    let plan = fold_plan_for(
        args.fold_plan.as_deref(),
        &name,
        &dataset,
        ev.seed,
        ev.folds,
    )?;
    if args.fold >= plan.k {
        return Err(Error::Config(format!(
            "fold {} out of range for {} folds",
            args.fold, plan.k
        )));
    }
    let (train, test) = plan.split(args.fold);
    let config = RunConfig {
        strategy: args.strategy,
        params: ev.params(),
        dataset_id: name.clone(),
        fold: args.fold,
        repeat: args.repeat,
        seed: derive_seed(
            ev.seed,
            &name,
            SeedPurpose::Evolution,
            Some(args.strategy),
            args.fold,
            args.repeat,
        ),
        split_seed: derive_seed(
            ev.seed,
            &name,
            SeedPurpose::FitValidationSplit,
            None,
            args.fold,
            args.repeat,
        ),
    };
    let result = run_evolution(
        &config,
        &dataset.samples.select(&train),
        &dataset.samples.select(&test),
    )?;
    let results = [result];
    let stdout = io::stdout();
    write_records(&results, stdout.lock(), OutputFormat::Tsv)
        .map_err(|e| Error::Config(e.to_string()))?;
    if let Some(dir) = &args.out {
        let summary = summarize(&results);
        write_results(&results, &summary, dir, OutputFormat::Tsv)?;
    }
    Ok(())
}

fn cmd_experiment(args: &ExperimentArgs) -> Result<()> {
    let (name, dataset) = args.data.load()?;
    let ev = &args.evolution;
    let plan = fold_plan_for(
        args.fold_plan.as_deref(),
        &name,
        &dataset,
        ev.seed,
        ev.folds,
    )?;
    let settings = ExperimentSettings {
        dataset_id: name.clone(),
        strategies: args.strategies.clone(),
        folds: ev.folds,
        repeats: args.repeats,
        master_seed: ev.seed,
        params: ev.params(),
        workers: args.workers,
        fold_plan: Some(plan),
    };
    println!(
        "{name}: {} samples, {} features, {} strategies x {} folds x {} repeats",
        dataset.len(),
        dataset.n_features(),
        settings.strategies.len(),
        settings.folds,
        settings.repeats
    );
    let output = run_experiment(&dataset, &settings)?;
    let format = if args.csv {
        OutputFormat::Csv
    } else {
        OutputFormat::Tsv
    };
    let (records, summary) = write_results(&output.results, &output.summary, &args.out, format)?;
    output.fold_plan.save(args.out.join(FOLD_PLAN_FILE))?;
    println!("wrote {}", records.display());
    println!("wrote {}", summary.display());
    for section in &output.summary.sections {
        let mean = |m| output.summary.mean(section.strategy, m).unwrap_or(f64::NAN);
        use crate::experiment::Metric;
        println!(
            "{:<10} test {:.4} size {:.1} effort {:.4e}",
            section.strategy.name(),
            mean(Metric::TestRate),
            mean(Metric::Size),
            mean(Metric::Effort)
        );
    }
    Ok(())
}

fn cmd_summarize(args: &SummarizeArgs) -> Result<()> {
    let results = load_records(&args.records)?;
    let summary = summarize(&results);
    let format = OutputFormat::for_path(&args.records);
    match &args.out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
            write_summary(&summary, io::BufWriter::new(file), format)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_summary(&summary, &mut lock, format).map_err(|e| Error::Config(e.to_string()))?;
            lock.flush().map_err(stdout_error)?;
        }
    }
    Ok(())
}

/// Parses `args` and dispatches. Usage errors exit with 2, failures with 1.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Summarize(a) => cmd_summarize(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
