//! Cross-validated experiments over the four selection strategies.

use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::{split_fit_validation, stratified_kfold, Dataset, FoldPlan};
use crate::error::{Error, Result};
use crate::eval::error_count;
use crate::evolution::{
    evaluate_population, init_population, next_generation, EffortLedger, EvolutionParams,
    Individual,
};
use crate::sample::SampleSet;
use crate::selection::{pareto_front, BestOfRunTracker, Strategy};
use crate::stats::{box_plot, describe, t_test, BoxPlot, Describe, TTest};
use crate::tree::ProgramTree;

pub const RECORDS_FILE: &str = "records.tsv";
pub const SUMMARY_FILE: &str = "summary.tsv";
pub const FOLD_PLAN_FILE: &str = "fold_plan.tsv";

// Seed derivation.

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// What a derived seed is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedPurpose {
    FoldPlan,
    FitValidationSplit,
    Evolution,
}

/// Pure function of its inputs. `strategy` is ignored for fold plans and
/// splits so that all strategies share data partitions.
pub fn derive_seed(
    master: u64,
    dataset_id: &str,
    purpose: SeedPurpose,
    strategy: Option<Strategy>,
    fold: usize,
    repeat: usize,
) -> u64 {
    let (tag, strategy_code, fold, repeat) = match purpose {
        SeedPurpose::FoldPlan => (1u64, 0u64, 0, 0),
        SeedPurpose::FitValidationSplit => (2, 0, fold as u64, repeat as u64),
        SeedPurpose::Evolution => (
            3,
            strategy.map_or(0, |s| s as u64 + 1),
            fold as u64,
            repeat as u64,
        ),
    };
    [
        fnv1a(dataset_id.as_bytes()),
        tag,
        strategy_code,
        fold,
        repeat,
    ]
    .into_iter()
    .fold(splitmix64(master), |h, part| {
        splitmix64(h ^ splitmix64(part))
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub strategy: Strategy,
    /// `lexicographic` is overridden by the strategy.
    pub params: EvolutionParams,
    pub dataset_id: String,
    pub fold: usize,
    pub repeat: usize,
    /// Seeds the evolution stream.
    pub seed: u64,
    /// Seeds the fit/validation split (validation strategies only).
    pub split_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub dataset: String,
    pub strategy: Strategy,
    pub fold: usize,
    pub repeat: usize,
    pub seed: u64,
    pub best: ProgramTree,
    /// Generation in which the best-of-run individual was found.
    pub generation: usize,
    pub train_rate: f64,
    pub valid_rate: Option<f64>,
    pub test_rate: f64,
    pub size: usize,
    pub effort: u64,
}

/// Per-generation view handed to run observers.
pub struct GenerationView<'a> {
    pub generation: usize,
    pub population: &'a [Individual],
    pub effort: u64,
    pub fit_set: &'a SampleSet,
}

/// Executes one evolution and reports its best-of-run individual.
pub fn run_evolution(
    config: &RunConfig,
    training: &SampleSet,
    test: &SampleSet,
) -> Result<RunResult> {
    run_evolution_observed(config, training, test, |_| {})
}

/// Like [`run_evolution`], calling `observe` after each generation is
/// evaluated (generation 0 included).
pub fn run_evolution_observed(
    config: &RunConfig,
    training: &SampleSet,
    test: &SampleSet,
    mut observe: impl FnMut(&GenerationView<'_>),
) -> Result<RunResult> {
    if training.is_empty() || test.is_empty() {
        return Err(Error::Config(
            "training and test sets must be nonempty".into(),
        ));
    }
    let strategy = config.strategy;
    let params = EvolutionParams {
        lexicographic: strategy.lexicographic(),
        ..config.params.clone()
    };
    params.validate()?;

    let (fit, validation) = if strategy.uses_validation() {
        let mut rng = ChaCha8Rng::seed_from_u64(config.split_seed);
        let (fit, validation) = split_fit_validation(&mut rng, training)?;
        (fit, Some(validation))
    } else {
        (training.clone(), None)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut ledger = EffortLedger::new();
    let mut tracker = BestOfRunTracker::new(strategy);

    let mut pop = init_population(&mut rng, &params, &fit);
    evaluate_population(&mut pop, &fit, &mut ledger);
    for generation in 0..=params.generations {
        if generation > 0 {
            pop = next_generation(&mut rng, &pop, &params, &fit, &mut ledger);
        }
        match &validation {
            Some(validation) => {
                let front = pareto_front(&pop);
                tracker.update_validation(&front, validation, generation, &mut ledger);
            }
            None => tracker.update_baseline(&pop, generation),
        }
        observe(&GenerationView {
            generation,
            population: &pop,
            effort: ledger.total(),
            fit_set: &fit,
        });
    }

    let best = tracker
        .into_incumbent()
        .expect("a nonempty population always yields an incumbent");
    let rate =
        |tree: &ProgramTree, set: &SampleSet| error_count(tree, set) as f64 / set.len() as f64;
    Ok(RunResult {
        dataset: config.dataset_id.clone(),
        strategy,
        fold: config.fold,
        repeat: config.repeat,
        seed: config.seed,
        train_rate: rate(&best.individual.tree, training),
        valid_rate: validation
            .as_ref()
            .map(|v| best.errors as f64 / v.len() as f64),
        test_rate: rate(&best.individual.tree, test),
        size: best.size,
        generation: best.generation,
        effort: ledger.total(),
        best: best.individual.tree,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSettings {
    pub dataset_id: String,
    pub strategies: Vec<Strategy>,
    pub folds: usize,
    pub repeats: usize,
    pub master_seed: u64,
    pub params: EvolutionParams,
    pub workers: usize,
    /// Replaces the derived fold plan when present.
    pub fold_plan: Option<FoldPlan>,
}

impl ExperimentSettings {
    pub fn new(dataset_id: impl Into<String>) -> Self {
        Self {
            dataset_id: dataset_id.into(),
            strategies: Strategy::ALL.to_vec(),
            folds: 10,
            repeats: 10,
            master_seed: 1,
            params: EvolutionParams::default(),
            workers: 1,
            fold_plan: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub fold_plan: FoldPlan,
    /// Ordered by strategy, then fold, then repeat.
    pub results: Vec<RunResult>,
    pub summary: ExperimentSummary,
}

pub fn run_experiment(
    dataset: &Dataset,
    settings: &ExperimentSettings,
) -> Result<ExperimentOutput> {
    let id = settings.dataset_id.as_str();
    let master = settings.master_seed;
    let plan = match &settings.fold_plan {
        Some(plan) => {
            if plan.assignments.len() != dataset.len() {
                return Err(Error::Config(format!(
                    "fold plan covers {} samples but the dataset has {}",
                    plan.assignments.len(),
                    dataset.len()
                )));
            }
            if plan.k != settings.folds {
                return Err(Error::Config(format!(
                    "fold plan has {} folds but {} were requested",
                    plan.k, settings.folds
                )));
            }
            plan.clone()
        }
        None => {
            let seed = derive_seed(master, id, SeedPurpose::FoldPlan, None, 0, 0);
            stratified_kfold(
                &mut ChaCha8Rng::seed_from_u64(seed),
                &dataset.samples,
                settings.folds,
            )?
        }
    };
    settings.params.validate()?;

    let splits: Vec<(SampleSet, SampleSet)> = (0..settings.folds)
        .map(|f| {
            let (train, test) = plan.split(f);
            (
                dataset.samples.select(&train),
                dataset.samples.select(&test),
            )
        })
        .collect();

    let jobs: Vec<RunConfig> = settings
        .strategies
        .iter()
        .flat_map(|&strategy| {
            (0..settings.folds).flat_map(move |fold| {
                (0..settings.repeats).map(move |repeat| RunConfig {
                    strategy,
                    params: settings.params.clone(),
                    dataset_id: id.to_string(),
                    fold,
                    repeat,
                    seed: derive_seed(
                        master,
                        id,
                        SeedPurpose::Evolution,
                        Some(strategy),
                        fold,
                        repeat,
                    ),
                    split_seed: derive_seed(
                        master,
                        id,
                        SeedPurpose::FitValidationSplit,
                        None,
                        fold,
                        repeat,
                    ),
                })
            })
        })
        .collect();

    let execute = |job: &RunConfig| {
        let (train, test) = &splits[job.fold];
        run_evolution(job, train, test)
    };
    let results: Vec<RunResult> = if settings.workers <= 1 {
        jobs.iter().map(execute).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(settings.workers)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
        pool.install(|| jobs.par_iter().map(execute).collect::<Result<_>>())?
    };

    let summary = summarize(&results);
    Ok(ExperimentOutput {
        fold_plan: plan,
        results,
        summary,
    })
}

// Summaries.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    TrainRate,
    ValidRate,
    TestRate,
    Size,
    Effort,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::TrainRate,
        Metric::ValidRate,
        Metric::TestRate,
        Metric::Size,
        Metric::Effort,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::TrainRate => "train_rate",
            Metric::ValidRate => "valid_rate",
            Metric::TestRate => "test_rate",
            Metric::Size => "size",
            Metric::Effort => "effort",
        }
    }

    pub fn value(self, r: &RunResult) -> Option<f64> {
        match self {
            Metric::TrainRate => Some(r.train_rate),
            Metric::ValidRate => r.valid_rate,
            Metric::TestRate => Some(r.test_rate),
            Metric::Size => Some(r.size as f64),
            Metric::Effort => Some(r.effort as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSummary {
    pub metric: Metric,
    pub describe: Describe,
    pub box_plot: BoxPlot,
    /// Comparison against the baseline strategy's values of the same metric.
    pub vs_baseline: Option<TTest>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategySummary {
    pub strategy: Strategy,
    pub runs: usize,
    pub metrics: Vec<MetricSummary>,
}

impl StrategySummary {
    pub fn metric(&self, metric: Metric) -> Option<&MetricSummary> {
        self.metrics.iter().find(|m| m.metric == metric)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentSummary {
    pub sections: Vec<StrategySummary>,
}

impl ExperimentSummary {
    pub fn section(&self, strategy: Strategy) -> Option<&StrategySummary> {
        self.sections.iter().find(|s| s.strategy == strategy)
    }

    pub fn mean(&self, strategy: Strategy, metric: Metric) -> Option<f64> {
        Some(self.section(strategy)?.metric(metric)?.describe.mean)
    }
}

/// Groups results by strategy in order of first appearance.
pub fn summarize(results: &[RunResult]) -> ExperimentSummary {
    let mut order: Vec<Strategy> = Vec::new();
    for r in results {
        if !order.contains(&r.strategy) {
            order.push(r.strategy);
        }
    }
    let values = |strategy: Strategy, metric: Metric| -> Vec<f64> {
        results
            .iter()
            .filter(|r| r.strategy == strategy)
            .filter_map(|r| metric.value(r))
            .collect()
    };
    let sections = order
        .iter()
        .map(|&strategy| {
            let runs = results.iter().filter(|r| r.strategy == strategy).count();
            let metrics = Metric::ALL
                .into_iter()
                .filter_map(|metric| {
                    let xs = values(strategy, metric);
                    if xs.is_empty() {
                        return None;
                    }
                    let vs_baseline =
                        if strategy != Strategy::Baseline && order.contains(&Strategy::Baseline) {
                            t_test(&xs, &values(Strategy::Baseline, metric))
                        } else {
                            None
                        };
                    Some(MetricSummary {
                        metric,
                        describe: describe(&xs),
                        box_plot: box_plot(&xs),
                        vs_baseline,
                    })
                })
                .collect();
            StrategySummary {
                strategy,
                runs,
                metrics,
            }
        })
        .collect();
    ExperimentSummary { sections }
}

// Result files.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Tsv,
    Csv,
}

impl OutputFormat {
    fn delimiter(self) -> u8 {
        match self {
            OutputFormat::Tsv => b'\t',
            OutputFormat::Csv => b',',
        }
    }

    /// Comma for `.csv` paths, tab otherwise.
    pub fn for_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => OutputFormat::Csv,
            _ => OutputFormat::Tsv,
        }
    }
}

pub const RECORD_HEADER: [&str; 12] = [
    "dataset",
    "strategy",
    "fold",
    "repeat",
    "seed",
    "generation",
    "train_rate",
    "valid_rate",
    "test_rate",
    "size",
    "effort",
    "tree",
];

pub const SUMMARY_HEADER: [&str; 17] = [
    "strategy",
    "metric",
    "n",
    "mean",
    "std",
    "degenerate",
    "median",
    "q1",
    "q3",
    "notch",
    "whisker_low",
    "whisker_high",
    "outliers",
    "t",
    "p",
    "df",
    "significant",
];

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::Records {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

pub fn write_records(
    results: &[RunResult],
    out: impl Write,
    format: OutputFormat,
) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(format.delimiter())
        .from_writer(out);
    w.write_record(RECORD_HEADER)?;
    for r in results {
        w.write_record([
            r.dataset.clone(),
            r.strategy.to_string(),
            r.fold.to_string(),
            r.repeat.to_string(),
            r.seed.to_string(),
            r.generation.to_string(),
            r.train_rate.to_string(),
            r.valid_rate.map(|v| v.to_string()).unwrap_or_default(),
            r.test_rate.to_string(),
            r.size.to_string(),
            r.effort.to_string(),
            r.best.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary(
    summary: &ExperimentSummary,
    out: impl Write,
    format: OutputFormat,
) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(format.delimiter())
        .from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for section in &summary.sections {
        for m in &section.metrics {
            let b = &m.box_plot;
            let d = &m.describe;
            let outliers = b
                .outliers
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(" ");
            let (t, p, df, sig) = match &m.vs_baseline {
                Some(tt) => (
                    tt.t.to_string(),
                    tt.p.to_string(),
                    tt.df.to_string(),
                    tt.significant().to_string(),
                ),
                None => Default::default(),
            };
            w.write_record([
                section.strategy.to_string(),
                m.metric.name().to_string(),
                d.n.to_string(),
                d.mean.to_string(),
                d.std.to_string(),
                d.degenerate.to_string(),
                b.median.to_string(),
                b.q1.to_string(),
                b.q3.to_string(),
                b.notch_half_width.to_string(),
                b.whisker_low.to_string(),
                b.whisker_high.to_string(),
                outliers,
                t,
                p,
                df,
                sig,
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `records.tsv` and `summary.tsv` (or `.csv`) into `dir`, returning both paths.
pub fn write_results(
    results: &[RunResult],
    summary: &ExperimentSummary,
    dir: impl AsRef<Path>,
    format: OutputFormat,
) -> Result<(PathBuf, PathBuf)> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let ext = match format {
        OutputFormat::Tsv => "tsv",
        OutputFormat::Csv => "csv",
    };
    let records = dir.join(format!("records.{ext}"));
    let summary_path = dir.join(format!("summary.{ext}"));
    let create = |p: &Path| {
        File::create(p)
            .map(BufWriter::new)
            .map_err(|e| Error::io(p, e))
    };
    write_records(results, create(&records)?, format).map_err(|e| csv_error(&records, e))?;
    write_summary(summary, create(&summary_path)?, format)
        .map_err(|e| csv_error(&summary_path, e))?;
    Ok((records, summary_path))
}

pub fn read_records(input: impl Read, format: OutputFormat, path: &Path) -> Result<Vec<RunResult>> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(format.delimiter())
        .from_reader(input);
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().ne(RECORD_HEADER.iter().copied()) {
        return Err(Error::Records {
            path: path.to_path_buf(),
            message: format!("unexpected header, expected {}", RECORD_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let row = i + 2;
        let field = |c: usize| rec.get(c).unwrap_or_default();
        let bad = |c: usize, what: String| Error::Parse {
            row,
            column: c + 1,
            message: what,
        };
        macro_rules! num {
            ($c:expr) => {
                field($c)
                    .parse()
                    .map_err(|e| bad($c, format!("{}: {e}", RECORD_HEADER[$c])))?
            };
        }
        out.push(RunResult {
            dataset: field(0).to_string(),
            strategy: field(1).parse().map_err(|e: Error| bad(1, e.to_string()))?,
            fold: num!(2),
            repeat: num!(3),
            seed: num!(4),
            generation: num!(5),
            train_rate: num!(6),
            valid_rate: if field(7).is_empty() {
                None
            } else {
                Some(num!(7))
            },
            test_rate: num!(8),
            size: num!(9),
            effort: num!(10),
            best: field(11)
                .parse()
                .map_err(|e: Error| bad(11, e.to_string()))?,
        });
    }
    Ok(out)
}

pub fn load_records(path: impl AsRef<Path>) -> Result<Vec<RunResult>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_records(io::BufReader::new(file), OutputFormat::for_path(path), path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::Sample;

    fn toy_sets() -> (SampleSet, SampleSet) {
        let mk = |offset: f64, count: usize| {
            SampleSet::from_samples(
                &(0..count)
                    .map(|i| {
                        let x = ((i as f64 + offset) * 0.37).sin();
                        let y = ((i as f64 + offset) * 0.11).cos();
                        Sample::new(vec![x, y], u8::from(x + 0.3 * y < 0.0))
                    })
                    .collect::<Vec<_>>(),
            )
        };
        (mk(0.0, 40), mk(100.0, 12))
    }

    fn config(strategy: Strategy, generations: usize) -> RunConfig {
        RunConfig {
            strategy,
            params: EvolutionParams {
                population_size: 20,
                generations,
                ..Default::default()
            },
            dataset_id: "toy".into(),
            fold: 0,
            repeat: 0,
            seed: 11,
            split_seed: 12,
        }
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let mut seen = std::collections::HashSet::new();
        for s in Strategy::ALL {
            for f in 0..10 {
                for r in 0..10 {
                    let seed = derive_seed(7, "bcw", SeedPurpose::Evolution, Some(s), f, r);
                    assert_eq!(
                        seed,
                        derive_seed(7, "bcw", SeedPurpose::Evolution, Some(s), f, r)
                    );
                    assert!(seen.insert(seed));
                }
            }
        }
        for f in 0..10 {
            for r in 0..10 {
                assert!(seen.insert(derive_seed(
                    7,
                    "bcw",
                    SeedPurpose::FitValidationSplit,
                    None,
                    f,
                    r
                )));
            }
        }
        assert_ne!(
            derive_seed(7, "bcw", SeedPurpose::FoldPlan, None, 0, 0),
            derive_seed(7, "pid", SeedPurpose::FoldPlan, None, 0, 0)
        );
    }

    #[test]
    fn baseline_run_has_no_validation_rate() {
        let (train, test) = toy_sets();
        let r = run_evolution(&config(Strategy::Baseline, 3), &train, &test).unwrap();
        assert!(r.valid_rate.is_none());
        assert!(r.effort > 0);
        assert!((0.0..=1.0).contains(&r.train_rate) && (0.0..=1.0).contains(&r.test_rate));
        assert_eq!(r.size, r.best.size());
    }

    #[test]
    fn zero_generations_uses_initial_population() {
        let (train, test) = toy_sets();
        for s in Strategy::ALL {
            let r = run_evolution(&config(s, 0), &train, &test).unwrap();
            assert_eq!(r.generation, 0);
            assert_eq!(r.valid_rate.is_some(), s.uses_validation());
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let (train, test) = toy_sets();
        let a = run_evolution(&config(Strategy::Both, 4), &train, &test).unwrap();
        let b = run_evolution(&config(Strategy::Both, 4), &train, &test).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn records_round_trip_and_resummarize() {
        let (train, test) = toy_sets();
        let results: Vec<RunResult> = Strategy::ALL
            .iter()
            .flat_map(|&s| {
                let (train, test) = (&train, &test);
                (0..3).map(move |rep| {
                    let mut c = config(s, 2);
                    c.repeat = rep;
                    c.seed = 100 + rep as u64;
                    run_evolution(&c, train, test).unwrap()
                })
            })
            .collect();
        let summary = summarize(&results);
        let mut buf = Vec::new();
        write_records(&results, &mut buf, OutputFormat::Tsv).unwrap();
        assert_eq!(
            buf.iter().filter(|&&b| b == b'\n').count(),
            results.len() + 1
        );
        let back = read_records(&buf[..], OutputFormat::Tsv, Path::new("mem")).unwrap();
        assert_eq!(back, results);
        assert_eq!(summarize(&back), summary);

        let mut csv_buf = Vec::new();
        write_records(&results, &mut csv_buf, OutputFormat::Csv).unwrap();
        let back = read_records(&csv_buf[..], OutputFormat::Csv, Path::new("mem")).unwrap();
        assert_eq!(back, results);
    }

    #[test]
    fn empty_summary() {
        let summary = summarize(&[]);
        assert!(summary.sections.is_empty());
        let mut buf = Vec::new();
        write_summary(&summary, &mut buf, OutputFormat::Tsv).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1);
    }

    #[test]
    fn single_run_summary_is_degenerate() {
        let (train, test) = toy_sets();
        let r = run_evolution(&config(Strategy::Parsimony, 1), &train, &test).unwrap();
        let summary = summarize(&[r]);
        let m = summary.sections[0].metric(Metric::TestRate).unwrap();
        assert!(m.describe.degenerate);
        assert_eq!(m.describe.std, 0.0);
        assert!(summary.sections[0].metric(Metric::ValidRate).is_none());
    }
}
