//! Dataset loading, scaling and stratified partitioning.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::sample::{Class, SampleSet};

/// Share of each class sent to the fitness-evaluation set.
pub const FIT_FRACTION: f64 = 0.67;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelColumn {
    Index(usize),
    Last,
}

impl std::str::FromStr for LabelColumn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "last" {
            return Ok(LabelColumn::Last);
        }
        s.parse().map(LabelColumn::Index).map_err(|_| {
            Error::Config(format!(
                "label column must be an index or `last`, got `{s}`"
            ))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingPolicy {
    #[default]
    Reject,
    Drop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadOptions {
    pub delimiter: u8,
    pub label_column: LabelColumn,
    pub has_header: bool,
    pub missing: MissingPolicy,
    /// Label string to map to class 0; defaults to the first one encountered.
    pub first_label: Option<String>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            label_column: LabelColumn::Last,
            has_header: false,
            missing: MissingPolicy::Reject,
            first_label: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: SampleSet,
    /// Original label strings of class 0 and class 1.
    pub class_labels: [String; 2],
}

impl Dataset {
    pub fn n_features(&self) -> usize {
        self.samples.n_features()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

fn is_missing(cell: &str) -> bool {
    matches!(cell, "" | "?" | "NA" | "na" | "NaN" | "nan")
}

pub fn load_dataset(path: impl AsRef<Path>, options: &LoadOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(BufReader::new(file), options)
}

pub fn parse_dataset(reader: impl Read, options: &LoadOptions) -> Result<Dataset> {
    let mut csv = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(options.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut width: Option<usize> = None;
    let mut labels: Vec<String> = options.first_label.iter().cloned().collect();
    let mut rows: Vec<(Vec<f64>, String)> = Vec::new();

    for (r, record) in csv.records().enumerate() {
        let row = r + 1 + usize::from(options.has_header);
        let record = record.map_err(|e| Error::Parse {
            row,
            column: 0,
            message: e.to_string(),
        })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(Error::Parse {
                    row,
                    column: record.len().min(w) + 1,
                    message: format!("expected {w} columns, found {}", record.len()),
                })
            }
            _ => {}
        }
        let w = record.len();
        if w < 2 {
            return Err(Error::Parse {
                row,
                column: 1,
                message: "need at least one feature column and a label column".into(),
            });
        }
        let label_at = match options.label_column {
            LabelColumn::Last => w - 1,
            LabelColumn::Index(i) if i < w => i,
            LabelColumn::Index(i) => {
                return Err(Error::Config(format!(
                    "label column {i} out of range for {w} columns"
                )))
            }
        };

        let mut features = Vec::with_capacity(w - 1);
        let mut incomplete = false;
        for (c, cell) in record.iter().enumerate() {
            if c == label_at {
                continue;
            }
            if is_missing(cell) {
                incomplete = true;
                if options.missing == MissingPolicy::Reject {
                    return Err(Error::Parse {
                        row,
                        column: c + 1,
                        message: "missing value (use the drop-incomplete policy to skip such rows)"
                            .into(),
                    });
                }
                continue;
            }
            let value: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column: c + 1,
                message: format!("non-numeric feature `{cell}`"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: c + 1,
                    message: format!("non-finite feature `{cell}`"),
                });
            }
            features.push(value);
        }
        let label = record.get(label_at).unwrap_or_default();
        if is_missing(label) {
            incomplete = true;
            if options.missing == MissingPolicy::Reject {
                return Err(Error::Parse {
                    row,
                    column: label_at + 1,
                    message: "missing label".into(),
                });
            }
        }
        if incomplete {
            continue;
        }
        if !labels.iter().any(|l| l == label) {
            labels.push(label.to_string());
        }
        rows.push((features, label.to_string()));
    }

    if rows.is_empty() {
        return Err(Error::Parse {
            row: 0,
            column: 0,
            message: "no data rows".into(),
        });
    }
    if labels.len() != 2 {
        return Err(Error::Schema(format!(
            "expected exactly two class labels, found {}: {}",
            labels.len(),
            labels.join(", ")
        )));
    }
    let n = rows[0].0.len();
    let mut samples = SampleSet::new(n);
    for (features, label) in &rows {
        let class: Class = if *label == labels[0] { 0 } else { 1 };
        samples.push(features, class);
    }
    if let Some(class) = (0..2).find(|&c| samples.class_counts()[c] == 0) {
        return Err(Error::Schema(format!(
            "class `{}` has no samples",
            labels[class]
        )));
    }
    let [first, second]: [String; 2] = labels.try_into().expect("two labels");
    Ok(Dataset {
        samples,
        class_labels: [first, second],
    })
}

/// Maps each feature linearly onto [-1, 1] using its range over the whole
/// dataset; constant features become 0.
pub fn normalize(dataset: &Dataset) -> Dataset {
    let n = dataset.n_features();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for row in dataset.samples.matrix().chunks_exact(n) {
        for (j, &x) in row.iter().enumerate() {
            lo[j] = lo[j].min(x);
            hi[j] = hi[j].max(x);
        }
    }
    let mut out = dataset.clone();
    for row in out.samples.matrix_mut().chunks_exact_mut(n) {
        for (j, x) in row.iter_mut().enumerate() {
            let range = hi[j] - lo[j];
            *x = if range > 0.0 {
                (2.0 * (*x - lo[j]) / range - 1.0).clamp(-1.0, 1.0)
            } else {
                0.0
            };
        }
    }
    out
}

/// Assignment of every sample to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub assignments: Vec<usize>,
    pub k: usize,
}

impl FoldPlan {
    /// `(training indices, test indices)` for `fold`.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        assert!(fold < self.k, "fold {fold} out of range");
        (0..self.assignments.len()).partition(|&i| self.assignments[i] != fold)
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }

    /// Writes `sample<TAB>fold` lines under a header.
    pub fn write_to(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "sample\tfold")?;
        for (i, f) in self.assignments.iter().enumerate() {
            writeln!(out, "{i}\t{f}")?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = io::BufWriter::new(file);
        self.write_to(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn read_from(reader: impl BufRead) -> Result<Self> {
        let mut assignments = Vec::new();
        for (r, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse {
                row: r + 1,
                column: 0,
                message: e.to_string(),
            })?;
            if r == 0 || line.trim().is_empty() {
                continue;
            }
            let bad = |column, message: &str| Error::Parse {
                row: r + 1,
                column,
                message: message.to_string(),
            };
            let mut parts = line.split('\t');
            let index: usize = parts
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| bad(1, "bad sample index"))?;
            let fold: usize = parts
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| bad(2, "bad fold index"))?;
            if index != assignments.len() {
                return Err(bad(1, "sample indices must be consecutive from 0"));
            }
            assignments.push(fold);
        }
        let k = assignments.iter().max().map_or(0, |m| m + 1);
        if k == 0 {
            return Err(Error::Parse {
                row: 0,
                column: 0,
                message: "empty fold plan".into(),
            });
        }
        Ok(Self { assignments, k })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(file))
    }
}

/// Shuffles each class and deals it round-robin over the folds, continuing
/// where the previous class stopped so fold sizes differ by at most one.
pub fn stratified_kfold<R: Rng + ?Sized>(
    rng: &mut R,
    samples: &SampleSet,
    k: usize,
) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    let mut assignments = vec![usize::MAX; samples.len()];
    let mut next = 0;
    for (class, mut members) in samples.class_indices().into_iter().enumerate() {
        if members.len() < k {
            return Err(Error::Config(format!(
                "class {class} has {} samples, fewer than {k} folds",
                members.len()
            )));
        }
        members.shuffle(rng);
        for i in members {
            assignments[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldPlan { assignments, k })
}

/// Stratified split into a fitness-evaluation set (67% of each class,
/// rounded) and a validation set. Both keep the input row order.
pub fn split_fit_validation<R: Rng + ?Sized>(
    rng: &mut R,
    training: &SampleSet,
) -> Result<(SampleSet, SampleSet)> {
    let mut fit = Vec::new();
    let mut validation = Vec::new();
    for (class, mut members) in training.class_indices().into_iter().enumerate() {
        if members.len() < 2 {
            return Err(Error::Config(format!(
                "class {class} has {} training samples; at least 2 are needed to hold out a validation set",
                members.len()
            )));
        }
        members.shuffle(rng);
        let take = (FIT_FRACTION * members.len() as f64).round() as usize;
        fit.extend_from_slice(&members[..take]);
        validation.extend_from_slice(&members[take..]);
    }
    fit.sort_unstable();
    validation.sort_unstable();
    Ok((training.select(&fit), training.select(&validation)))
}
