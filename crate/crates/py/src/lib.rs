//! Python bindings for `gpclass`.

use std::collections::BTreeMap;

use gpclass::data::{self, LabelColumn, LoadOptions, MissingPolicy};
use gpclass::evolution::{EvolutionParams, Individual};
use gpclass::experiment::{
    self, derive_seed, ExperimentSettings, Metric, RunConfig, RunResult, SeedPurpose,
};
use gpclass::selection::{self, Strategy};
use gpclass::{stats, tree, Primitive, ProgramTree, Sample, Value};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn to_py_err(e: gpclass::Error) -> PyErr {
    match e {
        gpclass::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse_strategy(name: &str) -> PyResult<Strategy> {
    name.parse()
        .map_err(|e: gpclass::Error| PyValueError::new_err(e.to_string()))
}

/// A scalar (float) or a vector (list of floats).
#[derive(FromPyObject, IntoPyObject)]
enum PyValue {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl From<Value> for PyValue {
    fn from(v: Value) -> Self {
        match v {
            Value::Scalar(x) => PyValue::Scalar(x),
            Value::Vector(xs) => PyValue::Vector(xs),
        }
    }
}

impl From<PyValue> for Value {
    fn from(v: PyValue) -> Self {
        match v {
            PyValue::Scalar(x) => Value::Scalar(x),
            PyValue::Vector(xs) => Value::Vector(xs),
        }
    }
}

/// A classifier program in prefix text form, e.g. `(ADD X E[0.5,-1])`.
#[pyclass(name = "Tree", module = "pygpclass", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyTree {
    inner: ProgramTree,
}

#[pymethods]
impl PyTree {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        let inner = text.parse().map_err(to_py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn size(&self) -> usize {
        self.inner.size()
    }

    #[getter]
    fn depth(&self) -> usize {
        self.inner.depth()
    }

    /// Raw program output for one feature vector.
    fn evaluate(&self, features: Vec<f64>) -> PyResult<PyValue> {
        self.inner.validate(features.len()).map_err(to_py_err)?;
        Ok(tree::evaluate(&self.inner, &Sample::new(features, 0)).into())
    }

    /// Predicted class (0 or 1) for one feature vector.
    fn classify(&self, features: Vec<f64>) -> PyResult<u8> {
        self.inner.validate(features.len()).map_err(to_py_err)?;
        Ok(tree::classify(&self.inner, &Sample::new(features, 0)))
    }

    /// Misclassified samples of `dataset`.
    fn errors(&self, dataset: &PyDataset) -> PyResult<usize> {
        self.inner
            .validate(dataset.inner.n_features())
            .map_err(to_py_err)?;
        Ok(gpclass::eval::error_count(
            &self.inner,
            &dataset.inner.samples,
        ))
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Tree('{}')", self.inner)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner.to_string() == other.inner.to_string()
    }
}

/// A two-class dataset.
#[pyclass(name = "Dataset", module = "pygpclass", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDataset {
    inner: data::Dataset,
    name: String,
}

#[pymethods]
impl PyDataset {
    /// Loads a delimited text file. `label_col` is a zero-based index; the
    /// last column is used when omitted.
    #[staticmethod]
    #[pyo3(signature = (path, *, label_col=None, delimiter=",", header=false, drop_incomplete=false, first_label=None, name=None))]
    fn load(
        path: &str,
        label_col: Option<usize>,
        delimiter: &str,
        header: bool,
        drop_incomplete: bool,
        first_label: Option<String>,
        name: Option<String>,
    ) -> PyResult<Self> {
        let delimiter = match delimiter.as_bytes() {
            [b] => *b,
            _ => {
                return Err(PyValueError::new_err(
                    "delimiter must be a single ASCII character",
                ))
            }
        };
        let options = LoadOptions {
            delimiter,
            label_column: label_col.map_or(LabelColumn::Last, LabelColumn::Index),
            has_header: header,
            missing: if drop_incomplete {
                MissingPolicy::Drop
            } else {
                MissingPolicy::Reject
            },
            first_label,
        };
        let inner = data::load_dataset(path, &options).map_err(to_py_err)?;
        let name = name.unwrap_or_else(|| {
            std::path::Path::new(path)
                .file_stem()
                .map_or_else(|| "dataset".into(), |s| s.to_string_lossy().into_owned())
        });
        Ok(Self { inner, name })
    }

    /// Builds a dataset from feature rows and 0/1 labels.
    #[staticmethod]
    #[pyo3(signature = (features, labels, name="dataset".to_string()))]
    fn from_rows(features: Vec<Vec<f64>>, labels: Vec<u8>, name: String) -> PyResult<Self> {
        if features.len() != labels.len() || features.is_empty() {
            return Err(PyValueError::new_err(
                "need one label per row and at least one row",
            ));
        }
        let n = features[0].len();
        let mut samples = gpclass::SampleSet::new(n);
        for (row, &label) in features.iter().zip(&labels) {
            if row.len() != n || label > 1 {
                return Err(PyValueError::new_err(
                    "ragged rows or a label outside {0, 1}",
                ));
            }
            samples.push(row, label);
        }
        Ok(Self {
            inner: data::Dataset {
                samples,
                class_labels: ["0".into(), "1".into()],
            },
            name,
        })
    }

    /// Copy with every feature scaled onto [-1, 1].
    fn normalize(&self) -> Self {
        Self {
            inner: data::normalize(&self.inner),
            name: self.name.clone(),
        }
    }

    #[getter]
    fn name(&self) -> &str {
        &self.name
    }

    #[getter]
    fn n_features(&self) -> usize {
        self.inner.n_features()
    }

    #[getter]
    fn class_labels(&self) -> (String, String) {
        let [a, b] = self.inner.class_labels.clone();
        (a, b)
    }

    fn class_counts(&self) -> (usize, usize) {
        let [a, b] = self.inner.samples.class_counts();
        (a, b)
    }

    fn features(&self) -> Vec<Vec<f64>> {
        let s = &self.inner.samples;
        (0..s.len()).map(|i| s.row(i).to_vec()).collect()
    }

    fn labels(&self) -> Vec<u8> {
        self.inner.samples.labels().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset('{}', {} samples, {} features)",
            self.name,
            self.inner.len(),
            self.inner.n_features()
        )
    }
}

fn result_dict<'py>(py: Python<'py>, r: &RunResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("dataset", &r.dataset)?;
    d.set_item("strategy", r.strategy.name())?;
    d.set_item("fold", r.fold)?;
    d.set_item("repeat", r.repeat)?;
    d.set_item("seed", r.seed)?;
    d.set_item(
        "best",
        PyTree {
            inner: r.best.clone(),
        },
    )?;
    d.set_item("generation", r.generation)?;
    d.set_item("train_rate", r.train_rate)?;
    d.set_item("valid_rate", r.valid_rate)?;
    d.set_item("test_rate", r.test_rate)?;
    d.set_item("size", r.size)?;
    d.set_item("effort", r.effort)?;
    Ok(d)
}

fn params(pop: usize, gens: usize) -> EvolutionParams {
    EvolutionParams {
        population_size: pop,
        generations: gens,
        ..Default::default()
    }
}

/// Evolves one classifier on a single cross-validation fold and returns its record.
#[pyfunction]
#[pyo3(signature = (dataset, strategy="baseline", *, fold=0, folds=10, repeat=0, pop=1000, gens=100, seed=1))]
#[allow(clippy::too_many_arguments)]
fn run_evolution<'py>(
    py: Python<'py>,
    dataset: &PyDataset,
    strategy: &str,
    fold: usize,
    folds: usize,
    repeat: usize,
    pop: usize,
    gens: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let strategy = parse_strategy(strategy)?;
    if fold >= folds {
        return Err(PyValueError::new_err(format!(
            "fold {fold} out of range for {folds} folds"
        )));
    }
    let name = dataset.name.as_str();
    let plan_seed = derive_seed(seed, name, SeedPurpose::FoldPlan, None, 0, 0);
    let plan = data::stratified_kfold(
        &mut ChaCha8Rng::seed_from_u64(plan_seed),
        &dataset.inner.samples,
        folds,
    )
    .map_err(to_py_err)?;
    let (train, test) = plan.split(fold);
    let config = RunConfig {
        strategy,
        params: params(pop, gens),
        dataset_id: name.to_string(),
        fold,
        repeat,
        seed: derive_seed(
            seed,
            name,
            SeedPurpose::Evolution,
            Some(strategy),
            fold,
            repeat,
        ),
        split_seed: derive_seed(
            seed,
            name,
            SeedPurpose::FitValidationSplit,
            None,
            fold,
            repeat,
        ),
    };
    let samples = &dataset.inner.samples;
    let (train, test) = (samples.select(&train), samples.select(&test));
    let result = py
        .detach(|| experiment::run_evolution(&config, &train, &test))
        .map_err(to_py_err)?;
    result_dict(py, &result)
}

/// Runs every strategy over all folds and repeats. Returns `(records, means)`
/// where `means[strategy][metric]` is the mean of that metric.
#[pyfunction]
#[pyo3(signature = (dataset, strategies=None, *, folds=10, repeats=10, pop=1000, gens=100, seed=1, workers=1))]
#[allow(clippy::too_many_arguments, clippy::type_complexity)]
fn run_experiment<'py>(
    py: Python<'py>,
    dataset: &PyDataset,
    strategies: Option<Vec<String>>,
    folds: usize,
    repeats: usize,
    pop: usize,
    gens: usize,
    seed: u64,
    workers: usize,
) -> PyResult<(
    Vec<Bound<'py, PyDict>>,
    BTreeMap<String, BTreeMap<String, f64>>,
)> {
    let strategies = match strategies {
        Some(names) => names
            .iter()
            .map(|s| parse_strategy(s))
            .collect::<PyResult<_>>()?,
        None => Strategy::ALL.to_vec(),
    };
    let settings = ExperimentSettings {
        strategies,
        folds,
        repeats,
        master_seed: seed,
        params: params(pop, gens),
        workers,
        ..ExperimentSettings::new(dataset.name.clone())
    };
    let output = py
        .detach(|| experiment::run_experiment(&dataset.inner, &settings))
        .map_err(to_py_err)?;
    let records = output
        .results
        .iter()
        .map(|r| result_dict(py, r))
        .collect::<PyResult<_>>()?;
    let means = output
        .summary
        .sections
        .iter()
        .map(|section| {
            let metrics = Metric::ALL
                .into_iter()
                .filter_map(|m| Some((m.name().to_string(), section.metric(m)?.describe.mean)))
                .collect();
            (section.strategy.name().to_string(), metrics)
        })
        .collect();
    Ok((records, means))
}

/// Pooled-variance two-sample t-test: `(t, p, df)`, or `None` when either
/// sample has fewer than two values.
#[pyfunction]
fn t_test(a: Vec<f64>, b: Vec<f64>) -> Option<(f64, f64, usize)> {
    stats::t_test(&a, &b).map(|t| (t.t, t.p, t.df))
}

/// Indices of the non-dominated `(errors, size)` points, one per distinct point.
#[pyfunction]
fn pareto_front(points: Vec<(usize, usize)>) -> PyResult<Vec<usize>> {
    if points.iter().any(|&(_, size)| size == 0) {
        return Err(PyValueError::new_err("sizes must be positive"));
    }
    let pop: Vec<Individual> = points
        .iter()
        .map(|&(errors, size)| {
            let mut text = String::from("X");
            for _ in 1..size {
                text = format!("(ABS {text})");
            }
            Individual {
                tree: text.parse().expect("chain of ABS parses"),
                fit_errors: Some(errors),
            }
        })
        .collect();
    let front = selection::pareto_front(&pop);
    Ok(front
        .members
        .iter()
        .map(|m| {
            pop.iter()
                .position(|p| std::ptr::eq(p, *m))
                .expect("member of pop")
        })
        .collect())
}

/// Applies one primitive by name to scalar or vector arguments of length `n`.
#[pyfunction]
fn apply_primitive(name: &str, args: Vec<PyValue>, n: usize) -> PyResult<PyValue> {
    let kind: Primitive = name
        .parse()
        .map_err(|e: gpclass::primitives::UnknownPrimitive| PyValueError::new_err(e.to_string()))?;
    if kind.is_terminal() {
        return Err(PyValueError::new_err(format!("{kind} is a terminal")));
    }
    if args.len() != kind.arity() {
        return Err(PyValueError::new_err(format!(
            "{kind} takes {} arguments",
            kind.arity()
        )));
    }
    let args: Vec<Value> = args.into_iter().map(Value::from).collect();
    if args.iter().any(|a| !a.is_scalar() && a.len() != n) {
        return Err(PyValueError::new_err(format!(
            "vector arguments must have length {n}"
        )));
    }
    Ok(gpclass::primitives::apply_primitive(kind, &args, n).into())
}

#[pymodule]
fn pygpclass(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTree>()?;
    m.add_class::<PyDataset>()?;
    m.add_function(wrap_pyfunction!(run_evolution, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(t_test, m)?)?;
    m.add_function(wrap_pyfunction!(pareto_front, m)?)?;
    m.add_function(wrap_pyfunction!(apply_primitive, m)?)?;
    Ok(())
}
