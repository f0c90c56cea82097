//! Labeled samples and contiguous sample sets.

/// Class index: 0 is the first class, 1 the second.
pub type Class = u8;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: Class,
}

impl Sample {
    pub fn new(features: Vec<f64>, label: Class) -> Self {
        Self { features, label }
    }
}

/// Row-major feature matrix with one label per row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampleSet {
    n: usize,
    features: Vec<f64>,
    labels: Vec<Class>,
}

impl SampleSet {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "feature count must be at least 1");
        Self {
            n,
            features: Vec::new(),
            labels: Vec::new(),
        }
    }

    /// Builds a set from rows; all rows must have the same length.
    pub fn from_samples(samples: &[Sample]) -> Self {
        let n = samples.first().map_or(1, |s| s.features.len());
        let mut set = Self::new(n);
        for s in samples {
            set.push(&s.features, s.label);
        }
        set
    }

    pub fn push(&mut self, features: &[f64], label: Class) {
        assert_eq!(
            features.len(),
            self.n,
            "row length must equal feature count"
        );
        assert!(label <= 1, "labels are 0 or 1");
        self.features.extend_from_slice(features);
        self.labels.push(label);
    }

    pub fn n_features(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n..(i + 1) * self.n]
    }

    pub fn label(&self, i: usize) -> Class {
        self.labels[i]
    }

    pub fn labels(&self) -> &[Class] {
        &self.labels
    }

    /// The whole feature matrix, row-major.
    pub fn matrix(&self) -> &[f64] {
        &self.features
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut [f64] {
        &mut self.features
    }

    pub fn sample(&self, i: usize) -> Sample {
        Sample::new(self.row(i).to_vec(), self.label(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = Sample> + '_ {
        (0..self.len()).map(|i| self.sample(i))
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> SampleSet {
        let mut out = SampleSet::new(self.n);
        out.features.reserve(indices.len() * self.n);
        for &i in indices {
            out.push(self.row(i), self.label(i));
        }
        out
    }

    /// Row indices of each class, in row order.
    pub fn class_indices(&self) -> [Vec<usize>; 2] {
        let mut out = [Vec::new(), Vec::new()];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l as usize].push(i);
        }
        out
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        [self.len() - ones, ones]
    }
}
