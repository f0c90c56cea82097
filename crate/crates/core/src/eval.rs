//! Column-wise tree evaluation over a whole sample set.
//!
//! Whether a node yields a scalar or a vector depends only on the tree
//! structure, and a subtree without `X` yields the same value for every
//! sample. Each intermediate result is therefore held as a `rows × cols`
//! block with `rows ∈ {1, m}` and `cols ∈ {1, n}`, so every primitive is
//! dispatched once per node instead of once per node and sample.
//!
//! Results are bitwise identical to [`crate::tree::evaluate`]: each
//! component goes through the same scalar function, and reductions sum in
//! the same left-to-right order.

use crate::primitives::{
    protected_div, saturate, vector_l2, vector_max, vector_min, vector_sum, Primitive,
};
use crate::sample::SampleSet;
use crate::tree::{decide, ProgramTree};

struct Block {
    /// 1 when the value does not depend on the sample.
    rows: usize,
    /// 1 for a scalar, otherwise n.
    cols: usize,
    scalar: bool,
    data: Vec<f64>,
}

impl Block {
    #[inline]
    fn row(&self, s: usize) -> &[f64] {
        if self.rows == 1 {
            &self.data[..self.cols]
        } else {
            &self.data[s * self.cols..(s + 1) * self.cols]
        }
    }
}

/// Reusable evaluation buffers.
#[derive(Default)]
pub struct BatchEvaluator {
    pool: Vec<Vec<f64>>,
    stack: Vec<Block>,
}

impl BatchEvaluator {
    pub fn new() -> Self {
        Self::default()
    }

    fn buffer(&mut self) -> Vec<f64> {
        let mut b = self.pool.pop().unwrap_or_default();
        b.clear();
        b
    }

    /// Per-sample scalar outputs (vectors reduced by summation).
    pub fn scores(&mut self, tree: &ProgramTree, set: &SampleSet) -> Vec<f64> {
        let m = set.len();
        let root = self.run(tree, set);
        let scores = (0..m)
            .map(|s| {
                let row = root.row(s);
                if root.scalar {
                    row[0]
                } else {
                    vector_sum(row)
                }
            })
            .collect();
        self.pool.push(root.data);
        scores
    }

    pub fn error_count(&mut self, tree: &ProgramTree, set: &SampleSet) -> usize {
        let m = set.len();
        let root = self.run(tree, set);
        let labels = set.labels();
        let errors = (0..m)
            .filter(|&s| {
                let row = root.row(s);
                let score = if root.scalar { row[0] } else { vector_sum(row) };
                decide(score) != labels[s]
            })
            .count();
        self.pool.push(root.data);
        errors
    }

    fn run(&mut self, tree: &ProgramTree, set: &SampleSet) -> Block {
        let m = set.len();
        let n = set.n_features();
        debug_assert!(self.stack.is_empty());
        for node in tree.nodes().iter().rev() {
            let block = match node.kind() {
                Primitive::X => {
                    let mut data = self.buffer();
                    data.extend_from_slice(set.matrix());
                    Block {
                        rows: m,
                        cols: n,
                        scalar: false,
                        data,
                    }
                }
                Primitive::E => {
                    let mut data = self.buffer();
                    data.extend_from_slice(node.payload().expect("E carries a payload"));
                    Block {
                        rows: 1,
                        cols: n,
                        scalar: false,
                        data,
                    }
                }
                Primitive::Abs => self.map_in_place(f64::abs),
                Primitive::Sln => self.map_in_place(saturate),
                Primitive::Sum => self.reduce(|r| r[0], vector_sum),
                Primitive::Mea => self.reduce(|r| r[0], |r| vector_sum(r) / r.len() as f64),
                Primitive::Mxv => self.reduce(|r| r[0], vector_max),
                Primitive::Miv => self.reduce(|r| r[0], vector_min),
                Primitive::L2 => self.reduce(|r| r[0].abs(), vector_l2),
                Primitive::Add => self.binary(|a, b| a + b),
                Primitive::Sub => self.binary(|a, b| a - b),
                Primitive::Mul => self.binary(|a, b| a * b),
                Primitive::Div => self.binary(protected_div),
                Primitive::Mxf => self.binary(f64::max),
                Primitive::Mnf => self.binary(f64::min),
            };
            self.stack.push(block);
        }
        let root = self.stack.pop().expect("nonempty tree");
        debug_assert!(self.stack.is_empty());
        root
    }

    fn map_in_place(&mut self, f: impl Fn(f64) -> f64) -> Block {
        let mut block = self.stack.pop().expect("argument");
        for x in &mut block.data {
            *x = f(*x);
        }
        block
    }

    fn reduce(&mut self, scalar: impl Fn(&[f64]) -> f64, vector: impl Fn(&[f64]) -> f64) -> Block {
        let arg = self.stack.pop().expect("argument");
        if arg.scalar {
            let mut arg = arg;
            for x in &mut arg.data {
                *x = scalar(std::slice::from_ref(x));
            }
            return arg;
        }
        let mut data = self.buffer();
        data.extend(arg.data.chunks_exact(arg.cols).map(&vector));
        let rows = arg.rows;
        self.pool.push(arg.data);
        Block {
            rows,
            cols: 1,
            scalar: true,
            data,
        }
    }

    fn binary(&mut self, f: impl Fn(f64, f64) -> f64) -> Block {
        // Children were pushed last-to-first, so the first argument is on top.
        let a = self.stack.pop().expect("first argument");
        let b = self.stack.pop().expect("second argument");
        let rows = a.rows.max(b.rows);
        let cols = a.cols.max(b.cols);
        let mut data = self.buffer();
        data.reserve(rows * cols);
        for s in 0..rows {
            let (ar, br) = (a.row(s), b.row(s));
            match (a.scalar, b.scalar) {
                (true, true) => data.push(f(ar[0], br[0])),
                (true, false) => {
                    let x = ar[0];
                    data.extend(br.iter().map(|&y| f(x, y)));
                }
                (false, true) => {
                    let y = br[0];
                    data.extend(ar.iter().map(|&x| f(x, y)));
                }
                (false, false) => data.extend(ar.iter().zip(br).map(|(&x, &y)| f(x, y))),
            }
        }
        self.pool.push(a.data);
        self.pool.push(b.data);
        Block {
            rows,
            cols,
            scalar: a.scalar && b.scalar,
            data,
        }
    }
}

/// Misclassification count of `tree` over `set`.
pub fn error_count(tree: &ProgramTree, set: &SampleSet) -> usize {
    BatchEvaluator::new().error_count(tree, set)
}
