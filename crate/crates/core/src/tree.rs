//! Prefix-ordered program trees.
//!
//! A tree is stored as a flat vector of nodes in prefix order. Each node
//! records the number of nodes in the subtree it roots (its span), so the
//! children of node `i` start at `i + 1`, `i + 1 + span(child0)`, and so on.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::primitives::{apply_primitive, reduce_to_scalar, Primitive, Value};
use crate::sample::{Class, Sample, SampleSet};

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    kind: Primitive,
    payload: Option<Arc<[f64]>>,
    span: usize,
}

impl Node {
    pub fn kind(&self) -> Primitive {
        self.kind
    }

    /// The captured vector of an `E` node.
    pub fn payload(&self) -> Option<&[f64]> {
        self.payload.as_deref()
    }

    pub fn span(&self) -> usize {
        self.span
    }
}

/// A node description without span, used to assemble trees.
#[derive(Debug, Clone, PartialEq)]
pub enum Gene {
    Function(Primitive),
    X,
    E(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProgramTree {
    nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMethod {
    Full,
    Grow,
}

impl ProgramTree {
    /// Assembles a tree from prefix-ordered genes, checking arities.
    pub fn from_genes(genes: Vec<Gene>) -> Result<Self> {
        let nodes = genes
            .into_iter()
            .map(|g| match g {
                Gene::Function(kind) if kind.is_terminal() => Err(Error::TreeSyntax(format!(
                    "{kind} is a terminal, not a function"
                ))),
                Gene::Function(kind) => Ok(Node {
                    kind,
                    payload: None,
                    span: 0,
                }),
                Gene::X => Ok(Node {
                    kind: Primitive::X,
                    payload: None,
                    span: 0,
                }),
                Gene::E(payload) => Ok(Node {
                    kind: Primitive::E,
                    payload: Some(payload.into()),
                    span: 0,
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_nodes(nodes)
    }

    fn from_nodes(mut nodes: Vec<Node>) -> Result<Self> {
        recompute_spans(&mut nodes)?;
        Ok(Self { nodes })
    }

    pub fn terminal_x() -> Self {
        Self {
            nodes: vec![Node {
                kind: Primitive::X,
                payload: None,
                span: 1,
            }],
        }
    }

    pub fn terminal_e(payload: &[f64]) -> Self {
        Self {
            nodes: vec![Node {
                kind: Primitive::E,
                payload: Some(payload.into()),
                span: 1,
            }],
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    /// Longest root-to-leaf path, counted in nodes.
    pub fn depth(&self) -> usize {
        let mut stack: Vec<usize> = Vec::with_capacity(32);
        for node in self.nodes.iter().rev() {
            let arity = node.kind.arity();
            let mut deepest = 0;
            for _ in 0..arity {
                deepest = deepest.max(stack.pop().expect("valid tree"));
            }
            stack.push(deepest + 1);
        }
        stack.pop().unwrap_or(0)
    }

    /// Depth of the node at `index` measured from the root (root = 1).
    pub fn node_level(&self, index: usize) -> usize {
        let mut level = 1;
        let mut i = 0;
        while i != index {
            // descend into the child containing `index`
            let mut child = i + 1;
            loop {
                let end = child + self.nodes[child].span;
                if index < end {
                    break;
                }
                child = end;
            }
            i = child;
            level += 1;
        }
        level
    }

    /// Start indices of the children of node `index`.
    pub fn children(&self, index: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(2);
        let mut child = index + 1;
        for _ in 0..self.nodes[index].kind.arity() {
            out.push(child);
            child += self.nodes[child].span;
        }
        out
    }

    /// Copy of the subtree rooted at `index`.
    pub fn subtree(&self, index: usize) -> ProgramTree {
        let span = self.nodes[index].span;
        ProgramTree {
            nodes: self.nodes[index..index + span].to_vec(),
        }
    }

    /// Returns a tree with the subtree at `index` replaced by `replacement`.
    pub fn replace_subtree(&self, index: usize, replacement: &ProgramTree) -> ProgramTree {
        assert!(index < self.nodes.len(), "node index out of range");
        let end = index + self.nodes[index].span;
        let mut nodes =
            Vec::with_capacity(self.nodes.len() - (end - index) + replacement.nodes.len());
        nodes.extend_from_slice(&self.nodes[..index]);
        nodes.extend_from_slice(&replacement.nodes);
        nodes.extend_from_slice(&self.nodes[end..]);
        recompute_spans(&mut nodes).expect("splicing valid trees yields a valid tree");
        ProgramTree { nodes }
    }

    /// Returns a tree with the node at `index` changed to `kind` (same arity).
    pub(crate) fn with_kind(&self, index: usize, kind: Primitive, payload: Option<&[f64]>) -> Self {
        let mut out = self.clone();
        let node = &mut out.nodes[index];
        assert_eq!(node.kind.arity(), kind.arity(), "swap must preserve arity");
        assert_eq!(kind == Primitive::E, payload.is_some());
        node.kind = kind;
        node.payload = payload.map(Into::into);
        out
    }

    pub fn function_indices(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| !self.nodes[i].kind.is_terminal())
            .collect()
    }

    pub fn ephemeral_indices(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| self.nodes[i].kind == Primitive::E)
            .collect()
    }

    /// Checks spans, arities and payload lengths.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut copy = self.nodes.clone();
        recompute_spans(&mut copy)?;
        if copy != self.nodes {
            return Err(Error::TreeSyntax("stored spans are inconsistent".into()));
        }
        for node in &self.nodes {
            match (node.kind, &node.payload) {
                (Primitive::E, Some(p)) if p.len() == n => {}
                (Primitive::E, _) => {
                    return Err(Error::TreeSyntax(format!(
                        "E payload must have {n} components"
                    )))
                }
                (_, Some(_)) => {
                    return Err(Error::TreeSyntax("only E nodes carry payloads".into()))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

fn recompute_spans(nodes: &mut [Node]) -> Result<()> {
    if nodes.is_empty() {
        return Err(Error::TreeSyntax("empty tree".into()));
    }
    let mut stack: Vec<usize> = Vec::with_capacity(32);
    for node in nodes.iter_mut().rev() {
        let mut span = 1;
        for _ in 0..node.kind.arity() {
            span += stack
                .pop()
                .ok_or_else(|| Error::TreeSyntax(format!("{} is missing arguments", node.kind)))?;
        }
        node.span = span;
        stack.push(span);
    }
    if stack.len() != 1 {
        return Err(Error::TreeSyntax(format!(
            "{} disconnected subtrees",
            stack.len()
        )));
    }
    Ok(())
}

/// Generates a random tree by the full or grow method.
///
/// Full trees place terminals only at `max_depth`; grow trees draw from the
/// whole primitive set at every level below it. `E` payloads are copies of
/// rows drawn uniformly from `fit`.
pub fn generate_tree<R: Rng + ?Sized>(
    rng: &mut R,
    method: InitMethod,
    max_depth: usize,
    fit: &SampleSet,
) -> ProgramTree {
    assert!(max_depth >= 1, "max_depth must be at least 1");
    assert!(!fit.is_empty(), "fit samples must be nonempty");
    let mut nodes = Vec::new();
    grow_into(rng, method, max_depth, fit, &mut nodes);
    ProgramTree::from_nodes(nodes).expect("generator emits valid trees")
}

fn grow_into<R: Rng + ?Sized>(
    rng: &mut R,
    method: InitMethod,
    remaining: usize,
    fit: &SampleSet,
    nodes: &mut Vec<Node>,
) {
    let kind = if remaining == 1 {
        *Primitive::TERMINALS.choose(rng).unwrap()
    } else {
        match method {
            InitMethod::Full => *Primitive::FUNCTIONS.choose(rng).unwrap(),
            InitMethod::Grow => *Primitive::ALL.choose(rng).unwrap(),
        }
    };
    let payload = (kind == Primitive::E).then(|| random_payload(rng, fit));
    nodes.push(Node {
        kind,
        payload,
        span: 0,
    });
    for _ in 0..kind.arity() {
        grow_into(rng, method, remaining - 1, fit, nodes);
    }
}

pub(crate) fn random_payload<R: Rng + ?Sized>(rng: &mut R, fit: &SampleSet) -> Arc<[f64]> {
    let row = rng.gen_range(0..fit.len());
    fit.row(row).into()
}

/// Uniformly selects a node index.
pub fn select_node<R: Rng + ?Sized>(rng: &mut R, tree: &ProgramTree) -> usize {
    rng.gen_range(0..tree.size())
}

/// Reference evaluator: recursive, built on [`apply_primitive`].
pub fn evaluate(tree: &ProgramTree, sample: &Sample) -> Value {
    fn eval_at(tree: &ProgramTree, i: usize, x: &[f64]) -> Value {
        let node = &tree.nodes[i];
        match node.kind {
            Primitive::X => Value::Vector(x.to_vec()),
            Primitive::E => Value::Vector(node.payload.as_deref().unwrap().to_vec()),
            kind => {
                let args: Vec<Value> = tree
                    .children(i)
                    .into_iter()
                    .map(|c| eval_at(tree, c, x))
                    .collect();
                apply_primitive(kind, &args, x.len())
            }
        }
    }
    eval_at(tree, 0, &sample.features)
}

/// Class 0 when the reduced output is positive or zero, class 1 otherwise (NaN included).
pub fn classify(tree: &ProgramTree, sample: &Sample) -> Class {
    decide(reduce_to_scalar(&evaluate(tree, sample)))
}

#[inline]
pub fn decide(score: f64) -> Class {
    if score >= 0.0 {
        0
    } else {
        1
    }
}

/// Misclassification count using the reference evaluator.
pub fn error_count(tree: &ProgramTree, samples: &[Sample]) -> usize {
    samples
        .iter()
        .filter(|s| classify(tree, s) != s.label)
        .count()
}

impl fmt::Display for ProgramTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn write_at(tree: &ProgramTree, i: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let node = &tree.nodes[i];
            match node.kind {
                Primitive::X => f.write_str("X"),
                Primitive::E => {
                    f.write_str("E[")?;
                    for (j, c) in node.payload.as_deref().unwrap().iter().enumerate() {
                        if j > 0 {
                            f.write_str(",")?;
                        }
                        // Display for f64 is the shortest representation that round-trips
                        write!(f, "{c}")?;
                    }
                    f.write_str("]")
                }
                kind => {
                    write!(f, "({kind}")?;
                    for c in tree.children(i) {
                        f.write_str(" ")?;
                        write_at(tree, c, f)?;
                    }
                    f.write_str(")")
                }
            }
        }
        write_at(self, 0, f)
    }
}

impl FromStr for ProgramTree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parser = Parser { src: s, pos: 0 };
        let mut genes = Vec::new();
        parser.expr(&mut genes)?;
        parser.skip_ws();
        if parser.pos != s.len() {
            return Err(parser.error("trailing input"));
        }
        ProgramTree::from_genes(genes)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, what: &str) -> Error {
        Error::TreeSyntax(format!("{what} at byte {}", self.pos))
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn word(&mut self) -> &str {
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| !c.is_ascii_alphanumeric())
            .unwrap_or(rest.len());
        self.pos += len;
        &rest[..len]
    }

    fn expr(&mut self, genes: &mut Vec<Gene>) -> Result<()> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                self.skip_ws();
                let name = self.word().to_string();
                let kind: Primitive = name
                    .parse()
                    .map_err(|e: crate::primitives::UnknownPrimitive| self.error(&e.to_string()))?;
                if kind.is_terminal() {
                    return Err(self.error("terminals are not parenthesized"));
                }
                genes.push(Gene::Function(kind));
                for _ in 0..kind.arity() {
                    self.expr(genes)?;
                }
                self.skip_ws();
                if self.peek() != Some(')') {
                    return Err(self.error(&format!("expected `)` closing {kind}")));
                }
                self.pos += 1;
                Ok(())
            }
            Some(_) => {
                let name = self.word().to_string();
                match name.as_str() {
                    "X" => genes.push(Gene::X),
                    "E" => {
                        if self.peek() != Some('[') {
                            return Err(self.error("expected `[` after E"));
                        }
                        let close = self.src[self.pos..]
                            .find(']')
                            .ok_or_else(|| self.error("unterminated E payload"))?;
                        let body = &self.src[self.pos + 1..self.pos + close];
                        let payload = body
                            .split(',')
                            .map(|c| c.trim().parse::<f64>())
                            .collect::<std::result::Result<Vec<_>, _>>()
                            .map_err(|e| self.error(&format!("bad E component: {e}")))?;
                        self.pos += close + 1;
                        genes.push(Gene::E(payload));
                    }
                    "" => return Err(self.error("unexpected character")),
                    other => return Err(self.error(&format!("unknown terminal `{other}`"))),
                }
                Ok(())
            }
            None => Err(self.error("unexpected end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fit2() -> SampleSet {
        SampleSet::from_samples(&[
            Sample::new(vec![0.5, -0.5], 0),
            Sample::new(vec![-1.0, 0.25], 1),
            Sample::new(vec![0.0, 1.0], 0),
        ])
    }

    fn t(s: &str) -> ProgramTree {
        s.parse().unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let s = Sample::new(vec![0.5, -0.5], 0);
        assert_eq!(evaluate(&t("X"), &s), Value::Vector(vec![0.5, -0.5]));
        assert_eq!(evaluate(&t("(SUM X)"), &s), Value::Scalar(0.0));
        assert_eq!(
            evaluate(&t("(ADD X E[1,1])"), &s),
            Value::Vector(vec![1.5, 0.5])
        );
    }

    #[test]
    fn classify_examples() {
        let s = Sample::new(vec![1.0, -2.0, 0.5], 0);
        assert_eq!(classify(&t("(SUB X X)"), &s), 0);
        assert_eq!(classify(&t("X"), &s), 1);
        let nan = t("(MUL E[1e308,1e308,1e308] (SUB (MUL X E[1e308,1e308,1e308]) (MUL X E[1e308,1e308,1e308])))");
        let out = reduce_to_scalar(&evaluate(&nan, &s));
        assert!(out.is_nan());
        assert_eq!(classify(&nan, &s), 1);
        assert_eq!(decide(f64::NAN), 1);
        assert_eq!(decide(0.0), 0);
        assert_eq!(decide(-0.0), 0);
    }

    #[test]
    fn error_count_examples() {
        let samples = [
            Sample::new(vec![0.2, 0.3], 0),
            Sample::new(vec![-0.2, -0.3], 1),
            Sample::new(vec![0.9, -0.3], 1),
        ];
        // ABS(SUM(X)) is never negative: predicts class 0 everywhere
        assert_eq!(error_count(&t("(ABS (SUM X))"), &samples), 2);
        assert_eq!(error_count(&t("X"), &samples[..2]), 0);
    }

    #[test]
    fn size_and_depth() {
        assert_eq!(t("X").size(), 1);
        assert_eq!(t("X").depth(), 1);
        let tree = t("(ADD X E[1,2])");
        assert_eq!((tree.size(), tree.depth()), (3, 2));
        assert_eq!(tree.nodes()[0].span(), tree.size());
        let deep = t("(ADD (ABS (SLN X)) X)");
        assert_eq!(deep.depth(), 4);
        assert_eq!(deep.node_level(3), 4);
        assert_eq!(deep.node_level(4), 2);
    }

    #[test]
    fn replace_subtree_examples() {
        let tree = t("(ADD X E[1,2])");
        let spliced = tree.replace_subtree(1, &t("(MUL X X)"));
        assert_eq!(spliced.to_string(), "(ADD (MUL X X) E[1,2])");
        assert_eq!(spliced.size(), 5);
        assert_eq!(tree.replace_subtree(0, &t("X")), t("X"));
        spliced.validate(2).unwrap();
    }

    #[test]
    fn full_and_grow_shapes() {
        let fit = fit2();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let leaf = generate_tree(&mut rng, InitMethod::Full, 1, &fit);
            assert_eq!(leaf.size(), 1);
            let two = generate_tree(&mut rng, InitMethod::Full, 2, &fit);
            assert!(!two.nodes()[0].kind().is_terminal());
            assert!(two.nodes()[1..].iter().all(|n| n.kind().is_terminal()));
            let full = generate_tree(&mut rng, InitMethod::Full, 4, &fit);
            assert_eq!(full.depth(), 4);
            // every terminal sits at the bottom level
            for i in 0..full.size() {
                if full.nodes()[i].kind().is_terminal() {
                    assert_eq!(full.node_level(i), 4);
                }
            }
            let grow = generate_tree(&mut rng, InitMethod::Grow, 5, &fit);
            assert!(grow.depth() <= 5);
            grow.validate(2).unwrap();
            for node in grow.nodes() {
                if let Some(p) = node.payload() {
                    assert!((0..fit.len()).any(|r| fit.row(r) == p));
                }
            }
        }
    }

    #[test]
    fn parse_errors() {
        for bad in [
            "",
            "(ADD X)",
            "(ADD X X X)",
            "(FOO X)",
            "E[",
            "E[a]",
            "(X)",
            "Y",
            "X X",
        ] {
            assert!(
                bad.parse::<ProgramTree>().is_err(),
                "{bad:?} should not parse"
            );
        }
    }

    #[test]
    fn serialization_keeps_full_precision() {
        let tree = t("(DIV X E[0.1,-0.30000000000000004])");
        assert_eq!(tree.to_string(), "(DIV X E[0.1,-0.30000000000000004])");
    }

    fn arb_tree() -> impl Strategy<Value = (ProgramTree, u64)> {
        (any::<u64>(), 1usize..8, any::<bool>()).prop_map(|(seed, depth, full)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let fit = SampleSet::from_samples(&[
                Sample::new(vec![0.1, -0.7, 1.0 / 3.0], 0),
                Sample::new(vec![-0.2, 0.9, 2e-9], 1),
            ]);
            let method = if full {
                InitMethod::Full
            } else {
                InitMethod::Grow
            };
            (generate_tree(&mut rng, method, depth, &fit), seed)
        })
    }

    proptest! {
        #[test]
        fn text_round_trip((tree, _) in arb_tree()) {
            let back: ProgramTree = tree.to_string().parse().unwrap();
            prop_assert_eq!(back, tree);
        }

        #[test]
        fn splices_stay_valid((a, seed) in arb_tree(), (b, _) in arb_tree()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let i = select_node(&mut rng, &a);
            let out = a.replace_subtree(i, &b);
            prop_assert!(out.validate(3).is_ok());
            prop_assert_eq!(out.size(), a.size() - a.nodes()[i].span() + b.size());
        }

        #[test]
        fn output_shape((tree, _) in arb_tree(), x in prop::collection::vec(-1.0f64..1.0, 3)) {
            let out = evaluate(&tree, &Sample::new(x.clone(), 0));
            match &out {
                Value::Scalar(_) => {}
                Value::Vector(v) => prop_assert_eq!(v.len(), 3),
            }
            let class = classify(&tree, &Sample::new(x, 0));
            prop_assert!(class <= 1);
        }
    }
}
