//! Generational evolution: selection, variation and effort accounting.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::eval::BatchEvaluator;
use crate::primitives::Primitive;
use crate::sample::SampleSet;
use crate::tree::{generate_tree, random_payload, select_node, InitMethod, ProgramTree};

/// Attempts made after a first variation result exceeds the depth limit.
pub const MAX_RETRIES: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub tree: ProgramTree,
    /// Misclassifications on the fitness-evaluation set, once evaluated.
    pub fit_errors: Option<usize>,
}

impl Individual {
    pub fn new(tree: ProgramTree) -> Self {
        Self {
            tree,
            fit_errors: None,
        }
    }

    pub fn size(&self) -> usize {
        self.tree.size()
    }

    pub fn is_evaluated(&self) -> bool {
        self.fit_errors.is_some()
    }

    /// `(errors, size)`; panics when unevaluated.
    pub fn criteria(&self) -> (usize, usize) {
        (
            self.fit_errors.expect("individual has not been evaluated"),
            self.size(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorRates {
    pub crossover: f64,
    pub standard_mutation: f64,
    pub swap_mutation: f64,
    pub shrink_mutation: f64,
    pub ephemeral_mutation: f64,
    pub reproduction: f64,
}

impl Default for OperatorRates {
    fn default() -> Self {
        Self {
            crossover: 0.7,
            standard_mutation: 0.05,
            swap_mutation: 0.05,
            shrink_mutation: 0.05,
            ephemeral_mutation: 0.05,
            reproduction: 0.1,
        }
    }
}

impl OperatorRates {
    /// Only reproduction; every offspring is a verbatim copy.
    pub fn reproduction_only() -> Self {
        Self {
            crossover: 0.0,
            standard_mutation: 0.0,
            swap_mutation: 0.0,
            shrink_mutation: 0.0,
            ephemeral_mutation: 0.0,
            reproduction: 1.0,
        }
    }

    fn as_array(&self) -> [(Operator, f64); 6] {
        [
            (Operator::Crossover, self.crossover),
            (Operator::StandardMutation, self.standard_mutation),
            (Operator::SwapMutation, self.swap_mutation),
            (Operator::ShrinkMutation, self.shrink_mutation),
            (Operator::EphemeralMutation, self.ephemeral_mutation),
            (Operator::Reproduction, self.reproduction),
        ]
    }

    /// Roulette draw over the six rates.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Operator {
        let mut u: f64 = rng.gen();
        let rates = self.as_array();
        for (op, p) in rates {
            if u < p {
                return op;
            }
            u -= p;
        }
        // rounding slack lands on the last operator with nonzero weight
        rates
            .iter()
            .rev()
            .find(|(_, p)| *p > 0.0)
            .map(|(op, _)| *op)
            .unwrap_or(Operator::Reproduction)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operator {
    Crossover,
    StandardMutation,
    SwapMutation,
    ShrinkMutation,
    EphemeralMutation,
    Reproduction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionParams {
    pub population_size: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub rates: OperatorRates,
    /// Break fitness ties in tournaments by smaller size.
    pub lexicographic: bool,
    pub max_depth: usize,
    /// Ramped half-and-half depth range, inclusive.
    pub init_depth: (usize, usize),
    /// Depth bound of subtrees grown by standard mutation.
    pub mutation_depth: usize,
    /// When false, every offspring is re-evaluated, copies included.
    pub cache_fitness: bool,
}

impl Default for EvolutionParams {
    fn default() -> Self {
        Self {
            population_size: 1000,
            generations: 100,
            tournament_size: 2,
            rates: OperatorRates::default(),
            lexicographic: false,
            max_depth: 17,
            init_depth: (2, 5),
            mutation_depth: 5,
            cache_fitness: true,
        }
    }
}

impl EvolutionParams {
    pub fn validate(&self) -> Result<()> {
        let rates = self.rates.as_array();
        if rates.iter().any(|(_, p)| p.is_nan() || *p < 0.0) {
            return Err(Error::Config("operator rates must be nonnegative".into()));
        }
        let total: f64 = rates.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "operator rates must sum to 1, got {total}"
            )));
        }
        if self.population_size < 2 {
            return Err(Error::Config("population size must be at least 2".into()));
        }
        if self.tournament_size < 1 {
            return Err(Error::Config("tournament size must be at least 1".into()));
        }
        let (lo, hi) = self.init_depth;
        if lo < 1 || lo > hi || hi > self.max_depth {
            return Err(Error::Config(format!(
                "initial depth range {lo}..={hi} must lie within 1..={}",
                self.max_depth
            )));
        }
        if self.mutation_depth < 1 {
            return Err(Error::Config("mutation depth must be at least 1".into()));
        }
        Ok(())
    }
}

/// Running count of primitive evaluations, weighted by evaluation-set size.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EffortLedger {
    total: u64,
    log: Option<Vec<(usize, usize)>>,
}

impl EffortLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// A ledger that also records every `(tree size, samples)` charge.
    pub fn with_log() -> Self {
        Self {
            total: 0,
            log: Some(Vec::new()),
        }
    }

    pub fn charge(&mut self, tree_size: usize, samples: usize) {
        self.total += tree_size as u64 * samples as u64;
        if let Some(log) = &mut self.log {
            log.push((tree_size, samples));
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn log(&self) -> Option<&[(usize, usize)]> {
        self.log.as_deref()
    }
}

/// Ramped half-and-half: depths cycle through the init range and alternate
/// between full and grow.
pub fn init_population<R: Rng + ?Sized>(
    rng: &mut R,
    params: &EvolutionParams,
    fit: &SampleSet,
) -> Vec<Individual> {
    let (lo, hi) = params.init_depth;
    let ramp = hi - lo + 1;
    (0..params.population_size)
        .map(|i| {
            let depth = lo + i % ramp;
            let method = if (i / ramp) % 2 == 0 {
                InitMethod::Full
            } else {
                InitMethod::Grow
            };
            Individual::new(generate_tree(rng, method, depth, fit))
        })
        .collect()
}

/// Evaluates every unevaluated individual on `fit`, charging the ledger.
pub fn evaluate_population(pop: &mut [Individual], fit: &SampleSet, ledger: &mut EffortLedger) {
    let mut evaluator = BatchEvaluator::new();
    for ind in pop.iter_mut().filter(|i| !i.is_evaluated()) {
        ind.fit_errors = Some(evaluator.error_count(&ind.tree, fit));
        ledger.charge(ind.size(), fit.len());
    }
}

/// Index of the tournament winner.
pub fn tournament_index<R: Rng + ?Sized>(
    rng: &mut R,
    pop: &[Individual],
    tournament_size: usize,
    lexicographic: bool,
) -> usize {
    let better = |a: &Individual, b: &Individual| {
        let (ea, sa) = a.criteria();
        let (eb, sb) = b.criteria();
        ea < eb || (lexicographic && ea == eb && sa < sb)
    };
    let mut best = rng.gen_range(0..pop.len());
    for _ in 1..tournament_size {
        let challenger = rng.gen_range(0..pop.len());
        if better(&pop[challenger], &pop[best]) {
            best = challenger;
        }
    }
    best
}

/// Draws `tournament_size` participants with replacement and returns the best.
pub fn tournament_select<'a, R: Rng + ?Sized>(
    rng: &mut R,
    pop: &'a [Individual],
    tournament_size: usize,
    lexicographic: bool,
) -> &'a Individual {
    &pop[tournament_index(rng, pop, tournament_size, lexicographic)]
}

/// Subtree crossover producing one offspring from `parent1`.
pub fn crossover<R: Rng + ?Sized>(
    rng: &mut R,
    parent1: &Individual,
    parent2: &Individual,
    max_depth: usize,
) -> Individual {
    for _ in 0..=MAX_RETRIES {
        let cut = select_node(rng, &parent1.tree);
        let donor = select_node(rng, &parent2.tree);
        let child = parent1
            .tree
            .replace_subtree(cut, &parent2.tree.subtree(donor));
        if child.depth() <= max_depth {
            return Individual::new(child);
        }
    }
    parent1.clone()
}

/// Replaces a random subtree with a freshly grown one.
pub fn mutate_standard<R: Rng + ?Sized>(
    rng: &mut R,
    parent: &Individual,
    max_depth: usize,
    mutation_depth: usize,
    fit: &SampleSet,
) -> Individual {
    for _ in 0..=MAX_RETRIES {
        let site = select_node(rng, &parent.tree);
        let graft = generate_tree(rng, InitMethod::Grow, mutation_depth, fit);
        let child = parent.tree.replace_subtree(site, &graft);
        if child.depth() <= max_depth {
            return Individual::new(child);
        }
    }
    parent.clone()
}

/// Changes one node to a different primitive of the same arity.
pub fn mutate_swap<R: Rng + ?Sized>(
    rng: &mut R,
    parent: &Individual,
    fit: &SampleSet,
) -> Individual {
    let site = select_node(rng, &parent.tree);
    let current = parent.tree.nodes()[site].kind();
    let choices: Vec<Primitive> = current
        .same_arity()
        .iter()
        .copied()
        .filter(|&k| k != current)
        .collect();
    let kind = *choices
        .choose(rng)
        .expect("every arity class has two members");
    let payload = (kind == Primitive::E).then(|| random_payload(rng, fit));
    Individual::new(parent.tree.with_kind(site, kind, payload.as_deref()))
}

/// Replaces a random function node with one of its children.
pub fn mutate_shrink<R: Rng + ?Sized>(rng: &mut R, parent: &Individual) -> Individual {
    let sites = parent.tree.function_indices();
    let Some(&site) = sites.choose(rng) else {
        return parent.clone();
    };
    let children = parent.tree.children(site);
    let keep = *children.choose(rng).unwrap();
    let child = parent
        .tree
        .replace_subtree(site, &parent.tree.subtree(keep));
    Individual::new(child)
}

/// Gives a random `E` node a new payload copied from `fit`.
pub fn mutate_ephemeral<R: Rng + ?Sized>(
    rng: &mut R,
    parent: &Individual,
    fit: &SampleSet,
) -> Individual {
    let sites = parent.tree.ephemeral_indices();
    let Some(&site) = sites.choose(rng) else {
        return parent.clone();
    };
    let payload = random_payload(rng, fit);
    Individual::new(parent.tree.with_kind(site, Primitive::E, Some(&payload)))
}

/// Breeds and evaluates a full replacement population.
pub fn next_generation<R: Rng + ?Sized>(
    rng: &mut R,
    pop: &[Individual],
    params: &EvolutionParams,
    fit: &SampleSet,
    ledger: &mut EffortLedger,
) -> Vec<Individual> {
    let k = params.tournament_size;
    let lex = params.lexicographic;
    let mut offspring: Vec<Individual> = (0..params.population_size)
        .map(|_| {
            let op = params.rates.draw(rng);
            let parent = tournament_select(rng, pop, k, lex);
            match op {
                Operator::Crossover => {
                    let other = tournament_select(rng, pop, k, lex);
                    crossover(rng, parent, other, params.max_depth)
                }
                Operator::StandardMutation => {
                    mutate_standard(rng, parent, params.max_depth, params.mutation_depth, fit)
                }
                Operator::SwapMutation => mutate_swap(rng, parent, fit),
                Operator::ShrinkMutation => mutate_shrink(rng, parent),
                Operator::EphemeralMutation => mutate_ephemeral(rng, parent, fit),
                Operator::Reproduction => parent.clone(),
            }
        })
        .collect();
    if !params.cache_fitness {
        for ind in &mut offspring {
            ind.fit_errors = None;
        }
    }
    evaluate_population(&mut offspring, fit, ledger);
    offspring
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::Sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fit() -> SampleSet {
        SampleSet::from_samples(
            &(0..10)
                .map(|i| {
                    let x = i as f64 / 10.0 - 0.45;
                    Sample::new(vec![x, -x, x * x], u8::from(x < 0.0))
                })
                .collect::<Vec<_>>(),
        )
    }

    fn ind(s: &str, errors: Option<usize>) -> Individual {
        Individual {
            tree: s.parse().unwrap(),
            fit_errors: errors,
        }
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn default_params_are_valid() {
        EvolutionParams::default().validate().unwrap();
        let mut bad = EvolutionParams::default();
        bad.rates.crossover = 0.8;
        assert!(bad.validate().is_err());
        bad = EvolutionParams {
            population_size: 1,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn init_population_shape() {
        let params = EvolutionParams {
            population_size: 10,
            ..Default::default()
        };
        let fit = fit();
        let a = init_population(&mut rng(1), &params, &fit);
        let b = init_population(&mut rng(1), &params, &fit);
        assert_eq!(a.len(), 10);
        assert_eq!(a, b);
        for i in &a {
            assert!(i.tree.depth() <= 5 && i.tree.depth() >= 1);
            i.tree.validate(3).unwrap();
            assert!(!i.is_evaluated());
        }
    }

    #[test]
    fn evaluation_effort() {
        let fit = fit();
        let mut pop = vec![
            ind("(ADD X X)", None),
            ind("(ADD (SUM X) (ABS X))", None),
            ind("X", None),
            ind("(ADD (ADD X X) (SUB X E[1,1,1]))", None),
        ];
        let mut ledger = EffortLedger::new();
        evaluate_population(&mut pop, &fit, &mut ledger);
        assert_eq!(ledger.total(), (3 + 5 + 1 + 7) * 10);
        assert!(pop.iter().all(Individual::is_evaluated));
        evaluate_population(&mut pop, &fit, &mut ledger);
        assert_eq!(ledger.total(), 160);

        let big: SampleSet = SampleSet::from_samples(&vec![Sample::new(vec![0.0; 3], 0); 25]);
        let mut mixed = vec![ind("X", Some(3)), ind("(ADD X (ABS X))", None)];
        let mut ledger = EffortLedger::new();
        evaluate_population(&mut mixed, &big, &mut ledger);
        assert_eq!(ledger.total(), 100);
        assert_eq!(mixed[0].fit_errors, Some(3));
    }

    #[test]
    fn tournament_rules() {
        let pop = vec![ind("(ADD X X)", Some(20)), ind("X", Some(10))];
        // with two participants drawn from a pool where index 1 is strictly better,
        // any draw that includes index 1 must return it
        for seed in 0..50 {
            let mut r = rng(seed);
            let mut probe = r.clone();
            let first = probe.gen_range(0..2usize);
            let second = probe.gen_range(0..2usize);
            let won = tournament_index(&mut r, &pop, 2, false);
            let expected = if first == 1 || second == 1 { 1 } else { 0 };
            assert_eq!(won, expected);
        }

        let ties = vec![
            ind("(ADD (ADD X X) (ADD X (ABS X)))", Some(10)),
            ind("(ADD X (ABS X))", Some(10)),
        ];
        for seed in 0..50 {
            let mut probe = rng(seed);
            let first = probe.gen_range(0..2usize);
            let second = probe.gen_range(0..2usize);
            let lex = tournament_index(&mut rng(seed), &ties, 2, true);
            let plain = tournament_index(&mut rng(seed), &ties, 2, false);
            assert_eq!(lex, if first == 1 || second == 1 { 1 } else { 0 });
            assert_eq!(plain, first);
        }
    }

    #[test]
    fn crossover_of_terminals() {
        let p1 = ind("X", Some(1));
        let p2 = ind("E[1,2,3]", Some(2));
        let child = crossover(&mut rng(0), &p1, &p2, 17);
        assert_eq!(child.tree.to_string(), "E[1,2,3]");
        assert!(!child.is_evaluated());
    }

    #[test]
    fn crossover_respects_depth_limit() {
        let fit = fit();
        let mut r = rng(9);
        for _ in 0..200 {
            let a = Individual::new(generate_tree(&mut r, InitMethod::Full, 6, &fit));
            let b = Individual::new(generate_tree(&mut r, InitMethod::Full, 6, &fit));
            let child = crossover(&mut r, &a, &b, 7);
            assert!(child.tree.depth() <= 7);
            child.tree.validate(3).unwrap();
        }
        // impossible limit: falls back to a copy that keeps its cache
        let a = ind("(ADD (ABS X) X)", Some(4));
        let b = ind("(ABS (ABS (ABS X)))", Some(4));
        let child = crossover(&mut rng(2), &a, &b, 0);
        assert_eq!(child, a);
    }

    #[test]
    fn swap_mutation() {
        let fit = fit();
        let parent = ind("(ADD X E[1,1,1])", Some(3));
        for seed in 0..100 {
            let child = mutate_swap(&mut rng(seed), &parent, &fit);
            assert_eq!(child.size(), 3);
            assert_eq!(child.tree.depth(), 2);
            assert!(!child.is_evaluated());
            assert_ne!(child.tree, parent.tree);
            let root = child.tree.nodes()[0].kind();
            assert!(Primitive::BINARY.contains(&root));
        }
        let leaf = ind("X", Some(1));
        let child = mutate_swap(&mut rng(5), &leaf, &fit);
        let node = &child.tree.nodes()[0];
        assert_eq!(node.kind(), Primitive::E);
        let payload = node.payload().unwrap();
        assert!((0..fit.len()).any(|r| fit.row(r) == payload));
    }

    #[test]
    fn shrink_mutation() {
        let parent = ind("(ADD X E[1,1,1])", Some(2));
        for seed in 0..20 {
            let child = mutate_shrink(&mut rng(seed), &parent);
            let s = child.tree.to_string();
            assert!(s == "X" || s == "E[1,1,1]");
        }
        let leaf = ind("X", Some(1));
        assert_eq!(mutate_shrink(&mut rng(0), &leaf), leaf);
    }

    #[test]
    fn ephemeral_mutation() {
        let fit = fit();
        let none = ind("(ADD X X)", Some(1));
        assert_eq!(mutate_ephemeral(&mut rng(0), &none, &fit), none);
        let parent = ind("(ADD X E[9,9,9])", Some(1));
        let child = mutate_ephemeral(&mut rng(0), &parent, &fit);
        assert_eq!(child.size(), 3);
        let payload = child.tree.nodes()[2].payload().unwrap();
        assert!((0..fit.len()).any(|r| fit.row(r) == payload));
    }

    #[test]
    fn standard_mutation() {
        let fit = fit();
        let leaf = ind("X", Some(0));
        for seed in 0..50 {
            let a = mutate_standard(&mut rng(seed), &leaf, 17, 5, &fit);
            let b = mutate_standard(&mut rng(seed), &leaf, 17, 5, &fit);
            assert_eq!(a, b);
            assert!(a.tree.depth() <= 5);
            a.tree.validate(3).unwrap();
        }
    }

    #[test]
    fn reproduction_only_generation_is_free() {
        let fit = fit();
        let params = EvolutionParams {
            population_size: 8,
            rates: OperatorRates::reproduction_only(),
            ..Default::default()
        };
        let mut ledger = EffortLedger::new();
        let mut pop = init_population(&mut rng(4), &params, &fit);
        evaluate_population(&mut pop, &fit, &mut ledger);
        let before = ledger.total();
        let next = next_generation(&mut rng(5), &pop, &params, &fit, &mut ledger);
        assert_eq!(next.len(), 8);
        assert_eq!(ledger.total(), before);
    }

    #[test]
    fn operator_frequencies_within_three_sigma() {
        let rates = OperatorRates::default();
        let mut r = rng(2024);
        let draws = 100_000usize;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..draws {
            *counts.entry(rates.draw(&mut r)).or_insert(0usize) += 1;
        }
        for (op, p) in rates.as_array() {
            let expected = draws as f64 * p;
            let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
            let got = *counts.get(&op).unwrap_or(&0) as f64;
            assert!(
                (got - expected).abs() <= 3.0 * sigma,
                "{op:?}: {got} vs {expected} ± {}",
                3.0 * sigma
            );
        }
    }
}
