//! Best-of-run selection.
//!
//! The baseline and parsimony strategies keep the individual with the fewest
//! training errors ever seen (smaller size on ties). The validation
//! strategies extract the non-dominated `(errors, size)` individuals of each
//! generation, score them on the validation set and keep the one with the
//! fewest validation errors (smaller size on ties).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::eval::BatchEvaluator;
use crate::evolution::{EffortLedger, Individual};
use crate::sample::SampleSet;

/// `(errors, size)`, compared lexicographically.
pub type Criteria = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    Baseline,
    Validation,
    Parsimony,
    Both,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Baseline,
        Strategy::Validation,
        Strategy::Parsimony,
        Strategy::Both,
    ];

    pub fn uses_validation(self) -> bool {
        matches!(self, Strategy::Validation | Strategy::Both)
    }

    pub fn lexicographic(self) -> bool {
        matches!(self, Strategy::Parsimony | Strategy::Both)
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Baseline => "baseline",
            Strategy::Validation => "validation",
            Strategy::Parsimony => "parsimony",
            Strategy::Both => "both",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown strategy `{s}` (expected baseline, validation, parsimony or both)"
                ))
            })
    }
}

/// True when `a` is no worse than `b` on both objectives and better on one.
pub fn dominates(a: Criteria, b: Criteria) -> bool {
    a.0 <= b.0 && a.1 <= b.1 && (a.0 < b.0 || a.1 < b.1)
}

/// Non-dominated members of a population, one per distinct criteria point.
#[derive(Debug, Clone)]
pub struct ParetoFront<'a> {
    pub members: Vec<&'a Individual>,
}

impl ParetoFront<'_> {
    pub fn points(&self) -> Vec<Criteria> {
        self.members.iter().map(|m| m.criteria()).collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Extracts the front by sorting on `(errors, size, position)` and sweeping.
///
/// Members come out in increasing error order; the representative of each
/// point is its first occurrence in the population.
pub fn pareto_front(pop: &[Individual]) -> ParetoFront<'_> {
    let mut order: Vec<(Criteria, usize)> = pop
        .iter()
        .enumerate()
        .map(|(i, ind)| (ind.criteria(), i))
        .collect();
    order.sort_unstable();
    let mut members = Vec::new();
    let mut best_size = usize::MAX;
    let mut last_errors = None;
    for ((errors, size), i) in order {
        // only the smallest size of each error level can be non-dominated
        if last_errors == Some(errors) {
            continue;
        }
        last_errors = Some(errors);
        if size < best_size {
            best_size = size;
            members.push(&pop[i]);
        }
    }
    ParetoFront { members }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Incumbent {
    pub individual: Individual,
    pub generation: usize,
    /// Training errors for baseline/parsimony, validation errors otherwise.
    pub errors: usize,
    pub size: usize,
}

impl Incumbent {
    pub fn criteria(&self) -> Criteria {
        (self.errors, self.size)
    }
}

#[derive(Debug, Clone)]
pub struct BestOfRunTracker {
    strategy: Strategy,
    incumbent: Option<Incumbent>,
}

impl BestOfRunTracker {
    pub fn new(strategy: Strategy) -> Self {
        Self {
            strategy,
            incumbent: None,
        }
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn incumbent(&self) -> Option<&Incumbent> {
        self.incumbent.as_ref()
    }

    pub fn into_incumbent(self) -> Option<Incumbent> {
        self.incumbent
    }

    fn offer(&mut self, candidate: &Individual, errors: usize, generation: usize) {
        let criteria = (errors, candidate.size());
        let better = match &self.incumbent {
            None => true,
            Some(inc) => criteria < inc.criteria(),
        };
        if better {
            self.incumbent = Some(Incumbent {
                individual: candidate.clone(),
                generation,
                errors,
                size: criteria.1,
            });
        }
    }

    /// Considers every member of a population evaluated on the full training set.
    pub fn update_baseline(&mut self, pop: &[Individual], generation: usize) {
        for ind in pop {
            self.offer(
                ind,
                ind.fit_errors.expect("evaluated population"),
                generation,
            );
        }
    }

    /// Scores every front member on `validation`, charging the ledger.
    pub fn update_validation(
        &mut self,
        front: &ParetoFront<'_>,
        validation: &SampleSet,
        generation: usize,
        ledger: &mut EffortLedger,
    ) {
        assert!(!validation.is_empty(), "validation set must be nonempty");
        let mut evaluator = BatchEvaluator::new();
        for member in &front.members {
            let errors = evaluator.error_count(&member.tree, validation);
            ledger.charge(member.size(), validation.len());
            self.offer(member, errors, generation);
        }
    }
}
