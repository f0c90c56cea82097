use gpclass::eval::error_count;
use gpclass::evolution::{
    evaluate_population, init_population, next_generation, EffortLedger, EvolutionParams,
    Individual,
};
use gpclass::selection::{pareto_front, BestOfRunTracker, Strategy};
use gpclass::tree::error_count as reference_error_count;
use gpclass::{Sample, SampleSet};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fit_set(seed: u64, len: usize) -> SampleSet {
    let samples: Vec<Sample> = (0..len)
        .map(|i| {
            let a = ((i as u64 * 31 + seed) % 17) as f64 / 8.0 - 1.0;
            let b = ((i as u64 * 7 + seed * 3) % 13) as f64 / 6.0 - 1.0;
            Sample::new(vec![a, b, a * b], u8::from(a + b > 0.1))
        })
        .collect();
    SampleSet::from_samples(&samples)
}

fn small_params(pop: usize) -> EvolutionParams {
    EvolutionParams {
        population_size: pop,
        generations: 6,
        ..Default::default()
    }
}

#[test]
fn uncached_effort_matches_per_individual_sum() {
    let fit = fit_set(4, 25);
    let params = EvolutionParams {
        cache_fitness: false,
        ..small_params(40)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut ledger = EffortLedger::with_log();
    let mut pop = init_population(&mut rng, &params, &fit);
    evaluate_population(&mut pop, &fit, &mut ledger);
    let mut by_population: u64 = pop.iter().map(|i| (i.size() * fit.len()) as u64).sum();
    for _ in 0..params.generations {
        pop = next_generation(&mut rng, &pop, &params, &fit, &mut ledger);
        by_population += pop
            .iter()
            .map(|i| (i.size() * fit.len()) as u64)
            .sum::<u64>();
    }
    let log = ledger.log().unwrap();
    assert_eq!(log.len(), 40 * 7);
    let by_log: u64 = log.iter().map(|&(s, n)| (s * n) as u64).sum();
    assert_eq!(ledger.total(), by_log);
    assert_eq!(ledger.total(), by_population);
}

#[test]
fn cached_effort_never_exceeds_uncached() {
    let fit = fit_set(9, 30);
    let run = |cache_fitness: bool| {
        let params = EvolutionParams {
            cache_fitness,
            ..small_params(50)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut ledger = EffortLedger::new();
        let mut pop = init_population(&mut rng, &params, &fit);
        evaluate_population(&mut pop, &fit, &mut ledger);
        for _ in 0..params.generations {
            pop = next_generation(&mut rng, &pop, &params, &fit, &mut ledger);
        }
        (pop, ledger.total())
    };
    let (cached_pop, cached) = run(true);
    let (uncached_pop, uncached) = run(false);
    assert!(cached < uncached);
    // caching changes only the bill, never the search
    let trees = |p: &[Individual]| {
        p.iter()
            .map(|i| (i.tree.to_string(), i.fit_errors))
            .collect::<Vec<_>>()
    };
    assert_eq!(trees(&cached_pop), trees(&uncached_pop));
}

#[test]
fn cached_fitness_is_correct() {
    let fit = fit_set(2, 40);
    let params = small_params(60);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut ledger = EffortLedger::new();
    let mut pop = init_population(&mut rng, &params, &fit);
    evaluate_population(&mut pop, &fit, &mut ledger);
    let samples: Vec<Sample> = fit.iter().collect();
    for _ in 0..params.generations {
        pop = next_generation(&mut rng, &pop, &params, &fit, &mut ledger);
        for ind in &pop {
            assert_eq!(
                ind.fit_errors,
                Some(reference_error_count(&ind.tree, &samples))
            );
            assert_eq!(ind.fit_errors, Some(error_count(&ind.tree, &fit)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn baseline_incumbent_is_running_lexicographic_minimum(seed in any::<u64>(), pop_size in 2usize..40) {
        let fit = fit_set(seed % 97, 20);
        let params = small_params(pop_size);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ledger = EffortLedger::new();
        let mut tracker = BestOfRunTracker::new(Strategy::Baseline);
        let mut pop = init_population(&mut rng, &params, &fit);
        evaluate_population(&mut pop, &fit, &mut ledger);
        let mut best: Option<((usize, usize), usize)> = None;
        let mut previous: Option<(usize, usize)> = None;
        for generation in 0..=params.generations {
            if generation > 0 {
                pop = next_generation(&mut rng, &pop, &params, &fit, &mut ledger);
            }
            tracker.update_baseline(&pop, generation);
            for ind in &pop {
                let c = ind.criteria();
                if best.is_none_or(|(b, _)| c < b) {
                    best = Some((c, generation));
                }
            }
            let inc = tracker.incumbent().unwrap();
            prop_assert_eq!((inc.criteria(), inc.generation), best.unwrap());
            if let Some(p) = previous {
                prop_assert!(inc.criteria() <= p);
            }
            previous = Some(inc.criteria());
        }
    }

    #[test]
    fn validation_incumbent_never_worsens(seed in any::<u64>()) {
        let fit = fit_set(seed % 89, 20);
        let validation = fit_set(seed % 83 + 1, 10);
        let params = small_params(20);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ledger = EffortLedger::new();
        let mut tracker = BestOfRunTracker::new(Strategy::Both);
        let mut pop = init_population(&mut rng, &params, &fit);
        evaluate_population(&mut pop, &fit, &mut ledger);
        let mut previous: Option<(usize, usize)> = None;
        for generation in 0..=params.generations {
            if generation > 0 {
                pop = next_generation(&mut rng, &pop, &params, &fit, &mut ledger);
            }
            let before = ledger.total();
            let front = pareto_front(&pop);
            let charge: u64 = front.members.iter().map(|m| (m.size() * validation.len()) as u64).sum();
            tracker.update_validation(&front, &validation, generation, &mut ledger);
            prop_assert_eq!(ledger.total() - before, charge);
            let inc = tracker.incumbent().unwrap();
            if let Some(p) = previous {
                prop_assert!(inc.criteria() <= p);
            }
            previous = Some(inc.criteria());
        }
    }
}
