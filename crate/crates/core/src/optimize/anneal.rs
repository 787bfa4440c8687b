//! Simulated annealing over one-step grid moves.
//!
//! Classic Metropolis acceptance on a geometric cooling schedule: the
//! temperature at the k-th proposal is `0.05 * 0.97^(k-1)`. Equal or
//! better proposals are always accepted; worse ones with probability
//! `exp(delta / T)`.
//!
//! Every scored configuration is memoized. When the walk re-proposes one,
//! the acceptance decision reuses the memoized objective and the iteration
//! is recorded as a duplicate skip — the expensive evaluation path never
//! runs twice for the same key, so annealing's evaluation count measures
//! distinct configurations only.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::oracle::{evaluate, EvalCache};
use crate::Result;

use super::{OptimizeSetup, RunReport, RunTracker, Strategy};

/// Temperature of the first proposal.
const INITIAL_TEMPERATURE: f64 = 0.05;
/// Geometric cooling factor per proposal.
const COOLING: f64 = 0.97;

#[derive(Debug, Clone, Copy)]
pub struct AnnealStrategy;

impl Strategy for AnnealStrategy {
    fn name(&self) -> &'static str {
        "anneal"
    }

    fn run(&self, setup: &OptimizeSetup, cache: &mut EvalCache) -> Result<RunReport> {
        let start = setup.space.snap(&setup.start);
        let mut tracker = RunTracker::new(setup, self.name(), false, false, true, None, start)?;
        let mut rng = ChaCha8Rng::seed_from_u64(setup.seed);

        let start_eval = evaluate(setup.cohort, &start, setup.scorer, cache)?;
        tracker.record_eval(&start, None, &start_eval)?;

        let mut memo: HashMap<String, f64> = HashMap::new();
        memo.insert(start.canonical_key(), start_eval.objective);

        let mut current = start;
        let mut current_obj = start_eval.objective;
        let mut proposal_index = 0u32;

        while tracker.used() < setup.budget {
            let temperature = INITIAL_TEMPERATURE * COOLING.powi(proposal_index as i32);
            proposal_index += 1;

            let proposal = setup.space.perturb(&current, &mut rng)?;
            let key = proposal.canonical_key();

            let objective = match memo.get(&key) {
                Some(&obj) => {
                    tracker.record_duplicate(&proposal)?;
                    obj
                }
                None => {
                    let eval = evaluate(setup.cohort, &proposal, setup.scorer, cache)?;
                    memo.insert(key, eval.objective);
                    tracker.record_eval(&proposal, None, &eval)?;
                    eval.objective
                }
            };

            let accept = if objective >= current_obj {
                true
            } else {
                let delta = objective - current_obj;
                rng.gen::<f64>() < (delta / temperature).exp()
            };
            if accept {
                current = proposal;
                current_obj = objective;
            }
        }

        tracker.finish(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohort::{generate, CohortConfig};
    use crate::ledger::Decision;
    use crate::oracle::ScorerKind;
    use crate::params::{ParamSpace, PreprocParams};

    fn cohort8() -> crate::cohort::Cohort {
        generate(&CohortConfig { seed: 5, slides: 8, slide_px: 1024, ..CohortConfig::default() }).unwrap()
    }

    #[test]
    fn cooling_schedule_matches_the_constants() {
        assert!((INITIAL_TEMPERATURE * COOLING.powi(0) - 0.05).abs() < 1e-15);
        assert!((INITIAL_TEMPERATURE * COOLING.powi(10) - 0.05 * 0.97f64.powi(10)).abs() < 1e-15);
    }

    #[test]
    fn revisits_never_reevaluate() {
        let cohort = cohort8();
        let setup = OptimizeSetup {
            cohort: &cohort,
            space: ParamSpace::small_space(),
            start: PreprocParams::new([8, 7, 4, 100, 16, 8]),
            seed: 23,
            budget: 120,
            scorer: ScorerKind::PalePenalized,
        };
        let mut cache = EvalCache::new();
        let report = AnnealStrategy.run(&setup, &mut cache).unwrap();
        let summary = report.ledger.summary().unwrap();
        assert_eq!(summary.iterations, 120);
        assert!(summary.duplicate_skips > 0, "a 120-step walk revisits configurations");
        // Distinct evaluated keys == evaluation count (the memo worked).
        let mut keys: Vec<&str> = report
            .ledger
            .records()
            .iter()
            .filter(|r| r.decision == Decision::Evaluated)
            .map(|r| r.params.as_str())
            .collect();
        let evals = keys.len();
        keys.sort_unstable();
        keys.dedup();
        assert_eq!(keys.len(), evals);
    }

    #[test]
    fn anneal_improves_on_the_start_and_is_deterministic() {
        let cohort = cohort8();
        let setup = OptimizeSetup {
            cohort: &cohort,
            space: ParamSpace::small_space(),
            start: PreprocParams::new([8, 7, 4, 100, 16, 8]),
            seed: 31,
            budget: 100,
            scorer: ScorerKind::PalePenalized,
        };
        let mut cache = EvalCache::new();
        let a = AnnealStrategy.run(&setup, &mut cache).unwrap();
        assert!(a.best_objective > 0.75, "got {}", a.best_objective);
        let b = AnnealStrategy.run(&setup, &mut cache).unwrap();
        assert_eq!(a.ledger.to_jsonl().unwrap(), b.ledger.to_jsonl().unwrap());
    }
}
