//! Independent uniform random search.
//!
//! Each iteration draws one configuration uniformly from the space (every
//! axis value independently). A draw whose key was already evaluated is
//! recorded as a duplicate skip and still consumes its iteration, so the
//! number of distinct evaluations under a fixed budget is itself a random
//! variable — exactly the accounting the other strategies use.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use std::collections::HashSet;

use crate::oracle::{evaluate, EvalCache};
use crate::params::{ParamSpace, PreprocParams, AXES};
use crate::Result;

use super::{OptimizeSetup, RunReport, RunTracker, Strategy};

#[derive(Debug, Clone, Copy)]
pub struct RandomStrategy;

/// One uniform draw over the whole space.
pub(crate) fn draw_uniform<R: Rng>(space: &ParamSpace, rng: &mut R) -> PreprocParams {
    let mut values = [0u32; AXES];
    for (i, v) in values.iter_mut().enumerate() {
        let grid = space.axis(i);
        *v = grid[rng.gen_range(0..grid.len())];
    }
    PreprocParams::new(values)
}

impl Strategy for RandomStrategy {
    fn name(&self) -> &'static str {
        "random"
    }

    fn run(&self, setup: &OptimizeSetup, cache: &mut EvalCache) -> Result<RunReport> {
        let start = setup.space.snap(&setup.start);
        let mut tracker = RunTracker::new(setup, self.name(), false, false, true, None, start)?;
        let mut rng = ChaCha8Rng::seed_from_u64(setup.seed);
        let mut evaluated: HashSet<String> = HashSet::new();
        while tracker.used() < setup.budget {
            let p = draw_uniform(&setup.space, &mut rng);
            let key = p.canonical_key();
            if !evaluated.insert(key) {
                tracker.record_duplicate(&p)?;
                continue;
            }
            let eval = evaluate(setup.cohort, &p, setup.scorer, cache)?;
            tracker.record_eval(&p, None, &eval)?;
        }
        tracker.finish(self.name())
    }
}
