//! Exhaustive grid sweep in enumeration order.
//!
//! Evaluates configurations in the space's lexicographic order until the
//! budget or the space runs out. Deterministic and seed-independent; the
//! reported best is the first configuration attaining the maximum
//! objective, since later ties do not strictly improve.

use crate::oracle::{evaluate, EvalCache};
use crate::Result;

use super::{OptimizeSetup, RunReport, RunTracker, Strategy};

#[derive(Debug, Clone, Copy)]
pub struct GridStrategy;

impl Strategy for GridStrategy {
    fn name(&self) -> &'static str {
        "grid"
    }

    fn run(&self, setup: &OptimizeSetup, cache: &mut EvalCache) -> Result<RunReport> {
        let start = setup.space.snap(&setup.start);
        let mut tracker = RunTracker::new(setup, self.name(), false, false, true, None, start)?;
        for p in setup.space.enumerate() {
            if tracker.used() >= setup.budget {
                break;
            }
            let eval = evaluate(setup.cohort, &p, setup.scorer, cache)?;
            tracker.record_eval(&p, None, &eval)?;
        }
        tracker.finish(self.name())
    }
}
