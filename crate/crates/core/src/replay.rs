//! Full-run replay verification.
//!
//! A ledger header carries everything needed to reproduce its run: cohort
//! settings, search space, start, strategy, seed, budget, and scorer.
//! Verification regenerates the cohort, reruns the strategy, and demands
//! that the regenerated ledger match the original byte for byte — not just
//! the summary, every line. Any divergence is reported with the first
//! differing line.

use crate::cohort;
use crate::error::Error;
use crate::ledger::{Ledger, Summary};
use crate::optimize::{self, OptimizeSetup, OBJECTIVE_NAME};
use crate::oracle::{EvalCache, ScorerKind};
use crate::params::{ParamSpace, PreprocParams, AXES};
use crate::Result;

/// Parses, re-runs, and byte-compares a ledger. Returns the verified
/// summary on success.
pub fn verify_ledger(text: &str) -> Result<Summary> {
    let original = Ledger::from_jsonl(text)?;
    let header = original.header();
    if header.objective != OBJECTIVE_NAME {
        return Err(Error::Verification(format!(
            "ledger optimizes {:?}, this build computes {OBJECTIVE_NAME:?}",
            header.objective
        )));
    }

    let cohort = cohort::generate(&header.cohort)?;
    let axes: [Vec<u32>; AXES] = header
        .space
        .clone()
        .try_into()
        .map_err(|_| Error::Malformed("ledger space must list six axis grids".into()))?;
    let setup = OptimizeSetup {
        cohort: &cohort,
        space: ParamSpace::new(axes)?,
        start: PreprocParams::from_key(&header.start)?,
        seed: header.seed,
        budget: header.budget,
        scorer: ScorerKind::from_name(&header.scorer)?,
    };
    let strategy = optimize::by_name(&header.strategy)?;
    let mut cache = EvalCache::new();
    let report = strategy.run(&setup, &mut cache)?;
    let regenerated = report.ledger.to_jsonl()?;

    if regenerated != text {
        return Err(Error::Verification(first_divergence(text, &regenerated)));
    }
    Ok(report
        .ledger
        .summary()
        .expect("a finished run always has a summary")
        .clone())
}

fn first_divergence(original: &str, regenerated: &str) -> String {
    for (i, (a, b)) in original.lines().zip(regenerated.lines()).enumerate() {
        if a != b {
            return format!(
                "replay diverges at line {}: ledger has {a:?}, replay produced {b:?}",
                i + 1
            );
        }
    }
    let (a, b) = (original.lines().count(), regenerated.lines().count());
    format!("replay diverges in length: ledger has {a} lines, replay produced {b}")
}
