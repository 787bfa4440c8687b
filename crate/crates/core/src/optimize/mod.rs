//! Optimization strategies over the preprocessing parameter space.
//!
//! Every optimizer implements [`Strategy`] and is selected by name from the
//! registry, so callers configure runs with a string and a common setup
//! struct. All strategies share the evaluation path, the iteration-budget
//! accounting (skips consume iterations), and the ledger schema, which
//! keeps their costs directly comparable.

mod anneal;
mod bahop;
mod bayes;
mod grid;
mod random;

pub use anneal::AnnealStrategy;
pub use bahop::BahopStrategy;
pub use bayes::BayesStrategy;
pub use grid::GridStrategy;
pub use random::RandomStrategy;

use crate::cohort::Cohort;
use crate::error::Error;
use crate::ledger::{Decision, Header, Ledger, Record, BUDGET_POLICY, LEDGER_FORMAT};
use crate::oracle::{CostReport, EvalCache, EvalResult, ScorerKind};
use crate::params::{ParamSpace, PreprocParams};
use crate::similarity::PsnrValue;
use crate::Result;

/// Name of the objective every strategy maximizes.
pub const OBJECTIVE_NAME: &str = "slide-accuracy";

/// Everything a strategy needs to run.
pub struct OptimizeSetup<'a> {
    pub cohort: &'a Cohort,
    pub space: ParamSpace,
    /// Starting configuration; strategies snap it onto the space grid.
    pub start: PreprocParams,
    pub seed: u64,
    /// Iteration budget: proposals examined, including skipped ones.
    pub budget: u32,
    pub scorer: ScorerKind,
}

impl OptimizeSetup<'_> {
    fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::Config("iteration budget must be at least 1".into()));
        }
        Ok(())
    }
}

/// Outcome of one optimization run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub strategy: String,
    pub best_params: PreprocParams,
    pub best_objective: f64,
    pub ledger: Ledger,
}

/// A named optimization strategy.
pub trait Strategy {
    fn name(&self) -> &'static str;

    /// Runs to budget exhaustion. The cache only memoizes deterministic
    /// intermediate images; sharing it across runs changes nothing but
    /// speed.
    fn run(&self, setup: &OptimizeSetup, cache: &mut EvalCache) -> Result<RunReport>;
}

/// All registered strategy names, in registry order.
pub fn strategy_names() -> Vec<&'static str> {
    vec!["bahop", "bahop-nogate", "bahop-walk", "grid", "random", "anneal", "bayes"]
}

/// Looks up a strategy by registry name.
pub fn by_name(name: &str) -> Result<Box<dyn Strategy>> {
    match name {
        "bahop" => Ok(Box::new(BahopStrategy::standard())),
        "bahop-nogate" => Ok(Box::new(BahopStrategy::without_gate())),
        "bahop-walk" => Ok(Box::new(BahopStrategy::random_walk())),
        "grid" => Ok(Box::new(GridStrategy)),
        "random" => Ok(Box::new(RandomStrategy)),
        "anneal" => Ok(Box::new(AnnealStrategy)),
        "bayes" => Ok(Box::new(BayesStrategy)),
        other => Err(Error::Config(format!(
            "unknown strategy {other:?} (expected one of {})",
            strategy_names().join(", ")
        ))),
    }
}

// ---------------------------------------------------------------------------
// Shared run bookkeeping
// ---------------------------------------------------------------------------

/// Ledger-backed incumbent tracking shared by all strategies.
pub(crate) struct RunTracker {
    ledger: Ledger,
    iter: u32,
    best_params: PreprocParams,
    best_objective: Option<f64>,
}

impl RunTracker {
    pub(crate) fn new(
        setup: &OptimizeSetup,
        strategy: &'static str,
        gate_enabled: bool,
        greedy_accept: bool,
        dedup: bool,
        tau: Option<(&'static str, f64)>,
        start: PreprocParams,
    ) -> Result<Self> {
        setup.validate()?;
        let header = Header {
            format: LEDGER_FORMAT.into(),
            strategy: strategy.into(),
            seed: setup.seed,
            budget: setup.budget,
            budget_policy: BUDGET_POLICY.into(),
            gate_enabled,
            greedy_accept,
            dedup,
            tau_mode: tau.map(|(mode, _)| mode.to_string()),
            tau_db: tau.map(|(_, db)| format!("{db:.4}")),
            start: start.canonical_key(),
            space: (0..crate::params::AXES).map(|i| setup.space.axis(i).to_vec()).collect(),
            cohort: setup.cohort.config,
            objective: OBJECTIVE_NAME.into(),
            scorer: setup.scorer.name().into(),
        };
        Ok(RunTracker {
            ledger: Ledger::new(header)?,
            iter: 0,
            best_params: start,
            best_objective: None,
        })
    }

    /// Incumbent objective; a skip cannot legally precede the first
    /// evaluation (there would be no incumbent to track).
    fn incumbent(&self) -> Result<f64> {
        self.best_objective.ok_or_else(|| {
            Error::Degenerate(
                "a proposal was skipped before any evaluation established an incumbent".into(),
            )
        })
    }

    /// Iterations recorded so far.
    pub(crate) fn used(&self) -> u32 {
        self.iter
    }

    /// Records an evaluation and updates the incumbent on strict
    /// improvement. Returns true when the incumbent moved.
    pub(crate) fn record_eval(
        &mut self,
        params: &PreprocParams,
        gate_psnr: Option<PsnrValue>,
        eval: &EvalResult,
    ) -> Result<bool> {
        let improved = match self.best_objective {
            None => true,
            Some(b) => eval.objective > b,
        };
        if improved {
            self.best_params = *params;
            self.best_objective = Some(eval.objective);
        }
        self.iter += 1;
        let cost = CostReport::for_patches(eval.patches);
        self.ledger.push(Record {
            iter: self.iter,
            params: params.canonical_key(),
            decision: Decision::Evaluated,
            gate_psnr: gate_psnr.map(PsnrValue::to_db_string),
            objective: Some(eval.objective),
            patches: Some(eval.patches),
            sim_latency_minutes: Some(cost.sim_latency_minutes),
            sim_feature_bytes: Some(cost.sim_feature_bytes),
            best_params: self.best_params.canonical_key(),
            best_objective: self.best_objective.expect("set by first evaluation"),
        })?;
        Ok(improved)
    }

    /// Records a proposal rejected by the similarity gate.
    pub(crate) fn record_gate_skip(
        &mut self,
        params: &PreprocParams,
        gate_psnr: PsnrValue,
    ) -> Result<()> {
        let best = self.incumbent()?;
        self.iter += 1;
        self.ledger.push(Record {
            iter: self.iter,
            params: params.canonical_key(),
            decision: Decision::SkippedByGate,
            gate_psnr: Some(gate_psnr.to_db_string()),
            objective: None,
            patches: None,
            sim_latency_minutes: None,
            sim_feature_bytes: None,
            best_params: self.best_params.canonical_key(),
            best_objective: best,
        })
    }

    /// Records a proposal skipped because its key was already evaluated.
    pub(crate) fn record_duplicate(&mut self, params: &PreprocParams) -> Result<()> {
        let best = self.incumbent()?;
        self.iter += 1;
        self.ledger.push(Record {
            iter: self.iter,
            params: params.canonical_key(),
            decision: Decision::SkippedDuplicate,
            gate_psnr: None,
            objective: None,
            patches: None,
            sim_latency_minutes: None,
            sim_feature_bytes: None,
            best_params: self.best_params.canonical_key(),
            best_objective: best,
        })
    }

    pub(crate) fn finish(mut self, strategy: &'static str) -> Result<RunReport> {
        if self.best_objective.is_none() {
            return Err(Error::Degenerate(
                "run ended without a single evaluation".into(),
            ));
        }
        self.ledger.finish()?;
        Ok(RunReport {
            strategy: strategy.into(),
            best_params: self.best_params,
            best_objective: self.best_objective.expect("checked above"),
            ledger: self.ledger,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_resolves_every_name() {
        for name in strategy_names() {
            let s = by_name(name).unwrap();
            assert_eq!(s.name(), name);
        }
        assert!(by_name("gradient-descent").is_err());
    }
}
