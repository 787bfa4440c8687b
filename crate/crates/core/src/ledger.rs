//! Append-only run ledger.
//!
//! Every optimization run emits one JSON line per event: a header with the
//! full run configuration, one record per iteration, and a closing summary.
//! Serialization is deterministic — struct field order is fixed and floats
//! use the shortest round-trip form — so two runs of the same configuration
//! produce byte-identical ledgers, and replay verification can compare
//! files directly.
//!
//! The iteration budget counts proposals, not evaluations: a proposal
//! rejected by the similarity gate or skipped as a duplicate still consumes
//! its iteration and is recorded as such.

use serde::{Deserialize, Serialize};

use crate::cohort::CohortConfig;
use crate::error::Error;
use crate::oracle::CostReport;
use crate::Result;

/// Ledger format tag; bump on breaking schema changes.
pub const LEDGER_FORMAT: &str = "bahop-ledger/1";
/// The only budget accounting policy this format supports.
pub const BUDGET_POLICY: &str = "skips-consume-iterations";

/// What happened to one proposed configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    /// Scored by the full evaluation path.
    Evaluated,
    /// Rendered cheaply, then rejected by the similarity gate.
    SkippedByGate,
    /// Proposal key already evaluated earlier in the run; nothing rendered.
    SkippedDuplicate,
}

/// Run configuration, written once as the first ledger line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub format: String,
    pub strategy: String,
    pub seed: u64,
    pub budget: u32,
    pub budget_policy: String,
    pub gate_enabled: bool,
    pub greedy_accept: bool,
    /// Whether previously evaluated keys are skipped instead of re-scored.
    /// When false, repeat evaluations of one key are legal ledger content.
    pub dedup: bool,
    /// How the gate threshold was chosen; absent when the gate is off.
    pub tau_mode: Option<String>,
    /// Gate threshold in dB, 4 decimals; absent when the gate is off.
    pub tau_db: Option<String>,
    /// Canonical key of the (snapped) starting configuration.
    pub start: String,
    /// Per-axis value grids of the search space, canonical axis order.
    pub space: Vec<Vec<u32>>,
    pub cohort: CohortConfig,
    pub objective: String,
    pub scorer: String,
}

/// One iteration, written in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    /// 1-based iteration index, strictly increasing.
    pub iter: u32,
    /// Canonical key of the proposed configuration.
    pub params: String,
    pub decision: Decision,
    /// Gate comparison result ("inf" or 4-decimal dB); absent for
    /// duplicate skips (nothing was rendered) and gate-off evaluations.
    pub gate_psnr: Option<String>,
    /// Objective of this proposal; present iff evaluated.
    pub objective: Option<f64>,
    /// Retained patches of this proposal; present iff evaluated.
    pub patches: Option<u64>,
    pub sim_latency_minutes: Option<f64>,
    pub sim_feature_bytes: Option<u64>,
    /// Incumbent after this iteration.
    pub best_params: String,
    pub best_objective: f64,
}

/// Closing line with run totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub iterations: u32,
    pub expensive_evals: u32,
    pub gate_skips: u32,
    pub duplicate_skips: u32,
    pub best_params: String,
    pub best_objective: f64,
    pub total_patches: u64,
    pub total_sim_latency_minutes: f64,
    pub total_sim_feature_bytes: u64,
}

/// One parsed ledger line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Line {
    Header(Header),
    Record(Record),
    Summary(Summary),
}

/// A complete run ledger: header, records, summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Ledger {
    header: Header,
    records: Vec<Record>,
    summary: Option<Summary>,
}

impl Ledger {
    /// Opens a ledger for a new run.
    pub fn new(header: Header) -> Result<Self> {
        if header.format != LEDGER_FORMAT {
            return Err(Error::Malformed(format!(
                "ledger format {:?}, this build writes {LEDGER_FORMAT:?}",
                header.format
            )));
        }
        if header.budget_policy != BUDGET_POLICY {
            return Err(Error::Malformed(format!(
                "budget policy {:?} is not {BUDGET_POLICY:?}",
                header.budget_policy
            )));
        }
        Ok(Ledger { header, records: Vec::new(), summary: None })
    }

    pub fn header(&self) -> &Header {
        &self.header
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn summary(&self) -> Option<&Summary> {
        self.summary.as_ref()
    }

    /// Appends one iteration record, enforcing the invariants that hold
    /// line by line: contiguous iteration numbering, per-decision field
    /// shape, unique evaluated keys (when the run deduplicates), and
    /// monotone incumbent tracking.
    pub fn push(&mut self, record: Record) -> Result<()> {
        if self.summary.is_some() {
            return Err(Error::Malformed("ledger already closed by a summary".into()));
        }
        let expected = self.records.len() as u32 + 1;
        if record.iter != expected {
            return Err(Error::Malformed(format!(
                "iteration {} out of order, expected {expected}",
                record.iter
            )));
        }
        if record.iter > self.header.budget {
            return Err(Error::Malformed(format!(
                "iteration {} exceeds budget {}",
                record.iter, self.header.budget
            )));
        }
        let evaluated_fields =
            record.objective.is_some() && record.patches.is_some()
                && record.sim_latency_minutes.is_some()
                && record.sim_feature_bytes.is_some();
        let skip_fields = record.objective.is_none()
            && record.patches.is_none()
            && record.sim_latency_minutes.is_none()
            && record.sim_feature_bytes.is_none();
        match record.decision {
            Decision::Evaluated => {
                if !evaluated_fields {
                    return Err(Error::Malformed(format!(
                        "iteration {}: evaluated record is missing result fields",
                        record.iter
                    )));
                }
                if self.header.dedup
                    && self.records.iter().any(|r| {
                        r.decision == Decision::Evaluated && r.params == record.params
                    })
                {
                    return Err(Error::Malformed(format!(
                        "iteration {}: configuration {} was already evaluated",
                        record.iter, record.params
                    )));
                }
            }
            Decision::SkippedByGate => {
                if !skip_fields || record.gate_psnr.is_none() {
                    return Err(Error::Malformed(format!(
                        "iteration {}: gate skip must carry a gate value and no results",
                        record.iter
                    )));
                }
            }
            Decision::SkippedDuplicate => {
                if !skip_fields || record.gate_psnr.is_some() {
                    return Err(Error::Malformed(format!(
                        "iteration {}: duplicate skip renders nothing, so no gate value",
                        record.iter
                    )));
                }
            }
        }
        if let Some(last) = self.records.last() {
            if record.best_objective < last.best_objective {
                return Err(Error::Malformed(format!(
                    "iteration {}: incumbent objective regressed from {} to {}",
                    record.iter, last.best_objective, record.best_objective
                )));
            }
        }
        self.records.push(record);
        Ok(())
    }

    /// Closes the ledger, computing the summary from the records.
    pub fn finish(&mut self) -> Result<&Summary> {
        if self.summary.is_some() {
            return Err(Error::Malformed("ledger already closed by a summary".into()));
        }
        let last = self.records.last().ok_or_else(|| {
            Error::Malformed("a run must record at least one iteration".into())
        })?;
        let mut counts = [0u32; 3];
        let mut cost = CostReport::zero();
        for r in &self.records {
            match r.decision {
                Decision::Evaluated => counts[0] += 1,
                Decision::SkippedByGate => counts[1] += 1,
                Decision::SkippedDuplicate => counts[2] += 1,
            }
            if let Some(p) = r.patches {
                cost.accumulate(&CostReport::for_patches(p));
            }
        }
        self.summary = Some(Summary {
            iterations: self.records.len() as u32,
            expensive_evals: counts[0],
            gate_skips: counts[1],
            duplicate_skips: counts[2],
            best_params: last.best_params.clone(),
            best_objective: last.best_objective,
            total_patches: cost.patches,
            total_sim_latency_minutes: cost.sim_latency_minutes,
            total_sim_feature_bytes: cost.sim_feature_bytes,
        });
        Ok(self.summary.as_ref().expect("just set"))
    }

    /// Serializes the complete ledger to JSON lines. Deterministic: the
    /// same ledger always produces the same bytes.
    pub fn to_jsonl(&self) -> Result<String> {
        let summary = self.summary.as_ref().ok_or_else(|| {
            Error::Malformed("ledger is not closed; call finish() first".into())
        })?;
        let mut out = String::new();
        let mut write = |line: &Line| -> Result<()> {
            out.push_str(&serde_json::to_string(line).map_err(io_error)?);
            out.push('\n');
            Ok(())
        };
        write(&Line::Header(self.header.clone()))?;
        for r in &self.records {
            write(&Line::Record(r.clone()))?;
        }
        write(&Line::Summary(summary.clone()))?;
        Ok(out)
    }

    /// Parses and fully validates a JSONL ledger: header first, summary
    /// last, every per-record invariant, and summary totals that match the
    /// records exactly.
    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines
            .next()
            .ok_or_else(|| Error::Malformed("empty ledger".into()))?;
        let header = match parse_line(first, 1)? {
            Line::Header(h) => h,
            _ => return Err(Error::Malformed("first ledger line must be the header".into())),
        };
        let mut ledger = Ledger::new(header)?;
        let mut summary: Option<Summary> = None;
        for (i, raw) in lines {
            if summary.is_some() {
                return Err(Error::Malformed(format!(
                    "line {}: content after the summary",
                    i + 1
                )));
            }
            match parse_line(raw, i + 1)? {
                Line::Header(_) => {
                    return Err(Error::Malformed(format!("line {}: second header", i + 1)))
                }
                Line::Record(r) => ledger.push(r)?,
                Line::Summary(s) => summary = Some(s),
            }
        }
        let declared = summary
            .ok_or_else(|| Error::Malformed("ledger has no summary line".into()))?;
        let computed = ledger.finish()?.clone();
        if declared != computed {
            return Err(Error::Verification(format!(
                "summary does not match records: declared {declared:?}, computed {computed:?}"
            )));
        }
        Ok(ledger)
    }
}

fn parse_line(raw: &str, lineno: usize) -> Result<Line> {
    serde_json::from_str(raw)
        .map_err(|e| Error::Malformed(format!("ledger line {lineno}: {e}")))
}

fn io_error(e: serde_json::Error) -> Error {
    Error::Malformed(format!("ledger serialization: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> Header {
        Header {
            format: LEDGER_FORMAT.into(),
            strategy: "bahop".into(),
            seed: 11,
            budget: 4,
            budget_policy: BUDGET_POLICY.into(),
            gate_enabled: true,
            greedy_accept: true,
            dedup: true,
            tau_mode: Some("calibrated".into()),
            tau_db: Some("25.0281".into()),
            start: "8:7:4:80:16:8".into(),
            space: vec![vec![8, 9], vec![3], vec![2], vec![40], vec![8], vec![8]],
            cohort: CohortConfig::default(),
            objective: "slide-accuracy".into(),
            scorer: "pale-penalized".into(),
        }
    }

    fn evaluated(iter: u32, key: &str, objective: f64, best: &str, best_obj: f64) -> Record {
        Record {
            iter,
            params: key.into(),
            decision: Decision::Evaluated,
            gate_psnr: Some("inf".into()),
            objective: Some(objective),
            patches: Some(100),
            sim_latency_minutes: Some(0.02),
            sim_feature_bytes: Some(3200),
            best_params: best.into(),
            best_objective: best_obj,
        }
    }

    fn gate_skip(iter: u32, key: &str, best: &str, best_obj: f64) -> Record {
        Record {
            iter,
            params: key.into(),
            decision: Decision::SkippedByGate,
            gate_psnr: Some("21.5000".into()),
            objective: None,
            patches: None,
            sim_latency_minutes: None,
            sim_feature_bytes: None,
            best_params: best.into(),
            best_objective: best_obj,
        }
    }

    fn dup_skip(iter: u32, key: &str, best: &str, best_obj: f64) -> Record {
        Record {
            iter,
            params: key.into(),
            decision: Decision::SkippedDuplicate,
            gate_psnr: None,
            objective: None,
            patches: None,
            sim_latency_minutes: None,
            sim_feature_bytes: None,
            best_params: best.into(),
            best_objective: best_obj,
        }
    }

    fn full_ledger() -> Ledger {
        let mut l = Ledger::new(header()).unwrap();
        l.push(evaluated(1, "8:3:2:40:8:8", 0.75, "8:3:2:40:8:8", 0.75)).unwrap();
        l.push(gate_skip(2, "9:3:2:40:8:8", "8:3:2:40:8:8", 0.75)).unwrap();
        l.push(dup_skip(3, "8:3:2:40:8:8", "8:3:2:40:8:8", 0.75)).unwrap();
        l.push(evaluated(4, "9:3:2:40:8:8", 0.875, "9:3:2:40:8:8", 0.875)).unwrap();
        l.finish().unwrap();
        l
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let ledger = full_ledger();
        let text = ledger.to_jsonl().unwrap();
        let parsed = Ledger::from_jsonl(&text).unwrap();
        assert_eq!(parsed, ledger);
        assert_eq!(parsed.to_jsonl().unwrap(), text);
    }

    #[test]
    fn summary_tallies_decisions_and_costs() {
        let ledger = full_ledger();
        let s = ledger.summary().unwrap();
        assert_eq!(s.iterations, 4);
        assert_eq!(s.expensive_evals, 2);
        assert_eq!(s.gate_skips, 1);
        assert_eq!(s.duplicate_skips, 1);
        assert_eq!(s.total_patches, 200);
        assert_eq!(s.total_sim_feature_bytes, 6400);
        assert!((s.total_sim_latency_minutes - 0.04).abs() < 1e-12);
        assert_eq!(s.best_params, "9:3:2:40:8:8");
    }

    #[test]
    fn header_line_leads_with_kind_and_fixed_fields() {
        let text = full_ledger().to_jsonl().unwrap();
        let first = text.lines().next().unwrap();
        assert!(first.starts_with("{\"kind\":\"header\",\"format\":\"bahop-ledger/1\""));
        assert!(first.contains("\"budget_policy\":\"skips-consume-iterations\""));
    }

    #[test]
    fn out_of_order_iterations_are_rejected() {
        let mut l = Ledger::new(header()).unwrap();
        l.push(evaluated(1, "8:3:2:40:8:8", 0.75, "8:3:2:40:8:8", 0.75)).unwrap();
        let err = l.push(evaluated(3, "9:3:2:40:8:8", 0.8, "9:3:2:40:8:8", 0.8));
        assert!(err.is_err());
    }

    #[test]
    fn re_evaluating_a_key_is_rejected() {
        let mut l = Ledger::new(header()).unwrap();
        l.push(evaluated(1, "8:3:2:40:8:8", 0.75, "8:3:2:40:8:8", 0.75)).unwrap();
        let err = l.push(evaluated(2, "8:3:2:40:8:8", 0.75, "8:3:2:40:8:8", 0.75));
        assert!(err.is_err(), "duplicate evaluation must be rejected");
    }

    #[test]
    fn non_dedup_runs_may_re_evaluate_keys() {
        // A run with deduplication off re-scores revisited configurations;
        // its ledger legally repeats evaluated keys.
        let mut h = header();
        h.dedup = false;
        let mut l = Ledger::new(h).unwrap();
        l.push(evaluated(1, "8:3:2:40:8:8", 0.75, "8:3:2:40:8:8", 0.75)).unwrap();
        l.push(evaluated(2, "8:3:2:40:8:8", 0.75, "8:3:2:40:8:8", 0.75)).unwrap();
        l.finish().unwrap();
        let text = l.to_jsonl().unwrap();
        assert_eq!(Ledger::from_jsonl(&text).unwrap(), l);
    }

    #[test]
    fn decision_field_shapes_are_enforced() {
        let mut l = Ledger::new(header()).unwrap();
        // A gate skip without a gate value.
        let mut bad = gate_skip(1, "9:3:2:40:8:8", "9:3:2:40:8:8", 0.0);
        bad.gate_psnr = None;
        assert!(l.push(bad).is_err());
        // A duplicate skip carrying a gate value.
        let mut bad = dup_skip(1, "9:3:2:40:8:8", "9:3:2:40:8:8", 0.0);
        bad.gate_psnr = Some("30.0000".into());
        assert!(l.push(bad).is_err());
        // An evaluation with no objective.
        let mut bad = evaluated(1, "9:3:2:40:8:8", 0.5, "9:3:2:40:8:8", 0.5);
        bad.objective = None;
        assert!(l.push(bad).is_err());
    }

    #[test]
    fn incumbent_regression_is_rejected() {
        let mut l = Ledger::new(header()).unwrap();
        l.push(evaluated(1, "8:3:2:40:8:8", 0.75, "8:3:2:40:8:8", 0.75)).unwrap();
        let err = l.push(evaluated(2, "9:3:2:40:8:8", 0.5, "9:3:2:40:8:8", 0.5));
        assert!(err.is_err(), "best objective must never decrease");
    }

    #[test]
    fn tampered_summary_fails_verification() {
        let text = full_ledger().to_jsonl().unwrap();
        let tampered = text.replace("\"expensive_evals\":2", "\"expensive_evals\":3");
        assert!(Ledger::from_jsonl(&tampered).is_err());
        let truncated: String = text.lines().take(3).map(|l| format!("{l}\n")).collect();
        assert!(Ledger::from_jsonl(&truncated).is_err(), "missing summary must fail");
    }
}
