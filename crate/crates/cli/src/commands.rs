//! The five subcommands.
//!
//! `generate` renders a synthetic cohort to disk; `optimize` runs one
//! search strategy and writes a self-describing run directory; `compare`
//! tabulates finished runs; `landscape` exports per-configuration
//! (PSNR, objective) pairs from an exhaustive run for external plotting;
//! `verify` replays a ledger and demands a byte-identical reproduction.
//!
//! Commands print a few `key value` lines to stdout (`compare` and
//! `landscape` print comma-delimited tables) and reserve stderr for
//! errors, so output is scriptable without flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use bahop_core::cohort::{self, CohortConfig, CohortProfile};
use bahop_core::config::RunConfig;
use bahop_core::ledger::{Decision, Ledger};
use bahop_core::optimize::{self, OptimizeSetup};
use bahop_core::oracle::{self, CostReport, EvalCache};
use bahop_core::params::{ParamSpace, PreprocParams, AXES, AXIS_NAMES};
use bahop_core::similarity::set_psnr;
use bahop_core::{pnm, replay, Error};
use serde_json::json;

use crate::store::{self, DirLock};

const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

// --- generate ----------------------------------------------------------------

pub struct GenerateArgs {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub slides: Option<u32>,
    pub slide_px: Option<u32>,
    pub patch_px: Option<u32>,
    pub profile: Option<String>,
    pub force: bool,
}

pub fn generate(out: &Path, args: GenerateArgs) -> anyhow::Result<()> {
    let mut config = match &args.config {
        Some(path) => read_config(path)?.cohort,
        None => CohortConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(slides) = args.slides {
        config.slides = slides;
    }
    if let Some(px) = args.slide_px {
        config.slide_px = px;
    }
    if let Some(px) = args.patch_px {
        config.patch_px = px;
    }
    if let Some(name) = &args.profile {
        config.profile = parse_profile(name)?;
    }
    config.validate()?;

    let id = store::cohort_id(&config)?;
    let dir = store::cohort_dir(out, &id);
    let populated = dir.exists() && fs::read_dir(&dir)?.next().is_some();
    let matches_existing = populated && manifest_matches(&dir.join("manifest.json"), &config);
    if populated && !matches_existing && !args.force {
        return Err(store::Failure::new(
            4,
            format!(
                "{} holds content that does not match this configuration; pass --force to regenerate",
                dir.display()
            ),
        ));
    }

    let _lock = DirLock::claim(&dir)?;
    if populated && !matches_existing {
        store::wipe_except_lock(&dir)?;
    }
    fs::create_dir_all(dir.join("slides"))?;

    let cohort = cohort::generate(&config)?;
    let mut slide_entries = Vec::with_capacity(cohort.slides.len());
    let mut labels = String::from("slide,name,label\n");
    for slide in &cohort.slides {
        let image = cohort::render_slide(&config, slide.id)?;
        let file = format!("slides/slide-{:03}.ppm", slide.id);
        let bytes = pnm::encode(&image);
        fs::write(dir.join(&file), &bytes)?;
        let label = store::label_name(slide.label);
        slide_entries.push(json!({
            "id": slide.id,
            "name": slide.name,
            "label": label,
            "file": file,
            "sha256": store::sha256_hex(&bytes),
        }));
        labels.push_str(&format!("{},{},{label}\n", slide.id, slide.name));
    }
    // No timestamps here: two generates of the same configuration must
    // produce byte-identical manifests.
    let manifest = json!({
        "format": "bahop-cohort/1",
        "cohort": id,
        "tool_version": TOOL_VERSION,
        "config": serde_json::to_value(config)?,
        "slides": slide_entries,
    });
    fs::write(dir.join("manifest.json"), pretty(&manifest)?)?;
    fs::write(dir.join("labels.csv"), labels)?;

    say(format!("cohort {id}"))?;
    say(format!("path {}", dir.display()))?;
    say(format!("slides {}", cohort.slides.len()))?;
    Ok(())
}

/// True when the directory already holds this exact configuration, which
/// makes regeneration an idempotent overwrite rather than a conflict.
fn manifest_matches(manifest_path: &Path, config: &CohortConfig) -> bool {
    let Ok(text) = fs::read_to_string(manifest_path) else {
        return false;
    };
    let Ok(value) = serde_json::from_str::<serde_json::Value>(&text) else {
        return false;
    };
    match serde_json::to_value(config) {
        Ok(expected) => value.get("config") == Some(&expected),
        Err(_) => false,
    }
}

fn parse_profile(name: &str) -> anyhow::Result<CohortProfile> {
    match name {
        "mixed" => Ok(CohortProfile::Mixed),
        "pale-lesion" => Ok(CohortProfile::PaleLesion),
        other => Err(Error::Config(format!(
            "cohort.profile: unknown profile {other:?}; choose mixed or pale-lesion"
        ))
        .into()),
    }
}

// --- optimize ----------------------------------------------------------------

pub struct OptimizeArgs {
    pub config: Option<PathBuf>,
    pub strategy: Option<String>,
    pub seed: Option<u64>,
    pub budget: Option<String>,
    pub scorer: Option<String>,
}

pub fn optimize(out: &Path, args: OptimizeArgs) -> anyhow::Result<()> {
    let mut config = match &args.config {
        Some(path) => read_config(path)?,
        None => RunConfig::from_toml("")?,
    };
    if let Some(strategy) = &args.strategy {
        config.run.strategy = strategy.clone();
    }
    if let Some(seed) = args.seed {
        config.run.seed = seed;
    }
    if let Some(scorer) = &args.scorer {
        config.run.scorer = scorer.clone();
    }
    if let Some(budget) = &args.budget {
        config.run.budget = if budget == "full" {
            config.space.build()?.len() as u32
        } else {
            budget.parse().map_err(|_| {
                Error::Config(format!(
                    "run.budget: {budget:?} is neither an iteration count nor \"full\""
                ))
            })?
        };
    }
    config.validate()?;

    let space = config.space();
    let axes: Vec<Vec<u32>> = (0..AXES).map(|i| space.axis(i).to_vec()).collect();
    let snapshot = json!({
        "strategy": config.run.strategy,
        "seed": config.run.seed,
        "budget": config.run.budget,
        "scorer": config.run.scorer,
        "start": config.start.canonical_key(),
        "space": axes,
        "cohort": serde_json::to_value(config.cohort)?,
    });
    let id = format!(
        "{}-{}",
        config.run.strategy,
        store::sha12(snapshot.to_string().as_bytes())
    );
    let dir = store::run_dir(out, &id);
    let started_unix = store::unix_now();
    let _lock = DirLock::claim(&dir)?;

    let cohort = cohort::generate(&config.cohort)?;
    let mut cache = EvalCache::new();
    let setup = OptimizeSetup {
        cohort: &cohort,
        space: space.clone(),
        start: config.start.clone(),
        seed: config.run.seed,
        budget: config.run.budget,
        scorer: config.scorer(),
    };
    let report = optimize::by_name(&config.run.strategy)?.run(&setup, &mut cache)?;
    let summary = report
        .ledger
        .summary()
        .expect("a finished run always has a summary")
        .clone();

    fs::write(dir.join("ledger.jsonl"), report.ledger.to_jsonl()?)?;

    let best_eval = oracle::evaluate(&cohort, &report.best_params, config.scorer(), &mut cache)?;
    let values = report.best_params.values();
    let named: serde_json::Map<String, serde_json::Value> = AXIS_NAMES
        .iter()
        .zip(values)
        .map(|(name, v)| (name.to_string(), json!(v)))
        .collect();
    let best = json!({
        "key": report.best_params.canonical_key(),
        "params": named,
        "objective": report.best_objective,
        "correct": best_eval.correct,
        "total": best_eval.total,
        "patches": best_eval.patches,
    });
    fs::write(dir.join("best.json"), pretty(&best)?)?;

    let cost = CostReport {
        patches: summary.total_patches,
        sim_latency_minutes: summary.total_sim_latency_minutes,
        sim_feature_bytes: summary.total_sim_feature_bytes,
    };
    fs::write(dir.join("cost.json"), pretty(&serde_json::to_value(cost)?)?)?;

    let mut patches = String::from("slide,name,label,predicted,retained,top_score\n");
    for (slide, eval) in cohort.slides.iter().zip(&best_eval.slides) {
        let top = eval.top_score.map(|s| format!("{s:.6}")).unwrap_or_default();
        patches.push_str(&format!(
            "{},{},{},{},{},{top}\n",
            slide.id,
            slide.name,
            store::label_name(eval.label),
            store::label_name(eval.predicted),
            eval.retained,
        ));
    }
    fs::write(dir.join("patches.csv"), patches)?;

    fs::create_dir_all(dir.join("thumbs"))?;
    let masks = oracle::segment_cohort(&cohort, &report.best_params, &mut cache)?;
    for (slide, mask) in cohort.slides.iter().zip(&masks) {
        let thumb = bahop_core::segmentation::mask_thumbnail(mask);
        let path = dir.join("thumbs").join(format!("slide-{:03}.pgm", slide.id));
        pnm::write_image(&path, &thumb)?;
    }

    let evaluated = distinct_evaluated(&report.ledger);
    let manifest = json!({
        "format": "bahop-run/1",
        "run": id,
        "tool_version": TOOL_VERSION,
        "cohort": store::cohort_id(&config.cohort)?,
        "config": snapshot,
        "artifacts": ["ledger.jsonl", "best.json", "cost.json", "patches.csv", "thumbs/"],
        "exhaustive": evaluated == space.len(),
        "started_unix": started_unix,
        "finished_unix": store::unix_now(),
    });
    fs::write(dir.join("manifest.json"), pretty(&manifest)?)?;

    say(format!("run {id}"))?;
    say(format!("path {}", dir.display()))?;
    say(format!(
        "best {} {:.6}",
        summary.best_params, summary.best_objective
    ))?;
    say(format!(
        "evals {} of {} iterations ({} gate skips, {} duplicate skips)",
        summary.expensive_evals,
        summary.iterations,
        summary.gate_skips,
        summary.duplicate_skips
    ))?;
    Ok(())
}

/// Number of distinct configurations the run actually scored.
fn distinct_evaluated(ledger: &Ledger) -> usize {
    let mut keys: Vec<&str> = ledger
        .records()
        .iter()
        .filter(|r| r.decision == Decision::Evaluated)
        .map(|r| r.params.as_str())
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}

// --- compare -----------------------------------------------------------------

pub fn compare(out: &Path, runs: &[String]) -> anyhow::Result<()> {
    let mut rows = Vec::with_capacity(runs.len());
    for id in runs {
        let text = store::read_run_ledger(out, id)?;
        let ledger = Ledger::from_jsonl(&text)
            .with_context(|| format!("run {id}: ledger does not verify"))?;
        let summary = ledger
            .summary()
            .expect("from_jsonl rejects ledgers without a summary")
            .clone();
        rows.push((ledger.header().strategy.clone(), id.clone(), summary));
    }
    rows.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));

    let mut table =
        String::from("strategy,run,best_objective,expensive_evals,sim_latency_minutes,sim_feature_bytes\n");
    for (strategy, id, s) in rows {
        table.push_str(&format!(
            "{strategy},{id},{:.6},{},{:.4},{}\n",
            s.best_objective, s.expensive_evals, s.total_sim_latency_minutes, s.total_sim_feature_bytes
        ));
    }
    say_raw(&table)
}

// --- landscape ---------------------------------------------------------------

pub fn landscape(
    out: &Path,
    run: &str,
    reference: Option<String>,
    output: Option<PathBuf>,
) -> anyhow::Result<()> {
    let text = store::read_run_ledger(out, run)?;
    let ledger = Ledger::from_jsonl(&text)?;
    let header = ledger.header();
    let axes: [Vec<u32>; AXES] = header
        .space
        .clone()
        .try_into()
        .map_err(|_| Error::Malformed("ledger space must list six axis grids".into()))?;
    let space = ParamSpace::new(axes)?;

    // Keep the first objective per configuration; a gated run may list the
    // same key again later as a duplicate skip, never as a second eval.
    let mut scores: BTreeMap<String, f64> = BTreeMap::new();
    for record in ledger.records() {
        if record.decision == Decision::Evaluated {
            let objective = record
                .objective
                .expect("ledger validation guarantees evaluated records score");
            scores.entry(record.params.clone()).or_insert(objective);
        }
    }
    if scores.len() != space.len() {
        return Err(Error::Config(format!(
            "run {run} evaluated {} of {} configurations; the landscape export \
             needs an exhaustive run such as `optimize --strategy grid --budget full`",
            scores.len(),
            space.len()
        ))
        .into());
    }

    let summary = ledger
        .summary()
        .expect("from_jsonl rejects ledgers without a summary");
    let reference_key = reference.unwrap_or_else(|| summary.best_params.clone());
    let reference_params = PreprocParams::from_key(&reference_key)?;
    if !space.contains(&reference_params) {
        return Err(Error::Config(format!(
            "reference {reference_key} is outside the run's search space"
        ))
        .into());
    }

    let cohort = cohort::generate(&header.cohort)?;
    let mut cache = EvalCache::new();
    let reference_masks = oracle::segment_cohort(&cohort, &reference_params, &mut cache)?;
    let reference_thumbs = oracle::cohort_thumbnails(&cohort, &reference_masks)?;

    let mut table = String::from("params,psnr_db_vs_reference,objective\n");
    for params in space.enumerate() {
        let key = params.canonical_key();
        let masks = oracle::segment_cohort(&cohort, &params, &mut cache)?;
        let thumbs = oracle::cohort_thumbnails(&cohort, &masks)?;
        let psnr = set_psnr(&thumbs, &reference_thumbs)?;
        let objective = scores[&key];
        table.push_str(&format!("{key},{},{objective:.6}\n", psnr.to_db_string()));
    }

    match output {
        Some(path) => {
            fs::write(&path, &table)?;
            say(format!("wrote {} rows to {}", space.len(), path.display()))?;
        }
        None => say_raw(&table)?,
    }
    Ok(())
}

// --- verify ------------------------------------------------------------------

pub fn verify(out: &Path, run: &str) -> anyhow::Result<()> {
    let text = store::read_run_ledger(out, run)?;
    let summary = replay::verify_ledger(&text)?;
    say(format!("verified run {run}"))?;
    say(format!(
        "iterations {} evals {} best {} {:.6}",
        summary.iterations, summary.expensive_evals, summary.best_params, summary.best_objective
    ))?;
    Ok(())
}

// --- shared ------------------------------------------------------------------

fn read_config(path: &Path) -> anyhow::Result<RunConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    Ok(RunConfig::from_toml(&text)?)
}

fn pretty(value: &serde_json::Value) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// Writes one line to stdout; a vanished reader becomes `PipeClosed`
/// rather than the panic `println!` would raise.
fn say(line: impl AsRef<str>) -> anyhow::Result<()> {
    emit(line.as_ref(), true)
}

/// Writes already-terminated text (tables build their own newlines).
fn say_raw(text: &str) -> anyhow::Result<()> {
    emit(text, false)
}

fn emit(text: &str, newline: bool) -> anyhow::Result<()> {
    use std::io::Write;
    let mut stdout = std::io::stdout().lock();
    let result = stdout
        .write_all(text.as_bytes())
        .and_then(|()| if newline { stdout.write_all(b"\n") } else { Ok(()) });
    match result {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Err(store::PipeClosed.into()),
        other => Ok(other?),
    }
}
