//! Frozen downstream inference model and the evaluation path.
//!
//! The optimizer treats the model as an oracle: preprocessing chooses which
//! patches survive; the oracle scores each surviving patch from the
//! precomputed feature table, max-pools per slide, and thresholds. Its
//! weights are fixed constants — nothing here is trained — so evaluation is
//! a pure function of (cohort, parameters, scorer).
//!
//! Evaluation cost is dominated by the per-patch scoring pass, which stands
//! in for real model inference: the cost model charges simulated latency
//! and feature I/O per retained patch. Everything upstream of scoring
//! (segmentation, thumbnails) is treated as cheap, and the median blur —
//! the slowest mask stage — is memoized per (slide, blur width).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::cohort::{Cohort, PatchFeatures, SlideData, SlideLabel};
use crate::error::Error;
use crate::params::PreprocParams;
use crate::raster::{median_blur, BitMask, RasterImage};
use crate::segmentation::{extract_patches, mask_thumbnail, segment_blurred, ThumbnailSet};
use crate::Result;

/// Max-pooled patch score above which a slide is called tumor (strict).
pub const DECISION_THRESHOLD: f64 = 1.0;
/// Mean patch saturation below which a patch counts as pale.
pub const PALE_SATURATION_CUTOFF: f32 = 40.0;
/// Simulated inference latency charged per retained patch.
pub const MINUTES_PER_PATCH: f64 = 0.0002;
/// Feature I/O charged per retained patch (float32 per dimension).
pub const FEATURE_BYTES_PER_PATCH: u64 = PatchFeatures::DIMS as u64 * 4;

/// Frozen patch scoring head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScorerKind {
    /// Pure texture head: gradient energy scaled by 1/60.
    Texture,
    /// Texture head with a pale-patch penalty: pale low-saturation regions
    /// carry strong gradients, so this head pays 0.5 for scoring them but
    /// weighs texture 0.1 — sensitive to exactly the patches the pipeline
    /// should have discarded.
    PalePenalized,
}

impl ScorerKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScorerKind::Texture => "texture",
            ScorerKind::PalePenalized => "pale-penalized",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "texture" => Ok(ScorerKind::Texture),
            "pale-penalized" => Ok(ScorerKind::PalePenalized),
            other => Err(Error::Config(format!(
                "unknown scorer {other:?} (expected \"texture\" or \"pale-penalized\")"
            ))),
        }
    }

    /// Scores one patch feature vector.
    pub fn score(&self, f: &PatchFeatures) -> f64 {
        match self {
            ScorerKind::Texture => f.texture as f64 / 60.0,
            ScorerKind::PalePenalized => {
                let pale = if f.saturation_mean < PALE_SATURATION_CUTOFF { 1.0 } else { 0.0 };
                0.1 * f.texture as f64 - 0.5 * pale
            }
        }
    }
}

/// Per-slide outcome of one evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlideEval {
    pub slide: u32,
    pub label: SlideLabel,
    pub predicted: SlideLabel,
    /// Number of patches the mask retained.
    pub retained: u32,
    /// Max-pooled score over retained patches; absent when none survive.
    pub top_score: Option<f64>,
}

/// Result of evaluating one parameter configuration over a cohort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    /// Slide-level accuracy in [0, 1].
    pub objective: f64,
    pub correct: u32,
    pub total: u32,
    /// Retained patches summed over all slides.
    pub patches: u64,
    pub slides: Vec<SlideEval>,
}

/// Simulated downstream cost of scoring a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub patches: u64,
    pub sim_latency_minutes: f64,
    pub sim_feature_bytes: u64,
}

impl CostReport {
    pub fn for_patches(patches: u64) -> Self {
        CostReport {
            patches,
            sim_latency_minutes: patches as f64 * MINUTES_PER_PATCH,
            sim_feature_bytes: patches * FEATURE_BYTES_PER_PATCH,
        }
    }

    pub fn zero() -> Self {
        Self::for_patches(0)
    }

    pub fn accumulate(&mut self, other: &CostReport) {
        self.patches += other.patches;
        self.sim_latency_minutes += other.sim_latency_minutes;
        self.sim_feature_bytes += other.sim_feature_bytes;
    }
}

/// Memo for the expensive mask stage: blurred saturation channels keyed by
/// (slide id, blur width). Masks for any parameter point then need only the
/// cheap threshold/close/filter tail.
#[derive(Debug, Default)]
pub struct EvalCache {
    blurred: HashMap<(u32, u32), RasterImage>,
}

impl EvalCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.blurred.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blurred.is_empty()
    }

    fn blurred(&mut self, slide: &SlideData, blur_k: u32) -> Result<&RasterImage> {
        use std::collections::hash_map::Entry;
        match self.blurred.entry((slide.id, blur_k)) {
            Entry::Occupied(e) => Ok(e.into_mut()),
            Entry::Vacant(v) => Ok(v.insert(median_blur(&slide.saturation, blur_k)?)),
        }
    }
}

/// Segments every slide of the cohort at one parameter point, reusing
/// memoized blur results. Masks are returned in slide order.
pub fn segment_cohort(
    cohort: &Cohort,
    p: &PreprocParams,
    cache: &mut EvalCache,
) -> Result<Vec<BitMask>> {
    let mut masks = Vec::with_capacity(cohort.slides.len());
    for slide in &cohort.slides {
        let blurred = cache.blurred(slide, p.blur_k)?;
        masks.push(segment_blurred(blurred, p)?);
    }
    Ok(masks)
}

/// Preprocessing-output thumbnails for the whole cohort, one per slide in
/// id order: binary mask renderings, the cheap artifact the similarity
/// gate compares between configurations.
pub fn cohort_thumbnails(cohort: &Cohort, masks: &[BitMask]) -> Result<ThumbnailSet> {
    if masks.len() != cohort.slides.len() {
        return Err(Error::InvalidParameter(format!(
            "{} masks for {} slides",
            masks.len(),
            cohort.slides.len()
        )));
    }
    let mut set = ThumbnailSet::new(crate::segmentation::WORKING_FACTOR);
    for (slide, mask) in cohort.slides.iter().zip(masks) {
        set.push(slide.id, mask_thumbnail(mask))?;
    }
    Ok(set)
}

/// The expensive step: scores every retained patch and pools per slide.
/// A slide with no retained patches is predicted normal.
pub fn score_cohort(cohort: &Cohort, masks: &[BitMask], scorer: ScorerKind) -> Result<EvalResult> {
    if masks.len() != cohort.slides.len() {
        return Err(Error::InvalidParameter(format!(
            "{} masks for {} slides",
            masks.len(),
            cohort.slides.len()
        )));
    }
    let mut slides = Vec::with_capacity(cohort.slides.len());
    let mut correct = 0u32;
    let mut patches_total = 0u64;
    for (slide, mask) in cohort.slides.iter().zip(masks) {
        let grid = extract_patches(mask, cohort.config.patch_px)?;
        if grid.rows() != slide.patch_rows || grid.cols() != slide.patch_cols {
            return Err(Error::InvalidParameter(format!(
                "slide {}: mask grid {}x{} does not match feature table {}x{}",
                slide.id,
                grid.rows(),
                grid.cols(),
                slide.patch_rows,
                slide.patch_cols
            )));
        }
        let mut top: Option<f64> = None;
        for &(r, c) in grid.kept() {
            let f = &slide.features[(r * slide.patch_cols + c) as usize];
            let s = scorer.score(f);
            top = Some(match top {
                Some(t) => t.max(s),
                None => s,
            });
        }
        let predicted = match top {
            Some(t) if t > DECISION_THRESHOLD => SlideLabel::Tumor,
            _ => SlideLabel::Normal,
        };
        if predicted == slide.label {
            correct += 1;
        }
        patches_total += grid.len() as u64;
        slides.push(SlideEval {
            slide: slide.id,
            label: slide.label,
            predicted,
            retained: grid.len() as u32,
            top_score: top,
        });
    }
    let total = slides.len() as u32;
    Ok(EvalResult {
        objective: correct as f64 / total as f64,
        correct,
        total,
        patches: patches_total,
        slides,
    })
}

/// Full evaluation of one parameter point: segment, then score.
pub fn evaluate(
    cohort: &Cohort,
    p: &PreprocParams,
    scorer: ScorerKind,
    cache: &mut EvalCache,
) -> Result<EvalResult> {
    let masks = segment_cohort(cohort, p, cache)?;
    score_cohort(cohort, &masks, scorer)
}
