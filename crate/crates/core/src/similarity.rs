//! Thumbnail similarity: exact PSNR on 8-bit rasters, pooled PSNR over
//! thumbnail sets, and calibration of the gate threshold used by the
//! perturbation search.
//!
//! Squared error is accumulated in integers and divided exactly once, so a
//! given pair of images has one well-defined PSNR with no float
//! accumulation drift. Identical inputs produce a distinguished infinite
//! value rather than a large sentinel.

use crate::error::Error;
use crate::params::PreprocParams;
use crate::raster::RasterImage;
use crate::segmentation::ThumbnailSet;
use crate::Result;

/// Peak signal-to-noise ratio in decibels.
///
/// `Infinite` is the exact-match case (zero squared error); it compares
/// greater than every finite value and therefore passes any finite gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PsnrValue {
    Infinite,
    Finite(f64),
}

impl PsnrValue {
    /// Decibel value with exact matches mapped to +inf.
    pub fn db(self) -> f64 {
        match self {
            PsnrValue::Infinite => f64::INFINITY,
            PsnrValue::Finite(v) => v,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, PsnrValue::Infinite)
    }

    /// Fixed ledger rendering: `inf`, or the value with four fractional
    /// digits.
    pub fn to_db_string(self) -> String {
        match self {
            PsnrValue::Infinite => "inf".to_string(),
            PsnrValue::Finite(v) => format!("{v:.4}"),
        }
    }

    /// Parses the `to_db_string` rendering.
    pub fn from_db_string(s: &str) -> Result<Self> {
        if s == "inf" {
            return Ok(PsnrValue::Infinite);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::Malformed(format!("unreadable PSNR value {s:?}")))?;
        if !v.is_finite() {
            return Err(Error::Malformed(format!("non-finite PSNR value {s:?}")));
        }
        Ok(PsnrValue::Finite(v))
    }
}

impl PartialOrd for PsnrValue {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.db().partial_cmp(&other.db())
    }
}

/// PSNR between two rasters of identical geometry, in decibels.
///
/// The mean squared error pools every sample of every channel; the peak is
/// the 8-bit maximum 255.
pub fn psnr(a: &RasterImage, b: &RasterImage) -> Result<PsnrValue> {
    let (sse, n) = sum_squared_error(a, b)?;
    Ok(psnr_from_sse(sse, n))
}

/// Pooled PSNR over two thumbnail sets.
///
/// Sets must be non-empty, share the downsample factor, and list the same
/// slide ids in the same order with matching geometry per slide. Squared
/// error and sample counts are pooled across all slides before the single
/// division — this is not an average of per-slide PSNRs.
pub fn set_psnr(a: &ThumbnailSet, b: &ThumbnailSet) -> Result<PsnrValue> {
    if a.factor() != b.factor() {
        return Err(Error::InvalidParameter(format!(
            "thumbnail factors differ: {} vs {}",
            a.factor(),
            b.factor()
        )));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidParameter("cannot compare empty thumbnail sets".into()));
    }
    if a.len() != b.len() {
        return Err(Error::InvalidParameter(format!(
            "thumbnail sets differ in size: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let mut sse = 0u64;
    let mut n = 0u64;
    for ((id_a, img_a), (id_b, img_b)) in a.entries().iter().zip(b.entries()) {
        if id_a != id_b {
            return Err(Error::InvalidParameter(format!(
                "thumbnail sets disagree on slide ids: {id_a} vs {id_b}"
            )));
        }
        let (s, c) = sum_squared_error(img_a, img_b)?;
        sse += s;
        n += c;
    }
    Ok(psnr_from_sse(sse, n))
}

fn sum_squared_error(a: &RasterImage, b: &RasterImage) -> Result<(u64, u64)> {
    if a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels() {
        return Err(Error::InvalidParameter(format!(
            "image geometries differ: {}x{}x{} vs {}x{}x{}",
            a.width(),
            a.height(),
            a.channels(),
            b.width(),
            b.height(),
            b.channels()
        )));
    }
    let mut sse = 0u64;
    for (&pa, &pb) in a.data().iter().zip(b.data()) {
        let d = pa as i64 - pb as i64;
        sse += (d * d) as u64;
    }
    Ok((sse, a.data().len() as u64))
}

fn psnr_from_sse(sse: u64, n: u64) -> PsnrValue {
    if sse == 0 {
        return PsnrValue::Infinite;
    }
    let mse = sse as f64 / n as f64;
    PsnrValue::Finite(10.0 * (255.0f64 * 255.0 / mse).log10())
}

/// Gate threshold applied to proposal thumbnails, in decibels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityThreshold {
    db: f64,
    calibrated: bool,
}

/// Threshold used when calibration finds no finite neighbor PSNR.
pub const FALLBACK_TAU_DB: f64 = 30.0;

impl SimilarityThreshold {
    pub fn calibrated(db: f64) -> Self {
        Self { db, calibrated: true }
    }

    pub fn fallback() -> Self {
        Self { db: FALLBACK_TAU_DB, calibrated: false }
    }

    /// Fixed threshold supplied by configuration rather than calibration.
    pub fn fixed(db: f64) -> Self {
        Self { db, calibrated: false }
    }

    pub fn db(self) -> f64 {
        self.db
    }

    pub fn is_calibrated(self) -> bool {
        self.calibrated
    }

    /// Gate rule: a proposal passes iff its PSNR strictly exceeds the
    /// threshold. Infinite PSNR passes every threshold.
    pub fn passes(self, value: PsnrValue) -> bool {
        value.db() > self.db
    }
}

/// Calibrates the gate threshold around a starting configuration.
///
/// The probe nudges `seg_thresh` by one raw sample step in each direction
/// (staying within the 8-bit range; this is a field nudge, not a grid
/// step), renders each neighbor's thumbnails through `render`, and takes
/// the minimum finite pooled PSNR against the start thumbnails. Neighbors
/// with infinite PSNR carry no information about tolerable change and are
/// excluded; if every neighbor is excluded the fixed fallback threshold is
/// used.
pub fn calibrate_tau<F>(
    start: &PreprocParams,
    start_thumbs: &ThumbnailSet,
    mut render: F,
) -> Result<SimilarityThreshold>
where
    F: FnMut(&PreprocParams) -> Result<ThumbnailSet>,
{
    let mut best: Option<f64> = None;
    for delta in [-1i64, 1] {
        let nudged = start.seg_thresh as i64 + delta;
        if !(0..=255).contains(&nudged) {
            continue;
        }
        let mut neighbor = *start;
        neighbor.seg_thresh = nudged as u32;
        let thumbs = render(&neighbor)?;
        if let PsnrValue::Finite(db) = set_psnr(&thumbs, start_thumbs)? {
            best = Some(match best {
                Some(b) => b.min(db),
                None => db,
            });
        }
    }
    Ok(match best {
        Some(db) => SimilarityThreshold::calibrated(db),
        None => SimilarityThreshold::fallback(),
    })
}
