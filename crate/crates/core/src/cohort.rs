//! Deterministic synthetic slide cohort.
//!
//! Slides are generated at level 0 (full resolution) from a small set of
//! painted primitives and then reduced to the working resolution used by
//! the segmentation pipeline. All texture lives in vertical period-2
//! stripes whose column parity is aligned to the 64-pixel working blocks,
//! so every working-resolution sample is an exact integer block mean and
//! the whole cohort is reproducible bit-for-bit from its seed.
//!
//! Every painted structure is aligned to the 4-block patch footprint:
//! a pale inclusion either covers a patch column band exactly or stays
//! strictly inside one patch. Alignment keeps stripe texture from
//! spilling into neighboring patches, so whether a slide scores depends
//! only on whether its own structures survive segmentation, never on
//! rendering accidents at patch borders.
//!
//! The portfolio interleaves tumor and normal archetypes so that any
//! even-length prefix is label-balanced. Tumor signal is carried by
//! high-contrast stripe cores; confounders are pale low-saturation
//! inclusions shaped so that their visibility flips on specific
//! hyperparameter moves (threshold steps, blur widths, closing radii,
//! hole-area floors, hole quotas, and tissue-area floors).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::raster::{downsample, sample_saturation, saturation_channel, RasterImage};
use crate::segmentation::WORKING_FACTOR;
use crate::Result;

/// Number of archetypes in the canonical portfolio; slide ids wrap around
/// this table, so cohorts larger than one cycle repeat archetypes.
pub const PORTFOLIO: u32 = 32;

/// Which archetype portfolio a cohort draws from.
///
/// `Mixed` is the standard benchmark: confounder-rich normals where the
/// best configurations carve pale structures out. `PaleLesion` inverts
/// the premise: every tumor's only signal is a pale halo, so aggressive
/// pale removal destroys the class signal and the best configurations
/// retain tissue instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CohortProfile {
    #[default]
    Mixed,
    PaleLesion,
}

/// Cohort generation settings. Every field has a default, so partial
/// configuration tables parse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CohortConfig {
    /// Master seed; per-slide streams are derived from it.
    pub seed: u64,
    /// Number of slides (>= 8 so label balance is meaningful).
    pub slides: u32,
    /// Level-0 slide edge length in pixels; multiple of 64.
    pub slide_px: u32,
    /// Patch edge length in pixels; multiple of 64 dividing `slide_px`.
    pub patch_px: u32,
    /// Archetype portfolio.
    pub profile: CohortProfile,
}

impl Default for CohortConfig {
    fn default() -> Self {
        CohortConfig {
            seed: 17,
            slides: 32,
            slide_px: 2048,
            patch_px: 256,
            profile: CohortProfile::Mixed,
        }
    }
}

impl CohortConfig {
    pub fn validate(&self) -> Result<()> {
        if self.slides < 8 || self.slides > 256 {
            return Err(Error::Config(format!(
                "cohort needs 8..=256 slides, got {}",
                self.slides
            )));
        }
        if self.slide_px == 0 || self.slide_px % WORKING_FACTOR != 0 {
            return Err(Error::Config(format!(
                "slide edge {} is not a positive multiple of {}",
                self.slide_px, WORKING_FACTOR
            )));
        }
        if self.working_dim() < 16 {
            return Err(Error::Config(format!(
                "slide edge {} gives a working grid under 16 samples",
                self.slide_px
            )));
        }
        if self.patch_px == 0 || self.patch_px % WORKING_FACTOR != 0 {
            return Err(Error::Config(format!(
                "patch edge {} is not a positive multiple of {}",
                self.patch_px, WORKING_FACTOR
            )));
        }
        if self.slide_px % self.patch_px != 0 {
            return Err(Error::Config(format!(
                "patch edge {} does not divide slide edge {}",
                self.patch_px, self.slide_px
            )));
        }
        // Archetypes late in the portfolio paint wide structures; reject
        // combinations whose slides cannot host them.
        let needed = (0..self.slides.min(PORTFOLIO))
            .map(|id| archetype(self.profile, id).min_working_dim())
            .max()
            .unwrap_or(16);
        if self.working_dim() < needed {
            return Err(Error::Config(format!(
                "{} slides need a working grid of at least {needed}, got {}",
                self.slides,
                self.working_dim()
            )));
        }
        Ok(())
    }

    /// Working-resolution edge length (level 0 divided by the block size).
    pub fn working_dim(&self) -> u32 {
        self.slide_px / WORKING_FACTOR
    }

    /// Patch footprint edge in working samples.
    pub fn patch_blocks(&self) -> u32 {
        self.patch_px / WORKING_FACTOR
    }

    /// Patches per axis.
    pub fn patch_grid(&self) -> u32 {
        self.slide_px / self.patch_px
    }
}

/// Ground-truth slide label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlideLabel {
    Tumor,
    Normal,
}

/// Per-patch feature vector (eight dimensions).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatchFeatures {
    pub mean: [f32; 3],
    pub variance: [f32; 3],
    pub saturation_mean: f32,
    pub texture: f32,
}

impl PatchFeatures {
    pub const DIMS: u32 = 8;

    pub fn as_array(&self) -> [f32; 8] {
        [
            self.mean[0],
            self.mean[1],
            self.mean[2],
            self.variance[0],
            self.variance[1],
            self.variance[2],
            self.saturation_mean,
            self.texture,
        ]
    }
}

/// One generated slide, reduced to everything evaluation needs: the
/// working-resolution image, its saturation channel, and the level-0
/// patch feature table. Level-0 pixels are not retained.
#[derive(Debug, Clone)]
pub struct SlideData {
    pub id: u32,
    pub name: String,
    pub label: SlideLabel,
    pub working: RasterImage,
    pub saturation: RasterImage,
    pub patch_rows: u32,
    pub patch_cols: u32,
    /// Row-major `patch_rows * patch_cols` feature vectors.
    pub features: Vec<PatchFeatures>,
}

/// A generated cohort.
#[derive(Debug, Clone)]
pub struct Cohort {
    pub config: CohortConfig,
    pub slides: Vec<SlideData>,
}

impl Cohort {
    pub fn tumor_count(&self) -> usize {
        self.slides.iter().filter(|s| s.label == SlideLabel::Tumor).count()
    }

    pub fn normal_count(&self) -> usize {
        self.slides.len() - self.tumor_count()
    }

    /// Tumor fraction, which the generator keeps inside [0.3, 0.7].
    pub fn tumor_fraction(&self) -> f64 {
        self.tumor_count() as f64 / self.slides.len() as f64
    }
}

// ---------------------------------------------------------------------------
// Palette
// ---------------------------------------------------------------------------

const WHITE: [u8; 3] = [255, 255, 255];
/// Tissue base before the per-slide tint is applied to the red channel.
const TISSUE_BASE: [u8; 3] = [225, 105, 105];
/// Tumor core stripe pair: gray swing 120, saturated block mean.
const CORE_STRIPES: ([u8; 3], [u8; 3]) = ([255, 165, 165], [135, 45, 45]);
/// Light stripe of every pale inclusion.
const PALE_HIGH: [u8; 3] = [255, 255, 255];
/// Base value of the dark pale stripe; its blue channel is lowered by
/// `2 * d` to dial in the working-resolution saturation.
const PALE_LEVEL: u8 = 207;

/// Stripe pair whose 64-column block mean has working saturation exactly
/// `s`. The mean is `(231, 231, 231 - d)`, so `s = round(255 d / 231)`;
/// the loop below inverts that rounding for the values the portfolio
/// uses. Saturation 5 has no preimage.
fn pale_stripes(s: u32) -> Result<([u8; 3], [u8; 3])> {
    for d in 1..=40u32 {
        let rounded = (2 * 255 * d + 231) / (2 * 231);
        if rounded == s {
            let dark = [PALE_LEVEL, PALE_LEVEL, PALE_LEVEL - 2 * d as u8];
            return Ok((PALE_HIGH, dark));
        }
    }
    Err(Error::Config(format!(
        "no stripe pair reaches working saturation {s}"
    )))
}

// ---------------------------------------------------------------------------
// Archetypes
// ---------------------------------------------------------------------------

/// Rectangle in working-block coordinates (row, col, height, width).
#[derive(Debug, Clone, Copy)]
struct BlockRect {
    row: u32,
    col: u32,
    h: u32,
    w: u32,
}

impl BlockRect {
    fn max_row(&self) -> u32 {
        self.row + self.h
    }

    fn max_col(&self) -> u32 {
        self.col + self.w
    }
}

#[derive(Debug, Clone, Copy)]
enum Structure {
    /// 4x4-block tumor stripe core filling the given patch exactly.
    Core { patch: (u32, u32) },
    /// Pale stripe inclusion over an explicit block rectangle.
    Pale { rect: BlockRect, s: u32 },
    /// Full-width pale band covering one patch row (blur-invariant).
    Band { patch_row: u32, s: u32 },
    /// Flat tissue island on white background.
    Island { rect: BlockRect },
}

#[derive(Debug, Clone)]
struct Archetype {
    name: &'static str,
    label: SlideLabel,
    /// Painted over white background instead of full tissue.
    island_slide: bool,
    structures: Vec<Structure>,
}

impl Archetype {
    fn min_working_dim(&self) -> u32 {
        let mut need = 16;
        for s in &self.structures {
            let extent = match s {
                Structure::Core { patch } => {
                    let r = core_rect(*patch);
                    r.max_row().max(r.max_col())
                }
                Structure::Pale { rect, .. } => rect.max_row().max(rect.max_col()),
                Structure::Band { patch_row, .. } => (patch_row + 1) * 4,
                Structure::Island { rect } => rect.max_row().max(rect.max_col()),
            };
            need = need.max(extent);
        }
        need
    }
}

fn core_rect(patch: (u32, u32)) -> BlockRect {
    BlockRect { row: patch.0 * 4, col: patch.1 * 4, h: 4, w: 4 }
}

fn pale(row: u32, col: u32, h: u32, w: u32, s: u32) -> Structure {
    Structure::Pale { rect: BlockRect { row, col, h, w }, s }
}

fn island(row: u32, col: u32, h: u32, w: u32) -> Structure {
    Structure::Island { rect: BlockRect { row, col, h, w } }
}

fn core(patch: (u32, u32)) -> Structure {
    Structure::Core { patch }
}

/// The canonical mixed portfolio. Tumors sit at even indices and normals
/// at odd ones, so every even prefix is balanced. The first eight
/// archetypes fit a 16-block working grid; later ones need 32.
fn mixed_archetype(idx: u32) -> Archetype {
    let (name, label, island_slide, structures): (
        &'static str,
        SlideLabel,
        bool,
        Vec<Structure>,
    ) = match idx {
        // --- tumors ---------------------------------------------------
        0 => ("tumor-solid", SlideLabel::Tumor, false, vec![core((1, 1))]),
        2 => ("tumor-solid", SlideLabel::Tumor, false, vec![core((2, 2))]),
        6 => ("tumor-solid", SlideLabel::Tumor, false, vec![core((3, 1))]),
        // Tumor whose only signal is a large pale halo: lost once the
        // threshold reaches its saturation while holes stay open.
        4 => ("tumor-halo", SlideLabel::Tumor, false, vec![pale(4, 4, 12, 12, 12)]),
        22 => ("tumor-halo", SlideLabel::Tumor, false, vec![pale(16, 16, 12, 12, 12)]),
        26 => ("tumor-halo", SlideLabel::Tumor, false, vec![pale(4, 16, 12, 12, 12)]),
        30 => ("tumor-halo", SlideLabel::Tumor, false, vec![pale(16, 4, 12, 12, 12)]),
        // Solid core plus an off-core pale speck strictly inside another
        // patch; the core keeps these slides correct at every setting.
        8 => (
            "tumor-flecked",
            SlideLabel::Tumor,
            false,
            vec![core((1, 4)), pale(16, 25, 4, 2, 6)],
        ),
        12 => (
            "tumor-flecked",
            SlideLabel::Tumor,
            false,
            vec![core((2, 6)), pale(20, 17, 4, 2, 6)],
        ),
        // Tumor whose only signal patch carries a pale seam; the seam
        // hole is tiny, so only the lowest hole floor can open it.
        18 => ("tumor-seam", SlideLabel::Tumor, false, vec![pale(8, 17, 4, 2, 9)]),
        // Island tumors: retention depends on the tissue-area floor, and
        // the smaller islands also need a fine blur to survive.  The
        // wide and slim islands straddle an area floor at blur 7, so a
        // finer blur rescues them no matter where the floor sits.
        16 => (
            "tumor-atoll-small",
            SlideLabel::Tumor,
            true,
            vec![island(16, 16, 8, 8), core((4, 4))],
        ),
        10 => (
            "tumor-atoll-wide",
            SlideLabel::Tumor,
            true,
            vec![island(16, 8, 8, 12), core((4, 3))],
        ),
        14 => (
            "tumor-atoll-slim",
            SlideLabel::Tumor,
            true,
            vec![island(16, 16, 7, 8), core((4, 4))],
        ),
        20 => (
            "tumor-atoll-mid",
            SlideLabel::Tumor,
            true,
            vec![island(12, 12, 11, 11), core((4, 4))],
        ),
        24 => (
            "tumor-atoll-tiny",
            SlideLabel::Tumor,
            true,
            vec![island(20, 20, 7, 7), core((5, 5))],
        ),
        28 => (
            "tumor-atoll-large",
            SlideLabel::Tumor,
            true,
            vec![island(8, 8, 12, 12), core((3, 3))],
        ),
        // --- normals --------------------------------------------------
        1 => ("normal-clear", SlideLabel::Normal, false, vec![]),
        // Full-width pale bands; open at every grid threshold and the
        // reference flip for the gate calibration probe.
        3 => ("normal-banded", SlideLabel::Normal, false, vec![Structure::Band { patch_row: 3, s: 8 }]),
        27 => ("normal-banded", SlideLabel::Normal, false, vec![Structure::Band { patch_row: 3, s: 8 }]),
        // Two-patch-square shadows that open one threshold step at a time.
        5 => ("normal-shadow", SlideLabel::Normal, false, vec![pale(4, 4, 8, 8, 9)]),
        7 => ("normal-shadow", SlideLabel::Normal, false, vec![pale(4, 4, 8, 8, 10)]),
        9 => ("normal-shadow", SlideLabel::Normal, false, vec![pale(4, 4, 8, 8, 11)]),
        // Two-patch streaks: blur 3 keeps both patch centers under any
        // closing, blur 5 only under closing 2, blur 7 none at all.
        11 => ("normal-streak", SlideLabel::Normal, false, vec![pale(8, 4, 4, 8, 7)]),
        13 => ("normal-streak", SlideLabel::Normal, false, vec![pale(8, 4, 4, 8, 8)]),
        // Three-row ribbons at the bottom of a patch row: closing 4
        // erases their remnant and blur 5 loses a patch center.
        15 => ("normal-ribbon", SlideLabel::Normal, false, vec![pale(13, 16, 3, 12, 7)]),
        17 => ("normal-ribbon", SlideLabel::Normal, false, vec![pale(13, 16, 3, 12, 8)]),
        // Two-row wisps centered on a patch row: gone above blur 3,
        // closed above radius 2; the narrow one also needs the hole
        // floor at 8 or lower.
        19 => ("normal-wisp-wide", SlideLabel::Normal, false, vec![pale(9, 16, 2, 12, 7)]),
        21 => ("normal-wisp", SlideLabel::Normal, false, vec![pale(9, 16, 2, 8, 8)]),
        // Single-patch blotches: a tight plus-shaped remnant that only
        // minimal closing and a low hole floor can keep open.
        23 => ("normal-blotch", SlideLabel::Normal, false, vec![pale(4, 8, 4, 4, 9)]),
        25 => ("normal-blotch", SlideLabel::Normal, false, vec![pale(4, 8, 4, 4, 10)]),
        // Confounders fainter than the interior optimum reaches: the two
        // engineered misses that anchor a second, strictly local summit.
        29 => ("normal-faint-streak", SlideLabel::Normal, false, vec![pale(8, 4, 4, 8, 12)]),
        31 => ("normal-faint-blotch", SlideLabel::Normal, false, vec![pale(4, 8, 4, 4, 13)]),
        _ => unreachable!(),
    };
    Archetype { name, label, island_slide, structures }
}

/// The pale-lesion portfolio: every tumor is a pale halo with no other
/// signal, so removing pale tissue removes the class signal.
fn pale_lesion_archetype(idx: u32) -> Archetype {
    if idx % 2 == 0 {
        let s = [9, 10, 11, 12][(idx as usize / 2) % 4];
        Archetype {
            name: "tumor-halo",
            label: SlideLabel::Tumor,
            island_slide: false,
            structures: vec![pale(4, 4, 12, 12, s)],
        }
    } else if idx == 3 || idx == 27 {
        Archetype {
            name: "normal-banded",
            label: SlideLabel::Normal,
            island_slide: false,
            structures: vec![Structure::Band { patch_row: 3, s: 8 }],
        }
    } else {
        Archetype {
            name: "normal-clear",
            label: SlideLabel::Normal,
            island_slide: false,
            structures: vec![],
        }
    }
}

fn archetype(profile: CohortProfile, id: u32) -> Archetype {
    let idx = id % PORTFOLIO;
    match profile {
        CohortProfile::Mixed => mixed_archetype(idx),
        CohortProfile::PaleLesion => pale_lesion_archetype(idx),
    }
}

// ---------------------------------------------------------------------------
// Painting
// ---------------------------------------------------------------------------

struct Painter {
    px: Vec<u8>,
    dim: u32,
}

impl Painter {
    fn new(dim: u32, fill: [u8; 3]) -> Self {
        let mut px = vec![0u8; dim as usize * dim as usize * 3];
        for chunk in px.chunks_exact_mut(3) {
            chunk.copy_from_slice(&fill);
        }
        Painter { px, dim }
    }

    fn fill_blocks(&mut self, rect: BlockRect, color: [u8; 3]) {
        let x0 = rect.col * WORKING_FACTOR;
        let x1 = rect.max_col() * WORKING_FACTOR;
        let y0 = rect.row * WORKING_FACTOR;
        let y1 = rect.max_row() * WORKING_FACTOR;
        for y in y0..y1 {
            let row = (y * self.dim + x0) as usize * 3;
            let row = &mut self.px[row..row + ((x1 - x0) as usize * 3)];
            for chunk in row.chunks_exact_mut(3) {
                chunk.copy_from_slice(&color);
            }
        }
    }

    /// Vertical period-2 stripes keyed to global x parity, so every
    /// 64-column block averages the two colors exactly.
    fn stripe_blocks(&mut self, rect: BlockRect, even: [u8; 3], odd: [u8; 3]) {
        let x0 = rect.col * WORKING_FACTOR;
        let x1 = rect.max_col() * WORKING_FACTOR;
        let y0 = rect.row * WORKING_FACTOR;
        let y1 = rect.max_row() * WORKING_FACTOR;
        for y in y0..y1 {
            let base = (y * self.dim) as usize * 3;
            for x in x0..x1 {
                let color = if x % 2 == 0 { even } else { odd };
                let at = base + x as usize * 3;
                self.px[at..at + 3].copy_from_slice(&color);
            }
        }
    }

    fn into_image(self) -> RasterImage {
        RasterImage::new(self.dim, self.dim, 3, self.px)
            .expect("painter buffer dimensions are consistent")
    }
}

/// Renders one slide at level 0. Deterministic in `(config.seed, id)`.
pub fn render_slide(config: &CohortConfig, id: u32) -> Result<RasterImage> {
    config.validate()?;
    if id >= config.slides {
        return Err(Error::Config(format!(
            "slide {id} outside cohort of {}",
            config.slides
        )));
    }
    let arch = archetype(config.profile, id);
    let dim = config.working_dim();
    if dim < arch.min_working_dim() {
        return Err(Error::Config(format!(
            "archetype {} needs a working grid of {}, slide edge gives {}",
            arch.name,
            arch.min_working_dim(),
            dim
        )));
    }

    let mut rng = slide_rng(config.seed, id);
    // Small red-channel tint keeps cohorts visually distinct per seed
    // without moving any saturation past a grid threshold.
    let tint = rng.gen_range(-2i32..=2);
    let tissue = [(TISSUE_BASE[0] as i32 + tint) as u8, TISSUE_BASE[1], TISSUE_BASE[2]];

    let mut painter = if arch.island_slide {
        Painter::new(config.slide_px, WHITE)
    } else {
        Painter::new(config.slide_px, tissue)
    };

    // Islands first (they provide the tissue), then cores, then pale
    // inclusions on top.
    for s in &arch.structures {
        if let Structure::Island { rect } = s {
            painter.fill_blocks(*rect, tissue);
        }
    }
    for s in &arch.structures {
        if let Structure::Core { patch } = s {
            painter.stripe_blocks(core_rect(*patch), CORE_STRIPES.0, CORE_STRIPES.1);
        }
    }
    for s in &arch.structures {
        match s {
            Structure::Pale { rect, s } => {
                let (even, odd) = pale_stripes(*s)?;
                painter.stripe_blocks(*rect, even, odd);
            }
            Structure::Band { patch_row, s } => {
                let (even, odd) = pale_stripes(*s)?;
                let rect = BlockRect { row: patch_row * 4, col: 0, h: 4, w: dim };
                painter.stripe_blocks(rect, even, odd);
            }
            _ => {}
        }
    }

    Ok(painter.into_image())
}

fn slide_rng(seed: u64, id: u32) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (id as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

// ---------------------------------------------------------------------------
// Feature extraction
// ---------------------------------------------------------------------------

fn patch_features(slide: &RasterImage, py: u32, px: u32, edge: u32) -> PatchFeatures {
    let y0 = py * edge;
    let x0 = px * edge;
    let n = (edge as u64) * (edge as u64);
    let mut sum = [0u64; 3];
    let mut sumsq = [0u64; 3];
    let mut sat_sum = 0u64;
    let mut grad_sum = 0.0f64;
    for y in y0..y0 + edge {
        let mut prev_gray = 0.0f64;
        for x in x0..x0 + edge {
            let mut rgb = [0u8; 3];
            for (c, v) in rgb.iter_mut().enumerate() {
                *v = slide.get(x, y, c as u8);
            }
            for c in 0..3 {
                sum[c] += rgb[c] as u64;
                sumsq[c] += (rgb[c] as u64) * (rgb[c] as u64);
            }
            sat_sum += sample_saturation(rgb[0], rgb[1], rgb[2]) as u64;
            let gray = (rgb[0] as f64 + rgb[1] as f64 + rgb[2] as f64) / 3.0;
            if x > x0 {
                grad_sum += (gray - prev_gray).abs();
            }
            prev_gray = gray;
        }
    }
    let mut mean = [0f32; 3];
    let mut variance = [0f32; 3];
    for c in 0..3 {
        let m = sum[c] as f64 / n as f64;
        mean[c] = m as f32;
        variance[c] = (sumsq[c] as f64 / n as f64 - m * m) as f32;
    }
    let pairs = (edge as u64 - 1) * edge as u64;
    PatchFeatures {
        mean,
        variance,
        saturation_mean: (sat_sum as f64 / n as f64) as f32,
        texture: (grad_sum / pairs as f64) as f32,
    }
}

/// Generates the cohort: paints each slide at level 0, reduces it to the
/// working resolution, and tabulates per-patch features. Level-0 pixel
/// buffers are dropped as soon as each slide is reduced.
pub fn generate(config: &CohortConfig) -> Result<Cohort> {
    config.validate()?;
    let mut slides = Vec::with_capacity(config.slides as usize);
    let grid = config.patch_grid();
    for id in 0..config.slides {
        let arch = archetype(config.profile, id);
        let level0 = render_slide(config, id)?;
        let working = downsample(&level0, WORKING_FACTOR)?;
        let saturation = saturation_channel(&working)?;
        let mut features = Vec::with_capacity((grid * grid) as usize);
        for py in 0..grid {
            for px in 0..grid {
                features.push(patch_features(&level0, py, px, config.patch_px));
            }
        }
        slides.push(SlideData {
            id,
            name: format!("{}-{id:02}", arch.name),
            label: arch.label,
            working,
            saturation,
            patch_rows: grid,
            patch_cols: grid,
            features,
        });
    }
    Ok(Cohort { config: *config, slides })
}
