//! Tissue segmentation: the fixed-order mask pipeline, connected-component
//! filtering, patch-grid extraction, and mask-composited thumbnails.
//!
//! The pipeline always runs as: 64x block-mean downsample, saturation
//! channel, median blur, strict binary threshold, morphological closing,
//! then component filtering. All geometry below the downsample step is in
//! "working" pixels: one working pixel per 64x64 block of slide pixels, and
//! every area threshold counts working pixels squared.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::params::PreprocParams;
use crate::raster::{
    binary_threshold, downsample, median_blur, morph_close, BitMask, RasterImage,
};
use crate::Result;

/// Fixed downsample factor between slide pixels and working pixels.
pub const WORKING_FACTOR: u32 = 64;

/// Connected-component kind in a filtered mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    /// 8-connected foreground region.
    Tissue,
    /// 4-connected background region fully enclosed by tissue.
    Hole,
}

/// One labeled component of the filtered mask. Labels count discovery order
/// (row-major first encounter), separately per kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub kind: ComponentKind,
    pub label: u32,
    /// Area in working pixels. Tissue areas exclude filled holes.
    pub area: u32,
    /// Whether the component touches the mask border. Holes never do.
    pub touches_border: bool,
}

/// Non-overlapping patch grid over a slide, recorded in working-resolution
/// terms: each patch covers a `footprint x footprint` block of working
/// pixels and is kept iff the center pixel of that block is tissue.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatchGrid {
    patch_size: u32,
    rows: u32,
    cols: u32,
    kept: Vec<(u32, u32)>,
}

impl PatchGrid {
    /// Patch edge length in slide pixels.
    pub fn patch_size(&self) -> u32 {
        self.patch_size
    }

    pub fn rows(&self) -> u32 {
        self.rows
    }

    pub fn cols(&self) -> u32 {
        self.cols
    }

    /// Kept patches as (row, col) grid coordinates, row-major order.
    pub fn kept(&self) -> &[(u32, u32)] {
        &self.kept
    }

    pub fn len(&self) -> usize {
        self.kept.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kept.is_empty()
    }
}

/// Set of per-slide thumbnails at a common downsample factor, ordered by
/// strictly increasing slide id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThumbnailSet {
    factor: u32,
    entries: Vec<(u32, RasterImage)>,
}

impl ThumbnailSet {
    pub fn new(factor: u32) -> Self {
        Self { factor, entries: Vec::new() }
    }

    /// Appends a slide thumbnail; ids must arrive strictly increasing.
    pub fn push(&mut self, slide_id: u32, thumb: RasterImage) -> Result<()> {
        if let Some((last, _)) = self.entries.last() {
            if *last >= slide_id {
                return Err(Error::InvalidParameter(format!(
                    "thumbnail ids must be strictly increasing: {last} then {slide_id}"
                )));
            }
        }
        self.entries.push((slide_id, thumb));
        Ok(())
    }

    pub fn factor(&self) -> u32 {
        self.factor
    }

    pub fn entries(&self) -> &[(u32, RasterImage)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Runs the full segmentation pipeline on a slide.
///
/// The slide must be RGB with both dimensions divisible by 64, and
/// `p.seg_thresh` must fit a u8 sample.
pub fn segment(slide: &RasterImage, p: &PreprocParams) -> Result<BitMask> {
    if slide.channels() != 3 {
        return Err(Error::InvalidParameter("segmentation needs an RGB slide".into()));
    }
    if slide.width() % WORKING_FACTOR != 0 || slide.height() % WORKING_FACTOR != 0 {
        return Err(Error::InvalidParameter(format!(
            "slide dimensions {}x{} are not multiples of {WORKING_FACTOR}",
            slide.width(),
            slide.height()
        )));
    }
    let working = downsample(slide, WORKING_FACTOR)?;
    let sat = crate::raster::saturation_channel(&working)?;
    segment_working(&sat, p)
}

/// Pipeline tail that starts from an already-computed working-resolution
/// saturation channel. `segment` is exactly `segment_working` after the
/// downsample and saturation steps; evaluation caches reuse this entry
/// point.
pub fn segment_working(saturation: &RasterImage, p: &PreprocParams) -> Result<BitMask> {
    let blurred = median_blur(saturation, p.blur_k)?;
    segment_blurred(&blurred, p)
}

/// Pipeline tail after the median blur: strict threshold, closing, and
/// component filtering. Lets callers that memoize blurred saturation
/// channels per blur width run the remaining parameter-dependent stages.
pub fn segment_blurred(blurred: &RasterImage, p: &PreprocParams) -> Result<BitMask> {
    let thresh: u8 = p
        .seg_thresh
        .try_into()
        .map_err(|_| Error::InvalidParameter(format!(
            "seg_thresh {} exceeds the 8-bit sample range",
            p.seg_thresh
        )))?;
    let raw = binary_threshold(blurred, thresh)?;
    let closed = morph_close(&raw, p.close_k)?;
    Ok(filter_components(&closed, p)?.0)
}

/// Component-filtering stage: drops small tissue, then resolves holes.
///
/// Tissue components (8-connectivity) with area below `p.area_tissue_min`
/// are removed. On the surviving mask, enclosed background components
/// (4-connectivity, never touching the border) are holes; per enclosing
/// tissue component the holes with area at least `p.area_hole_min` are
/// ranked by descending area (ties toward the smaller label) and only the
/// first `p.max_holes` stay open — every other hole is filled back in.
///
/// Returns the filtered mask together with its surviving components.
pub fn filter_components(mask: &BitMask, p: &PreprocParams) -> Result<(BitMask, Vec<Component>)> {
    let (w, h) = (mask.width(), mask.height());
    let mut out = mask.clone();

    // Pass 1: label tissue with 8-connectivity, drop small components.
    let tissue_labels = label_components(&out, true, true);
    let mut tissue_area = Vec::new();
    let mut tissue_border = Vec::new();
    collect_stats(&out, &tissue_labels, &mut tissue_area, &mut tissue_border);
    for y in 0..h {
        for x in 0..w {
            if let Some(label) = tissue_labels[(y * w + x) as usize] {
                if tissue_area[label as usize] < p.area_tissue_min {
                    out.set(x, y, false);
                }
            }
        }
    }

    // Pass 2: relabel surviving tissue, then label background with
    // 4-connectivity. Non-border background components are holes; the 8/4
    // connectivity pairing guarantees each is enclosed by exactly one
    // surviving tissue component.
    let tissue_labels = label_components(&out, true, true);
    let mut tissue_area = Vec::new();
    let mut tissue_border = Vec::new();
    collect_stats(&out, &tissue_labels, &mut tissue_area, &mut tissue_border);

    let bg_labels = label_components(&out, false, false);
    let mut bg_area = Vec::new();
    let mut bg_border = Vec::new();
    collect_stats_inverted(&out, &bg_labels, &mut bg_area, &mut bg_border);

    // Map each hole to its enclosing tissue component.
    let hole_count = bg_area.len();
    let mut enclosing: Vec<Option<u32>> = vec![None; hole_count];
    for y in 0..h {
        for x in 0..w {
            let Some(bg) = bg_labels[(y * w + x) as usize] else { continue };
            if bg_border[bg as usize] {
                continue;
            }
            for (nx, ny) in neighbors4(x, y, w, h) {
                if let Some(t) = tissue_labels[(ny * w + nx) as usize] {
                    let slot = &mut enclosing[bg as usize];
                    *slot = Some(match *slot {
                        Some(existing) => existing.min(t),
                        None => t,
                    });
                }
            }
        }
    }

    // Rank holes per tissue component and decide which stay open.
    let mut keep_hole = vec![false; hole_count];
    for t in 0..tissue_area.len() as u32 {
        let mut candidates: Vec<(u32, u32)> = (0..hole_count as u32)
            .filter(|&b| {
                !bg_border[b as usize]
                    && enclosing[b as usize] == Some(t)
                    && bg_area[b as usize] >= p.area_hole_min
            })
            .map(|b| (b, bg_area[b as usize]))
            .collect();
        candidates.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        for &(b, _) in candidates.iter().take(p.max_holes as usize) {
            keep_hole[b as usize] = true;
        }
    }

    // Fill every enclosed background pixel whose hole was not kept.
    for y in 0..h {
        for x in 0..w {
            if let Some(bg) = bg_labels[(y * w + x) as usize] {
                if !bg_border[bg as usize] && !keep_hole[bg as usize] {
                    out.set(x, y, true);
                }
            }
        }
    }

    let mut components = Vec::new();
    for (label, (&area, &border)) in tissue_area.iter().zip(&tissue_border).enumerate() {
        components.push(Component {
            kind: ComponentKind::Tissue,
            label: label as u32,
            area,
            touches_border: border,
        });
    }
    let mut next_hole_label = 0;
    for b in 0..hole_count {
        if keep_hole[b] {
            components.push(Component {
                kind: ComponentKind::Hole,
                label: next_hole_label,
                area: bg_area[b],
                touches_border: false,
            });
            next_hole_label += 1;
        }
    }
    Ok((out, components))
}

/// Extracts the non-overlapping patch grid for a working-resolution mask.
///
/// `patch_size` is in slide pixels and must be a positive multiple of 64.
/// The grid spans `mask.height / footprint` rows and `mask.width /
/// footprint` columns (partial blocks at the far edges are not patches). A
/// patch is kept iff the center pixel of its working footprint — offset
/// `footprint / 2` on both axes — is tissue.
pub fn extract_patches(mask: &BitMask, patch_size: u32) -> Result<PatchGrid> {
    if patch_size == 0 || patch_size % WORKING_FACTOR != 0 {
        return Err(Error::InvalidParameter(format!(
            "patch size {patch_size} is not a positive multiple of {WORKING_FACTOR}"
        )));
    }
    let footprint = patch_size / WORKING_FACTOR;
    let rows = mask.height() / footprint;
    let cols = mask.width() / footprint;
    let mut kept = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let cy = r * footprint + footprint / 2;
            let cx = c * footprint + footprint / 2;
            if mask.get(cx, cy) {
                kept.push((r, c));
            }
        }
    }
    Ok(PatchGrid { patch_size, rows, cols, kept })
}

/// Renders the masked 64x thumbnail of a slide: the block-mean downsample
/// with every non-tissue pixel set to black.
pub fn render_thumbnail(slide: &RasterImage, mask: &BitMask) -> Result<RasterImage> {
    let working = downsample(slide, WORKING_FACTOR)?;
    composite_thumbnail(&working, mask)
}

/// Renders a mask as a single-channel thumbnail: tissue black on white.
///
/// This is the canonical preprocessing-output rendering the similarity
/// gate compares: every flipped sample weighs the same regardless of the
/// colors underneath, so the PSNR between two mask thumbnails is a pure
/// function of how many samples the masks disagree on.
pub fn mask_thumbnail(mask: &BitMask) -> RasterImage {
    let mut px = vec![255u8; (mask.width() * mask.height()) as usize];
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if mask.get(x, y) {
                px[(y * mask.width() + x) as usize] = 0;
            }
        }
    }
    RasterImage::new(mask.width(), mask.height(), 1, px)
        .expect("mask dimensions form a valid image")
}

/// Thumbnail compositing step on an already-downsampled slide.
pub fn composite_thumbnail(working: &RasterImage, mask: &BitMask) -> Result<RasterImage> {
    if working.width() != mask.width() || working.height() != mask.height() {
        return Err(Error::InvalidParameter(format!(
            "mask {}x{} does not match working image {}x{}",
            mask.width(),
            mask.height(),
            working.width(),
            working.height()
        )));
    }
    let mut out = working.clone();
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if !mask.get(x, y) {
                for ch in 0..working.channels() {
                    out.set(x, y, ch, 0);
                }
            }
        }
    }
    Ok(out)
}

// Breadth-first component labeling. `foreground` selects which polarity is
// labeled; `eight` selects 8- vs 4-connectivity. Labels are assigned in
// row-major discovery order.
fn label_components(mask: &BitMask, foreground: bool, eight: bool) -> Vec<Option<u32>> {
    let (w, h) = (mask.width(), mask.height());
    let mut labels: Vec<Option<u32>> = vec![None; (w * h) as usize];
    let mut next = 0u32;
    let mut queue = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let i = (y * w + x) as usize;
            if mask.get(x, y) != foreground || labels[i].is_some() {
                continue;
            }
            labels[i] = Some(next);
            queue.push((x, y));
            while let Some((cx, cy)) = queue.pop() {
                let neigh: Vec<(u32, u32)> = if eight {
                    neighbors8(cx, cy, w, h)
                } else {
                    neighbors4(cx, cy, w, h)
                };
                for (nx, ny) in neigh {
                    let ni = (ny * w + nx) as usize;
                    if mask.get(nx, ny) == foreground && labels[ni].is_none() {
                        labels[ni] = Some(next);
                        queue.push((nx, ny));
                    }
                }
            }
            next += 1;
        }
    }
    labels
}

fn collect_stats(
    mask: &BitMask,
    labels: &[Option<u32>],
    area: &mut Vec<u32>,
    border: &mut Vec<bool>,
) {
    let (w, h) = (mask.width(), mask.height());
    for y in 0..h {
        for x in 0..w {
            if let Some(label) = labels[(y * w + x) as usize] {
                let label = label as usize;
                if area.len() <= label {
                    area.resize(label + 1, 0);
                    border.resize(label + 1, false);
                }
                area[label] += 1;
                if x == 0 || y == 0 || x == w - 1 || y == h - 1 {
                    border[label] = true;
                }
            }
        }
    }
}

// Identical bookkeeping for background labels; kept separate for clarity at
// the call sites.
fn collect_stats_inverted(
    mask: &BitMask,
    labels: &[Option<u32>],
    area: &mut Vec<u32>,
    border: &mut Vec<bool>,
) {
    collect_stats(mask, labels, area, border);
}

fn neighbors4(x: u32, y: u32, w: u32, h: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::with_capacity(4);
    if x > 0 {
        out.push((x - 1, y));
    }
    if x + 1 < w {
        out.push((x + 1, y));
    }
    if y > 0 {
        out.push((x, y - 1));
    }
    if y + 1 < h {
        out.push((x, y + 1));
    }
    out
}

fn neighbors8(x: u32, y: u32, w: u32, h: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::with_capacity(8);
    for dy in -1i64..=1 {
        for dx in -1i64..=1 {
            if dx == 0 && dy == 0 {
                continue;
            }
            let nx = x as i64 + dx;
            let ny = y as i64 + dy;
            if nx >= 0 && ny >= 0 && (nx as u32) < w && (ny as u32) < h {
                out.push((nx as u32, ny as u32));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::saturation_channel;

    fn mask_from(width: u32, height: u32, rows: &[&str]) -> BitMask {
        let mut data = Vec::new();
        for row in rows {
            for ch in row.chars() {
                data.push(ch == '#');
            }
        }
        BitMask::new(width, height, data).unwrap()
    }

    fn params(values: [u32; 6]) -> PreprocParams {
        PreprocParams::new(values)
    }

    #[test]
    fn diagonal_tissue_is_one_component_diagonal_background_is_not_a_hole() {
        // The diagonal pair is 8-connected tissue; the two background cells
        // around it stay 4-connected to the border, so nothing is a hole.
        let m = mask_from(2, 2, &["#.", ".#"]);
        let (filtered, comps) = filter_components(&m, &params([0, 1, 1, 1, 1, 8])).unwrap();
        assert_eq!(filtered, m);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].kind, ComponentKind::Tissue);
        assert_eq!(comps[0].area, 2);
        assert!(comps[0].touches_border);
    }

    #[test]
    fn small_tissue_components_are_dropped() {
        let m = mask_from(7, 3, &[
            "##..#..",
            "##..#..",
            "##.....",
        ]);
        let p = params([0, 1, 1, 5, 1, 8]);
        let (filtered, comps) = filter_components(&m, &p).unwrap();
        assert_eq!(filtered.count_true(), 6);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].area, 6);
    }

    #[test]
    fn donut_hole_is_kept_or_filled_by_area_and_count() {
        let donut = mask_from(5, 5, &[
            "#####",
            "#...#",
            "#...#",
            "#...#",
            "#####",
        ]);
        // Hole area 9 >= min 4 and one slot available: stays open.
        let (open, comps) = filter_components(&donut, &params([0, 1, 1, 1, 4, 1])).unwrap();
        assert_eq!(open, donut);
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[1].kind, ComponentKind::Hole);
        assert_eq!(comps[1].area, 9);
        assert!(!comps[1].touches_border);

        // Smaller than the minimum hole area: filled.
        let (filled, comps) = filter_components(&donut, &params([0, 1, 1, 1, 10, 1])).unwrap();
        assert_eq!(filled.count_true(), 25);
        assert_eq!(comps.len(), 1);

        // No hole slots: filled.
        let (filled, _) = filter_components(&donut, &params([0, 1, 1, 1, 4, 0])).unwrap();
        assert_eq!(filled.count_true(), 25);
    }

    #[test]
    fn hole_ranking_prefers_area_then_smaller_label() {
        // Three holes: areas 2, 1, 2 in discovery order. With one slot the
        // first area-2 hole (smaller label) must win.
        let m = mask_from(11, 3, &[
            "###########",
            "#..#.#..###",
            "###########",
        ]);
        let p = params([0, 1, 1, 1, 1, 1]);
        let (filtered, comps) = filter_components(&m, &p).unwrap();
        let holes: Vec<&Component> =
            comps.iter().filter(|c| c.kind == ComponentKind::Hole).collect();
        assert_eq!(holes.len(), 1);
        assert_eq!(holes[0].area, 2);
        assert!(!filtered.get(1, 1) && !filtered.get(2, 1), "first hole stays open");
        assert!(filtered.get(4, 1), "singleton hole filled");
        assert!(filtered.get(7, 1) && filtered.get(8, 1), "second area-2 hole filled");
    }

    #[test]
    fn border_touching_background_is_never_a_hole() {
        let m = mask_from(3, 3, &[
            "##.",
            "#.#",
            "###",
        ]);
        // The center pixel connects to the border gap at (2,0)? No: with
        // 4-connectivity (1,1) only reaches tissue, so it is enclosed; the
        // (2,0) pixel touches the border and is not a hole.
        let p = params([0, 1, 1, 1, 1, 8]);
        let (filtered, comps) = filter_components(&m, &p).unwrap();
        let holes: Vec<&Component> =
            comps.iter().filter(|c| c.kind == ComponentKind::Hole).collect();
        assert_eq!(holes.len(), 1);
        assert_eq!(holes[0].area, 1);
        assert!(!filtered.get(1, 1));
        assert!(!filtered.get(2, 0));
    }

    #[test]
    fn patches_keep_center_tissue_only() {
        // 8x8 working mask, patch footprint 4: centers at (2,2), (6,2),
        // (2,6), (6,6).
        let mut m = BitMask::filled(8, 8, false).unwrap();
        m.set(2, 2, true);
        m.set(5, 6, true); // not a center
        let grid = extract_patches(&m, 256).unwrap();
        assert_eq!((grid.rows(), grid.cols()), (2, 2));
        assert_eq!(grid.kept(), &[(0, 0)]);
    }

    #[test]
    fn half_plane_mask_keeps_half_the_grid() {
        // 32x32 working mask with the left half tissue, patch footprint 4:
        // kept centers are columns 2, 6, 10, 14 in working pixels.
        let mut m = BitMask::filled(32, 32, false).unwrap();
        for y in 0..32 {
            for x in 0..16 {
                m.set(x, y, true);
            }
        }
        let grid = extract_patches(&m, 256).unwrap();
        assert_eq!(grid.len(), 32);
        assert!(grid.kept().iter().all(|&(_, c)| c < 4));
    }

    #[test]
    fn full_mask_keeps_the_whole_grid() {
        let m = BitMask::filled(32, 32, true).unwrap();
        let grid = extract_patches(&m, 256).unwrap();
        assert_eq!(grid.len(), 64);
    }

    #[test]
    fn patch_size_must_be_multiple_of_working_factor() {
        let m = BitMask::filled(8, 8, true).unwrap();
        assert!(extract_patches(&m, 100).is_err());
        assert!(extract_patches(&m, 0).is_err());
    }

    #[test]
    fn patch_retention_is_monotone_in_the_mask() {
        let mut big = BitMask::filled(8, 8, false).unwrap();
        for y in 0..8 {
            for x in 0..8 {
                big.set(x, y, (x + 3 * y) % 5 != 0);
            }
        }
        let mut small = big.clone();
        for y in 0..8 {
            for x in 0..8 {
                if (x ^ y) & 2 == 0 {
                    small.set(x, y, false);
                }
            }
        }
        assert!(small.subset_of(&big));
        let g_small = extract_patches(&small, 128).unwrap();
        let g_big = extract_patches(&big, 128).unwrap();
        for kept in g_small.kept() {
            assert!(g_big.kept().contains(kept));
        }
    }

    // Builds a tiny RGB slide from a working-resolution sketch: '#' becomes
    // a saturated tissue block, 'o' a faint block, '.' white background.
    fn slide_from_sketch(rows: &[&str]) -> RasterImage {
        let wh = rows.len() as u32;
        let ww = rows[0].len() as u32;
        let (w, h) = (ww * WORKING_FACTOR, wh * WORKING_FACTOR);
        let mut img = RasterImage::zeroed(w, h, 3).unwrap();
        for y in 0..h {
            for x in 0..w {
                let ch = rows[(y / WORKING_FACTOR) as usize]
                    .as_bytes()[(x / WORKING_FACTOR) as usize];
                let rgb: [u8; 3] = match ch {
                    b'#' => [200, 80, 80],   // saturation 153
                    b'o' => [255, 245, 245], // saturation 10
                    _ => [255, 255, 255],
                };
                for c in 0..3 {
                    img.set(x, y, c, rgb[c as usize]);
                }
            }
        }
        img
    }

    #[test]
    fn segment_matches_the_documented_stage_order() {
        let slide = slide_from_sketch(&[
            "........",
            ".######.",
            ".#oo###.",
            ".#oo###.",
            ".######.",
            ".######.",
            "........",
            "........",
        ]);
        let p = params([12, 3, 2, 4, 2, 4]);
        let expected = {
            let working = downsample(&slide, WORKING_FACTOR).unwrap();
            let sat = saturation_channel(&working).unwrap();
            let blurred = median_blur(&sat, p.blur_k).unwrap();
            let raw = binary_threshold(&blurred, p.seg_thresh as u8).unwrap();
            let closed = morph_close(&raw, p.close_k).unwrap();
            filter_components(&closed, &p).unwrap().0
        };
        assert_eq!(segment(&slide, &p).unwrap(), expected);
    }

    #[test]
    fn segment_drops_faint_inclusions_only_above_the_threshold() {
        let slide = slide_from_sketch(&[
            "..........",
            ".########.",
            ".#oo#####.",
            ".#oo#####.",
            ".########.",
            ".########.",
            ".########.",
            ".########.",
            ".########.",
            "..........",
        ]);
        // Threshold below the faint saturation (10): everything is tissue.
        let keep = params([9, 1, 1, 4, 1, 8]);
        let kept_mask = segment(&slide, &keep).unwrap();
        assert_eq!(kept_mask.count_true(), 64);
        // Threshold at the faint saturation: the 2x2 inclusion becomes a
        // hole and survives filtering.
        let drop = params([10, 1, 1, 4, 1, 8]);
        let dropped_mask = segment(&slide, &drop).unwrap();
        assert_eq!(dropped_mask.count_true(), 60);
        assert!(!dropped_mask.get(2, 2));
    }

    #[test]
    fn thumbnail_blacks_out_background() {
        let slide = slide_from_sketch(&["#.", ".#"]);
        let mask = mask_from(2, 2, &["#.", ".#"]);
        let thumb = render_thumbnail(&slide, &mask).unwrap();
        assert_eq!(thumb.get(0, 0, 0), 200);
        assert_eq!(
            [thumb.get(1, 0, 0), thumb.get(1, 0, 1), thumb.get(1, 0, 2)],
            [0, 0, 0]
        );
        let bad = BitMask::filled(3, 2, true).unwrap();
        assert!(render_thumbnail(&slide, &bad).is_err());
    }

    #[test]
    fn mask_thumbnail_is_binary_and_one_channeled() {
        let mask = mask_from(3, 2, &["#.#", ".#."]);
        let thumb = mask_thumbnail(&mask);
        assert_eq!((thumb.width(), thumb.height(), thumb.channels()), (3, 2, 1));
        let expect = [0u8, 255, 0, 255, 0, 255];
        assert_eq!(thumb.data(), &expect);
    }
}
