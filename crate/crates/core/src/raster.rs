//! 8-bit raster images, binary masks, and the integer imaging kernels the
//! segmentation pipeline is composed of.
//!
//! Every operation here is a pure function of its inputs: no global state, no
//! floating point in any pixel path, and half-up rounding wherever an integer
//! quotient must be rounded. Window-based kernels clip their windows to the
//! image bounds instead of padding, so border pixels see smaller windows.

use crate::error::Error;
use crate::Result;

/// Interleaved 8-bit raster with 1 (gray) or 3 (RGB) channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    channels: u8,
    data: Vec<u8>,
}

impl RasterImage {
    /// Builds an image from interleaved sample data.
    pub fn new(width: u32, height: u32, channels: u8, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!(
                "image dimensions must be at least 1x1, got {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidParameter(format!(
                "channel count must be 1 or 3, got {channels}"
            )));
        }
        let expected = width as usize * height as usize * channels as usize;
        if data.len() != expected {
            return Err(Error::InvalidParameter(format!(
                "sample buffer holds {} bytes, geometry needs {expected}",
                data.len()
            )));
        }
        Ok(Self { width, height, channels, data })
    }

    /// All-zero image of the given geometry.
    pub fn zeroed(width: u32, height: u32, channels: u8) -> Result<Self> {
        let len = width as usize * height as usize * channels as usize;
        Self::new(width, height, channels, vec![0; len])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    /// Interleaved sample data, row-major.
    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    #[inline]
    fn index(&self, x: u32, y: u32, ch: u8) -> usize {
        (y as usize * self.width as usize + x as usize) * self.channels as usize + ch as usize
    }

    /// Sample at (x, y) on channel `ch`. Panics on out-of-range coordinates;
    /// callers stay in bounds by construction.
    #[inline]
    pub fn get(&self, x: u32, y: u32, ch: u8) -> u8 {
        self.data[self.index(x, y, ch)]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, ch: u8, value: u8) {
        let i = self.index(x, y, ch);
        self.data[i] = value;
    }
}

/// Binary mask aligned to a raster geometry. `true` marks a foreground
/// (tissue) pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMask {
    width: u32,
    height: u32,
    data: Vec<bool>,
}

impl BitMask {
    pub fn new(width: u32, height: u32, data: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!(
                "mask dimensions must be at least 1x1, got {width}x{height}"
            )));
        }
        if data.len() != width as usize * height as usize {
            return Err(Error::InvalidParameter(format!(
                "mask buffer holds {} entries, geometry needs {}",
                data.len(),
                width as usize * height as usize
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: u32, height: u32, value: bool) -> Result<Self> {
        Self::new(width, height, vec![value; width as usize * height as usize])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.data[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        self.data[y as usize * self.width as usize + x as usize] = value;
    }

    /// Number of foreground pixels.
    pub fn count_true(&self) -> usize {
        self.data.iter().filter(|v| **v).count()
    }

    /// True if `other` marks a superset of this mask's foreground.
    pub fn subset_of(&self, other: &BitMask) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.data.iter().zip(&other.data).all(|(a, b)| !*a || *b)
    }
}

/// Integer division with half-up rounding: round(num / den) for den > 0,
/// where exact halves round toward positive infinity.
#[inline]
pub(crate) fn div_round_half_up(num: u64, den: u64) -> u64 {
    debug_assert!(den > 0);
    (2 * num + den) / (2 * den)
}

/// Saturation of a single RGB sample: `round(255 * (max - min) / max)`,
/// zero for black.
#[inline]
pub(crate) fn sample_saturation(r: u8, g: u8, b: u8) -> u8 {
    let max = r.max(g).max(b) as u64;
    let min = r.min(g).min(b) as u64;
    if max == 0 {
        0
    } else {
        div_round_half_up(255 * (max - min), max) as u8
    }
}

/// Per-pixel saturation channel of an RGB image:
/// `S = round(255 * (max - min) / max)`, with `S = 0` for black pixels
/// (max = 0). Grays map to 0, fully saturated primaries to 255.
pub fn saturation_channel(img: &RasterImage) -> Result<RasterImage> {
    if img.channels != 3 {
        return Err(Error::InvalidParameter(format!(
            "saturation needs a 3-channel image, got {} channel(s)",
            img.channels
        )));
    }
    let mut out = Vec::with_capacity(img.width as usize * img.height as usize);
    for px in img.data.chunks_exact(3) {
        out.push(sample_saturation(px[0], px[1], px[2]));
    }
    RasterImage::new(img.width, img.height, 1, out)
}

/// Strict binary threshold on a single-channel image: a pixel is foreground
/// iff `sample > thresh`. A sample equal to the threshold is background.
pub fn binary_threshold(img: &RasterImage, thresh: u8) -> Result<BitMask> {
    if img.channels != 1 {
        return Err(Error::InvalidParameter(format!(
            "threshold needs a 1-channel image, got {} channel(s)",
            img.channels
        )));
    }
    let data = img.data.iter().map(|&s| s > thresh).collect();
    BitMask::new(img.width, img.height, data)
}

/// Median blur with a k x k window clipped to the image bounds. Each output
/// sample is the lower median of the in-bounds window samples (for an even
/// sample count the smaller of the two middle values is taken). Applied per
/// channel.
///
/// `k` must be odd, nonzero, and no larger than the smaller image dimension.
pub fn median_blur(img: &RasterImage, k: u32) -> Result<RasterImage> {
    if k == 0 || k % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "median window must be odd and nonzero, got {k}"
        )));
    }
    if k > img.width.min(img.height) {
        return Err(Error::InvalidParameter(format!(
            "median window {k} exceeds image extent {}x{}",
            img.width, img.height
        )));
    }
    let half = (k / 2) as i64;
    let mut out = img.clone();
    let mut window: Vec<u8> = Vec::with_capacity((k * k) as usize);
    for y in 0..img.height as i64 {
        for x in 0..img.width as i64 {
            for ch in 0..img.channels {
                window.clear();
                for wy in (y - half).max(0)..=(y + half).min(img.height as i64 - 1) {
                    for wx in (x - half).max(0)..=(x + half).min(img.width as i64 - 1) {
                        window.push(img.get(wx as u32, wy as u32, ch));
                    }
                }
                window.sort_unstable();
                let median = window[(window.len() - 1) / 2];
                out.set(x as u32, y as u32, ch, median);
            }
        }
    }
    Ok(out)
}

// Window offset ranges for the k x k structuring element. For odd k both
// ranges are the symmetric [-k/2, k/2]. For even k there is no centered
// window; the erosion window is [-(k-1)/2, k/2] and the dilation window is
// its reflection, which keeps dilate-then-erode a true closing (output is a
// superset of the input and reapplication is a no-op) at every k.
fn close_windows(k: u32) -> ((i64, i64), (i64, i64)) {
    let lo = ((k - 1) / 2) as i64;
    let hi = (k / 2) as i64;
    ((-hi, lo), (-lo, hi)) // (dilation window, erosion window)
}

fn dilate_window(mask: &BitMask, range: (i64, i64)) -> BitMask {
    let mut out = mask.clone();
    let (w, h) = (mask.width as i64, mask.height as i64);
    for y in 0..h {
        for x in 0..w {
            let mut any = false;
            'scan: for wy in (y + range.0).max(0)..=(y + range.1).min(h - 1) {
                for wx in (x + range.0).max(0)..=(x + range.1).min(w - 1) {
                    if mask.get(wx as u32, wy as u32) {
                        any = true;
                        break 'scan;
                    }
                }
            }
            out.set(x as u32, y as u32, any);
        }
    }
    out
}

fn erode_window(mask: &BitMask, range: (i64, i64)) -> BitMask {
    let mut out = mask.clone();
    let (w, h) = (mask.width as i64, mask.height as i64);
    for y in 0..h {
        for x in 0..w {
            let mut all = true;
            'scan: for wy in (y + range.0).max(0)..=(y + range.1).min(h - 1) {
                for wx in (x + range.0).max(0)..=(x + range.1).min(w - 1) {
                    if !mask.get(wx as u32, wy as u32) {
                        all = false;
                        break 'scan;
                    }
                }
            }
            out.set(x as u32, y as u32, all);
        }
    }
    out
}

/// Morphological closing: dilation by a k x k square structuring element
/// followed by erosion by the same element, windows clipped to the mask
/// bounds (dilation ORs the in-bounds window, erosion ANDs it). `k = 1` is
/// the identity. The output is always a superset of the input and closing
/// twice equals closing once.
pub fn morph_close(mask: &BitMask, k: u32) -> Result<BitMask> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "closing element must be at least 1".into(),
        ));
    }
    if k == 1 {
        return Ok(mask.clone());
    }
    let (dil, ero) = close_windows(k);
    Ok(erode_window(&dilate_window(mask, dil), ero))
}

/// Downsamples by an integer factor using per-channel block means rounded
/// half-up. The factor must divide both dimensions exactly.
pub fn downsample(img: &RasterImage, factor: u32) -> Result<RasterImage> {
    if factor == 0 {
        return Err(Error::InvalidParameter("downsample factor must be at least 1".into()));
    }
    if img.width % factor != 0 || img.height % factor != 0 {
        return Err(Error::InvalidParameter(format!(
            "downsample factor {factor} does not divide {}x{}",
            img.width, img.height
        )));
    }
    if factor == 1 {
        return Ok(img.clone());
    }
    let (ow, oh) = (img.width / factor, img.height / factor);
    let block = factor as u64 * factor as u64;
    let mut out = RasterImage::zeroed(ow, oh, img.channels)?;
    for by in 0..oh {
        for bx in 0..ow {
            for ch in 0..img.channels {
                let mut sum: u64 = 0;
                for y in by * factor..(by + 1) * factor {
                    for x in bx * factor..(bx + 1) * factor {
                        sum += img.get(x, y, ch) as u64;
                    }
                }
                out.set(bx, by, ch, div_round_half_up(sum, block) as u8);
            }
        }
    }
    Ok(out)
}
