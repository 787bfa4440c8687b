//! Binary portable pixmap I/O: P6 for RGB rasters, P5 for grayscale rasters
//! and masks, always with a maxval of 255.
//!
//! Writing then reading any image reproduces it bit-exactly. Masks travel as
//! P5 files holding only the samples 0 (background) and 255 (foreground).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::Error;
use crate::raster::{BitMask, RasterImage};
use crate::Result;

/// Encodes an image as binary PPM/PGM: P6 for 3 channels, P5 for 1.
pub fn encode(img: &RasterImage) -> Vec<u8> {
    let magic = if img.channels() == 3 { "P6" } else { "P5" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

/// Decodes a binary P5 or P6 image with maxval 255.
pub fn decode(bytes: &[u8]) -> Result<RasterImage> {
    let mut pos = 0;
    let magic = next_token(bytes, &mut pos)?;
    let channels = match magic.as_str() {
        "P6" => 3,
        "P5" => 1,
        other => {
            return Err(Error::Malformed(format!(
                "unsupported pixmap magic {other:?}, expected P5 or P6"
            )))
        }
    };
    let width: u32 = parse_dim(&next_token(bytes, &mut pos)?, "width")?;
    let height: u32 = parse_dim(&next_token(bytes, &mut pos)?, "height")?;
    let maxval = next_token(bytes, &mut pos)?;
    if maxval != "255" {
        return Err(Error::Malformed(format!("unsupported maxval {maxval}, expected 255")));
    }
    // Exactly one whitespace byte separates the header from the samples.
    pos += 1;
    let expected = width as usize * height as usize * channels as usize;
    let payload = bytes
        .get(pos..pos + expected)
        .ok_or_else(|| Error::Malformed(format!(
            "pixmap payload truncated: need {expected} sample bytes"
        )))?;
    if pos + expected != bytes.len() {
        return Err(Error::Malformed(format!(
            "pixmap has {} trailing bytes after the sample payload",
            bytes.len() - pos - expected
        )));
    }
    RasterImage::new(width, height, channels, payload.to_vec())
}

/// Writes an image to disk in its binary pixmap form.
pub fn write_image(path: &Path, img: &RasterImage) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&encode(img))?;
    w.flush()?;
    Ok(())
}

/// Reads a binary P5/P6 file from disk.
pub fn read_image(path: &Path) -> Result<RasterImage> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    decode(&bytes).map_err(|e| match e {
        Error::Malformed(msg) => Error::Malformed(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Encodes a mask as P5 with foreground = 255, background = 0.
pub fn encode_mask(mask: &BitMask) -> Vec<u8> {
    let data: Vec<u8> = mask.data().iter().map(|&b| if b { 255 } else { 0 }).collect();
    let img = RasterImage::new(mask.width(), mask.height(), 1, data)
        .expect("mask geometry is valid by construction");
    encode(&img)
}

/// Decodes a P5 mask; every sample must be exactly 0 or 255.
pub fn decode_mask(bytes: &[u8]) -> Result<BitMask> {
    let img = decode(bytes)?;
    if img.channels() != 1 {
        return Err(Error::Malformed("mask pixmaps must be single-channel P5".into()));
    }
    let mut data = Vec::with_capacity(img.data().len());
    for &s in img.data() {
        match s {
            0 => data.push(false),
            255 => data.push(true),
            other => {
                return Err(Error::Malformed(format!(
                    "mask sample {other} is neither 0 nor 255"
                )))
            }
        }
    }
    BitMask::new(img.width(), img.height(), data)
}

/// Writes a mask to disk as binary P5.
pub fn write_mask(path: &Path, mask: &BitMask) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&encode_mask(mask))?;
    w.flush()?;
    Ok(())
}

/// Reads a 0/255 P5 mask from disk.
pub fn read_mask(path: &Path) -> Result<BitMask> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    decode_mask(&bytes)
}

// Reads the next whitespace-delimited header token, skipping `#` comments.
fn next_token(bytes: &[u8], pos: &mut usize) -> Result<String> {
    while *pos < bytes.len() {
        match bytes[*pos] {
            b' ' | b'\t' | b'\r' | b'\n' => *pos += 1,
            b'#' => {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            }
            _ => break,
        }
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Malformed("pixmap header ended early".into()));
    }
    String::from_utf8(bytes[start..*pos].to_vec())
        .map_err(|_| Error::Malformed("pixmap header is not ASCII".into()))
}

fn parse_dim(token: &str, what: &str) -> Result<u32> {
    let value: u32 = token
        .parse()
        .map_err(|_| Error::Malformed(format!("bad pixmap {what} {token:?}")))?;
    if value == 0 {
        return Err(Error::Malformed(format!("pixmap {what} must be nonzero")));
    }
    Ok(value)
}
