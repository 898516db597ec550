//! On-disk formats.
//!
//! Inputs are PNGs: RGB at 8 or 16 bits per sample for images, 16-bit
//! grayscale for depth. Outputs are 16-bit PNGs or the `DFD1` raw float
//! format:
//!
//! ```text
//! offset 0   b"DFD1"
//! offset 4   width  (u32, little endian)
//! offset 8   height (u32, little endian)
//! offset 12  width·height f32 samples, little endian, row-major
//! ```
//!
//! A two-channel map (the LDDCV cues) uses the same header followed by two
//! full planes, channel 0 first. Readers tell the variants apart by length.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use dfd_core::{DepthMap, LddcvMap, RgbImage, ScalarMap, ValidityMask};

use crate::error::{Error, Result};

pub const RAW_MAGIC: &[u8; 4] = b"DFD1";
const RAW_HEADER: usize = 12;

/// How integer depth PNGs map to meters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DepthEncoding {
    /// Stored units per meter (1000 for millimeters).
    pub scale: f64,
    /// Depths above this many meters are rejected; `None` disables the check.
    pub max_depth: Option<f64>,
}

impl Default for DepthEncoding {
    fn default() -> Self {
        Self { scale: 1000.0, max_depth: Some(dfd_core::raster::DEFAULT_MAX_DEPTH) }
    }
}

/// Output encoding for single-channel maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapFormat {
    /// 16-bit grayscale, stored value = round(sample · scale).
    Png16 {
        scale: f64,
    },
    RawF32,
}

/// Anything that can be written as a single-channel map.
pub trait MapSamples {
    fn dims(&self) -> (usize, usize);
    fn samples(&self) -> &[f64];
}

impl MapSamples for ScalarMap {
    fn dims(&self) -> (usize, usize) {
        ScalarMap::dims(self)
    }
    fn samples(&self) -> &[f64] {
        self.data()
    }
}

impl MapSamples for DepthMap {
    fn dims(&self) -> (usize, usize) {
        DepthMap::dims(self)
    }
    fn samples(&self) -> &[f64] {
        self.data()
    }
}

struct Decoded {
    width: usize,
    height: usize,
    channels: usize,
    max: f64,
    samples: Vec<u16>,
}

fn decode_png(path: &Path) -> Result<(png::ColorType, png::BitDepth, Decoded)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let png_err = |source| Error::PngDecode { path: path.to_path_buf(), source };
    let mut reader = decoder.read_info().map_err(png_err)?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::RawFormat { path: path.to_path_buf(), reason: "image too large".into() })?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf).map_err(png_err)?;
    let (width, height) = (info.width as usize, info.height as usize);
    let channels = info.color_type.samples();
    let (max, samples) = match info.bit_depth {
        png::BitDepth::Eight => {
            let n = width * height * channels;
            let mut out = Vec::with_capacity(n);
            for row in buf.chunks(info.line_size).take(height) {
                out.extend(row[..width * channels].iter().map(|&b| u16::from(b)));
            }
            (255.0, out)
        }
        png::BitDepth::Sixteen => {
            let n = width * height * channels;
            let mut out = Vec::with_capacity(n);
            for row in buf.chunks(info.line_size).take(height) {
                out.extend(row[..width * channels * 2].chunks_exact(2).map(|b| u16::from_be_bytes([b[0], b[1]])));
            }
            (65535.0, out)
        }
        other => {
            return Ok((info.color_type, other, Decoded { width, height, channels, max: 0.0, samples: Vec::new() }))
        }
    };
    Ok((info.color_type, info.bit_depth, Decoded { width, height, channels, max, samples }))
}

fn color_name(c: png::ColorType) -> String {
    format!("{c:?}").to_lowercase()
}

/// Reads an 8- or 16-bit RGB PNG, scaling samples to `[0, 1]`.
pub fn read_rgb(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let (color, depth, d) = decode_png(path)?;
    if color != png::ColorType::Rgb {
        return Err(Error::ChannelLayout { path: path.into(), expected: "RGB", found: color_name(color) });
    }
    if !matches!(depth, png::BitDepth::Eight | png::BitDepth::Sixteen) {
        return Err(Error::UnsupportedBitDepth { path: path.into(), depth: depth as u8, expected: "8 or 16" });
    }
    debug_assert_eq!(d.channels, 3);
    let data = d.samples.iter().map(|&v| f64::from(v) / d.max).collect();
    Ok(RgbImage::new(d.width, d.height, data)?)
}

/// Reads a single-channel 16-bit depth PNG. Meters = raw / scale; raw zeros
/// become invalid pixels.
pub fn read_depth(path: impl AsRef<Path>, enc: &DepthEncoding) -> Result<DepthMap> {
    let path = path.as_ref();
    check_scale(enc.scale)?;
    let (w, h, raw) = read_gray16(path)?;
    let data = raw.iter().map(|&v| f64::from(v) / enc.scale).collect();
    let map = DepthMap::from_samples(w, h, data)?;
    if let Some(cap) = enc.max_depth {
        map.check_cap(cap)?;
    }
    Ok(map)
}

fn read_gray16(path: &Path) -> Result<(usize, usize, Vec<u16>)> {
    let (color, depth, d) = decode_png(path)?;
    if color != png::ColorType::Grayscale {
        return Err(Error::ChannelLayout {
            path: path.into(),
            expected: "single-channel grayscale",
            found: color_name(color),
        });
    }
    if depth != png::BitDepth::Sixteen {
        return Err(Error::UnsupportedBitDepth { path: path.into(), depth: depth as u8, expected: "16" });
    }
    Ok((d.width, d.height, d.samples))
}

/// Reads a 16-bit grayscale PNG as a plain map, value = raw / scale.
pub fn read_map_png16(path: impl AsRef<Path>, scale: f64) -> Result<ScalarMap> {
    check_scale(scale)?;
    let (w, h, raw) = read_gray16(path.as_ref())?;
    Ok(ScalarMap::new(w, h, raw.iter().map(|&v| f64::from(v) / scale).collect())?)
}

fn check_scale(scale: f64) -> Result<()> {
    if scale > 0.0 && scale.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidScale(scale))
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn write_png(
    path: &Path,
    width: usize,
    height: usize,
    color: png::ColorType,
    depth: png::BitDepth,
    bytes: &[u8],
) -> Result<()> {
    let file = create(path)?;
    let enc_err = |source| Error::PngEncode { path: path.to_path_buf(), source };
    let mut encoder = png::Encoder::new(file, width as u32, height as u32);
    encoder.set_color(color);
    encoder.set_depth(depth);
    let mut writer = encoder.write_header().map_err(enc_err)?;
    writer.write_image_data(bytes).map_err(enc_err)?;
    writer.finish().map_err(enc_err)
}

fn to_u16(v: f64) -> u16 {
    (v * 65535.0).round().clamp(0.0, 65535.0) as u16
}

/// Writes an image as a 16-bit RGB PNG.
pub fn write_rgb_png16(img: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    let bytes: Vec<u8> = img.data().iter().flat_map(|&v| to_u16(v).to_be_bytes()).collect();
    write_png(path.as_ref(), img.width(), img.height(), png::ColorType::Rgb, png::BitDepth::Sixteen, &bytes)
}

/// Writes a mask as an 8-bit grayscale PNG, 255 for set pixels.
pub fn write_mask_png(mask: &ValidityMask, path: impl AsRef<Path>) -> Result<()> {
    let bytes: Vec<u8> = mask.data().iter().map(|&b| if b { 255 } else { 0 }).collect();
    write_png(path.as_ref(), mask.width(), mask.height(), png::ColorType::Grayscale, png::BitDepth::Eight, &bytes)
}

/// Reads a mask written by [`write_mask_png`]; any nonzero sample is set.
pub fn read_mask_png(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<bool>)> {
    let path = path.as_ref();
    let (color, _, d) = decode_png(path)?;
    if color != png::ColorType::Grayscale || d.samples.is_empty() {
        return Err(Error::ChannelLayout {
            path: path.into(),
            expected: "8/16-bit grayscale",
            found: color_name(color),
        });
    }
    Ok((d.width, d.height, d.samples.iter().map(|&v| v != 0).collect()))
}

/// Writes a single-channel map in the requested format.
pub fn write_map(map: &impl MapSamples, path: impl AsRef<Path>, format: MapFormat) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = map.dims();
    match format {
        MapFormat::RawF32 => {
            let bytes = encode_raw(w, h, &[map.samples()]);
            let mut f = create(path)?;
            f.write_all(&bytes).and_then(|_| f.flush()).map_err(|e| Error::io(path, e))
        }
        MapFormat::Png16 { scale } => {
            check_scale(scale)?;
            let mut bytes = Vec::with_capacity(w * h * 2);
            for (index, &v) in map.samples().iter().enumerate() {
                let s = (v * scale).round();
                if !(0.0..=65535.0).contains(&s) {
                    return Err(Error::Png16Range { index, value: v, scale });
                }
                bytes.extend_from_slice(&(s as u16).to_be_bytes());
            }
            write_png(path, w, h, png::ColorType::Grayscale, png::BitDepth::Sixteen, &bytes)
        }
    }
}

/// Serializes planes of `w·h` samples into `DFD1` bytes.
pub fn encode_raw(w: usize, h: usize, planes: &[&[f64]]) -> Vec<u8> {
    let mut out = Vec::with_capacity(RAW_HEADER + planes.len() * w * h * 4);
    out.extend_from_slice(RAW_MAGIC);
    out.extend_from_slice(&(w as u32).to_le_bytes());
    out.extend_from_slice(&(h as u32).to_le_bytes());
    for plane in planes {
        debug_assert_eq!(plane.len(), w * h);
        for &v in plane.iter() {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

/// Parses `DFD1` bytes into `(width, height, planes)`.
pub fn decode_raw(bytes: &[u8], path: &Path) -> Result<(usize, usize, Vec<Vec<f64>>)> {
    let bad = |reason: &str| Error::RawFormat { path: path.to_path_buf(), reason: reason.into() };
    if bytes.len() < RAW_HEADER {
        return Err(bad("file shorter than the 12-byte header"));
    }
    if &bytes[..4] != RAW_MAGIC {
        return Err(bad("missing DFD1 magic"));
    }
    let w = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let h = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let plane = w.checked_mul(h).ok_or_else(|| bad("dimensions overflow"))?;
    let body = &bytes[RAW_HEADER..];
    if plane == 0 || body.len() % (plane * 4) != 0 || body.is_empty() {
        return Err(bad(&format!("{} payload bytes do not hold whole {w}x{h} f32 planes", body.len())));
    }
    let planes = body
        .chunks_exact(plane * 4)
        .map(|p| p.chunks_exact(4).map(|b| f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]]))).collect())
        .collect();
    Ok((w, h, planes))
}

fn read_raw(path: &Path, want_planes: usize) -> Result<(usize, usize, Vec<Vec<f64>>)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let (w, h, planes) = decode_raw(&bytes, path)?;
    if planes.len() != want_planes {
        return Err(Error::RawFormat {
            path: path.into(),
            reason: format!("expected {want_planes} plane(s), found {}", planes.len()),
        });
    }
    Ok((w, h, planes))
}

/// Reads a single-plane raw map.
pub fn read_map_raw(path: impl AsRef<Path>) -> Result<ScalarMap> {
    let (w, h, mut planes) = read_raw(path.as_ref(), 1)?;
    Ok(ScalarMap::new(w, h, planes.pop().unwrap())?)
}

/// Reads a raw depth map; zeros become invalid pixels.
pub fn read_depth_raw(path: impl AsRef<Path>) -> Result<DepthMap> {
    let (w, h, mut planes) = read_raw(path.as_ref(), 1)?;
    Ok(DepthMap::from_samples(w, h, planes.pop().unwrap())?)
}

/// Writes the two-plane LDDCV map.
pub fn write_lddcv_raw(cues: &LddcvMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_raw(cues.width(), cues.height(), &[cues.ldcv(), cues.ldv()]);
    let mut f = create(path)?;
    f.write_all(&bytes).and_then(|_| f.flush()).map_err(|e| Error::io(path, e))
}

pub fn read_lddcv_raw(path: impl AsRef<Path>) -> Result<LddcvMap> {
    let (w, h, mut planes) = read_raw(path.as_ref(), 2)?;
    let ldv = planes.pop().unwrap();
    let ldcv = planes.pop().unwrap();
    Ok(LddcvMap::from_planes(w, h, ldcv, ldv)?)
}

fn is_raw(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("raw"))
}

/// Depth from either a 16-bit PNG or a raw map, chosen by extension.
pub fn read_depth_any(path: impl AsRef<Path>, enc: &DepthEncoding) -> Result<DepthMap> {
    let path = path.as_ref();
    if is_raw(path) {
        let map = read_depth_raw(path)?;
        if let Some(cap) = enc.max_depth {
            map.check_cap(cap)?;
        }
        Ok(map)
    } else {
        read_depth(path, enc)
    }
}

/// A scalar map from a raw file or a 16-bit PNG (value = raw / `png_scale`).
pub fn read_map_any(path: impl AsRef<Path>, png_scale: f64) -> Result<ScalarMap> {
    let path = path.as_ref();
    if is_raw(path) {
        read_map_raw(path)
    } else {
        read_map_png16(path, png_scale)
    }
}

/// Writes a map as raw when the extension is `.raw`, else as a 16-bit PNG.
pub fn write_map_auto(map: &impl MapSamples, path: impl AsRef<Path>, png_scale: f64) -> Result<()> {
    let path = path.as_ref();
    let format = if is_raw(path) { MapFormat::RawF32 } else { MapFormat::Png16 { scale: png_scale } };
    write_map(map, path, format)
}

/// Reads numbers from a CSV-ish text file: comma or whitespace separated,
/// `#` comments, and an optional non-numeric header line.
pub fn read_values_csv(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::new();
    let mut seen_data = false;
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty()).collect();
        let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(v) => {
                if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
                    return Err(Error::Parse {
                        path: path.into(),
                        line: n + 1,
                        reason: format!("non-finite value {bad}"),
                    });
                }
                values.extend(v);
                seen_data = true;
            }
            Err(_) if !seen_data && values.is_empty() => continue, // header
            Err(e) => return Err(Error::Parse { path: path.into(), line: n + 1, reason: e.to_string() }),
        }
    }
    Ok(values)
}
