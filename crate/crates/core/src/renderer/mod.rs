//! Continuous text rendering into fixed-height grayscale strips, sliced
//! into square patches.
//!
//! Glyphs are laid out as one unbroken stream: nothing is aligned to word
//! or patch boundaries. The pen position is tracked in 26.6 fixed point so
//! layout never depends on the floating point environment.

mod font_file;
mod test_font;

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use font_file::FontFile;
pub use test_font::TestFont;

/// A pixel counts as ink when it differs from the background by more than
/// this many gray levels.
pub const INK_THRESHOLD: u8 = 25;

const TENSOR_PREAMBLE: usize = 16;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("invalid render configuration: {0}")]
    Config(String),
    #[error("cannot load font {0}")]
    Font(String),
    #[error("strip is {width}x{height}, expected height {side} and width a multiple of {side} (at most {max_patches} patches)")]
    Shape {
        width: usize,
        height: usize,
        side: usize,
        max_patches: usize,
    },
    #[error("png: {0}")]
    Png(String),
    #[error("patch tensor: {0}")]
    Tensor(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// 26.6 fixed-point pixel quantity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Fixed(pub i64);

impl Fixed {
    pub const ONE: i64 = 64;

    pub fn from_px(px: i64) -> Self {
        Fixed(px * Self::ONE)
    }

    pub fn from_f32(px: f32) -> Self {
        Fixed((px * Self::ONE as f32).round() as i64)
    }

    pub fn floor_px(self) -> i64 {
        self.0.div_euclid(Self::ONE)
    }

    pub fn ceil_px(self) -> i64 {
        (self.0 + Self::ONE - 1).div_euclid(Self::ONE)
    }
}

impl std::ops::Add for Fixed {
    type Output = Fixed;
    fn add(self, rhs: Fixed) -> Fixed {
        Fixed(self.0 + rhs.0)
    }
}

/// A rasterized glyph as coverage values (0 = none, 255 = full).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Glyph {
    pub width: usize,
    pub height: usize,
    /// Offset of the bitmap's left edge from the pen position.
    pub left: i32,
    /// Offset of the bitmap's top edge from the top of the line.
    pub top: i32,
    pub coverage: Vec<u8>,
    pub advance: Fixed,
}

/// Source of glyph bitmaps. Implementations must be usable from several
/// threads at once.
pub trait GlyphRaster: Send + Sync {
    fn glyph(&self, c: char, pixel_em: u32, line_height: u32) -> Glyph;
}

/// Where glyphs come from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum FontAsset {
    /// The built-in 5x7 ASCII font.
    TestFont,
    File(PathBuf),
}

impl FontAsset {
    pub const TEST_FONT_NAME: &'static str = "builtin:test-5x7";

    pub fn load(&self) -> Result<Box<dyn GlyphRaster>, RenderError> {
        match self {
            FontAsset::TestFont => Ok(Box::new(TestFont)),
            FontAsset::File(path) => Ok(Box::new(FontFile::load(path)?)),
        }
    }
}

impl From<String> for FontAsset {
    fn from(s: String) -> Self {
        if s == Self::TEST_FONT_NAME {
            FontAsset::TestFont
        } else {
            FontAsset::File(PathBuf::from(s))
        }
    }
}

impl From<FontAsset> for String {
    fn from(a: FontAsset) -> Self {
        a.to_string()
    }
}

impl fmt::Display for FontAsset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FontAsset::TestFont => f.write_str(Self::TEST_FONT_NAME),
            FontAsset::File(p) => write!(f, "{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderConfig {
    pub dpi: u32,
    /// Font size in points.
    pub font_size: u32,
    pub font_asset: FontAsset,
    pub background: u8,
    pub foreground: u8,
    /// Background columns before the first glyph.
    pub padding_px: u32,
    pub patch_side: u32,
    pub max_patches: u32,
}

impl Default for RenderConfig {
    /// 120 dpi, 7 pt, black on white, 3 px padding, 16x16 patches, at most
    /// 1024 patches per strip.
    fn default() -> Self {
        RenderConfig {
            dpi: 120,
            font_size: 7,
            font_asset: FontAsset::TestFont,
            background: 255,
            foreground: 0,
            padding_px: 3,
            patch_side: 16,
            max_patches: 1024,
        }
    }
}

impl RenderConfig {
    /// Defaults for a language code; Lampung uses a larger 10 pt font.
    pub fn for_language(lang: &str) -> Self {
        let mut cfg = RenderConfig::default();
        if lang == "ljp" {
            cfg.font_size = 10;
        }
        cfg
    }

    pub fn validate(&self) -> Result<(), RenderError> {
        if self.patch_side == 0 {
            return Err(RenderError::Config("patch_side must be at least 1".into()));
        }
        if self.max_patches == 0 {
            return Err(RenderError::Config("max_patches must be at least 1".into()));
        }
        if self.background == self.foreground {
            return Err(RenderError::Config("background and foreground must differ".into()));
        }
        if self.dpi == 0 || self.font_size == 0 {
            return Err(RenderError::Config("dpi and font_size must be positive".into()));
        }
        Ok(())
    }

    /// Em size in pixels: points × dpi / 72, rounded half up.
    pub fn pixel_em(&self) -> u32 {
        let num = self.font_size as u64 * self.dpi as u64;
        ((num * 2 + 72) / 144) as u32
    }

    pub fn max_width(&self) -> usize {
        self.max_patches as usize * self.patch_side as usize
    }

    fn is_ink(&self, value: u8) -> bool {
        value.abs_diff(self.background) > INK_THRESHOLD
    }
}

/// Single-channel 8-bit image, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct Bitmap {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl fmt::Debug for Bitmap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bitmap({}x{})", self.width, self.height)
    }
}

impl Bitmap {
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Bitmap {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn write_png(&self, path: impl AsRef<Path>) -> Result<(), RenderError> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|source| RenderError::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.encode_png(BufWriter::new(file))
    }

    pub fn encode_png<W: std::io::Write>(&self, w: W) -> Result<(), RenderError> {
        let mut encoder = png::Encoder::new(w, self.width as u32, self.height as u32);
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header().map_err(|e| RenderError::Png(e.to_string()))?;
        writer
            .write_image_data(&self.pixels)
            .map_err(|e| RenderError::Png(e.to_string()))?;
        writer.finish().map_err(|e| RenderError::Png(e.to_string()))
    }

    pub fn read_png(path: impl AsRef<Path>) -> Result<Self, RenderError> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| RenderError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::decode_png(BufReader::new(file))
    }

    pub fn decode_png<R: Read>(r: R) -> Result<Self, RenderError> {
        let decoder = png::Decoder::new(r);
        let mut reader = decoder.read_info().map_err(|e| RenderError::Png(e.to_string()))?;
        let mut buf = vec![0; reader.output_buffer_size()];
        let info = reader
            .next_frame(&mut buf)
            .map_err(|e| RenderError::Png(e.to_string()))?;
        if info.color_type != png::ColorType::Grayscale || info.bit_depth != png::BitDepth::Eight {
            return Err(RenderError::Png(format!(
                "expected 8-bit grayscale, got {:?} {:?}",
                info.color_type, info.bit_depth
            )));
        }
        buf.truncate(info.buffer_size());
        Ok(Bitmap {
            width: info.width as usize,
            height: info.height as usize,
            pixels: buf,
        })
    }
}

/// A rendered line, `patch_side` pixels tall.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Strip {
    pub bitmap: Bitmap,
    /// Set when the text did not fit in `max_patches` patches.
    pub truncated: bool,
}

/// Lays `text` out left to right in one line.
///
/// The strip is the narrowest multiple of `patch_side` that covers the
/// padding plus the summed advance widths, capped at `max_patches`
/// patches. Ink that falls outside the strip is clipped.
pub fn render_strip(text: &str, config: &RenderConfig, raster: &dyn GlyphRaster) -> Result<Strip, RenderError> {
    config.validate()?;
    let side = config.patch_side as usize;
    let em = config.pixel_em();

    let mut pen = Fixed::from_px(config.padding_px as i64);
    let mut placed = Vec::with_capacity(text.len());
    for c in text.chars() {
        let glyph = raster.glyph(c, em, config.patch_side);
        let origin = pen.floor_px();
        pen = pen + Fixed(glyph.advance.0.max(0));
        placed.push((origin, glyph));
    }

    let needed = (pen.ceil_px().max(1) as usize).div_ceil(side);
    let patches = needed.min(config.max_patches as usize);
    let truncated = needed > patches;
    let width = patches * side;

    // Max-combine coverage so overlapping glyphs never lighten each other.
    let mut coverage = vec![0u8; width * side];
    for (origin, g) in &placed {
        let x0 = origin + g.left as i64;
        if x0 >= width as i64 {
            break;
        }
        for gy in 0..g.height {
            let y = g.top as i64 + gy as i64;
            if !(0..side as i64).contains(&y) {
                continue;
            }
            for gx in 0..g.width {
                let x = x0 + gx as i64;
                if !(0..width as i64).contains(&x) {
                    continue;
                }
                let cov = g.coverage[gy * g.width + gx];
                let cell = &mut coverage[y as usize * width + x as usize];
                *cell = (*cell).max(cov);
            }
        }
    }

    let (bg, fg) = (config.background as u32, config.foreground as u32);
    let pixels = coverage
        .into_iter()
        .map(|c| {
            let c = c as u32;
            ((bg * (255 - c) + fg * c + 127) / 255) as u8
        })
        .collect();
    Ok(Strip {
        bitmap: Bitmap {
            width,
            height: side,
            pixels,
        },
        truncated,
    })
}

/// A strip cut into square patches, left to right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatchSequence {
    pub patch_side: usize,
    /// Each patch is `patch_side * patch_side` gray levels, row-major.
    pub patches: Vec<Vec<u8>>,
    pub num_text_patches: usize,
    pub truncated: bool,
    pub source_text: String,
}

pub fn patchify(strip: &Strip, config: &RenderConfig) -> Result<PatchSequence, RenderError> {
    config.validate()?;
    let side = config.patch_side as usize;
    let bmp = &strip.bitmap;
    let count = bmp.width / side;
    if bmp.height != side || !bmp.width.is_multiple_of(side) || count > config.max_patches as usize {
        return Err(RenderError::Shape {
            width: bmp.width,
            height: bmp.height,
            side,
            max_patches: config.max_patches as usize,
        });
    }
    let mut patches = Vec::with_capacity(count);
    let mut num_text_patches = 0;
    for p in 0..count {
        let mut patch = Vec::with_capacity(side * side);
        for y in 0..side {
            let row = y * bmp.width + p * side;
            patch.extend_from_slice(&bmp.pixels[row..row + side]);
        }
        if patch.iter().any(|&v| config.is_ink(v)) {
            num_text_patches += 1;
        }
        patches.push(patch);
    }
    Ok(PatchSequence {
        patch_side: side,
        patches,
        num_text_patches,
        truncated: strip.truncated,
        source_text: String::new(),
    })
}

pub fn render_patches(
    text: &str,
    config: &RenderConfig,
    raster: &dyn GlyphRaster,
) -> Result<PatchSequence, RenderError> {
    let strip = render_strip(text, config, raster)?;
    let mut seq = patchify(&strip, config)?;
    seq.source_text = text.to_string();
    Ok(seq)
}

/// Counts patches of a stored strip that contain ink, using the same rule
/// as [`patchify`].
pub fn count_text_patches(bitmap: &Bitmap, config: &RenderConfig) -> Result<usize, RenderError> {
    let strip = Strip {
        bitmap: bitmap.clone(),
        truncated: false,
    };
    Ok(patchify(&strip, config)?.num_text_patches)
}

impl PatchSequence {
    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    /// Puts the patches back side by side.
    pub fn to_bitmap(&self) -> Bitmap {
        let side = self.patch_side;
        let width = side * self.patches.len();
        let mut pixels = vec![0u8; width * side];
        for (p, patch) in self.patches.iter().enumerate() {
            for y in 0..side {
                let dst = y * width + p * side;
                pixels[dst..dst + side].copy_from_slice(&patch[y * side..(y + 1) * side]);
            }
        }
        Bitmap {
            width,
            height: side,
            pixels,
        }
    }

    /// Raw tensor export: a 16-byte preamble of four little-endian `u32`
    /// values (patch count, side, side, 0) followed by the patch pixels,
    /// patch-major then row-major.
    pub fn to_tensor_bytes(&self) -> Vec<u8> {
        let side = self.patch_side as u32;
        let mut out = Vec::with_capacity(TENSOR_PREAMBLE + self.patches.len() * self.patch_side.pow(2));
        for v in [self.patches.len() as u32, side, side, 0] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for p in &self.patches {
            out.extend_from_slice(p);
        }
        out
    }

    /// Reads a tensor written by [`PatchSequence::to_tensor_bytes`]. Returns
    /// the patch side and the patches.
    pub fn patches_from_tensor_bytes(bytes: &[u8]) -> Result<(usize, Vec<Vec<u8>>), RenderError> {
        if bytes.len() < TENSOR_PREAMBLE {
            return Err(RenderError::Tensor("missing preamble".into()));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[i * 4..i * 4 + 4].try_into().unwrap()) as usize;
        let (count, h, w) = (word(0), word(1), word(2));
        if h != w || h == 0 {
            return Err(RenderError::Tensor(format!("patches must be square, got {h}x{w}")));
        }
        let body = &bytes[TENSOR_PREAMBLE..];
        if body.len() != count * h * w {
            return Err(RenderError::Tensor(format!(
                "expected {} pixel bytes, found {}",
                count * h * w,
                body.len()
            )));
        }
        Ok((h, body.chunks(h * w).map(<[u8]>::to_vec).collect()))
    }
}
