//! TrueType/OpenType glyph source backed by `fontdue`.

use std::fs;
use std::path::Path;

use super::{Fixed, Glyph, GlyphRaster, RenderError};

pub struct FontFile {
    font: fontdue::Font,
}

impl std::fmt::Debug for FontFile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FontFile").field("name", &self.font.name()).finish()
    }
}

impl FontFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, RenderError> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| RenderError::Font(format!("{}: {e}", path.display())))?;
        Self::from_bytes(&bytes).map_err(|e| match e {
            RenderError::Font(msg) => RenderError::Font(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, RenderError> {
        let font = fontdue::Font::from_bytes(bytes, fontdue::FontSettings::default())
            .map_err(|e| RenderError::Font(e.to_string()))?;
        Ok(FontFile { font })
    }

    pub fn has_glyph(&self, c: char) -> bool {
        self.font.lookup_glyph_index(c) != 0
    }
}

impl GlyphRaster for FontFile {
    fn glyph(&self, c: char, pixel_em: u32, line_height: u32) -> Glyph {
        let px = pixel_em as f32;
        // Unmapped characters resolve to glyph 0, the font's .notdef box.
        let (metrics, coverage) = self.font.rasterize(c, px);
        let (ascent, descent) = match self.font.horizontal_line_metrics(px) {
            Some(m) => (m.ascent, m.descent),
            None => (px, 0.0),
        };
        let baseline = ((line_height as f32 - (ascent - descent)) / 2.0 + ascent).round() as i32;
        Glyph {
            width: metrics.width,
            height: metrics.height,
            left: metrics.xmin,
            top: baseline - (metrics.ymin + metrics.height as i32),
            coverage,
            advance: Fixed::from_f32(metrics.advance_width),
        }
    }
}
