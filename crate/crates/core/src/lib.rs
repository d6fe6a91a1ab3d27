//! Script-aware preprocessing and evaluation for low-resource Brahmic
//! scripts: transliteration between Latin and aksara, grapheme-level
//! segmentation, word-level vocabularies, continuous text rendering into
//! pixel patches, tokenizer statistics and transliteration scoring.

pub mod assets;
pub mod cli;
pub mod diagnostics;
pub mod grapheme;
pub mod metrics;
pub mod pipeline;
pub mod renderer;
pub mod tokenizer;
pub mod translit;
