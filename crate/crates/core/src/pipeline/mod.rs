//! Corpus ingestion, seeded splitting, dataset construction and the
//! statistics and scoring commands behind the CLI.

mod commands;
mod config;
mod dataset;

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use commands::{
    overlap_records, read_lines, score_command, score_files, stats_command, CorpusInput, LanguageScore, OverlapRecord,
    ScoreOutput, VocabInput,
};
pub use config::{PipelineConfig, RulePaths, SplitSpec};
pub use dataset::{build_dataset, DatasetOutput, PairedExample, Summary, SummaryRecord};

#[derive(Debug, Error)]
pub enum PipelineError {
    /// Bad configuration or arguments; nothing was read or written.
    #[error("{0}")]
    Validation(String),
    /// A line or file could not be processed.
    #[error("{location}: {stage}: {message}")]
    Data {
        location: String,
        stage: &'static str,
        message: String,
    },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl PipelineError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Validation(_) => 1,
            PipelineError::Data { .. } | PipelineError::Io { .. } => 2,
        }
    }

    pub(crate) fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        PipelineError::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}

/// A nonblank input line and where it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceLine {
    pub path: PathBuf,
    /// 1-based line number within `path`.
    pub line: usize,
    pub text: String,
}

impl SourceLine {
    pub fn location(&self) -> String {
        format!("{}:{}", self.path.display(), self.line)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestOptions {
    pub lowercase: bool,
    /// Skip lines that are not valid UTF-8 instead of failing.
    pub lenient: bool,
}

/// Reads every file in order and returns its trimmed, nonblank lines.
/// `\r\n` and lone `\r` both end a line.
pub fn ingest<P: AsRef<Path>>(paths: &[P], opts: IngestOptions) -> Result<Vec<SourceLine>, PipelineError> {
    let mut out = Vec::new();
    for path in paths {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| PipelineError::io(path, e))?;
        let bytes = bytes.strip_prefix(b"\xef\xbb\xbf").unwrap_or(&bytes);
        for (idx, raw) in split_lines(bytes).enumerate() {
            let text = match std::str::from_utf8(raw) {
                Ok(t) => t,
                Err(e) => {
                    let err = PipelineError::Data {
                        location: format!("{}:{}", path.display(), idx + 1),
                        stage: "ingest",
                        message: format!("invalid UTF-8 at byte {}", e.valid_up_to()),
                    };
                    if opts.lenient {
                        log::warn!("skipping {err}");
                        continue;
                    }
                    return Err(err);
                }
            };
            let text = text.trim();
            if text.is_empty() {
                continue;
            }
            out.push(SourceLine {
                path: path.to_path_buf(),
                line: idx + 1,
                text: if opts.lowercase {
                    text.to_lowercase()
                } else {
                    text.to_string()
                },
            });
        }
    }
    Ok(out)
}

fn split_lines(bytes: &[u8]) -> impl Iterator<Item = &[u8]> {
    let mut rest = Some(bytes);
    std::iter::from_fn(move || {
        let cur = rest?;
        match cur.iter().position(|&b| b == b'\n' || b == b'\r') {
            Some(i) => {
                let skip = if cur[i] == b'\r' && cur.get(i + 1) == Some(&b'\n') {
                    2
                } else {
                    1
                };
                rest = Some(&cur[i + skip..]);
                Some(&cur[..i])
            }
            None => {
                rest = None;
                (!cur.is_empty()).then_some(cur)
            }
        }
    })
}

/// Number of training items for `n` lines. Each side with a nonzero
/// fraction keeps at least one item.
pub fn train_count(n: usize, train_fraction: f64) -> usize {
    if n == 0 {
        return 0;
    }
    let raw = (n as f64 * train_fraction).round() as usize;
    let lo = usize::from(train_fraction > 0.0);
    let hi = if train_fraction < 1.0 { n - 1 } else { n };
    raw.clamp(lo, hi.max(lo))
}

/// Shuffles with a seeded ChaCha8 permutation and cuts the result into a
/// train prefix and an eval suffix.
pub fn split<T: Clone>(items: &[T], train_fraction: f64, seed: u64) -> Result<(Vec<T>, Vec<T>), PipelineError> {
    if !(0.0..=1.0).contains(&train_fraction) {
        return Err(PipelineError::Validation(format!(
            "train fraction {train_fraction} is outside [0, 1]"
        )));
    }
    let both = train_fraction > 0.0 && train_fraction < 1.0;
    if both && items.len() < 2 {
        return Err(PipelineError::Data {
            location: "split".into(),
            stage: "split",
            message: format!("{} line(s) cannot fill both a train and an eval part", items.len()),
        });
    }
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let k = train_count(items.len(), train_fraction);
    let pick = |idx: &[usize]| idx.iter().map(|&i| items[i].clone()).collect::<Vec<_>>();
    Ok((pick(&order[..k]), pick(&order[k..])))
}
