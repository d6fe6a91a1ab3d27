use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::diagnostics::{self, TokenizerReport};
use crate::metrics::{self, MetricConfig, MetricError, ScoreReport};
use crate::tokenizer::{encode, Vocabulary};

/// Corpus lines for one language, already in tokenizer form.
#[derive(Debug, Clone)]
pub struct CorpusInput {
    pub language: String,
    pub lines: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct VocabInput {
    pub tokenizer_id: String,
    pub vocab: Vocabulary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapRecord {
    pub a: String,
    pub b: String,
    pub shared: usize,
    pub union_size: usize,
    pub overlap_pct: f64,
}

/// One report per corpus and vocabulary pair, corpora outermost.
pub fn stats_command(corpora: &[CorpusInput], vocabs: &[VocabInput]) -> Result<Vec<TokenizerReport>, PipelineError> {
    let mut out = Vec::with_capacity(corpora.len() * vocabs.len());
    for c in corpora {
        for v in vocabs {
            let encodings: Vec<_> = c.lines.iter().map(|l| encode(l, &v.vocab, false)).collect();
            let r = diagnostics::report(&c.language, &v.tokenizer_id, &encodings).map_err(|e| PipelineError::Data {
                location: format!("{} under {}", c.language, v.tokenizer_id),
                stage: "stats",
                message: e.to_string(),
            })?;
            out.push(r);
        }
    }
    Ok(out)
}

/// Overlap for every unordered pair of vocabularies, in input order.
pub fn overlap_records(vocabs: &[VocabInput]) -> Result<Vec<OverlapRecord>, PipelineError> {
    let mut out = Vec::new();
    for (i, a) in vocabs.iter().enumerate() {
        for b in &vocabs[i + 1..] {
            let r = diagnostics::vocab_overlap(&a.vocab, &b.vocab).map_err(|e| PipelineError::Data {
                location: format!("{} and {}", a.tokenizer_id, b.tokenizer_id),
                stage: "overlap",
                message: e.to_string(),
            })?;
            out.push(OverlapRecord {
                a: a.tokenizer_id.clone(),
                b: b.tokenizer_id.clone(),
                shared: r.shared,
                union_size: r.union_size,
                overlap_pct: r.overlap_pct,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageScore {
    pub language: String,
    #[serde(flatten)]
    pub report: ScoreReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreOutput {
    pub overall: ScoreReport,
    /// Sorted by language; empty without a language column.
    pub per_language: Vec<LanguageScore>,
}

fn metric_err(e: MetricError) -> PipelineError {
    match e {
        MetricError::Config(m) => PipelineError::Validation(m),
        other => PipelineError::Data {
            location: "corpus".into(),
            stage: "score",
            message: other.to_string(),
        },
    }
}

/// Scores aligned reference and hypothesis lines, optionally also per
/// language given one language code per line.
pub fn score_command(
    references: &[String],
    hypotheses: &[String],
    languages: Option<&[String]>,
    cfg: &MetricConfig,
) -> Result<ScoreOutput, PipelineError> {
    cfg.validate().map_err(metric_err)?;
    let overall = metrics::score(references, hypotheses, cfg).map_err(metric_err)?;
    let mut per_language = Vec::new();
    if let Some(langs) = languages {
        if langs.len() != references.len() {
            return Err(PipelineError::Data {
                location: "corpus".into(),
                stage: "score",
                message: format!("{} language labels for {} segments", langs.len(), references.len()),
            });
        }
        let mut groups: BTreeMap<&str, (Vec<&str>, Vec<&str>)> = BTreeMap::new();
        for ((l, r), h) in langs.iter().zip(references).zip(hypotheses) {
            let g = groups.entry(l.as_str()).or_default();
            g.0.push(r);
            g.1.push(h);
        }
        for (lang, (refs, hyps)) in groups {
            let report = metrics::score(&refs, &hyps, cfg).map_err(|e| match metric_err(e) {
                PipelineError::Data { message, .. } => PipelineError::Data {
                    location: format!("language {lang}"),
                    stage: "score",
                    message,
                },
                other => other,
            })?;
            per_language.push(LanguageScore {
                language: lang.to_string(),
                report,
            });
        }
    }
    Ok(ScoreOutput { overall, per_language })
}

/// File lines with `\r\n` handled and blank lines kept, since scoring
/// pairs lines by position.
pub fn read_lines(path: &Path) -> Result<Vec<String>, PipelineError> {
    let bytes = fs::read(path).map_err(|e| PipelineError::io(path, e))?;
    let text = String::from_utf8(bytes).map_err(|e| PipelineError::Data {
        location: path.display().to_string(),
        stage: "read",
        message: format!("invalid UTF-8 at byte {}", e.utf8_error().valid_up_to()),
    })?;
    Ok(text.lines().map(|l| l.trim().to_string()).collect())
}

pub fn score_files(
    references: &Path,
    hypotheses: &Path,
    languages: Option<&Path>,
    cfg: &MetricConfig,
) -> Result<ScoreOutput, PipelineError> {
    let refs = read_lines(references)?;
    let hyps = read_lines(hypotheses)?;
    let langs = languages.map(read_lines).transpose()?;
    score_command(&refs, &hyps, langs.as_deref(), cfg)
}
