//! Corpus-level chrF++, BLEU and WER.
//!
//! All three metrics sum counts over segments before dividing, so a corpus
//! score is not the mean of segment scores.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Precision floor for BLEU orders without matches.
pub const BLEU_FLOOR: f64 = 1e-16;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("{references} references but {hypotheses} hypotheses")]
    LengthMismatch { references: usize, hypotheses: usize },
    #[error("no segments to score")]
    Empty,
    #[error("references contain no words")]
    NoReferenceWords,
    #[error("invalid metric configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WerAggregation {
    /// Total edits over total reference words.
    #[default]
    Micro,
    /// Mean of per-segment rates.
    Macro,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricConfig {
    pub char_ngram_max: usize,
    pub word_ngram_max: usize,
    pub beta: f64,
    pub bleu_max_order: usize,
    pub wer_aggregation: WerAggregation,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            char_ngram_max: 6,
            word_ngram_max: 2,
            beta: 2.0,
            bleu_max_order: 4,
            wer_aggregation: WerAggregation::Micro,
        }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<(), MetricError> {
        if self.char_ngram_max == 0 || self.word_ngram_max == 0 || self.bleu_max_order == 0 {
            return Err(MetricError::Config("n-gram orders must be at least 1".into()));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(MetricError::Config("beta must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub chrf_pp: f64,
    pub bleu: f64,
    /// Can exceed 100 when hypotheses are much longer than references.
    pub wer_pct: f64,
    pub segment_count: usize,
}

fn check_pair<R: AsRef<str>, H: AsRef<str>>(references: &[R], hypotheses: &[H]) -> Result<(), MetricError> {
    if references.len() != hypotheses.len() {
        return Err(MetricError::LengthMismatch {
            references: references.len(),
            hypotheses: hypotheses.len(),
        });
    }
    if references.is_empty() {
        return Err(MetricError::Empty);
    }
    Ok(())
}

fn ngram_counts<T: Hash + Eq>(items: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut counts = HashMap::new();
    if n > 0 && items.len() >= n {
        for gram in items.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Hypothesis n-gram total, reference n-gram total, clipped matches.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct OrderStats {
    hyp: usize,
    reference: usize,
    matched: usize,
}

impl OrderStats {
    fn add<T: Hash + Eq>(&mut self, hyp: &[T], reference: &[T], n: usize) {
        let h = ngram_counts(hyp, n);
        let r = ngram_counts(reference, n);
        self.hyp += h.values().sum::<usize>();
        self.reference += r.values().sum::<usize>();
        self.matched += h
            .iter()
            .map(|(gram, &c)| c.min(r.get(gram).copied().unwrap_or(0)))
            .sum::<usize>();
    }
}

fn f_beta(stats: OrderStats, beta: f64) -> f64 {
    if stats.hyp == 0 || stats.reference == 0 || stats.matched == 0 {
        return 0.0;
    }
    let p = stats.matched as f64 / stats.hyp as f64;
    let r = stats.matched as f64 / stats.reference as f64;
    let b2 = beta * beta;
    (1.0 + b2) * p * r / (b2 * p + r)
}

/// chrF++: character n-grams (whitespace removed) of orders
/// 1..=`char_ngram_max` plus word n-grams of orders 1..=`word_ngram_max`.
/// The score is 100 times the mean F-beta over all orders. An order with no
/// n-grams on either side carries no information and is left out of the
/// mean; if every order is empty on both sides the texts agree and the
/// score is 100.
pub fn chrf_pp<R: AsRef<str>, H: AsRef<str>>(
    references: &[R],
    hypotheses: &[H],
    cfg: &MetricConfig,
) -> Result<f64, MetricError> {
    check_pair(references, hypotheses)?;
    cfg.validate()?;
    let mut char_stats = vec![OrderStats::default(); cfg.char_ngram_max];
    let mut word_stats = vec![OrderStats::default(); cfg.word_ngram_max];
    for (r, h) in references.iter().zip(hypotheses) {
        let (r, h) = (r.as_ref(), h.as_ref());
        let rc: Vec<char> = r.chars().filter(|c| !c.is_whitespace()).collect();
        let hc: Vec<char> = h.chars().filter(|c| !c.is_whitespace()).collect();
        for (i, s) in char_stats.iter_mut().enumerate() {
            s.add(&hc, &rc, i + 1);
        }
        let rw: Vec<&str> = r.split_whitespace().collect();
        let hw: Vec<&str> = h.split_whitespace().collect();
        for (i, s) in word_stats.iter_mut().enumerate() {
            s.add(&hw, &rw, i + 1);
        }
    }
    let scores: Vec<f64> = char_stats
        .into_iter()
        .chain(word_stats)
        .filter(|s| s.hyp > 0 || s.reference > 0)
        .map(|s| f_beta(s, cfg.beta))
        .collect();
    if scores.is_empty() {
        return Ok(100.0);
    }
    Ok(100.0 * scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Corpus BLEU over whitespace tokens with a brevity penalty. Orders
/// without any clipped match contribute [`BLEU_FLOOR`] as their precision,
/// so a corpus that shares nothing scores effectively zero.
pub fn bleu<R: AsRef<str>, H: AsRef<str>>(
    references: &[R],
    hypotheses: &[H],
    cfg: &MetricConfig,
) -> Result<f64, MetricError> {
    check_pair(references, hypotheses)?;
    cfg.validate()?;
    let mut stats = vec![OrderStats::default(); cfg.bleu_max_order];
    let (mut ref_len, mut hyp_len) = (0usize, 0usize);
    for (r, h) in references.iter().zip(hypotheses) {
        let rw: Vec<&str> = r.as_ref().split_whitespace().collect();
        let hw: Vec<&str> = h.as_ref().split_whitespace().collect();
        ref_len += rw.len();
        hyp_len += hw.len();
        for (i, s) in stats.iter_mut().enumerate() {
            s.add(&hw, &rw, i + 1);
        }
    }
    if hyp_len == 0 {
        return Ok(0.0);
    }
    let log_precision: f64 = stats
        .iter()
        .map(|s| {
            let p = if s.hyp == 0 {
                0.0
            } else {
                s.matched as f64 / s.hyp as f64
            };
            p.max(BLEU_FLOOR).ln()
        })
        .sum::<f64>()
        / cfg.bleu_max_order as f64;
    let brevity = (1.0 - ref_len as f64 / hyp_len as f64).min(0.0);
    Ok(100.0 * (brevity + log_precision).exp())
}

/// Unit-cost Levenshtein distance between two sequences.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Word error rate in percent.
pub fn wer<R: AsRef<str>, H: AsRef<str>>(
    references: &[R],
    hypotheses: &[H],
    aggregation: WerAggregation,
) -> Result<f64, MetricError> {
    check_pair(references, hypotheses)?;
    let mut edits = 0usize;
    let mut words = 0usize;
    let mut rates = Vec::with_capacity(references.len());
    for (r, h) in references.iter().zip(hypotheses) {
        let rw: Vec<&str> = r.as_ref().split_whitespace().collect();
        let hw: Vec<&str> = h.as_ref().split_whitespace().collect();
        let d = edit_distance(&rw, &hw);
        edits += d;
        words += rw.len();
        if aggregation == WerAggregation::Macro {
            if rw.is_empty() {
                return Err(MetricError::NoReferenceWords);
            }
            rates.push(d as f64 / rw.len() as f64);
        }
    }
    if words == 0 {
        return Err(MetricError::NoReferenceWords);
    }
    Ok(match aggregation {
        WerAggregation::Micro => 100.0 * edits as f64 / words as f64,
        WerAggregation::Macro => 100.0 * rates.iter().sum::<f64>() / rates.len() as f64,
    })
}

pub fn score<R: AsRef<str>, H: AsRef<str>>(
    references: &[R],
    hypotheses: &[H],
    cfg: &MetricConfig,
) -> Result<ScoreReport, MetricError> {
    Ok(ScoreReport {
        chrf_pp: chrf_pp(references, hypotheses, cfg)?,
        bleu: bleu(references, hypotheses, cfg)?,
        wer_pct: wer(references, hypotheses, cfg.wer_aggregation)?,
        segment_count: references.len(),
    })
}
