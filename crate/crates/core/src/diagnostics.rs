//! Tokenizer statistics: fertility, sequence length, inflation, OOV rate and
//! vocabulary overlap.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tokenizer::{Encoding, Vocabulary};

#[derive(Debug, Error, PartialEq)]
pub enum DiagnosticsError {
    #[error("{0} is undefined for this input")]
    Undefined(&'static str),
    #[error("inflation needs a positive base length, got {0}")]
    NonPositiveBase(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenizerReport {
    pub language: String,
    pub tokenizer_id: String,
    /// Tokens per word.
    pub fertility: f64,
    /// Tokens per example.
    pub avg_seq_len: f64,
    pub oov_rate: f64,
    pub example_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub shared: usize,
    pub union_size: usize,
    pub overlap_pct: f64,
}

fn totals(encodings: &[Encoding]) -> (usize, usize, usize) {
    encodings.iter().fold((0, 0, 0), |(t, w, o), e| {
        (t + e.token_count(), w + e.word_count, o + e.oov_positions.len())
    })
}

/// Total tokens (begin/end markers excluded) over total words.
pub fn fertility(encodings: &[Encoding]) -> Result<f64, DiagnosticsError> {
    let (tokens, words, _) = totals(encodings);
    if words == 0 {
        return Err(DiagnosticsError::Undefined("fertility"));
    }
    Ok(tokens as f64 / words as f64)
}

/// Mean tokens per example, markers excluded.
pub fn avg_seq_len(encodings: &[Encoding]) -> Result<f64, DiagnosticsError> {
    if encodings.is_empty() {
        return Err(DiagnosticsError::Undefined("average sequence length"));
    }
    let (tokens, _, _) = totals(encodings);
    Ok(tokens as f64 / encodings.len() as f64)
}

/// Relative change of `other_len` against `base_len`, in percent.
pub fn inflation(base_len: f64, other_len: f64) -> Result<f64, DiagnosticsError> {
    if base_len.is_nan() || base_len <= 0.0 {
        return Err(DiagnosticsError::NonPositiveBase(base_len));
    }
    Ok(100.0 * (other_len - base_len) / base_len)
}

/// Unknown tokens over words.
pub fn oov_rate(encodings: &[Encoding]) -> Result<f64, DiagnosticsError> {
    let (_, words, oov) = totals(encodings);
    if words == 0 {
        return Err(DiagnosticsError::Undefined("OOV rate"));
    }
    Ok(oov as f64 / words as f64)
}

/// Shared and total distinct non-special tokens of two vocabularies.
pub fn vocab_overlap(a: &Vocabulary, b: &Vocabulary) -> Result<OverlapReport, DiagnosticsError> {
    token_overlap(a.tokens(), b.tokens())
}

/// [`vocab_overlap`] over plain token sets.
pub fn token_overlap<'a>(
    a: impl IntoIterator<Item = &'a str>,
    b: impl IntoIterator<Item = &'a str>,
) -> Result<OverlapReport, DiagnosticsError> {
    let a: HashSet<&str> = a.into_iter().collect();
    let b: HashSet<&str> = b.into_iter().collect();
    let shared = a.intersection(&b).count();
    let union_size = a.len() + b.len() - shared;
    if union_size == 0 {
        return Err(DiagnosticsError::Undefined("vocabulary overlap"));
    }
    Ok(OverlapReport {
        shared,
        union_size,
        overlap_pct: 100.0 * shared as f64 / union_size as f64,
    })
}

/// All four statistics for one corpus under one tokenizer.
pub fn report(
    language: impl Into<String>,
    tokenizer_id: impl Into<String>,
    encodings: &[Encoding],
) -> Result<TokenizerReport, DiagnosticsError> {
    Ok(TokenizerReport {
        language: language.into(),
        tokenizer_id: tokenizer_id.into(),
        fertility: fertility(encodings)?,
        avg_seq_len: avg_seq_len(encodings)?,
        oov_rate: oov_rate(encodings)?,
        example_count: encodings.len(),
    })
}

/// One JSON object per line.
pub fn to_jsonl<T: Serialize>(records: &[T]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("report records serialize") + "\n")
        .collect()
}

/// Space-aligned table with a header row.
pub fn format_table(reports: &[TokenizerReport]) -> String {
    let header = [
        "language",
        "tokenizer",
        "fertility",
        "avg_seq_len",
        "oov_rate",
        "examples",
    ];
    let rows: Vec<[String; 6]> = reports
        .iter()
        .map(|r| {
            [
                r.language.clone(),
                r.tokenizer_id.clone(),
                format!("{:.4}", r.fertility),
                format!("{:.2}", r.avg_seq_len),
                format!("{:.4}", r.oov_rate),
                r.example_count.to_string(),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut push_row = |cells: &[&str]| {
        let line: Vec<String> = cells
            .iter()
            .zip(widths)
            .enumerate()
            .map(|(i, (c, w))| if i < 2 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    };
    push_row(&header);
    for row in &rows {
        push_row(&row.each_ref().map(String::as_str));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenizer::encode;

    fn enc(tokens: usize, words: usize, oov: usize) -> Encoding {
        Encoding {
            ids: vec![4; tokens],
            oov_positions: (0..oov).collect(),
            word_count: words,
            sentinels: false,
        }
    }

    #[test]
    fn fertility_examples() {
        assert_eq!(fertility(&[enc(3, 3, 0), enc(1, 1, 0)]).unwrap(), 1.0);
        assert_eq!(fertility(&[enc(3, 2, 0)]).unwrap(), 1.5);
        assert_eq!(
            fertility(&[enc(0, 0, 0)]),
            Err(DiagnosticsError::Undefined("fertility"))
        );
    }

    #[test]
    fn sentinels_do_not_count() {
        let v = Vocabulary::build(["a b"], 1);
        let e = encode("a b", &v, true);
        assert_eq!(fertility(std::slice::from_ref(&e)).unwrap(), 1.0);
        assert_eq!(avg_seq_len(&[e]).unwrap(), 2.0);
    }

    #[test]
    fn avg_seq_len_examples() {
        assert_eq!(avg_seq_len(&[enc(46, 40, 0), enc(46, 41, 0)]).unwrap(), 46.0);
        assert!(avg_seq_len(&[]).is_err());
    }

    #[test]
    fn inflation_table_rows() {
        let round1 = |x: f64| (x * 10.0).round() / 10.0;
        assert_eq!(round1(inflation(45.97, 65.11).unwrap()), 41.6);
        assert_eq!(round1(inflation(39.41, 61.42).unwrap()), 55.8);
        assert_eq!(inflation(7.5, 7.5).unwrap(), 0.0);
        assert_eq!(inflation(0.0, 1.0), Err(DiagnosticsError::NonPositiveBase(0.0)));
        assert!(inflation(-1.0, 1.0).is_err());
    }

    #[test]
    fn inflation_is_reciprocal() {
        for (a, b) in [(45.97, 65.11), (3.73, 4.21), (130.04, 130.86), (2.0, 1.0)] {
            let ab = inflation(a, b).unwrap();
            let ba = inflation(b, a).unwrap();
            assert!(((1.0 + ab / 100.0) * (1.0 + ba / 100.0) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn oov_examples() {
        assert_eq!(oov_rate(&[enc(4, 4, 0)]).unwrap(), 0.0);
        assert_eq!(oov_rate(&[enc(6, 6, 2), enc(4, 4, 0)]).unwrap(), 0.2);
    }

    #[test]
    fn overlap_examples() {
        let a = Vocabulary::build(["x y z"], 1);
        let b = Vocabulary::build(["y z w"], 1);
        let r = vocab_overlap(&a, &b).unwrap();
        assert_eq!((r.shared, r.union_size, r.overlap_pct), (2, 4, 50.0));
        assert_eq!(vocab_overlap(&b, &a).unwrap(), r);
        assert_eq!(vocab_overlap(&a, &a).unwrap().overlap_pct, 100.0);
        let c = Vocabulary::build(["q"], 1);
        assert_eq!(vocab_overlap(&a, &c).unwrap().overlap_pct, 0.0);
        let empty = Vocabulary::build(Vec::<String>::new(), 1);
        assert!(vocab_overlap(&empty, &empty).is_err());
    }

    #[test]
    fn duplicating_corpus_keeps_fertility() {
        let es = vec![enc(3, 2, 0), enc(5, 5, 1), enc(1, 1, 1)];
        let doubled: Vec<Encoding> = es.iter().chain(es.iter()).cloned().collect();
        assert_eq!(fertility(&es).unwrap(), fertility(&doubled).unwrap());
    }

    #[test]
    fn table_and_jsonl() {
        let r = report("jav", "wiki-jav", &[enc(46, 40, 4)]).unwrap();
        let table = format_table(std::slice::from_ref(&r));
        assert_eq!(
            table,
            "language  tokenizer  fertility  avg_seq_len  oov_rate  examples\n\
             jav       wiki-jav      1.1500        46.00    0.1000         1\n"
        );
        let line = to_jsonl(std::slice::from_ref(&r));
        let back: TokenizerReport = serde_json::from_str(line.trim_end()).unwrap();
        assert_eq!(back, r);
    }
}
