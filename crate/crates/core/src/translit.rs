//! Table-driven transliteration with longest-match scanning.
//!
//! Rule files are line oriented:
//!
//! ```text
//! # Javanese: Latin to aksara
//! script: jav
//! direction: latin-to-aksara
//! ka	ꦏ
//! ki	ꦏꦶ
//! ```
//!
//! Each rule line is `source<TAB>target`. Lines whose first non-blank
//! character is `#` are comments. Fields are taken verbatim so whitespace can
//! be mapped too.

// The example above needs literal tabs.
#![allow(clippy::tabs_in_doc_comments)]

use std::collections::HashMap;
use std::fs;
use std::ops::Range;
use std::path::Path;

use thiserror::Error;
use unicode_segmentation::UnicodeSegmentation;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TranslitError {
    #[error("rule file is not valid UTF-8 at byte offset {offset}")]
    Decode { offset: usize },
    #[error("rule file must not start with a byte-order mark")]
    ByteOrderMark,
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: empty source string")]
    EmptySource { line: usize },
    #[error("line {line}: duplicate source {key:?} (first defined on line {first_line})")]
    DuplicateSource {
        line: usize,
        key: String,
        first_line: usize,
    },
    #[error("missing `{0}:` header")]
    MissingHeader(&'static str),
    #[error("cannot invert table: {}", describe_collisions(.0))]
    Inversion(Vec<InversionConflict>),
    #[error("reading {path}: {message}")]
    Io { path: String, message: String },
}

/// A rule that prevents inversion: its target is empty or shared with
/// another rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InversionConflict {
    pub index: usize,
    pub source: String,
    pub target: String,
}

fn describe_collisions(conflicts: &[InversionConflict]) -> String {
    conflicts
        .iter()
        .map(|c| format!("#{} {:?}->{:?}", c.index, c.source, c.target))
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub source: String,
    pub target: String,
}

/// Ordered mapping rules for one script and direction.
///
/// Sources are unique, so longest-match lookup never has to break ties and
/// the order is only kept for round-tripping files.
#[derive(Debug, Clone, Default)]
pub struct RuleTable {
    rules: Vec<Rule>,
    direction_label: String,
    script_id: String,
    index: HashMap<String, usize>,
    max_source_len: usize,
}

impl PartialEq for RuleTable {
    fn eq(&self, other: &Self) -> bool {
        self.rules == other.rules && self.direction_label == other.direction_label && self.script_id == other.script_id
    }
}

impl RuleTable {
    /// Builds a table, rejecting empty or repeated sources. Error line
    /// numbers are 1-based rule positions.
    pub fn new(
        script_id: impl Into<String>,
        direction_label: impl Into<String>,
        rules: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self, TranslitError> {
        let mut table = RuleTable {
            script_id: script_id.into(),
            direction_label: direction_label.into(),
            ..Default::default()
        };
        for (i, (source, target)) in rules.into_iter().enumerate() {
            table.push(i + 1, source, target)?;
        }
        Ok(table)
    }

    /// The empty table; transliteration with it is the identity.
    pub fn identity() -> Self {
        Self::default()
    }

    fn push(&mut self, line: usize, source: String, target: String) -> Result<(), TranslitError> {
        if source.is_empty() {
            return Err(TranslitError::EmptySource { line });
        }
        if let Some(&first) = self.index.get(&source) {
            return Err(TranslitError::DuplicateSource {
                line,
                key: source,
                first_line: first + 1,
            });
        }
        self.max_source_len = self.max_source_len.max(source.len());
        self.index.insert(source.clone(), self.rules.len());
        self.rules.push(Rule { source, target });
        Ok(())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, TranslitError> {
        if bytes.starts_with(&[0xEF, 0xBB, 0xBF]) {
            return Err(TranslitError::ByteOrderMark);
        }
        let text = std::str::from_utf8(bytes).map_err(|e| TranslitError::Decode {
            offset: e.valid_up_to(),
        })?;
        Self::parse(text)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TranslitError> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| TranslitError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_bytes(&bytes)
    }

    /// Parses a rule document. A document with no rule lines at all is the
    /// identity table and does not need headers.
    pub fn parse(text: &str) -> Result<Self, TranslitError> {
        if text.starts_with('\u{feff}') {
            return Err(TranslitError::ByteOrderMark);
        }
        let mut table = RuleTable::default();
        let mut script = None;
        let mut direction = None;
        // line numbers of rules, so duplicate errors can name the file line
        let mut rule_lines: Vec<usize> = Vec::new();
        for (idx, raw) in text.split('\n').enumerate() {
            let line_no = idx + 1;
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if let Some((source, target)) = line.split_once('\t') {
                if target.contains('\t') {
                    return Err(TranslitError::Malformed {
                        line: line_no,
                        message: "expected exactly one TAB".into(),
                    });
                }
                match table.push(line_no, source.to_string(), target.to_string()) {
                    Err(TranslitError::DuplicateSource { key, first_line, .. }) => {
                        return Err(TranslitError::DuplicateSource {
                            line: line_no,
                            key,
                            first_line: rule_lines[first_line - 1],
                        })
                    }
                    other => other?,
                }
                rule_lines.push(line_no);
                continue;
            }
            match trimmed.split_once(':') {
                Some(("script", v)) if !v.trim().is_empty() => script = Some(v.trim().to_string()),
                Some(("direction", v)) if !v.trim().is_empty() => direction = Some(v.trim().to_string()),
                _ => {
                    return Err(TranslitError::Malformed {
                        line: line_no,
                        message: format!("expected a `source<TAB>target` rule or header, got {trimmed:?}"),
                    })
                }
            }
        }
        if !table.rules.is_empty() || script.is_some() || direction.is_some() {
            table.script_id = script.ok_or(TranslitError::MissingHeader("script"))?;
            table.direction_label = direction.ok_or(TranslitError::MissingHeader("direction"))?;
        }
        Ok(table)
    }

    /// Serializes back into the rule-file format.
    pub fn to_rule_file(&self) -> String {
        let mut out = format!("script: {}\ndirection: {}\n", self.script_id, self.direction_label);
        for r in &self.rules {
            out.push_str(&r.source);
            out.push('\t');
            out.push_str(&r.target);
            out.push('\n');
        }
        out
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn script_id(&self) -> &str {
        &self.script_id
    }

    pub fn direction_label(&self) -> &str {
        &self.direction_label
    }

    /// Longest rule whose source is a prefix of `rest`.
    fn longest_match(&self, rest: &str) -> Option<(usize, &Rule)> {
        let limit = self.max_source_len.min(rest.len());
        (1..=limit)
            .rev()
            .filter(|&n| rest.is_char_boundary(n))
            .find_map(|n| self.index.get(&rest[..n]).map(|&i| (n, &self.rules[i])))
    }

    /// Swaps source and target of every rule, keeping the order.
    pub fn invert(&self) -> Result<RuleTable, TranslitError> {
        let mut by_target: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, r) in self.rules.iter().enumerate() {
            by_target.entry(r.target.as_str()).or_default().push(i);
        }
        let mut bad: Vec<usize> = by_target
            .iter()
            .filter(|(t, ids)| t.is_empty() || ids.len() > 1)
            .flat_map(|(_, ids)| ids.iter().copied())
            .collect();
        if !bad.is_empty() {
            bad.sort_unstable();
            return Err(TranslitError::Inversion(
                bad.into_iter()
                    .map(|i| InversionConflict {
                        index: i,
                        source: self.rules[i].source.clone(),
                        target: self.rules[i].target.clone(),
                    })
                    .collect(),
            ));
        }
        RuleTable::new(
            self.script_id.clone(),
            invert_label(&self.direction_label),
            self.rules.iter().map(|r| (r.target.clone(), r.source.clone())),
        )
    }
}

fn invert_label(label: &str) -> String {
    match label.split_once("-to-") {
        Some((a, b)) => format!("{b}-to-{a}"),
        None if label.is_empty() => String::new(),
        None => format!("inverse-{label}"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransliterationResult {
    pub output: String,
    /// Byte ranges of the input copied through unchanged, sorted and
    /// disjoint; adjacent pass-through clusters are coalesced.
    pub unmapped_spans: Vec<Range<usize>>,
}

/// Scans `text` left to right, replacing the longest matching rule source
/// at each position. Where nothing matches, one grapheme cluster is copied
/// through.
pub fn transliterate(text: &str, table: &RuleTable) -> TransliterationResult {
    let mut output = String::with_capacity(text.len());
    let mut unmapped_spans: Vec<Range<usize>> = Vec::new();
    let mut pos = 0;
    while pos < text.len() {
        let rest = &text[pos..];
        if let Some((len, rule)) = table.longest_match(rest) {
            output.push_str(&rule.target);
            pos += len;
            continue;
        }
        let cluster = rest.graphemes(true).next().unwrap_or(rest);
        output.push_str(cluster);
        let span = pos..pos + cluster.len();
        match unmapped_spans.last_mut() {
            Some(last) if last.end == span.start => last.end = span.end,
            _ => unmapped_spans.push(span),
        }
        pos += cluster.len();
    }
    TransliterationResult { output, unmapped_spans }
}

pub fn invert_table(table: &RuleTable) -> Result<RuleTable, TranslitError> {
    table.invert()
}
