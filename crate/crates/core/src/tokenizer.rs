//! Word-level vocabulary over grapheme-canonicalized Latin text.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::grapheme::{self, GraphemeError, ScriptRules};
use crate::translit::{transliterate, RuleTable};

pub const PAD: &str = "<pad>";
pub const UNK: &str = "<unk>";
pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";

pub const PAD_ID: u32 = 0;
pub const UNK_ID: u32 = 1;
pub const BOS_ID: u32 = 2;
pub const EOS_ID: u32 = 3;

pub const SPECIALS: [&str; 4] = [PAD, UNK, BOS, EOS];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TokenizerError {
    #[error("token id {id} at position {position} is out of range for a vocabulary of {size}")]
    IdOutOfRange { position: usize, id: u32, size: usize },
    #[error("vocabulary line {line}: {message}")]
    VocabFile { line: usize, message: String },
    #[error("reading {path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Decode(#[from] GraphemeError),
}

/// Runs text through aksara and back, so spelling variants that share an
/// aksara form collapse to one Latin spelling. Whitespace runs become a
/// single space and the ends are trimmed.
pub fn canonicalize(text: &str, to_aksara: &RuleTable, rules: &ScriptRules, to_latin: &RuleTable) -> String {
    let aksara = transliterate(text, to_aksara).output;
    // Segmentation only checks that the aksara tiles into clusters; the text
    // itself is unchanged by it.
    debug_assert_eq!(
        grapheme::segment_script(&aksara, rules)
            .iter()
            .map(|c| c.text)
            .collect::<String>(),
        aksara
    );
    let latin = transliterate(&aksara, to_latin).output;
    collapse_whitespace(&latin)
}

pub fn canonicalize_bytes(
    bytes: &[u8],
    to_aksara: &RuleTable,
    rules: &ScriptRules,
    to_latin: &RuleTable,
) -> Result<String, TokenizerError> {
    let text = grapheme::decode(bytes)?;
    Ok(canonicalize(text, to_aksara, rules, to_latin))
}

pub fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    token_to_id: HashMap<String, u32>,
    id_to_token: Vec<String>,
    source_script: String,
}

impl Vocabulary {
    fn with_specials(source_script: impl Into<String>) -> Self {
        let id_to_token: Vec<String> = SPECIALS.iter().map(|s| s.to_string()).collect();
        let token_to_id = id_to_token
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Vocabulary {
            token_to_id,
            id_to_token,
            source_script: source_script.into(),
        }
    }

    fn push(&mut self, token: String) -> bool {
        if self.token_to_id.contains_key(&token) {
            return false;
        }
        self.token_to_id.insert(token.clone(), self.id_to_token.len() as u32);
        self.id_to_token.push(token);
        true
    }

    /// Builds from whitespace-delimited words with frequency ≥ `min_count`.
    /// IDs follow the four specials in order of descending frequency, with
    /// ties broken lexicographically.
    pub fn build<I, S>(corpus: I, min_count: usize) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let min_count = min_count.max(1);
        let mut counts: HashMap<String, usize> = HashMap::new();
        for line in corpus {
            for word in line.as_ref().split_whitespace() {
                if SPECIALS.contains(&word) {
                    continue;
                }
                match counts.get_mut(word) {
                    Some(c) => *c += 1,
                    None => {
                        counts.insert(word.to_string(), 1);
                    }
                }
            }
        }
        let mut ranked: Vec<(String, usize)> = counts.into_iter().filter(|(_, c)| *c >= min_count).collect();
        ranked.sort_unstable_by(|(a, ca), (b, cb)| cb.cmp(ca).then_with(|| a.cmp(b)));
        let mut vocab = Vocabulary::with_specials("");
        for (token, _) in ranked {
            vocab.push(token);
        }
        vocab
    }

    /// Parses a vocabulary file: line k holds the token with ID k and the
    /// first four lines are the special markers.
    pub fn parse(text: &str) -> Result<Self, TokenizerError> {
        let body = text.strip_suffix('\n').unwrap_or(text);
        let mut vocab = Vocabulary::with_specials("");
        for (idx, raw) in body.split('\n').enumerate() {
            let line = idx + 1;
            let token = raw.strip_suffix('\r').unwrap_or(raw);
            if idx < SPECIALS.len() {
                if token != SPECIALS[idx] {
                    return Err(TokenizerError::VocabFile {
                        line,
                        message: format!("expected special marker {:?}, got {token:?}", SPECIALS[idx]),
                    });
                }
                continue;
            }
            if token.is_empty() {
                return Err(TokenizerError::VocabFile {
                    line,
                    message: "empty token".into(),
                });
            }
            if !vocab.push(token.to_string()) {
                let first = vocab.token_to_id[token] as usize + 1;
                return Err(TokenizerError::VocabFile {
                    line,
                    message: format!("duplicate token {token:?} (first on line {first})"),
                });
            }
        }
        if body.split('\n').count() < SPECIALS.len() {
            return Err(TokenizerError::VocabFile {
                line: 1,
                message: "missing special markers".into(),
            });
        }
        Ok(vocab)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TokenizerError> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| TokenizerError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let text = grapheme::decode(&bytes)?;
        Self::parse(text)
    }

    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for token in &self.id_to_token {
            out.push_str(token);
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), TokenizerError> {
        let path = path.as_ref();
        fs::write(path, self.to_file_string()).map_err(|e| TokenizerError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn with_source_script(mut self, script: impl Into<String>) -> Self {
        self.source_script = script.into();
        self
    }

    pub fn source_script(&self) -> &str {
        &self.source_script
    }

    pub fn size(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.token_to_id.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.id_to_token.get(id as usize).map(String::as_str)
    }

    /// Non-special tokens, in ID order.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.id_to_token[SPECIALS.len()..].iter().map(String::as_str)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.token_to_id.contains_key(token)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoding {
    pub ids: Vec<u32>,
    /// Indices into `ids` holding the unknown ID.
    pub oov_positions: Vec<usize>,
    pub word_count: usize,
    /// Whether `ids` is wrapped in begin/end markers.
    pub sentinels: bool,
}

impl Encoding {
    /// Number of tokens excluding begin/end markers.
    pub fn token_count(&self) -> usize {
        if self.sentinels {
            self.ids.len().saturating_sub(2)
        } else {
            self.ids.len()
        }
    }
}

pub fn encode(text: &str, vocab: &Vocabulary, add_sentinels: bool) -> Encoding {
    let mut ids = Vec::new();
    let mut oov_positions = Vec::new();
    if add_sentinels {
        ids.push(BOS_ID);
    }
    let mut word_count = 0;
    for word in text.split_whitespace() {
        word_count += 1;
        match vocab.id(word) {
            Some(id) => ids.push(id),
            None => {
                oov_positions.push(ids.len());
                ids.push(UNK_ID);
            }
        }
    }
    if add_sentinels {
        ids.push(EOS_ID);
    }
    Encoding {
        ids,
        oov_positions,
        word_count,
        sentinels: add_sentinels,
    }
}

pub fn decode(ids: &[u32], vocab: &Vocabulary) -> Result<String, TokenizerError> {
    let mut words = Vec::with_capacity(ids.len());
    for (position, &id) in ids.iter().enumerate() {
        let token = vocab.token(id).ok_or(TokenizerError::IdOutOfRange {
            position,
            id,
            size: vocab.size(),
        })?;
        if id != PAD_ID {
            words.push(token);
        }
    }
    Ok(words.join(" "))
}
