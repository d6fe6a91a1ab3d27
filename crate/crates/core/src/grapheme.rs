//! Grapheme cluster segmentation with script-specific conjunct merging.
//!
//! The base layer is the Unicode extended grapheme cluster algorithm. On top
//! of it, a [`ScriptRules`] value describes how a script joins consonants
//! through a virama (Javanese pangkon, Balinese adeg-adeg, Sundanese
//! pamaaeh) so that a whole conjunct stack comes out as one cluster.

use std::collections::{BTreeSet, HashMap};
use std::ops::{Range, RangeInclusive};

use thiserror::Error;
use unicode_segmentation::UnicodeSegmentation;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphemeError {
    #[error("invalid UTF-8 at byte offset {offset}")]
    Decode { offset: usize },
    #[error("script rules line {line}: {message}")]
    RuleFile { line: usize, message: String },
    #[error("script rules `{script}`: codepoint U+{codepoint:04X} is both a virama and a consonant")]
    ViramaIsConsonant { script: String, codepoint: u32 },
    #[error("script `{0}` is already registered")]
    DuplicateScript(String),
}

/// One user-perceived character unit, borrowed from the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphemeCluster<'a> {
    pub text: &'a str,
    pub byte_range: Range<usize>,
}

/// Validates raw bytes as UTF-8, reporting the first bad offset.
pub fn decode(bytes: &[u8]) -> Result<&str, GraphemeError> {
    std::str::from_utf8(bytes).map_err(|e| GraphemeError::Decode {
        offset: e.valid_up_to(),
    })
}

/// Extended grapheme clusters of `text`, in order.
pub fn segment_base(text: &str) -> Vec<GraphemeCluster<'_>> {
    text.grapheme_indices(true)
        .map(|(start, g)| GraphemeCluster {
            text: g,
            byte_range: start..start + g.len(),
        })
        .collect()
}

/// Like [`segment_base`] but starting from unvalidated bytes.
pub fn segment_base_bytes(bytes: &[u8]) -> Result<Vec<GraphemeCluster<'_>>, GraphemeError> {
    decode(bytes).map(segment_base)
}

/// Joining behaviour of one script.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptRules {
    script_id: String,
    virama: BTreeSet<char>,
    consonants: Vec<RangeInclusive<char>>,
    extra_joiners: BTreeSet<char>,
}

impl ScriptRules {
    pub fn new(
        script_id: impl Into<String>,
        virama: impl IntoIterator<Item = char>,
        consonants: impl IntoIterator<Item = RangeInclusive<char>>,
        extra_joiners: impl IntoIterator<Item = char>,
    ) -> Result<Self, GraphemeError> {
        let rules = ScriptRules {
            script_id: script_id.into(),
            virama: virama.into_iter().collect(),
            consonants: consonants.into_iter().collect(),
            extra_joiners: extra_joiners.into_iter().collect(),
        };
        if let Some(&v) = rules.virama.iter().find(|&&v| rules.is_consonant(v)) {
            return Err(GraphemeError::ViramaIsConsonant {
                script: rules.script_id,
                codepoint: v as u32,
            });
        }
        Ok(rules)
    }

    /// Rules that never merge anything; segmentation equals the base layer.
    pub fn none() -> Self {
        ScriptRules {
            script_id: "none".to_string(),
            virama: BTreeSet::new(),
            consonants: Vec::new(),
            extra_joiners: BTreeSet::new(),
        }
    }

    /// Parses the declarative script-rules format:
    ///
    /// ```text
    /// # Javanese
    /// script: jav
    /// virama: U+A9C0
    /// consonants: U+A98F-U+A9B2
    /// joiners: U+200D
    /// ```
    ///
    /// Values are comma separated, each a codepoint or an inclusive `U+XXXX-U+YYYY`
    /// range, and keys may repeat.
    pub fn parse(source: &str) -> Result<Self, GraphemeError> {
        if source.starts_with('\u{feff}') {
            return Err(rule_err(1, "byte-order mark is not allowed"));
        }
        let mut script_id = None;
        let mut virama = Vec::new();
        let mut consonants = Vec::new();
        let mut joiners = Vec::new();
        for (idx, raw) in source.lines().enumerate() {
            let line_no = idx + 1;
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| rule_err(line_no, "expected `key: value`"))?;
            let value = value.trim();
            match key.trim() {
                "script" => {
                    if value.is_empty() {
                        return Err(rule_err(line_no, "empty script id"));
                    }
                    if script_id.replace(value.to_string()).is_some() {
                        return Err(rule_err(line_no, "script declared twice"));
                    }
                }
                "virama" => {
                    for item in split_list(value) {
                        virama.extend(parse_range(item, line_no)?);
                    }
                }
                "consonants" => {
                    for item in split_list(value) {
                        consonants.push(parse_range(item, line_no)?);
                    }
                }
                "joiners" => {
                    for item in split_list(value) {
                        joiners.extend(parse_range(item, line_no)?);
                    }
                }
                other => return Err(rule_err(line_no, format!("unknown key `{other}`"))),
            }
        }
        let script_id = script_id.ok_or_else(|| rule_err(1, "missing `script:` header"))?;
        ScriptRules::new(script_id, virama, consonants, joiners)
    }

    pub fn script_id(&self) -> &str {
        &self.script_id
    }

    pub fn is_virama(&self, c: char) -> bool {
        self.virama.contains(&c)
    }

    pub fn is_consonant(&self, c: char) -> bool {
        self.consonants.iter().any(|r| r.contains(&c))
    }

    pub fn is_joiner(&self, c: char) -> bool {
        self.extra_joiners.contains(&c)
    }

    fn joins(&self, left: &str, right: &str) -> bool {
        let (Some(last), Some(first)) = (left.chars().next_back(), right.chars().next()) else {
            return false;
        };
        (self.is_virama(last) && self.is_consonant(first)) || self.is_joiner(first)
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn rule_err(line: usize, message: impl Into<String>) -> GraphemeError {
    GraphemeError::RuleFile {
        line,
        message: message.into(),
    }
}

fn parse_codepoint(item: &str, line: usize) -> Result<char, GraphemeError> {
    let hex = item
        .strip_prefix("U+")
        .or_else(|| item.strip_prefix("u+"))
        .ok_or_else(|| rule_err(line, format!("expected U+XXXX, got `{item}`")))?;
    u32::from_str_radix(hex, 16)
        .ok()
        .and_then(char::from_u32)
        .ok_or_else(|| rule_err(line, format!("invalid codepoint `{item}`")))
}

fn parse_range(item: &str, line: usize) -> Result<RangeInclusive<char>, GraphemeError> {
    match item.split_once('-') {
        Some((lo, hi)) => {
            let (lo, hi) = (parse_codepoint(lo.trim(), line)?, parse_codepoint(hi.trim(), line)?);
            if lo > hi {
                return Err(rule_err(line, format!("empty range `{item}`")));
            }
            Ok(lo..=hi)
        }
        None => {
            let c = parse_codepoint(item, line)?;
            Ok(c..=c)
        }
    }
}

/// Segments `text` and then merges clusters across virama joins and
/// declared joiners, greedily left to right.
pub fn segment_script<'a>(text: &'a str, rules: &ScriptRules) -> Vec<GraphemeCluster<'a>> {
    let mut out: Vec<GraphemeCluster<'a>> = Vec::new();
    for cluster in segment_base(text) {
        match out.last_mut() {
            Some(prev) if rules.joins(prev.text, cluster.text) => {
                prev.byte_range.end = cluster.byte_range.end;
                prev.text = &text[prev.byte_range.clone()];
            }
            _ => out.push(cluster),
        }
    }
    out
}

/// Script rules keyed by script id.
#[derive(Debug, Default, Clone)]
pub struct ScriptRegistry {
    scripts: HashMap<String, ScriptRules>,
}

impl ScriptRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, rules: ScriptRules) -> Result<(), GraphemeError> {
        if self.scripts.contains_key(rules.script_id()) {
            return Err(GraphemeError::DuplicateScript(rules.script_id.clone()));
        }
        self.scripts.insert(rules.script_id.clone(), rules);
        Ok(())
    }

    pub fn get(&self, script_id: &str) -> Option<&ScriptRules> {
        self.scripts.get(script_id)
    }

    pub fn len(&self) -> usize {
        self.scripts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scripts.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Cluster sizes in codepoints, computed with an independent UAX #29
    /// implementation and frozen here.
    const UAX29_FIXTURE: &[(&str, &[usize])] = &[
        ("", &[]),
        ("ab", &[1, 1]),
        ("e\u{301}", &[2]),
        ("e\u{301}\u{302}x", &[3, 1]),
        ("\r\n", &[2]),
        ("a\r\nb", &[1, 2, 1]),
        ("\n\n", &[1, 1]),
        ("\u{1100}\u{1161}\u{11a8}", &[3]),
        ("\u{ac00}\u{11a8}", &[2]),
        ("\u{d55c}\u{ad6d}\u{c5b4}", &[1, 1, 1]),
        ("\u{1f468}\u{200d}\u{1f469}\u{200d}\u{1f467}", &[5]),
        ("\u{1f1ee}\u{1f1e9}\u{1f1ef}", &[2, 1]),
        ("\u{1f44d}\u{1f3fd}", &[2]),
        ("x\u{200d}y", &[2, 1]),
        ("a\u{308}\u{323}b", &[3, 1]),
        ("\u{e01}\u{e33}", &[2]),
        ("\u{e40}\u{e01}", &[1, 1]),
        ("\u{915}\u{93f}", &[2]),
        ("\u{915}\u{94d}", &[2]),
        ("hello world", &[1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1]),
        ("\u{a9a0}\u{a9c0}\u{a9ab}", &[3]),
        ("\u{a98f}\u{a9b6}", &[2]),
        ("\u{a98f}\u{a9ba}\u{a9b4}", &[3]),
        ("\u{a9b2}\u{a9a4}\u{a995}\u{a9ab}\u{a98f}", &[1, 1, 1, 1, 1]),
        ("\u{a9a0}\u{a9c0}\u{a9d1}", &[2, 1]),
        ("\u{a98f}\u{a981}", &[2]),
        ("\u{a984}\u{a9a4}", &[1, 1]),
        ("\u{1b13}\u{1b44}\u{1b2d}", &[3]),
        ("\u{1b13}\u{1b36}", &[2]),
        ("\u{1b13}\u{1b3e}\u{1b35}", &[3]),
        ("\u{1b8a}\u{1baa}\u{1b9b}", &[2, 1]),
        ("\u{1b8a}\u{1bab}\u{1b9b}", &[3]),
        ("\u{1b8a}\u{1ba4}", &[2]),
        ("\u{1b8a}\u{1b80}", &[2]),
        ("\u{1b83}\u{1b8a}", &[1, 1]),
        ("134 ,", &[1, 1, 1, 1, 1]),
        (" \u{301}", &[2]),
        ("\u{301}a", &[1, 1]),
        ("a\u{200d}", &[2]),
        ("\u{e9}", &[1]),
        ("a\u{300}\u{301}\u{302}\u{303}", &[5]),
        ("\u{1f3f3}\u{fe0f}\u{200d}\u{1f308}", &[4]),
        ("\u{600}\u{661}", &[2]),
        ("\t\u{301}", &[1, 1]),
        ("\u{1b05}\u{1b13}\u{1b44}", &[1, 2]),
        ("ng\u{323}", &[1, 2]),
        ("\u{feff}a", &[1, 1]),
        ("\u{2764}\u{fe0f}", &[2]),
        ("\u{a9a0}\u{a9c0}\u{a9ab}\u{a9c0}\u{a9aa}", &[5]),
        ("z\u{308}\u{308}\u{308} q", &[4, 1, 1]),
    ];

    fn toy_rules() -> ScriptRules {
        // consonants k..z, virama U+0302 (an Extend mark), joiner '+'
        ScriptRules::new("toy", ['\u{302}'], ['k'..='z'], ['+']).unwrap()
    }

    fn texts<'a>(clusters: &[GraphemeCluster<'a>]) -> Vec<&'a str> {
        clusters.iter().map(|c| c.text).collect()
    }

    /// Merge oracle: repeatedly look for an adjacent pair that should join
    /// and fuse it, until nothing changes.
    fn brute_force_merge(text: &str, rules: &ScriptRules) -> Vec<String> {
        let mut parts: Vec<String> = segment_base(text).iter().map(|c| c.text.to_string()).collect();
        loop {
            let mut fused = false;
            for i in 0..parts.len().saturating_sub(1) {
                let last = parts[i].chars().last().unwrap();
                let first = parts[i + 1].chars().next().unwrap();
                if (rules.is_virama(last) && rules.is_consonant(first)) || rules.is_joiner(first) {
                    let next = parts.remove(i + 1);
                    parts[i].push_str(&next);
                    fused = true;
                    break;
                }
            }
            if !fused {
                return parts;
            }
        }
    }

    #[test]
    fn empty_and_ascii() {
        assert!(segment_base("").is_empty());
        assert_eq!(texts(&segment_base("ab")), ["a", "b"]);
    }

    #[test]
    fn combining_mark_joins_base() {
        let c = segment_base("e\u{301}");
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].text.chars().count(), 2);
        assert_eq!(c[0].byte_range, 0..3);
    }

    #[test]
    fn matches_reference_segmenter() {
        for (text, sizes) in UAX29_FIXTURE {
            let got: Vec<usize> = segment_base(text).iter().map(|c| c.text.chars().count()).collect();
            assert_eq!(&got, sizes, "segmentation of {text:?}");
        }
    }

    #[test]
    fn decode_reports_offset() {
        assert_eq!(
            segment_base_bytes(b"ab\xffcd").unwrap_err(),
            GraphemeError::Decode { offset: 2 }
        );
        assert_eq!(segment_base_bytes("é".as_bytes()).unwrap().len(), 1);
    }

    #[test]
    fn conjunct_merges() {
        let r = toy_rules();
        assert_eq!(segment_base("k\u{302}m").len(), 2);
        assert_eq!(texts(&segment_script("k\u{302}m", &r)), ["k\u{302}m"]);
        assert_eq!(texts(&segment_script("k\u{302}m\u{302}n", &r)), ["k\u{302}m\u{302}n"]);
        assert_eq!(brute_force_merge("k\u{302}m", &r), ["k\u{302}m"]);
    }

    #[test]
    fn virama_before_digit_does_not_merge() {
        let r = toy_rules();
        assert_eq!(texts(&segment_script("k\u{302}7", &r)), ["k\u{302}", "7"]);
    }

    #[test]
    fn no_virama_is_base_segmentation() {
        let r = toy_rules();
        let s = "kamu e\u{301} 134 ,";
        assert_eq!(segment_script(s, &r), segment_base(s));
    }

    #[test]
    fn joiner_absorbed_into_previous() {
        let r = toy_rules();
        assert_eq!(texts(&segment_script("a+b", &r)), ["a+", "b"]);
        assert_eq!(texts(&segment_script("+a", &r)), ["+", "a"]);
    }

    #[test]
    fn sundanese_pamaaeh_needs_script_merge() {
        let sun = ScriptRules::parse(crate::assets::SUN_SCRIPT).unwrap();
        let s = "\u{1B8A}\u{1BAA}\u{1B9B}";
        assert_eq!(segment_base(s).len(), 2);
        assert_eq!(texts(&segment_script(s, &sun)), [s]);
    }

    #[test]
    fn parse_rules_file() {
        let r = ScriptRules::parse("# demo\nscript: jav\nvirama: U+A9C0\nconsonants: U+A98F-U+A9B2, U+A9B3\n").unwrap();
        assert_eq!(r.script_id(), "jav");
        assert!(r.is_virama('\u{A9C0}'));
        assert!(r.is_consonant('\u{A9B2}'));
        assert!(r.is_consonant('\u{A9B3}'));
        assert!(!r.is_consonant('\u{A9C0}'));
    }

    #[test]
    fn parse_rejects_overlap_and_garbage() {
        assert!(matches!(
            ScriptRules::parse("script: x\nvirama: U+0061\nconsonants: U+0061-U+007A\n"),
            Err(GraphemeError::ViramaIsConsonant { codepoint: 0x61, .. })
        ));
        assert!(matches!(
            ScriptRules::parse("script: x\nvirama: 61\n"),
            Err(GraphemeError::RuleFile { line: 2, .. })
        ));
        assert!(matches!(
            ScriptRules::parse("virama: U+0061\n"),
            Err(GraphemeError::RuleFile { .. })
        ));
    }

    #[test]
    fn registry_rejects_duplicates() {
        let mut reg = ScriptRegistry::new();
        reg.insert(toy_rules()).unwrap();
        assert_eq!(
            reg.insert(toy_rules()),
            Err(GraphemeError::DuplicateScript("toy".into()))
        );
        assert!(reg.get("toy").is_some());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn alphabet() -> impl Strategy<Value = String> {
            let chars = prop::sample::select(vec![
                'a', 'k', 'm', 'z', '7', ' ', '~', '+', '\u{302}', '\u{301}', '\u{200d}', '\r', '\n', '\u{A98F}',
                '\u{A9C0}', '\u{1B8A}', '\u{1BAA}',
            ]);
            prop::collection::vec(chars, 0..24).prop_map(|v| v.into_iter().collect())
        }

        proptest! {
            #[test]
            fn tiles_input_and_refines_base(s in alphabet()) {
                let r = toy_rules();
                let clusters = segment_script(&s, &r);
                let joined: String = clusters.iter().map(|c| c.text).collect();
                prop_assert_eq!(&joined, &s);
                let mut pos = 0;
                for c in &clusters {
                    prop_assert!(!c.text.is_empty());
                    prop_assert_eq!(c.byte_range.start, pos);
                    prop_assert_eq!(&s[c.byte_range.clone()], c.text);
                    pos = c.byte_range.end;
                }
                prop_assert_eq!(pos, s.len());
                let base: BTreeSet<usize> = segment_base(&s).iter().map(|c| c.byte_range.start).collect();
                for c in &clusters {
                    prop_assert!(base.contains(&c.byte_range.start));
                }
                prop_assert_eq!(texts(&clusters), brute_force_merge(&s, &r));
                prop_assert_eq!(segment_script(&s, &r), clusters.clone());
            }

            #[test]
            fn single_cluster_is_idempotent(s in alphabet()) {
                let r = toy_rules();
                for c in segment_script(&s, &r) {
                    prop_assert_eq!(texts(&segment_script(c.text, &r)), vec![c.text]);
                }
            }
        }
    }
}
