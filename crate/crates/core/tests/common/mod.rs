//! Reference implementations used to cross-check the library. They favour
//! obviousness over speed: n-grams are listed and counted by linear scans,
//! and edit distance fills the whole matrix.

#![allow(dead_code)]

use rand::Rng;

/// Every contiguous window of length `n`, in order, duplicates kept.
pub fn list_ngrams<T: Clone>(seq: &[T], n: usize) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    if n == 0 || seq.len() < n {
        return out;
    }
    for start in 0..=seq.len() - n {
        out.push(seq[start..start + n].to_vec());
    }
    out
}

fn occurrences<T: PartialEq>(haystack: &[Vec<T>], needle: &[T]) -> usize {
    haystack.iter().filter(|g| g.as_slice() == needle).count()
}

/// (hypothesis n-grams, reference n-grams, clipped matches)
pub fn clipped<T: Clone + PartialEq>(hyp: &[T], reference: &[T], n: usize) -> (usize, usize, usize) {
    let h = list_ngrams(hyp, n);
    let r = list_ngrams(reference, n);
    let mut seen: Vec<Vec<T>> = Vec::new();
    let mut matched = 0;
    for g in &h {
        if seen.contains(g) {
            continue;
        }
        seen.push(g.clone());
        matched += occurrences(&h, g).min(occurrences(&r, g));
    }
    (h.len(), r.len(), matched)
}

fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

fn chars_no_space(s: &str) -> Vec<char> {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

fn fscore(h: usize, r: usize, m: usize, beta: f64) -> f64 {
    if h == 0 || r == 0 || m == 0 {
        return 0.0;
    }
    let p = m as f64 / h as f64;
    let rc = m as f64 / r as f64;
    (1.0 + beta * beta) * p * rc / (beta * beta * p + rc)
}

/// chrF++ with orders that have no n-grams on either side left out of the
/// average; 100 when every order is left out.
pub fn chrf_oracle(refs: &[String], hyps: &[String], char_max: usize, word_max: usize, beta: f64) -> f64 {
    let mut per_order = Vec::new();
    for n in 1..=char_max {
        let (mut h, mut r, mut m) = (0, 0, 0);
        for (rs, hs) in refs.iter().zip(hyps) {
            let (a, b, c) = clipped(&chars_no_space(hs), &chars_no_space(rs), n);
            h += a;
            r += b;
            m += c;
        }
        per_order.push((h, r, m));
    }
    for n in 1..=word_max {
        let (mut h, mut r, mut m) = (0, 0, 0);
        for (rs, hs) in refs.iter().zip(hyps) {
            let (a, b, c) = clipped(&words(hs), &words(rs), n);
            h += a;
            r += b;
            m += c;
        }
        per_order.push((h, r, m));
    }
    let kept: Vec<f64> = per_order
        .into_iter()
        .filter(|&(h, r, _)| h + r > 0)
        .map(|(h, r, m)| fscore(h, r, m, beta))
        .collect();
    if kept.is_empty() {
        100.0
    } else {
        100.0 * kept.iter().sum::<f64>() / kept.len() as f64
    }
}

/// Corpus BLEU as a plain product of floored precisions.
pub fn bleu_oracle(refs: &[String], hyps: &[String], max_order: usize) -> f64 {
    let ref_len: usize = refs.iter().map(|r| words(r).len()).sum();
    let hyp_len: usize = hyps.iter().map(|h| words(h).len()).sum();
    if hyp_len == 0 {
        return 0.0;
    }
    let mut product = 1.0f64;
    for n in 1..=max_order {
        let (mut h, mut m) = (0, 0);
        for (rs, hs) in refs.iter().zip(hyps) {
            let (a, _, c) = clipped(&words(hs), &words(rs), n);
            h += a;
            m += c;
        }
        let p = if h == 0 { 0.0 } else { m as f64 / h as f64 };
        product *= p.max(1e-16);
    }
    let bp = if hyp_len < ref_len {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    } else {
        1.0
    };
    100.0 * bp * product.powf(1.0 / max_order as f64)
}

/// Levenshtein distance from the full (m+1) x (n+1) table.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

/// Micro WER in percent, or None when the references have no words.
pub fn wer_oracle(refs: &[String], hyps: &[String]) -> Option<f64> {
    let mut edits = 0;
    let mut total = 0;
    for (r, h) in refs.iter().zip(hyps) {
        let (rw, hw) = (words(r), words(h));
        edits += levenshtein(&rw, &hw);
        total += rw.len();
    }
    (total > 0).then(|| 100.0 * edits as f64 / total as f64)
}

const WORDS: [&str; 12] = [
    "a", "b", "ab", "ba", "ka", "ng", "aku", "lunga", "134", ",", "kaka", "nga",
];

/// A reference corpus and a perturbed hypothesis corpus, at most 10
/// segments of at most 8 words each.
pub fn random_corpus<R: Rng>(rng: &mut R) -> (Vec<String>, Vec<String>) {
    let segments = rng.gen_range(1..=10);
    let mut refs = Vec::with_capacity(segments);
    let mut hyps = Vec::with_capacity(segments);
    for _ in 0..segments {
        let len = rng.gen_range(0..=8);
        let r: Vec<&str> = (0..len).map(|_| WORDS[rng.gen_range(0..WORDS.len())]).collect();
        let mut h = r.clone();
        for _ in 0..rng.gen_range(0..=3) {
            match rng.gen_range(0..3) {
                0 if !h.is_empty() => {
                    let i = rng.gen_range(0..h.len());
                    h.remove(i);
                }
                1 if h.len() < 8 => {
                    let i = rng.gen_range(0..=h.len());
                    h.insert(i, WORDS[rng.gen_range(0..WORDS.len())]);
                }
                _ if !h.is_empty() => {
                    let i = rng.gen_range(0..h.len());
                    h[i] = WORDS[rng.gen_range(0..WORDS.len())];
                }
                _ => {}
            }
        }
        refs.push(r.join(" "));
        hyps.push(h.join(" "));
    }
    (refs, hyps)
}

/// Random words over a small alphabet, so vocabularies see repeats.
pub fn random_text<R: Rng>(rng: &mut R, max_words: usize) -> String {
    let syllables = ["ka", "ga", "nga", "sa", "ra", "wi", "lu", "pe", "ta", "ma", "ya", "ja"];
    let n = rng.gen_range(0..=max_words);
    (0..n)
        .map(|_| {
            let k = rng.gen_range(1..=3);
            (0..k)
                .map(|_| syllables[rng.gen_range(0..syllables.len())])
                .collect::<String>()
        })
        .collect::<Vec<_>>()
        .join(" ")
}
