//! Symmetric-delete spelling correction and dictionary word segmentation.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::text::{has_digit, is_unit};

pub const DEFAULT_MAX_EDIT_DISTANCE: usize = 2;

/// Dictionary terms plus the deletion index used for candidate lookup.
#[derive(Debug, Clone, Default)]
pub struct SpellIndex {
    terms: HashMap<String, u64>,
    deletion_index: HashMap<String, Vec<String>>,
    max_edit_distance: usize,
    total_count: u64,
    longest_term: usize,
}

/// Every string reachable from `word` by at most `max` single-character
/// deletions, including `word` itself. The empty string counts, so short
/// words that differ in every position still share a key.
pub fn deletion_variants(word: &str, max: usize) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut frontier = vec![word.to_string()];
    out.insert(word.to_string());
    for _ in 0..max {
        let mut next = Vec::new();
        for w in &frontier {
            let chars: Vec<char> = w.chars().collect();
            if chars.is_empty() {
                continue;
            }
            for skip in 0..chars.len() {
                let variant: String = chars
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != skip)
                    .map(|(_, c)| c)
                    .collect();
                if out.insert(variant.clone()) {
                    next.push(variant);
                }
            }
        }
        frontier = next;
    }
    out
}

/// Optimal-string-alignment distance (Damerau-Levenshtein without
/// repeated edits of a substring).
pub fn osa_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let (n, m) = (a.len(), b.len());
    let mut d = vec![vec![0usize; m + 1]; n + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=m {
        d[0][j] = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            let mut v = (d[i - 1][j] + 1).min(d[i][j - 1] + 1).min(d[i - 1][j - 1] + cost);
            if i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1] {
                v = v.min(d[i - 2][j - 2] + 1);
            }
            d[i][j] = v;
        }
    }
    d[n][m]
}

/// Tokens that correction never touches: anything with a digit, unit
/// abbreviations, and single characters.
pub fn is_correction_exempt(token: &str) -> bool {
    has_digit(token) || is_unit(token) || token.chars().count() <= 1
}

impl SpellIndex {
    /// Builds the index. Terms are lowercased; zero counts are raised to 1.
    pub fn build(word_frequencies: &BTreeMap<String, u64>, max_edit_distance: usize) -> SpellIndex {
        let mut idx = SpellIndex {
            max_edit_distance,
            ..SpellIndex::default()
        };
        for (term, &count) in word_frequencies {
            let term = term.trim().to_lowercase();
            if term.is_empty() {
                continue;
            }
            *idx.terms.entry(term).or_insert(0) += count.max(1);
        }
        let mut sorted: Vec<&String> = idx.terms.keys().collect();
        sorted.sort();
        for term in sorted {
            idx.longest_term = idx.longest_term.max(term.chars().count());
            for variant in deletion_variants(term, max_edit_distance) {
                idx.deletion_index.entry(variant).or_default().push(term.clone());
            }
        }
        idx.total_count = idx.terms.values().sum();
        idx
    }

    pub fn max_edit_distance(&self) -> usize {
        self.max_edit_distance
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Number of distinct deletion-variant keys.
    pub fn deletion_key_count(&self) -> usize {
        self.deletion_index.len()
    }

    pub fn has_deletion_key(&self, key: &str) -> bool {
        self.deletion_index.contains_key(key)
    }

    pub fn frequency(&self, term: &str) -> Option<u64> {
        self.terms.get(&term.to_lowercase()).copied()
    }

    pub fn contains(&self, term: &str) -> bool {
        self.terms.contains_key(&term.to_lowercase())
    }

    /// Best dictionary candidate for a lowercased word, ranked by
    /// (distance, higher frequency, lexicographic).
    pub fn best_candidate(&self, word: &str) -> Option<(&str, usize)> {
        let word_len = word.chars().count();
        let mut best: Option<(&str, usize, u64)> = None;
        for variant in deletion_variants(word, self.max_edit_distance) {
            let Some(cands) = self.deletion_index.get(&variant) else {
                continue;
            };
            for cand in cands {
                if cand.chars().count().abs_diff(word_len) > self.max_edit_distance {
                    continue;
                }
                let dist = osa_distance(word, cand);
                if dist > self.max_edit_distance {
                    continue;
                }
                let freq = self.terms[cand];
                let better = match best {
                    None => true,
                    Some((b, bd, bf)) => (dist, std::cmp::Reverse(freq), cand.as_str()) < (bd, std::cmp::Reverse(bf), b),
                };
                if better {
                    best = Some((cand.as_str(), dist, freq));
                }
            }
        }
        best.map(|(t, d, _)| (t, d))
    }

    /// Corrects one token. Known words, exempt tokens and tokens without a
    /// candidate come back unchanged; corrections copy the token's casing.
    pub fn correct_token(&self, token: &str) -> String {
        if is_correction_exempt(token) {
            return token.to_string();
        }
        let lower = token.to_lowercase();
        if self.terms.contains_key(&lower) {
            return token.to_string();
        }
        match self.best_candidate(&lower) {
            Some((cand, _)) => match_case(token, cand),
            None => token.to_string(),
        }
    }

    /// Splits a run-together token into dictionary words, maximizing the
    /// product of unigram relative frequencies. Returns the token alone when
    /// it is a word already or no complete split exists.
    pub fn segment_compound(&self, token: &str) -> Vec<String> {
        let chars: Vec<char> = token.chars().collect();
        let lower: Vec<char> = token.to_lowercase().chars().collect();
        if chars.len() != lower.len() || self.contains(token) || self.total_count == 0 {
            return vec![token.to_string()];
        }
        let n = chars.len();
        let total = self.total_count as f64;
        // best[i] = (log-prob, part count, back pointer) for prefix of length i
        let mut best: Vec<Option<(f64, usize, usize)>> = vec![None; n + 1];
        best[0] = Some((0.0, 0, 0));
        for end in 1..=n {
            let start_min = end.saturating_sub(self.longest_term);
            for start in start_min..end {
                let Some((score, parts, _)) = best[start] else {
                    continue;
                };
                let piece: String = lower[start..end].iter().collect();
                let Some(&count) = self.terms.get(&piece) else {
                    continue;
                };
                let cand = (score + (count as f64 / total).ln(), parts + 1, start);
                let replace = match best[end] {
                    None => true,
                    Some((s, p, _)) => cand.0 > s || (cand.0 == s && cand.1 < p),
                };
                if replace {
                    best[end] = Some(cand);
                }
            }
        }
        let Some((_, parts, _)) = best[n] else {
            return vec![token.to_string()];
        };
        if parts < 2 {
            return vec![token.to_string()];
        }
        let mut pieces = Vec::with_capacity(parts);
        let mut end = n;
        while end > 0 {
            let (_, _, start) = best[end].unwrap();
            pieces.push(chars[start..end].iter().collect::<String>());
            end = start;
        }
        pieces.reverse();
        pieces
    }
}

fn match_case(original: &str, replacement: &str) -> String {
    let letters: Vec<char> = original.chars().filter(|c| c.is_alphabetic()).collect();
    if letters.len() > 1 && letters.iter().all(|c| c.is_uppercase()) {
        return replacement.to_uppercase();
    }
    if original.chars().next().is_some_and(char::is_uppercase) {
        let mut cs = replacement.chars();
        return match cs.next() {
            Some(f) => f.to_uppercase().chain(cs).collect(),
            None => String::new(),
        };
    }
    replacement.to_string()
}
