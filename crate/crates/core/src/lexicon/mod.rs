//! Radiology dictionary with longest-match lookup, plus the preposition
//! supersense tables.

mod supersense;

use std::collections::{BTreeMap, HashMap};
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ontology::CoarseCategory;

pub use supersense::{SupersenseLexicon, DEFAULT_PREP_SENSES, DEFAULT_RELATION_MAP};

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("`{surface}` is listed as both {first} and {second}")]
    CategoryConflict {
        surface: String,
        first: CoarseCategory,
        second: CoarseCategory,
    },
    #[error("{source_name} line {line}: {reason}")]
    Parse {
        source_name: String,
        line: usize,
        reason: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub surface: String,
    pub category: CoarseCategory,
    pub fine_tag: Option<String>,
    pub preferred_name: String,
    pub synonyms: Vec<String>,
    pub word_forms: Vec<String>,
}

impl LexiconEntry {
    pub fn new(surface: &str, category: CoarseCategory) -> Self {
        let surface = normalize(surface);
        LexiconEntry {
            preferred_name: surface.clone(),
            surface,
            category,
            fine_tag: None,
            synonyms: Vec::new(),
            word_forms: Vec::new(),
        }
    }

    pub fn with_fine_tag(mut self, tag: &str) -> Self {
        self.fine_tag = Some(tag.to_string());
        self
    }

    fn keys(&self) -> impl Iterator<Item = &String> {
        std::iter::once(&self.surface)
            .chain(self.synonyms.iter())
            .chain(self.word_forms.iter())
    }
}

fn normalize(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

fn token_len(s: &str) -> usize {
    s.split_whitespace().count()
}

/// One dictionary file. `#!override` on its own line lets the file replace
/// categories set by earlier files.
#[derive(Debug, Clone)]
pub struct LexiconSource {
    pub name: String,
    pub text: String,
}

#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: BTreeMap<String, LexiconEntry>,
    /// surface, synonym or word form -> canonical surface
    index: HashMap<String, String>,
    max_phrase_len: usize,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_phrase_len(&self) -> usize {
        self.max_phrase_len
    }

    pub fn entries(&self) -> impl Iterator<Item = &LexiconEntry> {
        self.entries.values()
    }

    /// Looks up a surface form, synonym or word form (case-insensitive).
    pub fn lookup(&self, surface: &str) -> Option<&LexiconEntry> {
        let key = normalize(surface);
        self.index.get(&key).and_then(|c| self.entries.get(c))
    }

    /// Like `lookup`, but also accepts a preferred name.
    pub fn by_name(&self, name: &str) -> Option<&LexiconEntry> {
        let key = normalize(name);
        self.lookup(&key)
            .or_else(|| self.entries.values().find(|e| normalize(&e.preferred_name) == key))
    }

    /// Inserts an entry. A category disagreement with an existing key is an
    /// error unless `allow_override`; otherwise the newer entry wins.
    pub fn insert(&mut self, mut entry: LexiconEntry, allow_override: bool) -> Result<(), LexiconError> {
        entry.surface = normalize(&entry.surface);
        if entry.preferred_name.trim().is_empty() {
            entry.preferred_name = entry.surface.clone();
        }
        let surface = entry.surface.clone();
        let clean = |v: &mut Vec<String>| {
            let mut out: Vec<String> = Vec::new();
            for s in v.drain(..) {
                let s = normalize(&s);
                if !s.is_empty() && s != surface && !out.contains(&s) {
                    out.push(s);
                }
            }
            *v = out;
        };
        clean(&mut entry.synonyms);
        clean(&mut entry.word_forms);

        for key in entry.keys() {
            if let Some(existing) = self.index.get(key).and_then(|c| self.entries.get(c)) {
                if existing.category != entry.category && !allow_override {
                    return Err(LexiconError::CategoryConflict {
                        surface: key.clone(),
                        first: existing.category,
                        second: entry.category,
                    });
                }
            }
        }
        if let Some(old) = self.entries.remove(&entry.surface) {
            for key in old.keys() {
                if self.index.get(key) == Some(&old.surface) {
                    self.index.remove(key);
                }
            }
        }
        for key in entry.keys() {
            self.max_phrase_len = self.max_phrase_len.max(token_len(key));
            self.index.insert(key.clone(), entry.surface.clone());
        }
        self.entries.insert(entry.surface.clone(), entry);
        Ok(())
    }

    /// Builds a lexicon from dictionary sources; later sources override
    /// earlier ones entry by entry.
    pub fn from_sources(sources: &[LexiconSource]) -> Result<Self, LexiconError> {
        let mut lex = Lexicon::new();
        for src in sources {
            let (entries, allow_override) = parse_dictionary(&src.name, &src.text)?;
            let mut own: HashMap<String, CoarseCategory> = HashMap::new();
            for e in entries {
                // rows inside one file must agree with each other
                if let Some(&first) = own.get(&e.surface) {
                    if first != e.category {
                        return Err(LexiconError::CategoryConflict {
                            surface: e.surface,
                            first,
                            second: e.category,
                        });
                    }
                }
                own.insert(e.surface.clone(), e.category);
                lex.insert(e, allow_override)?;
            }
        }
        Ok(lex)
    }

    /// Greedy left-to-right longest match over lowercased tokens.
    pub fn longest_match<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<(Range<usize>, &LexiconEntry)> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            let longest = self.max_phrase_len.min(tokens.len() - i);
            let mut matched = None;
            for len in (1..=longest).rev() {
                let phrase = tokens[i..i + len]
                    .iter()
                    .map(|t| t.as_ref().to_lowercase())
                    .collect::<Vec<_>>()
                    .join(" ");
                if let Some(entry) = self.lookup(&phrase) {
                    matched = Some((i..i + len, entry));
                    break;
                }
            }
            match matched {
                Some((span, entry)) => {
                    i = span.end;
                    out.push((span, entry));
                }
                None => i += 1,
            }
        }
        out
    }

    /// Breaks a long glossary phrase into its head noun (keeping the
    /// phrase's category) and Modifier entries for what precedes it. The
    /// whole phrase and every part are added to the lexicon if absent.
    /// Phrases already in the lexicon are returned whole.
    pub fn decompose_phrase(&mut self, phrase: &str, category: CoarseCategory) -> Vec<LexiconEntry> {
        let normalized = normalize(phrase);
        if let Some(existing) = self.lookup(&normalized) {
            return vec![existing.clone()];
        }
        let tokens: Vec<&str> = normalized.split(' ').collect();
        if tokens.len() < 2 {
            let entry = LexiconEntry::new(&normalized, category);
            self.insert_if_absent(entry.clone());
            return vec![entry];
        }
        let head_token = tokens[tokens.len() - 1];
        let head = match self.lookup(head_token) {
            Some(e) => e.clone(),
            None => LexiconEntry::new(head_token, category),
        };
        let prefix = &tokens[..tokens.len() - 1];
        let mut parts = Vec::new();
        let matches: Vec<(Range<usize>, LexiconEntry)> = self
            .longest_match(prefix)
            .into_iter()
            .map(|(r, e)| (r, e.clone()))
            .collect();
        let mut i = 0;
        let mut mi = 0;
        while i < prefix.len() {
            if let Some((span, entry)) = matches.get(mi).filter(|(span, _)| span.start == i) {
                parts.push(entry.clone());
                i = span.end;
                mi += 1;
            } else {
                parts.push(LexiconEntry::new(prefix[i], CoarseCategory::Modifier));
                i += 1;
            }
        }
        parts.push(head);
        for p in &parts {
            self.insert_if_absent(p.clone());
        }
        self.insert_if_absent(LexiconEntry::new(&normalized, category));
        parts
    }

    fn insert_if_absent(&mut self, entry: LexiconEntry) {
        if self.lookup(&entry.surface).is_none() {
            // cannot conflict: none of the keys are present yet
            let _ = self.insert(entry, false);
        }
    }
}

/// Reads dictionary files from disk in order.
pub fn load_lexicon<P: AsRef<Path>>(files: &[P]) -> Result<Lexicon, LexiconError> {
    let mut sources = Vec::new();
    for f in files {
        let path = f.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.display().to_string(),
            source,
        })?;
        sources.push(LexiconSource {
            name: path.display().to_string(),
            text,
        });
    }
    Lexicon::from_sources(&sources)
}

fn split_list(col: Option<&str>) -> Vec<String> {
    col.map(|c| {
        c.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect()
    })
    .unwrap_or_default()
}

/// Parses `surface<TAB>category<TAB>fine_tag?<TAB>preferred?<TAB>synonyms?<TAB>word_forms?`.
pub fn parse_dictionary(name: &str, text: &str) -> Result<(Vec<LexiconEntry>, bool), LexiconError> {
    let mut entries = Vec::new();
    let mut allow_override = false;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim() == "#!override" {
            allow_override = true;
            continue;
        }
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let parse_err = |reason: String| LexiconError::Parse {
            source_name: name.to_string(),
            line: n + 1,
            reason,
        };
        if cols.len() < 2 {
            return Err(parse_err("expected at least surface and category".into()));
        }
        let category: CoarseCategory = cols[1]
            .parse()
            .map_err(|e: crate::ontology::UnknownName| parse_err(e.to_string()))?;
        let mut entry = LexiconEntry::new(cols[0], category);
        if entry.surface.is_empty() {
            return Err(parse_err("empty surface".into()));
        }
        if let Some(tag) = cols.get(2).map(|s| s.trim()).filter(|s| !s.is_empty()) {
            entry.fine_tag = Some(tag.to_string());
        }
        if let Some(pref) = cols.get(3).map(|s| s.trim()).filter(|s| !s.is_empty()) {
            entry.preferred_name = pref.to_string();
        }
        entry.synonyms = split_list(cols.get(4).copied());
        entry.word_forms = split_list(cols.get(5).copied());
        entries.push(entry);
    }
    Ok((entries, allow_override))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex(text: &str) -> Lexicon {
        Lexicon::from_sources(&[LexiconSource {
            name: "t".into(),
            text: text.into(),
        }])
        .unwrap()
    }

    #[test]
    fn loads_categories_and_fine_tags() {
        let l = lex("lesion\tObservation\nsmall\tModifier\tsize-modifier\n");
        assert_eq!(l.lookup("lesion").unwrap().category, CoarseCategory::Observation);
        assert_eq!(l.lookup("Small").unwrap().fine_tag.as_deref(), Some("size-modifier"));
    }

    #[test]
    fn duplicate_identical_rows_are_idempotent() {
        let l = lex("lesion\tObservation\nlesion\tObservation\n");
        assert_eq!(l.len(), 1);
    }

    #[test]
    fn conflicting_files_error_without_override() {
        let a = LexiconSource { name: "a".into(), text: "mass\tObservation\n".into() };
        let b = LexiconSource { name: "b".into(), text: "mass\tFinding\n".into() };
        let err = Lexicon::from_sources(&[a.clone(), b]).unwrap_err();
        assert!(matches!(err, LexiconError::CategoryConflict { .. }));
        let c = LexiconSource { name: "c".into(), text: "#!override\nmass\tFinding\n".into() };
        let l = Lexicon::from_sources(&[a, c]).unwrap();
        assert_eq!(l.lookup("mass").unwrap().category, CoarseCategory::Finding);
    }

    #[test]
    fn later_files_override_fields() {
        let a = LexiconSource { name: "a".into(), text: "cyst\tObservation\n".into() };
        let b = LexiconSource { name: "b".into(), text: "cyst\tObservation\tcyst\t\tcystic lesion\n".into() };
        let l = Lexicon::from_sources(&[a, b]).unwrap();
        assert_eq!(l.lookup("cyst").unwrap().fine_tag.as_deref(), Some("cyst"));
        assert_eq!(l.lookup("cystic lesion").unwrap().surface, "cyst");
    }

    #[test]
    fn synonyms_resolve_to_canonical() {
        let l = lex("calculus\tFinding\t\t\tstone,calculi\tcalculi\n");
        assert_eq!(l.lookup("stone").unwrap().preferred_name, "calculus");
        assert_eq!(l.lookup("calculi").unwrap().preferred_name, "calculus");
        assert!(l.lookup("calculus").unwrap().word_forms == vec!["calculi".to_string()]);
    }

    #[test]
    fn longest_match_prefers_phrase() {
        let l = lex("right\tModifier\nlobe\tAnatomy\nright lobe\tAnatomy\nchronic liver disease\tFinding\tdisease\nliver\tAnatomy\n");
        let m = l.longest_match(&["right", "lobe"]);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].0, 0..2);
        assert_eq!(m[0].1.surface, "right lobe");
        assert!(l.longest_match(&["hypodense"]).is_empty());
        let m = l.longest_match(&["chronic", "liver", "disease", "of"]);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].1.fine_tag.as_deref(), Some("disease"));
    }

    #[test]
    fn decompose_long_glossary_phrase() {
        let mut l = lex("echotexture\tProperty\nright lobe\tAnatomy\n");
        let parts = l.decompose_phrase("fat homogeneous background echotexture", CoarseCategory::Property);
        let got: Vec<(&str, CoarseCategory)> = parts.iter().map(|e| (e.surface.as_str(), e.category)).collect();
        assert_eq!(
            got,
            vec![
                ("fat", CoarseCategory::Modifier),
                ("homogeneous", CoarseCategory::Modifier),
                ("background", CoarseCategory::Modifier),
                ("echotexture", CoarseCategory::Property),
            ]
        );
        // whole phrase is still the single longest match
        let m = l.longest_match(&["fat", "homogeneous", "background", "echotexture"]);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].0, 0..4);

        let whole = l.decompose_phrase("right lobe", CoarseCategory::Anatomy);
        assert_eq!(whole.len(), 1);
        assert_eq!(whole[0].surface, "right lobe");
        let single = l.decompose_phrase("echotexture", CoarseCategory::Property);
        assert_eq!(single[0].surface, "echotexture");
    }

    #[test]
    fn parse_errors_have_line_numbers() {
        let err = Lexicon::from_sources(&[LexiconSource { name: "x.tsv".into(), text: "liver\tAnatomy\nfoo\tBogus\n".into() }]).unwrap_err();
        assert!(err.to_string().contains("x.tsv line 2"), "{err}");
    }
}
