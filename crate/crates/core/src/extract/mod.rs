//! Triple extraction from annotated sentences: intra-chunk patterns,
//! preposition supersenses and the leaf-to-root dependency walk.

mod patterns;
mod traverse;

use std::fmt;
use std::ops::Range;
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::annotation::{merge_chunks, AnnotatedSentence, AnnotationError, Pos};
use crate::lexicon::{Lexicon, SupersenseLexicon};
use crate::ontology::{CoarseCategory, LogicalRelation};
use crate::par;

pub use patterns::{
    category_relation, parse_category_patterns, parse_chunk_patterns, CategoryPattern, ChunkPattern, Slot, SlotKind,
    DEFAULT_CATEGORY_PATTERNS, DEFAULT_CHUNK_PATTERNS,
};
pub use traverse::{
    chunk_entities, distribute_coordination, extract_intra_chunk, node_entity, relation_from_preposition,
    traverse_dependency, NodeTriple, Traversal, OBJECT_LABELS, SUBJECT_LABELS,
};

pub const DEFAULT_NEGATION_TRIGGERS: &[&str] = &["no evidence of", "no ", "not seen"];

#[derive(Debug, thiserror::Error)]
pub enum ExtractError {
    #[error("pattern line {line}: {reason}")]
    Pattern { line: usize, reason: String },
    #[error("triples line {line}: {reason}")]
    TripleParse { line: usize, reason: String },
    #[error(transparent)]
    Annotation(#[from] AnnotationError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    /// Preferred name for dictionary entries, lowercased surface otherwise.
    pub text: String,
    pub category: CoarseCategory,
    pub span: Range<usize>,
    pub chunk_root: bool,
    pub from_lexicon: bool,
    pub fine_tag: Option<String>,
    pub pos: Pos,
}

impl Entity {
    /// Entity for a bare name: dictionary category when known, Observation
    /// otherwise.
    pub fn from_text(text: &str, lexicon: &Lexicon) -> Entity {
        match lexicon.by_name(text) {
            Some(e) => Entity {
                text: e.preferred_name.clone(),
                category: e.category,
                span: 0..0,
                chunk_root: true,
                from_lexicon: true,
                fine_tag: e.fine_tag.clone(),
                pos: if e.category == CoarseCategory::Modifier { Pos::Adj } else { Pos::Noun },
            },
            None => Entity {
                text: text.trim().to_lowercase(),
                category: CoarseCategory::Observation,
                span: 0..0,
                chunk_root: true,
                from_lexicon: false,
                fine_tag: None,
                pos: Pos::Noun,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triple {
    pub subject: Entity,
    pub relation: LogicalRelation,
    pub object: Entity,
    pub sentence_id: String,
    /// False when the sentence is negated.
    pub assertive: bool,
}

impl Triple {
    pub fn new(subject: Entity, relation: LogicalRelation, object: Entity) -> Self {
        Triple {
            subject,
            relation,
            object,
            sentence_id: String::new(),
            assertive: true,
        }
    }

    /// Rebuilds a triple from its text form, taking categories from the
    /// lexicon. Spans are empty.
    pub fn from_record(record: &TripleRecord, lexicon: &Lexicon) -> Triple {
        Triple {
            subject: Entity::from_text(&record.subject, lexicon),
            relation: record.relation,
            object: Entity::from_text(&record.object, lexicon),
            sentence_id: record.sentence_id.clone(),
            assertive: record.assertive,
        }
    }

    pub fn record(&self) -> TripleRecord {
        TripleRecord {
            sentence_id: self.sentence_id.clone(),
            subject: self.subject.text.clone(),
            relation: self.relation,
            object: self.object.text.clone(),
            assertive: self.assertive,
        }
    }
}

/// The text-only form written to and read from triple files.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TripleRecord {
    pub sentence_id: String,
    pub subject: String,
    pub relation: LogicalRelation,
    pub object: String,
    pub assertive: bool,
}

impl TripleRecord {
    pub fn key(&self) -> (&str, LogicalRelation, &str) {
        (&self.subject, self.relation, &self.object)
    }
}

impl fmt::Display for TripleRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.subject, self.relation, self.object)
    }
}

pub fn serialize_triples(records: &[TripleRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            r.sentence_id, r.subject, r.relation, r.object, r.assertive
        ));
    }
    out
}

/// Reads `sentence_id<TAB>subject<TAB>relation<TAB>object[<TAB>assertive]`.
/// A missing flag means assertive.
pub fn parse_triples(text: &str) -> Result<Vec<TripleRecord>, ExtractError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |reason: String| ExtractError::TripleParse { line: n + 1, reason };
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        if !(4..=5).contains(&cols.len()) {
            return Err(err(format!("expected 4 or 5 columns, found {}", cols.len())));
        }
        let relation = cols[2].parse().map_err(|e: crate::ontology::UnknownName| err(e.to_string()))?;
        let assertive = match cols.get(4).copied() {
            None | Some("true") | Some("1") => true,
            Some("false") | Some("0") => false,
            Some(other) => return Err(err(format!("bad assertive flag `{other}`"))),
        };
        if cols[1].is_empty() || cols[3].is_empty() {
            return Err(err("empty entity".into()));
        }
        out.push(TripleRecord {
            sentence_id: cols[0].to_string(),
            subject: cols[1].to_lowercase(),
            relation,
            object: cols[3].to_lowercase(),
            assertive,
        });
    }
    Ok(out)
}

pub fn load_triples(path: &Path) -> Result<Vec<TripleRecord>, ExtractError> {
    let text = std::fs::read_to_string(path).map_err(|source| ExtractError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_triples(&text)
}

/// Everything one extraction run reads; immutable and shared across threads.
pub struct Extractor {
    pub lexicon: Lexicon,
    pub senses: SupersenseLexicon,
    pub chunk_patterns: Vec<ChunkPattern>,
    pub category_patterns: Vec<CategoryPattern>,
    negation: Vec<Regex>,
}

impl Extractor {
    pub fn new(
        lexicon: Lexicon,
        senses: SupersenseLexicon,
        chunk_patterns: Vec<ChunkPattern>,
        category_patterns: Vec<CategoryPattern>,
    ) -> Self {
        let mut x = Extractor {
            lexicon,
            senses,
            chunk_patterns,
            category_patterns,
            negation: Vec::new(),
        };
        x.set_negation_triggers(DEFAULT_NEGATION_TRIGGERS);
        x
    }

    /// Shipped patterns over the given lexicon.
    pub fn with_defaults(lexicon: Lexicon) -> Self {
        Extractor::new(
            lexicon,
            SupersenseLexicon::default(),
            parse_chunk_patterns(DEFAULT_CHUNK_PATTERNS).expect("shipped chunk patterns parse"),
            parse_category_patterns(DEFAULT_CATEGORY_PATTERNS).expect("shipped category patterns parse"),
        )
    }

    /// Triggers match whole words, case-insensitively.
    pub fn set_negation_triggers<S: AsRef<str>>(&mut self, triggers: &[S]) {
        self.negation = triggers
            .iter()
            .map(|t| t.as_ref().trim())
            .filter(|t| !t.is_empty())
            .map(|t| Regex::new(&format!(r"(?i)\b{}\b", regex::escape(t))).expect("escaped trigger is a valid regex"))
            .collect();
    }

    pub fn is_negated(&self, text: &str) -> bool {
        self.negation.iter().any(|r| r.is_match(text))
    }

    pub fn extract_sentence(&self, sentence: &AnnotatedSentence) -> Result<Vec<Triple>, ExtractError> {
        let merged = merge_chunks(sentence)?;
        let mut all: Vec<Triple> = Vec::new();
        for node in 0..merged.nodes.len() {
            if merged.nodes[node].is_chunk() {
                all.extend(extract_intra_chunk(&merged, node, &self.lexicon, &self.chunk_patterns));
            }
        }
        let walk = traverse_dependency(&merged, &self.lexicon, &self.senses, &self.category_patterns);
        all.extend(
            distribute_coordination(walk.triples, &merged, &self.lexicon)
                .into_iter()
                .map(|t| t.triple),
        );

        let assertive = !self.is_negated(&sentence.text());
        all.retain(|t| t.subject.text != t.object.text);
        all.sort_by(|a, b| {
            (a.subject.span.start, a.relation.as_str(), a.object.span.start)
                .cmp(&(b.subject.span.start, b.relation.as_str(), b.object.span.start))
        });
        let mut seen = std::collections::HashSet::new();
        all.retain(|t| seen.insert((t.subject.text.clone(), t.relation, t.object.text.clone())));
        for t in &mut all {
            t.sentence_id = sentence.sentence_id.clone();
            t.assertive = assertive;
        }
        Ok(all)
    }

    /// Extracts every sentence (in parallel with the `parallel` feature).
    /// Output order follows input order.
    pub fn extract_batch(&self, sentences: &[AnnotatedSentence]) -> Vec<Result<Vec<Triple>, ExtractError>> {
        par::map(sentences, |s| self.extract_sentence(s))
    }

    pub fn extract_batch_sequential(&self, sentences: &[AnnotatedSentence]) -> Vec<Result<Vec<Triple>, ExtractError>> {
        par::map_sequential(sentences, |s| self.extract_sentence(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triple_file_round_trip() {
        let text = "s1\tlesion\tFoundIn\tright lobe\ttrue\ns1\tright lobe\tPartOf\tliver\tfalse\n";
        let recs = parse_triples(text).unwrap();
        assert_eq!(recs.len(), 2);
        assert!(!recs[1].assertive);
        assert_eq!(serialize_triples(&recs), text);
        assert!(parse_triples("s\ta\tNearTo\tb\n").is_err());
        assert!(parse_triples("s\ta\tPartOf\n").is_err());
        assert!(parse_triples("s\ta\tPartOf\tb\n").unwrap()[0].assertive);
    }

    #[test]
    fn negation_triggers_match_whole_words() {
        let x = Extractor::with_defaults(Lexicon::new());
        assert!(x.is_negated("No evidence of focal lesion."));
        assert!(x.is_negated("Calculus is not seen."));
        assert!(x.is_negated("There is no free fluid."));
        assert!(!x.is_negated("Normal echotexture noted."));
        assert!(!x.is_negated("Liver nodule."));
    }
}
