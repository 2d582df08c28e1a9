//! Annotated-sentence model: tokens with POS, lemma, dependency and
//! supersense, plus noun-chunk spans.

mod fallback;
mod io;
mod merge;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use fallback::FallbackAnnotator;
pub use io::{load_annotations, parse_annotations, serialize_annotations};
pub use merge::{merge_chunks, ChunkedSentence, Node, NodeKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnnotationError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("sentence `{0}` has a cyclic dependency")]
    CyclicDependency(String),
    #[error("sentence `{sentence_id}`: {reason}")]
    Invalid { sentence_id: String, reason: String },
    #[error("sentence `{0}`: merged chunks form a cycle")]
    MergeConflict(String),
}

/// Coarse universal POS tags. Unknown tags survive round-trips via `Other`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pos {
    Noun,
    Propn,
    Adj,
    Verb,
    Aux,
    Adp,
    Det,
    Num,
    Punct,
    Cconj,
    Adv,
    Part,
    Pron,
    Sym,
    Other(String),
}

impl Pos {
    pub fn as_str(&self) -> &str {
        match self {
            Pos::Noun => "NOUN",
            Pos::Propn => "PROPN",
            Pos::Adj => "ADJ",
            Pos::Verb => "VERB",
            Pos::Aux => "AUX",
            Pos::Adp => "ADP",
            Pos::Det => "DET",
            Pos::Num => "NUM",
            Pos::Punct => "PUNCT",
            Pos::Cconj => "CCONJ",
            Pos::Adv => "ADV",
            Pos::Part => "PART",
            Pos::Pron => "PRON",
            Pos::Sym => "SYM",
            Pos::Other(s) => s,
        }
    }

    pub fn is_nominal(&self) -> bool {
        matches!(self, Pos::Noun | Pos::Propn)
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pos {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_uppercase().as_str() {
            "NOUN" => Pos::Noun,
            "PROPN" => Pos::Propn,
            "ADJ" => Pos::Adj,
            "VERB" => Pos::Verb,
            "AUX" => Pos::Aux,
            "ADP" => Pos::Adp,
            "DET" => Pos::Det,
            "NUM" => Pos::Num,
            "PUNCT" => Pos::Punct,
            "CCONJ" | "CONJ" => Pos::Cconj,
            "ADV" => Pos::Adv,
            "PART" => Pos::Part,
            "PRON" => Pos::Pron,
            "SYM" => Pos::Sym,
            _ => Pos::Other(s.trim().to_string()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub index: usize,
    pub text: String,
    pub lemma: String,
    pub pos: Pos,
    pub supersense: Option<String>,
    /// Index of the head token; equal to `index` for the root.
    pub head: usize,
    pub dep_label: String,
}

impl Token {
    pub fn is_root(&self) -> bool {
        self.head == self.index
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NounChunk {
    pub start: usize,
    pub end: usize,
    pub root: usize,
}

impl NounChunk {
    pub fn contains(&self, i: usize) -> bool {
        (self.start..self.end).contains(&i)
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedSentence {
    pub sentence_id: String,
    pub tokens: Vec<Token>,
    pub chunks: Vec<NounChunk>,
}

impl AnnotatedSentence {
    pub fn text(&self) -> String {
        self.tokens
            .iter()
            .map(|t| t.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn root(&self) -> Option<usize> {
        self.tokens.iter().position(Token::is_root)
    }

    /// Checks token, tree and chunk invariants.
    pub fn validate(&self) -> Result<(), AnnotationError> {
        let invalid = |reason: String| AnnotationError::Invalid {
            sentence_id: self.sentence_id.clone(),
            reason,
        };
        if self.tokens.is_empty() {
            return Err(invalid("no tokens".into()));
        }
        let n = self.tokens.len();
        for (i, t) in self.tokens.iter().enumerate() {
            if t.index != i {
                return Err(invalid(format!("token {i} carries index {}", t.index)));
            }
            if t.head >= n {
                return Err(invalid(format!("token {i} has head {} out of range", t.head)));
            }
        }
        let roots = self.tokens.iter().filter(|t| t.is_root()).count();
        if roots != 1 {
            return Err(invalid(format!("expected exactly one root, found {roots}")));
        }
        for start in 0..n {
            let mut cur = start;
            let mut steps = 0;
            while !self.tokens[cur].is_root() {
                cur = self.tokens[cur].head;
                steps += 1;
                if steps > n {
                    return Err(AnnotationError::CyclicDependency(self.sentence_id.clone()));
                }
            }
        }
        let mut prev_end = 0;
        for c in &self.chunks {
            if c.start >= c.end || c.end > n {
                return Err(invalid(format!("bad chunk span {}..{}", c.start, c.end)));
            }
            if c.start < prev_end {
                return Err(invalid("chunks overlap or are out of order".into()));
            }
            if !c.contains(c.root) {
                return Err(invalid(format!("chunk root {} outside span", c.root)));
            }
            prev_end = c.end;
        }
        Ok(())
    }

    pub fn chunk_of(&self, token: usize) -> Option<&NounChunk> {
        self.chunks.iter().find(|c| c.contains(token))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tok(i: usize, text: &str, head: usize, dep: &str) -> Token {
        Token {
            index: i,
            text: text.into(),
            lemma: text.into(),
            pos: Pos::Noun,
            supersense: None,
            head,
            dep_label: dep.into(),
        }
    }

    #[test]
    fn validate_detects_cycles_and_roots() {
        let ok = AnnotatedSentence {
            sentence_id: "s".into(),
            tokens: vec![tok(0, "a", 1, "nsubj"), tok(1, "b", 1, "root")],
            chunks: vec![],
        };
        assert!(ok.validate().is_ok());
        let cyc = AnnotatedSentence {
            sentence_id: "s".into(),
            tokens: vec![tok(0, "a", 1, "x"), tok(1, "b", 0, "x"), tok(2, "c", 2, "root")],
            chunks: vec![],
        };
        assert_eq!(cyc.validate(), Err(AnnotationError::CyclicDependency("s".into())));
        let two_roots = AnnotatedSentence {
            sentence_id: "s".into(),
            tokens: vec![tok(0, "a", 0, "root"), tok(1, "b", 1, "root")],
            chunks: vec![],
        };
        assert!(two_roots.validate().is_err());
    }

    #[test]
    fn pos_round_trip_unknown() {
        let p: Pos = "INTJ".parse().unwrap();
        assert_eq!(p.as_str(), "INTJ");
        assert_eq!("adj".parse::<Pos>().unwrap(), Pos::Adj);
    }
}
