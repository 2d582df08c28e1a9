use std::collections::BTreeSet;
use std::str::FromStr;

use crate::annotation::Pos;
use crate::ontology::{CoarseCategory, LogicalRelation};

use super::{Entity, ExtractError};

/// Chunk patterns shipped by default, in the file format.
pub const DEFAULT_CHUNK_PATTERNS: &str = "\
ADJ* NOUN/root\tADJ\tModifierOf\tNOUN/root
Anatomy Anatomy/root\tAnatomy/root\tPartOf\tAnatomy
Anatomy Finding/root\tFinding/root\tFoundIn\tAnatomy
Anatomy Observation/root\tObservation/root\tFoundIn\tAnatomy
Modifier Observation/root\tModifier\tModifierOf\tObservation/root
Modifier Property/root\tModifier\tModifierOf\tProperty/root
Modifier Finding/root\tModifier\tModifierOf\tFinding/root
Modifier Anatomy/root\tModifier\tModifierOf\tAnatomy/root
";

/// Category patterns shipped by default, in the file format.
pub const DEFAULT_CATEGORY_PATTERNS: &str = "\
Anatomy\tAnatomy\tPartOf
Property\tAnatomy\tPropertyOf
Finding\tAnatomy\tFoundIn
Observation\tAnatomy\tObservedIn
Property\tObservation\tPropertyOf
Property\tFinding\tPropertyOf
";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SlotKind {
    Category(CoarseCategory),
    Pos(Pos),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub kind: SlotKind,
    pub root: bool,
    pub repeat: bool,
}

impl Slot {
    /// Category slots only accept dictionary-known entities; the root slot
    /// also accepts an inferred category.
    fn matches(&self, e: &Entity) -> bool {
        match &self.kind {
            SlotKind::Category(c) => e.category == *c && (e.from_lexicon || self.root),
            SlotKind::Pos(p) => e.pos == *p,
        }
    }
}

impl FromStr for Slot {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (body, root) = match s.strip_suffix("/root") {
            Some(b) => (b, true),
            None => (s, false),
        };
        let (body, repeat) = match body.strip_suffix('*') {
            Some(b) => (b, true),
            None => (body, false),
        };
        if body.is_empty() {
            return Err(format!("empty slot `{s}`"));
        }
        let kind = match body.parse::<CoarseCategory>() {
            Ok(c) => SlotKind::Category(c),
            Err(_) => match body.parse::<Pos>() {
                Ok(Pos::Other(o)) => return Err(format!("`{o}` is neither a category nor a POS tag")),
                Ok(p) => SlotKind::Pos(p),
                Err(never) => match never {},
            },
        };
        Ok(Slot { kind, root, repeat })
    }
}

/// A two-slot noun-phrase pattern: one modifier-side slot and one root slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkPattern {
    pub slots: Vec<Slot>,
    pub subject_is_root: bool,
    pub relation: LogicalRelation,
    pub source: String,
}

impl ChunkPattern {
    fn root_slot(&self) -> &Slot {
        self.slots.iter().find(|s| s.root).expect("validated at parse time")
    }

    fn other_slot(&self) -> &Slot {
        self.slots.iter().find(|s| !s.root).expect("validated at parse time")
    }

    /// 0 for category/category, 1 for mixed, 2 for POS/POS.
    pub fn tier(&self) -> usize {
        self.slots
            .iter()
            .filter(|s| matches!(s.kind, SlotKind::Pos(_)))
            .count()
    }

    /// `Some(true)` when the pattern applies with the root as subject.
    pub fn apply(&self, entity: &Entity, root: &Entity) -> Option<bool> {
        (self.other_slot().matches(entity) && self.root_slot().matches(root)).then_some(self.subject_is_root)
    }
}

/// Parses `slot slot/root<TAB>subject_slot<TAB>relation<TAB>object_slot` rows.
pub fn parse_chunk_patterns(text: &str) -> Result<Vec<ChunkPattern>, ExtractError> {
    let mut out = Vec::new();
    for (n, line) in rows(text) {
        let err = |reason: String| ExtractError::Pattern { line: n, reason };
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cols.len() != 4 {
            return Err(err(format!("expected 4 columns, found {}", cols.len())));
        }
        let names: Vec<&str> = cols[0].split_whitespace().collect();
        let slots = names
            .iter()
            .map(|s| s.parse::<Slot>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        if slots.len() != 2 || slots.iter().filter(|s| s.root).count() != 1 {
            return Err(err("a chunk pattern needs exactly two slots, one marked /root".into()));
        }
        let find = |name: &str| {
            names
                .iter()
                .position(|s| s.trim_end_matches('*') == name.trim_end_matches('*'))
                .ok_or_else(|| err(format!("slot `{name}` does not appear in the pattern")))
        };
        let subj = find(cols[1])?;
        let obj = find(cols[3])?;
        if subj == obj {
            return Err(err("subject and object refer to the same slot".into()));
        }
        let relation = cols[2].parse::<LogicalRelation>().map_err(|e| err(e.to_string()))?;
        out.push(ChunkPattern {
            subject_is_root: slots[subj].root,
            slots,
            relation,
            source: line.to_string(),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CategoryPattern {
    pub subject: CoarseCategory,
    pub object: CoarseCategory,
    pub relation: LogicalRelation,
}

/// Parses `subject_category<TAB>object_category<TAB>relation` rows.
pub fn parse_category_patterns(text: &str) -> Result<Vec<CategoryPattern>, ExtractError> {
    let mut out: Vec<CategoryPattern> = Vec::new();
    let mut seen = BTreeSet::new();
    for (n, line) in rows(text) {
        let err = |reason: String| ExtractError::Pattern { line: n, reason };
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cols.len() != 3 {
            return Err(err(format!("expected 3 columns, found {}", cols.len())));
        }
        let subject = cols[0].parse::<CoarseCategory>().map_err(|e| err(e.to_string()))?;
        let object = cols[1].parse::<CoarseCategory>().map_err(|e| err(e.to_string()))?;
        let relation = cols[2].parse::<LogicalRelation>().map_err(|e| err(e.to_string()))?;
        if !seen.insert((subject, object)) {
            return Err(err(format!("duplicate pair ({subject}, {object})")));
        }
        out.push(CategoryPattern { subject, object, relation });
    }
    Ok(out)
}

fn rows(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

/// Relation for an ordered category pair, if a pattern covers it.
pub fn category_relation(patterns: &[CategoryPattern], subject: CoarseCategory, object: CoarseCategory) -> Option<LogicalRelation> {
    patterns
        .iter()
        .find(|p| p.subject == subject && p.object == object)
        .map(|p| p.relation)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_patterns_parse() {
        let chunk = parse_chunk_patterns(DEFAULT_CHUNK_PATTERNS).unwrap();
        assert_eq!(chunk.len(), 8);
        assert_eq!(chunk[0].tier(), 2);
        assert_eq!(chunk[1].tier(), 0);
        assert!(chunk[1].subject_is_root);
        assert!(!chunk[0].subject_is_root);
        let cat = parse_category_patterns(DEFAULT_CATEGORY_PATTERNS).unwrap();
        assert_eq!(
            category_relation(&cat, CoarseCategory::Observation, CoarseCategory::Anatomy),
            Some(LogicalRelation::ObservedIn)
        );
        assert_eq!(category_relation(&cat, CoarseCategory::Anatomy, CoarseCategory::Observation), None);
    }

    #[test]
    fn bad_patterns_rejected() {
        assert!(parse_chunk_patterns("ADJ NOUN\tADJ\tModifierOf\tNOUN\n").is_err());
        assert!(parse_chunk_patterns("ADJ NOUN/root\tADJ\tNearTo\tNOUN/root\n").is_err());
        assert!(parse_chunk_patterns("ADJ Bogus/root\tADJ\tModifierOf\tBogus/root\n").is_err());
        assert!(parse_category_patterns("Anatomy\tAnatomy\tPartOf\nAnatomy\tAnatomy\tTypeOf\n").is_err());
    }
}
