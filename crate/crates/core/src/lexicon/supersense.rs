use std::collections::BTreeMap;

use crate::ontology::LogicalRelation;

use super::LexiconError;

/// Shipped supersense -> relation rows.
pub const DEFAULT_RELATION_MAP: &[(&str, LogicalRelation)] = &[
    ("Locus", LogicalRelation::FoundIn),
    ("Gestalt", LogicalRelation::PartOf),
    ("PartPortion", LogicalRelation::PartOf),
    ("Whole", LogicalRelation::PartOf),
    ("Manner", LogicalRelation::PropertyOf),
    ("Purpose", LogicalRelation::PropertyOf),
];

/// Context-free most-frequent sense per preposition, used when no tagger
/// output is available.
pub const DEFAULT_PREP_SENSES: &[(&str, &str)] = &[
    ("in", "Locus"),
    ("within", "Locus"),
    ("at", "Locus"),
    ("on", "Locus"),
    ("along", "Locus"),
    ("near", "Locus"),
    ("involving", "Locus"),
    ("of", "Whole"),
    ("with", "Manner"),
    ("for", "Purpose"),
];

/// Preposition default senses and the supersense -> relation map. Labels
/// are compared case-insensitively.
#[derive(Debug, Clone)]
pub struct SupersenseLexicon {
    prep_default: BTreeMap<String, String>,
    relation_map: BTreeMap<String, LogicalRelation>,
}

impl Default for SupersenseLexicon {
    fn default() -> Self {
        let mut s = SupersenseLexicon::empty();
        for (sense, rel) in DEFAULT_RELATION_MAP {
            s.set_relation(sense, *rel);
        }
        for (prep, sense) in DEFAULT_PREP_SENSES {
            s.set_prep_default(prep, sense);
        }
        s
    }
}

impl SupersenseLexicon {
    pub fn empty() -> Self {
        SupersenseLexicon {
            prep_default: BTreeMap::new(),
            relation_map: BTreeMap::new(),
        }
    }

    pub fn set_relation(&mut self, sense: &str, relation: LogicalRelation) {
        self.relation_map.insert(sense.trim().to_lowercase(), relation);
    }

    pub fn set_prep_default(&mut self, prep: &str, sense: &str) {
        self.prep_default
            .insert(prep.trim().to_lowercase(), sense.trim().to_string());
    }

    /// Relation for a supersense label, if mapped.
    pub fn map_supersense(&self, supersense: &str) -> Option<LogicalRelation> {
        self.relation_map.get(&supersense.trim().to_lowercase()).copied()
    }

    pub fn default_sense(&self, preposition: &str) -> Option<&str> {
        self.prep_default
            .get(&preposition.trim().to_lowercase())
            .map(String::as_str)
    }

    /// True when the relation map covers every shipped row.
    pub fn covers_defaults(&self) -> bool {
        DEFAULT_RELATION_MAP
            .iter()
            .all(|(s, r)| self.map_supersense(s) == Some(*r))
    }

    /// Builds from `supersense<TAB>relation` and `preposition<TAB>supersense` text.
    pub fn parse(relation_map: &str, prep_defaults: &str) -> Result<Self, LexiconError> {
        let mut s = SupersenseLexicon::empty();
        for (line, a, b) in rows("supersense map", relation_map)? {
            let rel = b.parse::<LogicalRelation>().map_err(|e| LexiconError::Parse {
                source_name: "supersense map".into(),
                line,
                reason: e.to_string(),
            })?;
            s.set_relation(&a, rel);
        }
        for (_, a, b) in rows("preposition senses", prep_defaults)? {
            s.set_prep_default(&a, &b);
        }
        Ok(s)
    }
}

fn rows(name: &str, text: &str) -> Result<Vec<(usize, String, String)>, LexiconError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (a, b) = line.split_once('\t').ok_or_else(|| LexiconError::Parse {
            source_name: name.to_string(),
            line: n + 1,
            reason: "expected two tab-separated columns".into(),
        })?;
        out.push((n + 1, a.trim().to_string(), b.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_rows() {
        let s = SupersenseLexicon::default();
        assert_eq!(s.map_supersense("Locus"), Some(LogicalRelation::FoundIn));
        assert_eq!(s.map_supersense("Whole"), Some(LogicalRelation::PartOf));
        assert_eq!(s.map_supersense("locus"), Some(LogicalRelation::FoundIn));
        assert_eq!(s.map_supersense("COGNITION"), None);
        assert!(s.covers_defaults());
        assert_eq!(s.default_sense("Of"), Some("Whole"));
    }

    #[test]
    fn parse_tables() {
        let s = SupersenseLexicon::parse("Locus\tFoundIn\nCharacteristic\tPropertyOf\n", "in\tLocus\n").unwrap();
        assert_eq!(s.map_supersense("characteristic"), Some(LogicalRelation::PropertyOf));
        assert!(!s.covers_defaults());
        assert!(SupersenseLexicon::parse("Locus\tNearTo\n", "").is_err());
    }
}
