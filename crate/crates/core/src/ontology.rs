//! Ontology classes and the closed set of logical relations.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The five top-level ontology classes every entity is coarsened to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CoarseCategory {
    Anatomy,
    Finding,
    Observation,
    Property,
    Modifier,
}

impl CoarseCategory {
    pub const ALL: [CoarseCategory; 5] = [
        CoarseCategory::Anatomy,
        CoarseCategory::Finding,
        CoarseCategory::Observation,
        CoarseCategory::Property,
        CoarseCategory::Modifier,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CoarseCategory::Anatomy => "Anatomy",
            CoarseCategory::Finding => "Finding",
            CoarseCategory::Observation => "Observation",
            CoarseCategory::Property => "Property",
            CoarseCategory::Modifier => "Modifier",
        }
    }
}

impl fmt::Display for CoarseCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown name `{0}`")]
pub struct UnknownName(pub String);

impl FromStr for CoarseCategory {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        CoarseCategory::ALL
            .into_iter()
            .find(|c| c.as_str().to_ascii_lowercase() == lower)
            .ok_or_else(|| UnknownName(s.to_string()))
    }
}

/// Relations allowed on triples and graph edges. Serialized names are the
/// variant names verbatim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LogicalRelation {
    PartOf,
    TypeOf,
    ModifierOf,
    ObservationOf,
    DefaultObservationOf,
    PropertyOf,
    DefaultPropertyOf,
    FoundIn,
    ObservedIn,
}

impl LogicalRelation {
    pub const ALL: [LogicalRelation; 9] = [
        LogicalRelation::PartOf,
        LogicalRelation::TypeOf,
        LogicalRelation::ModifierOf,
        LogicalRelation::ObservationOf,
        LogicalRelation::DefaultObservationOf,
        LogicalRelation::PropertyOf,
        LogicalRelation::DefaultPropertyOf,
        LogicalRelation::FoundIn,
        LogicalRelation::ObservedIn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LogicalRelation::PartOf => "PartOf",
            LogicalRelation::TypeOf => "TypeOf",
            LogicalRelation::ModifierOf => "ModifierOf",
            LogicalRelation::ObservationOf => "ObservationOf",
            LogicalRelation::DefaultObservationOf => "DefaultObservationOf",
            LogicalRelation::PropertyOf => "PropertyOf",
            LogicalRelation::DefaultPropertyOf => "DefaultPropertyOf",
            LogicalRelation::FoundIn => "FoundIn",
            LogicalRelation::ObservedIn => "ObservedIn",
        }
    }

    /// Edges that place a node under its anatomical parent.
    pub fn is_locative(self) -> bool {
        matches!(
            self,
            LogicalRelation::PartOf | LogicalRelation::FoundIn | LogicalRelation::ObservedIn
        )
    }
}

impl fmt::Display for LogicalRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LogicalRelation {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        LogicalRelation::ALL
            .into_iter()
            .find(|r| r.as_str().eq_ignore_ascii_case(t))
            .ok_or_else(|| UnknownName(s.to_string()))
    }
}

/// One class of the ontology tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OntologyClass {
    pub name: String,
    pub parent: Option<String>,
}

/// Class hierarchy rooted at a single top class. Lookup is case-insensitive
/// and accepts kebab-case fine tags (`size-modifier` -> `SizeModifier`).
#[derive(Debug, Clone)]
pub struct Ontology {
    top: String,
    classes: BTreeMap<String, OntologyClass>,
}

pub const TOP_CLASS: &str = "RadiologyEntity";

impl Default for Ontology {
    fn default() -> Self {
        let mut o = Ontology {
            top: TOP_CLASS.to_string(),
            classes: BTreeMap::new(),
        };
        o.insert(TOP_CLASS, None);
        for c in CoarseCategory::ALL {
            o.insert(c.as_str(), Some(TOP_CLASS));
        }
        // calculus sits under Finding so that "kidney calculus" reads as Anatomy Finding
        for sub in ["PathologicFinding", "Inflammation", "Disease", "Injury", "Calculus"] {
            o.insert(sub, Some("Finding"));
        }
        for sub in ["Lesion", "Cyst", "Mass"] {
            o.insert(sub, Some("Observation"));
        }
        o.insert("SizeModifier", Some("Modifier"));
        o
    }
}

fn class_key(name: &str) -> String {
    name.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .collect::<String>()
        .to_ascii_lowercase()
}

impl Ontology {
    fn insert(&mut self, name: &str, parent: Option<&str>) {
        self.classes.insert(
            class_key(name),
            OntologyClass {
                name: name.to_string(),
                parent: parent.map(str::to_string),
            },
        );
    }

    /// Adds a subclass. Fails if the parent is unknown.
    pub fn add_class(&mut self, name: &str, parent: &str) -> Result<(), UnknownName> {
        let parent = self.get(parent).ok_or_else(|| UnknownName(parent.to_string()))?;
        let parent = parent.name.clone();
        self.insert(name, Some(&parent));
        Ok(())
    }

    pub fn top(&self) -> &str {
        &self.top
    }

    pub fn get(&self, name: &str) -> Option<&OntologyClass> {
        self.classes.get(&class_key(name))
    }

    pub fn classes(&self) -> impl Iterator<Item = &OntologyClass> {
        self.classes.values()
    }

    /// Resolves any class to the coarse category it descends from.
    pub fn coarse(&self, name: &str) -> Option<CoarseCategory> {
        let mut cur = self.get(name)?;
        loop {
            if let Ok(c) = cur.name.parse::<CoarseCategory>() {
                return Some(c);
            }
            cur = self.get(cur.parent.as_deref()?)?;
        }
    }

    /// Canonical spelling of a class name, if known.
    pub fn canonical(&self, name: &str) -> Option<&str> {
        self.get(name).map(|c| c.name.as_str())
    }
}
