//! Organ knowledge graphs: loading and validation, location/default
//! queries, dynamic graphs, path matching, augmentation and N-Triples.

mod augment;
mod ntriples;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::lexicon::Lexicon;
use crate::ontology::{CoarseCategory, LogicalRelation, Ontology};

pub use augment::{
    augment, augment_corpus, build_dynamic_kg, component_roots, match_path, parse_quarantine, serialize_quarantine, AugmentationReport,
    PathMatch, QuarantinedEdge,
};
pub use ntriples::{from_ntriples, to_ntriples, DEFAULT_NAMESPACE};

#[derive(Debug, thiserror::Error)]
pub enum KgError {
    #[error("node `{0}` is not connected to the root")]
    OrphanNode(String),
    #[error("PartOf edges form a cycle through `{0}`")]
    CyclicPartOf(String),
    #[error("no node named `{0}`")]
    NotFound(String),
    #[error("`{0}` names several nodes and the context does not single one out")]
    Ambiguous(String),
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("graph has no usable root: {0}")]
    NoRoot(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GraphKind {
    Preliminary,
    Augmented,
    Dynamic,
}

impl GraphKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GraphKind::Preliminary => "preliminary",
            GraphKind::Augmented => "augmented",
            GraphKind::Dynamic => "dynamic",
        }
    }
}

impl FromStr for GraphKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "preliminary" => Ok(GraphKind::Preliminary),
            "augmented" => Ok(GraphKind::Augmented),
            "dynamic" => Ok(GraphKind::Dynamic),
            other => Err(format!("unknown graph kind `{other}`")),
        }
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub const ATTR_PREFERRED: &str = "preferedName";
pub const ATTR_SYNONYMS: &str = "synonyms";
pub const ATTR_WORD_FORMS: &str = "wordForms";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KgNode {
    pub id: String,
    pub name: String,
    /// Ontology class name, e.g. `Anatomy` or `Inflammation`.
    pub class: String,
    pub attributes: BTreeMap<String, BTreeSet<String>>,
}

impl KgNode {
    pub fn new(id: &str, name: &str, class: &str) -> Self {
        let mut attributes = BTreeMap::new();
        attributes.insert(ATTR_PREFERRED.to_string(), BTreeSet::from([name.to_string()]));
        KgNode {
            id: id.to_string(),
            name: name.to_string(),
            class: class.to_string(),
            attributes,
        }
    }

    /// Preferred name or any synonym / word form, case-insensitively.
    pub fn answers_to(&self, name: &str) -> bool {
        let name = normalize(name);
        normalize(&self.name) == name
            || self
                .attributes
                .iter()
                .filter(|(k, _)| *k != ATTR_PREFERRED)
                .flat_map(|(_, v)| v)
                .any(|s| normalize(s) == name)
    }
}

/// Edges point from the more specific node to the more general one
/// (part to whole, finding to location, modifier to what it modifies).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct KgEdge {
    pub subject: String,
    pub relation: LogicalRelation,
    pub object: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeGraph {
    pub root: Option<String>,
    pub nodes: BTreeMap<String, KgNode>,
    pub edges: BTreeSet<KgEdge>,
    pub kind: GraphKind,
}

pub(crate) fn normalize(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Lowercase alphanumerics joined by `-`.
pub fn slug(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        if c.is_alphanumeric() {
            out.extend(c.to_lowercase());
        } else if !out.ends_with('-') && !out.is_empty() {
            out.push('-');
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    out
}

/// Order in which outgoing edges are followed when climbing to the organ.
const CLIMB_ORDER: &[LogicalRelation] = &[
    LogicalRelation::PartOf,
    LogicalRelation::FoundIn,
    LogicalRelation::ObservedIn,
    LogicalRelation::ObservationOf,
    LogicalRelation::PropertyOf,
    LogicalRelation::DefaultObservationOf,
    LogicalRelation::DefaultPropertyOf,
    LogicalRelation::ModifierOf,
    LogicalRelation::TypeOf,
];

impl KnowledgeGraph {
    pub fn new(kind: GraphKind) -> Self {
        KnowledgeGraph {
            root: None,
            nodes: BTreeMap::new(),
            edges: BTreeSet::new(),
            kind,
        }
    }

    pub fn node(&self, id: &str) -> Option<&KgNode> {
        self.nodes.get(id)
    }

    pub fn add_node(&mut self, node: KgNode) {
        self.nodes.entry(node.id.clone()).or_insert(node);
    }

    /// Adds an edge between existing nodes; false if already present or a
    /// self-loop.
    pub fn add_edge(&mut self, subject: &str, relation: LogicalRelation, object: &str) -> bool {
        if subject == object || !self.nodes.contains_key(subject) || !self.nodes.contains_key(object) {
            return false;
        }
        self.edges.insert(KgEdge {
            subject: subject.to_string(),
            relation,
            object: object.to_string(),
        })
    }

    pub fn has_edge(&self, subject: &str, relation: LogicalRelation, object: &str) -> bool {
        self.edges.contains(&KgEdge {
            subject: subject.to_string(),
            relation,
            object: object.to_string(),
        })
    }

    pub fn outgoing<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a KgEdge> + 'a {
        self.edges.iter().filter(move |e| e.subject == id)
    }

    pub fn incoming<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a KgEdge> + 'a {
        self.edges.iter().filter(move |e| e.object == id)
    }

    /// Nodes reachable by following edges forward (towards the organ).
    pub fn ancestors(&self, id: &str) -> BTreeSet<String> {
        self.reach(id, true)
    }

    pub fn descendants(&self, id: &str) -> BTreeSet<String> {
        self.reach(id, false)
    }

    fn reach(&self, id: &str, forward: bool) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([id.to_string()]);
        while let Some(cur) = queue.pop_front() {
            for e in &self.edges {
                let next = match (forward, e.subject == cur, e.object == cur) {
                    (true, true, _) => &e.object,
                    (false, _, true) => &e.subject,
                    _ => continue,
                };
                if next != id && seen.insert(next.clone()) {
                    queue.push_back(next.clone());
                }
            }
        }
        seen
    }

    pub fn adjacent(&self, a: &str, b: &str) -> bool {
        self.edges
            .iter()
            .any(|e| (e.subject == a && e.object == b) || (e.subject == b && e.object == a))
    }

    /// Ids of nodes answering to `name`, in id order.
    pub fn find_by_name(&self, name: &str) -> Vec<&str> {
        self.nodes
            .values()
            .filter(|n| n.answers_to(name))
            .map(|n| n.id.as_str())
            .collect()
    }

    /// Copies synonyms and word forms from lexicon entries whose preferred
    /// name matches a node name.
    pub fn attach_lexicon(&mut self, lexicon: &Lexicon) {
        let mut by_name: BTreeMap<String, (Vec<String>, Vec<String>)> = BTreeMap::new();
        for e in lexicon.entries() {
            let slot = by_name.entry(normalize(&e.preferred_name)).or_default();
            slot.0.extend(e.synonyms.iter().cloned());
            if normalize(&e.surface) != normalize(&e.preferred_name) {
                slot.0.push(e.surface.clone());
            }
            slot.1.extend(e.word_forms.iter().cloned());
        }
        for node in self.nodes.values_mut() {
            if let Some((syn, forms)) = by_name.get(&normalize(&node.name)) {
                if !syn.is_empty() {
                    node.attributes.entry(ATTR_SYNONYMS.into()).or_default().extend(syn.iter().cloned());
                }
                if !forms.is_empty() {
                    node.attributes.entry(ATTR_WORD_FORMS.into()).or_default().extend(forms.iter().cloned());
                }
            }
        }
    }

    /// Checks the root, connectivity and PartOf acyclicity.
    pub fn validate(&self, ontology: &Ontology) -> Result<(), KgError> {
        if self.nodes.is_empty() {
            return Ok(());
        }
        let root = self.root.as_deref().ok_or_else(|| KgError::NoRoot("root not set".into()))?;
        let node = self.nodes.get(root).ok_or_else(|| KgError::NoRoot(format!("`{root}` is not a node")))?;
        if ontology.coarse(&node.class) != Some(CoarseCategory::Anatomy) {
            return Err(KgError::NoRoot(format!("`{root}` is a {}, not Anatomy", node.class)));
        }
        if let Some(c) = self.part_of_cycle() {
            return Err(KgError::CyclicPartOf(c));
        }
        let reached = self.undirected_component(root);
        for id in self.nodes.keys() {
            if id != root && !reached.contains(id) {
                return Err(KgError::OrphanNode(id.clone()));
            }
        }
        Ok(())
    }

    pub fn undirected_component(&self, id: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::from([id.to_string()]);
        let mut queue = VecDeque::from([id.to_string()]);
        while let Some(cur) = queue.pop_front() {
            for e in &self.edges {
                let next = if e.subject == cur {
                    &e.object
                } else if e.object == cur {
                    &e.subject
                } else {
                    continue;
                };
                if seen.insert(next.clone()) {
                    queue.push_back(next.clone());
                }
            }
        }
        seen
    }

    /// A node on a PartOf cycle, if there is one.
    pub fn part_of_cycle(&self) -> Option<String> {
        let part_of: Vec<&KgEdge> = self.edges.iter().filter(|e| e.relation == LogicalRelation::PartOf).collect();
        for start in self.nodes.keys() {
            let mut stack: Vec<&str> = part_of.iter().filter(|e| &e.subject == start).map(|e| e.object.as_str()).collect();
            let mut seen = BTreeSet::new();
            while let Some(cur) = stack.pop() {
                if cur == start {
                    return Some(start.clone());
                }
                if seen.insert(cur) {
                    stack.extend(part_of.iter().filter(|e| e.subject == cur).map(|e| e.object.as_str()));
                }
            }
        }
        None
    }

    /// True when a PartOf edge `subject -> object` would close a cycle.
    pub fn would_cycle(&self, subject: &str, object: &str) -> bool {
        if subject == object {
            return true;
        }
        let mut stack = vec![object.to_string()];
        let mut seen = BTreeSet::new();
        while let Some(cur) = stack.pop() {
            if cur == subject {
                return true;
            }
            if seen.insert(cur.clone()) {
                for e in self.outgoing(&cur) {
                    if e.relation == LogicalRelation::PartOf {
                        stack.push(e.object.clone());
                    }
                }
            }
        }
        false
    }

    fn parent<'a>(&'a self, id: &'a str) -> Option<&'a str> {
        CLIMB_ORDER.iter().find_map(|rel| {
            self.outgoing(id)
                .find(|e| e.relation == *rel)
                .map(|e| e.object.as_str())
        })
    }

    /// Resolves a name to one node. With several candidates, the one whose
    /// ancestors contain the most `context` names wins; a tie is an error.
    pub fn resolve(&self, name: &str, context: &[&str]) -> Result<&KgNode, KgError> {
        let candidates = self.find_by_name(name);
        match candidates.len() {
            0 => Err(KgError::NotFound(name.to_string())),
            1 => Ok(&self.nodes[candidates[0]]),
            _ => {
                let score = |id: &str| {
                    let anc = self.ancestors(id);
                    context
                        .iter()
                        .filter(|c| anc.iter().any(|a| self.nodes[a].answers_to(c)))
                        .count()
                };
                let mut scored: Vec<(usize, &str)> = candidates.iter().map(|c| (score(c), *c)).collect();
                scored.sort_by_key(|s| std::cmp::Reverse(s.0));
                if scored[0].0 == 0 || scored[0].0 == scored[1].0 {
                    Err(KgError::Ambiguous(name.to_string()))
                } else {
                    Ok(&self.nodes[scored[0].1])
                }
            }
        }
    }

    /// Anatomy nodes above a finding, nearest first, ending at the organ.
    pub fn query_location(&self, finding: &str, context: &[&str], ontology: &Ontology) -> Result<Vec<&KgNode>, KgError> {
        let start = self.resolve(finding, context)?;
        let mut out = Vec::new();
        let mut cur = start.id.as_str();
        let mut seen = BTreeSet::from([cur]);
        while let Some(p) = self.parent(cur) {
            if !seen.insert(p) {
                break;
            }
            let node = &self.nodes[p];
            if ontology.coarse(&node.class) == Some(CoarseCategory::Anatomy) {
                out.push(node);
            }
            cur = p;
        }
        Ok(out)
    }

    /// Default observations and properties of a finding, each followed by
    /// its ModifierOf children: `(subject, relation, object)` node triples.
    pub fn query_defaults(&self, finding: &str, context: &[&str]) -> Result<Vec<(&KgNode, LogicalRelation, &KgNode)>, KgError> {
        let f = self.resolve(finding, context)?;
        let mut out = Vec::new();
        for e in self.incoming(&f.id) {
            if !matches!(e.relation, LogicalRelation::DefaultPropertyOf | LogicalRelation::DefaultObservationOf) {
                continue;
            }
            let d = &self.nodes[&e.subject];
            out.push((d, e.relation, f));
            for m in self.incoming(&d.id).filter(|m| m.relation == LogicalRelation::ModifierOf) {
                out.push((&self.nodes[&m.subject], LogicalRelation::ModifierOf, d));
            }
        }
        Ok(out)
    }

    /// Picks the root: the `preferred` node if given, else the single
    /// Anatomy node without outgoing edges.
    pub fn infer_root(&mut self, ontology: &Ontology) -> Result<(), KgError> {
        let sinks: Vec<&str> = self
            .nodes
            .values()
            .filter(|n| ontology.coarse(&n.class) == Some(CoarseCategory::Anatomy))
            .filter(|n| self.outgoing(&n.id).next().is_none())
            .map(|n| n.id.as_str())
            .collect();
        match sinks.as_slice() {
            [one] => {
                self.root = Some(one.to_string());
                Ok(())
            }
            [] => Err(KgError::NoRoot("no Anatomy node without outgoing edges".into())),
            many => Err(KgError::NoRoot(format!("several candidate roots: {}", many.join(", ")))),
        }
    }
}

fn node_id(name: &str) -> (String, String) {
    match name.split_once('#') {
        Some((base, instance)) => (base.trim().to_string(), format!("{}.{}", slug(base), slug(instance))),
        None => (name.trim().to_string(), slug(name)),
    }
}

/// Parses the authoring format
/// `subject<TAB>relation<TAB>object<TAB>subject_class<TAB>object_class`.
/// `name#tag` gives a same-named instance its own id, a two-column row
/// `name<TAB>class` declares a node without edges, and `#root: name` picks
/// the organ explicitly.
pub fn parse_kg_tsv(text: &str, ontology: &Ontology) -> Result<KnowledgeGraph, KgError> {
    let mut g = KnowledgeGraph::new(GraphKind::Preliminary);
    let mut declared_root = None;
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim_end_matches('\r');
        let err = |reason: String| KgError::Syntax { line: line_no, reason };
        if let Some(r) = line.trim().strip_prefix("#root:") {
            declared_root = Some(node_id(r.trim()).1);
            continue;
        }
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        let class = |c: &str| {
            ontology
                .canonical(c)
                .map(str::to_string)
                .ok_or_else(|| err(format!("unknown class `{c}`")))
        };
        match cols.len() {
            2 => {
                let (name, id) = node_id(cols[0]);
                g.add_node(KgNode::new(&id, &name, &class(cols[1])?));
            }
            5 => {
                let relation = cols[1]
                    .parse::<LogicalRelation>()
                    .map_err(|e| err(e.to_string()))?;
                let (sname, sid) = node_id(cols[0]);
                let (oname, oid) = node_id(cols[2]);
                if sid == oid {
                    return Err(err("self-loop".into()));
                }
                for (id, name, c) in [(&sid, &sname, cols[3]), (&oid, &oname, cols[4])] {
                    let c = class(c)?;
                    if let Some(existing) = g.nodes.get(id) {
                        if existing.class != c {
                            return Err(err(format!("`{name}` declared as both {} and {c}", existing.class)));
                        }
                    }
                    g.add_node(KgNode::new(id, name, &c));
                }
                g.add_edge(&sid, relation, &oid);
            }
            k => return Err(err(format!("expected 2 or 5 columns, found {k}"))),
        }
    }
    match declared_root {
        Some(r) if g.nodes.contains_key(&r) => g.root = Some(r),
        Some(r) => return Err(KgError::NoRoot(format!("declared root `{r}` is not a node"))),
        None if g.nodes.is_empty() => {}
        None => g.infer_root(ontology)?,
    }
    g.validate(ontology)?;
    Ok(g)
}

/// Reads a preliminary graph from `.nt` or the TSV authoring format.
pub fn load_preliminary_kg(path: &Path, ontology: &Ontology) -> Result<KnowledgeGraph, KgError> {
    let text = std::fs::read_to_string(path).map_err(|source| KgError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let g = if path.extension().is_some_and(|e| e == "nt") {
        from_ntriples(&text, DEFAULT_NAMESPACE)?
    } else {
        parse_kg_tsv(&text, ontology)?
    };
    g.validate(ontology)?;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LIVER: &str = "\
right lobe\tPartOf\tliver\tAnatomy\tAnatomy
left lobe\tPartOf\tliver\tAnatomy\tAnatomy
segment VI\tPartOf\tright lobe\tAnatomy\tAnatomy
lesion\tFoundIn\tsegment VI\tLesion\tAnatomy
";

    #[test]
    fn loads_liver_hierarchy() {
        let o = Ontology::default();
        let g = parse_kg_tsv(LIVER, &o).unwrap();
        assert_eq!(g.root.as_deref(), Some("liver"));
        assert_eq!(g.nodes.len(), 5);
        assert_eq!(g.edges.len(), 4);
        let loc: Vec<&str> = g.query_location("lesion", &[], &o).unwrap().iter().map(|n| n.name.as_str()).collect();
        assert_eq!(loc, vec!["segment VI", "right lobe", "liver"]);
        assert!(matches!(g.query_location("cyst", &[], &o), Err(KgError::NotFound(_))));
    }

    #[test]
    fn single_node_and_invalid_graphs() {
        let o = Ontology::default();
        let g = parse_kg_tsv("liver\tAnatomy\n", &o).unwrap();
        assert_eq!(g.nodes.len(), 1);
        assert!(g.edges.is_empty());
        let cyc = "a\tPartOf\tb\tAnatomy\tAnatomy\nb\tPartOf\ta\tAnatomy\tAnatomy\n#root: a\n";
        assert!(matches!(parse_kg_tsv(cyc, &o), Err(KgError::CyclicPartOf(_))));
        let orphan = "#root: liver\nright lobe\tPartOf\tliver\tAnatomy\tAnatomy\nspleen\tAnatomy\n";
        assert!(matches!(parse_kg_tsv(orphan, &o), Err(KgError::OrphanNode(id)) if id == "spleen"));
        assert!(parse_kg_tsv("a\tNearTo\tb\tAnatomy\tAnatomy\n", &o).is_err());
    }

    #[test]
    fn instances_and_disambiguation() {
        let o = Ontology::default();
        let text = "\
acute hepatitis\tFoundIn\tliver\tInflammation\tAnatomy
chronic liver disease\tFoundIn\tliver\tDisease\tAnatomy
echogenicity#ah\tDefaultPropertyOf\tacute hepatitis\tProperty\tInflammation
echogenicity#cld\tDefaultPropertyOf\tchronic liver disease\tProperty\tDisease
decreased\tModifierOf\techogenicity#ah\tModifier\tProperty
increased\tModifierOf\techogenicity#cld\tModifier\tProperty
";
        let g = parse_kg_tsv(text, &o).unwrap();
        assert_eq!(g.find_by_name("echogenicity").len(), 2);
        assert_eq!(g.resolve("echogenicity", &["chronic liver disease"]).unwrap().id, "echogenicity.cld");
        assert!(matches!(g.resolve("echogenicity", &[]), Err(KgError::Ambiguous(_))));
        let d = g.query_defaults("acute hepatitis", &[]).unwrap();
        let names: Vec<(&str, &str)> = d.iter().map(|(s, _, o)| (s.name.as_str(), o.name.as_str())).collect();
        assert_eq!(names, vec![("echogenicity", "acute hepatitis"), ("decreased", "echogenicity")]);
        assert!(g.query_defaults("liver", &[]).unwrap().is_empty());
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("Segment VI"), "segment-vi");
        assert_eq!(slug("non-enhancing  lesion!"), "non-enhancing-lesion");
    }
}
