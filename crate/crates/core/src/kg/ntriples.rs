//! Canonical N-Triples form: one statement per line, lines sorted.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::LazyLock;

use regex::Regex;

use super::{GraphKind, KgEdge, KgError, KgNode, KnowledgeGraph, ATTR_PREFERRED};
use crate::ontology::LogicalRelation;

pub const DEFAULT_NAMESPACE: &str = "http://example.org/radkg/";

const ATTR_CLASS: &str = "class";

static LINE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"^<([^<>\s]*)>\s+<([^<>\s]*)>\s+(?:<([^<>\s]*)>|"((?:[^"\\]|\\.)*)")\s*\.$"#).unwrap()
});

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> Result<String, String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('"') => out.push('"'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('t') => out.push('\t'),
            other => return Err(format!("bad escape `\\{}`", other.map(String::from).unwrap_or_default())),
        }
    }
    Ok(out)
}

/// Serializes nodes, attributes, edges, root and kind under `ns`.
pub fn to_ntriples(graph: &KnowledgeGraph, ns: &str) -> String {
    let node = |id: &str| format!("<{ns}node/{id}>");
    let mut lines = BTreeSet::new();
    for n in graph.nodes.values() {
        lines.insert(format!("{} <{ns}attr/{ATTR_CLASS}> \"{}\" .", node(&n.id), escape(&n.class)));
        for (k, values) in &n.attributes {
            for v in values {
                lines.insert(format!("{} <{ns}attr/{k}> \"{}\" .", node(&n.id), escape(v)));
            }
        }
    }
    for e in &graph.edges {
        lines.insert(format!("{} <{ns}relation/{}> {} .", node(&e.subject), e.relation, node(&e.object)));
    }
    if let Some(r) = &graph.root {
        lines.insert(format!("<{ns}graph> <{ns}meta/root> {} .", node(r)));
    }
    lines.insert(format!("<{ns}graph> <{ns}meta/kind> \"{}\" .", graph.kind));
    let mut out = lines.into_iter().collect::<Vec<_>>().join("\n");
    out.push('\n');
    out
}

pub fn from_ntriples(text: &str, ns: &str) -> Result<KnowledgeGraph, KgError> {
    let mut attrs: BTreeMap<String, BTreeMap<String, BTreeSet<String>>> = BTreeMap::new();
    let mut classes: BTreeMap<String, String> = BTreeMap::new();
    let mut edges = BTreeSet::new();
    let mut root = None;
    let mut kind = GraphKind::Preliminary;
    let mut mentioned = BTreeSet::new();

    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |reason: String| KgError::Syntax { line: n + 1, reason };
        let caps = LINE.captures(line).ok_or_else(|| err("not an N-Triples statement".into()))?;
        let local = |iri: &str, prefix: &str| iri.strip_prefix(ns).and_then(|r| r.strip_prefix(prefix)).map(str::to_string);
        let subject = &caps[1];
        let predicate = &caps[2];
        let object_iri = caps.get(3).map(|m| m.as_str());
        let literal = caps.get(4).map(|m| unescape(m.as_str())).transpose().map_err(err)?;

        if subject == format!("{ns}graph") {
            match (predicate.strip_prefix(ns), object_iri, literal) {
                (Some("meta/root"), Some(o), None) => {
                    root = Some(local(o, "node/").ok_or_else(|| err(format!("root `{o}` outside namespace")))?)
                }
                (Some("meta/kind"), None, Some(k)) => kind = k.parse().map_err(err)?,
                _ => return Err(err(format!("unknown graph statement `{predicate}`"))),
            }
            continue;
        }
        let sid = local(subject, "node/").ok_or_else(|| err(format!("subject `{subject}` is not a node")))?;
        mentioned.insert(sid.clone());
        if let Some(rel) = local(predicate, "relation/") {
            let relation: LogicalRelation = rel.parse().map_err(|e: crate::ontology::UnknownName| err(e.to_string()))?;
            let o = object_iri.ok_or_else(|| err("relation object must be an IRI".into()))?;
            let oid = local(o, "node/").ok_or_else(|| err(format!("object `{o}` is not a node")))?;
            mentioned.insert(oid.clone());
            edges.insert(KgEdge { subject: sid, relation, object: oid });
        } else if let Some(attr) = local(predicate, "attr/") {
            let value = literal.ok_or_else(|| err("attribute value must be a literal".into()))?;
            if attr == ATTR_CLASS {
                if classes.insert(sid.clone(), value).is_some() {
                    return Err(err(format!("node `{sid}` has two classes")));
                }
            } else {
                attrs.entry(sid).or_default().entry(attr).or_default().insert(value);
            }
        } else {
            return Err(err(format!("unknown predicate `{predicate}`")));
        }
    }

    let mut g = KnowledgeGraph::new(kind);
    for id in mentioned {
        let class = classes
            .remove(&id)
            .ok_or_else(|| KgError::Syntax { line: 0, reason: format!("node `{id}` has no class") })?;
        let attributes = attrs.remove(&id).unwrap_or_default();
        let name = match attributes.get(ATTR_PREFERRED).map(|v| v.iter().collect::<Vec<_>>()) {
            Some(v) if v.len() == 1 => v[0].clone(),
            _ => return Err(KgError::Syntax { line: 0, reason: format!("node `{id}` needs exactly one {ATTR_PREFERRED}") }),
        };
        g.nodes.insert(id.clone(), KgNode { id, name, class, attributes });
    }
    g.edges = edges;
    g.root = root;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> KnowledgeGraph {
        let mut g = KnowledgeGraph::new(GraphKind::Preliminary);
        g.add_node(KgNode::new("liver", "liver", "Anatomy"));
        g.add_node(KgNode::new("right-lobe", "right \"lobe\"", "Anatomy"));
        g.add_edge("right-lobe", LogicalRelation::PartOf, "liver");
        g.root = Some("liver".into());
        g
    }

    #[test]
    fn single_edge_graph() {
        let nt = to_ntriples(&tiny(), DEFAULT_NAMESPACE);
        let relation_lines = nt.lines().filter(|l| l.contains("/relation/")).count();
        assert_eq!(relation_lines, 1);
        assert_eq!(nt.lines().count(), 1 + 4 + 2);
        let mut sorted: Vec<&str> = nt.lines().collect();
        sorted.sort();
        assert_eq!(sorted, nt.lines().collect::<Vec<_>>());
    }

    #[test]
    fn round_trip() {
        let g = tiny();
        let back = from_ntriples(&to_ntriples(&g, DEFAULT_NAMESPACE), DEFAULT_NAMESPACE).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn syntax_errors_carry_line() {
        let bad = "<http://example.org/radkg/node/a> <http://example.org/radkg/attr/class> \"Anatomy\" .\nnonsense\n";
        assert!(matches!(from_ntriples(bad, DEFAULT_NAMESPACE), Err(KgError::Syntax { line: 2, .. })));
    }
}
