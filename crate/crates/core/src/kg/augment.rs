use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{slug, GraphKind, KgEdge, KgError, KgNode, KnowledgeGraph};
use crate::extract::Triple;
use crate::ontology::{CoarseCategory, LogicalRelation, Ontology};

fn entity_class(e: &crate::extract::Entity, ontology: &Ontology) -> String {
    e.fine_tag
        .as_deref()
        .filter(|t| ontology.coarse(t) == Some(e.category))
        .and_then(|t| ontology.canonical(t))
        .unwrap_or(e.category.as_str())
        .to_string()
}

/// One node per distinct entity text and one edge per triple. The root is
/// the single Anatomy node without an outgoing PartOf edge, else the first
/// node without outgoing edges.
pub fn build_dynamic_kg(triples: &[Triple], ontology: &Ontology) -> KnowledgeGraph {
    let mut g = KnowledgeGraph::new(GraphKind::Dynamic);
    for t in triples {
        for e in [&t.subject, &t.object] {
            let id = slug(&e.text);
            if !g.nodes.contains_key(&id) {
                g.add_node(KgNode::new(&id, &e.text, &entity_class(e, ontology)));
            }
        }
        g.add_edge(&slug(&t.subject.text), t.relation, &slug(&t.object.text));
    }
    g.root = component_roots(&g, ontology).into_iter().next();
    g
}

/// Root of each connected component, components ordered by their smallest
/// node id. Per component: the single Anatomy node without an outgoing
/// PartOf edge, else the first node without outgoing edges, else the first.
pub fn component_roots(g: &KnowledgeGraph, ontology: &Ontology) -> Vec<String> {
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut roots = Vec::new();
    for id in g.nodes.keys() {
        if seen.contains(id) {
            continue;
        }
        let comp = g.undirected_component(id);
        seen.extend(comp.iter().cloned());
        let anatomy_tops: Vec<&String> = comp
            .iter()
            .filter(|n| ontology.coarse(&g.nodes[*n].class) == Some(CoarseCategory::Anatomy))
            .filter(|n| !g.outgoing(n).any(|e| e.relation == LogicalRelation::PartOf))
            .collect();
        let root = match anatomy_tops.as_slice() {
            [one] => (*one).clone(),
            _ => comp
                .iter()
                .find(|n| g.outgoing(n).next().is_none())
                .unwrap_or(id)
                .clone(),
        };
        roots.push(root);
    }
    roots
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathMatch {
    /// dynamic node id -> static node id
    pub matched: BTreeMap<String, String>,
    pub unmatched: Vec<String>,
    /// Nodes with several equally plausible static instances.
    pub ambiguous: Vec<String>,
}

fn dyn_neighbours(d: &KnowledgeGraph, id: &str) -> Vec<(String, LogicalRelation, bool)> {
    // (neighbour, relation, true when `id` is the subject)
    d.edges
        .iter()
        .filter_map(|e| {
            if e.subject == id {
                Some((e.object.clone(), e.relation, true))
            } else if e.object == id {
                Some((e.subject.clone(), e.relation, false))
            } else {
                None
            }
        })
        .collect()
}

/// Matches dynamic nodes to static ones by name (synonym-aware) and path.
///
/// Anatomy nodes seed the match: the organ root, or a name with a single
/// static instance. Other nodes are matched through already-matched
/// neighbours: a candidate must be adjacent to, or an ancestor/descendant
/// of, every matched neighbour's static node. Adjacency with the same
/// relation scores highest, then the number of matched nodes on the
/// candidate's path. A tie, or several candidates none of which fit the
/// path, is ambiguous and never guessed.
pub fn match_path(dynamic: &KnowledgeGraph, static_kg: &KnowledgeGraph, ontology: &Ontology) -> PathMatch {
    let cands: BTreeMap<&str, Vec<&str>> = dynamic
        .nodes
        .values()
        .map(|n| (n.id.as_str(), static_kg.find_by_name(&n.name)))
        .collect();
    let mut matched: BTreeMap<String, String> = BTreeMap::new();

    for n in dynamic.nodes.values() {
        if ontology.coarse(&n.class) != Some(CoarseCategory::Anatomy) {
            continue;
        }
        let c = &cands[n.id.as_str()];
        if let Some(root) = static_kg.root.as_deref().filter(|r| c.contains(r)) {
            matched.insert(n.id.clone(), root.to_string());
        } else if c.len() == 1 {
            matched.insert(n.id.clone(), c[0].to_string());
        }
    }

    // ancestors and descendants of each candidate
    let mut lineage_cache: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut lineage = |id: &str| -> BTreeSet<String> {
        lineage_cache
            .entry(id.to_string())
            .or_insert_with(|| {
                let mut s = static_kg.ancestors(id);
                s.extend(static_kg.descendants(id));
                s
            })
            .clone()
    };

    loop {
        let mut progress = false;
        for n in dynamic.nodes.values() {
            if matched.contains_key(&n.id) {
                continue;
            }
            let neighbours: Vec<(String, LogicalRelation, bool)> = dyn_neighbours(dynamic, &n.id)
                .into_iter()
                .filter(|(m, _, _)| matched.contains_key(m))
                .collect();
            if neighbours.is_empty() {
                continue;
            }
            let taken: BTreeSet<&String> = matched.values().collect();
            let mut scored: Vec<((usize, usize), &str)> = Vec::new();
            for &c in &cands[n.id.as_str()] {
                if taken.contains(&c.to_string()) {
                    continue;
                }
                let related = lineage(c);
                let mut adj = 0;
                let mut consistent = true;
                for (m, rel, is_subject) in &neighbours {
                    let sm = &matched[m];
                    let edge_ok = if *is_subject {
                        static_kg.has_edge(c, *rel, sm)
                    } else {
                        static_kg.has_edge(sm, *rel, c)
                    };
                    if edge_ok {
                        adj += 2;
                    } else if related.contains(sm) {
                        adj += 1;
                    } else {
                        consistent = false;
                    }
                }
                if consistent {
                    let overlap = matched.values().filter(|s| related.contains(*s)).count();
                    scored.push(((adj, overlap), c));
                }
            }
            scored.sort_by_key(|s| std::cmp::Reverse(s.0));
            let unique_best = match scored.as_slice() {
                [only] => Some(only.1),
                [first, second, ..] if first.0 > second.0 => Some(first.1),
                _ => None,
            };
            if let Some(best) = unique_best {
                matched.insert(n.id.clone(), best.to_string());
                progress = true;
            }
        }
        if !progress {
            break;
        }
    }

    let mut out = PathMatch {
        matched,
        ..PathMatch::default()
    };
    for n in dynamic.nodes.values() {
        if out.matched.contains_key(&n.id) {
            continue;
        }
        if cands[n.id.as_str()].len() >= 2 {
            out.ambiguous.push(n.id.clone());
        } else {
            out.unmatched.push(n.id.clone());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuarantinedEdge {
    pub sentence_id: String,
    pub subject: String,
    pub relation: LogicalRelation,
    pub object: String,
    pub subject_class: String,
    pub object_class: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentationReport {
    pub added_nodes: Vec<String>,
    pub added_edges: Vec<KgEdge>,
    /// Dynamic edges already implied by a longer static path (the object
    /// is an ancestor of the subject), so nothing was added.
    pub implied_edges: Vec<KgEdge>,
    pub quarantined: Vec<QuarantinedEdge>,
    pub skipped_non_assertive: usize,
}

impl AugmentationReport {
    pub fn merge(&mut self, other: AugmentationReport) {
        self.added_nodes.extend(other.added_nodes);
        self.added_edges.extend(other.added_edges);
        self.implied_edges.extend(other.implied_edges);
        self.quarantined.extend(other.quarantined);
        self.skipped_non_assertive += other.skipped_non_assertive;
    }

    pub fn is_noop(&self) -> bool {
        self.added_nodes.is_empty() && self.added_edges.is_empty()
    }
}

/// Adds the dynamic graph's missing edges to the static graph. Edges with
/// both ends matched are added unless present or implied; an edge with one
/// matched end grows a new node under that anchor; edges with no anchored
/// end, an ambiguous end, or that would close a cycle are quarantined.
/// Never removes or changes existing nodes and edges.
///
/// Nodes grown in one pass can resolve matches that were ambiguous before,
/// so passes repeat until the graph stops changing. Added nodes and edges
/// accumulate; implied and quarantined edges come from the settled pass.
pub fn augment(
    static_kg: &mut KnowledgeGraph,
    dynamic: &KnowledgeGraph,
    sentence_id: &str,
    ontology: &Ontology,
) -> AugmentationReport {
    let mut added_nodes = Vec::new();
    let mut added_edges = Vec::new();
    // a safeguard; one or two passes settle in practice
    let max_passes = dynamic.nodes.len() + 2;
    for pass_no in 1.. {
        let mut pass = augment_once(static_kg, dynamic, sentence_id, ontology);
        let settled = pass.is_noop();
        added_nodes.append(&mut pass.added_nodes);
        added_edges.append(&mut pass.added_edges);
        if settled || pass_no == max_passes {
            if !settled {
                log::warn!("sentence {sentence_id}: augmentation did not settle in {max_passes} passes");
            }
            pass.added_nodes = added_nodes;
            pass.added_edges = added_edges;
            return pass;
        }
    }
    unreachable!()
}

fn augment_once(
    static_kg: &mut KnowledgeGraph,
    dynamic: &KnowledgeGraph,
    sentence_id: &str,
    ontology: &Ontology,
) -> AugmentationReport {
    let pm = match_path(dynamic, static_kg, ontology);
    let mut m = pm.matched.clone();
    let ambiguous: BTreeSet<&String> = pm.ambiguous.iter().collect();
    let mut report = AugmentationReport::default();
    let quarantine = |e: &KgEdge, reason: &str| QuarantinedEdge {
        sentence_id: sentence_id.to_string(),
        subject: dynamic.nodes[&e.subject].name.clone(),
        relation: e.relation,
        object: dynamic.nodes[&e.object].name.clone(),
        subject_class: dynamic.nodes[&e.subject].class.clone(),
        object_class: dynamic.nodes[&e.object].class.clone(),
        reason: reason.to_string(),
    };

    let mut pending: Vec<&KgEdge> = Vec::new();
    for e in &dynamic.edges {
        if ambiguous.contains(&e.subject) || ambiguous.contains(&e.object) {
            report.quarantined.push(quarantine(e, "ambiguous endpoint"));
        } else {
            pending.push(e);
        }
    }

    // A fresh node is named under its parent, so edges that hang a fresh
    // child off a matched parent go first; a fresh parent is only grown
    // from a matched child when nothing else moves.
    let mut upward = false;
    loop {
        let mut progress = false;
        let mut rest = Vec::new();
        for e in pending {
            let (ms, mo) = (m.get(&e.subject).cloned(), m.get(&e.object).cloned());
            if !upward && ms.is_some() && mo.is_none() {
                rest.push(e);
                continue;
            }
            match (ms, mo) {
                (Some(s), Some(o)) => {
                    progress = true;
                    let edge = KgEdge { subject: s.clone(), relation: e.relation, object: o.clone() };
                    if static_kg.has_edge(&s, e.relation, &o) {
                        continue;
                    }
                    if static_kg.ancestors(&s).contains(&o) {
                        report.implied_edges.push(edge);
                    } else if s == o || static_kg.ancestors(&o).contains(&s) || (e.relation == LogicalRelation::PartOf && static_kg.would_cycle(&s, &o)) {
                        report.quarantined.push(quarantine(e, "would close a cycle"));
                    } else {
                        static_kg.add_edge(&s, e.relation, &o);
                        report.added_edges.push(edge);
                    }
                }
                (Some(anchor), None) | (None, Some(anchor)) => {
                    progress = true;
                    let fresh = if m.contains_key(&e.subject) { &e.object } else { &e.subject };
                    let dn = &dynamic.nodes[fresh];
                    let id = format!("{anchor}/{}", slug(&dn.name));
                    if !static_kg.nodes.contains_key(&id) {
                        let mut node = KgNode::new(&id, &dn.name, &dn.class);
                        for (k, v) in &dn.attributes {
                            node.attributes.entry(k.clone()).or_default().extend(v.iter().cloned());
                        }
                        static_kg.add_node(node);
                        report.added_nodes.push(id.clone());
                    }
                    m.insert(fresh.clone(), id);
                    rest.push(e);
                }
                (None, None) => rest.push(e),
            }
        }
        pending = rest;
        if progress {
            upward = false;
        } else if !upward {
            upward = true;
        } else {
            break;
        }
    }
    for e in pending {
        report.quarantined.push(quarantine(e, "no anchored endpoint"));
    }
    static_kg.kind = GraphKind::Augmented;
    report
}

/// Augments organ graphs sentence by sentence. Each sentence goes to the
/// graph whose organ it names, else the one with the most matched nodes;
/// when no graph matches anything, or two tie, the sentence's edges are
/// quarantined. Non-assertive triples are skipped.
pub fn augment_corpus(graphs: &mut [KnowledgeGraph], triples: &[Triple], ontology: &Ontology) -> AugmentationReport {
    let mut report = AugmentationReport::default();
    let mut order: Vec<&str> = Vec::new();
    let mut by_sentence: BTreeMap<&str, Vec<Triple>> = BTreeMap::new();
    for t in triples {
        if !t.assertive {
            report.skipped_non_assertive += 1;
            continue;
        }
        if !by_sentence.contains_key(t.sentence_id.as_str()) {
            order.push(&t.sentence_id);
        }
        by_sentence.entry(&t.sentence_id).or_default().push(t.clone());
    }
    for sid in order {
        let dynamic = build_dynamic_kg(&by_sentence[sid], ontology);
        let scores: Vec<(bool, usize)> = graphs
            .iter()
            .map(|g| {
                let pm = match_path(&dynamic, g, ontology);
                let names_root = g.root.as_ref().is_some_and(|r| pm.matched.values().any(|v| v == r));
                (names_root, pm.matched.len())
            })
            .collect();
        let best = scores.iter().copied().max().filter(|s| s.1 > 0);
        let winners: Vec<usize> = (0..graphs.len()).filter(|&i| Some(scores[i]) == best).collect();
        match winners.as_slice() {
            [i] => report.merge(augment(&mut graphs[*i], &dynamic, sid, ontology)),
            _ => {
                let reason = if winners.is_empty() { "no organ graph matched" } else { "several organ graphs matched" };
                for e in &dynamic.edges {
                    report.quarantined.push(QuarantinedEdge {
                        sentence_id: sid.to_string(),
                        subject: dynamic.nodes[&e.subject].name.clone(),
                        relation: e.relation,
                        object: dynamic.nodes[&e.object].name.clone(),
                        subject_class: dynamic.nodes[&e.subject].class.clone(),
                        object_class: dynamic.nodes[&e.object].class.clone(),
                        reason: reason.to_string(),
                    });
                }
            }
        }
    }
    report
}

/// `subject<TAB>relation<TAB>object<TAB>subject_class<TAB>object_class<TAB>sentence_id`
pub fn serialize_quarantine(edges: &[QuarantinedEdge]) -> String {
    let mut out = String::new();
    for q in edges {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            q.subject, q.relation, q.object, q.subject_class, q.object_class, q.sentence_id
        ));
    }
    out
}

pub fn parse_quarantine(text: &str) -> Result<Vec<QuarantinedEdge>, KgError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |reason: String| KgError::Syntax { line: n + 1, reason };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 6 {
            return Err(err(format!("expected 6 columns, found {}", cols.len())));
        }
        out.push(QuarantinedEdge {
            subject: cols[0].to_string(),
            relation: cols[1].parse().map_err(|e: crate::ontology::UnknownName| err(e.to_string()))?,
            object: cols[2].to_string(),
            subject_class: cols[3].to_string(),
            object_class: cols[4].to_string(),
            sentence_id: cols[5].to_string(),
            reason: String::new(),
        });
    }
    Ok(out)
}
