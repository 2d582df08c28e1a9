use std::collections::{BTreeMap, BTreeSet};

use crate::annotation::{AnnotatedSentence, ChunkedSentence, NodeKind, Pos, Token};
use crate::lexicon::{Lexicon, SupersenseLexicon};
use crate::ontology::{CoarseCategory, LogicalRelation};

use super::patterns::{category_relation, CategoryPattern, ChunkPattern};
use super::{Entity, Triple};

pub const SUBJECT_LABELS: &[&str] = &["nsubj", "nsubjpass"];
pub const OBJECT_LABELS: &[&str] = &["pobj", "dobj", "attr"];

fn inferred(pos: &Pos) -> CoarseCategory {
    if *pos == Pos::Adj {
        CoarseCategory::Modifier
    } else {
        CoarseCategory::Observation
    }
}

fn entity_over(s: &AnnotatedSentence, span: std::ops::Range<usize>, root: usize, lexicon: &Lexicon) -> Entity {
    let surface = span
        .clone()
        .map(|i| s.tokens[i].text.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ");
    let head = if span.contains(&root) { root } else { span.end - 1 };
    let pos = s.tokens[head].pos.clone();
    match lexicon.lookup(&surface) {
        Some(e) => Entity {
            text: e.preferred_name.clone(),
            category: e.category,
            chunk_root: span.contains(&root),
            span,
            from_lexicon: true,
            fine_tag: e.fine_tag.clone(),
            pos,
        },
        None => Entity {
            text: surface,
            category: inferred(&pos),
            chunk_root: span.contains(&root),
            span,
            from_lexicon: false,
            fine_tag: None,
            pos,
        },
    }
}

/// Entities inside one chunk node, left to right: dictionary matches first
/// (longest span wins), then leftover content words one by one. The chunk
/// root token always ends up inside exactly one entity.
pub fn chunk_entities(sentence: &ChunkedSentence, node: usize, lexicon: &Lexicon) -> Vec<Entity> {
    let s = &sentence.sentence;
    let n = &sentence.nodes[node];
    let span = n.tokens();
    let root = n.rep;
    let lower: Vec<String> = span.clone().map(|i| s.tokens[i].text.to_lowercase()).collect();
    let matches = lexicon.longest_match(&lower);
    let mut out = Vec::new();
    let mut i = span.start;
    let mut m = matches.iter().peekable();
    while i < span.end {
        if let Some((r, _)) = m.peek().filter(|(r, _)| r.start + span.start == i) {
            let abs = r.start + span.start..r.end + span.start;
            i = abs.end;
            out.push(entity_over(s, abs, root, lexicon));
            m.next();
            continue;
        }
        let content = matches!(s.tokens[i].pos, Pos::Adj | Pos::Noun | Pos::Propn);
        if content || i == root {
            out.push(entity_over(s, i..i + 1, root, lexicon));
        }
        i += 1;
    }
    out
}

/// The entity a node contributes to inter-phrase relations: a chunk's root
/// entity, or a bare nominal or adjective token.
pub fn node_entity(sentence: &ChunkedSentence, node: usize, lexicon: &Lexicon) -> Option<Entity> {
    let n = &sentence.nodes[node];
    match n.kind {
        NodeKind::Chunk(_) => chunk_entities(sentence, node, lexicon).into_iter().find(|e| e.chunk_root),
        NodeKind::Token(t) => {
            let pos = &sentence.sentence.tokens[t].pos;
            (pos.is_nominal() || *pos == Pos::Adj).then(|| entity_over(&sentence.sentence, t..t + 1, t, lexicon))
        }
    }
}

/// Relations between a chunk's non-root entities and its root. For each
/// entity the first matching pattern of the most specific tier applies.
pub fn extract_intra_chunk(
    sentence: &ChunkedSentence,
    node: usize,
    lexicon: &Lexicon,
    patterns: &[ChunkPattern],
) -> Vec<Triple> {
    let entities = chunk_entities(sentence, node, lexicon);
    let Some(root) = entities.iter().find(|e| e.chunk_root).cloned() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for e in entities.iter().filter(|e| !e.chunk_root) {
        let hit = (0..=2).find_map(|tier| {
            patterns
                .iter()
                .filter(|p| p.tier() == tier)
                .find_map(|p| p.apply(e, &root).map(|root_first| (p.relation, root_first)))
        });
        if let Some((rel, root_first)) = hit {
            out.push(if root_first {
                Triple::new(root.clone(), rel, e.clone())
            } else {
                Triple::new(e.clone(), rel, root.clone())
            });
        }
    }
    out
}

fn is_locus_subject(c: CoarseCategory) -> bool {
    matches!(c, CoarseCategory::Finding | CoarseCategory::Observation)
}

/// Maps the preposition's supersense to a relation and orients it. The
/// relation must also suit the categories: PartOf joins two anatomy
/// entities, FoundIn/ObservedIn put a finding or observation in an anatomy
/// entity, and PropertyOf has the property as subject.
/// The returned triple has no sentence id yet.
pub fn relation_from_preposition(
    left: &Entity,
    prep: &Token,
    right: &Entity,
    senses: &SupersenseLexicon,
) -> Option<Triple> {
    let sense = match &prep.supersense {
        Some(s) => s.as_str(),
        None => senses.default_sense(&prep.lemma).or_else(|| senses.default_sense(&prep.text))?,
    };
    let rel = senses.map_supersense(sense)?;
    use CoarseCategory::*;
    let (subject, object) = match rel {
        LogicalRelation::PartOf => (left.category == Anatomy && right.category == Anatomy).then_some((left, right))?,
        LogicalRelation::FoundIn | LogicalRelation::ObservedIn => {
            (is_locus_subject(left.category) && right.category == Anatomy).then_some((left, right))?
        }
        LogicalRelation::PropertyOf => {
            if left.category == Property {
                (left, right)
            } else if right.category == Property {
                (right, left)
            } else {
                return None;
            }
        }
        _ => (left, right),
    };
    Some(Triple::new(subject.clone(), rel, object.clone()))
}

/// A triple that remembers which nodes its entities came from.
#[derive(Debug, Clone)]
pub struct NodeTriple {
    pub triple: Triple,
    pub subject_node: usize,
    pub object_node: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Traversal {
    pub triples: Vec<NodeTriple>,
    /// Number of leaf-to-root walks performed.
    pub walks: usize,
}

fn pattern_pair(
    a: (usize, &Entity),
    b: (usize, &Entity),
    patterns: &[CategoryPattern],
) -> Option<NodeTriple> {
    if let Some(rel) = category_relation(patterns, a.1.category, b.1.category) {
        return Some(NodeTriple {
            triple: Triple::new(a.1.clone(), rel, b.1.clone()),
            subject_node: a.0,
            object_node: b.0,
        });
    }
    category_relation(patterns, b.1.category, a.1.category).map(|rel| NodeTriple {
        triple: Triple::new(b.1.clone(), rel, a.1.clone()),
        subject_node: b.0,
        object_node: a.0,
    })
}

fn is_verb(s: &ChunkedSentence, node: usize) -> bool {
    s.sentence.tokens[s.nodes[node].rep].pos == Pos::Verb
}

fn is_adp(s: &ChunkedSentence, node: usize) -> bool {
    s.sentence.tokens[s.nodes[node].rep].pos == Pos::Adp
}

fn governing_verb(s: &ChunkedSentence, node: usize) -> Option<usize> {
    s.path_to_root(node).into_iter().skip(1).find(|&n| is_verb(s, n))
}

/// Walks from every leaf to the root. Objects and prepositions seen on the
/// way are stacked; meeting a phrase while both stacks hold something links
/// the phrase to the popped object through the popped preposition. Verbs
/// reset the stacks. Subjects and objects are also recorded per verb and,
/// once every walk is done, paired with the category patterns.
pub fn traverse_dependency(
    sentence: &ChunkedSentence,
    lexicon: &Lexicon,
    senses: &SupersenseLexicon,
    patterns: &[CategoryPattern],
) -> Traversal {
    let entities: Vec<Option<Entity>> = (0..sentence.nodes.len())
        .map(|n| node_entity(sentence, n, lexicon).filter(|_| sentence.nodes[n].is_chunk() || is_nominal_node(sentence, n)))
        .collect();
    let mut subjects: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    let mut objects: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    let mut out = Traversal::default();

    for leaf in sentence.leaves() {
        out.walks += 1;
        let mut object_stack: Vec<usize> = Vec::new();
        let mut prep_stack: Vec<usize> = Vec::new();
        for node in sentence.path_to_root(leaf) {
            if is_verb(sentence, node) {
                object_stack.clear();
                prep_stack.clear();
                continue;
            }
            if is_adp(sentence, node) {
                prep_stack.push(node);
                continue;
            }
            let Some(entity) = &entities[node] else { continue };
            if let (Some(&o), Some(&p)) = (object_stack.last(), prep_stack.last()) {
                object_stack.pop();
                prep_stack.pop();
                let other = entities[o].as_ref().expect("only entity nodes are stacked");
                let prep = &sentence.sentence.tokens[sentence.nodes[p].rep];
                let linked = relation_from_preposition(entity, prep, other, senses)
                    .map(|t| {
                        let subject_node = if t.subject.span == entity.span { node } else { o };
                        let object_node = if subject_node == node { o } else { node };
                        NodeTriple { triple: t, subject_node, object_node }
                    })
                    .or_else(|| pattern_pair((node, entity), (o, other), patterns));
                out.triples.extend(linked);
            }
            let label = sentence.nodes[node].dep_label.as_str();
            if SUBJECT_LABELS.contains(&label) {
                if let Some(v) = governing_verb(sentence, node) {
                    subjects.entry(v).or_default().insert(node);
                }
            }
            if OBJECT_LABELS.contains(&label) {
                object_stack.push(node);
                if let Some(v) = object_verb(sentence, node) {
                    objects.entry(v).or_default().insert(node);
                }
            }
        }
    }

    let verbs: BTreeSet<usize> = subjects.keys().chain(objects.keys()).copied().collect();
    for v in &verbs {
        for &s in subjects.get(v).into_iter().flatten() {
            for &o in objects.get(v).into_iter().flatten() {
                if s == o {
                    continue;
                }
                let (Some(se), Some(oe)) = (&entities[s], &entities[o]) else { continue };
                out.triples.extend(pattern_pair((s, se), (o, oe), patterns));
            }
        }
    }

    // bare adjectives completing a verb modify its objects, else its subjects
    for node in 0..sentence.nodes.len() {
        let n = &sentence.nodes[node];
        if n.dep_label != "acomp" || n.is_chunk() {
            continue;
        }
        let Some(v) = n.head.filter(|&h| is_verb(sentence, h)) else { continue };
        let Some(adj) = node_entity(sentence, node, lexicon).filter(|e| e.pos == Pos::Adj) else { continue };
        let targets = objects.get(&v).filter(|o| !o.is_empty()).or_else(|| subjects.get(&v));
        for &t in targets.into_iter().flatten() {
            if let Some(te) = &entities[t] {
                out.triples.push(NodeTriple {
                    triple: Triple::new(adj.clone(), LogicalRelation::ModifierOf, te.clone()),
                    subject_node: node,
                    object_node: t,
                });
            }
        }
    }
    out
}

fn is_nominal_node(s: &ChunkedSentence, node: usize) -> bool {
    s.sentence.tokens[s.nodes[node].rep].pos.is_nominal()
}

/// Verb an object belongs to: the head of a dobj/attr, or the head of the
/// preposition governing a pobj.
fn object_verb(s: &ChunkedSentence, node: usize) -> Option<usize> {
    let head = s.nodes[node].head?;
    if is_verb(s, head) && s.nodes[node].dep_label != "pobj" {
        return Some(head);
    }
    if s.nodes[node].dep_label == "pobj" && is_adp(s, head) {
        return s.nodes[head].head.filter(|&v| is_verb(s, v));
    }
    None
}

fn conjuncts(sentence: &ChunkedSentence, node: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut stack = vec![node];
    while let Some(n) = stack.pop() {
        for c in sentence.children(n) {
            if sentence.nodes[c].dep_label == "conj" && !out.contains(&c) && !is_verb(sentence, c) {
                out.push(c);
                stack.push(c);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Copies each triple onto every conjunct of its subject and object nodes.
pub fn distribute_coordination(triples: Vec<NodeTriple>, sentence: &ChunkedSentence, lexicon: &Lexicon) -> Vec<NodeTriple> {
    let mut out = Vec::new();
    for t in triples {
        let side = |node: usize, e: &Entity| {
            let mut v = vec![(node, e.clone())];
            for c in conjuncts(sentence, node) {
                if let Some(ce) = node_entity(sentence, c, lexicon) {
                    v.push((c, ce));
                }
            }
            v
        };
        let subjects = side(t.subject_node, &t.triple.subject);
        let objects = side(t.object_node, &t.triple.object);
        for (sn, se) in &subjects {
            for (on, oe) in &objects {
                let mut triple = t.triple.clone();
                triple.subject = se.clone();
                triple.object = oe.clone();
                out.push(NodeTriple {
                    triple,
                    subject_node: *sn,
                    object_node: *on,
                });
            }
        }
    }
    out
}
