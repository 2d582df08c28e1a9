use std::path::PathBuf;

use proptest::prelude::*;
use radkg::annotation::FallbackAnnotator;
use radkg::extract::{Extractor, Triple, TripleRecord};
use radkg::kg::{
    augment, build_dynamic_kg, component_roots, from_ntriples, load_preliminary_kg, match_path, parse_kg_tsv,
    to_ntriples, KgEdge, KgError, KnowledgeGraph, DEFAULT_NAMESPACE,
};
use radkg::lexicon::{load_lexicon, Lexicon, SupersenseLexicon};
use radkg::ontology::{LogicalRelation, Ontology};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn lexicon() -> Lexicon {
    let dir = fixtures().join("lexicon");
    load_lexicon(&[dir.join("radlex.tsv"), dir.join("corpus_terms.tsv")]).unwrap()
}

fn graph(name: &str) -> KnowledgeGraph {
    load_preliminary_kg(&fixtures().join("kg").join(name), &Ontology::default()).unwrap()
}

fn step_one_triples() -> Vec<Triple> {
    let x = Extractor::with_defaults(lexicon());
    let senses = SupersenseLexicon::default();
    let s = FallbackAnnotator::new(&x.lexicon, &senses).annotate("s1", "A lesion of increased echotexture in the right lobe of liver.");
    x.extract_sentence(&s).unwrap()
}

fn triple(s: &str, r: LogicalRelation, o: &str, lex: &Lexicon) -> Triple {
    Triple::from_record(
        &TripleRecord {
            sentence_id: "t".into(),
            subject: s.into(),
            relation: r,
            object: o.into(),
            assertive: true,
        },
        lex,
    )
}

#[test]
fn dynamic_graph_for_step_one() {
    let o = Ontology::default();
    let d = build_dynamic_kg(&step_one_triples(), &o);
    assert_eq!(d.nodes.len(), 5);
    assert_eq!(d.edges.len(), 4);
    assert_eq!(d.root.as_deref(), Some("liver"));
    assert!(build_dynamic_kg(&[], &o).nodes.is_empty());
}

#[test]
fn forest_of_two_components() {
    let o = Ontology::default();
    let lex = lexicon();
    let d = build_dynamic_kg(
        &[
            triple("right lobe", LogicalRelation::PartOf, "liver", &lex),
            triple("hypoechoic", LogicalRelation::ModifierOf, "mass", &lex),
        ],
        &o,
    );
    let mut roots = component_roots(&d, &o);
    roots.sort();
    assert_eq!(roots, vec!["liver".to_string(), "mass".to_string()]);
}

#[test]
fn path_match_for_step_one() {
    let o = Ontology::default();
    let s = graph("liver_static.tsv");
    let d = build_dynamic_kg(&step_one_triples(), &o);
    let pm = match_path(&d, &s, &o);
    assert_eq!(pm.matched.len(), 4);
    assert_eq!(pm.matched["lesion"], "lesion");
    assert_eq!(pm.matched["echotexture"], "echotexture");
    assert_eq!(pm.unmatched, vec!["increased".to_string()]);
}

#[test]
fn augmentation_adds_one_node_and_edge_then_nothing() {
    let o = Ontology::default();
    let mut s = graph("liver_static.tsv");
    let before = s.clone();
    let d = build_dynamic_kg(&step_one_triples(), &o);
    let r = augment(&mut s, &d, "s1", &o);
    assert_eq!(r.added_nodes, vec!["echotexture/increased".to_string()]);
    assert_eq!(
        r.added_edges,
        vec![KgEdge {
            subject: "echotexture/increased".into(),
            relation: LogicalRelation::ModifierOf,
            object: "echotexture".into()
        }]
    );
    assert!(r.quarantined.is_empty());
    assert_eq!(s.nodes.len(), before.nodes.len() + 1);
    assert!(before.edges.is_subset(&s.edges));
    let again = augment(&mut s, &d, "s1", &o);
    assert!(again.is_noop());
    s.validate(&o).unwrap();
}

#[test]
fn same_named_instances_follow_the_path() {
    let o = Ontology::default();
    let lex = lexicon();
    let mut s = graph("liver_preliminary.tsv");
    let d = build_dynamic_kg(
        &[
            triple("echogenicity", LogicalRelation::DefaultPropertyOf, "chronic liver disease", &lex),
            triple("coarse", LogicalRelation::ModifierOf, "echogenicity", &lex),
            triple("chronic liver disease", LogicalRelation::FoundIn, "liver", &lex),
        ],
        &o,
    );
    let pm = match_path(&d, &s, &o);
    assert_eq!(pm.matched["echogenicity"], "echogenicity.chronic-liver-disease");
    let r = augment(&mut s, &d, "t", &o);
    assert_eq!(r.added_nodes, vec!["echogenicity.chronic-liver-disease/coarse".to_string()]);
}

#[test]
fn unanchored_and_ambiguous_edges_are_quarantined() {
    let o = Ontology::default();
    let lex = lexicon();
    let mut s = graph("liver_preliminary.tsv");
    let before = s.clone();
    // nothing here names a liver structure
    let d = build_dynamic_kg(&[triple("hypoechoic", LogicalRelation::ModifierOf, "mass", &lex)], &o);
    let r = augment(&mut s, &d, "q1", &o);
    assert!(r.is_noop());
    assert_eq!(r.quarantined.len(), 1);
    assert_eq!(r.quarantined[0].reason, "no anchored endpoint");
    // two echogenicity instances and no path to tell them apart
    let d = build_dynamic_kg(&[triple("decreased", LogicalRelation::ModifierOf, "echogenicity", &lex)], &o);
    let r = augment(&mut s, &d, "q2", &o);
    assert!(r.is_noop());
    assert_eq!(r.quarantined.len(), 1);
    assert_eq!(s, {
        let mut b = before.clone();
        b.kind = s.kind;
        b
    });
}

#[test]
fn finding_named_at_organ_level_is_implied() {
    let o = Ontology::default();
    let lex = lexicon();
    let mut s = graph("liver_static.tsv");
    let d = build_dynamic_kg(
        &[
            triple("echotexture", LogicalRelation::PropertyOf, "lesion", &lex),
            triple("lesion", LogicalRelation::FoundIn, "right lobe", &lex),
            triple("right lobe", LogicalRelation::PartOf, "liver", &lex),
            triple("cyst", LogicalRelation::FoundIn, "liver", &lex),
        ],
        &o,
    );
    let r = augment(&mut s, &d, "t", &o);
    assert!(r.is_noop());
    assert_eq!(r.implied_edges.len(), 1);
    assert_eq!(r.implied_edges[0].subject, "cyst");
}

#[test]
fn location_and_defaults() {
    let o = Ontology::default();
    let liver = graph("liver_preliminary.tsv");
    let chain: Vec<&str> = liver.query_location("lesion", &[], &o).unwrap().iter().map(|n| n.name.as_str()).collect();
    assert_eq!(chain, vec!["segment vi", "right lobe", "liver"]);
    let chain: Vec<&str> = liver.query_location("cyst", &[], &o).unwrap().iter().map(|n| n.name.as_str()).collect();
    assert_eq!(chain, vec!["liver"]);
    assert!(matches!(liver.query_location("mass", &[], &o), Err(KgError::NotFound(_))));

    let pancreas = graph("pancreas.tsv");
    let mut defaults: Vec<(String, LogicalRelation, String)> = pancreas
        .query_defaults("acute pancreatitis", &[])
        .unwrap()
        .into_iter()
        .map(|(s, r, o)| (s.name.clone(), r, o.name.clone()))
        .collect();
    defaults.sort();
    let mut golden = vec![
        ("bulky".to_string(), LogicalRelation::ModifierOf, "size".to_string()),
        ("echotexture".into(), LogicalRelation::DefaultPropertyOf, "acute pancreatitis".into()),
        ("inhomogeneous".into(), LogicalRelation::ModifierOf, "echotexture".into()),
        ("peripancreatic fluid collection".into(), LogicalRelation::DefaultObservationOf, "acute pancreatitis".into()),
        ("size".into(), LogicalRelation::DefaultPropertyOf, "acute pancreatitis".into()),
    ];
    golden.sort();
    assert_eq!(defaults, golden);
    assert!(pancreas.query_defaults("pseudo cyst", &["head"]).unwrap().is_empty());
}

#[test]
fn ntriples_round_trip_for_every_fixture() {
    let o = Ontology::default();
    let lex = lexicon();
    for name in ["liver_preliminary.tsv", "liver_static.tsv", "pancreas.tsv", "kidney.tsv"] {
        let mut g = graph(name);
        g.attach_lexicon(&lex);
        let nt = to_ntriples(&g, DEFAULT_NAMESPACE);
        let back = from_ntriples(&nt, DEFAULT_NAMESPACE).unwrap();
        assert_eq!(back, g, "{name}");
        assert_eq!(to_ntriples(&back, DEFAULT_NAMESPACE), nt);
        back.validate(&o).unwrap();
    }
    let mut augmented = graph("pancreas.tsv");
    let d = build_dynamic_kg(
        &[
            triple("pseudo cyst", LogicalRelation::FoundIn, "body", &lex),
            triple("thick walled", LogicalRelation::ModifierOf, "pseudo cyst", &lex),
            triple("body", LogicalRelation::PartOf, "pancreas", &lex),
        ],
        &o,
    );
    let r = augment(&mut augmented, &d, "p", &o);
    assert_eq!(r.added_nodes, vec!["pseudo-cyst.body/thick-walled".to_string()]);
    let back = from_ntriples(&to_ntriples(&augmented, DEFAULT_NAMESPACE), DEFAULT_NAMESPACE).unwrap();
    assert_eq!(back, augmented);
}

#[test]
fn liver_preliminary_matches_golden_ntriples() {
    let g = graph("liver_preliminary.tsv");
    let path = fixtures().join("kg/liver_preliminary.nt");
    if std::env::var_os("RADKG_BLESS").is_some() {
        std::fs::write(&path, to_ntriples(&g, DEFAULT_NAMESPACE)).unwrap();
    }
    let golden = std::fs::read_to_string(&path).unwrap();
    assert_eq!(to_ntriples(&g, DEFAULT_NAMESPACE), golden);
    let from_nt = load_preliminary_kg(&fixtures().join("kg/liver_preliminary.nt"), &Ontology::default()).unwrap();
    assert_eq!(from_nt, g);
}

#[test]
fn tsv_errors() {
    let o = Ontology::default();
    assert!(matches!(
        parse_kg_tsv("#root: a\na\tPartOf\tb\tAnatomy\tAnatomy\nb\tPartOf\ta\tAnatomy\tAnatomy\n", &o),
        Err(KgError::CyclicPartOf(_))
    ));
}

const NAMES: &[&str] = &["liver", "right lobe", "left lobe", "segment vi", "lesion", "cyst", "echotexture", "size", "increased", "hypoechoic", "mass", "nodule", "calculus", "wall"];
const RELS: &[LogicalRelation] = &[
    LogicalRelation::PartOf,
    LogicalRelation::FoundIn,
    LogicalRelation::ModifierOf,
    LogicalRelation::PropertyOf,
    LogicalRelation::ObservedIn,
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn augmentation_is_monotone_and_keeps_part_of_acyclic(
        batches in prop::collection::vec(
            prop::collection::vec((0..NAMES.len(), 0..RELS.len(), 0..NAMES.len()), 1..5),
            1..6,
        )
    ) {
        let o = Ontology::default();
        let lex = lexicon();
        let mut g = graph("liver_static.tsv");
        for (i, batch) in batches.iter().enumerate() {
            let triples: Vec<Triple> = batch
                .iter()
                .filter(|(s, _, t)| s != t)
                .map(|&(s, r, t)| triple(NAMES[s], RELS[r], NAMES[t], &lex))
                .collect();
            let d = build_dynamic_kg(&triples, &o);
            let before = g.clone();
            let report = augment(&mut g, &d, &format!("r{i}"), &o);
            for (id, n) in &before.nodes {
                prop_assert_eq!(g.nodes.get(id), Some(n));
            }
            prop_assert!(before.edges.is_subset(&g.edges));
            prop_assert!(g.part_of_cycle().is_none());
            prop_assert_eq!(g.edges.len(), before.edges.len() + report.added_edges.len());
            prop_assert_eq!(g.nodes.len(), before.nodes.len() + report.added_nodes.len());
            let again = augment(&mut g, &d, "again", &o);
            prop_assert!(again.is_noop(), "second pass added {:?} {:?}", again.added_nodes, again.added_edges);
        }
    }
}


#[test]
fn grown_context_settles_within_one_call() {
    // `liver PartOf nodule` puts the new node above the root; with the
    // right lobe matched that breaks the `echotexture` tie on a later pass
    let o = Ontology::default();
    let lex = lexicon();
    let mut g = graph("liver_static.tsv");
    let d = build_dynamic_kg(
        &[
            triple("liver", LogicalRelation::PartOf, "nodule", &lex),
            triple("liver", LogicalRelation::PartOf, "right lobe", &lex),
            triple("nodule", LogicalRelation::PartOf, "echotexture", &lex),
            triple("echotexture", LogicalRelation::PartOf, "size", &lex),
        ],
        &o,
    );
    let first = augment(&mut g, &d, "a", &o);
    assert!(first.added_nodes.contains(&"echotexture/size".to_string()), "{first:?}");
    assert!(augment(&mut g, &d, "b", &o).is_noop());
}
