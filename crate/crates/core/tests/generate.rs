use std::path::PathBuf;

use radkg::eval::{lexical_cosine, parse_descriptions};
use radkg::extract::Extractor;
use radkg::generate::{
    parse_parallel_corpus, parse_templates, GenerateConfig, GenerateError, NormalReportTemplate, ParallelCorpusEntry,
    ReportGenerator, TemplateSet,
};
use radkg::kg::{load_preliminary_kg, KnowledgeGraph};
use radkg::lexicon::load_lexicon;
use radkg::ontology::Ontology;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn read(rel: &str) -> String {
    std::fs::read_to_string(fixtures().join(rel)).unwrap()
}

struct World {
    extractor: Extractor,
    ontology: Ontology,
    graphs: Vec<KnowledgeGraph>,
    templates: TemplateSet,
    corpus: Vec<ParallelCorpusEntry>,
    normal: NormalReportTemplate,
}

impl World {
    fn load() -> Self {
        let lex = fixtures().join("lexicon");
        let ontology = Ontology::default();
        let graphs = ["pancreas.tsv", "liver_preliminary.tsv", "kidney.tsv"]
            .iter()
            .map(|g| load_preliminary_kg(&fixtures().join("kg").join(g), &ontology).unwrap())
            .collect();
        World {
            extractor: Extractor::with_defaults(load_lexicon(&[lex.join("radlex.tsv"), lex.join("corpus_terms.tsv")]).unwrap()),
            ontology,
            graphs,
            templates: parse_templates(&read("generate/description_templates.tsv")).unwrap(),
            corpus: parse_parallel_corpus(&read("generate/parallel_corpus.tsv")).unwrap(),
            normal: NormalReportTemplate::parse(&read("generate/abdomen_normal.txt")),
        }
    }

    fn generator(&self) -> ReportGenerator<'_> {
        ReportGenerator {
            extractor: &self.extractor,
            ontology: &self.ontology,
            graphs: &self.graphs,
            templates: &self.templates,
            corpus: &self.corpus,
            normal: &self.normal,
            config: GenerateConfig::default(),
        }
    }
}

const PANCREATITIS: &str = "Pancreas shows bulky size and inhomogeneous echotexture associated with peripancreatic fluid collection, suggestive of acute pancreatitis.";
const PSEUDO_CYST: &str = "There is evidence of pancreatic thick walled pseudo cyst measuring 1.4 x 3 x 2.2 cm vol 4.83 cc noted in the head of pancreas.";

#[test]
fn pancreatitis_description_and_report() {
    let w = World::load();
    let g = w.generator();
    let (_, d) = g.describe("d", "Acute pancreatitis").unwrap();
    assert_eq!(d.text, PANCREATITIS);
    assert_eq!(d.organ.as_deref(), Some("pancreas"));
    let r = g.generate_report(&["Acute pancreatitis".to_string()]).unwrap();
    assert!(r.report.contains(PANCREATITIS));
    assert!(!r.report.contains("Pancreas is normal in size and echotexture."));
    assert_eq!(r.items[0].matched_dictation, "Acute pancreatitis");
    assert_eq!(r.items[0].match_score, 1.0);
}

#[test]
fn pseudo_cyst_keeps_measurements() {
    let w = World::load();
    let g = w.generator();
    let dictation = "Pancreatic thick walled pseudo cyst measuring 1.4 x 3 x 2.2 cm vol 4.83 cc in head.";
    let (d, desc) = g.describe("d", dictation).unwrap();
    assert_eq!(desc.text, PSEUDO_CYST);
    for m in &d.measurements {
        assert!(desc.text.contains(m.as_str()));
    }
    let r = g.generate_report(&[dictation.to_string()]).unwrap();
    assert_eq!(r.items[0].matched_dictation, "Pancreatic thick walled pseudo cyst in head.");
    // the pancreas copy of the duplicated sentence, not the liver one
    assert_eq!(r.items[0].replaced_line, 11);
}

#[test]
fn two_dictations_match_expected_report() {
    let w = World::load();
    let r = w
        .generator()
        .generate_report(&[
            "Acute pancreatitis".to_string(),
            "Pancreatic thick walled pseudo cyst measuring 1.4 x 3 x 2.2 cm vol 4.83 cc in head.".to_string(),
        ])
        .unwrap();
    assert_eq!(r.report, read("generate/expected_report.txt"));
}

#[test]
fn unreplaced_lines_are_untouched() {
    let w = World::load();
    let r = w.generator().generate_report(&[]).unwrap();
    assert_eq!(r.report, w.normal.render());
}

#[test]
fn head_and_tail_share_one_line() {
    let w = World::load();
    let r = w
        .generator()
        .generate_report(&["Pancreatic thick walled pseudo cyst in head. Pancreatic thick walled pseudo cyst in tail.".to_string()])
        .unwrap();
    assert_eq!(r.items.len(), 2);
    assert_eq!(r.items[0].replaced_line, r.items[1].replaced_line);
    let line = r.report.lines().nth(11).unwrap();
    assert_eq!(
        line,
        "There is evidence of pancreatic thick walled pseudo cyst noted in the head of pancreas. \
         There is evidence of pancreatic thick walled pseudo cyst noted in the tail of pancreas."
    );
    assert_eq!(r.report.matches("No evidence of focal or diffuse lesion is seen.").count(), 1);
}

#[test]
fn unmatched_dictation_is_below_threshold() {
    let w = World::load();
    let err = w.generator().generate_report(&["Ankle fracture".to_string()]).unwrap_err();
    assert!(matches!(err, GenerateError::BelowThreshold { .. }), "{err}");
}

#[test]
fn fixture_descriptions_against_gold() {
    let w = World::load();
    let g = w.generator();
    let gold = parse_descriptions(&read("generate/gold_descriptions.tsv")).unwrap();
    for (id, text) in parse_descriptions(&read("generate/dictations.tsv")).unwrap() {
        let (_, d) = g.describe(&id, &text).unwrap();
        let reference = &gold.iter().find(|(g, _)| *g == id).unwrap().1;
        let c = lexical_cosine(&d.text, reference);
        assert!(c >= 0.85, "{id}: {c:.3}\n  system: {}\n  gold:   {reference}", d.text);
    }
}

#[test]
fn generation_is_deterministic() {
    let w = World::load();
    let g = w.generator();
    let dictations: Vec<String> = parse_descriptions(&read("generate/dictations.tsv"))
        .unwrap()
        .into_iter()
        .map(|(_, t)| t)
        .collect();
    let a: Vec<String> = dictations.iter().map(|d| g.describe("x", d).unwrap().1.text).collect();
    let b: Vec<String> = dictations.iter().map(|d| g.describe("x", d).unwrap().1.text).collect();
    assert_eq!(a, b);
}
