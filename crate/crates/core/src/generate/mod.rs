//! Pathological description generation and patient report assembly.
//!
//! A dictation is run through the extractor. Its finding is looked up in the
//! organ graph, which supplies location and default properties.
//! Patient-specific details from the dictation (modifiers, anatomy,
//! measurements) take precedence over graph defaults. The description then
//! replaces the matching sentence of the normal report template.

mod report;
mod template;

use std::collections::BTreeMap;
use std::ops::Range;

use serde::Serialize;

pub use report::{
    assemble_report, locate_normal_sentence, match_dictation, parse_parallel_corpus, NormalReportTemplate,
    ParallelCorpusEntry, TemplateLine,
};
pub use template::{parse_templates, template_key, DescriptionTemplate, TemplateSet, SLOTS};

use crate::annotation::{AnnotatedSentence, FallbackAnnotator};
use crate::eval::BleuConfig;
use crate::extract::{ExtractError, Extractor, Triple};
use crate::kg::KnowledgeGraph;
use crate::lexicon::{Lexicon, LexiconEntry};
use crate::ontology::{CoarseCategory, LogicalRelation, Ontology};
use crate::preprocess::split_sentences;
use crate::text;

#[derive(Debug, thiserror::Error)]
pub enum GenerateError {
    #[error("no description template for finding type `{0}`")]
    NoTemplate(String),
    #[error("template slot `{0}` cannot be filled from the dictation or the graph")]
    MissingRequiredSlot(String),
    #[error("no finding or observation in dictation `{0}`")]
    NoFinding(String),
    #[error("best match scores {score:.3}, below the threshold, for `{text}`")]
    BelowThreshold { score: f64, text: String },
    #[error("replacement index {0} is outside the template")]
    BadIndex(usize),
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Kg(#[from] crate::kg::KgError),
}

const MAX_FINDING_PREFIX: usize = 4;

/// Properties listed in this order first, the rest alphabetically.
pub const PROPERTY_ORDER: &[&str] = &[
    "size", "shape", "contour", "outline", "margins", "wall", "echotexture", "echogenicity", "location",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dictation {
    pub text: String,
    pub tokens: Vec<String>,
    pub triples: Vec<Triple>,
    pub measurements: Vec<String>,
}

impl Dictation {
    pub fn from_text(id: &str, text: &str, extractor: &Extractor) -> Result<Self, GenerateError> {
        let sentence = FallbackAnnotator::new(&extractor.lexicon, &extractor.senses).annotate(id, text);
        Self::from_sentence(text, &sentence, extractor)
    }

    pub fn from_sentence(text: &str, sentence: &AnnotatedSentence, extractor: &Extractor) -> Result<Self, GenerateError> {
        Ok(Dictation {
            text: text.to_string(),
            tokens: sentence.tokens.iter().map(|t| t.text.clone()).collect(),
            triples: extractor.extract_sentence(sentence)?,
            measurements: text::measurements(text),
        })
    }

    fn entities<'l>(&self, lexicon: &'l Lexicon) -> Vec<(Range<usize>, &'l LexiconEntry)> {
        lexicon.longest_match(&self.tokens)
    }

    /// Token windows ending at each finding or observation, longest first,
    /// so that graph nodes such as "acute pancreatitis" are found from the
    /// dictionary term "pancreatitis".
    fn finding_names(&self, lexicon: &Lexicon) -> Vec<String> {
        let mut out = Vec::new();
        for (span, e) in self.entities(lexicon) {
            if matches!(e.category, CoarseCategory::Finding | CoarseCategory::Observation) {
                for s in span.start.saturating_sub(MAX_FINDING_PREFIX)..span.start {
                    out.push(self.span_text(s..span.end));
                }
                out.push(e.preferred_name.clone());
            }
        }
        out
    }

    fn span_text(&self, span: Range<usize>) -> String {
        self.tokens[span].join(" ").to_lowercase()
    }
}

/// Splits a dictation into single-finding pieces: sentences, then `;`, then
/// ` and ` where both sides name a finding or observation.
pub fn split_dictation(text: &str, lexicon: &Lexicon) -> Vec<String> {
    let has_finding = |s: &str| {
        lexicon
            .longest_match(&text::tokenize(s))
            .iter()
            .any(|(_, e)| matches!(e.category, CoarseCategory::Finding | CoarseCategory::Observation))
    };
    let mut out = Vec::new();
    for sentence in split_sentences(text) {
        for part in sentence.split(';') {
            let mut pieces: Vec<String> = vec![part.trim().to_string()];
            loop {
                let last = pieces.pop().unwrap();
                let split = last
                    .match_indices(" and ")
                    .map(|(i, _)| (last[..i].trim().to_string(), last[i + 5..].trim().to_string()))
                    .find(|(a, b)| has_finding(a) && has_finding(b));
                match split {
                    Some((a, b)) => {
                        pieces.push(a);
                        pieces.push(b);
                    }
                    None => {
                        pieces.push(last);
                        break;
                    }
                }
            }
            out.extend(pieces.into_iter().filter(|p| !p.trim_matches(|c: char| c.is_ascii_punctuation()).trim().is_empty()));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Description {
    pub text: String,
    pub finding: String,
    pub finding_type: String,
    pub organ: Option<String>,
    pub warnings: Vec<String>,
}

fn join_list(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [a] => a.clone(),
        [rest @ .., last] => format!("{} and {last}", rest.join(", ")),
    }
}

fn property_rank(p: &str) -> (usize, String) {
    (PROPERTY_ORDER.iter().position(|q| *q == p).unwrap_or(PROPERTY_ORDER.len()), p.to_string())
}

/// Expands one single-finding dictation against an optional organ graph.
pub fn generate_description(
    dictation: &Dictation,
    kg: Option<&KnowledgeGraph>,
    templates: &TemplateSet,
    lexicon: &Lexicon,
    ontology: &Ontology,
) -> Result<Description, GenerateError> {
    let mut warnings = Vec::new();
    let entities = dictation.entities(lexicon);
    let (fspan, fentry) = entities
        .iter()
        .find(|(_, e)| e.category == CoarseCategory::Finding)
        .or_else(|| entities.iter().find(|(_, e)| e.category == CoarseCategory::Observation))
        .cloned()
        .ok_or_else(|| GenerateError::NoFinding(dictation.text.clone()))?;

    // the finding phrase absorbs the modifiers written directly before it
    let mut start = fspan.start;
    let mut boundaries = vec![start];
    while let Some(t) = dictation.triples.iter().find(|t| {
        t.relation == LogicalRelation::ModifierOf && t.object.span == fspan && t.subject.span.end == start && t.subject.span.start < start
    }) {
        start = t.subject.span.start;
        boundaries.push(start);
    }
    boundaries.reverse();
    let phrase = dictation.span_text(start..fspan.end);

    let anatomy: Vec<String> = entities
        .iter()
        .filter(|(_, e)| e.category == CoarseCategory::Anatomy)
        .map(|(_, e)| e.preferred_name.clone())
        .collect();
    let context: Vec<&str> = anatomy.iter().map(String::as_str).collect();

    let mut names: Vec<String> = boundaries.iter().map(|&b| dictation.span_text(b..fspan.end)).collect();
    names.push(fentry.preferred_name.clone());
    let resolved = kg.and_then(|g| names.iter().find(|n| g.resolve(n, &context).is_ok()).map(|n| (g, n.clone())));
    if resolved.is_none() {
        warnings.push(format!(
            "`{}` not in the knowledge graph; description uses dictation details only",
            fentry.preferred_name
        ));
    }

    // anatomy: where the dictation puts the finding, climbed through the graph
    let sited = dictation
        .triples
        .iter()
        .find(|t| t.subject.span == fspan && t.relation.is_locative() && t.object.category == CoarseCategory::Anatomy)
        .map(|t| t.object.text.clone())
        .or_else(|| anatomy.first().cloned());
    let mut chain: Vec<String> = Vec::new();
    if let Some(site) = &sited {
        chain.push(site.clone());
        match kg.map(|g| g.query_location(site, &context, ontology)) {
            Some(Ok(up)) => chain.extend(up.iter().map(|n| n.name.clone())),
            _ => {
                chain.extend(anatomy.iter().filter(|a| *a != site).cloned());
                if let Some(root) = kg.and_then(|g| g.root.as_ref()).and_then(|r| kg.unwrap().node(r)) {
                    if !chain.contains(&root.name) {
                        chain.push(root.name.clone());
                    }
                }
            }
        }
    } else if let Some((g, name)) = &resolved {
        chain.extend(g.query_location(name, &context, ontology)?.iter().map(|n| n.name.clone()));
    }
    chain.dedup();
    // "right kidney" already names the kidney
    let chain = chain.into_iter().fold(Vec::<String>::new(), |mut acc, n| {
        if !acc.last().is_some_and(|l| l.ends_with(&format!(" {n}"))) {
            acc.push(n);
        }
        acc
    });

    let mut properties: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut observations: Vec<String> = Vec::new();
    if let Some((g, name)) = &resolved {
        for (s, rel, o) in g.query_defaults(name, &context)? {
            match rel {
                LogicalRelation::DefaultPropertyOf => {
                    properties.entry(s.name.clone()).or_default();
                }
                LogicalRelation::ModifierOf => properties.entry(o.name.clone()).or_default().push(s.name.clone()),
                LogicalRelation::DefaultObservationOf => observations.push(s.name.clone()),
                _ => {}
            }
        }
    }
    let mut overridden: Vec<String> = Vec::new();
    for t in &dictation.triples {
        if t.relation == LogicalRelation::ModifierOf && t.object.category == CoarseCategory::Property {
            let mods = properties.entry(t.object.text.clone()).or_default();
            if !overridden.contains(&t.object.text) {
                mods.clear();
                overridden.push(t.object.text.clone());
            }
            mods.push(t.subject.text.clone());
        }
    }
    for (span, e) in &entities {
        if e.category == CoarseCategory::Observation && *span != fspan && !observations.contains(&e.preferred_name) {
            observations.push(e.preferred_name.clone());
        }
    }
    let mut props: Vec<(String, Vec<String>)> = properties.into_iter().filter(|(_, m)| !m.is_empty()).collect();
    props.sort_by_key(|(p, _)| property_rank(p));

    let organ = kg.and_then(|g| g.root.as_ref()).and_then(|r| kg.unwrap().node(r)).map(|n| n.name.clone());

    let mut keys: Vec<String> = Vec::new();
    let mut class = fentry.fine_tag.clone().or_else(|| Some(fentry.category.as_str().to_string()));
    while let Some(c) = class {
        keys.push(c.clone());
        class = ontology.get(&c).and_then(|k| k.parent.clone());
    }
    keys.push(fentry.category.as_str().to_string());
    let template = keys
        .iter()
        .find_map(|k| templates.get(k))
        .ok_or_else(|| GenerateError::NoTemplate(keys[0].clone()))?;

    let phrase_of = |(p, m): &(String, Vec<String>)| format!("{} {p}", m.join(" "));
    let uses_size = template.required_slots.contains("size_phrase") || template.optional_slots.contains("size_phrase");
    let size_phrase = props.iter().find(|(p, _)| p == "size").map(phrase_of).unwrap_or_default();
    let listed: Vec<String> = props
        .iter()
        .filter(|(p, _)| !(uses_size && p == "size"))
        .map(phrase_of)
        .collect();

    let mut values: BTreeMap<&str, String> = BTreeMap::new();
    values.insert("finding", phrase);
    values.insert("organ", organ.clone().unwrap_or_default());
    values.insert("anatomy_chain", chain.join(" of "));
    values.insert("measurements", dictation.measurements.join(" "));
    values.insert("properties", join_list(&listed));
    values.insert("observations", join_list(&observations));
    values.insert("size_phrase", size_phrase);
    let text = template.render(&values)?;
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(Description {
        text,
        finding: fentry.preferred_name.clone(),
        finding_type: template.finding_type.clone(),
        organ,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerateConfig {
    pub bleu: BleuConfig,
    pub match_threshold: f64,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        GenerateConfig {
            bleu: BleuConfig::default(),
            match_threshold: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratedItem {
    pub dictation: String,
    pub description: Description,
    pub matched_dictation: String,
    pub match_score: f64,
    pub replaced_line: usize,
    pub replaced_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratedReport {
    pub report: String,
    pub items: Vec<GeneratedItem>,
}

/// Everything needed to turn dictations into a patient report.
pub struct ReportGenerator<'a> {
    pub extractor: &'a Extractor,
    pub ontology: &'a Ontology,
    pub graphs: &'a [KnowledgeGraph],
    pub templates: &'a TemplateSet,
    pub corpus: &'a [ParallelCorpusEntry],
    pub normal: &'a NormalReportTemplate,
    pub config: GenerateConfig,
}

impl ReportGenerator<'_> {
    /// The graph naming most of the dictation's entities; ties go to the
    /// first graph, and a graph must name at least one.
    pub fn route(&self, dictation: &Dictation) -> Option<&KnowledgeGraph> {
        let lexicon = &self.extractor.lexicon;
        let names: Vec<String> = dictation
            .entities(lexicon)
            .iter()
            .filter(|(_, e)| e.category == CoarseCategory::Anatomy)
            .map(|(_, e)| e.preferred_name.clone())
            .collect();
        // a finding counts once, whichever of its names the graph knows
        let findings = dictation.finding_names(lexicon);
        let mut best: Option<(usize, &KnowledgeGraph)> = None;
        for g in self.graphs {
            let known = |n: &String| !g.find_by_name(n).is_empty();
            let score = names.iter().filter(|n| known(n)).count() + usize::from(findings.iter().any(known));
            if score > 0 && best.is_none_or(|(b, _)| score > b) {
                best = Some((score, g));
            }
        }
        best.map(|(_, g)| g)
    }

    pub fn describe(&self, id: &str, text: &str) -> Result<(Dictation, Description), GenerateError> {
        let d = Dictation::from_text(id, text, self.extractor)?;
        let g = self.route(&d);
        let desc = generate_description(&d, g, self.templates, &self.extractor.lexicon, self.ontology)?;
        Ok((d, desc))
    }

    /// Generates one description per finding and replaces the matched
    /// normal sentences.
    pub fn generate_report(&self, dictations: &[String]) -> Result<GeneratedReport, GenerateError> {
        let pieces: Vec<String> = dictations
            .iter()
            .flat_map(|d| split_dictation(d, &self.extractor.lexicon))
            .collect();
        let results = crate::par::map(&pieces, |p| self.one(p));
        let mut items = Vec::with_capacity(results.len());
        for r in results {
            items.push(r?);
        }
        let replacements: Vec<(usize, String)> = items.iter().map(|i| (i.replaced_line, i.description.text.clone())).collect();
        Ok(GeneratedReport {
            report: assemble_report(self.normal, &replacements)?,
            items,
        })
    }

    fn one(&self, piece: &str) -> Result<GeneratedItem, GenerateError> {
        let (entry, match_score) = match_dictation(piece, self.corpus, &self.config.bleu, self.config.match_threshold)?;
        let (_, description) = self.describe("dictation", piece)?;
        let (line, _) = locate_normal_sentence(
            self.normal,
            &entry.normal_description,
            description.organ.as_deref(),
            &self.config.bleu,
            self.config.match_threshold,
        )?;
        Ok(GeneratedItem {
            dictation: piece.to_string(),
            matched_dictation: entry.dictation.clone(),
            match_score,
            replaced_line: line,
            replaced_text: self.normal.sentences[line].text.clone(),
            description,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::LexiconEntry;

    fn lexicon() -> Lexicon {
        let mut l = Lexicon::new();
        for (s, c, f) in [
            ("cyst", CoarseCategory::Observation, Some("cyst")),
            ("calculus", CoarseCategory::Finding, Some("calculus")),
            ("liver", CoarseCategory::Anatomy, None),
            ("gallbladder", CoarseCategory::Anatomy, None),
            ("size", CoarseCategory::Property, None),
        ] {
            let mut e = LexiconEntry::new(s, c);
            if let Some(f) = f {
                e = e.with_fine_tag(f);
            }
            l.insert(e, false).unwrap();
        }
        l
    }

    #[test]
    fn list_joining() {
        assert_eq!(join_list(&["a".into()]), "a");
        assert_eq!(join_list(&["a".into(), "b".into(), "c".into()]), "a, b and c");
    }

    #[test]
    fn split_on_findings_only() {
        let l = lexicon();
        assert_eq!(split_dictation("Cyst in liver and calculus in gallbladder.", &l), vec!["Cyst in liver", "calculus in gallbladder."]);
        assert_eq!(split_dictation("Liver normal in size and echotexture.", &l).len(), 1);
        assert_eq!(split_dictation("Cyst in liver. Calculus; cyst", &l).len(), 3);
    }

    #[test]
    fn dictation_only_fill() {
        let l = lexicon();
        let x = Extractor::with_defaults(l.clone());
        let t = parse_templates("cyst\tThere is evidence of {finding}[ measuring {measurements}] noted in the {anatomy_chain}.\n").unwrap();
        let d = Dictation::from_text("d", "cyst in liver", &x).unwrap();
        let out = generate_description(&d, None, &t, &l, &Ontology::default()).unwrap();
        assert_eq!(out.text, "There is evidence of cyst noted in the liver.");
        assert_eq!(out.warnings.len(), 1);
        let d = Dictation::from_text("d", "calculus in gallbladder", &x).unwrap();
        assert!(matches!(generate_description(&d, None, &t, &l, &Ontology::default()), Err(GenerateError::NoTemplate(k)) if k == "calculus"));
    }
}
