use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use radkg::eval::BleuConfig;
use radkg::extract::{
    parse_category_patterns, parse_chunk_patterns, Extractor, DEFAULT_CATEGORY_PATTERNS, DEFAULT_CHUNK_PATTERNS,
};
use radkg::generate::{parse_parallel_corpus, parse_templates, GenerateConfig, NormalReportTemplate};
use radkg::kg::{load_preliminary_kg, KnowledgeGraph};
use radkg::lexicon::{load_lexicon, SupersenseLexicon};
use radkg::ontology::Ontology;
use radkg::preprocess::{parse_section_patterns, parse_word_frequencies, Preprocessor, SpellIndex};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreprocessSection {
    pub corpus: Option<PathBuf>,
    pub section_patterns: Option<PathBuf>,
    pub word_frequencies: Option<PathBuf>,
    pub max_edit_distance: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconSection {
    #[serde(default)]
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnnotationMode {
    #[default]
    Fallback,
    Files,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationSection {
    #[serde(default)]
    pub mode: AnnotationMode,
    pub supersense_map: Option<PathBuf>,
    pub prep_senses: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractionSection {
    pub chunk_patterns: Option<PathBuf>,
    pub category_patterns: Option<PathBuf>,
    pub negation_triggers: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KgSection {
    #[serde(default)]
    pub preliminary: Vec<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateSection {
    pub templates: Option<PathBuf>,
    pub parallel_corpus: Option<PathBuf>,
    pub normal_template: Option<PathBuf>,
    pub match_threshold: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationSection {
    pub smoothing: Option<bool>,
}

/// The TOML run configuration. Every section is optional; a command that
/// needs a missing key fails and names it. Relative paths resolve against
/// the directory holding the config file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub preprocess: PreprocessSection,
    #[serde(default)]
    pub lexicon: LexiconSection,
    #[serde(default)]
    pub annotation: AnnotationSection,
    #[serde(default)]
    pub extraction: ExtractionSection,
    #[serde(default)]
    pub kg: KgSection,
    #[serde(default)]
    pub generate: GenerateSection,
    #[serde(default)]
    pub evaluation: EvaluationSection,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn required<'a>(value: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
    value
        .as_deref()
        .ok_or_else(|| anyhow!("missing config key `{key}`"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read(path)?;
        let mut cfg: RunConfig =
            toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base);
        cfg.check_paths()?;
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let opts = [
            &mut self.preprocess.corpus,
            &mut self.preprocess.section_patterns,
            &mut self.preprocess.word_frequencies,
            &mut self.annotation.supersense_map,
            &mut self.annotation.prep_senses,
            &mut self.extraction.chunk_patterns,
            &mut self.extraction.category_patterns,
            &mut self.generate.templates,
            &mut self.generate.parallel_corpus,
            &mut self.generate.normal_template,
        ];
        for p in opts.into_iter().flatten() {
            fix(p);
        }
        self.lexicon.files.iter_mut().for_each(fix);
        self.kg.preliminary.iter_mut().for_each(fix);
    }

    /// Every configured path must exist before any command runs.
    fn check_paths(&self) -> Result<()> {
        let singles = [
            ("preprocess.corpus", &self.preprocess.corpus),
            ("preprocess.section_patterns", &self.preprocess.section_patterns),
            ("preprocess.word_frequencies", &self.preprocess.word_frequencies),
            ("annotation.supersense_map", &self.annotation.supersense_map),
            ("annotation.prep_senses", &self.annotation.prep_senses),
            ("extraction.chunk_patterns", &self.extraction.chunk_patterns),
            ("extraction.category_patterns", &self.extraction.category_patterns),
            ("generate.templates", &self.generate.templates),
            ("generate.parallel_corpus", &self.generate.parallel_corpus),
            ("generate.normal_template", &self.generate.normal_template),
        ];
        let mut paths: Vec<(&str, &Path)> = singles
            .iter()
            .filter_map(|(k, p)| p.as_deref().map(|p| (*k, p)))
            .collect();
        paths.extend(self.lexicon.files.iter().map(|p| ("lexicon.files", p.as_path())));
        paths.extend(self.kg.preliminary.iter().map(|p| ("kg.preliminary", p.as_path())));
        for (key, p) in paths {
            if !p.exists() {
                bail!("config key `{key}`: {} does not exist", p.display());
            }
        }
        Ok(())
    }

    pub fn corpus_dir(&self) -> Result<&Path> {
        required(&self.preprocess.corpus, "preprocess.corpus")
    }

    pub fn preprocessor(&self) -> Result<Preprocessor> {
        let patterns = read(required(&self.preprocess.section_patterns, "preprocess.section_patterns")?)?;
        let freqs = read(required(&self.preprocess.word_frequencies, "preprocess.word_frequencies")?)?;
        let max = self
            .preprocess
            .max_edit_distance
            .unwrap_or(radkg::preprocess::DEFAULT_MAX_EDIT_DISTANCE);
        Ok(Preprocessor::new(
            parse_section_patterns(&patterns)?,
            SpellIndex::build(&parse_word_frequencies(&freqs)?, max),
        ))
    }

    pub fn extractor(&self) -> Result<Extractor> {
        if self.lexicon.files.is_empty() {
            bail!("missing config key `lexicon.files`");
        }
        let lexicon = load_lexicon(&self.lexicon.files)?;
        let senses = match (&self.annotation.supersense_map, &self.annotation.prep_senses) {
            (None, None) => SupersenseLexicon::default(),
            (Some(m), Some(p)) => SupersenseLexicon::parse(&read(m)?, &read(p)?)?,
            (Some(_), None) => bail!("missing config key `annotation.prep_senses`"),
            (None, Some(_)) => bail!("missing config key `annotation.supersense_map`"),
        };
        let chunk = match &self.extraction.chunk_patterns {
            Some(p) => read(p)?,
            None => DEFAULT_CHUNK_PATTERNS.to_string(),
        };
        let category = match &self.extraction.category_patterns {
            Some(p) => read(p)?,
            None => DEFAULT_CATEGORY_PATTERNS.to_string(),
        };
        let mut x = Extractor::new(
            lexicon,
            senses,
            parse_chunk_patterns(&chunk)?,
            parse_category_patterns(&category)?,
        );
        if let Some(t) = &self.extraction.negation_triggers {
            x.set_negation_triggers(t);
        }
        Ok(x)
    }

    /// Preliminary graphs from `paths` when given, else from the config.
    pub fn graphs(&self, paths: &[PathBuf], ontology: &Ontology) -> Result<Vec<KnowledgeGraph>> {
        let paths = if paths.is_empty() { &self.kg.preliminary } else { paths };
        if paths.is_empty() {
            bail!("missing config key `kg.preliminary`");
        }
        paths.iter().map(|p| load_graph(p, ontology)).collect()
    }

    pub fn generate_config(&self) -> GenerateConfig {
        let mut c = GenerateConfig::default();
        if let Some(t) = self.generate.match_threshold {
            c.match_threshold = t;
        }
        c
    }

    pub fn smoothing(&self) -> bool {
        self.evaluation.smoothing.unwrap_or(BleuConfig::default().smoothing)
    }

    pub fn templates(&self) -> Result<radkg::generate::TemplateSet> {
        Ok(parse_templates(&read(required(&self.generate.templates, "generate.templates")?)?)?)
    }

    pub fn parallel_corpus(&self) -> Result<Vec<radkg::generate::ParallelCorpusEntry>> {
        Ok(parse_parallel_corpus(&read(required(
            &self.generate.parallel_corpus,
            "generate.parallel_corpus",
        )?)?)?)
    }

    pub fn normal_template(&self) -> Result<NormalReportTemplate> {
        Ok(NormalReportTemplate::parse(&read(required(
            &self.generate.normal_template,
            "generate.normal_template",
        )?)?))
    }
}

/// Reads `.nt` graphs as N-Triples and anything else as preliminary TSV.
pub fn load_graph(path: &Path, ontology: &Ontology) -> Result<KnowledgeGraph> {
    if path.extension().is_some_and(|e| e == "nt") {
        let g = radkg::kg::from_ntriples(&read(path)?, radkg::kg::DEFAULT_NAMESPACE)
            .with_context(|| format!("{}", path.display()))?;
        g.validate(ontology).with_context(|| format!("{}", path.display()))?;
        Ok(g)
    } else {
        load_preliminary_kg(path, ontology).with_context(|| format!("{}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture_config() -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/radkg.toml")
    }

    #[test]
    fn fixture_config_loads_everything() {
        let cfg = RunConfig::load(&fixture_config()).unwrap();
        assert_eq!(cfg.annotation.mode, AnnotationMode::Fallback);
        cfg.preprocessor().unwrap();
        cfg.extractor().unwrap();
        assert_eq!(cfg.graphs(&[], &Ontology::default()).unwrap().len(), 3);
        cfg.templates().unwrap();
        cfg.parallel_corpus().unwrap();
        assert!(cfg.smoothing());
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = toml::from_str::<RunConfig>("[lexicon]\nfile = []\n").unwrap_err();
        assert!(err.to_string().contains("file"), "{err}");
    }

    #[test]
    fn missing_key_is_named() {
        let cfg = RunConfig::default();
        let err = cfg.extractor().err().expect("no lexicon configured");
        assert!(err.to_string().contains("lexicon.files"));
        let err = cfg.templates().unwrap_err();
        assert!(err.to_string().contains("generate.templates"));
    }
}
