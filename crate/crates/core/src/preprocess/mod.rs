//! Report cleaning: section filtering, sentence splitting, spelling
//! correction and compound splitting.

mod sections;
mod sentences;
mod spell;

use std::collections::{BTreeMap, HashSet};
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

pub use sections::{
    parse_section_patterns, segment_report, RawReport, ReportSections, ScanType, SectionClass,
    SectionPattern,
};
pub use sentences::{clean_sentence, split_sentences};
pub use spell::{
    deletion_variants, is_correction_exempt, osa_distance, SpellIndex, DEFAULT_MAX_EDIT_DISTANCE,
};

#[derive(Debug, thiserror::Error)]
pub enum PreprocessError {
    #[error("report `{0}` has neither a findings nor an impression section")]
    NoFindingsSection(String),
    #[error("report `{0}` is empty")]
    EmptyReport(String),
    #[error("duplicate report id `{0}`")]
    DuplicateReport(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// One cleaned output sentence (a JSON-lines row).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanSentence {
    pub report_id: String,
    pub sentence_index: usize,
    pub text: String,
}

/// Parses `term<TAB>count` lines.
pub fn parse_word_frequencies(text: &str) -> Result<BTreeMap<String, u64>, PreprocessError> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split('\t');
        let term = cols.next().unwrap_or("").trim();
        let count = cols
            .next()
            .ok_or_else(|| PreprocessError::Config(format!("frequency line {}: missing count", n + 1)))?
            .trim()
            .parse::<u64>()
            .map_err(|e| PreprocessError::Config(format!("frequency line {}: {e}", n + 1)))?;
        *out.entry(term.to_lowercase()).or_insert(0) += count;
    }
    Ok(out)
}

static WORD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\b\p{L}+\b").unwrap());

/// Section patterns plus spelling index; cleans whole reports.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    pub section_patterns: Vec<SectionPattern>,
    pub index: SpellIndex,
}

impl Preprocessor {
    pub fn new(section_patterns: Vec<SectionPattern>, index: SpellIndex) -> Self {
        Preprocessor {
            section_patterns,
            index,
        }
    }

    /// Corrects every alphabetic word of a sentence in place; other
    /// characters are left exactly as they were.
    pub fn correct_sentence(&self, sentence: &str) -> String {
        WORD.replace_all(sentence, |caps: &regex::Captures<'_>| {
            let word = &caps[0];
            let corrected = self.index.correct_token(word);
            if corrected != word || self.index.contains(word) || is_correction_exempt(word) {
                return corrected;
            }
            self.index.segment_compound(word).join(" ")
        })
        .into_owned()
    }

    pub fn clean_report(&self, report: &RawReport) -> Result<Vec<CleanSentence>, PreprocessError> {
        if report.body.trim().is_empty() {
            return Err(PreprocessError::EmptyReport(report.report_id.clone()));
        }
        let sections = segment_report(report, &self.section_patterns)?;
        let mut out = Vec::new();
        for text in sections.forwarded() {
            for sentence in split_sentences(text) {
                out.push(CleanSentence {
                    report_id: report.report_id.clone(),
                    sentence_index: out.len(),
                    text: self.correct_sentence(&sentence),
                });
            }
        }
        Ok(out)
    }

    /// Cleans a corpus. Reports that fail are logged and returned in the
    /// skipped list; output order follows input order.
    pub fn clean_corpus(&self, reports: &[RawReport]) -> (Vec<CleanSentence>, Vec<(String, PreprocessError)>) {
        let results = crate::par::map(reports, |r| self.clean_report(r));
        let mut sentences = Vec::new();
        let mut skipped = Vec::new();
        for (report, res) in reports.iter().zip(results) {
            match res {
                Ok(s) => sentences.extend(s),
                Err(e) => {
                    log::warn!("skipping report {}: {e}", report.report_id);
                    skipped.push((report.report_id.clone(), e));
                }
            }
        }
        (sentences, skipped)
    }
}

fn read(path: &Path) -> Result<String, PreprocessError> {
    std::fs::read_to_string(path).map_err(|source| PreprocessError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Loads a corpus directory. When `manifest.tsv` exists it lists
/// `path<TAB>scan_type?` rows relative to the directory; otherwise every
/// `*.txt` file is read in name order. The report id is the file stem.
pub fn load_corpus(dir: &Path) -> Result<Vec<RawReport>, PreprocessError> {
    let manifest = dir.join("manifest.tsv");
    let mut entries: Vec<(std::path::PathBuf, ScanType)> = Vec::new();
    if manifest.exists() {
        for line in read(&manifest)?.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            let path = dir.join(cols.next().unwrap_or("").trim());
            let scan = match cols.next() {
                Some(s) if !s.trim().is_empty() => s.parse()?,
                _ => ScanType::Ultrasound,
            };
            entries.push((path, scan));
        }
    } else {
        let listing = std::fs::read_dir(dir).map_err(|source| PreprocessError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        let mut paths: Vec<_> = listing
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "txt"))
            .collect();
        paths.sort();
        entries.extend(paths.into_iter().map(|p| (p, ScanType::Ultrasound)));
    }
    let mut seen = HashSet::new();
    let mut reports = Vec::with_capacity(entries.len());
    for (path, scan_type) in entries {
        let report_id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        if !seen.insert(report_id.clone()) {
            return Err(PreprocessError::DuplicateReport(report_id));
        }
        reports.push(RawReport {
            report_id,
            body: read(&path)?,
            scan_type,
        });
    }
    Ok(reports)
}
