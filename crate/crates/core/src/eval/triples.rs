use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{f1, EvalError};
use crate::extract::{parse_triples, TripleRecord};
use crate::ontology::LogicalRelation;

pub type TripleKey = (String, LogicalRelation, String);

/// The triple set of one sentence, gold or system.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GoldSentence {
    pub sentence_id: String,
    pub gold_triples: BTreeSet<TripleKey>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    Full,
    PairOnly,
}

impl std::str::FromStr for EvalMode {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(EvalMode::Full),
            "pair_only" | "pair-only" => Ok(EvalMode::PairOnly),
            other => Err(EvalError::Mode(other.to_string())),
        }
    }
}

fn norm(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Groups records by sentence id in order of first appearance.
pub fn group_records(records: &[TripleRecord]) -> Vec<GoldSentence> {
    let mut out: Vec<GoldSentence> = Vec::new();
    for r in records {
        let key = (norm(&r.subject), r.relation, norm(&r.object));
        match out.iter_mut().find(|g| g.sentence_id == r.sentence_id) {
            Some(g) => {
                g.gold_triples.insert(key);
            }
            None => out.push(GoldSentence {
                sentence_id: r.sentence_id.clone(),
                gold_triples: BTreeSet::from([key]),
            }),
        }
    }
    out
}

/// Triple TSV plus `#sentence<TAB>id` lines that declare sentences with no
/// gold triples.
pub fn parse_gold(text: &str) -> Result<Vec<GoldSentence>, EvalError> {
    let records = parse_triples(text)?;
    let mut declared: Vec<String> = Vec::new();
    for line in text.lines() {
        if let Some(id) = line.strip_prefix("#sentence\t") {
            declared.push(id.trim().to_string());
        }
    }
    let mut grouped = group_records(&records);
    for id in declared {
        if !grouped.iter().any(|g| g.sentence_id == id) {
            grouped.push(GoldSentence {
                sentence_id: id,
                gold_triples: BTreeSet::new(),
            });
        }
    }
    Ok(grouped)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceScore {
    pub sentence_id: String,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mode: EvalMode,
    pub conventions: String,
    pub per_sentence: Vec<SentenceScore>,
    pub avg_precision: f64,
    pub avg_recall: f64,
    pub f1_of_averages: f64,
}

pub const EMPTY_SET_CONVENTIONS: &str =
    "both empty: P=R=1; system empty: P=1 R=0; gold empty: P=0 R=1; F1 on averaged P and R";

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialize") + "\n"
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("sentence_id,precision,recall\n");
        for s in &self.per_sentence {
            out.push_str(&format!("{},{:.6},{:.6}\n", s.sentence_id, s.precision, s.recall));
        }
        out.push_str(&format!(
            "# average,{:.6},{:.6}\n# f1_of_averages,{:.6}\n",
            self.avg_precision, self.avg_recall, self.f1_of_averages
        ));
        out
    }
}

fn score(system: &BTreeSet<TripleKey>, gold: &BTreeSet<TripleKey>, mode: EvalMode) -> (f64, f64) {
    match (system.is_empty(), gold.is_empty()) {
        (true, true) => return (1.0, 1.0),
        (true, false) => return (1.0, 0.0),
        (false, true) => return (0.0, 1.0),
        _ => {}
    }
    let hit = |t: &TripleKey, set: &BTreeSet<TripleKey>| match mode {
        EvalMode::Full => set.contains(t),
        EvalMode::PairOnly => set.iter().any(|g| g.0 == t.0 && g.2 == t.2),
    };
    let correct_sys = system.iter().filter(|t| hit(t, gold)).count();
    let found_gold = gold.iter().filter(|t| hit(t, system)).count();
    (
        correct_sys as f64 / system.len() as f64,
        found_gold as f64 / gold.len() as f64,
    )
}

/// Macro-averaged precision and recall over gold sentences. A gold sentence
/// with no system entry counts as an empty system set.
pub fn triple_prf(system: &[GoldSentence], gold: &[GoldSentence], mode: EvalMode) -> Result<MetricsReport, EvalError> {
    if let Some(s) = system.iter().find(|s| !gold.iter().any(|g| g.sentence_id == s.sentence_id)) {
        return Err(EvalError::IdMismatch(s.sentence_id.clone()));
    }
    let empty = BTreeSet::new();
    let per_sentence: Vec<SentenceScore> = gold
        .iter()
        .map(|g| {
            let sys = system
                .iter()
                .find(|s| s.sentence_id == g.sentence_id)
                .map_or(&empty, |s| &s.gold_triples);
            let (precision, recall) = score(sys, &g.gold_triples, mode);
            SentenceScore {
                sentence_id: g.sentence_id.clone(),
                precision,
                recall,
            }
        })
        .collect();
    let n = per_sentence.len() as f64;
    let (avg_precision, avg_recall) = if per_sentence.is_empty() {
        (1.0, 1.0)
    } else {
        (
            per_sentence.iter().map(|s| s.precision).sum::<f64>() / n,
            per_sentence.iter().map(|s| s.recall).sum::<f64>() / n,
        )
    };
    Ok(MetricsReport {
        mode,
        conventions: EMPTY_SET_CONVENTIONS.to_string(),
        per_sentence,
        avg_precision,
        avg_recall,
        f1_of_averages: f1(avg_precision, avg_recall),
    })
}
