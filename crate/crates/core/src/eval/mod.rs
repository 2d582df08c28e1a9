//! Scoring: triple precision/recall, BLEU, ROUGE and sentence similarity.
//!
//! Text metrics work on `text::metric_tokens`: lowercased, punctuation
//! dropped, measurements kept whole.

mod ngram;
mod similarity;
mod triples;

use serde::{Deserialize, Serialize};

pub use ngram::{
    bleu, bleu_cumulative, bleu_individual, clipped_matches, f1, lcs_len, rouge_l, rouge_n, BleuConfig, Prf,
};
pub use similarity::{lexical_cosine, LexicalCosine, SimilarityBackend};
pub use triples::{
    group_records, parse_gold, triple_prf, EvalMode, GoldSentence, MetricsReport, SentenceScore, TripleKey,
    EMPTY_SET_CONVENTIONS,
};

use crate::text::metric_tokens;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("system sentence `{0}` has no gold counterpart")]
    IdMismatch(String),
    #[error("unknown evaluation mode `{0}` (expected full or pair_only)")]
    Mode(String),
    #[error(transparent)]
    Triples(#[from] crate::extract::ExtractError),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Sentence-level BLEU on raw text with the shared tokenization.
pub fn bleu_text(candidate: &str, reference: &str, config: &BleuConfig) -> f64 {
    bleu_cumulative(&metric_tokens(candidate), &metric_tokens(reference), config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptionScore {
    pub id: String,
    pub bleu: [f64; 4],
    pub bleu_cumulative: f64,
    pub rouge: [Prf; 4],
    pub rouge_l: Prf,
    pub similarity: f64,
}

/// Means of the per-pair scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptionMetrics {
    pub smoothing: bool,
    pub similarity_backend: String,
    pub pairs: Vec<DescriptionScore>,
    pub bleu: [f64; 4],
    pub bleu_cumulative: f64,
    pub rouge: [Prf; 4],
    pub rouge_l: Prf,
    pub similarity: f64,
}

impl DescriptionMetrics {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialize") + "\n"
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "id,bleu1,bleu2,bleu3,bleu4,bleu_cum4,rouge1_f,rouge2_f,rouge3_f,rouge4_f,rougeL_p,rougeL_r,rougeL_f,similarity\n",
        );
        let row = |id: &str, b: &[f64; 4], bc: f64, r: &[Prf; 4], l: &Prf, s: f64| {
            format!(
                "{id},{:.6},{:.6},{:.6},{:.6},{bc:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{s:.6}\n",
                b[0], b[1], b[2], b[3], r[0].f_measure, r[1].f_measure, r[2].f_measure, r[3].f_measure, l.precision,
                l.recall, l.f_measure
            )
        };
        for p in &self.pairs {
            out.push_str(&row(&p.id, &p.bleu, p.bleu_cumulative, &p.rouge, &p.rouge_l, p.similarity));
        }
        out.push_str(&row("# mean", &self.bleu, self.bleu_cumulative, &self.rouge, &self.rouge_l, self.similarity));
        out
    }
}

pub fn score_description(
    id: &str,
    candidate: &str,
    reference: &str,
    smoothing: bool,
    backend: &dyn SimilarityBackend,
) -> DescriptionScore {
    let c = metric_tokens(candidate);
    let r = metric_tokens(reference);
    DescriptionScore {
        id: id.to_string(),
        bleu: std::array::from_fn(|i| bleu_individual(&c, &r, i + 1, smoothing)),
        bleu_cumulative: bleu_cumulative(&c, &r, &BleuConfig { max_n: 4, smoothing }),
        rouge: std::array::from_fn(|i| rouge_n(&c, &r, i + 1)),
        rouge_l: rouge_l(&c, &r),
        similarity: backend.similarity(candidate, reference),
    }
}

/// Scores (id, candidate, reference) triples; sums run in input order.
pub fn score_descriptions(
    pairs: &[(String, String, String)],
    smoothing: bool,
    backend: &dyn SimilarityBackend,
) -> DescriptionMetrics {
    let scored = crate::par::map(pairs, |(id, c, r)| score_description(id, c, r, smoothing, backend));
    let n = scored.len().max(1) as f64;
    let mean = |f: &dyn Fn(&DescriptionScore) -> f64| scored.iter().map(f).sum::<f64>() / n;
    let mean_prf = |f: &dyn Fn(&DescriptionScore) -> Prf| Prf {
        precision: mean(&|s| f(s).precision),
        recall: mean(&|s| f(s).recall),
        f_measure: mean(&|s| f(s).f_measure),
    };
    DescriptionMetrics {
        smoothing,
        similarity_backend: backend.name().to_string(),
        bleu: std::array::from_fn(|i| mean(&|s| s.bleu[i])),
        bleu_cumulative: mean(&|s| s.bleu_cumulative),
        rouge: std::array::from_fn(|i| mean_prf(&|s| s.rouge[i])),
        rouge_l: mean_prf(&|s| s.rouge_l),
        similarity: mean(&|s| s.similarity),
        pairs: scored,
    }
}

/// `id<TAB>text` rows, as used for generated and gold descriptions.
pub fn parse_descriptions(text: &str) -> Result<Vec<(String, String)>, EvalError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, body) = line.split_once('\t').ok_or_else(|| EvalError::Parse {
            line: n + 1,
            reason: "expected `id<TAB>text`".into(),
        })?;
        out.push((id.trim().to_string(), body.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn description_identity() {
        let s = "There is evidence of pancreatic thick walled pseudo cyst measuring 1.4 x 3 x 2.2 cm.";
        let m = score_descriptions(&[("a".into(), s.into(), s.into())], true, &LexicalCosine);
        assert_eq!(m.bleu, [1.0; 4]);
        assert_eq!(m.bleu_cumulative, 1.0);
        assert_eq!(m.rouge_l.f_measure, 1.0);
        assert_eq!(m.similarity, 1.0);
        assert!(m.to_csv().lines().count() == 3);
    }
}
