use std::collections::BTreeMap;

use crate::text::metric_tokens;

/// Sentence similarity in [0, 1]. An embedding model can be plugged in here.
pub trait SimilarityBackend: Sync {
    fn similarity(&self, candidate: &str, reference: &str) -> f64;
    fn name(&self) -> &str;
}

const STOPWORDS: &[&str] = &[
    "a", "an", "the", "is", "are", "was", "were", "be", "been", "of", "in", "on", "at", "to", "and", "or", "with",
    "for", "by", "as", "this", "that", "there", "it", "its", "from",
];

/// Cosine of term-frequency vectors after lowercasing and stopword removal.
#[derive(Debug, Clone, Default)]
pub struct LexicalCosine;

impl SimilarityBackend for LexicalCosine {
    fn similarity(&self, candidate: &str, reference: &str) -> f64 {
        lexical_cosine(candidate, reference)
    }

    fn name(&self) -> &str {
        "lexical-cosine"
    }
}

fn term_frequencies(text: &str) -> BTreeMap<String, f64> {
    let mut tf = BTreeMap::new();
    for t in metric_tokens(text) {
        if !STOPWORDS.contains(&t.as_str()) {
            *tf.entry(t).or_insert(0.0) += 1.0;
        }
    }
    tf
}

pub fn lexical_cosine(candidate: &str, reference: &str) -> f64 {
    let a = term_frequencies(candidate);
    let b = term_frequencies(reference);
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    // equal vectors are exactly 1, whatever the rounding of the division
    if a == b {
        return 1.0;
    }
    let dot: f64 = a.iter().filter_map(|(k, x)| b.get(k).map(|y| x * y)).sum();
    let norm = |v: &BTreeMap<String, f64>| v.values().map(|x| x * x).sum::<f64>().sqrt();
    (dot / (norm(&a) * norm(&b))).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds() {
        let s = "Pancreas is normal in size and echotexture.";
        assert_eq!(lexical_cosine(s, s), 1.0);
        assert_eq!(lexical_cosine("liver", "spleen"), 0.0);
        assert_eq!(lexical_cosine("", s), 0.0);
        assert_eq!(lexical_cosine("the of", s), 0.0);
    }

    #[test]
    fn three_word_overlap() {
        // {pancreas, shows, bulky, size} vs {pancreas, shows, increased, size}
        let c = lexical_cosine("pancreas shows bulky size", "pancreas shows increased size");
        assert!((c - 0.75).abs() < 1e-12);
    }
}
