//! BLEU and ROUGE over pre-tokenized text.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

fn ngrams<S: AsRef<str>>(tokens: &[S], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut counts = HashMap::new();
    if n == 0 || tokens.len() < n {
        return counts;
    }
    for w in tokens.windows(n) {
        *counts.entry(w.iter().map(AsRef::as_ref).collect()).or_insert(0) += 1;
    }
    counts
}

/// Clipped n-gram matches and the candidate n-gram total.
pub fn clipped_matches<S: AsRef<str>>(candidate: &[S], reference: &[S], n: usize) -> (usize, usize) {
    let cand = ngrams(candidate, n);
    let refs = ngrams(reference, n);
    let matched = cand
        .iter()
        .map(|(g, &c)| c.min(refs.get(g).copied().unwrap_or(0)))
        .sum();
    (matched, cand.values().sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BleuConfig {
    pub max_n: usize,
    /// Add one to numerator and denominator of every order above 1.
    pub smoothing: bool,
}

impl Default for BleuConfig {
    fn default() -> Self {
        BleuConfig { max_n: 4, smoothing: true }
    }
}

/// Modified precision of one order. An order that neither side is long
/// enough to contain counts as satisfied.
fn precision<S: AsRef<str>>(candidate: &[S], reference: &[S], n: usize, smoothing: bool) -> f64 {
    let (matched, total) = clipped_matches(candidate, reference, n);
    if total == 0 && reference.len() < n {
        return 1.0;
    }
    if smoothing && n > 1 {
        return (matched as f64 + 1.0) / (total as f64 + 1.0);
    }
    if total == 0 {
        return 0.0;
    }
    matched as f64 / total as f64
}

fn brevity_penalty(c: usize, r: usize) -> f64 {
    if c == 0 {
        0.0
    } else if c >= r {
        1.0
    } else {
        (1.0 - r as f64 / c as f64).exp()
    }
}

/// BLEU with explicit weights, one per order starting at 1.
pub fn bleu<S: AsRef<str>>(candidate: &[S], reference: &[S], weights: &[f64], smoothing: bool) -> f64 {
    if candidate.is_empty() {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let p = precision(candidate, reference, i + 1, smoothing);
        if p == 0.0 {
            return 0.0;
        }
        log_sum += w * p.ln();
    }
    (brevity_penalty(candidate.len(), reference.len()) * log_sum.exp()).clamp(0.0, 1.0)
}

/// Uniform-weight cumulative BLEU up to `config.max_n`.
pub fn bleu_cumulative<S: AsRef<str>>(candidate: &[S], reference: &[S], config: &BleuConfig) -> f64 {
    let n = config.max_n.max(1);
    bleu(candidate, reference, &vec![1.0 / n as f64; n], config.smoothing)
}

/// Individual n-gram BLEU: weight 1 on order `n`.
pub fn bleu_individual<S: AsRef<str>>(candidate: &[S], reference: &[S], n: usize, smoothing: bool) -> f64 {
    let mut w = vec![0.0; n.max(1)];
    w[n.max(1) - 1] = 1.0;
    bleu(candidate, reference, &w, smoothing)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

impl Prf {
    pub fn new(precision: f64, recall: f64) -> Self {
        Prf {
            precision,
            recall,
            f_measure: f1(precision, recall),
        }
    }
}

pub fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

pub fn rouge_n<S: AsRef<str>>(candidate: &[S], reference: &[S], n: usize) -> Prf {
    let (overlap, cand_total) = clipped_matches(candidate, reference, n);
    let ref_total = reference.len().saturating_sub(n.max(1) - 1);
    Prf::new(ratio(overlap, cand_total), ratio(overlap, ref_total))
}

pub fn lcs_len<S: AsRef<str>>(a: &[S], b: &[S]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x.as_ref() == y.as_ref() {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn rouge_l<S: AsRef<str>>(candidate: &[S], reference: &[S]) -> Prf {
    let l = lcs_len(candidate, reference);
    Prf::new(ratio(l, candidate.len()), ratio(l, reference.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn clipping() {
        assert_eq!(clipped_matches(&t("the the the"), &t("the cat"), 1), (1, 3));
        assert!((bleu_individual(&t("the the the"), &t("the cat"), 1, false) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn identity_is_one() {
        let s = t("pancreas is normal in size and echotexture");
        for n in 1..=4 {
            assert_eq!(bleu_individual(&s, &s, n, false), 1.0);
            assert_eq!(rouge_n(&s, &s, n), Prf::new(1.0, 1.0));
        }
        assert_eq!(bleu_cumulative(&s, &s, &BleuConfig::default()), 1.0);
        // shorter than the highest order
        let short = t("acute pancreatitis");
        assert_eq!(bleu_cumulative(&short, &short, &BleuConfig { max_n: 4, smoothing: false }), 1.0);
    }

    #[test]
    fn lcs_example() {
        let r = rouge_l(&t("a b c d"), &t("a c d e"));
        assert_eq!(r.precision, 0.75);
        assert_eq!(r.recall, 0.75);
    }

    #[test]
    fn empty_inputs() {
        let e: Vec<&str> = vec![];
        assert_eq!(bleu_cumulative(&e, &t("a"), &BleuConfig::default()), 0.0);
        assert_eq!(rouge_n(&e, &e, 1), Prf::default());
        assert_eq!(rouge_l(&t("a"), &e), Prf::default());
    }

    #[test]
    fn brevity() {
        // all unigrams match, candidate half the reference length
        let b = bleu_individual(&t("a b"), &t("a b c d"), 1, false);
        assert!((b - (-1.0f64).exp()).abs() < 1e-12);
    }
}
