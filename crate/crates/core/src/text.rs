//! Tokenization shared by every stage.
//!
//! Measurement expressions (`9.6 x 4.0 cm`, `vol 4.83 cc`) are kept as a
//! single token so that correction, chunking and n-gram scoring never split
//! or rewrite them.

use std::sync::LazyLock;

use regex::Regex;

const UNITS: &str = r"(?:mm|cm|cc|ml)";

static MEASUREMENT: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(
        r"(?i)\b(?:vol(?:ume)?\s+)?\d+(?:\.\d+)?(?:\s*[x×]\s*\d+(?:\.\d+)?)*\s*{UNITS}\b"
    ))
    .unwrap()
});

static TOKEN: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(
        r"(?i)(?:vol(?:ume)?\s+)?\d+(?:\.\d+)?(?:\s*[x×]\s*\d+(?:\.\d+)?)*\s*{UNITS}\b|\d+(?:\.\d+)?|[\p{{L}}][\p{{L}}\p{{N}}]*(?:[-'][\p{{L}}\p{{N}}]+)*|[^\s\p{{L}}\p{{N}}]"
    ))
    .unwrap()
});

/// Splits a sentence into tokens, keeping measurements and hyphenated words whole.
pub fn tokenize(text: &str) -> Vec<String> {
    TOKEN
        .find_iter(text)
        .map(|m| m.as_str().to_string())
        .collect()
}

/// Every measurement expression in `text`, verbatim and in order.
pub fn measurements(text: &str) -> Vec<String> {
    MEASUREMENT
        .find_iter(text)
        .map(|m| m.as_str().to_string())
        .collect()
}

pub fn has_digit(token: &str) -> bool {
    token.chars().any(|c| c.is_ascii_digit())
}

pub fn is_unit(token: &str) -> bool {
    matches!(
        token.to_ascii_lowercase().as_str(),
        "mm" | "cm" | "cc" | "ml"
    )
}

pub fn is_punct(token: &str) -> bool {
    !token.is_empty() && token.chars().all(|c| !c.is_alphanumeric())
}

/// Lowercased tokens with punctuation dropped; the form used for n-gram metrics.
pub fn metric_tokens(text: &str) -> Vec<String> {
    tokenize(text)
        .into_iter()
        .filter(|t| !is_punct(t))
        .map(|t| t.to_lowercase())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measurements_stay_whole() {
        let toks = tokenize("Pancreatic pseudo cyst measuring 1.4 x 3 x 2.2 cm vol 4.83 cc in head.");
        assert_eq!(
            toks,
            vec![
                "Pancreatic",
                "pseudo",
                "cyst",
                "measuring",
                "1.4 x 3 x 2.2 cm",
                "vol 4.83 cc",
                "in",
                "head",
                "."
            ]
        );
    }

    #[test]
    fn hyphenated_words_are_one_token() {
        assert_eq!(
            tokenize("Non-enhancing lesion, liver."),
            vec!["Non-enhancing", "lesion", ",", "liver", "."]
        );
    }

    #[test]
    fn measurement_extraction_is_verbatim() {
        let m = measurements("cyst measuring 1.4 x 3 x 2.2 cm vol 4.83 cc in head");
        assert_eq!(m, vec!["1.4 x 3 x 2.2 cm", "vol 4.83 cc"]);
        assert_eq!(measurements("A 5 mm calculus"), vec!["5 mm"]);
        assert!(measurements("grade 1 fatty liver").is_empty());
    }

    #[test]
    fn metric_tokens_drop_punctuation() {
        assert_eq!(metric_tokens("Liver is normal."), vec!["liver", "is", "normal"]);
    }
}
