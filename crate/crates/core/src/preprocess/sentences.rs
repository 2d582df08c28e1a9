const ABBREVIATIONS: &[&str] = &["approx", "e.g", "i.e", "vs", "dr", "mr", "mrs", "fig", "no"];

/// Splits section text into sentences on `.`, `!` or `?` followed by
/// whitespace or end of text. Decimal points never split (no whitespace
/// follows them) and known abbreviations are protected.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        current.push(c);
        if !matches!(c, '.' | '!' | '?') {
            continue;
        }
        let at_boundary = chars.peek().is_none_or(|n| n.is_whitespace());
        if !at_boundary || (c == '.' && ends_with_abbreviation(&current)) {
            continue;
        }
        push_sentence(&mut out, &current);
        current.clear();
    }
    push_sentence(&mut out, &current);
    out
}

fn ends_with_abbreviation(current: &str) -> bool {
    let body = &current[..current.len() - 1];
    let last = body
        .rsplit(|c: char| c.is_whitespace() || c == '(')
        .next()
        .unwrap_or("")
        .to_ascii_lowercase();
    // "No." is only an abbreviation when a number follows; treat a bare
    // sentence-final "no." as terminal.
    ABBREVIATIONS.contains(&last.as_str()) && last != "no"
}

fn push_sentence(out: &mut Vec<String>, raw: &str) {
    let s = clean_sentence(raw);
    if !s.is_empty() {
        out.push(s);
    }
}

/// Collapses whitespace and strips leading/trailing non-terminal punctuation.
pub fn clean_sentence(raw: &str) -> String {
    let collapsed = raw.split_whitespace().collect::<Vec<_>>().join(" ");
    let is_strippable = |c: char| !c.is_alphanumeric() && !matches!(c, '.' | '!' | '?' | ')' | '(');
    let trimmed = collapsed.trim_start_matches(|c: char| is_strippable(c) || c == '.' || c == ')');
    let (body, terminal) = match trimmed.char_indices().last() {
        Some((i, '.' | '!' | '?')) => (&trimmed[..i], &trimmed[i..]),
        _ => (trimmed, ""),
    };
    let body = body.trim_end_matches(|c: char| is_strippable(c) || c.is_whitespace());
    if body.is_empty() {
        return String::new();
    }
    format!("{body}{terminal}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_sentences() {
        assert_eq!(
            split_sentences("Liver is normal. No lesion seen."),
            vec!["Liver is normal.", "No lesion seen."]
        );
    }

    #[test]
    fn decimals_do_not_split() {
        let s = "Right kidney is normal in size 9.6 x 4.0 cm, shape.";
        assert_eq!(split_sentences(s), vec![s]);
    }

    #[test]
    fn abbreviation_protected() {
        assert_eq!(
            split_sentences("Cyst measuring approx. 4 mm is seen. Liver normal."),
            vec!["Cyst measuring approx. 4 mm is seen.", "Liver normal."]
        );
    }

    #[test]
    fn strips_stray_punctuation() {
        assert_eq!(clean_sentence("- Liver is normal ;."), "Liver is normal.");
        assert_eq!(clean_sentence("  * bowel loops normal, "), "bowel loops normal");
        assert_eq!(clean_sentence(" :: "), "");
    }
}
