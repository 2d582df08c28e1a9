use super::GenerateError;
use crate::eval::{bleu_text, BleuConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelCorpusEntry {
    pub dictation: String,
    pub normal_description: String,
}

pub fn parse_parallel_corpus(text: &str) -> Result<Vec<ParallelCorpusEntry>, GenerateError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |reason: &str| GenerateError::Syntax {
            line: n + 1,
            reason: reason.to_string(),
        };
        let (d, nd) = line.split_once('\t').ok_or_else(|| err("expected `dictation<TAB>normal_description`"))?;
        if d.trim().is_empty() || nd.trim().is_empty() {
            return Err(err("empty dictation or normal description"));
        }
        out.push(ParallelCorpusEntry {
            dictation: d.trim().to_string(),
            normal_description: nd.trim().to_string(),
        });
    }
    Ok(out)
}

/// One template line with the organ section it sits in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateLine {
    pub text: String,
    pub organ: Option<String>,
}

/// Plain-text normal report, one sentence per line. `#organ: name` lines
/// open an organ section (an empty name closes it) and are not part of the
/// output. Blank lines and headings are kept as lines so that the output
/// reproduces the layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalReportTemplate {
    pub title: String,
    pub sentences: Vec<TemplateLine>,
}

impl NormalReportTemplate {
    pub fn parse(text: &str) -> Self {
        let mut organ: Option<String> = None;
        let mut sentences = Vec::new();
        for raw in text.lines() {
            let line = raw.trim_end_matches('\r');
            if let Some(rest) = line.strip_prefix("#organ:") {
                let name = rest.trim().to_lowercase();
                organ = (!name.is_empty()).then_some(name);
                continue;
            }
            sentences.push(TemplateLine {
                text: line.to_string(),
                organ: organ.clone(),
            });
        }
        let title = sentences
            .iter()
            .map(|s| s.text.trim())
            .find(|t| !t.is_empty())
            .unwrap_or_default()
            .to_string();
        NormalReportTemplate { title, sentences }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for s in &self.sentences {
            out.push_str(&s.text);
            out.push('\n');
        }
        out
    }

    fn has_organ(&self, organ: &str) -> bool {
        self.sentences.iter().any(|s| s.organ.as_deref() == Some(organ))
    }
}

/// Best corpus entry for a dictation, scored with the dictation as candidate
/// and the corpus dictation as reference. Ties go to the earliest entry.
pub fn match_dictation<'c>(
    dictation: &str,
    corpus: &'c [ParallelCorpusEntry],
    bleu: &BleuConfig,
    threshold: f64,
) -> Result<(&'c ParallelCorpusEntry, f64), GenerateError> {
    let mut best: Option<(usize, f64)> = None;
    for (i, e) in corpus.iter().enumerate() {
        let s = bleu_text(dictation, &e.dictation, bleu);
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    let (i, score) = best.ok_or(GenerateError::BelowThreshold { score: 0.0, text: dictation.to_string() })?;
    if score < threshold {
        return Err(GenerateError::BelowThreshold {
            score,
            text: dictation.to_string(),
        });
    }
    Ok((&corpus[i], score))
}

/// Index of the template line closest to `normal_description`. When the
/// template has a section for `organ`, only that section is searched.
pub fn locate_normal_sentence(
    template: &NormalReportTemplate,
    normal_description: &str,
    organ: Option<&str>,
    bleu: &BleuConfig,
    threshold: f64,
) -> Result<(usize, f64), GenerateError> {
    let organ = organ.map(str::to_lowercase).filter(|o| template.has_organ(o));
    let mut best: Option<(usize, f64)> = None;
    for (i, line) in template.sentences.iter().enumerate() {
        if line.text.trim().is_empty() {
            continue;
        }
        if organ.is_some() && line.organ != organ {
            continue;
        }
        let s = bleu_text(line.text.trim(), normal_description, bleu);
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    match best {
        Some((i, s)) if s >= threshold => Ok((i, s)),
        other => Err(GenerateError::BelowThreshold {
            score: other.map_or(0.0, |b| b.1),
            text: normal_description.to_string(),
        }),
    }
}

/// Replaces template lines in place. Several texts for the same line are
/// joined with a space in the order given.
pub fn assemble_report(template: &NormalReportTemplate, replacements: &[(usize, String)]) -> Result<String, GenerateError> {
    let mut slots: Vec<Option<String>> = vec![None; template.sentences.len()];
    for (i, text) in replacements {
        let slot = slots.get_mut(*i).ok_or(GenerateError::BadIndex(*i))?;
        match slot {
            Some(existing) => {
                log::warn!("two descriptions replace template line {i}; concatenating");
                existing.push(' ');
                existing.push_str(text);
            }
            None => *slot = Some(text.clone()),
        }
    }
    let mut out = String::new();
    for (line, rep) in template.sentences.iter().zip(slots) {
        match rep {
            Some(r) => {
                // keep the line's indentation
                let indent = &line.text[..line.text.len() - line.text.trim_start().len()];
                out.push_str(indent);
                out.push_str(&r);
            }
            None => out.push_str(&line.text),
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const T: &str = "USG ABDOMEN\n\n#organ: liver\nLiver is normal in size and echotexture.\nNo evidence of focal or diffuse lesion is seen.\n#organ: pancreas\nPancreas is normal in size and echotexture.\nNo evidence of focal or diffuse lesion is seen.\n#organ:\nIMPRESSION: Normal study.\n";

    #[test]
    fn template_parse_and_identity() {
        let t = NormalReportTemplate::parse(T);
        assert_eq!(t.title, "USG ABDOMEN");
        assert_eq!(t.sentences.len(), 7);
        assert_eq!(t.sentences[4].organ.as_deref(), Some("pancreas"));
        assert_eq!(t.sentences[6].organ, None);
        assert_eq!(assemble_report(&t, &[]).unwrap(), t.render());
    }

    #[test]
    fn organ_disambiguates_duplicates() {
        let t = NormalReportTemplate::parse(T);
        let b = BleuConfig::default();
        let s = "No evidence of focal or diffuse lesion is seen.";
        assert_eq!(locate_normal_sentence(&t, s, Some("pancreas"), &b, 0.3).unwrap(), (5, 1.0));
        assert_eq!(locate_normal_sentence(&t, s, Some("Liver"), &b, 0.3).unwrap(), (3, 1.0));
        // no section for the organ: earliest best line overall
        assert_eq!(locate_normal_sentence(&t, s, Some("spleen"), &b, 0.3).unwrap().0, 3);
    }

    #[test]
    fn collisions_concatenate() {
        let t = NormalReportTemplate::parse(T);
        let r = assemble_report(&t, &[(5, "A.".into()), (5, "B.".into())]).unwrap();
        assert!(r.contains("\nA. B.\n"));
        assert!(assemble_report(&t, &[(70, "x".into())]).is_err());
    }

    #[test]
    fn corpus_matching() {
        let c = parse_parallel_corpus("Acute pancreatitis\tPancreas is normal in size and echotexture.\nChronic pancreatitis\tPancreas is normal in size and echotexture.\n").unwrap();
        let b = BleuConfig::default();
        let (e, s) = match_dictation("Acute pancreatitis", &c, &b, 0.3).unwrap();
        assert_eq!((e.dictation.as_str(), s), ("Acute pancreatitis", 1.0));
        assert!(matches!(match_dictation("zzz qqq", &c, &b, 0.3), Err(GenerateError::BelowThreshold { .. })));
    }
}
