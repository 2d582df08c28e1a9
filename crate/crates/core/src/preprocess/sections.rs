use std::fmt;
use std::str::FromStr;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::PreprocessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanType {
    Ultrasound,
    Ct,
    Mri,
    Xray,
}

impl FromStr for ScanType {
    type Err = PreprocessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ultrasound" | "us" | "usg" => Ok(ScanType::Ultrasound),
            "ct" => Ok(ScanType::Ct),
            "mri" | "mr" => Ok(ScanType::Mri),
            "xray" | "x-ray" => Ok(ScanType::Xray),
            other => Err(PreprocessError::Config(format!("unknown scan type `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawReport {
    pub report_id: String,
    pub body: String,
    pub scan_type: ScanType,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SectionClass {
    Header,
    History,
    Findings,
    Impression,
}

impl FromStr for SectionClass {
    type Err = PreprocessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "header" => Ok(SectionClass::Header),
            "history" => Ok(SectionClass::History),
            "findings" => Ok(SectionClass::Findings),
            "impression" => Ok(SectionClass::Impression),
            other => Err(PreprocessError::Config(format!("unknown section `{other}`"))),
        }
    }
}

impl fmt::Display for SectionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SectionClass::Header => "header",
            SectionClass::History => "history",
            SectionClass::Findings => "findings",
            SectionClass::Impression => "impression",
        };
        f.write_str(s)
    }
}

/// A case-insensitive header matcher.
#[derive(Debug, Clone)]
pub struct SectionPattern {
    pub class: SectionClass,
    pub regex: Regex,
}

impl SectionPattern {
    pub fn new(class: SectionClass, pattern: &str) -> Result<Self, PreprocessError> {
        let regex = Regex::new(&format!("(?i){pattern}"))
            .map_err(|e| PreprocessError::Config(format!("bad section pattern `{pattern}`: {e}")))?;
        Ok(SectionPattern { class, regex })
    }
}

/// Parses `section_name<TAB>pattern` lines; `#` starts a comment.
pub fn parse_section_patterns(text: &str) -> Result<Vec<SectionPattern>, PreprocessError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let (name, pattern) = line.split_once('\t').ok_or_else(|| {
            PreprocessError::Config(format!("section pattern line {}: expected two columns", n + 1))
        })?;
        out.push(SectionPattern::new(name.parse()?, pattern.trim())?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReportSections {
    pub header: String,
    pub history: String,
    pub findings: String,
    pub impression: String,
}

impl ReportSections {
    /// Findings followed by impression: the only text forwarded downstream.
    pub fn forwarded(&self) -> Vec<&str> {
        [self.findings.as_str(), self.impression.as_str()]
            .into_iter()
            .filter(|s| !s.is_empty())
            .collect()
    }
}

/// Splits a report body into sections at header matches.
pub fn segment_report(
    report: &RawReport,
    patterns: &[SectionPattern],
) -> Result<ReportSections, PreprocessError> {
    if patterns.is_empty() {
        return Err(PreprocessError::Config("no section patterns configured".into()));
    }
    let body = report.body.as_str();
    let mut hits: Vec<(usize, usize, usize, SectionClass)> = Vec::new();
    for (order, p) in patterns.iter().enumerate() {
        for m in p.regex.find_iter(body) {
            if m.start() < m.end() {
                hits.push((m.start(), m.end(), order, p.class));
            }
        }
    }
    hits.sort();
    let mut headers: Vec<(usize, usize, SectionClass)> = Vec::new();
    for (start, end, _, class) in hits {
        if headers.last().is_some_and(|&(_, e, _)| start < e) {
            continue;
        }
        headers.push((start, end, class));
    }
    if !headers
        .iter()
        .any(|h| matches!(h.2, SectionClass::Findings | SectionClass::Impression))
    {
        return Err(PreprocessError::NoFindingsSection(report.report_id.clone()));
    }

    let mut sections = ReportSections::default();
    append(&mut sections.header, &body[..headers[0].0]);
    for (i, &(_, end, class)) in headers.iter().enumerate() {
        let stop = headers.get(i + 1).map_or(body.len(), |h| h.0);
        let text = &body[end..stop];
        let slot = match class {
            SectionClass::Header => &mut sections.header,
            SectionClass::History => &mut sections.history,
            SectionClass::Findings => &mut sections.findings,
            SectionClass::Impression => &mut sections.impression,
        };
        append(slot, text);
    }
    Ok(sections)
}

fn append(slot: &mut String, text: &str) {
    let t = text.trim();
    if t.is_empty() {
        return;
    }
    if !slot.is_empty() {
        slot.push(' ');
    }
    slot.push_str(t);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn patterns() -> Vec<SectionPattern> {
        parse_section_patterns(
            "findings\t\\bfindings\\s*:\nfindings\t\\bobservations?\\s*:\nimpression\t\\bimpression\\s*:\nhistory\t\\bhistory\\s*:\n",
        )
        .unwrap()
    }

    fn report(body: &str) -> RawReport {
        RawReport {
            report_id: "r1".into(),
            body: body.into(),
            scan_type: ScanType::Ultrasound,
        }
    }

    #[test]
    fn single_header_per_section() {
        let s = segment_report(&report("FINDINGS: Liver is normal. IMPRESSION: Normal study."), &patterns()).unwrap();
        assert_eq!(s.findings, "Liver is normal.");
        assert_eq!(s.impression, "Normal study.");
        assert!(s.header.is_empty());
    }

    #[test]
    fn impression_only() {
        let s = segment_report(&report("Patient: X\nImpression: Fatty liver."), &patterns()).unwrap();
        assert!(s.findings.is_empty());
        assert_eq!(s.impression, "Fatty liver.");
        assert_eq!(s.header, "Patient: X");
    }

    #[test]
    fn missing_findings_is_an_error() {
        let err = segment_report(&report("History: pain."), &patterns()).unwrap_err();
        assert!(matches!(err, PreprocessError::NoFindingsSection(id) if id == "r1"));
    }

    #[test]
    fn empty_pattern_list_rejected() {
        assert!(segment_report(&report("FINDINGS: x"), &[]).is_err());
    }
}
