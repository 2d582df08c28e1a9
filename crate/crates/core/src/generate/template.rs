//! Description templates: `finding_type<TAB>skeleton`.
//!
//! A skeleton holds `{slot}` references. A `[...]` group is optional and is
//! dropped whole when any slot inside it is empty; slots outside groups are
//! required.

use std::collections::{BTreeMap, BTreeSet};

use super::GenerateError;

pub const SLOTS: &[&str] = &[
    "organ",
    "anatomy_chain",
    "size_phrase",
    "measurements",
    "observations",
    "properties",
    "finding",
];

#[derive(Debug, Clone, PartialEq, Eq)]
enum Piece {
    Text(String),
    Slot(String),
    Group(Vec<Piece>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescriptionTemplate {
    pub finding_type: String,
    pub skeleton: String,
    pub required_slots: BTreeSet<String>,
    pub optional_slots: BTreeSet<String>,
    pieces: Vec<Piece>,
}

fn parse_pieces(skeleton: &str) -> Result<Vec<Piece>, String> {
    let mut top: Vec<Piece> = Vec::new();
    let mut group: Option<Vec<Piece>> = None;
    let mut text = String::new();
    let mut chars = skeleton.chars();
    let flush = |text: &mut String, out: &mut Vec<Piece>| {
        if !text.is_empty() {
            out.push(Piece::Text(std::mem::take(text)));
        }
    };
    while let Some(c) = chars.next() {
        match c {
            '{' => {
                let out = group.as_mut().unwrap_or(&mut top);
                flush(&mut text, out);
                let name: String = chars.by_ref().take_while(|&c| c != '}').collect();
                if !SLOTS.contains(&name.as_str()) {
                    return Err(format!("unknown slot `{{{name}}}`"));
                }
                out.push(Piece::Slot(name));
            }
            '}' => return Err("unmatched `}`".into()),
            '[' => {
                if group.is_some() {
                    return Err("nested `[`".into());
                }
                flush(&mut text, &mut top);
                group = Some(Vec::new());
            }
            ']' => {
                let mut g = group.take().ok_or("unmatched `]`")?;
                flush(&mut text, &mut g);
                top.push(Piece::Group(g));
            }
            c => text.push(c),
        }
    }
    if group.is_some() {
        return Err("unclosed `[`".into());
    }
    flush(&mut text, &mut top);
    Ok(top)
}

fn slots_in(pieces: &[Piece], out: &mut BTreeSet<String>) {
    for p in pieces {
        if let Piece::Slot(s) = p {
            out.insert(s.clone());
        }
    }
}

impl DescriptionTemplate {
    pub fn parse(finding_type: &str, skeleton: &str) -> Result<Self, String> {
        let pieces = parse_pieces(skeleton)?;
        let mut required = BTreeSet::new();
        let mut optional = BTreeSet::new();
        slots_in(&pieces, &mut required);
        for p in &pieces {
            if let Piece::Group(g) = p {
                slots_in(g, &mut optional);
            }
        }
        optional.retain(|s| !required.contains(s));
        Ok(DescriptionTemplate {
            finding_type: template_key(finding_type),
            skeleton: skeleton.to_string(),
            required_slots: required,
            optional_slots: optional,
            pieces,
        })
    }

    /// Fills the skeleton. Empty or absent values count as unfilled.
    pub fn render(&self, values: &BTreeMap<&str, String>) -> Result<String, GenerateError> {
        let get = |s: &str| values.get(s).filter(|v| !v.trim().is_empty());
        let mut out = String::new();
        for p in &self.pieces {
            match p {
                Piece::Text(t) => out.push_str(t),
                Piece::Slot(s) => out.push_str(get(s).ok_or_else(|| GenerateError::MissingRequiredSlot(s.clone()))?),
                Piece::Group(g) => {
                    let filled = g.iter().all(|q| !matches!(q, Piece::Slot(s) if get(s).is_none()));
                    if filled {
                        for q in g {
                            match q {
                                Piece::Text(t) => out.push_str(t),
                                Piece::Slot(s) => out.push_str(get(s).unwrap()),
                                Piece::Group(_) => unreachable!("groups do not nest"),
                            }
                        }
                    }
                }
            }
        }
        Ok(capitalize(out.trim()))
    }
}

pub(crate) fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Lookup key for finding types and ontology classes: lowercase alphanumerics.
pub fn template_key(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .collect::<String>()
        .to_ascii_lowercase()
}

#[derive(Debug, Clone, Default)]
pub struct TemplateSet {
    templates: BTreeMap<String, DescriptionTemplate>,
}

impl TemplateSet {
    pub fn get(&self, finding_type: &str) -> Option<&DescriptionTemplate> {
        self.templates.get(&template_key(finding_type))
    }

    pub fn insert(&mut self, t: DescriptionTemplate) {
        self.templates.insert(t.finding_type.clone(), t);
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }
}

pub fn parse_templates(text: &str) -> Result<TemplateSet, GenerateError> {
    let mut set = TemplateSet::default();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |reason: String| GenerateError::Syntax { line: n + 1, reason };
        let (kind, skeleton) = line.split_once('\t').ok_or_else(|| err("expected `finding_type<TAB>skeleton`".into()))?;
        let t = DescriptionTemplate::parse(kind.trim(), skeleton.trim()).map_err(err)?;
        if set.get(&t.finding_type).is_some() {
            return Err(err(format!("duplicate template `{}`", kind.trim())));
        }
        set.insert(t);
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optional_group_elided() {
        let t = DescriptionTemplate::parse("cyst", "There is evidence of {finding}[ measuring {measurements}] noted in the {anatomy_chain}.").unwrap();
        assert_eq!(t.required_slots, BTreeSet::from(["finding".to_string(), "anatomy_chain".to_string()]));
        assert_eq!(t.optional_slots, BTreeSet::from(["measurements".to_string()]));
        let mut v = BTreeMap::from([("finding", "simple cyst".to_string()), ("anatomy_chain", "right lobe of liver".to_string())]);
        assert_eq!(t.render(&v).unwrap(), "There is evidence of simple cyst noted in the right lobe of liver.");
        v.insert("measurements", "2 cm".into());
        assert_eq!(t.render(&v).unwrap(), "There is evidence of simple cyst measuring 2 cm noted in the right lobe of liver.");
        v.remove("anatomy_chain");
        assert!(matches!(t.render(&v), Err(GenerateError::MissingRequiredSlot(s)) if s == "anatomy_chain"));
    }

    #[test]
    fn syntax_errors() {
        assert!(DescriptionTemplate::parse("x", "{nope}").is_err());
        assert!(DescriptionTemplate::parse("x", "[a [b]]").is_err());
        assert!(DescriptionTemplate::parse("x", "[a").is_err());
        assert!(matches!(parse_templates("cyst\t{finding}\ncyst\t{finding}\n"), Err(GenerateError::Syntax { line: 2, .. })));
    }
}
