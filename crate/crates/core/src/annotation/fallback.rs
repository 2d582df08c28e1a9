//! Lexicon-driven annotator with a shallow attachment grammar.
//!
//! Stands in for an external tagger/parser on telegraphic report
//! sentences. POS comes from the lexicon, then closed-class word lists,
//! then suffixes and context. Noun chunks are maximal ADJ/NOUN/NUM runs
//! ending in a noun. Attachment:
//!
//! * the first chunk of a clause before its verb is `nsubj`
//! * a preposition attaches (`prep`) to the nearest noun or verb on its
//!   left; a non-`of` preposition after an `of` phrase attaches to the head
//!   of that phrase instead
//! * the chunk after a preposition is its `pobj`
//! * `A, B and C` conjuncts attach (`conj`) to the first conjunct
//! * a bare adjective after a verb is its `acomp`
//! * remaining chunks are `dobj` of the nearest verb on their left

use crate::lexicon::{Lexicon, SupersenseLexicon};
use crate::ontology::CoarseCategory;
use crate::text::{has_digit, is_punct, is_unit, tokenize};

use super::{AnnotatedSentence, NounChunk, Pos, Token};

const DETERMINERS: &[&str] = &[
    "a", "an", "the", "this", "these", "that", "those", "no", "any", "some", "both", "each",
    "another", "its",
];
const PREPOSITIONS: &[&str] = &[
    "in", "of", "at", "with", "within", "on", "from", "to", "for", "by", "along", "into", "near",
    "over", "under", "without", "involving", "between", "through", "across", "around", "from",
];
const VERBS: &[&str] = &[
    "is", "are", "was", "were", "be", "been", "noted", "seen", "shows", "show", "showing",
    "appears", "appear", "measures", "measuring", "measured", "visualized", "visualised",
    "identified", "observed", "demonstrated", "reveals", "revealed", "contains", "has", "have",
    "having", "suggests", "represents", "extends", "extending",
];
const COPULAS: &[&str] = &["is", "are", "was", "were", "be", "been"];
const CONJUNCTIONS: &[&str] = &["and", "or", "but"];
const PRONOUNS: &[&str] = &["there", "it", "they"];
const PARTICLES: &[&str] = &["not"];
const MEASURE_WORDS: &[&str] = &["vol", "volume", "x"];
const ADJ_SUFFIXES: &[&str] = &["al", "ous", "ic", "ive", "ular", "oid", "ile"];
const NOUN_SUFFIXES: &[&str] = &[
    "tion", "sion", "ity", "ness", "ment", "osis", "itis", "oma", "ism", "ure", "ence", "ance",
];

/// Deterministic annotator over a lexicon and preposition sense table.
pub struct FallbackAnnotator<'a> {
    pub lexicon: &'a Lexicon,
    pub senses: &'a SupersenseLexicon,
}

#[derive(Debug, Clone, Copy)]
enum Unit {
    Chunk(NounChunk),
    Tok(usize),
}

impl Unit {
    fn rep(&self) -> usize {
        match self {
            Unit::Chunk(c) => c.root,
            Unit::Tok(t) => *t,
        }
    }
}

impl<'a> FallbackAnnotator<'a> {
    pub fn new(lexicon: &'a Lexicon, senses: &'a SupersenseLexicon) -> Self {
        FallbackAnnotator { lexicon, senses }
    }

    pub fn annotate(&self, sentence_id: &str, sentence: &str) -> AnnotatedSentence {
        let words = tokenize(sentence);
        if words.is_empty() {
            return AnnotatedSentence {
                sentence_id: sentence_id.to_string(),
                tokens: vec![Token {
                    index: 0,
                    text: String::new(),
                    lemma: String::new(),
                    pos: Pos::Punct,
                    supersense: None,
                    head: 0,
                    dep_label: "root".into(),
                }],
                chunks: vec![],
            };
        }
        let lower: Vec<String> = words.iter().map(|w| w.to_lowercase()).collect();
        let pos = self.tag(&lower);
        let chunks = chunk(&pos, &lower);
        let units = units(&chunks, pos.len());
        let (heads, deps) = attach(&units, &pos, &lower);

        let mut tokens: Vec<Token> = words
            .iter()
            .enumerate()
            .map(|(i, w)| Token {
                index: i,
                text: w.clone(),
                lemma: lower[i].clone(),
                pos: pos[i].clone(),
                supersense: (pos[i] == Pos::Adp)
                    .then(|| self.senses.default_sense(&lower[i]).map(str::to_string))
                    .flatten(),
                head: i,
                dep_label: String::new(),
            })
            .collect();
        for (u, unit) in units.iter().enumerate() {
            let rep = unit.rep();
            match heads[u] {
                Some(h) => tokens[rep].head = units[h].rep(),
                None => tokens[rep].head = rep,
            }
            tokens[rep].dep_label = deps[u].clone();
            if let Unit::Chunk(c) = unit {
                for t in c.start..c.end {
                    if t == c.root {
                        continue;
                    }
                    tokens[t].head = c.root;
                    tokens[t].dep_label = match tokens[t].pos {
                        Pos::Adj => "amod",
                        Pos::Noun | Pos::Propn => "compound",
                        Pos::Num => "nummod",
                        Pos::Cconj => "cc",
                        Pos::Punct => "punct",
                        _ => "dep",
                    }
                    .to_string();
                }
            }
        }
        let mut sentence = AnnotatedSentence {
            sentence_id: sentence_id.to_string(),
            tokens,
            chunks,
        };
        if sentence.validate().is_err() {
            flatten(&mut sentence);
        }
        sentence
    }

    fn tag(&self, lower: &[String]) -> Vec<Pos> {
        let n = lower.len();
        let mut pos: Vec<Option<Pos>> = vec![None; n];
        for (span, entry) in self.lexicon.longest_match(lower) {
            if span.len() == 1 && is_closed_class(&lower[span.start]) {
                continue;
            }
            let p = if entry.category == CoarseCategory::Modifier {
                Pos::Adj
            } else {
                Pos::Noun
            };
            for i in span {
                pos[i] = Some(p.clone());
            }
        }
        for i in 0..n {
            if pos[i].is_some() {
                continue;
            }
            let w = lower[i].as_str();
            pos[i] = if is_punct(w) {
                Some(Pos::Punct)
            } else if has_digit(w)
                || is_unit(w)
                || (MEASURE_WORDS.contains(&w) && lower.get(i + 1).is_some_and(|x| has_digit(x)))
            {
                Some(Pos::Num)
            } else if DETERMINERS.contains(&w) {
                Some(Pos::Det)
            } else if PREPOSITIONS.contains(&w) {
                Some(Pos::Adp)
            } else if VERBS.contains(&w) {
                Some(Pos::Verb)
            } else if CONJUNCTIONS.contains(&w) {
                Some(Pos::Cconj)
            } else if PRONOUNS.contains(&w) {
                Some(Pos::Pron)
            } else if PARTICLES.contains(&w) {
                Some(Pos::Part)
            } else if w.ends_with("ly") && w.len() > 4 {
                Some(Pos::Adv)
            } else if ADJ_SUFFIXES.iter().any(|s| w.ends_with(s) && w.len() > s.len() + 2) {
                Some(Pos::Adj)
            } else if NOUN_SUFFIXES.iter().any(|s| w.ends_with(s) && w.len() > s.len() + 2) {
                Some(Pos::Noun)
            } else {
                None
            };
        }
        // unknown words: adjective before a nominal, noun otherwise
        for i in (0..n).rev() {
            if pos[i].is_none() {
                let next_nominal = matches!(pos.get(i + 1), Some(Some(Pos::Noun | Pos::Adj)));
                pos[i] = Some(if next_nominal { Pos::Adj } else { Pos::Noun });
            }
        }
        let mut pos: Vec<Pos> = pos.into_iter().map(Option::unwrap).collect();
        for i in 0..n {
            if pos[i] == Pos::Verb && COPULAS.contains(&lower[i].as_str()) {
                let next = (i + 1..n).find(|&j| !matches!(pos[j], Pos::Adv | Pos::Part));
                if next.is_some_and(|j| pos[j] == Pos::Verb) {
                    pos[i] = Pos::Aux;
                }
            }
        }
        pos
    }
}

fn is_closed_class(w: &str) -> bool {
    DETERMINERS.contains(&w) || PREPOSITIONS.contains(&w) || VERBS.contains(&w) || CONJUNCTIONS.contains(&w)
}

fn is_separator(pos: &Pos, w: &str) -> bool {
    *pos == Pos::Cconj || w == ","
}

fn chunk(pos: &[Pos], lower: &[String]) -> Vec<NounChunk> {
    let n = pos.len();
    let in_run = |i: usize| matches!(pos[i], Pos::Adj | Pos::Noun | Pos::Propn | Pos::Num);
    let mut chunks = Vec::new();
    let mut i = 0;
    while i < n {
        if !in_run(i) {
            i += 1;
            continue;
        }
        let start = i;
        let mut j = i;
        loop {
            if j + 1 < n && in_run(j + 1) {
                j += 1;
                continue;
            }
            // "focal or diffuse lesion": a separator between adjectives stays inside
            if j + 2 < n && pos[j] == Pos::Adj && is_separator(&pos[j + 1], &lower[j + 1]) && pos[j + 2] == Pos::Adj {
                j += 2;
                continue;
            }
            break;
        }
        let last_noun = (start..=j).rev().find(|&k| pos[k].is_nominal());
        match last_noun {
            Some(root) => {
                chunks.push(NounChunk {
                    start,
                    end: root + 1,
                    root,
                });
                i = root + 1;
            }
            None => i = j + 1,
        }
    }
    chunks
}

fn units(chunks: &[NounChunk], n: usize) -> Vec<Unit> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        if let Some(c) = chunks.iter().find(|c| c.start == i) {
            out.push(Unit::Chunk(*c));
            i = c.end;
        } else {
            out.push(Unit::Tok(i));
            i += 1;
        }
    }
    out
}

fn attach(units: &[Unit], pos: &[Pos], lower: &[String]) -> (Vec<Option<usize>>, Vec<String>) {
    let m = units.len();
    let upos = |u: usize| &pos[units[u].rep()];
    let word = |u: usize| lower[units[u].rep()].as_str();
    let is_chunk = |u: usize| matches!(units[u], Unit::Chunk(_));
    let is_nounish = |u: usize| is_chunk(u) || upos(u).is_nominal();

    let verbs: Vec<usize> = (0..m).filter(|&u| *upos(u) == Pos::Verb).collect();
    let root = verbs
        .first()
        .copied()
        .or_else(|| (0..m).find(|&u| is_chunk(u)))
        .or_else(|| (0..m).find(|&u| *upos(u) != Pos::Punct))
        .unwrap_or(0);

    let mut head: Vec<Option<usize>> = vec![None; m];
    let mut dep: Vec<String> = vec![String::new(); m];
    let mut done = vec![false; m];
    done[root] = true;
    dep[root] = "root".into();
    let set = |u: usize, h: usize, d: &str, head: &mut Vec<Option<usize>>, dep: &mut Vec<String>, done: &mut Vec<bool>| {
        if !done[u] && u != h {
            head[u] = Some(h);
            dep[u] = d.to_string();
            done[u] = true;
        }
    };

    for &v in verbs.iter().skip(1) {
        set(v, root, "conj", &mut head, &mut dep, &mut done);
    }
    for u in 0..m {
        if *upos(u) == Pos::Aux {
            if let Some(&v) = verbs.iter().find(|&&v| v > u) {
                set(u, v, "aux", &mut head, &mut dep, &mut done);
            }
        }
    }

    // the unit governing u once determiners and stray numbers are skipped
    let skip_back = |u: usize| -> Option<usize> {
        let mut k = u;
        while k > 0 {
            k -= 1;
            if !matches!(upos(k), Pos::Det | Pos::Num | Pos::Adv) || is_chunk(k) {
                return Some(k);
            }
        }
        None
    };

    // subjects
    let mut prev_verb: Option<usize> = None;
    for &v in &verbs {
        let from = prev_verb.map_or(0, |p| p + 1);
        let subject = (from..v).find(|&u| {
            is_chunk(u) && !done[u] && skip_back(u).is_none_or(|k| *upos(k) != Pos::Adp)
        });
        if let Some(s) = subject {
            set(s, v, "nsubj", &mut head, &mut dep, &mut done);
        }
        prev_verb = Some(v);
    }

    // prepositions and their objects, left to right
    for u in 0..m {
        if *upos(u) != Pos::Adp || done[u] {
            continue;
        }
        let mut target = (0..u).rev().find(|&k| is_nounish(k) || *upos(k) == Pos::Verb);
        if word(u) != "of" {
            while let Some(t) = target {
                match head[t] {
                    Some(h) if dep[t] == "pobj" && word(h) == "of" => target = head[h],
                    _ => break,
                }
            }
        }
        set(u, target.unwrap_or(root), "prep", &mut head, &mut dep, &mut done);
        let obj = (u + 1..m).find(|&k| !matches!(upos(k), Pos::Det | Pos::Adv) || is_chunk(k));
        if let Some(o) = obj.filter(|&o| is_nounish(o) || *upos(o) == Pos::Pron) {
            set(o, u, "pobj", &mut head, &mut dep, &mut done);
        }
    }

    // coordination
    for u in 0..m {
        if !is_chunk(u) || done[u] {
            continue;
        }
        let Some(sep) = skip_back(u) else { continue };
        if !is_separator(upos(sep), word(sep)) || sep == 0 {
            continue;
        }
        let Some(prev) = skip_back(sep).filter(|&p| is_chunk(p) && done[p]) else {
            continue;
        };
        let first = if dep[prev] == "conj" { head[prev].unwrap_or(prev) } else { prev };
        set(u, first, "conj", &mut head, &mut dep, &mut done);
        let label = if *upos(sep) == Pos::Cconj { "cc" } else { "punct" };
        set(sep, u, label, &mut head, &mut dep, &mut done);
    }

    for u in 0..m {
        if done[u] {
            continue;
        }
        let prev_verb = verbs.iter().rev().find(|&&v| v < u).copied();
        match upos(u) {
            Pos::Adj => match prev_verb {
                Some(v) => set(u, v, "acomp", &mut head, &mut dep, &mut done),
                None => set(u, root, "amod", &mut head, &mut dep, &mut done),
            },
            _ if is_chunk(u) => match prev_verb.or(verbs.first().copied()) {
                Some(v) => set(u, v, "dobj", &mut head, &mut dep, &mut done),
                None => set(u, root, "dep", &mut head, &mut dep, &mut done),
            },
            Pos::Det => {
                let next = (u + 1..m).find(|&k| is_nounish(k));
                set(u, next.unwrap_or(root), "det", &mut head, &mut dep, &mut done);
            }
            Pos::Num => {
                let h = if u > 0 && is_chunk(u - 1) { Some(u - 1) } else { prev_verb };
                set(u, h.unwrap_or(root), "nummod", &mut head, &mut dep, &mut done);
            }
            Pos::Pron => {
                let next_verb = verbs.iter().find(|&&v| v > u).copied();
                set(u, next_verb.unwrap_or(root), "expl", &mut head, &mut dep, &mut done);
            }
            Pos::Adv | Pos::Part => {
                let h = prev_verb.or(verbs.first().copied()).unwrap_or(root);
                set(u, h, if *upos(u) == Pos::Part { "neg" } else { "advmod" }, &mut head, &mut dep, &mut done);
            }
            Pos::Cconj => set(u, root, "cc", &mut head, &mut dep, &mut done),
            Pos::Punct => set(u, root, "punct", &mut head, &mut dep, &mut done),
            _ => set(u, root, "dep", &mut head, &mut dep, &mut done),
        }
    }
    (head, dep)
}

/// Worst case: every token hangs off the root directly.
fn flatten(s: &mut AnnotatedSentence) {
    let root = s
        .tokens
        .iter()
        .position(|t| t.pos == Pos::Verb)
        .unwrap_or(0);
    for t in &mut s.tokens {
        if t.index == root {
            t.head = root;
            t.dep_label = "root".into();
        } else {
            t.head = root;
            t.dep_label = "dep".into();
        }
    }
    s.chunks.retain(|c| c.contains(root) == (c.root == root) || !c.contains(root));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::LexiconSource;

    fn lexicon() -> Lexicon {
        Lexicon::from_sources(&[LexiconSource {
            name: "t".into(),
            text: "lesion\tObservation\nnon-enhancing\tModifier\nright lobe\tAnatomy\nliver\tAnatomy\nincreased\tModifier\nechotexture\tProperty\nacute\tModifier\npancreatitis\tFinding\tinflammation\nright kidney\tAnatomy\nnormal\tModifier\nsize\tProperty\nshape\tProperty\nlocation\tProperty\nechogenicity\tProperty\ncortical\tModifier\n".into(),
        }])
        .unwrap()
    }

    fn annotate(text: &str) -> AnnotatedSentence {
        let lex = lexicon();
        let senses = SupersenseLexicon::default();
        FallbackAnnotator::new(&lex, &senses).annotate("s", text)
    }

    fn chunk_roots(s: &AnnotatedSentence) -> Vec<&str> {
        s.chunks.iter().map(|c| s.tokens[c.root].text.as_str()).collect()
    }

    fn edge(s: &AnnotatedSentence, dependent: &str) -> (String, String) {
        let t = s.tokens.iter().find(|t| t.text == dependent).unwrap();
        (s.tokens[t.head].text.clone(), t.dep_label.clone())
    }

    #[test]
    fn dependency_tree_of_liver_sentence() {
        let s = annotate("Non-enhancing hypodense lesion noted in right lobe of liver.");
        assert_eq!(chunk_roots(&s), vec!["lesion", "lobe", "liver"]);
        assert_eq!(s.chunks[0], NounChunk { start: 0, end: 3, root: 2 });
        assert_eq!(edge(&s, "lesion"), ("noted".into(), "nsubj".into()));
        assert_eq!(edge(&s, "in"), ("noted".into(), "prep".into()));
        assert_eq!(edge(&s, "lobe"), ("in".into(), "pobj".into()));
        assert_eq!(edge(&s, "of"), ("lobe".into(), "prep".into()));
        assert_eq!(edge(&s, "liver"), ("of".into(), "pobj".into()));
        assert_eq!(s.tokens[4].supersense.as_deref(), Some("Locus"));
        assert_eq!(s.tokens[7].supersense.as_deref(), Some("Whole"));
        assert!(s.tokens[3].is_root());
    }

    #[test]
    fn verbless_dictation() {
        let s = annotate("Acute pancreatitis");
        assert_eq!(chunk_roots(&s), vec!["pancreatitis"]);
        assert!(s.tokens[1].is_root());
    }

    #[test]
    fn lesion_of_increased_echotexture() {
        let s = annotate("A lesion of increased echotexture in the right lobe of liver.");
        assert_eq!(chunk_roots(&s), vec!["lesion", "echotexture", "lobe", "liver"]);
        assert_eq!(edge(&s, "in"), ("lesion".into(), "prep".into()));
        assert!(s.tokens[1].is_root());
    }

    #[test]
    fn coordination_links_to_first_conjunct() {
        let s = annotate("Right kidney is normal in size, shape, location and cortical echogenicity.");
        assert_eq!(chunk_roots(&s), vec!["kidney", "size", "shape", "location", "echogenicity"]);
        assert_eq!(edge(&s, "shape"), ("size".into(), "conj".into()));
        assert_eq!(edge(&s, "location"), ("size".into(), "conj".into()));
        assert_eq!(edge(&s, "echogenicity"), ("size".into(), "conj".into()));
        assert_eq!(edge(&s, "normal"), ("is".into(), "acomp".into()));
    }

    #[test]
    fn deterministic() {
        let a = annotate("A 5 mm calculus is noted in an upper calyx and a 4 x 3 mm calculus is noted in a middle calyx.");
        let b = annotate("A 5 mm calculus is noted in an upper calyx and a 4 x 3 mm calculus is noted in a middle calyx.");
        assert_eq!(a, b);
        assert!(a.validate().is_ok());
    }
}
