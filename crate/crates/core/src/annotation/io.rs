//! Ten-column tab-separated annotation format:
//!
//! `SENT_ID INDEX TEXT LEMMA POS SUPERSENSE HEAD DEP_LABEL CHUNK_ID CHUNK_ROOT_FLAG`
//!
//! One token per row and a blank line between sentences. `_` marks an
//! absent supersense or chunk id; the root flag is `R` or `_`.

use std::path::Path;

use super::{AnnotatedSentence, AnnotationError, NounChunk, Pos, Token};

const COLUMNS: usize = 10;

struct Row {
    line: usize,
    sent_id: String,
    token: Token,
    chunk_id: Option<String>,
    chunk_root: bool,
}

pub fn load_annotations(path: &Path) -> Result<Vec<AnnotatedSentence>, AnnotationError> {
    let text = std::fs::read_to_string(path).map_err(|e| AnnotationError::Parse {
        line: 0,
        reason: format!("{}: {e}", path.display()),
    })?;
    parse_annotations(&text)
}

pub fn parse_annotations(text: &str) -> Result<Vec<AnnotatedSentence>, AnnotationError> {
    let mut sentences = Vec::new();
    let mut block: Vec<Row> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            if !block.is_empty() {
                sentences.push(build(std::mem::take(&mut block))?);
            }
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        block.push(parse_row(line_no, line)?);
    }
    if !block.is_empty() {
        sentences.push(build(block)?);
    }
    Ok(sentences)
}

fn parse_row(line: usize, text: &str) -> Result<Row, AnnotationError> {
    let cols: Vec<&str> = text.split('\t').collect();
    let err = |reason: String| AnnotationError::Parse { line, reason };
    if cols.len() != COLUMNS {
        return Err(err(format!("expected {COLUMNS} columns, found {}", cols.len())));
    }
    let index: usize = cols[1]
        .parse()
        .map_err(|_| err(format!("bad token index `{}`", cols[1])))?;
    let head: usize = cols[6]
        .parse()
        .map_err(|_| err(format!("bad head index `{}`", cols[6])))?;
    let opt = |s: &str| (s != "_" && !s.is_empty()).then(|| s.to_string());
    let chunk_root = match cols[9] {
        "R" => true,
        "_" => false,
        other => return Err(err(format!("bad chunk root flag `{other}`"))),
    };
    Ok(Row {
        line,
        sent_id: cols[0].to_string(),
        token: Token {
            index,
            text: cols[2].to_string(),
            lemma: cols[3].to_string(),
            pos: cols[4].parse().unwrap_or(Pos::Other(cols[4].to_string())),
            supersense: opt(cols[5]),
            head,
            dep_label: cols[7].to_string(),
        },
        chunk_id: opt(cols[8]),
        chunk_root,
    })
}

fn build(rows: Vec<Row>) -> Result<AnnotatedSentence, AnnotationError> {
    let sentence_id = rows[0].sent_id.clone();
    let n = rows.len();
    let mut tokens = Vec::with_capacity(n);
    let mut chunks: Vec<NounChunk> = Vec::new();
    let mut open: Option<(String, usize, Option<usize>)> = None;
    let mut closed_ids: Vec<String> = Vec::new();

    let close = |open: &mut Option<(String, usize, Option<usize>)>,
                 end: usize,
                 line: usize,
                 chunks: &mut Vec<NounChunk>,
                 closed: &mut Vec<String>|
     -> Result<(), AnnotationError> {
        if let Some((id, start, root)) = open.take() {
            let root = root.ok_or_else(|| AnnotationError::Parse {
                line,
                reason: format!("chunk `{id}` has no root flag"),
            })?;
            chunks.push(NounChunk { start, end, root });
            closed.push(id);
        }
        Ok(())
    };

    for (pos, row) in rows.into_iter().enumerate() {
        let err = |reason: String| AnnotationError::Parse { line: row.line, reason };
        if row.sent_id != sentence_id {
            return Err(err(format!(
                "sentence id `{}` inside block of `{sentence_id}` (missing blank line?)",
                row.sent_id
            )));
        }
        if row.token.index != pos {
            return Err(err(format!("token index {} where {pos} expected", row.token.index)));
        }
        if row.token.head >= n {
            return Err(err(format!("head {} out of range for {n} tokens", row.token.head)));
        }
        let same_chunk = matches!((&open, &row.chunk_id), (Some((a, _, _)), Some(b)) if a == b);
        if !same_chunk {
            close(&mut open, pos, row.line, &mut chunks, &mut closed_ids)?;
            if let Some(id) = &row.chunk_id {
                if closed_ids.contains(id) {
                    return Err(err(format!("chunk `{id}` is not contiguous")));
                }
                open = Some((id.clone(), pos, None));
            }
        }
        if row.chunk_root {
            match &mut open {
                Some((id, _, root)) => {
                    if root.is_some() {
                        return Err(err(format!("chunk `{id}` has two roots")));
                    }
                    *root = Some(pos);
                }
                None => return Err(err("root flag outside a chunk".into())),
            }
        }
        tokens.push(row.token);
    }
    close(&mut open, n, 0, &mut chunks, &mut closed_ids)?;

    let sentence = AnnotatedSentence {
        sentence_id,
        tokens,
        chunks,
    };
    match sentence.validate() {
        Ok(()) => Ok(sentence),
        Err(AnnotationError::Invalid { reason, .. }) => Err(AnnotationError::Parse { line: 0, reason }),
        Err(e) => Err(e),
    }
}

/// Writes sentences in the ten-column format; chunk ids are numbered per sentence.
pub fn serialize_annotations(sentences: &[AnnotatedSentence]) -> String {
    let mut out = String::new();
    for (si, s) in sentences.iter().enumerate() {
        if si > 0 {
            out.push('\n');
        }
        for t in &s.tokens {
            let chunk = s.chunks.iter().position(|c| c.contains(t.index));
            let root_flag = chunk.is_some_and(|c| s.chunks[c].root == t.index);
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                s.sentence_id,
                t.index,
                t.text,
                t.lemma,
                t.pos,
                t.supersense.as_deref().unwrap_or("_"),
                t.head,
                t.dep_label,
                chunk.map_or("_".to_string(), |c| c.to_string()),
                if root_flag { "R" } else { "_" },
            ));
        }
    }
    out
}
