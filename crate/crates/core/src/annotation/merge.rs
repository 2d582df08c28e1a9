use super::{AnnotatedSentence, AnnotationError, NounChunk};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Chunk(NounChunk),
    Token(usize),
}

/// One node of the chunk-level tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub kind: NodeKind,
    /// Token whose attributes (POS, dependency label) the node carries.
    pub rep: usize,
    /// Head node; `None` for the root.
    pub head: Option<usize>,
    pub dep_label: String,
}

impl Node {
    pub fn is_chunk(&self) -> bool {
        matches!(self.kind, NodeKind::Chunk(_))
    }

    pub fn tokens(&self) -> std::ops::Range<usize> {
        match self.kind {
            NodeKind::Chunk(c) => c.start..c.end,
            NodeKind::Token(t) => t..t + 1,
        }
    }
}

/// Sentence with every noun chunk collapsed into a single node.
#[derive(Debug, Clone)]
pub struct ChunkedSentence {
    pub sentence: AnnotatedSentence,
    pub nodes: Vec<Node>,
    pub token_node: Vec<usize>,
}

impl ChunkedSentence {
    pub fn root(&self) -> usize {
        self.nodes.iter().position(|n| n.head.is_none()).unwrap_or(0)
    }

    pub fn children(&self, node: usize) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| self.nodes[i].head == Some(node))
            .collect()
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| !self.nodes.iter().any(|n| n.head == Some(i)))
            .collect()
    }

    /// Nodes from `node` up to and including the root.
    pub fn path_to_root(&self, node: usize) -> Vec<usize> {
        let mut path = vec![node];
        let mut cur = node;
        while let Some(h) = self.nodes[cur].head {
            path.push(h);
            cur = h;
        }
        path
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.head.is_some()).count()
    }

    pub fn node_text(&self, node: usize) -> String {
        self.nodes[node]
            .tokens()
            .map(|t| self.sentence.tokens[t].text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Collapses chunks into nodes and re-attaches dependency edges onto them.
/// Edges internal to a chunk disappear.
pub fn merge_chunks(sentence: &AnnotatedSentence) -> Result<ChunkedSentence, AnnotationError> {
    sentence.validate()?;
    let n = sentence.tokens.len();
    let mut token_node = vec![usize::MAX; n];
    let mut nodes: Vec<Node> = Vec::new();
    let mut i = 0;
    while i < n {
        if let Some(c) = sentence.chunks.iter().find(|c| c.start == i) {
            for t in c.start..c.end {
                token_node[t] = nodes.len();
            }
            nodes.push(Node {
                kind: NodeKind::Chunk(*c),
                rep: c.root,
                head: None,
                dep_label: String::new(),
            });
            i = c.end;
        } else {
            token_node[i] = nodes.len();
            nodes.push(Node {
                kind: NodeKind::Token(i),
                rep: i,
                head: None,
                dep_label: String::new(),
            });
            i += 1;
        }
    }

    for idx in 0..nodes.len() {
        let span = nodes[idx].tokens();
        let rep = nodes[idx].rep;
        if span.clone().any(|t| sentence.tokens[t].is_root()) {
            nodes[idx].head = None;
            nodes[idx].dep_label = "root".to_string();
            continue;
        }
        // the chunk root's external edge, else the first external edge of the span
        let external = |t: usize| {
            let h = sentence.tokens[t].head;
            (!span.contains(&h)).then_some((t, h))
        };
        let (from, head_tok) = external(rep)
            .or_else(|| span.clone().find_map(external))
            .expect("a non-root span always has an external edge");
        nodes[idx].head = Some(token_node[head_tok]);
        nodes[idx].dep_label = sentence.tokens[from].dep_label.clone();
    }

    let merged = ChunkedSentence {
        sentence: sentence.clone(),
        nodes,
        token_node,
    };
    let count = merged.nodes.len();
    for start in 0..count {
        let mut cur = start;
        let mut steps = 0;
        while let Some(h) = merged.nodes[cur].head {
            cur = h;
            steps += 1;
            if steps > count {
                return Err(AnnotationError::MergeConflict(sentence.sentence_id.clone()));
            }
        }
    }
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::super::{parse_annotations, Pos, Token};
    use super::*;

    fn liver() -> AnnotatedSentence {
        parse_annotations(
            "s\t0\tNon-enhancing\tnon-enhancing\tADJ\t_\t2\tamod\t0\t_
s\t1\thypodense\thypodense\tADJ\t_\t2\tamod\t0\t_
s\t2\tlesion\tlesion\tNOUN\t_\t3\tnsubj\t0\tR
s\t3\tnoted\tnote\tVERB\t_\t3\troot\t_\t_
s\t4\tin\tin\tADP\tLocus\t3\tprep\t_\t_
s\t5\tright\tright\tADJ\t_\t6\tamod\t1\t_
s\t6\tlobe\tlobe\tNOUN\t_\t4\tpobj\t1\tR
s\t7\tof\tof\tADP\tWhole\t6\tprep\t_\t_
s\t8\tliver\tliver\tNOUN\t_\t7\tpobj\t2\tR
s\t9\t.\t.\tPUNCT\t_\t3\tpunct\t_\t_
",
        )
        .unwrap()
        .remove(0)
    }

    #[test]
    fn merges_liver_example() {
        let s = liver();
        let m = merge_chunks(&s).unwrap();
        // three chunks, noted, in, of, and the full stop
        assert_eq!(m.nodes.len(), 7);
        let texts: Vec<String> = (0..m.nodes.len()).map(|i| m.node_text(i)).collect();
        assert_eq!(texts, vec!["Non-enhancing hypodense lesion", "noted", "in", "right lobe", "of", "liver", "."]);
        assert_eq!(m.nodes[0].head, Some(1));
        assert_eq!(m.nodes[0].dep_label, "nsubj");
        assert_eq!(m.nodes[3].head, Some(2));
        assert_eq!(m.nodes[5].head, Some(4));
        assert_eq!(m.root(), 1);
        assert_eq!(m.node_count_identity(), s.tokens.len());
        assert_eq!(m.edge_count(), m.nodes.len() - 1);
        assert_eq!(m.leaves(), vec![0, 5, 6]);
    }

    impl ChunkedSentence {
        fn node_count_identity(&self) -> usize {
            self.nodes.len() + self.sentence.chunks.iter().map(|c| c.len() - 1).sum::<usize>()
        }
    }

    fn tok(i: usize, head: usize, dep: &str) -> Token {
        Token {
            index: i,
            text: format!("t{i}"),
            lemma: format!("t{i}"),
            pos: Pos::Noun,
            supersense: None,
            head,
            dep_label: dep.into(),
        }
    }

    #[test]
    fn no_chunks_means_identity() {
        let s = AnnotatedSentence {
            sentence_id: "z".into(),
            tokens: vec![tok(0, 1, "nsubj"), tok(1, 1, "root")],
            chunks: vec![],
        };
        let m = merge_chunks(&s).unwrap();
        assert_eq!(m.nodes.len(), 2);
        assert_eq!(m.nodes[0].head, Some(1));
    }

    #[test]
    fn adjacent_chunks_sharing_head() {
        // [t0 t1] [t2 t3] t4(root); both chunk roots attach to t4
        let s = AnnotatedSentence {
            sentence_id: "z".into(),
            tokens: vec![tok(0, 1, "amod"), tok(1, 4, "nsubj"), tok(2, 3, "amod"), tok(3, 4, "dobj"), tok(4, 4, "root")],
            chunks: vec![NounChunk { start: 0, end: 2, root: 1 }, NounChunk { start: 2, end: 4, root: 3 }],
        };
        let m = merge_chunks(&s).unwrap();
        assert_eq!(m.nodes.len(), 3);
        assert_eq!(m.nodes[0].head, Some(2));
        assert_eq!(m.nodes[1].head, Some(2));
        assert_eq!(m.edge_count(), 2);
    }

    #[test]
    fn conflicting_chunks_rejected() {
        // token tree: 1->2, 2->3, 3->0?  keep it a tree: 0 root, 1->2, 2->0, 3->1
        // chunk A=[0,1] root 1 (external head 2 in B), chunk B=[2,3] root 3 (head 1 in A)
        let s = AnnotatedSentence {
            sentence_id: "bad".into(),
            tokens: vec![tok(0, 0, "root"), tok(1, 2, "x"), tok(2, 0, "x"), tok(3, 1, "x")],
            chunks: vec![NounChunk { start: 0, end: 2, root: 1 }, NounChunk { start: 2, end: 4, root: 3 }],
        };
        // A holds the sentence root so it becomes the node root; B attaches to A
        let m = merge_chunks(&s).unwrap();
        assert_eq!(m.nodes[1].head, Some(0));

        let s = AnnotatedSentence {
            sentence_id: "bad".into(),
            tokens: vec![tok(0, 2, "x"), tok(1, 2, "x"), tok(2, 4, "x"), tok(3, 0, "x"), tok(4, 4, "root")],
            chunks: vec![NounChunk { start: 0, end: 2, root: 1 }, NounChunk { start: 2, end: 4, root: 3 }],
        };
        assert_eq!(merge_chunks(&s).unwrap_err(), AnnotationError::MergeConflict("bad".into()));
    }
}
