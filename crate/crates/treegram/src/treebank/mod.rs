//! Treebank preprocessing: bracketed I/O, head marking, complement marking,
//! pre-head enrichment, rare-word renaming and the tagging lexicon.

mod bracketed;
mod complements;
mod heads;
mod lexicon;
mod preheads;
mod unknown;

pub use bracketed::{parse_bracketed, parse_single, parse_test_parses, BracketError};
pub use complements::{mark_complements, ComplementRules};
pub use heads::{mark_heads, HeadRule, HeadRuleSet, ScanDirection};
pub use lexicon::{build_tag_lexicon, LexiconError, TagLexicon};
pub use preheads::enrich_preheads;
pub use unknown::{rename_unknown_words, word_signature};

use serde::{Deserialize, Serialize};

/// Label of the synthetic root added above every treebank tree.
pub const TOP: &str = "TOP";

/// Pre-head decoration of a phrasal node: the POS tag of its head-word and,
/// at order 2, the label of the mother node of that POS tag.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PreHead {
    pub head_pos: String,
    /// Present only for order-2 decorations. Always the raw treebank label.
    pub mother: Option<String>,
}

impl PreHead {
    pub fn order(&self) -> u8 {
        if self.mother.is_some() {
            2
        } else {
            1
        }
    }
}

/// An ordered labeled constituent tree. Word leaves carry `word`; all other
/// nodes carry children. Function tags are stripped from `label` at read time
/// and kept in `ftags`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseTree {
    pub label: String,
    pub ftags: Vec<String>,
    pub word: Option<String>,
    pub children: Vec<ParseTree>,
    /// 0-based index of the head child; set by `mark_heads` on non-leaves.
    pub head: Option<usize>,
    /// Word offsets `(start, end)` covered by this node.
    pub span: (usize, usize),
    /// Labels of left/right complement children, sorted.
    pub sc_left: Vec<String>,
    pub sc_right: Vec<String>,
    /// True iff this node is a complement child of its parent.
    pub complement: bool,
    pub prehead: Option<PreHead>,
}

impl ParseTree {
    pub fn leaf(word: impl Into<String>) -> Self {
        let word = word.into();
        ParseTree {
            label: String::new(),
            ftags: Vec::new(),
            word: Some(word),
            children: Vec::new(),
            head: None,
            span: (0, 0),
            sc_left: Vec::new(),
            sc_right: Vec::new(),
            complement: false,
            prehead: None,
        }
    }

    pub fn node(label: impl Into<String>, children: Vec<ParseTree>) -> Self {
        ParseTree {
            label: label.into(),
            ftags: Vec::new(),
            word: None,
            children,
            head: None,
            span: (0, 0),
            sc_left: Vec::new(),
            sc_right: Vec::new(),
            complement: false,
            prehead: None,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.word.is_some()
    }

    /// A POS node dominates word leaves only. Proper treebank trees have
    /// exactly one word under each POS node; the reader also tolerates flat
    /// multi-word nodes so that scoring-only inputs can be read.
    pub fn is_pos(&self) -> bool {
        !self.children.is_empty() && self.children.iter().all(|c| c.is_leaf())
    }

    pub fn is_top(&self) -> bool {
        self.label == TOP
    }

    /// Words covered by this node, left to right.
    pub fn words(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_words(&mut out);
        out
    }

    fn collect_words<'a>(&'a self, out: &mut Vec<&'a str>) {
        if let Some(w) = &self.word {
            out.push(w);
        }
        for c in &self.children {
            c.collect_words(out);
        }
    }

    /// Node at a child-index path; `&[]` is the node itself.
    pub fn at(&self, addr: &[usize]) -> &ParseTree {
        let mut cur = self;
        for &i in addr {
            cur = &cur.children[i];
        }
        cur
    }

    /// Preorder traversal paired with child-index addresses.
    pub fn nodes(&self) -> Vec<(Vec<usize>, &ParseTree)> {
        let mut out = Vec::new();
        let mut stack = vec![(Vec::new(), self)];
        while let Some((addr, node)) = stack.pop() {
            out.push((addr.clone(), node));
            for (i, c) in node.children.iter().enumerate().rev() {
                let mut a = addr.clone();
                a.push(i);
                stack.push((a, c));
            }
        }
        out
    }

    /// Recompute word spans bottom-up starting at `start`.
    pub fn assign_spans(&mut self, start: usize) -> usize {
        if self.is_leaf() {
            self.span = (start, start + 1);
            return start + 1;
        }
        let mut pos = start;
        for c in &mut self.children {
            pos = c.assign_spans(pos);
        }
        self.span = (start, pos);
        pos
    }

    /// The head POS tag of the constituent and the label of that POS node's
    /// mother, found by following head children down to the POS level.
    /// Requires heads to be marked.
    pub fn head_pos_and_mother(&self) -> (&str, &str) {
        assert!(!self.is_leaf(), "head_pos_and_mother on a leaf");
        let mut mother = self;
        let mut cur = self;
        while !cur.is_pos() {
            let h = cur.head.expect("heads not marked");
            mother = cur;
            cur = &cur.children[h];
        }
        (&cur.label, &mother.label)
    }

    /// Canonical bracketed form of this node. Function tags are re-attached;
    /// numeric coindices are not preserved.
    pub fn to_bracketed(&self) -> String {
        let mut s = String::new();
        self.write_bracketed(&mut s);
        s
    }

    fn write_bracketed(&self, out: &mut String) {
        if let Some(w) = &self.word {
            out.push_str(w);
            return;
        }
        out.push('(');
        out.push_str(&self.label);
        for t in &self.ftags {
            out.push('-');
            out.push_str(t);
        }
        for c in &self.children {
            out.push(' ');
            c.write_bracketed(out);
        }
        out.push(')');
    }

    /// Strict check used before extraction: every POS node dominates exactly
    /// one word.
    pub fn check_pos_arity(&self) -> Result<(), String> {
        if self.is_pos() && self.children.len() != 1 {
            return Err(format!(
                "POS node {} dominates {} words",
                self.label,
                self.children.len()
            ));
        }
        for c in &self.children {
            if !c.is_leaf() {
                c.check_pos_arity()?;
            }
        }
        Ok(())
    }
}

/// Wrap a tree under the synthetic TOP root (unless already wrapped) and
/// recompute spans.
pub fn add_top(mut tree: ParseTree) -> ParseTree {
    if tree.is_top() {
        tree.assign_spans(0);
        return tree;
    }
    let mut top = ParseTree::node(TOP, vec![tree]);
    top.head = Some(0);
    top.assign_spans(0);
    top
}
