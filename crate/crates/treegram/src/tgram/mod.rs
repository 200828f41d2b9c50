//! Role-tagged tree fragments ("T-grams") with completeness markers and
//! subcat frames.
//!
//! A fragment is serialized one per line as
//!
//! ```text
//! ROLE: NODE
//! ROLE   := H | L | R
//! NODE   := MARKS FRAMES COVERED (" " CHILD)*
//! MARKS  := "["? LABEL "]"?            left/right-complete markers
//! LABEL  := wsj ("~" headpos ("/" mother)?)?   pre-head decorations
//! FRAMES := ("{" l "," ... "}" "L")? ("{" ... "}" "R")?   residual subcat
//! COVERED:= ("<" l "," ... ">" "L")? ("<" ... ">" "R")?   root window only
//! CHILD  := "*"? "(" NODE ")"          "*" marks the head child
//!         | "(" LABEL ")"              open nonterminal leaf
//!         | "'" WORD                   terminal
//! ```
//!
//! Tokens are written raw; the format is for dumps and golden tests, not for
//! reparsing.

pub(crate) mod extract;

pub use extract::{extract_node, extract_treebank, EventSet, RoleSets, TrainEvent};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::treebank::PreHead;

/// Derivational function of a fragment: head, left dependent or right
/// dependent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    Head,
    Left,
    Right,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Head => "H",
            Role::Left => "L",
            Role::Right => "R",
        })
    }
}

/// Whether the stop marker delimits a node's children on each side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Completeness {
    Open,
    LeftComplete,
    RightComplete,
    Complete,
}

impl Completeness {
    pub fn from_flags(left: bool, right: bool) -> Self {
        match (left, right) {
            (false, false) => Completeness::Open,
            (true, false) => Completeness::LeftComplete,
            (false, true) => Completeness::RightComplete,
            (true, true) => Completeness::Complete,
        }
    }

    pub fn left_closed(self) -> bool {
        matches!(self, Completeness::LeftComplete | Completeness::Complete)
    }

    pub fn right_closed(self) -> bool {
        matches!(self, Completeness::RightComplete | Completeness::Complete)
    }

    pub fn close(self, side: Role) -> Self {
        match side {
            Role::Left => Completeness::from_flags(true, self.right_closed()),
            Role::Right => Completeness::from_flags(self.left_closed(), true),
            Role::Head => panic!("close takes a dependent side"),
        }
    }
}

/// A small multiset of treebank labels, kept sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Frame(Vec<String>);

impl Frame {
    pub fn new() -> Self {
        Frame(Vec::new())
    }

    pub fn from_labels<I: IntoIterator<Item = S>, S: Into<String>>(labels: I) -> Self {
        let mut v: Vec<String> = labels.into_iter().map(Into::into).collect();
        v.sort();
        Frame(v)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    /// True iff `other` is a sub-multiset of `self`.
    pub fn contains_all(&self, other: &Frame) -> bool {
        let mut mine = self.0.clone();
        for l in &other.0 {
            match mine.iter().position(|m| m == l) {
                Some(i) => {
                    mine.remove(i);
                }
                None => return false,
            }
        }
        true
    }

    /// Multiset difference; panics if `other` is not contained.
    pub fn subtract(&self, other: &Frame) -> Frame {
        let mut mine = self.0.clone();
        for l in &other.0 {
            let i = mine
                .iter()
                .position(|m| m == l)
                .expect("subtracting labels not in frame");
            mine.remove(i);
        }
        Frame(mine)
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(","))
    }
}

/// A treebank label together with its pre-head decoration.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeLabel {
    pub wsj: String,
    pub prehead: Option<PreHead>,
}

impl NodeLabel {
    pub fn bare(wsj: impl Into<String>) -> Self {
        NodeLabel {
            wsj: wsj.into(),
            prehead: None,
        }
    }
}

impl fmt::Display for NodeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.wsj)?;
        if let Some(ph) = &self.prehead {
            write!(f, "~{}", ph.head_pos)?;
            if let Some(m) = &ph.mother {
                write!(f, "/{m}")?;
            }
        }
        Ok(())
    }
}

/// One position in a fragment node's child list.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FragChild {
    /// Materialized sub-fragment.
    Node(FragNode),
    /// Open nonterminal leaf awaiting a head fragment.
    Leaf(NodeLabel),
    /// Terminal word.
    Word(String),
}

impl FragChild {
    pub fn wsj(&self) -> &str {
        match self {
            FragChild::Node(n) => &n.label.wsj,
            FragChild::Leaf(l) => &l.wsj,
            FragChild::Word(w) => w,
        }
    }
}

/// A non-leaf fragment node: label, stop-marker state, residual subcat
/// frames, head-child index (absent on dependent-role roots) and children.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FragNode {
    pub label: NodeLabel,
    pub completeness: Completeness,
    pub head: Option<usize>,
    pub sc_left: Frame,
    pub sc_right: Frame,
    pub children: Vec<FragChild>,
}

/// A role-tagged fragment. `covered_left`/`covered_right` hold the complement
/// labels the root window dominates in its source constituent; attaching the
/// fragment removes them from the host node's frames.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TGram {
    pub role: Role,
    pub covered_left: Frame,
    pub covered_right: Frame,
    pub root: FragNode,
}

/// How fragment depth is measured when applying the depth bound.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum DepthMode {
    /// Longest root-to-leaf edge count of the fragment as stored.
    #[default]
    Flat,
    /// Linearized reading: every child of a node beyond the first adds one
    /// level before descending.
    Spine,
}

/// Size constraints on extracted fragments. `None` means unbounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionConfig {
    pub max_depth: Option<u32>,
    pub max_branching: Option<u32>,
    pub max_open: Option<u32>,
    pub max_words: Option<u32>,
    pub min_freq: u64,
    pub depth_mode: DepthMode,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig {
            max_depth: None,
            max_branching: None,
            max_open: Some(4),
            max_words: Some(3),
            min_freq: 1,
            depth_mode: DepthMode::Flat,
        }
    }
}

impl ExtractionConfig {
    pub fn unlimited() -> Self {
        ExtractionConfig {
            max_depth: None,
            max_branching: None,
            max_open: None,
            max_words: None,
            min_freq: 1,
            depth_mode: DepthMode::Flat,
        }
    }

    /// Structural admissibility (the frequency bound is applied separately,
    /// after corpus aggregation).
    pub fn admits(&self, t: &TGram) -> bool {
        self.max_depth.map_or(true, |d| tgram_depth(t, self.depth_mode) <= d)
            && self.max_branching.map_or(true, |b| t.max_branching() <= b)
            && self.max_open.map_or(true, |n| open_budget(t) <= n)
            && self.max_words.map_or(true, |w| t.word_count() <= w)
    }
}

impl TGram {
    pub fn root_label(&self) -> &NodeLabel {
        &self.root.label
    }

    pub fn word_count(&self) -> u32 {
        fn walk(n: &FragNode) -> u32 {
            n.children
                .iter()
                .map(|c| match c {
                    FragChild::Word(_) => 1,
                    FragChild::Leaf(_) => 0,
                    FragChild::Node(s) => walk(s),
                })
                .sum()
        }
        walk(&self.root)
    }

    pub fn max_branching(&self) -> u32 {
        fn walk(n: &FragNode) -> u32 {
            let mut m = n.children.len() as u32;
            for c in &n.children {
                if let FragChild::Node(s) = c {
                    m = m.max(walk(s));
                }
            }
            m
        }
        walk(&self.root)
    }

    /// Render as the one-line text form.
    pub fn to_line(&self) -> String {
        format!("{self}")
    }
}

/// Stop-marker state of a fragment node; pure accessor.
pub fn completeness_of(node: &FragNode) -> Completeness {
    node.completeness
}

/// Fragment depth under the given linearization reading.
pub fn tgram_depth(t: &TGram, mode: DepthMode) -> u32 {
    fn below(c: &FragChild, mode: DepthMode) -> u32 {
        match c {
            FragChild::Node(n) => node_depth(n, mode),
            _ => 0,
        }
    }
    fn node_depth(n: &FragNode, mode: DepthMode) -> u32 {
        let deepest = n
            .children
            .iter()
            .map(|c| 1 + below(c, mode))
            .max()
            .expect("fragment node with no children");
        match mode {
            DepthMode::Flat => deepest,
            DepthMode::Spine => deepest + n.children.len() as u32 - 1,
        }
    }
    node_depth(&t.root, mode)
}

/// Number of nonterminal leaves plus left/right-open node sides; fully open
/// nodes count twice.
pub fn open_budget(t: &TGram) -> u32 {
    fn walk(n: &FragNode) -> u32 {
        let mut total = 0;
        if !n.completeness.left_closed() {
            total += 1;
        }
        if !n.completeness.right_closed() {
            total += 1;
        }
        for c in &n.children {
            total += match c {
                FragChild::Leaf(_) => 1,
                FragChild::Word(_) => 0,
                FragChild::Node(s) => walk(s),
            };
        }
        total
    }
    walk(&t.root)
}

fn write_node(n: &FragNode, out: &mut String) {
    if n.completeness.left_closed() {
        out.push('[');
    }
    out.push_str(&n.label.to_string());
    if n.completeness.right_closed() {
        out.push(']');
    }
    if !n.sc_left.is_empty() {
        out.push_str(&format!("{{{}}}L", n.sc_left));
    }
    if !n.sc_right.is_empty() {
        out.push_str(&format!("{{{}}}R", n.sc_right));
    }
    for (i, c) in n.children.iter().enumerate() {
        out.push(' ');
        if Some(i) == n.head {
            out.push('*');
        }
        match c {
            FragChild::Word(w) => {
                out.push('\'');
                out.push_str(w);
            }
            FragChild::Leaf(l) => {
                out.push('(');
                out.push_str(&l.to_string());
                out.push(')');
            }
            FragChild::Node(s) => {
                out.push('(');
                write_node(s, out);
                out.push(')');
            }
        }
    }
}

impl fmt::Display for TGram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut root = String::new();
        write_node(&self.root, &mut root);
        write!(f, "{}:", self.role)?;
        if !self.covered_left.is_empty() {
            write!(f, " <{}>L", self.covered_left)?;
        }
        if !self.covered_right.is_empty() {
            write!(f, " <{}>R", self.covered_right)?;
        }
        write!(f, " {root}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pos_tgram(tag: &str, word: &str) -> TGram {
        TGram {
            role: Role::Head,
            covered_left: Frame::new(),
            covered_right: Frame::new(),
            root: FragNode {
                label: NodeLabel::bare(tag),
                completeness: Completeness::Complete,
                head: None,
                sc_left: Frame::new(),
                sc_right: Frame::new(),
                children: vec![FragChild::Word(word.into())],
            },
        }
    }

    #[test]
    fn pos_tgram_measures() {
        let t = pos_tgram("VBN", "sealed");
        assert_eq!(tgram_depth(&t, DepthMode::Flat), 1);
        assert_eq!(open_budget(&t), 0);
        assert_eq!(t.word_count(), 1);
        assert_eq!(t.to_line(), "H: [VBN] 'sealed");
    }

    #[test]
    fn left_window_line_matches_documented_format() {
        let t = TGram {
            role: Role::Left,
            covered_left: Frame::new(),
            covered_right: Frame::new(),
            root: FragNode {
                label: NodeLabel::bare("S"),
                completeness: Completeness::LeftComplete,
                head: None,
                sc_left: Frame::new(),
                sc_right: Frame::new(),
                children: vec![FragChild::Leaf(NodeLabel::bare("NP"))],
            },
        };
        assert_eq!(t.to_line(), "L: [S (NP)");
        assert_eq!(open_budget(&t), 2, "one open leaf, root open on the right");
    }

    #[test]
    fn frame_multiset_ops() {
        let f = Frame::from_labels(["NP", "NP", "SBAR"]);
        assert!(f.contains_all(&Frame::from_labels(["NP", "SBAR"])));
        assert!(!f.contains_all(&Frame::from_labels(["NP", "NP", "NP"])));
        assert_eq!(
            f.subtract(&Frame::from_labels(["NP"])),
            Frame::from_labels(["NP", "SBAR"])
        );
    }
}
