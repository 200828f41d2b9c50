//! Two-pass CKY parsing for the most probable derivation.
//!
//! `apply_head` and `apply_dep` are the single source of truth for how a
//! derivation step transforms a node's state and what it conditions on; the
//! chart engine, the derivation oracle and any replay all go through them.

mod chart;
pub mod oracle;

pub use chart::{parse_mpd, pass1_cells, ParseOutcome, ParserConfig};

use thiserror::Error;

use crate::model::{adjacency_flag, CountTable, History, HistoryDep, HistoryH};
use crate::tgram::{Completeness, Frame, NodeLabel, Role, TGram};
use crate::treebank::TagLexicon;

#[derive(Debug, Error, PartialEq)]
pub enum StepError {
    #[error("fragment role does not fit this step")]
    RoleMismatch,
    #[error("fragment root label does not match the node")]
    LabelMismatch,
    #[error("node is already complete on that side")]
    SideComplete,
    #[error("fragment covers a complement the frame does not license")]
    FrameUnderflow,
    #[error("closing a side whose subcat frame is not empty")]
    ClosingWithFrame,
    #[error("step has zero probability")]
    ZeroProbability,
}

#[derive(Debug, Error, PartialEq)]
pub enum LatticeError {
    #[error("word {word:?} at position {position} is untaggable (no signature match either)")]
    Untaggable { position: usize, word: String },
}

/// The mutable face of a node during derivation: what dependent steps
/// condition on and update.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeState {
    pub label: NodeLabel,
    pub completeness: Completeness,
    pub frame_left: Frame,
    pub frame_right: Frame,
    /// Raw label of the head child, for dependent histories.
    pub head_wsj: String,
    /// Whether any dependent material exists on each side yet.
    pub deps_left: bool,
    pub deps_right: bool,
    /// Raw labels of the current outermost children, for Markov histories.
    pub leftmost: String,
    pub rightmost: String,
}

/// Per-span snapshot of a chart entry.
#[derive(Debug, Clone)]
pub struct ChartItem {
    pub span: (usize, usize),
    pub state: NodeState,
    pub score: f64,
}

/// One rewrite step of a derivation.
#[derive(Debug, Clone)]
pub struct DerivationStep {
    pub address: Vec<usize>,
    pub role: Role,
    pub tgram: TGram,
    pub history: History,
    pub log_prob: f64,
}

#[derive(Debug, Clone)]
pub struct Derivation {
    pub steps: Vec<DerivationStep>,
    pub log_prob: f64,
}

impl Derivation {
    pub fn product_checks_out(&self, tol: f64) -> bool {
        let sum: f64 = self.steps.iter().map(|s| s.log_prob).sum();
        (sum - self.log_prob).abs() <= tol
    }
}

impl NodeState {
    /// Initial state of a node grown by a fragment window: used for head
    /// steps at open leaves and for materialized inner fragment nodes
    /// (which carry no head event of their own).
    pub fn from_window(root: &crate::tgram::FragNode) -> NodeState {
        state_from_window(root)
    }
}

pub(crate) fn state_from_window(t_root: &crate::tgram::FragNode) -> NodeState {
    let head = t_root.head;
    let n = t_root.children.len();
    debug_assert!(
        !t_root.completeness.left_closed() || t_root.sc_left.is_empty(),
        "closed side with nonempty residual frame"
    );
    NodeState {
        label: t_root.label.clone(),
        completeness: t_root.completeness,
        frame_left: t_root.sc_left.clone(),
        frame_right: t_root.sc_right.clone(),
        head_wsj: match head {
            Some(h) => t_root.children[h].wsj().to_string(),
            None => t_root.label.wsj.clone(),
        },
        deps_left: head.map_or(false, |h| h > 0),
        deps_right: head.map_or(false, |h| h + 1 < n),
        leftmost: t_root.children[0].wsj().to_string(),
        rightmost: t_root.children[n - 1].wsj().to_string(),
    }
}

/// Rewrite an open nonterminal leaf with a head fragment. Returns the node
/// state the fragment root induces and the step's log probability under
/// history (label, parent).
pub fn apply_head(
    label: &NodeLabel,
    parent: &str,
    t: &TGram,
    table: &CountTable,
) -> Result<(NodeState, History, f64), StepError> {
    if t.role != Role::Head {
        return Err(StepError::RoleMismatch);
    }
    if &t.root.label != label {
        return Err(StepError::LabelMismatch);
    }
    let history = History::Head(HistoryH {
        label: label.clone(),
        parent: parent.to_string(),
    });
    let log_prob = table
        .log_prob(Role::Head, &history, t)
        .ok_or(StepError::ZeroProbability)?;
    Ok((state_from_window(&t.root), history, log_prob))
}

/// Attach a dependent fragment on its side of an incomplete node. Frames are
/// reduced by the complements the fragment's root window dominates; the stop
/// marker transfers from the fragment root.
pub fn apply_dep(
    state: &NodeState,
    t: &TGram,
    table: &CountTable,
    markov: bool,
) -> Result<(NodeState, History, f64), StepError> {
    let side = t.role;
    if side == Role::Head {
        return Err(StepError::RoleMismatch);
    }
    if t.root.label != state.label {
        return Err(StepError::LabelMismatch);
    }
    let (closed, frame, covered, deps_here, outermost) = match side {
        Role::Left => (
            state.completeness.left_closed(),
            &state.frame_left,
            &t.covered_left,
            state.deps_left,
            &state.leftmost,
        ),
        Role::Right => (
            state.completeness.right_closed(),
            &state.frame_right,
            &t.covered_right,
            state.deps_right,
            &state.rightmost,
        ),
        Role::Head => unreachable!(),
    };
    if closed {
        return Err(StepError::SideComplete);
    }
    if !frame.contains_all(covered) {
        return Err(StepError::FrameUnderflow);
    }
    let new_frame = frame.subtract(covered);
    let closes = match side {
        Role::Left => t.root.completeness.left_closed(),
        _ => t.root.completeness.right_closed(),
    };
    if closes && !new_frame.is_empty() {
        return Err(StepError::ClosingWithFrame);
    }
    let history = History::Dep(HistoryDep {
        label: state.label.clone(),
        head: state.head_wsj.clone(),
        frame: frame.clone(),
        adjacent: adjacency_flag(t, deps_here),
        sibling: (markov && frame.is_empty()).then(|| outermost.clone()),
    });
    let log_prob = table
        .log_prob(side, &history, t)
        .ok_or(StepError::ZeroProbability)?;

    let mut next = state.clone();
    match side {
        Role::Left => {
            next.frame_left = new_frame;
            next.deps_left = true;
            next.leftmost = t.root.children[0].wsj().to_string();
            if closes {
                next.completeness = next.completeness.close(Role::Left);
            }
        }
        Role::Right => {
            next.frame_right = new_frame;
            next.deps_right = true;
            next.rightmost = t.root.children[t.root.children.len() - 1].wsj().to_string();
            if closes {
                next.completeness = next.completeness.close(Role::Right);
            }
        }
        Role::Head => unreachable!(),
    }
    Ok((next, history, log_prob))
}

/// Per-position POS candidates for a sentence, mapping unknown words through
/// their signature. Also returns the effective (possibly renamed) forms the
/// parser should match fragment terminals against.
#[derive(Debug, Clone)]
pub struct Lattice {
    pub effective: Vec<String>,
    pub tags: Vec<Vec<String>>,
}

pub fn tag_lattice(words: &[String], lexicon: &TagLexicon) -> Result<Lattice, LatticeError> {
    let mut effective = Vec::with_capacity(words.len());
    let mut tags = Vec::with_capacity(words.len());
    for (position, word) in words.iter().enumerate() {
        match lexicon.lookup(word) {
            Some((eff, posmap)) => {
                effective.push(eff);
                tags.push(posmap.keys().cloned().collect());
            }
            None => {
                return Err(LatticeError::Untaggable {
                    position,
                    word: word.clone(),
                })
            }
        }
    }
    Ok(Lattice { effective, tags })
}
