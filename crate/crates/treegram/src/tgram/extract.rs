//! Fragment extraction from preprocessed treebank nodes.
//!
//! Every non-leaf node yields three disjoint role sets. Head-role fragments
//! take a contiguous child window around the head child; dependent-role
//! fragments take a contiguous window strictly on one side of it. A window
//! carries the stop marker on a side exactly when it covers that entire side
//! of the source constituent (vacuously on sides with no dependents). Window
//! children are either left open or substituted with a head-role fragment of
//! that child, so every materialized node carries its own head path.

use std::collections::BTreeMap;

use crate::model::{History, HistoryDep, HistoryH};
use crate::treebank::{ParseTree, TOP};

use super::{
    Completeness, ExtractionConfig, FragChild, FragNode, Frame, NodeLabel, Role, TGram,
};

/// The three role sets extracted from one node.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RoleSets {
    pub head: Vec<TGram>,
    pub left: Vec<TGram>,
    pub right: Vec<TGram>,
}

impl RoleSets {
    pub fn all(&self) -> impl Iterator<Item = &TGram> {
        self.head.iter().chain(&self.left).chain(&self.right)
    }

    fn sort_dedup(&mut self) {
        for set in [&mut self.head, &mut self.left, &mut self.right] {
            set.sort();
            set.dedup();
        }
    }
}

/// One training occurrence: a fragment together with the conditioning
/// history observed at its source node.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TrainEvent {
    pub role: Role,
    pub history: History,
    pub tgram: TGram,
}

/// Multiset of training events.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventSet {
    pub events: BTreeMap<TrainEvent, u64>,
}

impl EventSet {
    pub fn add(&mut self, ev: TrainEvent, n: u64) {
        *self.events.entry(ev).or_insert(0) += n;
    }

    pub fn occurrences(&self) -> u64 {
        self.events.values().sum()
    }

    pub fn distinct(&self) -> usize {
        self.events.len()
    }

    /// Drop events whose fragment's corpus frequency (per role, summed over
    /// histories) is below `f`.
    pub fn apply_min_freq(&mut self, f: u64) {
        if f <= 1 {
            return;
        }
        let mut totals: BTreeMap<(Role, &TGram), u64> = BTreeMap::new();
        for (ev, n) in &self.events {
            *totals.entry((ev.role, &ev.tgram)).or_insert(0) += n;
        }
        let keep: Vec<bool> = self
            .events
            .keys()
            .map(|ev| totals[&(ev.role, &ev.tgram)] >= f)
            .collect();
        let mut i = 0;
        self.events.retain(|_, _| {
            let k = keep[i];
            i += 1;
            k
        });
    }
}

fn node_label(node: &ParseTree) -> NodeLabel {
    NodeLabel {
        wsj: node.label.clone(),
        prehead: node.prehead.clone(),
    }
}

fn complement_labels(children: &[ParseTree], range: std::ops::Range<usize>) -> Frame {
    Frame::from_labels(
        children[range]
            .iter()
            .filter(|c| c.complement)
            .map(|c| c.label.clone()),
    )
}

/// An assembled fragment plus bookkeeping the derivation machinery needs:
/// which source children stayed open and how far the root window reaches.
#[derive(Debug, Clone)]
pub(crate) struct BuiltFragment {
    pub tgram: TGram,
    /// Child-index paths (relative to the source node) left open.
    pub slots: Vec<Vec<usize>>,
    /// Dependents the root window covers on each side (head role).
    pub left_cov: usize,
    pub right_cov: usize,
    /// Inside-out start index of a dependent window (1 = head-adjacent).
    pub inner: usize,
}

/// A window child is left open or substituted with one of the child's head
/// fragments; each choice carries the open-slot paths it contributes.
fn child_choices(
    child: &ParseTree,
    src_idx: usize,
    cfg: &ExtractionConfig,
) -> Vec<(FragChild, Vec<Vec<usize>>)> {
    let mut choices = vec![(FragChild::Leaf(node_label(child)), vec![vec![src_idx]])];
    for sub in head_variants(child, cfg) {
        let slots = sub
            .slots
            .into_iter()
            .map(|mut s| {
                s.insert(0, src_idx);
                s
            })
            .collect();
        choices.push((FragChild::Node(sub.tgram.root), slots));
    }
    choices
}

fn combinations(
    sets: &[Vec<(FragChild, Vec<Vec<usize>>)>],
) -> Vec<(Vec<FragChild>, Vec<Vec<usize>>)> {
    let mut acc: Vec<(Vec<FragChild>, Vec<Vec<usize>>)> = vec![(Vec::new(), Vec::new())];
    for set in sets {
        let mut next = Vec::with_capacity(acc.len() * set.len());
        for (children, slots) in &acc {
            for (child, child_slots) in set {
                let mut c = children.clone();
                c.push(child.clone());
                let mut s = slots.clone();
                s.extend(child_slots.iter().cloned());
                next.push((c, s));
            }
        }
        acc = next;
    }
    acc
}

/// Structural admissibility under `cfg`. All bounded measures are monotone
/// under embedding, so pruning sub-fragments early is sound.
fn admissible(t: &TGram, cfg: &ExtractionConfig) -> bool {
    cfg.admits(t)
}

/// All head-role fragments of `node`, with window extents and open slots.
pub(crate) fn head_variants(node: &ParseTree, cfg: &ExtractionConfig) -> Vec<BuiltFragment> {
    assert!(!node.is_leaf(), "extraction requires a non-leaf node");
    if node.is_pos() {
        assert_eq!(
            node.children.len(),
            1,
            "POS node {} must dominate exactly one word",
            node.label
        );
        let word = node.children[0].word.clone().unwrap();
        let tgram = TGram {
            role: Role::Head,
            covered_left: Frame::new(),
            covered_right: Frame::new(),
            root: FragNode {
                label: node_label(node),
                completeness: Completeness::Complete,
                head: None,
                sc_left: Frame::new(),
                sc_right: Frame::new(),
                children: vec![FragChild::Word(word)],
            },
        };
        if !admissible(&tgram, cfg) {
            return Vec::new();
        }
        return vec![BuiltFragment {
            tgram,
            slots: Vec::new(),
            left_cov: 0,
            right_cov: 0,
            inner: 0,
        }];
    }

    let h = node.head.expect("heads not marked");
    let n_left = h;
    let n_right = node.children.len() - h - 1;
    let sc_left_full = complement_labels(&node.children, 0..h);
    let sc_right_full = complement_labels(&node.children, h + 1..node.children.len());

    let mut out = Vec::new();
    for i in 0..=n_left {
        for j in 0..=n_right {
            let window = (h - i)..(h + j + 1);
            let covered_left = complement_labels(&node.children, window.start..h);
            let covered_right = complement_labels(&node.children, h + 1..window.end);
            let completeness = Completeness::from_flags(i == n_left, j == n_right);
            let sc_left = sc_left_full.subtract(&covered_left);
            let sc_right = sc_right_full.subtract(&covered_right);
            let choice_sets: Vec<Vec<(FragChild, Vec<Vec<usize>>)>> = window
                .clone()
                .map(|p| child_choices(&node.children[p], p, cfg))
                .collect();
            for (children, slots) in combinations(&choice_sets) {
                let tgram = TGram {
                    role: Role::Head,
                    covered_left: covered_left.clone(),
                    covered_right: covered_right.clone(),
                    root: FragNode {
                        label: node_label(node),
                        completeness,
                        head: Some(i),
                        sc_left: sc_left.clone(),
                        sc_right: sc_right.clone(),
                        children,
                    },
                };
                if admissible(&tgram, cfg) {
                    out.push(BuiltFragment {
                        tgram,
                        slots,
                        left_cov: i,
                        right_cov: j,
                        inner: 0,
                    });
                }
            }
        }
    }
    out
}

/// All dependent fragments of `node` on `side` for the inside-out window
/// `[inner, outer]` (1-based distance from the head child).
pub(crate) fn dep_variants(
    node: &ParseTree,
    side: Role,
    inner: usize,
    outer: usize,
    cfg: &ExtractionConfig,
) -> Vec<BuiltFragment> {
    let h = node.head.expect("heads not marked");
    let count = match side {
        Role::Left => h,
        Role::Right => node.children.len() - h - 1,
        Role::Head => panic!("dep_variants takes a dependent side"),
    };
    debug_assert!(1 <= inner && inner <= outer && outer <= count);
    let window = match side {
        Role::Left => (h - outer)..(h - inner + 1),
        Role::Right => (h + inner)..(h + outer + 1),
        Role::Head => unreachable!(),
    };
    let sc_left_full = complement_labels(&node.children, 0..h);
    let sc_right_full = complement_labels(&node.children, h + 1..node.children.len());
    let covered = complement_labels(&node.children, window.clone());
    let (covered_left, covered_right, completeness) = match side {
        Role::Left => (
            covered.clone(),
            Frame::new(),
            Completeness::from_flags(outer == count, false),
        ),
        Role::Right => (
            Frame::new(),
            covered,
            Completeness::from_flags(false, outer == count),
        ),
        Role::Head => unreachable!(),
    };
    let sc_left = sc_left_full.subtract(&covered_left);
    let sc_right = sc_right_full.subtract(&covered_right);
    let choice_sets: Vec<Vec<(FragChild, Vec<Vec<usize>>)>> = window
        .clone()
        .map(|p| child_choices(&node.children[p], p, cfg))
        .collect();
    let mut out = Vec::new();
    for (children, slots) in combinations(&choice_sets) {
        let tgram = TGram {
            role: side,
            covered_left: covered_left.clone(),
            covered_right: covered_right.clone(),
            root: FragNode {
                label: node_label(node),
                completeness,
                head: None,
                sc_left: sc_left.clone(),
                sc_right: sc_right.clone(),
                children,
            },
        };
        if admissible(&tgram, cfg) {
            out.push(BuiltFragment {
                tgram,
                slots,
                left_cov: 0,
                right_cov: 0,
                inner,
            });
        }
    }
    out
}

fn all_dep_windows(node: &ParseTree, side: Role, cfg: &ExtractionConfig) -> Vec<BuiltFragment> {
    if node.is_pos() {
        return Vec::new();
    }
    let h = node.head.expect("heads not marked");
    let count = match side {
        Role::Left => h,
        Role::Right => node.children.len() - h - 1,
        Role::Head => unreachable!(),
    };
    let mut out = Vec::new();
    for inner in 1..=count {
        for outer in inner..=count {
            out.extend(dep_variants(node, side, inner, outer, cfg));
        }
    }
    out
}

/// Extract the three role sets from the non-leaf node at `addr`. The tree
/// must be head-marked, complement-marked and pre-head enriched. Only the
/// structural bounds of `cfg` apply here; the frequency threshold is a
/// corpus-level filter.
pub fn extract_node(tree: &ParseTree, addr: &[usize], cfg: &ExtractionConfig) -> RoleSets {
    let node = tree.at(addr);
    let mut sets = RoleSets {
        head: head_variants(node, cfg).into_iter().map(|b| b.tgram).collect(),
        left: all_dep_windows(node, Role::Left, cfg)
            .into_iter()
            .map(|b| b.tgram)
            .collect(),
        right: all_dep_windows(node, Role::Right, cfg)
            .into_iter()
            .map(|b| b.tgram)
            .collect(),
    };
    sets.sort_dedup();
    sets
}

/// The dependent-side conditioning history for a window starting at inner
/// index `inner` (1 = adjacent to the head material), replaying the
/// head-first inside-out generation order.
pub(crate) fn dep_history(node: &ParseTree, side: Role, inner: usize, markov: bool) -> HistoryDep {
    let h = node.head.expect("heads not marked");
    let head_label = node.children[h].label.clone();
    let (frame, sibling_pos) = match side {
        Role::Left => (
            complement_labels(&node.children, 0..h - inner + 1),
            if inner >= 2 { h - inner + 1 } else { h },
        ),
        Role::Right => (
            complement_labels(&node.children, h + inner..node.children.len()),
            if inner >= 2 { h + inner - 1 } else { h },
        ),
        Role::Head => panic!("dep_history takes a dependent side"),
    };
    let sibling = (markov && frame.is_empty()).then(|| node.children[sibling_pos].label.clone());
    HistoryDep {
        label: node_label(node),
        head: head_label,
        frame,
        adjacent: inner == 1,
        sibling,
    }
}

/// Extract all nodes of a preprocessed treebank, pairing every fragment
/// occurrence with its conditioning history. The frequency threshold of
/// `cfg` is applied after aggregation.
pub fn extract_treebank(trees: &[ParseTree], cfg: &ExtractionConfig, markov: bool) -> EventSet {
    let mut events = EventSet::default();
    for tree in trees {
        for (addr, node) in tree.nodes() {
            if node.is_leaf() || node.is_top() {
                continue;
            }
            let parent = if addr.len() == 1 {
                TOP.to_string()
            } else {
                tree.at(&addr[..addr.len() - 1]).label.clone()
            };
            collect_node_events(node, &parent, cfg, markov, &mut events);
        }
    }
    events.apply_min_freq(cfg.min_freq);
    events
}

fn collect_node_events(
    node: &ParseTree,
    parent: &str,
    cfg: &ExtractionConfig,
    markov: bool,
    events: &mut EventSet,
) {
    let head_hist = History::Head(HistoryH {
        label: node_label(node),
        parent: parent.to_string(),
    });
    for built in head_variants(node, cfg) {
        events.add(
            TrainEvent {
                role: Role::Head,
                history: head_hist.clone(),
                tgram: built.tgram,
            },
            1,
        );
    }
    if node.is_pos() {
        return;
    }
    for side in [Role::Left, Role::Right] {
        for built in all_dep_windows(node, side, cfg) {
            let hist = History::Dep(dep_history(node, side, built.inner, markov));
            events.add(
                TrainEvent {
                    role: side,
                    history: hist,
                    tgram: built.tgram,
                },
                1,
            );
        }
    }
}
