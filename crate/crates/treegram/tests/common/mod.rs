//! Shared test machinery: an independent brute-force extraction enumerator,
//! a seeded random tree generator, and an exhaustive derivation search over
//! a trained table. Everything here is written directly from the model
//! definitions and stays independent of the extraction and chart code paths
//! it checks.

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use treegram::model::{CountTable, History, ModelFile};
use treegram::parser::{apply_dep, apply_head, NodeState};
use treegram::pipeline::{train, PrepOptions};
use treegram::tgram::{
    Completeness, ExtractionConfig, FragChild, FragNode, Frame, NodeLabel, Role, TGram,
};
use treegram::treebank::{enrich_preheads, ParseTree, TOP};

// ---------------------------------------------------------------------------
// brute-force extraction oracle

pub struct BruteSets {
    pub head: BTreeSet<TGram>,
    pub left: BTreeSet<TGram>,
    pub right: BTreeSet<TGram>,
}

fn label_of(node: &ParseTree) -> NodeLabel {
    NodeLabel {
        wsj: node.label.clone(),
        prehead: node.prehead.clone(),
    }
}

fn complements_in(children: &[ParseTree], lo: usize, hi: usize) -> Frame {
    Frame::from_labels(
        children[lo..hi]
            .iter()
            .filter(|c| c.complement)
            .map(|c| c.label.clone()),
    )
}

/// All head fragments of `node`, written straight from the definition:
/// contiguous windows containing the head child, each covered child either an
/// open leaf or one of its own head fragments.
fn brute_head_fragments(node: &ParseTree) -> Vec<FragNode> {
    if node.is_pos() {
        return vec![FragNode {
            label: label_of(node),
            completeness: Completeness::Complete,
            head: None,
            sc_left: Frame::new(),
            sc_right: Frame::new(),
            children: vec![FragChild::Word(node.children[0].word.clone().unwrap())],
        }];
    }
    let h = node.head.expect("heads marked");
    let kids = &node.children;
    let mut out = Vec::new();
    for lo in 0..=h {
        for hi in h..kids.len() {
            let left_complete = lo == 0;
            let right_complete = hi == kids.len() - 1;
            let sc_left = complements_in(kids, 0, lo);
            let sc_right = complements_in(kids, hi + 1, kids.len());
            for children in child_combos(&kids[lo..=hi]) {
                out.push(FragNode {
                    label: label_of(node),
                    completeness: Completeness::from_flags(left_complete, right_complete),
                    head: Some(h - lo),
                    sc_left: sc_left.clone(),
                    sc_right: sc_right.clone(),
                    children,
                });
            }
        }
    }
    out
}

fn child_combos(children: &[ParseTree]) -> Vec<Vec<FragChild>> {
    let mut acc: Vec<Vec<FragChild>> = vec![Vec::new()];
    for child in children {
        let mut options = vec![FragChild::Leaf(label_of(child))];
        options.extend(brute_head_fragments(child).into_iter().map(FragChild::Node));
        let mut next = Vec::new();
        for prefix in &acc {
            for opt in &options {
                let mut row = prefix.clone();
                row.push(opt.clone());
                next.push(row);
            }
        }
        acc = next;
    }
    acc
}

/// The three role sets of one node, by exhaustive window/substitution
/// enumeration.
pub fn brute_extract(node: &ParseTree) -> BruteSets {
    let mut sets = BruteSets {
        head: BTreeSet::new(),
        left: BTreeSet::new(),
        right: BTreeSet::new(),
    };
    if node.is_pos() {
        for root in brute_head_fragments(node) {
            sets.head.insert(TGram {
                role: Role::Head,
                covered_left: Frame::new(),
                covered_right: Frame::new(),
                root,
            });
        }
        return sets;
    }
    let h = node.head.expect("heads marked");
    let kids = &node.children;

    for lo in 0..=h {
        for hi in h..kids.len() {
            let covered_left = complements_in(kids, lo, h);
            let covered_right = complements_in(kids, h + 1, hi + 1);
            let sc_left = complements_in(kids, 0, lo);
            let sc_right = complements_in(kids, hi + 1, kids.len());
            for children in child_combos(&kids[lo..=hi]) {
                sets.head.insert(TGram {
                    role: Role::Head,
                    covered_left: covered_left.clone(),
                    covered_right: covered_right.clone(),
                    root: FragNode {
                        label: label_of(node),
                        completeness: Completeness::from_flags(lo == 0, hi == kids.len() - 1),
                        head: Some(h - lo),
                        sc_left: sc_left.clone(),
                        sc_right: sc_right.clone(),
                        children,
                    },
                });
            }
        }
    }

    // left windows: strictly left of the head, stop marker iff they touch
    // the left boundary
    for lo in 0..h {
        for hi in lo..h {
            let covered = complements_in(kids, lo, hi + 1);
            let mut residual_left: Vec<String> = kids[0..lo]
                .iter()
                .chain(&kids[hi + 1..h])
                .filter(|c| c.complement)
                .map(|c| c.label.clone())
                .collect();
            residual_left.sort();
            for children in child_combos(&kids[lo..=hi]) {
                sets.left.insert(TGram {
                    role: Role::Left,
                    covered_left: covered.clone(),
                    covered_right: Frame::new(),
                    root: FragNode {
                        label: label_of(node),
                        completeness: Completeness::from_flags(lo == 0, false),
                        head: None,
                        sc_left: Frame::from_labels(residual_left.clone()),
                        sc_right: complements_in(kids, h + 1, kids.len()),
                        children,
                    },
                });
            }
        }
    }

    // right windows
    for lo in h + 1..kids.len() {
        for hi in lo..kids.len() {
            let covered = complements_in(kids, lo, hi + 1);
            let mut residual_right: Vec<String> = kids[h + 1..lo]
                .iter()
                .chain(&kids[hi + 1..])
                .filter(|c| c.complement)
                .map(|c| c.label.clone())
                .collect();
            residual_right.sort();
            for children in child_combos(&kids[lo..=hi]) {
                sets.right.insert(TGram {
                    role: Role::Right,
                    covered_left: Frame::new(),
                    covered_right: covered.clone(),
                    root: FragNode {
                        label: label_of(node),
                        completeness: Completeness::from_flags(false, hi == kids.len() - 1),
                        head: None,
                        sc_left: complements_in(kids, 0, h),
                        sc_right: Frame::from_labels(residual_right.clone()),
                        children,
                    },
                });
            }
        }
    }
    sets
}

// ---------------------------------------------------------------------------
// random preprocessed trees

const PHRASALS: &[&str] = &["S", "NP", "VP", "PP", "X"];
const POSTAGS: &[&str] = &["NN", "VB", "DT", "IN", "JJ"];
const WORDS: &[&str] = &["alpha", "bravo", "Cedar", "delta", "echo", "Fox"];

fn gen_node(rng: &mut StdRng, budget: &mut usize, depth: usize) -> ParseTree {
    // a POS node consumes two of the node budget (tag and word)
    if *budget < 4 || depth >= 3 || rng.gen_bool(0.4) {
        *budget = budget.saturating_sub(2);
        let tag = POSTAGS[rng.gen_range(0..POSTAGS.len())];
        let word = WORDS[rng.gen_range(0..WORDS.len())];
        return ParseTree::node(tag, vec![ParseTree::leaf(word)]);
    }
    *budget -= 1;
    let label = PHRASALS[rng.gen_range(0..PHRASALS.len())];
    let arity = rng.gen_range(1..=3);
    let mut children = Vec::new();
    for _ in 0..arity {
        if *budget < 2 {
            break;
        }
        children.push(gen_node(rng, budget, depth + 1));
    }
    if children.is_empty() {
        *budget = budget.saturating_sub(2);
        let tag = POSTAGS[rng.gen_range(0..POSTAGS.len())];
        let word = WORDS[rng.gen_range(0..WORDS.len())];
        children.push(ParseTree::node(tag, vec![ParseTree::leaf(word)]));
    }
    ParseTree::node(label, children)
}

fn mark_random_heads_and_complements(node: &mut ParseTree, rng: &mut StdRng) {
    if node.is_leaf() {
        return;
    }
    let head = if node.children.len() == 1 {
        0
    } else {
        rng.gen_range(0..node.children.len())
    };
    node.head = Some(head);
    let label = node.label.clone();
    let mut left = Vec::new();
    let mut right = Vec::new();
    for (i, c) in node.children.iter_mut().enumerate() {
        mark_random_heads_and_complements(c, rng);
        c.complement = i != head && !c.is_leaf() && !c.is_pos() && rng.gen_bool(0.5);
        let _ = &label;
        if c.complement {
            if i < head {
                left.push(c.label.clone());
            } else {
                right.push(c.label.clone());
            }
        }
    }
    left.sort();
    right.sort();
    node.sc_left = left;
    node.sc_right = right;
}

fn count_nodes(node: &ParseTree) -> usize {
    1 + node.children.iter().map(count_nodes).sum::<usize>()
}

/// A random head-marked, complement-marked, pre-head enriched tree with at
/// most `max_nodes` nodes (words included), wrapped under TOP.
pub fn random_prepared_tree(rng: &mut StdRng, max_nodes: usize, order: u8) -> ParseTree {
    loop {
        let mut budget = max_nodes.saturating_sub(1);
        let mut root = gen_node(rng, &mut budget, 0);
        if root.is_pos() {
            // keep at least one phrasal level above the tags
            root = ParseTree::node("S", vec![root]);
        }
        mark_random_heads_and_complements(&mut root, rng);
        let root = enrich_preheads(root, order);
        let mut top = ParseTree::node(TOP, vec![root]);
        top.head = Some(0);
        top.assign_spans(0);
        if count_nodes(&top) - 1 <= max_nodes {
            return top;
        }
    }
}

pub fn seeded_rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// training helper

pub fn train_model(
    srcs: &[&str],
    order: u8,
    extraction: ExtractionConfig,
    markov: bool,
) -> ModelFile {
    let trees: Vec<ParseTree> = srcs
        .iter()
        .map(|s| treegram::treebank::parse_single(s).expect("fixture parses"))
        .collect();
    let opts = PrepOptions {
        prehead_order: order,
        unknown_threshold: 0,
        ..PrepOptions::default()
    };
    train(trees, &opts, extraction, markov).expect("training succeeds")
}

// ---------------------------------------------------------------------------
// exhaustive derivation search over a trained table (independent of the
// chart: a direct recursive enumeration over spans)

pub struct SearchCtx<'a> {
    table: &'a CountTable,
    markov: bool,
    words: &'a [String],
    heads_by_label: Vec<(&'a TGram, Vec<&'a str>)>,
    left_by_label: Vec<&'a TGram>,
    right_by_label: Vec<&'a TGram>,
}

impl<'a> SearchCtx<'a> {
    pub fn new(model: &'a ModelFile, words: &'a [String]) -> Self {
        let mut heads: Vec<(&TGram, Vec<&str>)> = Vec::new();
        let mut left = Vec::new();
        let mut right = Vec::new();
        for (role, hist, ts) in model.table.iter() {
            for (t, _) in ts {
                match role {
                    Role::Head => {
                        if let History::Head(h) = hist {
                            if let Some(entry) = heads.iter_mut().find(|(x, _)| *x == t) {
                                entry.1.push(&h.parent);
                            } else {
                                heads.push((t, vec![&h.parent]));
                            }
                        }
                    }
                    Role::Left => {
                        if !left.contains(&t) {
                            left.push(t);
                        }
                    }
                    Role::Right => {
                        if !right.contains(&t) {
                            right.push(t);
                        }
                    }
                }
            }
        }
        SearchCtx {
            table: &model.table,
            markov: model.meta.markov,
            words,
            heads_by_label: heads,
            left_by_label: left,
            right_by_label: right,
        }
    }

    /// All complete derivations of a constituent labeled `label` under
    /// `parent` covering `span`: (subtree, log probability) per derivation.
    pub fn constituents(
        &self,
        label: &NodeLabel,
        parent: &str,
        span: (usize, usize),
        fuel: &mut u64,
    ) -> Vec<(ParseTree, f64)> {
        let mut out = Vec::new();
        *fuel = fuel.saturating_sub(1);
        if *fuel == 0 {
            panic!("search fuel exhausted; the toy grammar recurses");
        }
        for (t, parents) in &self.heads_by_label {
            if &t.root.label != label || !parents.iter().any(|p| *p == parent) {
                continue;
            }
            let (_, _, head_lp) = match apply_head(label, parent, t, self.table) {
                Ok(x) => x,
                Err(_) => continue,
            };
            for (children, body_lp) in self.resolve_node(&t.root, span, fuel) {
                out.push((
                    ParseTree::node(label.wsj.clone(), children),
                    head_lp + body_lp,
                ));
            }
        }
        out
    }

    /// Resolve a fragment node over exactly `span`: lay out its window
    /// children over a middle region and extend the open sides with
    /// dependent fragments until complete.
    fn resolve_node(
        &self,
        node: &FragNode,
        span: (usize, usize),
        fuel: &mut u64,
    ) -> Vec<(Vec<ParseTree>, f64)> {
        let state = NodeState::from_window(node);
        let mut out = Vec::new();
        for mid_start in span.0..=span.1 {
            for mid_end in mid_start..=span.1 {
                if state.completeness.left_closed() && mid_start != span.0 {
                    continue;
                }
                if state.completeness.right_closed() && mid_end != span.1 {
                    continue;
                }
                for (window_children, window_lp) in
                    self.resolve_seq(&node.children, node, (mid_start, mid_end), fuel)
                {
                    for (left_children, left_lp, state_l) in
                        self.extend_left(&state, (span.0, mid_start), fuel)
                    {
                        for (right_children, right_lp, state_r) in
                            self.extend_right(&state_l, (mid_end, span.1), fuel)
                        {
                            let _ = &state_r;
                            if !(state_r.completeness == Completeness::Complete) {
                                continue;
                            }
                            let mut children = left_children.clone();
                            children.extend(window_children.iter().cloned());
                            children.extend(right_children.iter().cloned());
                            out.push((children, window_lp + left_lp + right_lp));
                        }
                    }
                }
            }
        }
        out
    }

    fn resolve_seq(
        &self,
        children: &[FragChild],
        parent: &FragNode,
        span: (usize, usize),
        fuel: &mut u64,
    ) -> Vec<(Vec<ParseTree>, f64)> {
        if children.is_empty() {
            return if span.0 == span.1 {
                vec![(Vec::new(), 0.0)]
            } else {
                Vec::new()
            };
        }
        let mut out = Vec::new();
        let first = &children[0];
        for k in span.0 + 1..=span.1 {
            let firsts: Vec<(ParseTree, f64)> = match first {
                FragChild::Word(w) => {
                    if k == span.0 + 1 && self.words[span.0] == *w {
                        vec![(ParseTree::leaf(w.clone()), 0.0)]
                    } else {
                        Vec::new()
                    }
                }
                FragChild::Leaf(l) => {
                    self.constituents(l, &parent.label.wsj, (span.0, k), fuel)
                }
                FragChild::Node(sub) => self
                    .resolve_node(sub, (span.0, k), fuel)
                    .into_iter()
                    .map(|(kids, lp)| (ParseTree::node(sub.label.wsj.clone(), kids), lp))
                    .collect(),
            };
            if firsts.is_empty() {
                continue;
            }
            for (rest, rest_lp) in self.resolve_seq(&children[1..], parent, (k, span.1), fuel) {
                for (tree, lp) in &firsts {
                    let mut row = vec![tree.clone()];
                    row.extend(rest.iter().cloned());
                    out.push((row, lp + rest_lp));
                }
            }
        }
        out
    }

    /// Cover `region` (to the left of the window) with left-dependent
    /// fragments attached inside-out.
    fn extend_left(
        &self,
        state: &NodeState,
        region: (usize, usize),
        fuel: &mut u64,
    ) -> Vec<(Vec<ParseTree>, f64, NodeState)> {
        if region.0 == region.1 {
            return if state.completeness.left_closed() {
                vec![(Vec::new(), 0.0, state.clone())]
            } else {
                Vec::new()
            };
        }
        if state.completeness.left_closed() {
            return Vec::new();
        }
        let mut out = Vec::new();
        for split in region.0..region.1 {
            // chunk (split, region.1) attaches first
            for t in &self.left_by_label {
                if t.root.label != state.label {
                    continue;
                }
                let (next, _, lp) = match apply_dep(state, t, self.table, self.markov) {
                    Ok(x) => x,
                    Err(_) => continue,
                };
                for (chunk, chunk_lp) in
                    self.resolve_seq(&t.root.children, &t.root, (split, region.1), fuel)
                {
                    for (outer, outer_lp, final_state) in
                        self.extend_left(&next, (region.0, split), fuel)
                    {
                        let mut children = outer.clone();
                        children.extend(chunk.iter().cloned());
                        out.push((children, lp + chunk_lp + outer_lp, final_state));
                    }
                }
            }
        }
        out
    }

    fn extend_right(
        &self,
        state: &NodeState,
        region: (usize, usize),
        fuel: &mut u64,
    ) -> Vec<(Vec<ParseTree>, f64, NodeState)> {
        if region.0 == region.1 {
            return if state.completeness.right_closed() {
                vec![(Vec::new(), 0.0, state.clone())]
            } else {
                Vec::new()
            };
        }
        if state.completeness.right_closed() {
            return Vec::new();
        }
        let mut out = Vec::new();
        for split in region.0 + 1..=region.1 {
            // chunk (region.0, split) attaches first
            for t in &self.right_by_label {
                if t.root.label != state.label {
                    continue;
                }
                let (next, _, lp) = match apply_dep(state, t, self.table, self.markov) {
                    Ok(x) => x,
                    Err(_) => continue,
                };
                for (chunk, chunk_lp) in
                    self.resolve_seq(&t.root.children, &t.root, (region.0, split), fuel)
                {
                    for (outer, outer_lp, final_state) in
                        self.extend_right(&next, (split, region.1), fuel)
                    {
                        let mut children = chunk.clone();
                        children.extend(outer.iter().cloned());
                        out.push((children, lp + chunk_lp + outer_lp, final_state));
                    }
                }
            }
        }
        out
    }
}

/// Every complete derivation of `words` under the model: (bracketed tree,
/// derivation log probability). Multiple entries per tree are expected.
pub fn enumerate_all_parses(model: &ModelFile, words: &[String]) -> Vec<(String, f64)> {
    let ctx = SearchCtx::new(model, words);
    let mut roots: Vec<NodeLabel> = Vec::new();
    for (role, hist, _) in model.table.iter() {
        if role == Role::Head {
            if let History::Head(h) = hist {
                if h.parent == TOP && !roots.contains(&h.label) {
                    roots.push(h.label.clone());
                }
            }
        }
    }
    let mut out = Vec::new();
    let mut fuel: u64 = 50_000_000;
    for label in &roots {
        for (tree, lp) in ctx.constituents(label, TOP, (0, words.len()), &mut fuel) {
            let mut top = ParseTree::node(TOP, vec![tree]);
            top.assign_spans(0);
            out.push((top.to_bracketed(), lp));
        }
    }
    out
}
