//! Agenda-driven chart search for the most probable derivation.
//!
//! Pass 1 runs the same deduction over depth-1 fragments only and records
//! which (span, raw label) cells are reachable as complete constituents.
//! Pass 2 searches the full fragment space, refusing to finish constituents
//! outside pass-1 cells.
//!
//! Facts:
//!   Win  — a fragment node's child window matched left to right up to `dot`
//!   Dep  — a dependent fragment whose body is fully matched over a span
//!   Open — a node under construction: seeded by a window, grown by
//!          dependent attachments, closed when complete
//!   Res  — a resolved (completed) inner fragment node
//!   Fin  — a finished constituent under an assumed parent label
//!
//! Relaxation keeps the best (score, fewer steps, lexicographically smallest
//! trace) entry per fact and re-propagates improvements, so the fixpoint does
//! not depend on processing order.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::model::{CountTable, History, ModelFile};
use crate::tgram::{tgram_depth, FragChild, FragNode, NodeLabel, Role, TGram};
use crate::treebank::{ParseTree, TOP};

use super::{
    apply_dep, apply_head, state_from_window, tag_lattice, Derivation, DerivationStep, NodeState,
};

#[derive(Debug, Clone, Default)]
pub struct ParserConfig {
    /// Keep at most this many finished constituents per span (best scores).
    pub beam_width: Option<usize>,
    /// Drop finished constituents worse than the span's best by more than
    /// this many log units.
    pub beam_margin: Option<f64>,
}

#[derive(Debug, Clone)]
pub enum ParseOutcome {
    Parsed {
        tree: ParseTree,
        log_prob: f64,
        derivation: Derivation,
    },
    Failure {
        reason: String,
    },
}

impl ParseOutcome {
    pub fn is_parsed(&self) -> bool {
        matches!(self, ParseOutcome::Parsed { .. })
    }
}

// ---------------------------------------------------------------------------
// fragment index

struct ParseIndex {
    tgrams: Vec<TGram>,
    /// Head-role fragments: parents observed with the fragment's root label.
    head_parents: Vec<Vec<String>>,
    /// Window starts triggered by an input word.
    word_first: HashMap<String, Vec<(usize, Vec<usize>)>>,
    /// Window starts triggered by a finished constituent (label, parent).
    leaf_first: HashMap<(NodeLabel, String), Vec<(usize, Vec<usize>)>>,
    /// Window starts triggered by a resolved inner node of the same fragment.
    inner_first: HashMap<(usize, Vec<usize>), Vec<(usize, Vec<usize>)>>,
}

fn frag_node_at<'a>(root: &'a FragNode, path: &[usize]) -> &'a FragNode {
    let mut cur = root;
    for &i in path {
        match &cur.children[i] {
            FragChild::Node(n) => cur = n,
            _ => panic!("path walks into a leaf"),
        }
    }
    cur
}

impl ParseIndex {
    fn build(table: &CountTable, depth_filter: Option<u32>, mode: crate::tgram::DepthMode) -> Self {
        // collect distinct fragments and, for head roles, their observed parents
        let mut tgrams: Vec<TGram> = Vec::new();
        let mut ids: HashMap<&TGram, usize> = HashMap::new();
        let mut head_parents_map: HashMap<usize, Vec<String>> = HashMap::new();
        let mut order: Vec<&TGram> = Vec::new();
        for (_, _, ts) in table.iter() {
            for (t, _) in ts {
                if !ids.contains_key(t) {
                    ids.insert(t, order.len());
                    order.push(t);
                }
            }
        }
        for t in order {
            if depth_filter.map_or(true, |d| tgram_depth(t, mode) <= d) {
                tgrams.push(t.clone());
            }
        }
        tgrams.sort();
        let id_of: HashMap<&TGram, usize> = tgrams.iter().enumerate().map(|(i, t)| (t, i)).collect();
        for (role, hist, ts) in table.iter() {
            if role != Role::Head {
                continue;
            }
            if let History::Head(h) = hist {
                for (t, _) in ts {
                    if let Some(&id) = id_of.get(t) {
                        head_parents_map.entry(id).or_default().push(h.parent.clone());
                    }
                }
            }
        }
        let mut head_parents: Vec<Vec<String>> = vec![Vec::new(); tgrams.len()];
        for (id, mut parents) in head_parents_map {
            parents.sort();
            parents.dedup();
            head_parents[id] = parents;
        }

        let mut word_first: HashMap<String, Vec<(usize, Vec<usize>)>> = HashMap::new();
        let mut leaf_first: HashMap<(NodeLabel, String), Vec<(usize, Vec<usize>)>> = HashMap::new();
        let mut inner_first: HashMap<(usize, Vec<usize>), Vec<(usize, Vec<usize>)>> =
            HashMap::new();
        for (id, t) in tgrams.iter().enumerate() {
            let mut paths = Vec::new();
            collect_slots(&t.root, Vec::new(), &mut paths);
            for path in paths {
                let node = frag_node_at(&t.root, &path);
                match &node.children[0] {
                    FragChild::Word(w) => word_first
                        .entry(w.clone())
                        .or_default()
                        .push((id, path.clone())),
                    FragChild::Leaf(l) => leaf_first
                        .entry((l.clone(), node.label.wsj.clone()))
                        .or_default()
                        .push((id, path.clone())),
                    FragChild::Node(_) => {
                        let mut child_path = path.clone();
                        child_path.push(0);
                        inner_first
                            .entry((id, child_path))
                            .or_default()
                            .push((id, path));
                    }
                }
            }
        }
        ParseIndex {
            tgrams,
            head_parents,
            word_first,
            leaf_first,
            inner_first,
        }
    }

    fn node(&self, tg: usize, path: &[usize]) -> &FragNode {
        frag_node_at(&self.tgrams[tg].root, path)
    }
}

fn collect_slots(node: &FragNode, path: Vec<usize>, out: &mut Vec<Vec<usize>>) {
    out.push(path.clone());
    for (i, c) in node.children.iter().enumerate() {
        if let FragChild::Node(n) = c {
            let mut p = path.clone();
            p.push(i);
            collect_slots(n, p, out);
        }
    }
}

// ---------------------------------------------------------------------------
// facts

type Span = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct FinKey {
    span: Span,
    label: NodeLabel,
    parent: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct ResKey {
    span: Span,
    tg: usize,
    path: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct DepKey {
    span: Span,
    tg: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct WinKey {
    tg: usize,
    path: Vec<usize>,
    dot: usize,
    span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum SeedKey {
    Root { parent: String },
    Inner { tg: usize, path: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct OpenKey {
    span: Span,
    seed: SeedKey,
    state: NodeState,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Fact {
    Fin(FinKey),
    Res(ResKey),
    Dep(DepKey),
    Win(WinKey),
    Open(OpenKey),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum ChildBack {
    Word(usize),
    Fin(FinKey),
    Res(ResKey),
}

#[derive(Debug, Clone)]
enum Back {
    Win {
        prev: Option<WinKey>,
        child: ChildBack,
    },
    Seed {
        win: WinKey,
        tg: usize,
        event: Option<(History, f64)>,
    },
    Attach {
        open: OpenKey,
        dep: DepKey,
        role: Role,
        history: History,
        log_prob: f64,
    },
    Fin {
        open: OpenKey,
    },
    Res {
        open: OpenKey,
    },
    Dep {
        win: WinKey,
    },
}

#[derive(Debug, Clone)]
struct Entry {
    score: f64,
    steps: u32,
    back: Back,
}

// ---------------------------------------------------------------------------
// engine

struct Engine<'a> {
    index: &'a ParseIndex,
    table: &'a CountTable,
    markov: bool,
    words: &'a [String],
    gate: Option<&'a HashSet<(usize, usize, String)>>,
    cfg: &'a ParserConfig,

    fins: HashMap<FinKey, Entry>,
    ress: HashMap<ResKey, Entry>,
    deps: HashMap<DepKey, Entry>,
    wins: HashMap<WinKey, Entry>,
    opens: HashMap<OpenKey, Entry>,

    // waiting indexes: who should be retried when a matching fact lands
    wait_leaf: HashMap<(NodeLabel, String, usize), Vec<WinKey>>,
    wait_inner: HashMap<(usize, Vec<usize>, usize), Vec<WinKey>>,
    wait_dep: HashMap<(Role, NodeLabel, usize), Vec<OpenKey>>,
    fins_at: HashMap<(NodeLabel, String, usize), Vec<FinKey>>,
    ress_at: HashMap<(usize, Vec<usize>, usize), Vec<ResKey>>,
    deps_at: HashMap<(Role, NodeLabel, usize), Vec<DepKey>>,
    span_best: HashMap<Span, f64>,

    queue: VecDeque<Fact>,
}

impl<'a> Engine<'a> {
    fn new(
        index: &'a ParseIndex,
        table: &'a CountTable,
        markov: bool,
        words: &'a [String],
        gate: Option<&'a HashSet<(usize, usize, String)>>,
        cfg: &'a ParserConfig,
    ) -> Self {
        Engine {
            index,
            table,
            markov,
            words,
            gate,
            cfg,
            fins: HashMap::new(),
            ress: HashMap::new(),
            deps: HashMap::new(),
            wins: HashMap::new(),
            opens: HashMap::new(),
            wait_leaf: HashMap::new(),
            wait_inner: HashMap::new(),
            wait_dep: HashMap::new(),
            fins_at: HashMap::new(),
            ress_at: HashMap::new(),
            deps_at: HashMap::new(),
            span_best: HashMap::new(),
            queue: VecDeque::new(),
        }
    }

    fn run(&mut self) {
        for (pos, w) in self.words.iter().enumerate() {
            if let Some(starts) = self.index.word_first.get(w) {
                for (tg, path) in starts.clone() {
                    self.offer_win(
                        WinKey {
                            tg,
                            path,
                            dot: 1,
                            span: (pos, pos + 1),
                        },
                        Entry {
                            score: 0.0,
                            steps: 0,
                            back: Back::Win {
                                prev: None,
                                child: ChildBack::Word(pos),
                            },
                        },
                    );
                }
            }
        }
        while let Some(fact) = self.queue.pop_front() {
            match fact {
                Fact::Win(k) => self.process_win(k),
                Fact::Fin(k) => self.process_fin(k),
                Fact::Res(k) => self.process_res(k),
                Fact::Dep(k) => self.process_dep(k),
                Fact::Open(k) => self.process_open(k),
            }
        }
    }

    // -- insertion with relaxation ---------------------------------------

    fn better(&self, new: &Entry, old: &Entry) -> bool {
        if new.score != old.score {
            return new.score > old.score;
        }
        if new.steps != old.steps {
            return new.steps < old.steps;
        }
        self.trace_of(&new.back) < self.trace_of(&old.back)
    }

    fn trace_of(&self, back: &Back) -> String {
        // canonical serialization of the derivation under a back edge;
        // only evaluated on exact score-and-steps ties
        let mut s = String::new();
        self.write_trace(back, &mut s);
        s
    }

    fn write_trace(&self, back: &Back, out: &mut String) {
        match back {
            Back::Win { prev, child } => {
                if let Some(p) = prev {
                    if let Some(e) = self.wins.get(p) {
                        self.write_trace(&e.back, out);
                    }
                }
                match child {
                    ChildBack::Word(p) => out.push_str(&format!("w{p};")),
                    ChildBack::Fin(f) => {
                        out.push_str(&format!("f{:?}/{}/{};", f.span, f.label, f.parent));
                        if let Some(e) = self.fins.get(f) {
                            self.write_trace(&e.back, out);
                        }
                    }
                    ChildBack::Res(r) => {
                        out.push_str(&format!("r{:?}/{}/{:?};", r.span, r.tg, r.path));
                        if let Some(e) = self.ress.get(r) {
                            self.write_trace(&e.back, out);
                        }
                    }
                }
            }
            Back::Seed { win, tg, .. } => {
                out.push_str(&format!("s{tg};"));
                if let Some(e) = self.wins.get(win) {
                    self.write_trace(&e.back, out);
                }
            }
            Back::Attach { open, dep, .. } => {
                out.push_str(&format!("a{};", dep.tg));
                if let Some(e) = self.opens.get(open) {
                    self.write_trace(&e.back, out);
                }
                if let Some(e) = self.deps.get(dep) {
                    self.write_trace(&e.back, out);
                }
            }
            Back::Fin { open } | Back::Res { open } => {
                if let Some(e) = self.opens.get(open) {
                    self.write_trace(&e.back, out);
                }
            }
            Back::Dep { win } => {
                if let Some(e) = self.wins.get(win) {
                    self.write_trace(&e.back, out);
                }
            }
        }
    }

    fn offer_win(&mut self, key: WinKey, entry: Entry) {
        let push = match self.wins.get(&key) {
            Some(old) => self.better(&entry, old),
            None => true,
        };
        if push {
            self.wins.insert(key.clone(), entry);
            self.queue.push_back(Fact::Win(key));
        }
    }

    fn offer_fin(&mut self, key: FinKey, entry: Entry) {
        if let Some(gate) = self.gate {
            let cell = (key.span.0, key.span.1, key.label.wsj.clone());
            if !gate.contains(&cell) {
                return;
            }
        }
        if let Some(margin) = self.cfg.beam_margin {
            let best = self.span_best.get(&key.span).copied().unwrap_or(f64::NEG_INFINITY);
            if entry.score < best - margin {
                return;
            }
        }
        if let Some(width) = self.cfg.beam_width {
            let better_count = self
                .fins
                .iter()
                .filter(|(k, e)| k.span == key.span && e.score > entry.score)
                .count();
            if better_count >= width {
                return;
            }
        }
        let push = match self.fins.get(&key) {
            Some(old) => self.better(&entry, old),
            None => true,
        };
        if push {
            let best = self.span_best.entry(key.span).or_insert(f64::NEG_INFINITY);
            if entry.score > *best {
                *best = entry.score;
            }
            if !self.fins.contains_key(&key) {
                self.fins_at
                    .entry((key.label.clone(), key.parent.clone(), key.span.0))
                    .or_default()
                    .push(key.clone());
            }
            self.fins.insert(key.clone(), entry);
            self.queue.push_back(Fact::Fin(key));
        }
    }

    fn offer_res(&mut self, key: ResKey, entry: Entry) {
        let push = match self.ress.get(&key) {
            Some(old) => self.better(&entry, old),
            None => true,
        };
        if push {
            if !self.ress.contains_key(&key) {
                self.ress_at
                    .entry((key.tg, key.path.clone(), key.span.0))
                    .or_default()
                    .push(key.clone());
            }
            self.ress.insert(key.clone(), entry);
            self.queue.push_back(Fact::Res(key));
        }
    }

    fn offer_dep(&mut self, key: DepKey, entry: Entry) {
        let push = match self.deps.get(&key) {
            Some(old) => self.better(&entry, old),
            None => true,
        };
        if push {
            if !self.deps.contains_key(&key) {
                let t = &self.index.tgrams[key.tg];
                let edge = match t.role {
                    Role::Left => key.span.1,
                    Role::Right => key.span.0,
                    Role::Head => unreachable!(),
                };
                self.deps_at
                    .entry((t.role, t.root.label.clone(), edge))
                    .or_default()
                    .push(key.clone());
            }
            self.deps.insert(key.clone(), entry);
            self.queue.push_back(Fact::Dep(key));
        }
    }

    fn offer_open(&mut self, key: OpenKey, entry: Entry) {
        let push = match self.opens.get(&key) {
            Some(old) => self.better(&entry, old),
            None => true,
        };
        if push {
            self.opens.insert(key.clone(), entry);
            self.queue.push_back(Fact::Open(key));
        }
    }

    // -- fact processing ---------------------------------------------------

    fn process_win(&mut self, key: WinKey) {
        let node = self.index.node(key.tg, &key.path);
        if key.dot == node.children.len() {
            self.complete_window(&key);
            return;
        }
        let at = key.span.1;
        match node.children[key.dot].clone() {
            FragChild::Word(w) => {
                if at < self.words.len() && self.words[at] == w {
                    let prev = self.wins.get(&key).unwrap().clone();
                    self.offer_win(
                        WinKey {
                            dot: key.dot + 1,
                            span: (key.span.0, at + 1),
                            ..key.clone()
                        },
                        Entry {
                            score: prev.score,
                            steps: prev.steps,
                            back: Back::Win {
                                prev: Some(key.clone()),
                                child: ChildBack::Word(at),
                            },
                        },
                    );
                }
            }
            FragChild::Leaf(label) => {
                let trigger = (label.clone(), node.label.wsj.clone(), at);
                self.wait_leaf
                    .entry(trigger.clone())
                    .or_default()
                    .push(key.clone());
                for fk in self.fins_at.get(&trigger).cloned().unwrap_or_default() {
                    self.advance_with_fin(&key, &fk);
                }
            }
            FragChild::Node(_) => {
                let mut child_path = key.path.clone();
                child_path.push(key.dot);
                let trigger = (key.tg, child_path, at);
                self.wait_inner
                    .entry(trigger.clone())
                    .or_default()
                    .push(key.clone());
                for rk in self.ress_at.get(&trigger).cloned().unwrap_or_default() {
                    self.advance_with_res(&key, &rk);
                }
            }
        }
    }

    fn advance_with_fin(&mut self, win: &WinKey, fin: &FinKey) {
        let (wentry, fentry) = match (self.wins.get(win), self.fins.get(fin)) {
            (Some(w), Some(f)) => (w.clone(), f.clone()),
            _ => return,
        };
        self.offer_win(
            WinKey {
                dot: win.dot + 1,
                span: (win.span.0, fin.span.1),
                ..win.clone()
            },
            Entry {
                score: wentry.score + fentry.score,
                steps: wentry.steps + fentry.steps,
                back: Back::Win {
                    prev: Some(win.clone()),
                    child: ChildBack::Fin(fin.clone()),
                },
            },
        );
    }

    fn advance_with_res(&mut self, win: &WinKey, res: &ResKey) {
        let (wentry, rentry) = match (self.wins.get(win), self.ress.get(res)) {
            (Some(w), Some(r)) => (w.clone(), r.clone()),
            _ => return,
        };
        self.offer_win(
            WinKey {
                dot: win.dot + 1,
                span: (win.span.0, res.span.1),
                ..win.clone()
            },
            Entry {
                score: wentry.score + rentry.score,
                steps: wentry.steps + rentry.steps,
                back: Back::Win {
                    prev: Some(win.clone()),
                    child: ChildBack::Res(res.clone()),
                },
            },
        );
    }

    fn complete_window(&mut self, key: &WinKey) {
        let entry = self.wins.get(key).unwrap().clone();
        let t = &self.index.tgrams[key.tg];
        if key.path.is_empty() {
            match t.role {
                Role::Head => {
                    for parent in &self.index.head_parents[key.tg] {
                        if let Ok((state, history, logp)) =
                            apply_head(&t.root.label, parent, t, self.table)
                        {
                            self.offer_open(
                                OpenKey {
                                    span: key.span,
                                    seed: SeedKey::Root {
                                        parent: parent.clone(),
                                    },
                                    state,
                                },
                                Entry {
                                    score: entry.score + logp,
                                    steps: entry.steps + 1,
                                    back: Back::Seed {
                                        win: key.clone(),
                                        tg: key.tg,
                                        event: Some((history, logp)),
                                    },
                                },
                            );
                        }
                    }
                }
                Role::Left | Role::Right => {
                    self.offer_dep(
                        DepKey {
                            span: key.span,
                            tg: key.tg,
                        },
                        Entry {
                            score: entry.score,
                            steps: entry.steps,
                            back: Back::Dep { win: key.clone() },
                        },
                    );
                }
            }
        } else {
            let node = self.index.node(key.tg, &key.path);
            self.offer_open(
                OpenKey {
                    span: key.span,
                    seed: SeedKey::Inner {
                        tg: key.tg,
                        path: key.path.clone(),
                    },
                    state: state_from_window(node),
                },
                Entry {
                    score: entry.score,
                    steps: entry.steps,
                    back: Back::Seed {
                        win: key.clone(),
                        tg: key.tg,
                        event: None,
                    },
                },
            );
        }
    }

    fn process_fin(&mut self, key: FinKey) {
        // windows waiting for this constituent mid-window
        let trigger = (key.label.clone(), key.parent.clone(), key.span.0);
        for win in self.wait_leaf.get(&trigger).cloned().unwrap_or_default() {
            self.advance_with_fin(&win, &key);
        }
        // windows opening with this constituent
        if let Some(starts) = self.index.leaf_first.get(&(key.label.clone(), key.parent.clone()))
        {
            let fentry = self.fins.get(&key).unwrap().clone();
            for (tg, path) in starts.clone() {
                self.offer_win(
                    WinKey {
                        tg,
                        path,
                        dot: 1,
                        span: key.span,
                    },
                    Entry {
                        score: fentry.score,
                        steps: fentry.steps,
                        back: Back::Win {
                            prev: None,
                            child: ChildBack::Fin(key.clone()),
                        },
                    },
                );
            }
        }
    }

    fn process_res(&mut self, key: ResKey) {
        let trigger = (key.tg, key.path.clone(), key.span.0);
        for win in self.wait_inner.get(&trigger).cloned().unwrap_or_default() {
            self.advance_with_res(&win, &key);
        }
        if let Some(starts) = self.index.inner_first.get(&(key.tg, key.path.clone())) {
            let rentry = self.ress.get(&key).unwrap().clone();
            for (tg, path) in starts.clone() {
                self.offer_win(
                    WinKey {
                        tg,
                        path,
                        dot: 1,
                        span: key.span,
                    },
                    Entry {
                        score: rentry.score,
                        steps: rentry.steps,
                        back: Back::Win {
                            prev: None,
                            child: ChildBack::Res(key.clone()),
                        },
                    },
                );
            }
        }
    }

    fn process_dep(&mut self, key: DepKey) {
        let t = &self.index.tgrams[key.tg];
        let edge = match t.role {
            Role::Left => key.span.1,
            Role::Right => key.span.0,
            Role::Head => unreachable!(),
        };
        let trigger = (t.role, t.root.label.clone(), edge);
        for open in self.wait_dep.get(&trigger).cloned().unwrap_or_default() {
            self.try_attach(&open, &key);
        }
    }

    fn process_open(&mut self, key: OpenKey) {
        if key.state.completeness == crate::tgram::Completeness::Complete {
            self.close_open(&key);
            return;
        }
        let label = key.state.label.clone();
        if !key.state.completeness.left_closed() {
            let trigger = (Role::Left, label.clone(), key.span.0);
            self.wait_dep
                .entry(trigger.clone())
                .or_default()
                .push(key.clone());
            for dep in self.deps_at.get(&trigger).cloned().unwrap_or_default() {
                self.try_attach(&key, &dep);
            }
        }
        if !key.state.completeness.right_closed() {
            let trigger = (Role::Right, label, key.span.1);
            self.wait_dep
                .entry(trigger.clone())
                .or_default()
                .push(key.clone());
            for dep in self.deps_at.get(&trigger).cloned().unwrap_or_default() {
                self.try_attach(&key, &dep);
            }
        }
    }

    fn try_attach(&mut self, open: &OpenKey, dep: &DepKey) {
        let (oentry, dentry) = match (self.opens.get(open), self.deps.get(dep)) {
            (Some(o), Some(d)) => (o.clone(), d.clone()),
            _ => return,
        };
        let t = &self.index.tgrams[dep.tg];
        let span = match t.role {
            Role::Left => {
                if dep.span.1 != open.span.0 {
                    return;
                }
                (dep.span.0, open.span.1)
            }
            Role::Right => {
                if dep.span.0 != open.span.1 {
                    return;
                }
                (open.span.0, dep.span.1)
            }
            Role::Head => unreachable!(),
        };
        let (state, history, logp) = match apply_dep(&open.state, t, self.table, self.markov) {
            Ok(x) => x,
            Err(_) => return,
        };
        self.offer_open(
            OpenKey {
                span,
                seed: open.seed.clone(),
                state,
            },
            Entry {
                score: oentry.score + dentry.score + logp,
                steps: oentry.steps + dentry.steps + 1,
                back: Back::Attach {
                    open: open.clone(),
                    dep: dep.clone(),
                    role: t.role,
                    history,
                    log_prob: logp,
                },
            },
        );
    }

    fn close_open(&mut self, key: &OpenKey) {
        debug_assert!(key.state.frame_left.is_empty() && key.state.frame_right.is_empty());
        let entry = self.opens.get(key).unwrap().clone();
        match &key.seed {
            SeedKey::Root { parent } => {
                self.offer_fin(
                    FinKey {
                        span: key.span,
                        label: key.state.label.clone(),
                        parent: parent.clone(),
                    },
                    Entry {
                        score: entry.score,
                        steps: entry.steps,
                        back: Back::Fin { open: key.clone() },
                    },
                );
            }
            SeedKey::Inner { tg, path } => {
                self.offer_res(
                    ResKey {
                        span: key.span,
                        tg: *tg,
                        path: path.clone(),
                    },
                    Entry {
                        score: entry.score,
                        steps: entry.steps,
                        back: Back::Res { open: key.clone() },
                    },
                );
            }
        }
    }

    // -- recovery ------------------------------------------------------------

    fn goal(&self) -> Option<FinKey> {
        let n = self.words.len();
        let mut best: Option<(&FinKey, &Entry)> = None;
        for (k, e) in &self.fins {
            if k.span == (0, n) && k.parent == TOP {
                let replace = match best {
                    None => true,
                    Some((_, be)) => self.better(e, be),
                };
                if replace {
                    best = Some((k, e));
                }
            }
        }
        best.map(|(k, _)| k.clone())
    }

    fn recover_fin(&self, key: &FinKey, original: &[String]) -> Built {
        let entry = &self.fins[key];
        match &entry.back {
            Back::Fin { open } => self.recover_open(open, original),
            _ => unreachable!("fin backed by non-fin"),
        }
    }

    fn recover_res(&self, key: &ResKey, original: &[String]) -> Built {
        let entry = &self.ress[key];
        match &entry.back {
            Back::Res { open } => self.recover_open(open, original),
            _ => unreachable!("res backed by non-res"),
        }
    }

    /// Walk an open-item chain back to its seed, gathering window children
    /// and attachment events.
    fn recover_open(&self, key: &OpenKey, original: &[String]) -> Built {
        let mut lefts: Vec<(Vec<Built>, DerivationStep)> = Vec::new();
        let mut rights: Vec<(Vec<Built>, DerivationStep)> = Vec::new();
        let mut cur = key.clone();
        loop {
            let entry = &self.opens[&cur];
            match entry.back.clone() {
                Back::Attach {
                    open,
                    dep,
                    role,
                    history,
                    log_prob,
                } => {
                    let children = self.recover_dep(&dep, original);
                    let step = DerivationStep {
                        address: Vec::new(),
                        role,
                        tgram: self.index.tgrams[dep.tg].clone(),
                        history,
                        log_prob,
                    };
                    match role {
                        Role::Left => lefts.push((children, step)),
                        Role::Right => rights.push((children, step)),
                        Role::Head => unreachable!(),
                    }
                    cur = open;
                }
                Back::Seed { win, tg, event } => {
                    let window = self.recover_win(&win, original);
                    let mut children = Vec::new();
                    // walk-back order is outermost first on the left side
                    for (chunk, _) in &lefts {
                        children.extend(chunk.iter().cloned());
                    }
                    children.extend(window);
                    for (chunk, _) in rights.iter().rev() {
                        children.extend(chunk.iter().cloned());
                    }
                    let head_event = event.map(|(history, log_prob)| DerivationStep {
                        address: Vec::new(),
                        role: Role::Head,
                        tgram: self.index.tgrams[tg].clone(),
                        history,
                        log_prob,
                    });
                    // dependent events in generation order: inside-out
                    let mut events = Vec::new();
                    if let Some(h) = head_event {
                        events.push(h);
                    }
                    for (_, step) in lefts.iter().rev() {
                        events.push(step.clone());
                    }
                    for (_, step) in rights.iter().rev() {
                        events.push(step.clone());
                    }
                    return Built::Node {
                        wsj: cur.state.label.wsj.clone(),
                        children,
                        events,
                    };
                }
                _ => unreachable!("open backed by non-open edge"),
            }
        }
    }

    fn recover_dep(&self, key: &DepKey, original: &[String]) -> Vec<Built> {
        let entry = &self.deps[key];
        match &entry.back {
            Back::Dep { win } => self.recover_win(win, original),
            _ => unreachable!("dep backed by non-dep"),
        }
    }

    fn recover_win(&self, key: &WinKey, original: &[String]) -> Vec<Built> {
        let mut out = Vec::new();
        let mut cur = Some(key.clone());
        while let Some(k) = cur {
            let entry = &self.wins[&k];
            match entry.back.clone() {
                Back::Win { prev, child } => {
                    let built = match child {
                        ChildBack::Word(p) => Built::Word(original[p].clone()),
                        ChildBack::Fin(f) => self.recover_fin(&f, original),
                        ChildBack::Res(r) => self.recover_res(&r, original),
                    };
                    out.push(built);
                    cur = prev;
                }
                _ => unreachable!("win backed by non-win"),
            }
        }
        out.reverse();
        out
    }
}

/// Recovered constituent with its own derivation events.
#[derive(Debug, Clone)]
enum Built {
    Word(String),
    Node {
        wsj: String,
        children: Vec<Built>,
        events: Vec<DerivationStep>,
    },
}

impl Built {
    fn into_tree_and_steps(self, addr: Vec<usize>, steps: &mut Vec<DerivationStep>) -> ParseTree {
        match self {
            Built::Word(w) => ParseTree::leaf(w),
            Built::Node {
                wsj,
                children,
                events,
            } => {
                for mut ev in events {
                    ev.address = addr.clone();
                    steps.push(ev);
                }
                let kids = children
                    .into_iter()
                    .enumerate()
                    .map(|(i, c)| {
                        let mut a = addr.clone();
                        a.push(i);
                        c.into_tree_and_steps(a, steps)
                    })
                    .collect();
                ParseTree::node(wsj, kids)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// public entry points

fn reach_cells(engine: &Engine) -> HashSet<(usize, usize, String)> {
    engine
        .fins
        .keys()
        .map(|k| (k.span.0, k.span.1, k.label.wsj.clone()))
        .collect()
}

/// The (span, raw label) cells reachable with depth-1 fragments; exposed for
/// pruning diagnostics and tests.
pub fn pass1_cells(words: &[String], model: &ModelFile) -> HashSet<(usize, usize, String)> {
    let lattice = match tag_lattice(words, &model.lexicon) {
        Ok(l) => l,
        Err(_) => return HashSet::new(),
    };
    let index = ParseIndex::build(&model.table, Some(1), model.meta.extraction.depth_mode);
    let cfg = ParserConfig::default();
    let mut engine = Engine::new(
        &index,
        &model.table,
        model.meta.markov,
        &lattice.effective,
        None,
        &cfg,
    );
    engine.run();
    reach_cells(&engine)
}

/// Parse a sentence into the single most probable derivation's tree.
pub fn parse_mpd(words: &[String], model: &ModelFile, cfg: &ParserConfig) -> ParseOutcome {
    if words.is_empty() {
        return ParseOutcome::Failure {
            reason: "empty sentence".into(),
        };
    }
    let lattice = match tag_lattice(words, &model.lexicon) {
        Ok(l) => l,
        Err(e) => {
            return ParseOutcome::Failure {
                reason: e.to_string(),
            }
        }
    };
    let mode = model.meta.extraction.depth_mode;

    // pass 1: reachable cells under the depth-1 grammar
    let index1 = ParseIndex::build(&model.table, Some(1), mode);
    let pcfg_plain = ParserConfig::default();
    let mut pass1 = Engine::new(
        &index1,
        &model.table,
        model.meta.markov,
        &lattice.effective,
        None,
        &pcfg_plain,
    );
    pass1.run();
    let cells = reach_cells(&pass1);
    let full_span_ok = cells.iter().any(|c| c.0 == 0 && c.1 == words.len());
    if !full_span_ok {
        return ParseOutcome::Failure {
            reason: "no complete derivation covers the sentence".into(),
        };
    }

    // pass 2: full fragment space restricted to pass-1 cells
    let index2 = ParseIndex::build(&model.table, None, mode);
    let mut pass2 = Engine::new(
        &index2,
        &model.table,
        model.meta.markov,
        &lattice.effective,
        Some(&cells),
        cfg,
    );
    pass2.run();

    let goal = match pass2.goal() {
        Some(g) => g,
        None => {
            return ParseOutcome::Failure {
                reason: "no complete derivation covers the sentence".into(),
            }
        }
    };
    let log_prob = pass2.fins[&goal].score;
    let built = pass2.recover_fin(&goal, words);
    let mut steps = Vec::new();
    let root = built.into_tree_and_steps(vec![0], &mut steps);
    let mut tree = ParseTree::node(TOP, vec![root]);
    tree.head = Some(0);
    tree.assign_spans(0);
    debug_assert_eq!(
        tree.words(),
        words.iter().map(String::as_str).collect::<Vec<_>>()
    );
    ParseOutcome::Parsed {
        tree,
        log_prob,
        derivation: Derivation {
            steps,
            log_prob,
        },
    }
}
