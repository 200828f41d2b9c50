//! Direct-estimate probability tables: fragment counts per role and
//! conditioning history, with relative-frequency lookups. No smoothing.

mod io;

pub use io::{load_model, save_model, ModelError, ModelFile, TrainMeta};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::tgram::{EventSet, Frame, NodeLabel, Role, TGram};

/// History of a head-generation step: the node's own (enriched) label and the
/// raw treebank label of its parent (`TOP` at the root).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HistoryH {
    pub label: NodeLabel,
    pub parent: String,
}

/// History of a dependent-generation step. The side is carried by the role
/// under which the event is stored. `sibling` is the adjacent
/// already-generated child's label; it participates only in `+Markov` mode
/// and only when the same-side frame is empty.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HistoryDep {
    pub label: NodeLabel,
    pub head: String,
    pub frame: Frame,
    pub adjacent: bool,
    pub sibling: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum History {
    Head(HistoryH),
    Dep(HistoryDep),
}

impl fmt::Display for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            History::Head(h) => write!(f, "A={} P={}", h.label, h.parent),
            History::Dep(d) => {
                write!(
                    f,
                    "A={} H={} SC={{{}}} F={}",
                    d.label,
                    d.head,
                    d.frame,
                    if d.adjacent { 1 } else { 0 }
                )?;
                match &d.sibling {
                    Some(s) => write!(f, " SIB={s}"),
                    None => write!(f, " SIB=-"),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
struct TableEntry {
    total: u64,
    counts: BTreeMap<TGram, u64>,
}

/// Count store keyed by (role, history); probabilities are exact count
/// ratios computed at query time.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTable {
    entries: BTreeMap<(Role, History), TableEntry>,
}

impl CountTable {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn num_keys(&self) -> usize {
        self.entries.len()
    }

    pub fn add(&mut self, role: Role, history: History, tgram: TGram, n: u64) {
        let e = self.entries.entry((role, history)).or_default();
        e.total += n;
        *e.counts.entry(tgram).or_insert(0) += n;
    }

    pub fn count(&self, role: Role, history: &History, t: &TGram) -> u64 {
        self.entries
            .get(&(role, history.clone()))
            .and_then(|e| e.counts.get(t).copied())
            .unwrap_or(0)
    }

    pub fn normalizer(&self, role: Role, history: &History) -> u64 {
        self.entries
            .get(&(role, history.clone()))
            .map(|e| e.total)
            .unwrap_or(0)
    }

    /// Relative frequency of `t` under `(role, history)`; 0 when unseen.
    pub fn prob(&self, role: Role, history: &History, t: &TGram) -> f64 {
        match self.entries.get(&(role, history.clone())) {
            None => 0.0,
            Some(e) => match e.counts.get(t) {
                None => 0.0,
                Some(&c) => c as f64 / e.total as f64,
            },
        }
    }

    /// Natural log of `prob`, or `None` when the probability is 0.
    pub fn log_prob(&self, role: Role, history: &History, t: &TGram) -> Option<f64> {
        let e = self.entries.get(&(role, history.clone()))?;
        let &c = e.counts.get(t)?;
        Some((c as f64 / e.total as f64).ln())
    }

    /// Iterate keys with their fragment counts.
    pub fn iter(
        &self,
    ) -> impl Iterator<Item = (Role, &History, impl Iterator<Item = (&TGram, u64)>)> {
        self.entries.iter().map(|((role, hist), e)| {
            (*role, hist, e.counts.iter().map(|(t, &c)| (t, c)))
        })
    }

    /// All distinct fragments with their corpus totals per role.
    pub fn tgram_totals(&self) -> BTreeMap<(Role, &TGram), u64> {
        let mut out: BTreeMap<(Role, &TGram), u64> = BTreeMap::new();
        for ((role, _), e) in &self.entries {
            for (t, c) in &e.counts {
                *out.entry((*role, t)).or_insert(0) += c;
            }
        }
        out
    }

    /// Line-based text dump `ROLE TAB history TAB tgram TAB count`, sorted.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for ((role, hist), e) in &self.entries {
            for (t, c) in &e.counts {
                out.push_str(&format!("{role}\t{hist}\t{t}\t{c}\n"));
            }
        }
        out
    }
}

/// Fold a training event multiset into a count table.
pub fn observe_corpus(events: &EventSet) -> CountTable {
    let mut table = CountTable::default();
    for (ev, &n) in &events.events {
        table.add(ev.role, ev.history.clone(), ev.tgram.clone(), n);
    }
    table
}

/// Adjacency flag of a dependent fragment at attachment time: true iff no
/// dependent material has been generated on that side yet. Head role is a
/// contract violation.
pub fn adjacency_flag(t: &TGram, side_has_dependents: bool) -> bool {
    assert!(
        t.role != Role::Head,
        "adjacency flag is defined for dependent fragments only"
    );
    !side_has_dependents
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tgram::{Completeness, FragChild, FragNode};

    fn toy_tgram(tag: &str, word: &str) -> TGram {
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

    fn hist(tag: &str, parent: &str) -> History {
        History::Head(HistoryH {
            label: NodeLabel::bare(tag),
            parent: parent.into(),
        })
    }

    #[test]
    fn relative_frequencies() {
        let mut table = CountTable::default();
        let h = hist("NN", "NP");
        table.add(Role::Head, h.clone(), toy_tgram("NN", "deal"), 1);
        table.add(Role::Head, h.clone(), toy_tgram("NN", "week"), 1);
        assert_eq!(table.prob(Role::Head, &h, &toy_tgram("NN", "deal")), 0.5);
        assert_eq!(table.prob(Role::Head, &h, &toy_tgram("NN", "nope")), 0.0);
        assert_eq!(table.prob(Role::Head, &hist("NN", "VP"), &toy_tgram("NN", "deal")), 0.0);
    }

    #[test]
    fn probabilities_sum_to_one_per_key() {
        let mut table = CountTable::default();
        let h = hist("NN", "NP");
        for (w, n) in [("a", 3), ("b", 2), ("c", 7)] {
            table.add(Role::Head, h.clone(), toy_tgram("NN", w), n);
        }
        let total: f64 = ["a", "b", "c"]
            .iter()
            .map(|w| table.prob(Role::Head, &h, &toy_tgram("NN", w)))
            .sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    #[should_panic]
    fn adjacency_rejects_head_role() {
        adjacency_flag(&toy_tgram("NN", "x"), false);
    }
}
