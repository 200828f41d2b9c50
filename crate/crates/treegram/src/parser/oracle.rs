//! Exhaustive derivation enumeration for small instances.
//!
//! Enumerates every fragment decomposition of a given preprocessed tree,
//! threading node states through the same `apply_head`/`apply_dep` steps the
//! parser uses, and keeping only derivations all of whose steps have nonzero
//! probability. Used to validate the chart search and to compute exact tree
//! probabilities (sum over derivations).

use thiserror::Error;

use crate::model::CountTable;
use crate::tgram::extract::{dep_variants, head_variants, BuiltFragment};
use crate::tgram::{ExtractionConfig, NodeLabel, Role};
use crate::treebank::{ParseTree, TOP};

use super::{apply_dep, apply_head, Derivation, DerivationStep, NodeState};

/// Enumeration cost grows exponentially with tree size.
pub const MAX_ORACLE_WORDS: usize = 12;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("tree has {0} words; the exhaustive oracle is guarded at {MAX_ORACLE_WORDS}")]
    TooLarge(usize),
    #[error("tree is not head-marked")]
    NotPrepared,
}

/// All derivations of `tree` (which must carry the TOP root and full
/// preprocessing) with nonzero probability under `table`, most probable
/// first.
pub fn enumerate_derivations(
    tree: &ParseTree,
    table: &CountTable,
    markov: bool,
) -> Result<Vec<Derivation>, OracleError> {
    let words = tree.words().len();
    if words > MAX_ORACLE_WORDS {
        return Err(OracleError::TooLarge(words));
    }
    let root = if tree.is_top() {
        if tree.head.is_none() {
            return Err(OracleError::NotPrepared);
        }
        &tree.children[0]
    } else {
        tree
    };
    if !root.is_leaf() && root.head.is_none() {
        return Err(OracleError::NotPrepared);
    }
    let mut out: Vec<Derivation> = derivs_at(root, vec![0], TOP, table, markov)
        .into_iter()
        .map(|(steps, log_prob)| Derivation { steps, log_prob })
        .collect();
    out.sort_by(|a, b| {
        b.log_prob
            .partial_cmp(&a.log_prob)
            .unwrap()
            .then_with(|| a.steps.len().cmp(&b.steps.len()))
            .then_with(|| trace(a).cmp(&trace(b)))
    });
    Ok(out)
}

fn trace(d: &Derivation) -> String {
    d.steps
        .iter()
        .map(|s| format!("{:?}:{}", s.address, s.tgram))
        .collect::<Vec<_>>()
        .join("|")
}

fn label_of(node: &ParseTree) -> NodeLabel {
    NodeLabel {
        wsj: node.label.clone(),
        prehead: node.prehead.clone(),
    }
}

/// Derivations of the complete constituent at `node`, beginning with its own
/// head event conditioned on `parent`.
fn derivs_at(
    node: &ParseTree,
    addr: Vec<usize>,
    parent: &str,
    table: &CountTable,
    markov: bool,
) -> Vec<(Vec<DerivationStep>, f64)> {
    let cfg = ExtractionConfig::unlimited();
    let label = label_of(node);
    let mut out = Vec::new();
    for built in head_variants(node, &cfg) {
        let (state, history, log_prob) = match apply_head(&label, parent, &built.tgram, table) {
            Ok(x) => x,
            Err(_) => continue,
        };
        let head_step = DerivationStep {
            address: addr.clone(),
            role: Role::Head,
            tgram: built.tgram.clone(),
            history,
            log_prob,
        };
        let slot_derivs = match slot_derivations(node, &addr, &built, table, markov) {
            Some(d) => d,
            None => continue,
        };
        let lefts = dep_sequences(
            node,
            &addr,
            Role::Left,
            built.left_cov + 1,
            &state,
            table,
            markov,
        );
        if lefts.is_empty() {
            continue;
        }
        let rights = dep_sequences(
            node,
            &addr,
            Role::Right,
            built.right_cov + 1,
            &state,
            table,
            markov,
        );
        if rights.is_empty() {
            continue;
        }
        for slots in cartesian(&slot_derivs) {
            for (lsteps, lp_l) in &lefts {
                for (rsteps, lp_r) in &rights {
                    let mut steps = vec![head_step.clone()];
                    steps.extend(slots.0.iter().cloned());
                    steps.extend(lsteps.iter().cloned());
                    steps.extend(rsteps.iter().cloned());
                    out.push((steps, log_prob + slots.1 + lp_l + lp_r));
                }
            }
        }
    }
    out
}

/// Derivation choices for every open slot of a fragment; `None` when some
/// slot admits no derivation.
fn slot_derivations(
    node: &ParseTree,
    addr: &[usize],
    built: &BuiltFragment,
    table: &CountTable,
    markov: bool,
) -> Option<Vec<Vec<(Vec<DerivationStep>, f64)>>> {
    let mut all = Vec::with_capacity(built.slots.len());
    for rel in &built.slots {
        let child = node.at(rel);
        let parent_label = if rel.len() == 1 {
            &node.label
        } else {
            &node.at(&rel[..rel.len() - 1]).label
        };
        let mut child_addr = addr.to_vec();
        child_addr.extend_from_slice(rel);
        let d = derivs_at(child, child_addr, parent_label, table, markov);
        if d.is_empty() {
            return None;
        }
        all.push(d);
    }
    Some(all)
}

fn cartesian(
    lists: &[Vec<(Vec<DerivationStep>, f64)>],
) -> Vec<(Vec<DerivationStep>, f64)> {
    let mut acc: Vec<(Vec<DerivationStep>, f64)> = vec![(Vec::new(), 0.0)];
    for list in lists {
        let mut next = Vec::with_capacity(acc.len() * list.len());
        for (steps, lp) in &acc {
            for (more, lp2) in list {
                let mut s = steps.clone();
                s.extend(more.iter().cloned());
                next.push((s, lp + lp2));
            }
        }
        acc = next;
    }
    acc
}

/// All ways to cover the remaining dependents of `node` on `side` starting
/// at inside-out index `from`, threading the node state through the steps.
fn dep_sequences(
    node: &ParseTree,
    addr: &[usize],
    side: Role,
    from: usize,
    state: &NodeState,
    table: &CountTable,
    markov: bool,
) -> Vec<(Vec<DerivationStep>, f64)> {
    let h = node.head.expect("heads not marked");
    let count = match side {
        Role::Left => h,
        Role::Right => node.children.len() - h - 1,
        Role::Head => unreachable!(),
    };
    if from > count {
        return vec![(Vec::new(), 0.0)];
    }
    let cfg = ExtractionConfig::unlimited();
    let mut out = Vec::new();
    for outer in from..=count {
        for built in dep_variants(node, side, from, outer, &cfg) {
            let (next_state, history, log_prob) =
                match apply_dep(state, &built.tgram, table, markov) {
                    Ok(x) => x,
                    Err(_) => continue,
                };
            let step = DerivationStep {
                address: addr.to_vec(),
                role: side,
                tgram: built.tgram.clone(),
                history,
                log_prob,
            };
            let slot_derivs = match slot_derivations(node, addr, &built, table, markov) {
                Some(d) => d,
                None => continue,
            };
            let rest = dep_sequences(node, addr, side, outer + 1, &next_state, table, markov);
            for slots in cartesian(&slot_derivs) {
                for (rsteps, lp_r) in &rest {
                    let mut steps = vec![step.clone()];
                    steps.extend(slots.0.iter().cloned());
                    steps.extend(rsteps.iter().cloned());
                    out.push((steps, log_prob + slots.1 + lp_r));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{prep, table_for, FIG4_TREE};

    #[test]
    fn spine_tree_at_depth_one_has_exactly_one_derivation() {
        // no dependents anywhere, so depth-1 windows admit one decomposition
        let src = "(NP (NN deal))";
        let tree = prep(src, 0);
        let t = prep(src, 0);
        let events = crate::tgram::extract_treebank(
            std::slice::from_ref(&t),
            &crate::tgram::ExtractionConfig {
                max_depth: Some(1),
                ..crate::tgram::ExtractionConfig::unlimited()
            },
            false,
        );
        let table = crate::model::observe_corpus(&events);
        let derivs = enumerate_derivations(&tree, &table, false).unwrap();
        assert_eq!(derivs.len(), 1);
        assert!((derivs[0].log_prob - 0.0).abs() < 1e-12, "single derivation has probability 1");
    }

    #[test]
    fn derivation_probability_is_product_of_steps() {
        let tree = prep(FIG4_TREE, 0);
        let table = table_for(FIG4_TREE, 0, false);
        let derivs = enumerate_derivations(&tree, &table, false).unwrap();
        assert!(!derivs.is_empty());
        for d in &derivs {
            assert!(d.product_checks_out(1e-12));
        }
    }

    #[test]
    fn guard_rejects_large_trees() {
        let leaves: String = (0..13).map(|i| format!("(NN w{i}) ")).collect();
        let tree = prep(&format!("(S {leaves})"), 0);
        let table = table_for(FIG4_TREE, 0, false);
        assert_eq!(
            enumerate_derivations(&tree, &table, false).unwrap_err(),
            OracleError::TooLarge(13)
        );
    }

    #[test]
    fn derivations_are_distinct_and_sum_matches_decompositions() {
        let tree = prep(FIG4_TREE, 0);
        let table = table_for(FIG4_TREE, 0, false);
        let derivs = enumerate_derivations(&tree, &table, false).unwrap();
        let mut traces: Vec<String> = derivs.iter().map(trace).collect();
        traces.sort();
        let before = traces.len();
        traces.dedup();
        assert_eq!(before, traces.len(), "duplicate derivations enumerated");
    }
}
