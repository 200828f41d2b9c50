//! Complement marking: fills the per-node left/right subcat frames.

use std::collections::HashSet;

use super::ParseTree;

#[derive(Debug, Clone)]
pub struct ComplementRules {
    parents: HashSet<String>,
    labels: HashSet<String>,
    adverbial: HashSet<String>,
}

const DEFAULT_TABLE: &str = include_str!("../../data/complement.rules");

impl Default for ComplementRules {
    fn default() -> Self {
        ComplementRules::parse(DEFAULT_TABLE).expect("built-in complement table is well-formed")
    }
}

impl ComplementRules {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut parents = HashSet::new();
        let mut labels = HashSet::new();
        let mut adverbial = HashSet::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut toks = line.split_whitespace();
            let set = match toks.next().unwrap() {
                "PARENTS" => &mut parents,
                "LABELS" => &mut labels,
                "ADVERBIAL" => &mut adverbial,
                other => return Err(format!("line {}: unknown section {other}", lineno + 1)),
            };
            set.extend(toks.map(str::to_string));
        }
        Ok(ComplementRules {
            parents,
            labels,
            adverbial,
        })
    }

    pub fn is_complement(&self, parent: &str, child: &ParseTree) -> bool {
        self.parents.contains(parent)
            && self.labels.contains(&child.label)
            && !child.ftags.iter().any(|t| self.adverbial.contains(t))
    }
}

/// Populate `sc_left`/`sc_right` on every non-leaf node. The head child is
/// never a complement. Requires heads to be marked.
pub fn mark_complements(mut tree: ParseTree, rules: &ComplementRules) -> ParseTree {
    mark_in_place(&mut tree, rules);
    tree
}

fn mark_in_place(node: &mut ParseTree, rules: &ComplementRules) {
    if node.is_leaf() {
        return;
    }
    let head = node.head.expect("heads not marked");
    let parent_label = node.label.clone();
    let mut left = Vec::new();
    let mut right = Vec::new();
    for (i, c) in node.children.iter_mut().enumerate() {
        c.complement = i != head && !c.is_leaf() && rules.is_complement(&parent_label, c);
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
    for c in &mut node.children {
        mark_in_place(c, rules);
    }
}
