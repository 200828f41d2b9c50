//! Head-child identification driven by a per-label rule table.

use std::collections::HashMap;

use super::ParseTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanDirection {
    Left,
    Right,
}

#[derive(Debug, Clone)]
pub struct HeadRule {
    pub direction: ScanDirection,
    pub priority: Vec<String>,
}

/// Total head finder: every (parent, child sequence) yields an index. Rules
/// are label-major; a parent without an entry uses the default rule.
#[derive(Debug, Clone)]
pub struct HeadRuleSet {
    rules: HashMap<String, HeadRule>,
    default: HeadRule,
}

const DEFAULT_TABLE: &str = include_str!("../../data/head.rules");

impl Default for HeadRuleSet {
    fn default() -> Self {
        HeadRuleSet::parse(DEFAULT_TABLE).expect("built-in head table is well-formed")
    }
}

impl HeadRuleSet {
    /// Parse the line-based table format (see `data/head.rules`).
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut rules = HashMap::new();
        let mut default = HeadRule {
            direction: ScanDirection::Left,
            priority: Vec::new(),
        };
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut toks = line.split_whitespace();
            let parent = toks.next().unwrap().to_string();
            let dir = match toks.next() {
                Some("left") => ScanDirection::Left,
                Some("right") => ScanDirection::Right,
                other => {
                    return Err(format!(
                        "line {}: expected direction left/right, got {:?}",
                        lineno + 1,
                        other
                    ))
                }
            };
            let rule = HeadRule {
                direction: dir,
                priority: toks.map(str::to_string).collect(),
            };
            if parent == "DEFAULT" {
                default = rule;
            } else {
                rules.insert(parent, rule);
            }
        }
        Ok(HeadRuleSet { rules, default })
    }

    pub fn rule_for(&self, parent: &str) -> &HeadRule {
        self.rules.get(parent).unwrap_or(&self.default)
    }

    /// 0-based head index for a child label sequence. Never fails.
    pub fn find_head(&self, parent: &str, children: &[&str]) -> usize {
        assert!(!children.is_empty());
        let rule = self.rule_for(parent);
        let scan: Vec<usize> = match rule.direction {
            ScanDirection::Left => (0..children.len()).collect(),
            ScanDirection::Right => (0..children.len()).rev().collect(),
        };
        for want in &rule.priority {
            for &i in &scan {
                if children[i] == want {
                    return i;
                }
            }
        }
        scan[0]
    }
}

/// Mark the head child of every non-leaf node. POS nodes and unary nodes take
/// their only candidate; TOP takes its single child. Re-running overwrites
/// previous marks with the same result.
pub fn mark_heads(mut tree: ParseTree, rules: &HeadRuleSet) -> ParseTree {
    mark_in_place(&mut tree, rules);
    tree
}

fn mark_in_place(node: &mut ParseTree, rules: &HeadRuleSet) {
    if node.is_leaf() {
        return;
    }
    if node.is_pos() || node.children.len() == 1 {
        node.head = Some(0);
    } else {
        let labels: Vec<&str> = node.children.iter().map(|c| c.label.as_str()).collect();
        node.head = Some(rules.find_head(&node.label, &labels));
    }
    for c in &mut node.children {
        mark_in_place(c, rules);
    }
}
