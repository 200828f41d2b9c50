//! Rare-word renaming to CAP+UNKNOWN+SUFF signature tokens.

use std::collections::HashMap;

use super::ParseTree;

/// Longest match wins; falls back to the final character, lowercased.
const SUFFIXES: &[&str] = &["ing", "ed", "ion", "er", "est", "ly", "ity", "s"];

/// Signature token for a surface form: `CAP+UNKNOWN+SUFF` where CAP is 1 iff
/// the first letter is capitalized. Pure function of the string.
pub fn word_signature(word: &str) -> String {
    let cap = if word.chars().next().map_or(false, |c| c.is_uppercase()) {
        '1'
    } else {
        '0'
    };
    let lower = word.to_lowercase();
    let mut best: Option<&str> = None;
    for s in SUFFIXES {
        if lower.ends_with(s) && best.map_or(true, |b| s.len() > b.len()) {
            best = Some(s);
        }
    }
    let suff = match best {
        Some(s) => s.to_string(),
        None => lower.chars().last().map(String::from).unwrap_or_default(),
    };
    format!("{cap}+UNKNOWN+{suff}")
}

/// Replace every word occurring fewer than `threshold` times in the corpus by
/// its signature token. Two-phase: count, then map.
pub fn rename_unknown_words(trees: Vec<ParseTree>, threshold: u64) -> Vec<ParseTree> {
    if threshold == 0 {
        return trees;
    }
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for t in &trees {
        count_words(t, &mut counts);
    }
    let rare: HashMap<String, String> = counts
        .iter()
        .filter(|(_, &c)| c < threshold)
        .map(|(w, _)| (w.to_string(), word_signature(w)))
        .collect();
    let mut trees = trees;
    for t in &mut trees {
        rename(t, &rare);
    }
    trees
}

fn count_words<'a>(node: &'a ParseTree, counts: &mut HashMap<&'a str, u64>) {
    if let Some(w) = &node.word {
        *counts.entry(w).or_insert(0) += 1;
    }
    for c in &node.children {
        count_words(c, counts);
    }
}

fn rename(node: &mut ParseTree, rare: &HashMap<String, String>) {
    if let Some(w) = &node.word {
        if let Some(sig) = rare.get(w) {
            node.word = Some(sig.clone());
        }
    }
    for c in &mut node.children {
        rename(c, rare);
    }
}
