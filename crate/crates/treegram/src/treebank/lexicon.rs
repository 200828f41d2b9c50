//! Tagging lexicon: every word maps to all POS tags it cooccurred with.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{word_signature, ParseTree};

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("bad lexicon line {0}: {1}")]
    BadLine(usize, String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagLexicon {
    entries: BTreeMap<String, BTreeMap<String, u64>>,
}

impl TagLexicon {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn words(&self) -> usize {
        self.entries.len()
    }

    pub fn add(&mut self, word: &str, pos: &str) {
        *self
            .entries
            .entry(word.to_string())
            .or_default()
            .entry(pos.to_string())
            .or_insert(0) += 1;
    }

    pub fn tags(&self, word: &str) -> Option<&BTreeMap<String, u64>> {
        self.entries.get(word)
    }

    /// Direct lookup, falling back to the word's unknown signature. Returns
    /// the effective form actually found.
    pub fn lookup<'a, 'b>(&'a self, word: &'b str) -> Option<(String, &'a BTreeMap<String, u64>)> {
        if let Some(t) = self.entries.get(word) {
            return Some((word.to_string(), t));
        }
        let sig = word_signature(word);
        self.entries.get(&sig).map(|t| (sig, t))
    }

    /// One line per word: `word TAB pos:count[,pos:count]*`, sorted.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (word, tags) in &self.entries {
            out.push_str(word);
            out.push('\t');
            let parts: Vec<String> = tags.iter().map(|(p, c)| format!("{p}:{c}")).collect();
            out.push_str(&parts.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, LexiconError> {
        let mut lex = TagLexicon::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (word, rest) = line
                .split_once('\t')
                .ok_or_else(|| LexiconError::BadLine(i + 1, "missing tab".into()))?;
            for part in rest.split(',') {
                let (pos, count) = part
                    .split_once(':')
                    .ok_or_else(|| LexiconError::BadLine(i + 1, format!("bad entry {part}")))?;
                let count: u64 = count
                    .parse()
                    .map_err(|_| LexiconError::BadLine(i + 1, format!("bad count {count}")))?;
                *lex
                    .entries
                    .entry(word.to_string())
                    .or_default()
                    .entry(pos.to_string())
                    .or_insert(0) += count;
            }
        }
        Ok(lex)
    }
}

/// Collect word/POS cooccurrence counts from a (rare-word renamed) treebank.
pub fn build_tag_lexicon(trees: &[ParseTree]) -> TagLexicon {
    let mut lex = TagLexicon::default();
    for t in trees {
        collect(t, &mut lex);
    }
    lex
}

fn collect(node: &ParseTree, lex: &mut TagLexicon) {
    if node.is_pos() {
        for c in &node.children {
            if let Some(w) = &c.word {
                lex.add(w, &node.label);
            }
        }
        return;
    }
    for c in &node.children {
        collect(c, lex);
    }
}
