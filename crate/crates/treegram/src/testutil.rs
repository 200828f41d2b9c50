//! Shared fixtures for unit tests.

use crate::model::{observe_corpus, CountTable};
use crate::tgram::{extract_treebank, ExtractionConfig, Role, TGram};
use crate::treebank::{
    enrich_preheads, mark_complements, mark_heads, parse_single, ComplementRules, HeadRuleSet,
    ParseTree,
};

/// The six-word example tree.
pub const FIG2: &str = "(S (NP (JJ last) (NN week)) (NP (DET a) (NN deal)) \
                        (VP (VBD was) (VP (VBN sealed))))";

/// The four-word tree whose derivation walks the subject frame to empty.
pub const FIG4_TREE: &str = "(S (NP (DET a) (NN deal)) (VP (VBD was) (VP (VBN sealed))))";

/// Full preprocessing at the given pre-head order.
pub fn prep(src: &str, order: u8) -> ParseTree {
    let t = mark_heads(parse_single(src).unwrap(), &HeadRuleSet::default());
    let t = mark_complements(t, &ComplementRules::default());
    enrich_preheads(t, order)
}

/// Train a table on one tree with unlimited extraction.
pub fn table_for(src: &str, order: u8, markov: bool) -> CountTable {
    let t = prep(src, order);
    observe_corpus(&extract_treebank(
        std::slice::from_ref(&t),
        &ExtractionConfig::unlimited(),
        markov,
    ))
}

/// Look a fragment up by its serialized line.
pub fn find_tgram(table: &CountTable, role: Role, line: &str) -> TGram {
    for (r, _, ts) in table.iter() {
        if r != role {
            continue;
        }
        for (t, _) in ts {
            if t.to_line() == line {
                return t.clone();
            }
        }
    }
    panic!("fragment {line:?} not in table");
}
