//! End-to-end composition: preprocessing and training.

use crate::model::{observe_corpus, ModelFile, TrainMeta};
use crate::tgram::{extract_treebank, ExtractionConfig};
use crate::treebank::{
    build_tag_lexicon, enrich_preheads, mark_complements, mark_heads, rename_unknown_words,
    ComplementRules, HeadRuleSet, ParseTree, TagLexicon,
};

#[derive(Debug, Clone, Default)]
pub struct PrepOptions {
    pub prehead_order: u8,
    pub unknown_threshold: u64,
    pub head_rules: HeadRuleSet,
    pub complement_rules: ComplementRules,
}

/// Head marking, complement marking, rare-word renaming, lexicon building
/// and pre-head enrichment, in that order.
pub fn preprocess(
    trees: Vec<ParseTree>,
    opts: &PrepOptions,
) -> Result<(Vec<ParseTree>, TagLexicon), String> {
    for t in &trees {
        t.check_pos_arity()?;
    }
    let trees: Vec<ParseTree> = trees
        .into_iter()
        .map(|t| {
            let t = mark_heads(t, &opts.head_rules);
            mark_complements(t, &opts.complement_rules)
        })
        .collect();
    let trees = rename_unknown_words(trees, opts.unknown_threshold);
    let lexicon = build_tag_lexicon(&trees);
    let trees = trees
        .into_iter()
        .map(|t| enrich_preheads(t, opts.prehead_order))
        .collect();
    Ok((trees, lexicon))
}

/// Train a complete model from raw trees.
pub fn train(
    trees: Vec<ParseTree>,
    opts: &PrepOptions,
    extraction: ExtractionConfig,
    markov: bool,
) -> Result<ModelFile, String> {
    let (trees, lexicon) = preprocess(trees, opts)?;
    let events = extract_treebank(&trees, &extraction, markov);
    let table = observe_corpus(&events);
    Ok(ModelFile {
        meta: TrainMeta {
            prehead_order: opts.prehead_order,
            markov,
            unknown_threshold: opts.unknown_threshold,
            extraction,
        },
        lexicon,
        table,
    })
}
