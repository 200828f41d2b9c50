use clap::Args;
use rayon::prelude::*;

use treegram::model::{load_model, ModelFile};
use treegram::parser::{parse_mpd, tag_lattice, ParseOutcome, ParserConfig};
use treegram::tgram::Role;
use treegram::treebank::{ParseTree, TOP};

use super::{load_config, read_file, write_file};
use crate::{CliError, CliResult};

#[derive(Args)]
pub struct ParseArgs {
    /// Model file from `train`
    #[arg(long)]
    pub model: String,
    /// Sentences, one per line, pre-tokenized
    #[arg(long)]
    pub input: String,
    /// Bracketed output, one tree (or `(())`) per line
    #[arg(long)]
    pub output: String,
    /// TOML config file; flags below override it
    #[arg(long)]
    pub config: Option<String>,
    /// Per-sentence log-probability sidecar
    #[arg(long)]
    pub report: Option<String>,
    /// Sentence-level parallelism
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Keep at most this many finished constituents per span (0 = off)
    #[arg(long)]
    pub beam_width: Option<usize>,
    /// Log-probability margin below the span best (0 = off)
    #[arg(long)]
    pub beam_margin: Option<f64>,
    /// Emit a flat right-branching tree instead of `(())` on failure
    #[arg(long)]
    pub fallback_rightbranch: bool,
}

pub fn run(args: ParseArgs) -> CliResult {
    let mut cfg = load_config(&args.config)?;
    if let Some(v) = args.jobs {
        cfg.jobs = v;
    }
    if let Some(v) = args.beam_width {
        cfg.beam_width = v;
    }
    if let Some(v) = args.beam_margin {
        cfg.beam_margin = v;
    }
    if args.fallback_rightbranch {
        cfg.fallback_rightbranch = true;
    }

    let bytes = std::fs::read(&args.model)
        .map_err(|e| CliError::io(&format!("reading {}", args.model), e))?;
    let model = load_model(&bytes).map_err(|e| CliError::Usage(e.to_string()))?;

    let text = read_file(&args.input)?;
    let sentences: Vec<Vec<String>> = text
        .lines()
        .map(|l| l.split_whitespace().map(str::to_string).collect())
        .collect();

    let pcfg = ParserConfig {
        beam_width: (cfg.beam_width > 0).then_some(cfg.beam_width),
        beam_margin: (cfg.beam_margin > 0.0).then_some(cfg.beam_margin),
    };
    let parse_one = |sentence: &Vec<String>| -> (String, String) {
        if sentence.is_empty() {
            return ("(())".to_string(), "FAIL\tempty sentence".to_string());
        }
        match parse_mpd(sentence, &model, &pcfg) {
            ParseOutcome::Parsed {
                tree,
                log_prob,
                derivation,
            } => (
                tree.to_bracketed(),
                format!("OK\t{log_prob:.6}\t{} steps", derivation.steps.len()),
            ),
            ParseOutcome::Failure { reason } => {
                if cfg.fallback_rightbranch {
                    match fallback_tree(sentence, &model) {
                        Some(t) => (t.to_bracketed(), format!("FALLBACK\t{reason}")),
                        None => ("(())".to_string(), format!("FAIL\t{reason}")),
                    }
                } else {
                    ("(())".to_string(), format!("FAIL\t{reason}"))
                }
            }
        }
    };

    let results: Vec<(String, String)> = if cfg.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| CliError::Internal(e.to_string()))?;
        pool.install(|| sentences.par_iter().map(parse_one).collect())
    } else {
        sentences.iter().map(parse_one).collect()
    };

    let mut out = String::new();
    let mut failures = 0usize;
    for (tree, _) in &results {
        if tree == "(())" {
            failures += 1;
        }
        out.push_str(tree);
        out.push('\n');
    }
    write_file(&args.output, out)?;
    if let Some(path) = &args.report {
        let mut rep = String::new();
        for (i, (_, status)) in results.iter().enumerate() {
            rep.push_str(&format!("{i}\t{status}\n"));
        }
        write_file(path, rep)?;
    }
    println!(
        "parsed {} sentences, {} failures",
        sentences.len(),
        failures
    );
    Ok(())
}

/// Flat right-branching stand-in for failed parses: every word tagged with
/// its most frequent POS, spine labeled with the most frequent root label.
fn fallback_tree(sentence: &[String], model: &ModelFile) -> Option<ParseTree> {
    let lattice = tag_lattice(sentence, &model.lexicon).ok()?;
    let root_label = most_frequent_root(model)?;
    let mut pos_nodes = Vec::new();
    for (i, word) in sentence.iter().enumerate() {
        let tags = model.lexicon.tags(&lattice.effective[i])?;
        let best = tags.iter().max_by_key(|(_, &c)| c)?.0.clone();
        pos_nodes.push(ParseTree::node(best, vec![ParseTree::leaf(word.clone())]));
    }
    let mut node = pos_nodes.pop()?;
    node = ParseTree::node(root_label.clone(), vec![node]);
    while let Some(pos) = pos_nodes.pop() {
        node = ParseTree::node(root_label.clone(), vec![pos, node]);
    }
    let mut top = ParseTree::node(TOP, vec![node]);
    top.assign_spans(0);
    Some(top)
}

fn most_frequent_root(model: &ModelFile) -> Option<String> {
    let mut counts: std::collections::BTreeMap<&str, u64> = Default::default();
    for (role, hist, ts) in model.table.iter() {
        if role != Role::Head {
            continue;
        }
        if let treegram::model::History::Head(h) = hist {
            if h.parent == TOP {
                *counts.entry(&h.label.wsj).or_insert(0) += ts.map(|(_, c)| c).sum::<u64>();
            }
        }
    }
    counts
        .into_iter()
        .max_by_key(|&(_, c)| c)
        .map(|(l, _)| l.to_string())
}
