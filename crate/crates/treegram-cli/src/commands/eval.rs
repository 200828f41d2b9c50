use clap::Args;

use treegram::eval::{height_curve, score};
use treegram::treebank::{parse_bracketed, parse_test_parses, ParseTree};

use super::{read_file, write_file};
use crate::{CliError, CliResult};

#[derive(Args)]
pub struct EvalArgs {
    /// Gold bracketed trees
    #[arg(long)]
    pub gold: String,
    /// Test parses; `(())` lines mark failures
    #[arg(long)]
    pub test: String,
    /// Skip sentences longer than this many words (punctuation included)
    #[arg(long)]
    pub len_cutoff: Option<usize>,
    /// Node-height thresholds for the F-score curve, comma separated
    #[arg(long, value_delimiter = ',')]
    pub heights: Vec<f64>,
    /// Per-sentence scores as CSV
    #[arg(long)]
    pub csv: Option<String>,
    /// Height curve as CSV (`threshold,F` lines)
    #[arg(long)]
    pub height_csv: Option<String>,
}

pub fn run(args: EvalArgs) -> CliResult {
    let gold_all = parse_bracketed(&read_file(&args.gold)?)
        .map_err(|e| CliError::Usage(format!("{}: {e}", args.gold)))?;
    let test_all = parse_test_parses(&read_file(&args.test)?)
        .map_err(|e| CliError::Usage(format!("{}: {e}", args.test)))?;
    if gold_all.len() != test_all.len() {
        return Err(CliError::Usage(format!(
            "gold has {} sentences, test has {}",
            gold_all.len(),
            test_all.len()
        )));
    }

    // the length cutoff counts raw tokens, punctuation included
    let keep: Vec<bool> = gold_all
        .iter()
        .map(|g| args.len_cutoff.map_or(true, |n| g.words().len() <= n))
        .collect();
    let gold: Vec<ParseTree> = gold_all
        .iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(g, _)| g.clone())
        .collect();
    let test: Vec<Option<ParseTree>> = test_all
        .iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(t, _)| t.clone())
        .collect();

    let card = score(&gold, &test).map_err(|e| CliError::Usage(e.to_string()))?;
    println!(
        "sentences: {} (of {})",
        gold.len(),
        gold_all.len()
    );
    println!(
        "LR: {:.1}  LP: {:.1}  F1: {:.1}",
        card.lr() * 100.0,
        card.lp() * 100.0,
        card.f1() * 100.0
    );
    println!(
        "CB: {:.2}  0CB: {:.1}%  2CB: {:.1}%",
        card.cb(),
        card.zero_cb_pct(),
        card.two_cb_pct()
    );

    if let Some(path) = &args.csv {
        let mut out = String::from("sentence_id,LR,LP,CB\n");
        for (i, s) in card.sentences.iter().enumerate() {
            out.push_str(&format!(
                "{i},{:.4},{:.4},{}\n",
                s.recall(),
                s.precision(),
                s.crossing
            ));
        }
        out.push_str(&format!(
            "all,{:.4},{:.4},{:.4}\n",
            card.lr(),
            card.lp(),
            card.cb()
        ));
        write_file(path, out)?;
    }

    if !args.heights.is_empty() {
        let report = height_curve(&gold, &test, &args.heights)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let mut out = String::new();
        for (t, f) in &report.points {
            out.push_str(&format!("{t},{f:.4}\n"));
        }
        match &args.height_csv {
            Some(path) => write_file(path, out)?,
            None => print!("{out}"),
        }
    }
    Ok(())
}
