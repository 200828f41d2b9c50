use clap::Args;

use treegram::model::save_model;
use treegram::pipeline::{train, PrepOptions};
use treegram::tgram::Role;
use treegram::treebank::parse_bracketed;

use super::{load_complement_rules, load_config, load_head_rules, read_file, write_file};
use crate::{CliError, CliResult};

#[derive(Args)]
pub struct TrainArgs {
    /// Bracketed treebank files
    #[arg(long, required = true, num_args = 1..)]
    pub treebank: Vec<String>,
    /// Output model path
    #[arg(long)]
    pub model: String,
    /// TOML config file; flags below override it
    #[arg(long)]
    pub config: Option<String>,
    /// Pre-head order: 0, 1 or 2
    #[arg(long)]
    pub prehead: Option<u8>,
    /// Fragment depth bound (0 = unbounded)
    #[arg(long)]
    pub max_depth: Option<u32>,
    /// Bound on open leaves plus open node sides (0 = unbounded)
    #[arg(long)]
    pub max_open: Option<u32>,
    /// Bound on words per fragment (0 = unbounded)
    #[arg(long)]
    pub max_words: Option<u32>,
    /// Bound on children per fragment node (0 = unbounded)
    #[arg(long)]
    pub max_branching: Option<u32>,
    /// Drop fragments seen fewer than this many times
    #[arg(long)]
    pub min_freq: Option<u64>,
    /// First-order Markov conditioning once subcat frames are empty
    #[arg(long)]
    pub markov: bool,
    /// Rename words seen fewer than this many times
    #[arg(long)]
    pub unknown_threshold: Option<u64>,
    /// Head rule table (default: built-in Collins-style table)
    #[arg(long)]
    pub head_rules: Option<String>,
    /// Complement rule table
    #[arg(long)]
    pub complement_rules: Option<String>,
    /// Also write the tag lexicon as text
    #[arg(long)]
    pub lexicon_out: Option<String>,
    /// Also write the count table as a text dump
    #[arg(long)]
    pub dump: Option<String>,
    /// Print the effective configuration as TOML and continue
    #[arg(long)]
    pub print_config: bool,
}

pub fn run(args: TrainArgs) -> CliResult {
    let mut cfg = load_config(&args.config)?;
    if let Some(v) = args.prehead {
        cfg.prehead_order = v;
    }
    if let Some(v) = args.max_depth {
        cfg.max_depth = v;
    }
    if let Some(v) = args.max_open {
        cfg.max_open = v;
    }
    if let Some(v) = args.max_words {
        cfg.max_words = v;
    }
    if let Some(v) = args.max_branching {
        cfg.max_branching = v;
    }
    if let Some(v) = args.min_freq {
        cfg.min_freq = v;
    }
    if args.markov {
        cfg.markov = true;
    }
    if let Some(v) = args.unknown_threshold {
        cfg.unknown_threshold = v;
    }
    if cfg.prehead_order > 2 {
        return Err(CliError::Usage("pre-head order must be 0, 1 or 2".into()));
    }
    if args.print_config {
        print!("{}", cfg.to_toml());
    }

    let mut trees = Vec::new();
    for path in &args.treebank {
        let text = read_file(path)?;
        let mut parsed = parse_bracketed(&text)
            .map_err(|e| CliError::Usage(format!("{path}: {e}")))?;
        trees.append(&mut parsed);
    }
    let n_trees = trees.len();

    let opts = PrepOptions {
        prehead_order: cfg.prehead_order,
        unknown_threshold: cfg.unknown_threshold,
        head_rules: load_head_rules(&args.head_rules)?,
        complement_rules: load_complement_rules(&args.complement_rules)?,
    };
    let extraction = cfg.extraction().map_err(CliError::Usage)?;
    let model =
        train(trees, &opts, extraction, cfg.markov).map_err(CliError::Usage)?;

    let totals = model.table.tgram_totals();
    let count_role = |r: Role| totals.keys().filter(|(role, _)| *role == r).count();
    let (h, l, r) = (
        count_role(Role::Head),
        count_role(Role::Left),
        count_role(Role::Right),
    );
    println!("trees: {n_trees}");
    println!("fragments: H {h}  L {l}  R {r}  (distinct)");
    println!("histories: {}", model.table.num_keys());
    println!("lexicon words: {}", model.lexicon.words());
    if h + l + r == 0 {
        eprintln!("warning: no fragments survived the frequency threshold");
    }

    write_file(&args.model, save_model(&model))?;
    if let Some(path) = &args.lexicon_out {
        write_file(path, model.lexicon.to_text())?;
    }
    if let Some(path) = &args.dump {
        write_file(path, model.table.to_text())?;
    }
    Ok(())
}
