use clap::Args;

use treegram::model::load_model;
use treegram::tgram::{tgram_depth, Role};

use crate::{CliError, CliResult};

#[derive(Args)]
pub struct InspectArgs {
    /// Model file from `train`
    #[arg(long)]
    pub model: String,
    /// Keep fragments with this role (H, L or R)
    #[arg(long)]
    pub role: Option<String>,
    /// Keep fragments whose root carries this raw label
    #[arg(long)]
    pub label: Option<String>,
    /// Keep fragments of exactly this depth
    #[arg(long)]
    pub depth: Option<u32>,
    /// Append corpus counts
    #[arg(long)]
    pub counts: bool,
    /// Dump `ROLE TAB history TAB fragment TAB count` events instead
    #[arg(long)]
    pub events: bool,
    /// Dump the tag lexicon instead
    #[arg(long)]
    pub lexicon: bool,
}

pub fn run(args: InspectArgs) -> CliResult {
    let bytes = std::fs::read(&args.model)
        .map_err(|e| CliError::io(&format!("reading {}", args.model), e))?;
    let model = load_model(&bytes).map_err(|e| CliError::Usage(e.to_string()))?;

    if args.lexicon {
        print!("{}", model.lexicon.to_text());
        return Ok(());
    }
    if args.events {
        print!("{}", model.table.to_text());
        return Ok(());
    }

    let role = match args.role.as_deref() {
        None => None,
        Some("H") => Some(Role::Head),
        Some("L") => Some(Role::Left),
        Some("R") => Some(Role::Right),
        Some(other) => {
            return Err(CliError::Usage(format!(
                "unknown role {other:?} (H, L or R)"
            )))
        }
    };
    let mode = model.meta.extraction.depth_mode;
    let mut lines: Vec<String> = model
        .table
        .tgram_totals()
        .into_iter()
        .filter(|((r, t), _)| {
            role.map_or(true, |want| *r == want)
                && args
                    .label
                    .as_deref()
                    .map_or(true, |want| t.root.label.wsj == want)
                && args.depth.map_or(true, |want| tgram_depth(t, mode) == want)
        })
        .map(|((_, t), count)| {
            if args.counts {
                format!("{t}\t{count}")
            } else {
                t.to_line()
            }
        })
        .collect();
    lines.sort();
    lines.dedup();
    for line in lines {
        println!("{line}");
    }
    Ok(())
}
