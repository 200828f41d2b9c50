pub mod eval;
pub mod inspect;
pub mod parse;
pub mod train;

use std::path::Path;

use treegram::treebank::{ComplementRules, HeadRuleSet};

use crate::config::RunConfig;
use crate::CliError;

/// Directory searched for `head.rules` / `complement.rules` when no explicit
/// flag is given.
pub const RULES_DIR_ENV: &str = "TREEGRAM_RULES_DIR";

pub fn read_file(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(&format!("reading {path}"), e))
}

pub fn write_file(path: &str, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(&format!("writing {path}"), e))
}

fn rules_text(flag: &Option<String>, file_name: &str) -> Result<Option<String>, CliError> {
    if let Some(path) = flag {
        return read_file(path).map(Some);
    }
    if let Ok(dir) = std::env::var(RULES_DIR_ENV) {
        let path = Path::new(&dir).join(file_name);
        if path.exists() {
            return std::fs::read_to_string(&path)
                .map(Some)
                .map_err(|e| CliError::io(&format!("reading {}", path.display()), e));
        }
    }
    Ok(None)
}

pub fn load_head_rules(flag: &Option<String>) -> Result<HeadRuleSet, CliError> {
    match rules_text(flag, "head.rules")? {
        Some(text) => HeadRuleSet::parse(&text).map_err(CliError::Usage),
        None => Ok(HeadRuleSet::default()),
    }
}

pub fn load_complement_rules(flag: &Option<String>) -> Result<ComplementRules, CliError> {
    match rules_text(flag, "complement.rules")? {
        Some(text) => ComplementRules::parse(&text).map_err(CliError::Usage),
        None => Ok(ComplementRules::default()),
    }
}

/// Start from the config file (when given) and apply explicit flags on top.
pub fn load_config(config_path: &Option<String>) -> Result<RunConfig, CliError> {
    match config_path {
        Some(path) => RunConfig::from_toml(&read_file(path)?).map_err(CliError::Usage),
        None => Ok(RunConfig::default()),
    }
}
