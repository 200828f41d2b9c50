//! Penn-Treebank-style bracketed reader.

use thiserror::Error;

use super::{add_top, ParseTree};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BracketError {
    #[error("unbalanced parentheses at byte {0}")]
    Unbalanced(usize),
    #[error("empty node label at byte {0}")]
    EmptyLabel(usize),
    #[error("node at byte {0} mixes word and constituent children")]
    MixedChildren(usize),
    #[error("unexpected token at byte {0}")]
    Unexpected(usize),
}

/// Read a sequence of bracketed trees. Each tree is wrapped under a TOP root
/// with spans assigned. The PTB file convention of an extra unlabeled outer
/// bracket per tree is unwrapped.
pub fn parse_bracketed(text: &str) -> Result<Vec<ParseTree>, BracketError> {
    let bytes = text.as_bytes();
    let mut pos = 0usize;
    let mut trees = Vec::new();
    loop {
        skip_ws(bytes, &mut pos);
        if pos >= bytes.len() {
            break;
        }
        if bytes[pos] != b'(' {
            return Err(BracketError::Unexpected(pos));
        }
        let tree = parse_node(bytes, &mut pos, true)?;
        trees.push(add_top(unwrap_file_bracket(tree)));
    }
    Ok(trees)
}

/// One tree per call sites that know the input holds exactly one.
pub fn parse_single(text: &str) -> Result<ParseTree, BracketError> {
    let trees = parse_bracketed(text)?;
    assert_eq!(trees.len(), 1, "expected exactly one tree");
    Ok(trees.into_iter().next().unwrap())
}

/// Read parser output: a sequence of trees in which the literal chunk
/// `(())` marks a failed parse.
pub fn parse_test_parses(text: &str) -> Result<Vec<Option<ParseTree>>, BracketError> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut pos = 0usize;
    loop {
        skip_ws(bytes, &mut pos);
        if pos >= bytes.len() {
            break;
        }
        if bytes[pos] != b'(' {
            return Err(BracketError::Unexpected(pos));
        }
        let start = pos;
        let mut depth = 0usize;
        while pos < bytes.len() {
            match bytes[pos] {
                b'(' => depth += 1,
                b')' => {
                    depth -= 1;
                    if depth == 0 {
                        pos += 1;
                        break;
                    }
                }
                _ => {}
            }
            pos += 1;
        }
        if depth != 0 {
            return Err(BracketError::Unbalanced(bytes.len()));
        }
        let chunk = text[start..pos].trim();
        let compact: String = chunk.chars().filter(|c| !c.is_whitespace()).collect();
        if compact == "(())" {
            out.push(None);
        } else {
            out.push(Some(parse_single(chunk)?));
        }
    }
    Ok(out)
}

fn unwrap_file_bracket(tree: ParseTree) -> ParseTree {
    if tree.label.is_empty() && tree.children.len() == 1 && !tree.children[0].is_leaf() {
        tree.children.into_iter().next().unwrap()
    } else {
        tree
    }
}

fn skip_ws(bytes: &[u8], pos: &mut usize) {
    while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
}

fn is_token_end(b: u8) -> bool {
    b == b'(' || b == b')' || b.is_ascii_whitespace()
}

fn read_token<'a>(bytes: &'a [u8], pos: &mut usize) -> &'a str {
    let start = *pos;
    while *pos < bytes.len() && !is_token_end(bytes[*pos]) {
        *pos += 1;
    }
    std::str::from_utf8(&bytes[start..*pos]).expect("input was str")
}

/// `toplevel` permits the empty-label file bracket; nested empty labels are
/// rejected.
fn parse_node(bytes: &[u8], pos: &mut usize, toplevel: bool) -> Result<ParseTree, BracketError> {
    debug_assert_eq!(bytes[*pos], b'(');
    let open_at = *pos;
    *pos += 1;
    skip_ws(bytes, pos);
    if *pos >= bytes.len() {
        return Err(BracketError::Unbalanced(bytes.len()));
    }
    let raw_label = if bytes[*pos] == b'(' || bytes[*pos] == b')' {
        ""
    } else {
        read_token(bytes, pos)
    };
    let mut children = Vec::new();
    let mut saw_word = false;
    let mut saw_node = false;
    loop {
        skip_ws(bytes, pos);
        if *pos >= bytes.len() {
            return Err(BracketError::Unbalanced(bytes.len()));
        }
        match bytes[*pos] {
            b')' => {
                *pos += 1;
                break;
            }
            b'(' => {
                saw_node = true;
                children.push(parse_node(bytes, pos, false)?);
            }
            _ => {
                saw_word = true;
                let w = read_token(bytes, pos);
                children.push(ParseTree::leaf(w));
            }
        }
    }
    if saw_word && saw_node {
        return Err(BracketError::MixedChildren(open_at));
    }
    if raw_label.is_empty() && !(toplevel && saw_node && !saw_word) {
        return Err(BracketError::EmptyLabel(open_at));
    }
    let (label, ftags) = split_label(raw_label);
    let mut node = ParseTree::node(label, children);
    node.ftags = ftags;
    Ok(node)
}

/// Split function tags and coindices off a label. `NP-SBJ-1` keeps label
/// `NP` and tag `SBJ`; indices are dropped. Labels that begin with `-`
/// (e.g. `-NONE-`, `-LRB-`) are left intact.
fn split_label(raw: &str) -> (String, Vec<String>) {
    if raw.starts_with('-') || raw.is_empty() {
        return (raw.to_string(), Vec::new());
    }
    let mut parts = raw.split(|c| c == '-' || c == '=');
    let label = parts.next().unwrap_or("").to_string();
    let mut ftags = Vec::new();
    for p in parts {
        if !p.is_empty() && !p.chars().all(|c| c.is_ascii_digit()) {
            ftags.push(p.to_string());
        }
    }
    (label, ftags)
}
