//! PARSEVAL scoring (labeled recall/precision, crossing brackets) and the
//! node-height breakdown.
//!
//! Conventions: the TOP bracket and word-tagging brackets (nodes whose
//! children are all words and whose label is a known POS tag) are excluded;
//! punctuation tokens (by tag) are removed before spans are computed; label
//! comparison uses the stripped treebank label; a failed parse contributes
//! zero matched brackets but its gold brackets still count against recall.

use thiserror::Error;

use crate::treebank::ParseTree;

/// Word-tagging labels never counted as brackets.
const POS_TAGS: &[&str] = &[
    "CC", "CD", "DET", "DT", "EX", "FW", "IN", "JJ", "JJR", "JJS", "LS", "MD", "NN", "NNP",
    "NNPS", "NNS", "PDT", "POS", "PRP", "PRP$", "RB", "RBR", "RBS", "RP", "SYM", "TO", "UH",
    "VB", "VBD", "VBG", "VBN", "VBP", "VBZ", "WDT", "WP", "WP$", "WRB", "AUX", "AUXG",
];

/// Tags whose tokens are deleted before spans are computed.
const PUNCT_TAGS: &[&str] = &[",", ".", ":", "``", "''", "-NONE-"];

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("gold has {gold} sentences but test has {test}")]
    LengthMismatch { gold: usize, test: usize },
    #[error("sentence {0}: yields differ after punctuation normalization")]
    Alignment(usize),
    #[error("height thresholds must not be empty")]
    EmptyThresholds,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SentenceScore {
    pub matched: usize,
    pub gold: usize,
    pub test: usize,
    pub crossing: usize,
    pub failed: bool,
}

impl SentenceScore {
    pub fn recall(&self) -> f64 {
        ratio(self.matched, self.gold)
    }

    pub fn precision(&self) -> f64 {
        ratio(self.matched, self.test)
    }
}

/// Corpus-level PARSEVAL results with per-sentence detail.
#[derive(Debug, Clone, Default)]
pub struct Scorecard {
    pub sentences: Vec<SentenceScore>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Scorecard {
    pub fn matched(&self) -> usize {
        self.sentences.iter().map(|s| s.matched).sum()
    }

    pub fn gold_total(&self) -> usize {
        self.sentences.iter().map(|s| s.gold).sum()
    }

    pub fn test_total(&self) -> usize {
        self.sentences.iter().map(|s| s.test).sum()
    }

    /// Labeled recall over the corpus.
    pub fn lr(&self) -> f64 {
        ratio(self.matched(), self.gold_total())
    }

    /// Labeled precision over the corpus.
    pub fn lp(&self) -> f64 {
        ratio(self.matched(), self.test_total())
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.lp(), self.lr());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    /// Mean crossing brackets per sentence.
    pub fn cb(&self) -> f64 {
        if self.sentences.is_empty() {
            0.0
        } else {
            self.sentences.iter().map(|s| s.crossing as f64).sum::<f64>()
                / self.sentences.len() as f64
        }
    }

    /// Percentage of sentences with no crossing bracket.
    pub fn zero_cb_pct(&self) -> f64 {
        self.cb_at_most_pct(0)
    }

    /// Percentage of sentences with at most two crossing brackets.
    pub fn two_cb_pct(&self) -> f64 {
        self.cb_at_most_pct(2)
    }

    fn cb_at_most_pct(&self, k: usize) -> f64 {
        if self.sentences.is_empty() {
            return 0.0;
        }
        100.0 * self.sentences.iter().filter(|s| s.crossing <= k).count() as f64
            / self.sentences.len() as f64
    }
}

#[derive(Debug, Clone)]
struct Bracket {
    span: (usize, usize),
    label: String,
    height: f64,
}

fn is_tagging_node(node: &ParseTree) -> bool {
    node.is_pos() && POS_TAGS.contains(&node.label.as_str())
}

fn is_punct_node(node: &ParseTree) -> bool {
    node.is_pos() && PUNCT_TAGS.contains(&node.label.as_str())
}

/// Yield with punctuation tokens removed.
fn kept_yield(tree: &ParseTree) -> Vec<String> {
    let mut out = Vec::new();
    fn walk(node: &ParseTree, out: &mut Vec<String>) {
        if is_punct_node(node) {
            return;
        }
        if let Some(w) = &node.word {
            out.push(w.clone());
        }
        for c in &node.children {
            walk(c, out);
        }
    }
    walk(tree, &mut out);
    out
}

/// Brackets over punctuation-stripped word positions.
fn brackets(tree: &ParseTree) -> Vec<Bracket> {
    let mut out = Vec::new();
    fn walk(node: &ParseTree, pos: &mut usize, out: &mut Vec<Bracket>) -> (usize, usize) {
        if is_punct_node(node) {
            return (*pos, *pos);
        }
        if node.is_leaf() {
            *pos += 1;
            return (*pos - 1, *pos);
        }
        let start = *pos;
        for c in &node.children {
            walk(c, pos, out);
        }
        let span = (start, *pos);
        if !node.is_top() && !is_tagging_node(node) && span.1 > span.0 {
            out.push(Bracket {
                span,
                label: node.label.clone(),
                height: node_height(node),
            });
        }
        span
    }
    let mut pos = 0;
    walk(tree, &mut pos, &mut out);
    out
}

fn crossing_count(test: &[Bracket], gold: &[Bracket]) -> usize {
    test.iter()
        .filter(|t| {
            gold.iter().any(|g| {
                let (i, j) = t.span;
                let (a, b) = g.span;
                (i < a && a < j && j < b) || (a < i && i < b && b < j)
            })
        })
        .count()
}

fn match_count(gold: &[Bracket], test: &[Bracket]) -> usize {
    let mut used = vec![false; test.len()];
    let mut matched = 0;
    for g in gold {
        for (i, t) in test.iter().enumerate() {
            if !used[i] && t.span == g.span && t.label == g.label {
                used[i] = true;
                matched += 1;
                break;
            }
        }
    }
    matched
}

fn score_pair(
    id: usize,
    gold: &ParseTree,
    test: Option<&ParseTree>,
    threshold: f64,
) -> Result<SentenceScore, EvalError> {
    let gb: Vec<Bracket> = brackets(gold)
        .into_iter()
        .filter(|b| b.height <= threshold)
        .collect();
    let Some(test) = test else {
        return Ok(SentenceScore {
            matched: 0,
            gold: gb.len(),
            test: 0,
            crossing: 0,
            failed: true,
        });
    };
    if kept_yield(gold) != kept_yield(test) {
        return Err(EvalError::Alignment(id));
    }
    let tb: Vec<Bracket> = brackets(test)
        .into_iter()
        .filter(|b| b.height <= threshold)
        .collect();
    Ok(SentenceScore {
        matched: match_count(&gb, &tb),
        gold: gb.len(),
        test: tb.len(),
        crossing: crossing_count(&tb, &gb),
        failed: false,
    })
}

/// Score aligned gold/test sentences; `None` marks a failed parse.
pub fn score(gold: &[ParseTree], test: &[Option<ParseTree>]) -> Result<Scorecard, EvalError> {
    if gold.len() != test.len() {
        return Err(EvalError::LengthMismatch {
            gold: gold.len(),
            test: test.len(),
        });
    }
    let mut sentences = Vec::with_capacity(gold.len());
    for (i, (g, t)) in gold.iter().zip(test).enumerate() {
        sentences.push(score_pair(i, g, t.as_ref(), f64::INFINITY)?);
    }
    Ok(Scorecard { sentences })
}

/// Average edge-path length from a node down to the words it dominates.
pub fn node_height(node: &ParseTree) -> f64 {
    assert!(!node.is_leaf(), "node height is defined on non-leaves");
    fn depths(node: &ParseTree, d: usize, acc: &mut (usize, usize)) {
        if node.is_leaf() {
            acc.0 += d;
            acc.1 += 1;
            return;
        }
        for c in &node.children {
            depths(c, d + 1, acc);
        }
    }
    let mut acc = (0, 0);
    depths(node, 0, &mut acc);
    acc.0 as f64 / acc.1 as f64
}

/// F-score restricted to brackets of bounded node height, per threshold.
#[derive(Debug, Clone)]
pub struct HeightReport {
    pub points: Vec<(f64, f64)>,
}

impl HeightReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,F\n");
        for (t, f) in &self.points {
            out.push_str(&format!("{t},{f:.4}\n"));
        }
        out
    }
}

/// PARSEVAL F over constituents with node height at most each threshold,
/// applied to gold and test bracket sets independently.
pub fn height_curve(
    gold: &[ParseTree],
    test: &[Option<ParseTree>],
    thresholds: &[f64],
) -> Result<HeightReport, EvalError> {
    if thresholds.is_empty() {
        return Err(EvalError::EmptyThresholds);
    }
    if gold.len() != test.len() {
        return Err(EvalError::LengthMismatch {
            gold: gold.len(),
            test: test.len(),
        });
    }
    let mut points = Vec::with_capacity(thresholds.len());
    for &h in thresholds {
        let mut sentences = Vec::with_capacity(gold.len());
        for (i, (g, t)) in gold.iter().zip(test).enumerate() {
            sentences.push(score_pair(i, g, t.as_ref(), h)?);
        }
        points.push((h, Scorecard { sentences }.f1()));
    }
    Ok(HeightReport { points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treebank::parse_single;

    fn t(src: &str) -> ParseTree {
        parse_single(src).unwrap()
    }

    fn some(src: &str) -> Option<ParseTree> {
        Some(t(src))
    }

    #[test]
    fn identity_scores_perfectly() {
        let g = vec![t("(S (NP (DT a) (NN deal)) (VP (VBD was)))")];
        let s = score(&g, &[some("(S (NP (DT a) (NN deal)) (VP (VBD was)))")]).unwrap();
        assert_eq!(s.lr(), 1.0);
        assert_eq!(s.lp(), 1.0);
        assert_eq!(s.cb(), 0.0);
        assert_eq!(s.zero_cb_pct(), 100.0);
    }

    #[test]
    fn crossing_example_scores_one_third() {
        let g = vec![t("(S (NP a b) (VP c))")];
        let s = score(&g, &[some("(S (NP a) (VP b c))")]).unwrap();
        assert_eq!(s.matched(), 1, "only S matches");
        assert!((s.lr() - 1.0 / 3.0).abs() < 1e-12);
        assert!((s.lp() - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.sentences[0].crossing, 1, "test VP crosses gold NP");
    }

    #[test]
    fn swapping_gold_and_test_swaps_lr_lp_not_cb() {
        // one test bracket straddles two gold brackets: 1 crossing one way,
        // 2 the other
        let a = t("(S (A a b) (B c d))");
        let b = t("(S (NN a) (C b c) (NN d))");
        let ab = score(&[a.clone()], &[Some(b.clone())]).unwrap();
        let ba = score(&[b], &[Some(a)]).unwrap();
        assert_eq!(ab.lr(), ba.lp());
        assert_eq!(ab.lp(), ba.lr());
        assert_eq!(ab.sentences[0].crossing, 1);
        assert_eq!(ba.sentences[0].crossing, 2);
    }

    #[test]
    fn failed_parse_counts_against_recall_only() {
        let g = vec![t("(S (NP (DT a) (NN deal)) (VP (VBD was)))")];
        let s = score(&g, &[None]).unwrap();
        assert_eq!(s.gold_total(), 3, "S, NP, VP");
        assert_eq!(s.test_total(), 0);
        assert_eq!(s.lr(), 0.0);
        assert_eq!(s.lp(), 0.0);
    }

    #[test]
    fn punctuation_removed_before_spans() {
        let g = vec![t("(S (NP (NN deal)) (, ,) (VP (VBD was)))")];
        let s = score(&g, &[some("(S (NP (NN deal)) (VP (VBD was)))")]).unwrap();
        assert_eq!(s.lr(), 1.0, "comma does not matter");
    }

    #[test]
    fn yield_mismatch_is_an_alignment_error() {
        let g = vec![t("(S (NN a))")];
        assert_eq!(
            score(&g, &[some("(S (NN b))")]).unwrap_err(),
            EvalError::Alignment(0)
        );
    }

    #[test]
    fn heights() {
        let tree = t("(S (NP (JJ last) (NN week)) (NP (DET a) (NN deal)) \
                      (VP (VBD was) (VP (VBN sealed))))");
        let s = &tree.children[0];
        let pos = &s.children[0].children[0];
        assert_eq!(node_height(pos), 1.0);
        assert_eq!(node_height(&s.children[1]), 2.0);
        assert!((node_height(s) - 19.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn height_curve_at_infinity_matches_global_f() {
        let g = vec![t("(S (NP a b) (VP c))")];
        let test = vec![some("(S (NP a) (VP b c))")];
        let global = score(&g, &test).unwrap().f1();
        let report = height_curve(&g, &test, &[1.0, f64::INFINITY]).unwrap();
        assert!((report.points[1].1 - global).abs() < 1e-12);
        assert!(report.points[0].1 <= report.points[1].1 + 1e-12);
    }

    #[test]
    fn empty_thresholds_rejected() {
        assert_eq!(
            height_curve(&[], &[], &[]).unwrap_err(),
            EvalError::EmptyThresholds
        );
    }

    #[test]
    fn order_invariance() {
        let g1 = t("(S (NP a b) (VP c))");
        let g2 = t("(S (NP (DT x) (NN y)))");
        let t1 = some("(S (NP a) (VP b c))");
        let t2 = some("(S (NP (DT x) (NN y)))");
        let fwd = score(&[g1.clone(), g2.clone()], &[t1.clone(), t2.clone()]).unwrap();
        let rev = score(&[g2, g1], &[t2, t1]).unwrap();
        assert_eq!(fwd.lr(), rev.lr());
        assert_eq!(fwd.lp(), rev.lp());
        assert_eq!(fwd.cb(), rev.cb());
    }
}
