//! Pre-head enrichment: a structural stand-in for head lexicalization.

use super::{ParseTree, PreHead};

/// Attach a pre-head of the given order to every phrasal node (non-leaf,
/// non-POS, non-TOP). Order 0 leaves labels untouched; order 1 records the
/// head-word's POS tag; order 2 additionally records the raw label of that
/// POS node's mother. Requires heads to be marked.
pub fn enrich_preheads(mut tree: ParseTree, order: u8) -> ParseTree {
    assert!(order <= 2, "pre-head order must be 0, 1 or 2");
    if order > 0 {
        enrich_in_place(&mut tree, order);
    }
    tree
}

fn enrich_in_place(node: &mut ParseTree, order: u8) {
    if node.is_leaf() {
        return;
    }
    if !node.is_pos() && !node.is_top() {
        let (pos, mother) = node.head_pos_and_mother();
        node.prehead = Some(PreHead {
            head_pos: pos.to_string(),
            mother: (order == 2).then(|| mother.to_string()),
        });
    }
    for c in &mut node.children {
        enrich_in_place(c, order);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treebank::bracketed::parse_single;
    use crate::treebank::heads::{mark_heads, HeadRuleSet};

    const FIG2: &str = "(S (NP (JJ last) (NN week)) (NP (DET a) (NN deal)) \
                        (VP (VBD was) (VP (VBN sealed))))";

    fn headed(src: &str) -> ParseTree {
        mark_heads(parse_single(src).unwrap(), &HeadRuleSet::default())
    }

    #[test]
    fn order_zero_is_identity() {
        let t = headed(FIG2);
        assert_eq!(enrich_preheads(t.clone(), 0), t);
    }

    #[test]
    fn order_one_records_head_pos() {
        let t = enrich_preheads(headed(FIG2), 1);
        let np = &t.children[0].children[1];
        assert_eq!(
            np.prehead,
            Some(PreHead {
                head_pos: "NN".into(),
                mother: None
            })
        );
    }

    #[test]
    fn order_two_records_pos_mother() {
        let t = enrich_preheads(headed(FIG2), 2);
        let s = &t.children[0];
        // head word "was" sits under VBD whose mother is the outer VP
        assert_eq!(
            s.prehead,
            Some(PreHead {
                head_pos: "VBD".into(),
                mother: Some("VP".into())
            })
        );
    }

    #[test]
    fn depth_two_constituent_mother_is_itself() {
        let t = enrich_preheads(headed("(S (NP (DET a) (NN deal)) (VP (VBD was)))"), 2);
        let np = &t.children[0].children[0];
        assert_eq!(
            np.prehead,
            Some(PreHead {
                head_pos: "NN".into(),
                mother: Some("NP".into())
            })
        );
    }

    #[test]
    fn order_two_refines_order_one() {
        let one = enrich_preheads(headed(FIG2), 1);
        let mut two = enrich_preheads(headed(FIG2), 2);
        fn erase_mothers(n: &mut ParseTree) {
            if let Some(ph) = &mut n.prehead {
                ph.mother = None;
            }
            n.children.iter_mut().for_each(erase_mothers);
        }
        erase_mothers(&mut two);
        assert_eq!(one, two);
    }

    #[test]
    fn pos_and_top_unchanged() {
        let t = enrich_preheads(headed(FIG2), 2);
        assert!(t.prehead.is_none(), "TOP is never enriched");
        let jj = &t.children[0].children[0].children[0];
        assert!(jj.prehead.is_none());
    }
}
