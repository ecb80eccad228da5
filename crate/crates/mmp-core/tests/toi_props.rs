use std::collections::BTreeMap;

use mmp_core::flip::antiflip;
use mmp_core::t0::is_t0;
use mmp_core::toi::{contract_tree, find_isomorphism, templates, tree_antiflip, DecoratedTree, Node};
use mmp_core::{Case, DecoratedChain, FlipSite, Segment};

/// Reads a path-shaped tree from end `start` as a decorated chain.
fn as_chain(t: &DecoratedTree, start: u32) -> DecoratedChain {
    let mut order = vec![start];
    while let Some(next) = t.neighbors(*order.last().unwrap()).find(|x| !order.contains(x)) {
        order.push(next);
    }
    assert_eq!(order.len(), t.len());
    let mut segs: Vec<Segment> = Vec::new();
    let mut current: Option<(u32, Vec<i64>)> = None;
    for id in order {
        let n = t.node(id).unwrap();
        match (n.group, current.as_mut()) {
            (Some(g), Some((cg, ws))) if *cg == g => ws.push(n.weight),
            (g, _) => {
                if let Some((_, ws)) = current.take() {
                    segs.push(Segment::Bracket(ws));
                }
                match g {
                    Some(g) => current = Some((g, vec![n.weight])),
                    None => segs.push(Segment::Plain(n.weight)),
                }
            }
        }
    }
    if let Some((_, ws)) = current {
        segs.push(Segment::Bracket(ws));
    }
    DecoratedChain::new(segs).unwrap()
}

#[test]
fn tree_antiflip_matches_chain_case_b() {
    for d in 3..=9 {
        for c in 2..=6 {
            let nodes = BTreeMap::from([(1, Node { weight: d, group: None }), (2, Node { weight: c, group: None })]);
            let t = DecoratedTree::new(nodes, vec![(1, 2)]).unwrap();
            let out = tree_antiflip(&t, 1, 2).unwrap();
            let chain = antiflip(&DecoratedChain::plain(&[d, c]).unwrap(), FlipSite::ltr(1, Case::B)).unwrap();
            assert_eq!(as_chain(&out, 1), chain, "d={d} c={c}");
        }
    }
}

#[test]
fn templates_replay_to_their_targets() {
    for g in templates() {
        let trace = g.replay().unwrap();
        assert!(find_isomorphism(&trace.end, &g.target).is_some(), "template {}", g.index);
        assert_eq!(contract_tree(&g.target).unwrap(), g.derived_start());
        for grp in g.target.groups() {
            let ws: Vec<i64> = g.target.group_path(grp).iter().map(|&id| g.target.node(id).unwrap().weight).collect();
            assert!(is_t0(&ws), "template {}: {ws:?}", g.index);
        }
    }
}

#[test]
fn only_the_third_printed_start_differs() {
    let differing: Vec<u8> = templates()
        .into_iter()
        .filter(|g| find_isomorphism(&g.printed_start, &g.derived_start()).is_none())
        .map(|g| g.index)
        .collect();
    assert_eq!(differing, vec![3]);
}
