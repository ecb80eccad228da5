use std::collections::BTreeMap;

use mmp_core::toi::{DecoratedTree, Node, TreeError, TreeTrace};
use mmp_core::{DecoratedChain, Move, MoveKind, MoveSite, MoveTrace};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveDoc {
    pub kind: String,
    pub site: String,
    pub before: String,
    pub after: String,
}

/// JSON form of a chain or tree trace; snapshots use the text grammar.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceDoc {
    pub start: String,
    pub end: String,
    pub moves: Vec<MoveDoc>,
}

impl From<&MoveTrace> for TraceDoc {
    fn from(t: &MoveTrace) -> Self {
        TraceDoc {
            start: t.start.to_string(),
            end: t.end.to_string(),
            moves: t
                .moves
                .iter()
                .map(|m| MoveDoc {
                    kind: m.kind.name().to_string(),
                    site: m.site.to_string(),
                    before: m.before.to_string(),
                    after: m.after.to_string(),
                })
                .collect(),
        }
    }
}

impl From<&TreeTrace> for TraceDoc {
    fn from(t: &TreeTrace) -> Self {
        TraceDoc {
            start: t.start.to_string(),
            end: t.end.to_string(),
            moves: t
                .moves
                .iter()
                .map(|m| MoveDoc {
                    kind: m.kind.name().to_string(),
                    site: m.site.clone(),
                    before: m.before.to_string(),
                    after: m.after.to_string(),
                })
                .collect(),
        }
    }
}

impl TraceDoc {
    /// Rebuilds the chain trace, checking every field parses.
    pub fn to_chain_trace(&self) -> Result<MoveTrace, CliError> {
        let chain = |s: &str| s.parse::<DecoratedChain>().map_err(CliError::from);
        let mut moves = Vec::with_capacity(self.moves.len());
        for (i, m) in self.moves.iter().enumerate() {
            let bad = |what: &str| CliError::Format(format!("move {}: {what}", i + 1));
            let kind = MoveKind::from_name(&m.kind).ok_or_else(|| bad("unknown kind"))?;
            let site = MoveSite::parse(kind, &m.site).ok_or_else(|| bad("bad site"))?;
            moves.push(Move { kind, site, before: chain(&m.before)?, after: chain(&m.after)? });
        }
        Ok(MoveTrace { start: chain(&self.start)?, moves, end: chain(&self.end)? })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub id: u32,
    pub w: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<u32>,
}

/// JSON form of a decorated tree; `bracket` names the node's group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDoc {
    pub nodes: Vec<NodeDoc>,
    pub edges: Vec<[u32; 2]>,
}

impl TreeDoc {
    pub fn to_tree(&self) -> Result<DecoratedTree, TreeError> {
        let mut nodes = BTreeMap::new();
        for n in &self.nodes {
            if nodes.insert(n.id, Node { weight: n.w, group: n.bracket }).is_some() {
                return Err(TreeError::DuplicateNode(n.id));
            }
        }
        DecoratedTree::new(nodes, self.edges.iter().map(|&[a, b]| (a, b)))
    }
}

impl From<&DecoratedTree> for TreeDoc {
    fn from(t: &DecoratedTree) -> Self {
        TreeDoc {
            nodes: t
                .nodes()
                .iter()
                .map(|(&id, n)| NodeDoc { id, w: n.weight, bracket: n.group })
                .collect(),
            edges: t.edges().iter().map(|&(a, b)| [a, b]).collect(),
        }
    }
}
