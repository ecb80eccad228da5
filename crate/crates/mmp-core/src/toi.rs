//! Decorated trees for the star-shaped resolution graphs of tetrahedral,
//! octahedral and icosahedral singularities, the nine non-linear templates and
//! their move scripts, and lifting of chain traces onto a linear subgraph.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::chain::{DecoratedChain, Segment};
use crate::driver::{self, Move, MoveKind, MoveSite};
use crate::flip::{ltr_flip_shape, Case, FlipSite, Orientation};
use crate::t0::is_t0;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("tree parse error: {0}")]
    Parse(String),
    #[error("duplicate node {0}")]
    DuplicateNode(u32),
    #[error("edge {0}-{1} is invalid")]
    BadEdge(u32, u32),
    #[error("edges do not form a tree")]
    NotATree,
    #[error("node {0} has an invalid weight")]
    BadWeight(u32),
    #[error("bracket group {0} is not a path")]
    BadGroup(u32),
    #[error("node {0} is unknown")]
    UnknownNode(u32),
    #[error("no antiflip from {d} towards {c}")]
    InvalidSite { d: u32, c: u32 },
    #[error("nodes {0:?} do not form a simple path of plain curves")]
    NotAPath(Vec<u32>),
    #[error("weights {0:?} do not form a class T0 chain")]
    NotT0(Vec<i64>),
    #[error("contraction gets stuck at node {0}")]
    NotContractible(u32),
    #[error("bracket subgraph matches no supported shape")]
    Unsupported,
    #[error("curve {0} carries outside edges but disappears during the trace")]
    ContextLost(u32),
    #[error("template script does not reproduce the input")]
    ScriptMismatch,
    #[error(transparent)]
    Driver(#[from] driver::DriverError),
}

/// One curve of a tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Node {
    pub weight: i64,
    /// Bracket group, named by its smallest member id.
    pub group: Option<u32>,
}

/// A tree of curves; bracketed nodes are grouped into rationally blown-down paths.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DecoratedTree {
    nodes: BTreeMap<u32, Node>,
    edges: BTreeSet<(u32, u32)>,
}

fn edge(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl DecoratedTree {
    /// Validates and normalizes; group ids are renamed to their smallest member.
    pub fn new(
        nodes: impl IntoIterator<Item = (u32, Node)>,
        edges: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Self, TreeError> {
        let mut map = BTreeMap::new();
        for (id, n) in nodes {
            if map.insert(id, n).is_some() {
                return Err(TreeError::DuplicateNode(id));
            }
            if n.weight < 1 || (n.group.is_some() && n.weight < 2) {
                return Err(TreeError::BadWeight(id));
            }
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b || !map.contains_key(&a) || !map.contains_key(&b) || !set.insert(edge(a, b)) {
                return Err(TreeError::BadEdge(a, b));
            }
        }
        let t = Self { nodes: map, edges: set };
        if t.nodes.is_empty() || t.edges.len() + 1 != t.nodes.len() || !t.connected(&t.node_ids()) {
            return Err(TreeError::NotATree);
        }
        t.normalize_groups()
    }

    fn normalize_groups(mut self) -> Result<Self, TreeError> {
        let mut members: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for (&id, n) in &self.nodes {
            if let Some(g) = n.group {
                members.entry(g).or_default().push(id);
            }
        }
        for (g, ids) in members {
            let set: BTreeSet<u32> = ids.iter().copied().collect();
            let inner = self.edges.iter().filter(|(a, b)| set.contains(a) && set.contains(b)).count();
            let path = inner + 1 == ids.len()
                && self.connected(&set)
                && ids.iter().all(|&x| self.neighbors(x).filter(|y| set.contains(y)).count() <= 2);
            if !path {
                return Err(TreeError::BadGroup(g));
            }
            let name = ids[0];
            for id in ids {
                self.nodes.get_mut(&id).expect("member").group = Some(name);
            }
        }
        Ok(self)
    }

    fn connected(&self, set: &BTreeSet<u32>) -> bool {
        let Some(&first) = set.iter().next() else {
            return true;
        };
        let mut seen = BTreeSet::from([first]);
        let mut stack = vec![first];
        while let Some(x) = stack.pop() {
            for y in self.neighbors(x) {
                if set.contains(&y) && seen.insert(y) {
                    stack.push(y);
                }
            }
        }
        seen.len() == set.len()
    }

    pub fn node_ids(&self) -> BTreeSet<u32> {
        self.nodes.keys().copied().collect()
    }

    pub fn nodes(&self) -> &BTreeMap<u32, Node> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<(u32, u32)> {
        &self.edges
    }

    pub fn node(&self, id: u32) -> Option<Node> {
        self.nodes.get(&id).copied()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn neighbors(&self, id: u32) -> impl Iterator<Item = u32> + '_ {
        self.edges.iter().filter_map(move |&(a, b)| {
            if a == id {
                Some(b)
            } else if b == id {
                Some(a)
            } else {
                None
            }
        })
    }

    pub fn degree(&self, id: u32) -> usize {
        self.neighbors(id).count()
    }

    pub fn adjacent(&self, a: u32, b: u32) -> bool {
        self.edges.contains(&edge(a, b))
    }

    fn fresh_ids(&self, k: usize) -> Vec<u32> {
        let next = self.nodes.keys().next_back().map_or(1, |m| m + 1);
        (next..next + k as u32).collect()
    }

    /// Members of bracket group `g`, ordered along the path from its smaller end.
    pub fn group_path(&self, g: u32) -> Vec<u32> {
        let set: BTreeSet<u32> = self
            .nodes
            .iter()
            .filter(|(_, n)| n.group == Some(g))
            .map(|(&id, _)| id)
            .collect();
        let ends: Vec<u32> = set
            .iter()
            .copied()
            .filter(|&x| self.neighbors(x).filter(|y| set.contains(y)).count() <= 1)
            .collect();
        let Some(&start) = ends.first() else {
            return Vec::new();
        };
        let mut out = vec![start];
        let mut prev = None;
        let mut cur = start;
        while let Some(next) = self
            .neighbors(cur)
            .find(|y| set.contains(y) && Some(*y) != prev)
        {
            out.push(next);
            prev = Some(cur);
            cur = next;
        }
        out
    }

    /// All bracket group names.
    pub fn groups(&self) -> BTreeSet<u32> {
        self.nodes.values().filter_map(|n| n.group).collect()
    }

    /// Subtree induced on `keep`, which must be connected.
    pub fn induced(&self, keep: &BTreeSet<u32>) -> Result<Self, TreeError> {
        Self::new(
            self.nodes.iter().filter(|(id, _)| keep.contains(id)).map(|(&i, &n)| (i, n)),
            self.edges
                .iter()
                .copied()
                .filter(|(a, b)| keep.contains(a) && keep.contains(b)),
        )
    }

    fn with_changes(
        &self,
        remove_edges: &[(u32, u32)],
        add_nodes: &[(u32, Node)],
        add_edges: &[(u32, u32)],
        set_nodes: &[(u32, Node)],
    ) -> Result<Self, TreeError> {
        let mut nodes = self.nodes.clone();
        for &(id, n) in add_nodes.iter().chain(set_nodes) {
            nodes.insert(id, n);
        }
        let mut edges = self.edges.clone();
        for &(a, b) in remove_edges {
            edges.remove(&edge(a, b));
        }
        edges.extend(add_edges.iter().map(|&(a, b)| edge(a, b)));
        Self::new(nodes, edges)
    }
}

impl fmt::Display for DecoratedTree {
    /// Compact form `1=[5]#1,2=[2]#1,4=3;1-2,1-4`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (id, n)) in self.nodes.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            match n.group {
                Some(g) => write!(f, "{id}=[{}]#{g}", n.weight)?,
                None => write!(f, "{id}={}", n.weight)?,
            }
        }
        f.write_str(";")?;
        for (k, (a, b)) in self.edges.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}-{b}")?;
        }
        Ok(())
    }
}

impl FromStr for DecoratedTree {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = |what: &str| TreeError::Parse(String::from(what));
        let (nodes, edges) = s.split_once(';').ok_or(bad("missing ';'"))?;
        let num = |t: &str| t.parse::<u32>().map_err(|_| bad("bad number"));
        let mut ns = Vec::new();
        for item in nodes.split(',') {
            let (id, rest) = item.split_once('=').ok_or(bad("expected id=weight"))?;
            let node = if let Some(inner) = rest.strip_prefix('[') {
                let (w, g) = inner.split_once("]#").ok_or(bad("expected [w]#group"))?;
                Node { weight: num(w)?.into(), group: Some(num(g)?) }
            } else {
                Node { weight: num(rest)?.into(), group: None }
            };
            ns.push((num(id)?, node));
        }
        let mut es = Vec::new();
        if !edges.is_empty() {
            for item in edges.split(',') {
                let (a, b) = item.split_once('-').ok_or(bad("expected a-b"))?;
                es.push((num(a)?, num(b)?));
            }
        }
        DecoratedTree::new(ns, es)
    }
}

fn antiflip_with_ids(t: &DecoratedTree, d: u32, c: u32, fresh: &[u32]) -> Result<DecoratedTree, TreeError> {
    let invalid = TreeError::InvalidSite { d, c };
    let (Some(nd), Some(nc)) = (t.node(d), t.node(c)) else {
        return Err(invalid);
    };
    let w = nd.weight;
    let ok = t.adjacent(d, c)
        && nd.group.is_none()
        && nc.group.is_none()
        && w >= 3
        && t.neighbors(d).filter(|&y| y != c).count() <= 1
        && fresh.len() == (w - 2) as usize
        && fresh.iter().all(|id| t.node(*id).is_none());
    if !ok {
        return Err(invalid);
    }
    let (twos, minus_one) = fresh.split_at(fresh.len() - 1);
    let minus_one = minus_one[0];
    let bracket = |weight| Node { weight, group: Some(d) };
    let mut add_nodes: Vec<(u32, Node)> = twos.iter().map(|&id| (id, bracket(2))).collect();
    add_nodes.push((minus_one, Node { weight: 1, group: None }));
    let mut chain = vec![d];
    chain.extend_from_slice(fresh);
    chain.push(c);
    let add_edges: Vec<(u32, u32)> = chain.windows(2).map(|p| (p[0], p[1])).collect();
    let set_nodes = [
        (d, bracket(w + 1)),
        (c, Node { weight: nc.weight + w - 2, group: None }),
    ];
    t.with_changes(&[(d, c)], &add_nodes, &add_edges, &set_nodes)
}

/// Antiflips the plain curve `d` of weight `w >= 3` towards its neighbor `c`.
///
/// `d` becomes the outer end of the bracket `[w+1, 2, ..., 2]`, followed by a new
/// (-1)-curve meeting `c`, whose weight grows by `w - 2`. New ids follow the largest id.
pub fn tree_antiflip(t: &DecoratedTree, d: u32, c: u32) -> Result<DecoratedTree, TreeError> {
    let w = t.node(d).ok_or(TreeError::UnknownNode(d))?.weight;
    if w < 3 {
        return Err(TreeError::InvalidSite { d, c });
    }
    antiflip_with_ids(t, d, c, &t.fresh_ids((w - 2) as usize))
}

/// Groups the plain curves along `path` into one bracket.
pub fn tree_blow_down(t: &DecoratedTree, path: &[u32]) -> Result<DecoratedTree, TreeError> {
    let not_path = || TreeError::NotAPath(path.to_vec());
    let distinct: BTreeSet<u32> = path.iter().copied().collect();
    if path.is_empty() || distinct.len() != path.len() || path.windows(2).any(|p| !t.adjacent(p[0], p[1])) {
        return Err(not_path());
    }
    let mut ws = Vec::with_capacity(path.len());
    for &id in path {
        let n = t.node(id).ok_or(TreeError::UnknownNode(id))?;
        if n.group.is_some() || n.weight < 2 {
            return Err(not_path());
        }
        ws.push(n.weight);
    }
    if !is_t0(&ws) {
        return Err(TreeError::NotT0(ws));
    }
    let g = *distinct.iter().next().expect("nonempty");
    let set: Vec<(u32, Node)> = path
        .iter()
        .map(|&id| (id, Node { weight: t.nodes[&id].weight, group: Some(g) }))
        .collect();
    t.with_changes(&[], &[], &[], &set)
}

/// Drops every bracket decoration.
pub fn unbracket(t: &DecoratedTree) -> DecoratedTree {
    let mut out = t.clone();
    for n in out.nodes.values_mut() {
        n.group = None;
    }
    out
}

/// Removes all brackets, then contracts (-1)-curves of degree at most 2, lowest id first.
pub fn contract_tree(t: &DecoratedTree) -> Result<DecoratedTree, TreeError> {
    let mut cur = unbracket(t);
    loop {
        let Some((&id, _)) = cur.nodes.iter().find(|(&id, n)| n.weight == 1 && cur.degree(id) <= 2) else {
            break;
        };
        let nbrs: Vec<u32> = cur.neighbors(id).collect();
        if nbrs.is_empty() {
            return Err(TreeError::NotContractible(id));
        }
        let mut nodes = cur.nodes.clone();
        nodes.remove(&id);
        for y in &nbrs {
            let n = nodes.get_mut(y).expect("neighbor");
            n.weight -= 1;
            if n.weight < 1 {
                return Err(TreeError::NotContractible(id));
            }
        }
        let mut edges: Vec<(u32, u32)> =
            cur.edges.iter().copied().filter(|&(a, b)| a != id && b != id).collect();
        if let [a, b] = nbrs[..] {
            edges.push((a, b));
        }
        cur = DecoratedTree::new(nodes, edges)?;
    }
    if let Some((&id, _)) = cur.nodes.iter().find(|(_, n)| n.weight == 1) {
        return Err(TreeError::NotContractible(id));
    }
    Ok(cur)
}

/// Labeled isomorphism from `a` onto `b`: weights, bracket flags and same-group edges.
pub fn find_isomorphism(a: &DecoratedTree, b: &DecoratedTree) -> Option<BTreeMap<u32, u32>> {
    if a.len() != b.len() || a.edges.len() != b.edges.len() {
        return None;
    }
    let label = |t: &DecoratedTree, x: u32| {
        let n = t.nodes[&x];
        (n.weight, n.group.is_some(), t.degree(x))
    };
    // visit `a` in breadth-first order so each node after the first has a mapped neighbor
    let root = *a.nodes.keys().next()?;
    let mut order = vec![root];
    let mut seen = BTreeSet::from([root]);
    let mut k = 0;
    while k < order.len() {
        let x = order[k];
        for y in a.neighbors(x) {
            if seen.insert(y) {
                order.push(y);
            }
        }
        k += 1;
    }
    let same_group = |t: &DecoratedTree, x: u32, y: u32| {
        let (gx, gy) = (t.nodes[&x].group, t.nodes[&y].group);
        gx.is_some() && gx == gy
    };
    fn search(
        k: usize,
        order: &[u32],
        a: &DecoratedTree,
        b: &DecoratedTree,
        map: &mut BTreeMap<u32, u32>,
        used: &mut BTreeSet<u32>,
        label: &dyn Fn(&DecoratedTree, u32) -> (i64, bool, usize),
        same_group: &dyn Fn(&DecoratedTree, u32, u32) -> bool,
    ) -> bool {
        if k == order.len() {
            return true;
        }
        let x = order[k];
        let candidates: Vec<u32> = b.nodes.keys().copied().filter(|y| !used.contains(y)).collect();
        for y in candidates {
            if label(a, x) != label(b, y) {
                continue;
            }
            let consistent = map.iter().all(|(&px, &py)| {
                let adj = a.adjacent(x, px);
                adj == b.adjacent(y, py) && (!adj || same_group(a, x, px) == same_group(b, y, py))
            });
            if !consistent {
                continue;
            }
            map.insert(x, y);
            used.insert(y);
            if search(k + 1, order, a, b, map, used, label, same_group) {
                return true;
            }
            map.remove(&x);
            used.remove(&y);
        }
        false
    }
    let mut map = BTreeMap::new();
    let mut used = BTreeSet::new();
    search(0, &order, a, b, &mut map, &mut used, &label, &same_group).then_some(map)
}

/// One scripted step on template ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeStep {
    /// Antiflip `d` towards `c`; `fresh` names the new 2-curves from `d` inwards, then the (-1)-curve.
    Antiflip { d: u32, c: u32, fresh: Vec<u32> },
    BlowDown { path: Vec<u32> },
}

impl TreeStep {
    fn apply(&self, t: &DecoratedTree) -> Result<DecoratedTree, TreeError> {
        match self {
            TreeStep::Antiflip { d, c, fresh } => antiflip_with_ids(t, *d, *c, fresh),
            TreeStep::BlowDown { path } => tree_blow_down(t, path),
        }
    }

    fn kind(&self) -> MoveKind {
        match self {
            TreeStep::Antiflip { .. } => MoveKind::Antiflip,
            TreeStep::BlowDown { .. } => MoveKind::RationalBlowDown,
        }
    }

    fn site(&self) -> String {
        match self {
            TreeStep::Antiflip { d, c, .. } => format!("{d}>{c}"),
            TreeStep::BlowDown { path } => {
                let parts: Vec<String> = path.iter().map(|x| format!("{x}")).collect();
                parts.join("-")
            }
        }
    }

    fn relabel(&self, m: &BTreeMap<u32, u32>) -> TreeStep {
        let f = |x: &u32| m[x];
        match self {
            TreeStep::Antiflip { d, c, fresh } => TreeStep::Antiflip {
                d: f(d),
                c: f(c),
                fresh: fresh.iter().map(f).collect(),
            },
            TreeStep::BlowDown { path } => TreeStep::BlowDown { path: path.iter().map(f).collect() },
        }
    }
}

/// A non-linear bracket subgraph with its scripted construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaTemplate {
    pub index: u8,
    pub target: DecoratedTree,
    /// First graph of the move sequence as drawn.
    pub printed_start: DecoratedTree,
    pub script: Vec<TreeStep>,
}

impl GammaTemplate {
    /// Start obtained by fully resolving the target.
    pub fn derived_start(&self) -> DecoratedTree {
        contract_tree(&self.target).expect("template targets contract")
    }

    /// Runs the script from the derived start.
    pub fn replay(&self) -> Result<TreeTrace, TreeError> {
        run_script(&self.derived_start(), &self.script)
    }
}

/// A sequence of tree moves with snapshots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeMove {
    pub kind: MoveKind,
    /// `d>c` for antiflips, node path for blow-downs, chain site for lifted moves.
    pub site: String,
    pub before: DecoratedTree,
    pub after: DecoratedTree,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeTrace {
    pub start: DecoratedTree,
    pub moves: Vec<TreeMove>,
    pub end: DecoratedTree,
}

fn run_script(start: &DecoratedTree, script: &[TreeStep]) -> Result<TreeTrace, TreeError> {
    let mut state = start.clone();
    let mut moves = Vec::with_capacity(script.len());
    for step in script {
        let after = step.apply(&state)?;
        moves.push(TreeMove { kind: step.kind(), site: step.site(), before: state, after: after.clone() });
        state = after;
    }
    Ok(TreeTrace { start: start.clone(), moves, end: state })
}

fn af(d: u32, c: u32, fresh: &[u32]) -> TreeStep {
    TreeStep::Antiflip { d, c, fresh: fresh.to_vec() }
}

fn bd(path: &[u32]) -> TreeStep {
    TreeStep::BlowDown { path: path.to_vec() }
}

// Ids: 1 centre, 2 left arm, 3 right arm, 4 top arm, larger ids further out.
const TEMPLATE_DATA: [(&str, &str); 9] = [
    (
        "1=[5]#1,2=[2]#1,3=[3]#1,4=[4]#4,5=1;1-2,1-3,1-5,4-5",
        "1=4,2=2,3=3,4=3;1-2,1-3,1-4",
    ),
    (
        "1=[5]#1,2=[2]#1,3=[3]#1,4=[5]#4,5=1,6=[2]#4;1-2,1-3,1-5,5-6,4-6",
        "1=3,2=2,3=3,4=4;1-2,1-3,1-4",
    ),
    (
        "1=[5]#1,2=[2]#1,3=[3]#1,4=[4]#4,5=1,6=[4]#6,7=1;1-2,1-3,1-5,5-6,6-7,4-7",
        "1=3,2=2,3=3,4=3,6=2;1-2,1-3,1-6,4-6",
    ),
    (
        "1=[5]#1,2=[2]#1,3=[4]#3,4=[4]#4,5=1,6=1;1-2,1-6,3-6,1-5,4-5",
        "1=3,2=2,3=3,4=3;1-2,1-3,1-4",
    ),
    (
        "1=[5]#1,2=[2]#1,3=[4]#3,4=[4]#4,5=1,6=1,7=1,8=[4]#8;1-2,1-6,3-6,3-7,7-8,1-5,4-5",
        "1=3,2=2,3=2,4=3,8=3;1-2,1-3,3-8,1-4",
    ),
    (
        "1=[5]#1,2=[2]#1,3=[3]#1,4=[4]#4,5=1,6=1,7=[4]#7;1-2,1-3,3-6,6-7,1-5,4-5",
        "1=4,2=2,3=2,4=3,7=3;1-2,1-3,3-7,1-4",
    ),
    (
        "1=[6]#1,2=[4]#2,3=[2]#1,4=[2]#1,5=[3]#1,6=1;1-4,1-3,3-5,1-6,2-6",
        "1=5,2=3,3=2,4=2,5=3;1-4,1-3,3-5,1-2",
    ),
    (
        "1=[5]#1,2=[3]#1,3=[6]#3,4=[2]#1,6=1,7=[2]#3,8=[2]#3;1-2,1-4,1-6,6-7,7-8,3-8",
        "1=2,2=3,3=5,4=2;1-2,1-4,1-3",
    ),
    (
        "1=[5]#1,2=[5]#2,3=[4]#3,4=[2]#1,5=1,6=1,7=[2]#2;1-4,1-6,6-7,2-7,1-5,3-5",
        "1=2,2=4,3=3,4=2;1-4,1-2,1-3",
    ),
];

/// The nine non-linear templates.
pub fn templates() -> Vec<GammaTemplate> {
    let scripts: [Vec<TreeStep>; 9] = [
        vec![af(4, 1, &[5]), bd(&[2, 1, 3])],
        vec![af(4, 1, &[6, 5]), bd(&[2, 1, 3])],
        vec![af(4, 6, &[7]), af(6, 1, &[5]), bd(&[2, 1, 3])],
        vec![af(3, 1, &[6]), af(4, 1, &[5]), bd(&[2, 1])],
        vec![af(8, 3, &[7]), af(3, 1, &[6]), af(4, 1, &[5]), bd(&[2, 1])],
        vec![af(7, 3, &[6]), af(4, 1, &[5]), bd(&[2, 1, 3])],
        vec![af(2, 1, &[6]), bd(&[4, 1, 3, 5])],
        vec![af(3, 1, &[8, 7, 6]), bd(&[2, 1, 4])],
        vec![af(2, 1, &[7, 6]), af(3, 1, &[5]), bd(&[4, 1])],
    ];
    TEMPLATE_DATA
        .iter()
        .zip(scripts)
        .enumerate()
        .map(|(k, ((target, printed), script))| GammaTemplate {
            index: k as u8 + 1,
            target: target.parse().expect("template target"),
            printed_start: printed.parse().expect("template start"),
            script,
        })
        .collect()
}

/// Shape of the smallest subtree containing every bracket.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GammaClass {
    /// The subtree is a path; node ids in order.
    Linear(Vec<u32>),
    Gamma(u8),
    Unsupported,
}

/// Smallest connected set of nodes containing every bracketed node.
pub fn bracket_hull(t: &DecoratedTree) -> BTreeSet<u32> {
    let mut keep = t.node_ids();
    loop {
        let leaf = keep.iter().copied().find(|&x| {
            t.nodes[&x].group.is_none() && t.neighbors(x).filter(|y| keep.contains(y)).count() <= 1
        });
        match leaf {
            Some(x) => {
                keep.remove(&x);
            }
            None => return keep,
        }
    }
}

fn hull_path(t: &DecoratedTree, hull: &BTreeSet<u32>) -> Option<Vec<u32>> {
    let deg = |x: u32| t.neighbors(x).filter(|y| hull.contains(y)).count();
    if hull.iter().any(|&x| deg(x) > 2) {
        return None;
    }
    let Some(start) = hull.iter().copied().find(|&x| deg(x) <= 1) else {
        return Some(Vec::new());
    };
    let mut out = vec![start];
    let mut prev = None;
    let mut cur = start;
    while let Some(next) = t.neighbors(cur).find(|y| hull.contains(y) && Some(*y) != prev) {
        out.push(next);
        prev = Some(cur);
        cur = next;
    }
    Some(out)
}

/// Classifies the bracket subgraph as a path, one of the nine templates, or unsupported.
pub fn gamma_classify(t: &DecoratedTree) -> GammaClass {
    let hull = bracket_hull(t);
    if let Some(path) = hull_path(t, &hull) {
        return GammaClass::Linear(path);
    }
    let Ok(sub) = t.induced(&hull) else {
        return GammaClass::Unsupported;
    };
    templates()
        .iter()
        .find(|g| find_isomorphism(&g.target, &sub).is_some())
        .map_or(GammaClass::Unsupported, |g| GammaClass::Gamma(g.index))
}

fn path_chain(t: &DecoratedTree, path: &[u32]) -> DecoratedChain {
    let mut segs = Vec::new();
    let mut k = 0;
    while k < path.len() {
        let n = t.nodes[&path[k]];
        match n.group {
            None => {
                segs.push(Segment::Plain(n.weight));
                k += 1;
            }
            Some(g) => {
                let mut ws = Vec::new();
                while k < path.len() && t.nodes[&path[k]].group == Some(g) {
                    ws.push(t.nodes[&path[k]].weight);
                    k += 1;
                }
                segs.push(Segment::Bracket(ws));
            }
        }
    }
    DecoratedChain::new(segs).expect("path weights are valid")
}

/// Flat indices of `before` that survive a flip, in the order of the result.
fn flip_survivors(before: &DecoratedChain, s: FlipSite) -> Vec<usize> {
    let total = before.flatten().len();
    let ltr = |ch: &DecoratedChain, p: usize| -> Vec<usize> {
        let f0: usize = ch.segments()[..p - 1].iter().map(|s| s.weights().len()).sum();
        let shape = ltr_flip_shape(ch, p).expect("driver flips are valid");
        let t = shape.bracket.len();
        let keep_head = match shape.case {
            Case::A => shape.i,
            Case::B => 1,
        };
        (0..f0 + keep_head).chain(f0 + t + 1..total).collect()
    };
    match s.orientation {
        Orientation::LeftToRight => ltr(before, s.position),
        Orientation::Mirrored => {
            let m = before.mirror();
            ltr(&m, m.mirror_position(s.position))
                .into_iter()
                .rev()
                .map(|j| total - 1 - j)
                .collect()
        }
    }
}

fn lift(t: &DecoratedTree, path: &[u32], state: &DecoratedChain, ids: &[u32]) -> Result<DecoratedTree, TreeError> {
    let on_path: BTreeSet<u32> = path.iter().copied().collect();
    let alive: BTreeSet<u32> = ids.iter().copied().collect();
    let mut nodes: Vec<(u32, Node)> = t
        .nodes
        .iter()
        .filter(|(id, _)| !on_path.contains(id))
        .map(|(&id, &n)| (id, n))
        .collect();
    let mut k = 0;
    for seg in state.segments() {
        let ws = seg.weights();
        let group = seg.is_bracket().then(|| ids[k]);
        for &w in ws {
            nodes.push((ids[k], Node { weight: w, group }));
            k += 1;
        }
    }
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for &(a, b) in &t.edges {
        match (on_path.contains(&a), on_path.contains(&b)) {
            (false, false) => edges.push((a, b)),
            (true, true) => {}
            (true, false) | (false, true) => {
                let inner = if on_path.contains(&a) { a } else { b };
                if !alive.contains(&inner) {
                    return Err(TreeError::ContextLost(inner));
                }
                edges.push((a, b));
            }
        }
    }
    edges.extend(ids.windows(2).map(|p| (p[0], p[1])));
    DecoratedTree::new(nodes, edges)
}

fn lift_linear(t: &DecoratedTree, path: &[u32]) -> Result<TreeTrace, TreeError> {
    if path.is_empty() {
        return Ok(TreeTrace { start: t.clone(), moves: Vec::new(), end: t.clone() });
    }
    let up = driver::to_minimal(&path_chain(t, path))?;
    let mut ids = path.to_vec();
    let mut states = vec![lift(t, path, &up.start, &ids)?];
    for m in &up.moves {
        if let (MoveKind::Flip, MoveSite::Flip(s)) = (m.kind, m.site) {
            ids = flip_survivors(&m.before, s).into_iter().map(|j| ids[j]).collect();
        }
        states.push(lift(t, path, &m.after, &ids)?);
    }
    if states[0] != *t {
        return Err(TreeError::ScriptMismatch);
    }
    let moves: Vec<TreeMove> = up
        .moves
        .iter()
        .enumerate()
        .rev()
        .map(|(k, m)| {
            let inv: Move = m.inverse();
            TreeMove {
                kind: inv.kind,
                site: format!("{}", inv.site),
                before: states[k + 1].clone(),
                after: states[k].clone(),
            }
        })
        .collect();
    Ok(TreeTrace { start: states[states.len() - 1].clone(), moves, end: t.clone() })
}

/// Rational blow-downs and antiflips from the minimal resolution to `t`.
///
/// Linear bracket subgraphs reuse the chain driver; the nine templates replay
/// their scripts from the contraction of `t`. Curves outside the bracket
/// subgraph are never changed.
pub fn toi_trace(t: &DecoratedTree) -> Result<TreeTrace, TreeError> {
    match gamma_classify(t) {
        GammaClass::Unsupported => Err(TreeError::Unsupported),
        GammaClass::Linear(path) => lift_linear(t, &path),
        GammaClass::Gamma(k) => {
            let g = &templates()[usize::from(k) - 1];
            let sub = t.induced(&bracket_hull(t))?;
            let phi = find_isomorphism(&g.target, &sub).ok_or(TreeError::Unsupported)?;
            let script: Vec<TreeStep> = g.script.iter().map(|s| s.relabel(&phi)).collect();
            let trace = run_script(&contract_tree(t)?, &script)?;
            if trace.end != *t {
                return Err(TreeError::ScriptMismatch);
            }
            Ok(trace)
        }
    }
}
