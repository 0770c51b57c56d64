//! Representation graphs of two-row functions and their decomposition into
//! cycles, paths and stars.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::domain::FunctionTable;
use crate::error::{arg, Error, Result};

/// A directed edge between two `T` indices.
pub type Edge = (usize, usize);

/// The graph on `T` whose edges are the column images
/// `r -> (f(l0, r), f(l1, r))` of a two-row restriction of `f`.
///
/// Parallel edges are collapsed; `preimages[i]` lists every column mapping to
/// `edges[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepresentationGraph {
    pub row_pair: (usize, usize),
    pub vertices: Vec<usize>,
    pub edges: Vec<Edge>,
    pub preimages: Vec<Vec<usize>>,
}

impl RepresentationGraph {
    fn from_map(row_pair: (usize, usize), map: BTreeMap<Edge, Vec<usize>>) -> Self {
        let vertices: BTreeSet<usize> = map.keys().flat_map(|&(s, t)| [s, t]).collect();
        let (edges, preimages) = map.into_iter().unzip();
        Self { row_pair, vertices: vertices.into_iter().collect(), edges, preimages }
    }

    pub fn edge_index(&self, e: Edge) -> Option<usize> {
        self.edges.binary_search(&e).ok()
    }

    pub fn preimages_of(&self, e: Edge) -> Option<&[usize]> {
        self.edge_index(e).map(|i| self.preimages[i].as_slice())
    }

    /// The subgraph on `edges` (each must be an edge of `self`).
    pub fn restrict(&self, edges: &[Edge]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for &e in edges {
            let pre = self
                .preimages_of(e)
                .ok_or_else(|| Error::Argument(format!("edge {e:?} not in graph")))?;
            map.insert(e, pre.to_vec());
        }
        Ok(Self::from_map(self.row_pair, map))
    }

    /// Every column label covered by this graph.
    pub fn columns(&self) -> Vec<usize> {
        let mut cols: Vec<usize> = self.preimages.iter().flatten().copied().collect();
        cols.sort_unstable();
        cols
    }
}

/// Builds `G_f` for rows `(ell0, ell1)` over the columns `rsub`.
pub fn build_representation_graph(
    f: &FunctionTable,
    ell0: usize,
    ell1: usize,
    rsub: &[usize],
) -> Result<RepresentationGraph> {
    if ell0 == ell1 {
        return arg("the two rows of a representation graph must differ");
    }
    if ell0 >= f.left().len() || ell1 >= f.left().len() {
        return Err(Error::Index("row index outside L".into()));
    }
    if rsub.is_empty() {
        return arg("column subset must be non-empty");
    }
    let mut map: BTreeMap<Edge, Vec<usize>> = BTreeMap::new();
    for &r in rsub {
        if r >= f.right().len() {
            return Err(Error::Index(format!("column {r} outside R")));
        }
        map.entry((f.get(ell0, r), f.get(ell1, r))).or_default().push(r);
    }
    for pre in map.values_mut() {
        pre.sort_unstable();
        pre.dedup();
    }
    Ok(RepresentationGraph::from_map((ell0, ell1), map))
}

/// Shapes of graphs whose functions admit a cyclic partition of cost at most
/// their vertex count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PieceKind {
    Cycle,
    Path,
    InStar,
    OutStar,
    SingleEdge,
}

/// An edge set of a known nice shape.
///
/// `Cycle` and `Path` edges are stored in walk order; star edges in
/// ascending order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphPiece {
    pub kind: PieceKind,
    pub edges: Vec<Edge>,
}

impl GraphPiece {
    pub fn new(kind: PieceKind, edges: Vec<Edge>) -> Result<Self> {
        let p = Self { kind, edges };
        p.check_shape()?;
        Ok(p)
    }

    pub fn vertices(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.edges.iter().flat_map(|&(s, t)| [s, t]).collect();
        set.into_iter().collect()
    }

    /// Walk order `t_0, t_1, ...` of a cycle or path.
    pub fn walk(&self) -> Vec<usize> {
        let mut w: Vec<usize> = self.edges.iter().map(|e| e.0).collect();
        if matches!(self.kind, PieceKind::Path | PieceKind::SingleEdge) {
            if let Some(last) = self.edges.last() {
                w.push(last.1);
            }
        }
        w
    }

    pub fn check_shape(&self) -> Result<()> {
        let fail = |why: &str| Err(Error::Internal(format!("{:?} piece {:?}: {why}", self.kind, self.edges)));
        if self.edges.is_empty() {
            return fail("no edges");
        }
        let distinct = |xs: &[usize]| xs.iter().collect::<BTreeSet<_>>().len() == xs.len();
        match self.kind {
            PieceKind::SingleEdge if self.edges.len() != 1 => fail("expected exactly one edge"),
            PieceKind::SingleEdge if self.edges[0].0 == self.edges[0].1 => fail("a loop is a 1-cycle"),
            PieceKind::Cycle => {
                let q = self.edges.len();
                let linked = (0..q).all(|i| self.edges[i].1 == self.edges[(i + 1) % q].0);
                if linked && distinct(&self.walk()) {
                    Ok(())
                } else {
                    fail("not a simple closed walk")
                }
            }
            PieceKind::Path | PieceKind::SingleEdge => {
                let linked = self.edges.windows(2).all(|w| w[0].1 == w[1].0);
                if linked && distinct(&self.walk()) {
                    Ok(())
                } else {
                    fail("not a simple open walk")
                }
            }
            PieceKind::OutStar | PieceKind::InStar => {
                let (center, leaves): (Vec<usize>, Vec<usize>) = if self.kind == PieceKind::OutStar {
                    self.edges.iter().copied().unzip()
                } else {
                    self.edges.iter().map(|&(s, t)| (t, s)).unzip()
                };
                if center.iter().any(|&c| c != center[0]) {
                    fail("edges do not share a center")
                } else if leaves.contains(&center[0]) || !distinct(&leaves) {
                    fail("star leaves must be distinct and differ from the center")
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Splits off every directed cycle. Loops come first, as 1-cycles; then the
/// cycle found by a depth-first search from the lowest vertex is removed,
/// repeatedly, until the residual is acyclic.
pub fn decompose_cycles(g: &RepresentationGraph) -> Result<(Vec<GraphPiece>, RepresentationGraph)> {
    let mut cycles = Vec::new();
    let mut remaining: BTreeSet<Edge> = BTreeSet::new();
    for &e in &g.edges {
        if e.0 == e.1 {
            cycles.push(GraphPiece::new(PieceKind::Cycle, vec![e])?);
        } else {
            remaining.insert(e);
        }
    }
    while let Some(walk) = find_cycle(&remaining) {
        let q = walk.len();
        let edges: Vec<Edge> = (0..q).map(|i| (walk[i], walk[(i + 1) % q])).collect();
        for e in &edges {
            remaining.remove(e);
        }
        cycles.push(GraphPiece::new(PieceKind::Cycle, edges)?);
    }
    let rest: Vec<Edge> = remaining.into_iter().collect();
    let mut residual = g.restrict(&rest)?;
    residual.vertices = g.vertices.clone();
    residual.vertices.retain(|v| rest.iter().any(|&(s, t)| s == *v || t == *v));
    Ok((cycles, residual))
}

/// Vertex sequence of some directed cycle, or `None` when acyclic.
fn find_cycle(edges: &BTreeSet<Edge>) -> Option<Vec<usize>> {
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(s, t) in edges {
        adj.entry(s).or_default().push(t);
        adj.entry(t).or_default();
    }
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let mut mark: BTreeMap<usize, Mark> = adj.keys().map(|&v| (v, Mark::New)).collect();
    for &start in adj.keys() {
        if mark[&start] != Mark::New {
            continue;
        }
        // (vertex, next neighbor position)
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        mark.insert(start, Mark::Open);
        while let Some(&mut (v, ref mut pos)) = stack.last_mut() {
            if let Some(&w) = adj[&v].get(*pos) {
                *pos += 1;
                match mark[&w] {
                    Mark::Open => {
                        let from = stack.iter().position(|&(x, _)| x == w).unwrap();
                        return Some(stack[from..].iter().map(|&(x, _)| x).collect());
                    }
                    Mark::New => {
                        mark.insert(w, Mark::Open);
                        stack.push((w, 0));
                    }
                    Mark::Done => {}
                }
            } else {
                mark.insert(v, Mark::Done);
                stack.pop();
            }
        }
    }
    None
}

/// Weakly connected components of an edge set, each as ascending edges,
/// ordered by their smallest vertex.
pub fn weak_components(edges: &[Edge]) -> Vec<Vec<Edge>> {
    let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
    fn find(parent: &mut BTreeMap<usize, usize>, v: usize) -> usize {
        let p = *parent.entry(v).or_insert(v);
        if p == v {
            return v;
        }
        let root = find(parent, p);
        parent.insert(v, root);
        root
    }
    for &(s, t) in edges {
        let (a, b) = (find(&mut parent, s), find(&mut parent, t));
        if a != b {
            parent.insert(a.max(b), a.min(b));
        }
    }
    let mut groups: BTreeMap<usize, Vec<Edge>> = BTreeMap::new();
    for &e in edges {
        let root = find(&mut parent, e.0);
        groups.entry(root).or_default().push(e);
    }
    let mut comps: Vec<Vec<Edge>> = groups.into_values().collect();
    for c in &mut comps {
        c.sort_unstable();
    }
    comps.sort_by_key(|c| c.iter().flat_map(|&(s, t)| [s, t]).min());
    comps
}

fn is_acyclic(edges: &[Edge]) -> bool {
    let set: BTreeSet<Edge> = edges.iter().copied().collect();
    edges.iter().all(|e| e.0 != e.1) && find_cycle(&set).is_none()
}

/// Breadth-first spanning tree from the smallest vertex: visit order and the
/// tree edge into each non-root vertex.
fn bfs_tree(edges: &[Edge]) -> (Vec<usize>, BTreeMap<usize, Edge>) {
    let mut adj: BTreeMap<usize, Vec<(usize, Edge)>> = BTreeMap::new();
    for &e in edges {
        adj.entry(e.0).or_default().push((e.1, e));
        adj.entry(e.1).or_default().push((e.0, e));
    }
    let Some(&root) = adj.keys().next() else {
        return (Vec::new(), BTreeMap::new());
    };
    let mut order = vec![root];
    let mut seen: BTreeSet<usize> = [root].into();
    let mut parent_edge = BTreeMap::new();
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for &(w, e) in &adj[&v] {
            if seen.insert(w) {
                parent_edge.insert(w, e);
                order.push(w);
                queue.push_back(w);
            }
        }
    }
    (order, parent_edge)
}

fn classify_pair(e1: Edge, e2: Edge) -> Result<GraphPiece> {
    if e1.1 == e2.0 {
        GraphPiece::new(PieceKind::Path, vec![e1, e2])
    } else if e2.1 == e1.0 {
        GraphPiece::new(PieceKind::Path, vec![e2, e1])
    } else if e1.0 == e2.0 {
        GraphPiece::new(PieceKind::OutStar, vec![e1.min(e2), e1.max(e2)])
    } else if e1.1 == e2.1 {
        GraphPiece::new(PieceKind::InStar, vec![e1.min(e2), e1.max(e2)])
    } else {
        Err(Error::Internal(format!("edges {e1:?} and {e2:?} share no endpoint")))
    }
}

/// Splits a weakly connected acyclic edge set into `⌊|E|/2⌋` two-edge pieces
/// sharing an endpoint, plus one single edge iff `|E|` is odd.
///
/// For odd `|E|` the single edge is chosen first so that the remainder stays
/// connected apart from at most one isolated vertex: a non-tree edge of a BFS
/// spanning tree if there is one, otherwise the tree edge of the last-visited
/// leaf. The remainder is then paired bottom-up over its own spanning tree.
pub fn decompose_pairs(component: &[Edge]) -> Result<(Vec<GraphPiece>, Option<GraphPiece>)> {
    if component.is_empty() {
        return Ok((Vec::new(), None));
    }
    if weak_components(component).len() != 1 {
        return arg("pair decomposition needs a weakly connected edge set");
    }
    if !is_acyclic(component) {
        return arg("pair decomposition needs an acyclic edge set");
    }
    let mut edges: Vec<Edge> = component.to_vec();
    edges.sort_unstable();
    edges.dedup();

    let mut extra = None;
    if edges.len() % 2 == 1 {
        let (order, parent_edge) = bfs_tree(&edges);
        let tree: BTreeSet<Edge> = parent_edge.values().copied().collect();
        let removed = edges
            .iter()
            .copied()
            .find(|e| !tree.contains(e))
            .unwrap_or_else(|| parent_edge[order.last().unwrap()]);
        edges.retain(|&e| e != removed);
        extra = Some(GraphPiece::new(PieceKind::SingleEdge, vec![removed])?);
    }
    Ok((pair_even(&edges)?, extra))
}

fn pair_even(edges: &[Edge]) -> Result<Vec<GraphPiece>> {
    if edges.is_empty() {
        return Ok(Vec::new());
    }
    let (order, parent_edge) = bfs_tree(edges);
    let mut incident: BTreeMap<usize, Vec<Edge>> = BTreeMap::new();
    for &e in edges {
        incident.entry(e.0).or_default().push(e);
        incident.entry(e.1).or_default().push(e);
    }
    let mut used: BTreeSet<Edge> = BTreeSet::new();
    let mut pieces = Vec::with_capacity(edges.len() / 2);
    for &v in order.iter().rev() {
        let up = parent_edge.get(&v).copied();
        let mut open: Vec<Edge> = incident[&v]
            .iter()
            .copied()
            .filter(|e| !used.contains(e) && Some(*e) != up)
            .collect();
        if open.len() % 2 == 1 {
            match up {
                Some(u) => open.push(u),
                None => return Err(Error::Internal("odd edge count left at the root".into())),
            }
        }
        for pair in open.chunks(2) {
            used.insert(pair[0]);
            used.insert(pair[1]);
            pieces.push(classify_pair(pair[0], pair[1])?);
        }
    }
    if used.len() != edges.len() {
        return Err(Error::Internal("pairing left edges unpaired".into()));
    }
    Ok(pieces)
}

/// Groups an acyclic edge set by source vertex: one out-star per vertex with
/// positive out-degree.
pub fn decompose_outstars(component: &[Edge]) -> Result<Vec<GraphPiece>> {
    if !is_acyclic(component) {
        return arg("out-star decomposition needs an acyclic edge set");
    }
    star_groups(component, PieceKind::OutStar, |e| e.0)
}

/// Mirror of [`decompose_outstars`], grouping by target vertex.
pub fn decompose_instars(component: &[Edge]) -> Result<Vec<GraphPiece>> {
    if !is_acyclic(component) {
        return arg("in-star decomposition needs an acyclic edge set");
    }
    star_groups(component, PieceKind::InStar, |e| e.1)
}

fn star_groups(edges: &[Edge], kind: PieceKind, center: impl Fn(&Edge) -> usize) -> Result<Vec<GraphPiece>> {
    let mut groups: BTreeMap<usize, BTreeSet<Edge>> = BTreeMap::new();
    for e in edges {
        groups.entry(center(e)).or_default().insert(*e);
    }
    groups
        .into_values()
        .map(|es| GraphPiece::new(kind, es.into_iter().collect()))
        .collect()
}

/// If the edge set as a whole is a nice graph, that single piece.
pub fn nice_shape(edges: &[Edge]) -> Option<GraphPiece> {
    let mut es: Vec<Edge> = edges.to_vec();
    es.sort_unstable();
    es.dedup();
    match es.len() {
        0 => return None,
        1 if es[0].0 == es[0].1 => return GraphPiece::new(PieceKind::Cycle, es).ok(),
        1 => return GraphPiece::new(PieceKind::SingleEdge, es).ok(),
        _ => {}
    }
    for kind in [PieceKind::OutStar, PieceKind::InStar] {
        if let Ok(p) = GraphPiece::new(kind, es.clone()) {
            return Some(p);
        }
    }
    // path or cycle: chain the edges from a start vertex
    let mut next: BTreeMap<usize, Edge> = BTreeMap::new();
    for &e in &es {
        if next.insert(e.0, e).is_some() {
            return None;
        }
    }
    let targets: BTreeSet<usize> = es.iter().map(|e| e.1).collect();
    let start = es.iter().map(|e| e.0).find(|s| !targets.contains(s));
    let (kind, first) = match start {
        Some(s) => (PieceKind::Path, s),
        None => (PieceKind::Cycle, es[0].0),
    };
    let mut walk = Vec::with_capacity(es.len());
    let mut v = first;
    while let Some(&e) = next.get(&v) {
        if walk.len() == es.len() {
            break;
        }
        walk.push(e);
        v = e.1;
        if kind == PieceKind::Cycle && v == first {
            break;
        }
    }
    if walk.len() != es.len() {
        return None;
    }
    GraphPiece::new(kind, walk).ok()
}
