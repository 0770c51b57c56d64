use rayon::prelude::*;

use super::graph::{
    build_representation_graph, decompose_cycles, decompose_instars, decompose_outstars,
    decompose_pairs, nice_shape, weak_components, Edge, GraphPiece, PieceKind, RepresentationGraph,
};
use super::{CyclicMinor, CyclicPartition};
use crate::domain::FunctionTable;
use crate::error::{arg, Error, Result};

/// Whether to also try the transposed function `f'(r, l) = f(l, r)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SwapPolicy {
    /// Build both orientations and keep the cheaper one.
    #[default]
    Auto,
    /// Always pair columns instead of rows.
    On,
    /// Always pair rows.
    Off,
}

/// How rows of `L` are grouped into pairs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RowPairing {
    /// `(0,1), (2,3), ...`; with odd `|L|` the last row is left single.
    #[default]
    Consecutive,
    /// Repeatedly pair the two remaining rows with the cheapest two-row
    /// partition.
    Greedy,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PartitionOptions {
    pub swap: SwapPolicy,
    pub pairing: RowPairing,
}

/// The floored cost guarantee for `|L| = l`, `|R| = r`, `|T| = t`:
/// `l/2 · (4r+t)/3` for even `l`, `r + (l-1)/2 · (4r+t)/3` for odd `l`.
pub fn lemma_bound(l: usize, r: usize, t: usize) -> usize {
    if l.is_multiple_of(2) {
        l * (4 * r + t) / 6
    } else {
        r + (l - 1) * (4 * r + t) / 6
    }
}

/// The bound [`build_partition`] guarantees for `f` under `swap`.
pub fn partition_bound(f: &FunctionTable, swap: SwapPolicy) -> usize {
    let (l, r, t) = (f.left().len(), f.right().len(), f.target().len());
    match swap {
        SwapPolicy::Off => lemma_bound(l, r, t),
        SwapPolicy::On => lemma_bound(r, l, t),
        SwapPolicy::Auto => lemma_bound(l, r, t).min(lemma_bound(r, l, t)),
    }
}

fn piece_cost(p: &GraphPiece) -> usize {
    match p.kind {
        PieceKind::Cycle | PieceKind::Path | PieceKind::SingleEdge => p.vertices().len(),
        PieceKind::OutStar | PieceKind::InStar => p.edges.len() + 1,
    }
}

fn preimages(g: &RepresentationGraph, e: Edge) -> Result<&[usize]> {
    g.preimages_of(e)
        .ok_or_else(|| Error::Internal(format!("piece edge {e:?} is not in the representation graph")))
}

/// Cyclic minors covering `{l0, l1} x (preimages of the piece's edges)`.
///
/// Cycles and paths `t_0 -> t_1 -> ...` become one minor with `k` equal to
/// the vertex count: `sigma_a(l0) = 0`, `sigma_a(l1) = 1`, a column on edge
/// `(t_i, t_{i+1})` gets `sigma_b = i`, and `sigma_c(i) = t_i`. Stars become
/// constant minors: the center row over all the star's columns plus, on the
/// other row, one minor per edge.
pub fn piece_to_minors(
    f: &FunctionTable,
    piece: &GraphPiece,
    g: &RepresentationGraph,
) -> Result<Vec<CyclicMinor>> {
    piece.check_shape()?;
    let (l0, l1) = g.row_pair;
    match piece.kind {
        PieceKind::Cycle | PieceKind::Path | PieceKind::SingleEdge => {
            let walk = piece.walk();
            let k = walk.len();
            let mut b = Vec::new();
            for (i, &e) in piece.edges.iter().enumerate() {
                b.extend(preimages(g, e)?.iter().map(|&r| (r, i)));
            }
            let minor = CyclicMinor::new(f, vec![(l0, 0), (l1, 1 % k)], b, walk)?;
            Ok(vec![minor])
        }
        PieceKind::OutStar | PieceKind::InStar => {
            let (center_row, leaf_row) = if piece.kind == PieceKind::OutStar { (l0, l1) } else { (l1, l0) };
            let center = if piece.kind == PieceKind::OutStar { piece.edges[0].0 } else { piece.edges[0].1 };
            let constant = |row: usize, cols: Vec<usize>, value: usize| {
                CyclicMinor::new(f, vec![(row, 0)], cols.into_iter().map(|c| (c, 0)).collect(), vec![value])
            };
            let mut all_cols = Vec::new();
            let mut minors = Vec::with_capacity(piece.edges.len() + 1);
            for &e in &piece.edges {
                let cols = preimages(g, e)?.to_vec();
                all_cols.extend(&cols);
                let leaf = if piece.kind == PieceKind::OutStar { e.1 } else { e.0 };
                minors.push(constant(leaf_row, cols, leaf)?);
            }
            minors.insert(0, constant(center_row, all_cols, center)?);
            Ok(minors)
        }
    }
}

/// A representation graph and the nice pieces its edges were split into.
#[derive(Clone, Debug)]
pub struct TwoRowDecomposition {
    pub graph: RepresentationGraph,
    pub pieces: Vec<GraphPiece>,
}

impl TwoRowDecomposition {
    pub fn cost(&self) -> usize {
        self.pieces.iter().map(piece_cost).sum()
    }

    pub fn to_partition(&self, f: &FunctionTable) -> Result<CyclicPartition> {
        let mut minors = Vec::new();
        for p in &self.pieces {
            minors.extend(piece_to_minors(f, p, &self.graph)?);
        }
        Ok(CyclicPartition::new(minors))
    }
}

/// Splits `G_f` of rows `(ell0, ell1)` into cycles and, per acyclic
/// component, the cheapest of several nice decompositions.
///
/// The pairs-versus-out-stars choice `2|V| >= |E| + 3` alone already meets
/// the cost guarantee; the component taken whole (when it is itself nice) and
/// the in-star grouping are also tried, and the cheapest wins with ties going
/// to the rule's choice.
pub fn two_row_decomposition(f: &FunctionTable, ell0: usize, ell1: usize) -> Result<TwoRowDecomposition> {
    let cols: Vec<usize> = (0..f.right().len()).collect();
    let graph = build_representation_graph(f, ell0, ell1, &cols)?;
    let (mut pieces, residual) = decompose_cycles(&graph)?;
    for comp in weak_components(&residual.edges) {
        pieces.extend(decompose_component(&comp)?);
    }
    Ok(TwoRowDecomposition { graph, pieces })
}

fn decompose_component(comp: &[Edge]) -> Result<Vec<GraphPiece>> {
    let v = comp.iter().flat_map(|&(s, t)| [s, t]).collect::<std::collections::BTreeSet<_>>().len();
    let e = comp.len();
    let by_pairs = || -> Result<Vec<GraphPiece>> {
        let (mut p, extra) = decompose_pairs(comp)?;
        p.extend(extra);
        Ok(p)
    };
    let rule = if 2 * v >= e + 3 { by_pairs()? } else { decompose_outstars(comp)? };
    let mut best_cost: usize = rule.iter().map(piece_cost).sum();
    let mut best = rule;
    let mut alternatives = Vec::new();
    if let Some(p) = nice_shape(comp) {
        alternatives.push(vec![p]);
    }
    alternatives.push(decompose_outstars(comp)?);
    alternatives.push(decompose_instars(comp)?);
    alternatives.push(by_pairs()?);
    for alt in alternatives {
        let c = alt.iter().map(piece_cost).sum();
        if c < best_cost {
            best_cost = c;
            best = alt;
        }
    }
    Ok(best)
}

/// A cyclic partition of the restriction of `f` to rows `{ell0, ell1}`.
pub fn two_row_partition(f: &FunctionTable, ell0: usize, ell1: usize) -> Result<CyclicPartition> {
    two_row_decomposition(f, ell0, ell1)?.to_partition(f)
}

/// One minor `{row} x R` with `k` = number of distinct values in the row.
fn single_row_minor(f: &FunctionTable, row: usize) -> Result<CyclicMinor> {
    let mut values: Vec<usize> = Vec::new();
    let mut b = Vec::with_capacity(f.right().len());
    for (r, &t) in f.row(row).iter().enumerate() {
        let pos = match values.iter().position(|&x| x == t) {
            Some(p) => p,
            None => {
                values.push(t);
                values.len() - 1
            }
        };
        b.push((r, pos));
    }
    CyclicMinor::new(f, vec![(row, 0)], b, values)
}

/// Disjoint row pairs plus the leftover row when `|L|` is odd.
type RowPairs = (Vec<(usize, usize)>, Option<usize>);

fn greedy_row_pairs(f: &FunctionTable) -> Result<RowPairs> {
    let n = f.left().len();
    let mut costs = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            costs.push((two_row_decomposition(f, a, b)?.cost(), a, b));
        }
    }
    costs.sort_unstable();
    let mut taken = vec![false; n];
    let mut pairs = Vec::new();
    for (_, a, b) in costs {
        if pairs.len() == n / 2 {
            break;
        }
        if !taken[a] && !taken[b] {
            taken[a] = true;
            taken[b] = true;
            pairs.push((a, b));
        }
    }
    pairs.sort_unstable();
    Ok((pairs, taken.iter().position(|t| !t)))
}

fn build_oriented(f: &FunctionTable, pairing: RowPairing) -> Result<CyclicPartition> {
    let n = f.left().len();
    let (pairs, single) = match pairing {
        RowPairing::Consecutive => {
            let pairs = (0..n / 2).map(|i| (2 * i, 2 * i + 1)).collect();
            (pairs, (n % 2 == 1).then_some(n - 1))
        }
        RowPairing::Greedy => greedy_row_pairs(f)?,
    };
    let parts: Vec<CyclicPartition> = pairs
        .par_iter()
        .map(|&(a, b)| two_row_partition(f, a, b))
        .collect::<Result<_>>()?;
    let mut minors: Vec<CyclicMinor> = parts.into_iter().flat_map(|p| p.minors).collect();
    if let Some(row) = single {
        minors.push(single_row_minor(f, row)?);
    }
    Ok(CyclicPartition::new(minors))
}

/// A cyclic partition of `f` whose cost is at most [`partition_bound`].
pub fn build_partition(f: &FunctionTable, options: PartitionOptions) -> Result<CyclicPartition> {
    if f.left().is_empty() || f.right().is_empty() {
        return arg("empty domains");
    }
    let rows = || build_oriented(f, options.pairing);
    let cols = || build_oriented(&f.transpose(), options.pairing).map(|p| p.transposed());
    match options.swap {
        SwapPolicy::Off => rows(),
        SwapPolicy::On => cols(),
        SwapPolicy::Auto => {
            let (a, b) = (rows()?, cols()?);
            Ok(if b.cost() < a.cost() { b } else { a })
        }
    }
}
